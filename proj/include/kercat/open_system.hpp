// Open-system evolution with 1-photon loss and dephasing.
//
// Two independent routes are provided on purpose:
//   - lindblad_propagate: time-stepped integration of the GKSL equation
//     (classical RK4 on the dissipator, Strang-split against the exact
//     unitary when a Hamiltonian is present);
//   - analytic_decay: the exact factored solution of the vectorized
//     free-decay equation, using that loss and dephasing close an su(1,1)
//     algebra. The three factors act elementwise / as a finite lowering
//     series, so this path involves no time stepping at all.
// The two must agree; the tests cross-validate them against each other.
//
// Dephasing uses the jump operator N by default. Using a a† = N + 1 instead
// changes nothing (a dissipator is invariant under adding multiples of the
// identity to its jump operator); both forms are exposed for the equivalence
// check.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <vector>

#include "kercat/dynamics.hpp"
#include "kercat/fock.hpp"
#include "kercat/threading.hpp"

namespace kercat {

struct LindbladParams {
    double kappa_1ph = 0.0; ///< 1-photon loss rate
    double kappa_phi = 0.0; ///< dephasing rate

    enum class Dephasing { number_op, a_adagger };
    Dephasing dephasing_form = Dephasing::number_op;

    LindbladParams() = default;
    LindbladParams(double k1, double kphi, Dephasing form = Dephasing::number_op)
        : kappa_1ph(k1), kappa_phi(kphi), dephasing_form(form) {
        if (k1 < 0.0 || kphi < 0.0) throw DomainError("LindbladParams: rates must be >= 0");
    }
};

/// Scalar factors of the factored free-decay channel
/// S(t) = exp(F0 K0²) exp(F3 K3) exp(F- K-).
struct SuperopFactors {
    double F0, F3, Fminus;

    static SuperopFactors at(const LindbladParams& p, double t) {
        return {-0.5 * p.kappa_phi * t, -0.5 * p.kappa_1ph * t,
                1.0 - std::exp(-p.kappa_1ph * t)};
    }
};

/// Optional Hamiltonian for open-system runs: diagonal polynomial in N plus
/// an optional linear drive.
struct Hamiltonian {
    std::vector<double> coeffs; ///< K_1..K_m; empty means no nonlinear part
    std::optional<Pulse> pulse;

    bool trivial() const { return coeffs.empty() && !pulse; }
};

namespace detail {

/// GKSL dissipator applied to rho, elementwise:
///   loss:      κ₁ [ sqrt((n+1)(m+1)) ρ_{n+1,m+1} - (n+m)/2 ρ_{nm} ]
///   dephasing: κ_φ [ J_n J_m - (J_n² + J_m²)/2 ] ρ_{nm}
/// with J the diagonal of the dephasing jump operator: J_n = n for the N
/// form, J_n = n + 1 for the a a† form. The two reduce to the same
/// -κ_φ/2 (n-m)² coefficient; keeping both literal supports the check.
inline void dissipator_apply(const Mat& rho, const LindbladParams& p, Mat& out) {
    const int d = static_cast<int>(rho.rows());
    const double shift = p.dephasing_form == LindbladParams::Dephasing::a_adagger ? 1.0 : 0.0;
    for (int m = 0; m < d; ++m) {
        double jm = m + shift;
        for (int n = 0; n < d; ++n) {
            cplx inflow = (n + 1 < d && m + 1 < d)
                              ? std::sqrt(double(n + 1) * double(m + 1)) * rho(n + 1, m + 1)
                              : cplx(0.0);
            double jn = n + shift;
            double deph = jn * jm - 0.5 * (jn * jn + jm * jm);
            out(n, m) = p.kappa_1ph * (inflow - 0.5 * double(n + m) * rho(n, m)) +
                        p.kappa_phi * deph * rho(n, m);
        }
    }
}

inline void dissipator_rk4_step(Mat& rho, const LindbladParams& p, double h, Mat& k1, Mat& k2,
                                Mat& k3, Mat& k4, Mat& tmp) {
    dissipator_apply(rho, p, k1);
    tmp = rho + 0.5 * h * k1;
    dissipator_apply(tmp, p, k2);
    tmp = rho + 0.5 * h * k2;
    dissipator_apply(tmp, p, k3);
    tmp = rho + h * k3;
    dissipator_apply(tmp, p, k4);
    rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// rho <- U rho U† with U one plan step at drive value eps.
inline void sandwich_unitary(const SplitStepPlan& plan, Mat& rho, double eps) {
    const int d = static_cast<int>(rho.rows());
    Vec work(d);
    for (int c = 0; c < d; ++c) {
        work = rho.col(c);
        plan.step(work, eps, +1);
        rho.col(c) = work;
    }
    for (int r = 0; r < d; ++r) {
        work = rho.row(r).adjoint();
        plan.step(work, eps, +1);
        rho.row(r) = work.adjoint();
    }
}

} // namespace detail

/// Time-stepped GKSL integration. Trace is preserved by construction (the
/// generator is traceless); Hermiticity is enforced by symmetrization after
/// every step. Throws if the final state develops an eigenvalue below -1e-8.
///
/// `unitary_dt` caps the Strang step when a Hamiltonian is present; steps are
/// aligned with pulse sample boundaries so each step sees one drive value.
inline DensityMatrix lindblad_propagate(const DensityMatrix& rho0, const Hamiltonian& ham,
                                        const LindbladParams& params, double t,
                                        int min_steps = 0, double unitary_dt = 2.5e-4) {
    const int d = rho0.dim();
    if (t < 0.0) throw DomainError("lindblad_propagate: negative duration");
    if (t == 0.0) return rho0;

    // RK4 comfortably inside its stability region for the stiffest
    // dephasing/loss eigenvalue
    double stiff = 0.5 * params.kappa_phi * double(d - 1) * double(d - 1) +
                   params.kappa_1ph * double(d);
    int steps = std::max({min_steps, static_cast<int>(std::ceil(stiff * t / 0.5)), 200});

    int per_sample = 1;
    std::size_t n_samples = 1;
    if (!ham.trivial()) {
        double sample_dt = ham.pulse ? ham.pulse->dt : t;
        if (ham.pulse) n_samples = ham.pulse->samples.size();
        per_sample = std::max<int>(
            std::ceil(sample_dt / unitary_dt),
            static_cast<int>((steps + n_samples - 1) / n_samples));
        steps = per_sample * static_cast<int>(n_samples);
    }
    const double h = t / steps;

    std::optional<SplitStepPlan> half_plan;
    if (!ham.trivial())
        half_plan.emplace(ham.coeffs.empty() ? std::vector<double>{0.0} : ham.coeffs, d,
                          0.5 * h, 1);

    Mat rho = rho0.matrix();
    Mat k1(d, d), k2(d, d), k3(d, d), k4(d, d), tmp(d, d);
    for (int s = 0; s < steps; ++s) {
        double eps = 0.0;
        if (ham.pulse) eps = ham.pulse->samples[s / per_sample];
        if (half_plan) {
            detail::sandwich_unitary(*half_plan, rho, eps);
            detail::dissipator_rk4_step(rho, params, h, k1, k2, k3, k4, tmp);
            detail::sandwich_unitary(*half_plan, rho, eps);
        } else {
            detail::dissipator_rk4_step(rho, params, h, k1, k2, k3, k4, tmp);
        }
        rho = 0.5 * (rho + rho.adjoint().eval());
    }

    Eigen::SelfAdjointEigenSolver<Mat> es(rho, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-8)
        throw ConvergenceError("lindblad_propagate: negative eigenvalue beyond tolerance");
    DensityMatrix::Tolerances tol;
    tol.hermiticity = 1e-9;
    tol.trace = 1e-9;
    tol.min_eigenvalue = -1e-8;
    return DensityMatrix(std::move(rho), tol);
}

/// Exact factored solution of the vectorized free-decay equation (H = 0):
///   - lowering series: ρ <- Σ_k F₋ᵏ/k! aᵏ ρ a†ᵏ  (finite on the truncation)
///   - loss factor:     ρ_{nm} <- e^{F3 (n+m)} ρ_{nm}
///   - dephasing:       ρ_{nm} <- e^{F0 (n-m)²} ρ_{nm}
inline DensityMatrix analytic_decay(const DensityMatrix& rho0, const LindbladParams& params,
                                    double t) {
    const int d = rho0.dim();
    SuperopFactors f = SuperopFactors::at(params, t);

    Mat acc = rho0.matrix();
    Mat term = rho0.matrix();
    for (int k = 1; k < d; ++k) {
        Mat next = Mat::Zero(d, d);
        for (int n = 0; n + 1 < d; ++n)
            for (int m = 0; m + 1 < d; ++m)
                next(n, m) = std::sqrt(double(n + 1) * double(m + 1)) * term(n + 1, m + 1);
        term = (f.Fminus / k) * next;
        acc += term;
        if (term.cwiseAbs().maxCoeff() < 1e-300) break;
    }
    for (int n = 0; n < d; ++n)
        for (int m = 0; m < d; ++m) {
            double nm = double(n - m);
            acc(n, m) *= std::exp(f.F3 * double(n + m)) * std::exp(f.F0 * nm * nm);
        }

    DensityMatrix::Tolerances tol;
    tol.hermiticity = 1e-10;
    tol.trace = 1e-9;
    tol.min_eigenvalue = -1e-9;
    return DensityMatrix(std::move(acc), tol);
}

/// Truncation order of the small-decay overlap expansion.
enum class ExpansionOrder {
    linear,       ///< 1 - κ₁K⁽¹⁾ - κ_φK⁽²⁾
    linear_cross, ///< + (κ₁κ_φ/2)(K⁽³⁾ + 2K⁽¹⁾K⁽²⁾), diagonal κ² terms dropped
    second_order  ///< + the κ₁² and κ_φ² diagonal terms as well
};

/// Perturbative overlap V between the decayed state and the pure target,
/// with dimensionless rates κ = rate × time.
inline double overlap_expansion(const FockVector& target, double kappa1_t, double kappaphi_t,
                                ExpansionOrder order = ExpansionOrder::linear_cross) {
    auto m = number_moments(target, 4);
    double n1 = m[1], n2 = m[2], n3 = m[3], n4 = m[4];
    double k2 = n2 - n1 * n1;
    double v = 1.0 - kappa1_t * n1 - kappaphi_t * k2;
    if (order == ExpansionOrder::linear) return v;
    v += 0.5 * kappa1_t * kappaphi_t * (n3 - n1 * n2);
    if (order == ExpansionOrder::linear_cross) return v;
    double a2 = std::norm(a_squared_expectation(target));
    v += 0.25 * kappa1_t * kappa1_t * (n2 + n1 * n1 + 2.0 * a2);
    v += 0.25 * kappaphi_t * kappaphi_t * (n4 + 3.0 * n2 * n2 - 4.0 * n3 * n1);
    return v;
}

/// Result row of the dissipative re-evaluation of an optimized pulse.
struct DissipativeResult {
    double k3 = 0.0;
    double T = 0.0;
    double closed_infidelity = 0.0;
    double dissipative_infidelity = 0.0;
};

/// Propagates the vacuum under an optimized pulse with dissipation and
/// reports the generalized infidelity against the pure target.
inline DissipativeResult dissipative_reevaluate_one(const std::vector<double>& coeffs,
                                                    const Pulse& pulse,
                                                    const FockVector& target,
                                                    const LindbladParams& params,
                                                    double closed_infidelity) {
    const int d = target.dim();
    DensityMatrix rho0 = DensityMatrix::pure(basis_state(0, d));
    Hamiltonian ham{coeffs, pulse};
    DensityMatrix rho = lindblad_propagate(rho0, ham, params, pulse.duration());
    DissipativeResult r;
    r.T = pulse.duration();
    r.closed_infidelity = closed_infidelity;
    r.dissipative_infidelity = 1.0 - fidelity(rho, target);
    return r;
}

/// An optimized pulse to re-evaluate, as produced by a duration scan.
struct PulseEvaluation {
    double k3 = 0.0;
    Pulse pulse;
    double closed_infidelity = 1.0;
};

/// Dissipative infidelity table for a set of optimized pulses; rows are
/// independent and evaluated in parallel.
inline std::vector<DissipativeResult> dissipative_reevaluate(
    const std::vector<PulseEvaluation>& runs, const FockVector& target,
    const LindbladParams& params, int threads = 0) {
    std::vector<DissipativeResult> rows(runs.size());
    parallel_for(runs.size(), threads, [&](std::size_t i) {
        std::vector<double> coeffs{0.0, 1.0, runs[i].k3};
        rows[i] = dissipative_reevaluate_one(coeffs, runs[i].pulse, target, params,
                                             runs[i].closed_infidelity);
        rows[i].k3 = runs[i].k3;
    });
    return rows;
}

} // namespace kercat
