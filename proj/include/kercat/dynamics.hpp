// Closed-system propagation under H = Σ_j K_j N^j + ε(t)(a + a†).
//
// The nonlinear part is diagonal in the number basis and is applied exactly.
// The drive term is applied through the cached eigendecomposition of the
// (Hermitian, tridiagonal) quadrature operator, so each split step is exactly
// unitary on the truncated basis. A Strang splitting gives second-order
// accuracy in dt; evolve_driven halves dt until the result is self-converged.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "kercat/design.hpp"
#include "kercat/fock.hpp"

namespace kercat {

/// Uniformly sampled drive envelope with an amplitude cap. samples[k] is the
/// (piecewise-constant) value of ε on [k dt, (k+1) dt).
struct Pulse {
    std::vector<double> samples;
    double dt = 0.0;
    double bound = 0.0;

    Pulse() = default;
    Pulse(std::vector<double> s, double dt_, double bound_)
        : samples(std::move(s)), dt(dt_), bound(bound_) {
        if (dt <= 0.0) throw DomainError("Pulse: dt must be positive");
        for (double e : samples)
            if (std::abs(e) > bound * (1.0 + 1e-15))
                throw DomainError("Pulse: sample exceeds amplitude bound");
    }

    double duration() const { return static_cast<double>(samples.size()) * dt; }

    static Pulse constant(double eps, double duration, int n_samples, double bound) {
        return Pulse(std::vector<double>(n_samples, eps), duration / n_samples, bound);
    }
};

/// p(n) = Σ_j K_j n^j for n = 0..dim-1; coeffs[j-1] = K_j.
inline std::vector<double> diagonal_polynomial(const std::vector<double>& coeffs, int dim) {
    std::vector<double> p(dim, 0.0);
    for (int n = 0; n < dim; ++n) {
        double npow = 1.0;
        for (double k : coeffs) {
            npow *= n;
            p[n] += k * npow;
        }
    }
    return p;
}

/// amps_n <- exp(-i p(n) t) amps_n. Exact, no integrator.
inline FockVector evolve_diagonal(const FockVector& state, const std::vector<double>& coeffs,
                                  double t) {
    auto p = diagonal_polynomial(coeffs, state.dim());
    Vec v = state.amps();
    for (int n = 0; n < state.dim(); ++n) v[n] *= std::exp(cplx(0.0, -p[n] * t));
    return FockVector(std::move(v));
}

/// Rational-exact variant for a congruence design evolved for t = π t':
/// the phase p(n)·t' is reduced mod 2 in rational arithmetic before any
/// floating-point conversion, so large polynomial values lose no precision.
inline FockVector evolve_diagonal(const FockVector& state, const NonlinearDesign& design,
                                  const Rat& t_over_pi) {
    Vec v = state.amps();
    for (int n = 0; n < state.dim(); ++n) {
        Rat pn(0), npow(1);
        for (const Rat& k : design.coeffs) {
            npow *= Rat(n);
            pn += k * npow;
        }
        double phase = pi * to_double(mod2(pn * t_over_pi));
        v[n] *= std::exp(cplx(0.0, -phase));
    }
    return FockVector(std::move(v));
}

/// Cached spectral data for applying exp(-i θ X) with X = a + a† (or any
/// Hermitian drive operator) at O(dim²) per step.
class DriveWorkspace {
public:
    explicit DriveWorkspace(const Mat& drive_op) {
        Eigen::SelfAdjointEigenSolver<Mat> es(drive_op);
        evals_ = es.eigenvalues();
        evecs_ = es.eigenvectors();
    }

    static DriveWorkspace quadrature(int dim) {
        Mat a = annihilation_op(dim);
        return DriveWorkspace(Mat(a + a.adjoint()));
    }

    int dim() const { return static_cast<int>(evals_.size()); }

    /// psi <- exp(-i theta X) psi
    void apply_exp(Vec& psi, double theta) const {
        Vec w = evecs_.adjoint() * psi;
        for (int k = 0; k < w.size(); ++k) w[k] *= std::exp(cplx(0.0, -theta * evals_[k]));
        psi = evecs_ * w;
    }

    const Eigen::VectorXd& eigenvalues() const { return evals_; }
    const Mat& eigenvectors() const { return evecs_; }

private:
    Eigen::VectorXd evals_;
    Mat evecs_;
};

/// One-step Strang propagator for H = diag(p) + ε X. `substeps` subdivides
/// each pulse sample; `direction` +1 propagates forward, -1 backward (the
/// inverse unitary, used for co-state propagation).
class SplitStepPlan {
public:
    SplitStepPlan(const std::vector<double>& coeffs, int dim, double dt, int substeps)
        : drive_(DriveWorkspace::quadrature(dim)), dt_(dt / substeps), substeps_(substeps) {
        auto p = diagonal_polynomial(coeffs, dim);
        half_phase_.resize(dim);
        for (int n = 0; n < dim; ++n) half_phase_[n] = std::exp(cplx(0.0, -0.5 * p[n] * dt_));
    }

    /// Advances psi across one pulse sample of value eps.
    void step(Vec& psi, double eps, int direction = +1) const {
        for (int s = 0; s < substeps_; ++s) {
            if (direction > 0) {
                apply_half_diag(psi, +1);
                drive_.apply_exp(psi, eps * dt_);
                apply_half_diag(psi, +1);
            } else {
                apply_half_diag(psi, -1);
                drive_.apply_exp(psi, -eps * dt_);
                apply_half_diag(psi, -1);
            }
        }
    }

    const DriveWorkspace& drive() const { return drive_; }
    double dt() const { return dt_; }

private:
    void apply_half_diag(Vec& psi, int direction) const {
        if (direction > 0)
            for (int n = 0; n < psi.size(); ++n) psi[n] *= half_phase_[n];
        else
            for (int n = 0; n < psi.size(); ++n) psi[n] *= std::conj(half_phase_[n]);
    }

    DriveWorkspace drive_;
    std::vector<cplx> half_phase_;
    double dt_;
    int substeps_;
};

namespace detail {

inline Vec propagate_driven(const Vec& psi0, const std::vector<double>& coeffs,
                            const Pulse& pulse, int substeps) {
    SplitStepPlan plan(coeffs, static_cast<int>(psi0.size()), pulse.dt, substeps);
    Vec psi = psi0;
    for (double eps : pulse.samples) plan.step(psi, eps);
    return psi;
}

} // namespace detail

/// Propagates i d|ψ⟩/dt = [Σ_j K_j N^j + ε(t)(a+a†)] |ψ⟩ across the pulse.
/// The substep count is doubled until the final state changes by less than
/// `tol` in fidelity (self-convergence check).
inline FockVector evolve_driven(const FockVector& state, const std::vector<double>& coeffs,
                                const Pulse& pulse, double tol = 1e-10,
                                int max_doublings = 10,
                                const TruncationSettings& trunc = {}) {
    if (pulse.samples.empty()) return state;
    double max_eps = 0.0;
    for (double e : pulse.samples) max_eps = std::max(max_eps, std::abs(e));
    int substeps = 1;
    while (max_eps * pulse.dt / substeps > 0.05) substeps *= 2;

    Vec prev = detail::propagate_driven(state.amps(), coeffs, pulse, substeps);
    for (int it = 0; it < max_doublings; ++it) {
        substeps *= 2;
        Vec next = detail::propagate_driven(state.amps(), coeffs, pulse, substeps);
        double change = std::abs(1.0 - std::norm(prev.dot(next)));
        prev = std::move(next);
        if (change < tol) return FockVector(std::move(prev), trunc);
    }
    throw ConvergenceError("evolve_driven: step-halving did not self-converge");
}

/// Generic diagonal + drive evolution with a caller-supplied Hermitian drive
/// operator (e.g. the collective ladder sum of a finite atomic ensemble).
inline FockVector evolve_driven_generic(const FockVector& state,
                                        const std::vector<double>& diag_values,
                                        const Mat& drive_op, const Pulse& pulse,
                                        int substeps = 4) {
    int dim = state.dim();
    if (drive_op.rows() != dim) throw DomainError("evolve_driven_generic: dimension mismatch");
    DriveWorkspace drive(drive_op);
    double dt = pulse.dt / substeps;
    std::vector<cplx> half(dim);
    for (int n = 0; n < dim; ++n) half[n] = std::exp(cplx(0.0, -0.5 * diag_values[n] * dt));
    Vec psi = state.amps();
    for (double eps : pulse.samples) {
        for (int s = 0; s < substeps; ++s) {
            for (int n = 0; n < dim; ++n) psi[n] *= half[n];
            drive.apply_exp(psi, eps * dt);
            for (int n = 0; n < dim; ++n) psi[n] *= half[n];
        }
    }
    return FockVector(std::move(psi));
}

} // namespace kercat
