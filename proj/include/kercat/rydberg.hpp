// Rydberg-ensemble realization of the multi-order nonlinearity.
//
// Adiabatic elimination of the far-detuned Rydberg level turns an ensemble of
// N three-level atoms (ground / excited / Rydberg, with constant pair
// interaction V between Rydberg states) into an effective polynomial in the
// excited-state number operator: H_eff = Σ_n K_n N_e^n, where
// K_n = Σ_m s(m+1,n) f(m). Equivalently H_eff = Σ_m f(m) · (N_e)_(m+1) with
// the falling factorial (N_e)_(k) = N_e (N_e-1) ... (N_e-k+1); the Stirling
// recombination is a pure basis change.
//
// Everything below works in ordinary-frequency units (ω/2π, e.g. MHz); the
// formulas are homogeneous of degree one in (Ω, Δ, V) so no 2π bookkeeping
// is needed.
//
// The exact reference is the permutation-symmetric sector of the raw
// Hamiltonian. Since only e↔r transitions are driven the ground-state count
// is conserved; the basis is |N_e, N_r⟩ with N_e + N_r <= N.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <vector>

#include "kercat/design.hpp"
#include "kercat/fock.hpp"

namespace kercat {

struct RydbergParams {
    double omega_er = 0.0; ///< Rabi frequency of the e-r drive
    double delta = 0.0;    ///< detuning of the e-r drive
    double v = 0.0;        ///< Rydberg pair interaction
    int n_atoms = 1;
    std::optional<double> omega_eg;       ///< optional g-e drive Rabi frequency
    std::optional<double> omega_eg_split; ///< optional g-e level splitting
    double resonance_guard = 0.02;        ///< relative guard band around Δ = kV/2

    double adiabaticity() const { return std::abs(delta) / omega_er; }
};

/// Distance (relative to max(|Δ|,|V|)) to the nearest resonance Δ = kV/2 for
/// k = 0..m. Zero interaction only exposes the k = 0 (single-photon) line.
inline double resonance_distance(const RydbergParams& p, int m) {
    double scale = std::max(std::abs(p.delta), std::abs(p.v));
    if (scale == 0.0) return 0.0;
    double dist = std::abs(p.delta);
    for (int k = 1; k <= m; ++k)
        dist = std::min(dist, std::abs(p.delta - 0.5 * k * p.v));
    return dist / scale;
}

/// Energy coefficient of the (m+1)-body falling-factorial term. Diverges at
/// the (m+1)-photon resonances Δ = kV/2, k <= m; evaluation inside the guard
/// band throws ResonanceError.
inline double f_of_m(int m, const RydbergParams& p) {
    if (m < 0) throw DomainError("f_of_m: m must be >= 0");
    if (resonance_distance(p, m) < p.resonance_guard)
        throw ResonanceError("f_of_m: within guard band of a multiphoton resonance");
    if (m == 0) return p.omega_er * p.omega_er / (4.0 * p.delta);
    double num = p.v * std::pow(p.omega_er, 2 + 2 * m);
    double den = std::pow(2.0, 3 + 2 * m) * p.delta * (p.delta - 0.5 * m * p.v);
    for (int k = 1; k <= m; ++k) {
        double g = p.delta - 0.5 * (k - 1) * p.v;
        den *= g * g;
    }
    return num / (factorial_ll(m - 1) * den);
}

/// K_1..K_max_order of H_eff = Σ_n K_n N_e^n via K_n = Σ_m s(m+1,n) f(m).
inline std::vector<double> effective_coefficients(const RydbergParams& p, int max_order) {
    if (max_order < 1) throw DomainError("effective_coefficients: max_order must be >= 1");
    std::vector<double> k(max_order, 0.0);
    for (int m = 0; m < p.n_atoms; ++m) {
        double fm = f_of_m(m, p);
        for (int n = 1; n <= std::min(max_order, m + 1); ++n)
            k[n - 1] += static_cast<double>(stirling_first(m + 1, n)) * fm;
    }
    return k;
}

/// H_eff eigenvalue on the N_e = k manifold, summed directly in the
/// falling-factorial basis (no Stirling recombination).
inline double effective_energy(const RydbergParams& p, int n_excited) {
    double e = 0.0;
    for (int m = 0; m < p.n_atoms; ++m) {
        double ff = 1.0;
        for (int j = 0; j <= m; ++j) ff *= double(n_excited - j);
        if (ff == 0.0) continue;
        e += f_of_m(m, p) * ff;
    }
    return e;
}

namespace detail {

struct SymBasis {
    std::vector<std::pair<int, int>> states; ///< (N_e, N_r) with N_e + N_r <= N

    explicit SymBasis(int n_atoms) {
        for (int ne = 0; ne <= n_atoms; ++ne)
            for (int nr = 0; ne + nr <= n_atoms; ++nr) states.emplace_back(ne, nr);
    }
    int index(int ne, int nr) const {
        for (std::size_t i = 0; i < states.size(); ++i)
            if (states[i].first == ne && states[i].second == nr) return static_cast<int>(i);
        return -1;
    }
};

} // namespace detail

/// Raw ensemble Hamiltonian on the permutation-symmetric sector,
/// basis |N_e, N_r⟩:  (Ω/2) Σ(σ^{re}+σ^{er}) - Δ Σσ^{rr} + (V/2) Σ_{j≠i} σ^{rr}σ^{rr}.
/// The collective e→r matrix element is sqrt(N_e (N_r+1)).
inline DenseOperator raw_hamiltonian(const RydbergParams& p) {
    if (p.n_atoms < 1) throw DomainError("raw_hamiltonian: need at least one atom");
    if (p.n_atoms > 8) throw DomainError("raw_hamiltonian: exact diagonalization limited to N <= 8");
    detail::SymBasis basis(p.n_atoms);
    int dim = static_cast<int>(basis.states.size());
    Mat h = Mat::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) {
        auto [ne, nr] = basis.states[i];
        h(i, i) = -p.delta * nr + 0.5 * p.v * nr * (nr - 1.0);
        if (ne >= 1) {
            int j = basis.index(ne - 1, nr + 1);
            double amp = 0.5 * p.omega_er * std::sqrt(double(ne) * double(nr + 1));
            h(j, i) += amp;
            h(i, j) += amp;
        }
    }
    return h;
}

/// Fully-excited block (no ground atoms): N_r = N - N_e, dimension N+1,
/// basis index = N_r. This is the sector that probes the highest-order
/// effective coefficients.
inline DenseOperator raw_hamiltonian_excited_block(const RydbergParams& p) {
    int n = p.n_atoms;
    Mat h = Mat::Zero(n + 1, n + 1);
    for (int nr = 0; nr <= n; ++nr) {
        int ne = n - nr;
        h(nr, nr) = -p.delta * nr + 0.5 * p.v * nr * (nr - 1.0);
        if (ne >= 1) {
            double amp = 0.5 * p.omega_er * std::sqrt(double(ne) * double(nr + 1));
            h(nr + 1, nr) += amp;
            h(nr, nr + 1) += amp;
        }
    }
    return h;
}

struct ValidationResult {
    double epsilon;       ///< |E_full - E_eff| / N
    double match_overlap; ///< overlap of the matched full eigenvector with |N_e=N, N_r=0⟩
    bool ambiguous;       ///< set when the best overlap drops below 0.9
};

/// Per-atom energy error of the effective model on the fully excited dressed
/// state: diagonalizes the exact excited block, picks the eigenvector with
/// maximum overlap on |N_e = N, N_r = 0⟩, and compares against the
/// falling-factorial energy truncated at max_order bodies.
inline ValidationResult validate_effective(const RydbergParams& p, int max_order = 0) {
    int n = p.n_atoms;
    Mat h = raw_hamiltonian_excited_block(p);
    Eigen::SelfAdjointEigenSolver<Mat> es(h);
    int best = 0;
    double best_ov = 0.0;
    for (int k = 0; k <= n; ++k) {
        double ov = std::norm(es.eigenvectors()(0, k)); // basis index 0 = no Rydberg
        if (ov > best_ov) {
            best_ov = ov;
            best = k;
        }
    }
    double e_full = es.eigenvalues()[best];

    int orders = (max_order > 0) ? std::min(max_order, n) : n;
    double e_eff = 0.0;
    for (int m = 0; m < orders; ++m) {
        double ff = 1.0;
        for (int j = 0; j <= m; ++j) ff *= double(n - j);
        if (ff != 0.0) e_eff += f_of_m(m, p) * ff;
    }

    ValidationResult r;
    r.epsilon = std::abs(e_full - e_eff) / n;
    r.match_overlap = best_ov;
    r.ambiguous = best_ov < 0.9;
    return r;
}

// ---------------------------------------------------------------------------
// collective drive on the excitation-number (Dicke) basis

/// Collective raising operator on |n⟩, n = 0..N excited atoms:
/// b†|n⟩ = sqrt((n+1)(N-n)) |n+1⟩. Normalized by sqrt(N), the matrix elements
/// converge to the bosonic sqrt(n+1) at fixed n.
inline DenseOperator dicke_raising(int n_atoms) {
    if (n_atoms < 1) throw DomainError("dicke_raising: need at least one atom");
    int d = n_atoms + 1;
    Mat b = Mat::Zero(d, d);
    for (int n = 0; n + 1 < d; ++n)
        b(n + 1, n) = std::sqrt(double(n + 1) * double(n_atoms - n));
    return b;
}

/// Adjoint of dicke_raising: b|n⟩ = sqrt(n(N-n+1)) |n-1⟩.
inline DenseOperator dicke_lowering(int n_atoms) { return dicke_raising(n_atoms).adjoint(); }

} // namespace kercat
