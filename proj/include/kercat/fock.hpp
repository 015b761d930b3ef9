// Truncated single-mode Fock-space linear algebra: states, ladder operators,
// overlaps, photon-number moments, Wigner functions and fidelities.
//
// Conventions used throughout:
//   - number basis n = 0..D-1, amplitudes are std::complex<double>
//   - quadratures x = (a + a†)/√2, p = i(a† - a)/√2, so a coherent state of
//     amplitude α sits at (√2 Re α, √2 Im α) and the vacuum Wigner peak is 1/π
//   - states are renormalized after truncation; the population in the last
//     five basis levels is tracked as the truncation diagnostic

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "kercat/errors.hpp"

namespace kercat {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;

/// D×D complex operator on the truncated basis.
using DenseOperator = Mat;

inline constexpr double pi = std::numbers::pi;

struct TruncationSettings {
    double flag_tol = 1e-10; ///< tail population above this is flagged
    double fail_tol = 1e-6;  ///< tail population above this throws
};

/// Default truncation dimension for states built from a coherent amplitude.
/// Squeezing both inflates the effective amplitude (worst case: displacement
/// along the anti-squeezed axis) and slows the Fock-tail falloff to a
/// geometric tanh(r) decay, hence the r-dependent padding.
inline int default_dim(double alpha_abs, double r = 0.0) {
    double a = alpha_abs * std::exp(r);
    double d = std::ceil(a * a + 8.0 * a + 20.0 + (30.0 + 14.0 * a) * r);
    return static_cast<int>(d);
}

/// Normalized pure state on a truncated number basis.
class FockVector {
public:
    explicit FockVector(Vec amps, const TruncationSettings& trunc = {})
        : amps_(std::move(amps)) {
        if (amps_.size() == 0) throw DomainError("FockVector: empty amplitude vector");
        double n2 = amps_.squaredNorm();
        if (!(n2 > 0.0)) throw DomainError("FockVector: zero norm");
        amps_ /= std::sqrt(n2);
        int d = dim();
        tail_ = 0.0;
        for (int n = std::max(0, d - 5); n < d; ++n) tail_ += std::norm(amps_[n]);
        if (tail_ > trunc.fail_tol)
            throw TruncationError("FockVector: tail population " + std::to_string(tail_) +
                                  " exceeds hard limit at dim " + std::to_string(d));
        tail_flagged_ = tail_ > trunc.flag_tol;
    }

    int dim() const { return static_cast<int>(amps_.size()); }
    cplx operator[](int n) const { return amps_[n]; }
    const Vec& amps() const { return amps_; }

    /// Population in the top five basis levels (truncation diagnostic).
    double tail_population() const { return tail_; }
    bool tail_flagged() const { return tail_flagged_; }

private:
    Vec amps_;
    double tail_ = 0.0;
    bool tail_flagged_ = false;
};

struct DensityTolerances {
    double hermiticity = 1e-12;
    double trace = 1e-12;
    double min_eigenvalue = -1e-10;
};

/// Hermitian, positive, unit-trace operator for open-system runs.
class DensityMatrix {
public:
    using Tolerances = DensityTolerances;

    explicit DensityMatrix(Mat rho, const Tolerances& tol = Tolerances())
        : rho_(std::move(rho)) {
        if (rho_.rows() != rho_.cols()) throw DomainError("DensityMatrix: not square");
        double herm = (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff();
        if (herm > tol.hermiticity)
            throw DomainError("DensityMatrix: hermiticity violation " + std::to_string(herm));
        rho_ = 0.5 * (rho_ + rho_.adjoint().eval());
        double tr = rho_.trace().real();
        if (std::abs(tr - 1.0) > tol.trace)
            throw DomainError("DensityMatrix: trace " + std::to_string(tr));
        Eigen::SelfAdjointEigenSolver<Mat> es(rho_, Eigen::EigenvaluesOnly);
        min_eig_ = es.eigenvalues().minCoeff();
        if (min_eig_ < tol.min_eigenvalue)
            throw DomainError("DensityMatrix: negative eigenvalue " + std::to_string(min_eig_));
    }

    static DensityMatrix pure(const FockVector& psi) {
        return DensityMatrix(psi.amps() * psi.amps().adjoint());
    }

    int dim() const { return static_cast<int>(rho_.rows()); }
    const Mat& matrix() const { return rho_; }
    double min_eigenvalue() const { return min_eig_; }
    double purity() const { return (rho_ * rho_).trace().real(); }

private:
    Mat rho_;
    double min_eig_ = 0.0;
};

// ---------------------------------------------------------------------------
// ladder operators

inline DenseOperator annihilation_op(int dim) {
    Mat a = Mat::Zero(dim, dim);
    for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

inline DenseOperator creation_op(int dim) { return annihilation_op(dim).adjoint(); }

inline DenseOperator number_op(int dim) {
    Mat n = Mat::Zero(dim, dim);
    for (int k = 0; k < dim; ++k) n(k, k) = static_cast<double>(k);
    return n;
}

inline FockVector apply_operator(const DenseOperator& op, const FockVector& psi,
                                 const TruncationSettings& trunc = {}) {
    if (op.cols() != psi.dim()) throw DomainError("apply_operator: dimension mismatch");
    return FockVector(op * psi.amps(), trunc);
}

// ---------------------------------------------------------------------------
// state constructors

inline FockVector basis_state(int n, int dim) {
    if (n < 0 || n >= dim) throw DomainError("basis_state: level outside basis");
    Vec v = Vec::Zero(dim);
    v[n] = 1.0;
    return FockVector(std::move(v));
}

/// Unnormalized coherent amplitudes e^{-|α|²/2} αⁿ/√n! (built iteratively).
inline Vec coherent_amplitudes(cplx alpha, int dim) {
    Vec v(dim);
    v[0] = std::exp(-0.5 * std::norm(alpha));
    for (int n = 1; n < dim; ++n) v[n] = v[n - 1] * alpha / std::sqrt(static_cast<double>(n));
    return v;
}

inline FockVector coherent_state(cplx alpha, int dim, const TruncationSettings& trunc = {}) {
    if (dim < 1) throw DomainError("coherent_state: dim must be positive");
    return FockVector(coherent_amplitudes(alpha, dim), trunc);
}

/// Normalized superposition |α⟩ + e^{iφ}|-α⟩.
inline FockVector cat_state(cplx alpha, double phi, int dim,
                            const TruncationSettings& trunc = {}) {
    Vec v = coherent_amplitudes(alpha, dim) +
            std::exp(cplx(0.0, phi)) * coherent_amplitudes(-alpha, dim);
    return FockVector(std::move(v), trunc);
}

/// Unitary S(r,φ) = exp{ r/2 (e^{-iφ} a² - e^{iφ} a†²) } restricted to the
/// truncated basis. The generator is anti-Hermitian, so the result is exactly
/// unitary on the retained subspace.
inline DenseOperator squeeze_operator(double r, double phi, int dim) {
    if (r < 0.0) throw DomainError("squeeze_operator: r must be >= 0");
    Mat a = annihilation_op(dim);
    Mat gen = 0.5 * r * (std::exp(cplx(0.0, -phi)) * a * a -
                         std::exp(cplx(0.0, phi)) * (a * a).adjoint().eval());
    // gen is anti-Hermitian; exponentiate through the Hermitian matrix i*gen
    Mat h = cplx(0.0, 1.0) * gen;
    Eigen::SelfAdjointEigenSolver<Mat> es(h);
    Vec phase(dim);
    for (int k = 0; k < dim; ++k) phase[k] = std::exp(cplx(0.0, -es.eigenvalues()[k]));
    Mat s = es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
    double unit_err = (s * s.adjoint() - Mat::Identity(dim, dim)).cwiseAbs().maxCoeff();
    if (unit_err > 1e-8)
        throw TruncationError("squeeze_operator: non-unitary beyond 1e-8 on retained subspace");
    return s;
}

inline cplx inner(const FockVector& a, const FockVector& b) {
    if (a.dim() != b.dim()) throw DomainError("inner: dimension mismatch");
    return a.amps().dot(b.amps());
}

// ---------------------------------------------------------------------------
// moments

/// Exact diagonal sums ⟨N^k⟩ = Σ n^k |ψ_n|² for k = 0..max_power.
inline std::vector<double> number_moments(const FockVector& psi, int max_power) {
    if (max_power < 0 || max_power > 4)
        throw DomainError("number_moments: max_power must be in 0..4");
    std::vector<double> m(max_power + 1, 0.0);
    for (int n = 0; n < psi.dim(); ++n) {
        double p = std::norm(psi[n]);
        double nk = 1.0;
        for (int k = 0; k <= max_power; ++k) {
            m[k] += nk * p;
            nk *= n;
        }
    }
    return m;
}

struct Cumulants {
    double k1, k2, k3;
};

/// First three cumulants of the photon-number distribution.
inline Cumulants number_cumulants(const FockVector& psi) {
    auto m = number_moments(psi, 3);
    double k1 = m[1];
    double k2 = m[2] - m[1] * m[1];
    double k3 = m[3] - 3.0 * m[2] * m[1] + 2.0 * m[1] * m[1] * m[1];
    return {k1, k2, k3};
}

inline double parity_expectation(const FockVector& psi) {
    double s = 0.0;
    for (int n = 0; n < psi.dim(); ++n) s += (n % 2 == 0 ? 1.0 : -1.0) * std::norm(psi[n]);
    return s;
}

inline cplx expectation(const FockVector& psi, const DenseOperator& op) {
    return psi.amps().dot(op * psi.amps());
}

/// ⟨ψ|a²|ψ⟩ without building the operator.
inline cplx a_squared_expectation(const FockVector& psi) {
    cplx s = 0.0;
    for (int n = 0; n + 2 < psi.dim(); ++n)
        s += std::conj(psi[n]) * std::sqrt(double((n + 1) * (n + 2))) * psi[n + 2];
    return s;
}

// ---------------------------------------------------------------------------
// Wigner function

struct PhaseSpaceGrid {
    Eigen::VectorXd x; ///< quadrature x samples
    Eigen::VectorXd p; ///< quadrature p samples

    static PhaseSpaceGrid centered(double half_width, int n) {
        PhaseSpaceGrid g;
        g.x = Eigen::VectorXd::LinSpaced(n, -half_width, half_width);
        g.p = g.x;
        return g;
    }
};

namespace detail {

/// W(x,p) for a density matrix at a single phase-space point, from the
/// displaced-parity form W = (1/π) Σ_{nm} ρ_{nm} (-1)ⁿ ⟨m|D(β)|n⟩ with
/// β = √2 (x + ip). Evaluated with scaled generalized-Laguerre recurrences
/// so every intermediate stays bounded.
inline double wigner_point(const Mat& rho, double x, double p) {
    const int d = static_cast<int>(rho.rows());
    const cplx beta = std::sqrt(2.0) * cplx(x, p);
    const double xb = std::norm(beta);
    double w = 0.0;
    cplx beta_pow = std::exp(-0.5 * xb); // β^k e^{-x/2}, built up over k
    for (int k = 0; k < d; ++k) {
        if (k > 0) beta_pow *= beta;
        // scaled Laguerre l_n = sqrt(n!/(n+k)!) L_n^{(k)}(xb), l_0 folded with 1/sqrt(k!)
        double l_prev = 0.0;
        double l = 1.0;
        for (int j = 1; j <= k; ++j) l /= std::sqrt(static_cast<double>(j));
        double sign = 1.0;
        for (int n = 0; n + k < d; ++n) {
            if (n > 0) {
                double c1 = (2.0 * (n - 1) + k + 1.0 - xb) *
                            std::sqrt(static_cast<double>(n) / (n + k));
                double c2 = std::sqrt((n - 1.0) * n * (n - 1.0 + k) / (n + k));
                double l_next = (c1 * l - c2 * l_prev) / n;
                l_prev = l;
                l = l_next;
            }
            double re = (rho(n, n + k) * beta_pow).real();
            w += sign * (k == 0 ? re : 2.0 * re) * l;
            sign = -sign;
        }
    }
    return w / pi;
}

} // namespace detail

/// Wigner quasi-probability on a grid; result(i,j) = W(x_i, p_j).
inline Eigen::MatrixXd wigner(const DensityMatrix& rho, const PhaseSpaceGrid& grid) {
    Eigen::MatrixXd w(grid.x.size(), grid.p.size());
    for (int i = 0; i < grid.x.size(); ++i)
        for (int j = 0; j < grid.p.size(); ++j)
            w(i, j) = detail::wigner_point(rho.matrix(), grid.x[i], grid.p[j]);
    return w;
}

inline Eigen::MatrixXd wigner(const FockVector& psi, const PhaseSpaceGrid& grid) {
    Mat rho = psi.amps() * psi.amps().adjoint();
    Eigen::MatrixXd w(grid.x.size(), grid.p.size());
    for (int i = 0; i < grid.x.size(); ++i)
        for (int j = 0; j < grid.p.size(); ++j)
            w(i, j) = detail::wigner_point(rho, grid.x[i], grid.p[j]);
    return w;
}

/// Single-point evaluation (used for the parity identity W(0,0) = ⟨(-1)^N⟩/π).
inline double wigner_at(const FockVector& psi, double x, double p) {
    Mat rho = psi.amps() * psi.amps().adjoint();
    return detail::wigner_point(rho, x, p);
}

/// Trapezoidal ∫∫ W dx dp over the grid.
inline double wigner_integral(const Eigen::MatrixXd& w, const PhaseSpaceGrid& grid) {
    auto weights = [](const Eigen::VectorXd& ax) {
        Eigen::VectorXd wt = Eigen::VectorXd::Zero(ax.size());
        for (int i = 0; i + 1 < ax.size(); ++i) {
            double h = ax[i + 1] - ax[i];
            wt[i] += 0.5 * h;
            wt[i + 1] += 0.5 * h;
        }
        return wt;
    };
    Eigen::VectorXd wx = weights(grid.x), wp = weights(grid.p);
    return wx.dot(w * wp);
}

// ---------------------------------------------------------------------------
// fidelities

inline double fidelity(const FockVector& a, const FockVector& b) {
    return std::norm(inner(a, b));
}

inline double fidelity(const DensityMatrix& rho, const FockVector& psi) {
    if (rho.dim() != psi.dim()) throw DomainError("fidelity: dimension mismatch");
    return psi.amps().dot(rho.matrix() * psi.amps()).real();
}

inline double fidelity(const FockVector& psi, const DensityMatrix& rho) {
    return fidelity(rho, psi);
}

namespace detail {

inline Mat psd_sqrt(const Mat& m) {
    Eigen::SelfAdjointEigenSolver<Mat> es(m);
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

} // namespace detail

/// Uhlmann fidelity Tr{√(√ρ σ √ρ)}².
inline double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
    if (rho.dim() != sigma.dim()) throw DomainError("fidelity: dimension mismatch");
    Mat sr = detail::psd_sqrt(rho.matrix());
    Mat m = sr * sigma.matrix() * sr;
    m = 0.5 * (m + m.adjoint().eval());
    Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
    double tr = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
    return tr * tr;
}

/// Trace distance (1/2)‖ρ-σ‖₁.
inline double trace_distance(const Mat& rho, const Mat& sigma) {
    Mat d = rho - sigma;
    d = 0.5 * (d + d.adjoint().eval());
    Eigen::SelfAdjointEigenSolver<Mat> es(d, Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

} // namespace kercat
