// Exact design of multi-order Kerr coefficients that evolve a coherent state
// into a two-component cat at the shortest possible time.
//
// Everything here is exact rational arithmetic. The construction works in the
// binomial basis p(n) = Σ_r a_r C(n,r): writing γ_r = a_r t_c' with
// t_c = π t_c', the requirement that exp(-i p(n) t_c) depend only on the
// parity of n becomes a triangular system of mod-2 congruences for the γ_r.
// Any representative of each residue class is a valid design; the minimal
// positive choice of γ_m fixes the shortest preparation time.

#pragma once

#include <boost/rational.hpp>
#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

#include "kercat/errors.hpp"

namespace kercat {

using Rat = boost::rational<long long>;

inline double to_double(const Rat& q) {
    return static_cast<double>(q.numerator()) / static_cast<double>(q.denominator());
}

/// Canonical representative of q mod 2 in [0, 2).
inline Rat mod2(Rat q) {
    long long twice_den = 2 * q.denominator();
    long long num = q.numerator() % twice_den;
    if (num < 0) num += twice_den;
    return Rat(num, q.denominator());
}

/// Signed Stirling numbers of the first kind, defined by
/// x(x-1)...(x-n+1) = Σ_k s(n,k) x^k. Exact integer arithmetic.
inline long long stirling_first(int n, int k) {
    if (n < 0 || k < 0 || k > n) throw DomainError("stirling_first: need 0 <= k <= n");
    // s(n+1,k) = s(n,k-1) - n s(n,k)
    std::vector<long long> row{1}; // s(0,0)
    for (int i = 1; i <= n; ++i) {
        std::vector<long long> next(i + 1, 0);
        for (int j = 0; j <= i; ++j) {
            long long up_left = (j >= 1) ? row[j - 1] : 0;
            long long up = (j < i) ? row[j] : 0;
            next[j] = up_left - static_cast<long long>(i - 1) * up;
        }
        row = std::move(next);
    }
    return row[k];
}

inline long long factorial_ll(int n) {
    long long f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

inline long long binomial_ll(int n, int r) {
    if (r < 0 || r > n) return 0;
    long long b = 1;
    for (int i = 1; i <= r; ++i) b = b * (n - r + i) / i;
    return b;
}

/// Residues γ_1..γ_m of the parity congruence system, together with the
/// rational critical time t_c' = γ_m / m! (t_c = π t_c' in units 1/K_m).
struct GammaSolution {
    int m = 0;
    std::vector<Rat> gammas; ///< chosen representatives, gammas[r-1] = γ_r
    Rat tc_prime;            ///< γ_m / m!

    Rat gamma(int r) const { return gammas[r - 1]; }
};

/// Polynomial-basis coefficients K_1..K_m with K_m = 1 and the preparation
/// time t_c expressed as a rational multiple of π.
struct NonlinearDesign {
    int m = 0;
    std::vector<Rat> coeffs; ///< coeffs[j-1] = K_j
    Rat tc_over_pi;

    double tc() const { return std::numbers::pi * to_double(tc_over_pi); }
    std::vector<double> coeffs_double() const {
        std::vector<double> v(coeffs.size());
        for (std::size_t i = 0; i < coeffs.size(); ++i) v[i] = to_double(coeffs[i]);
        return v;
    }
};

namespace detail {

/// Residue classes fixed by the congruence ladder: row n reads
/// Σ_{r<=n} C(n,r) γ_r ≡ 0 (even n) or 1/2 (odd n), all mod 2.
inline std::vector<Rat> gamma_residues(int m) {
    std::vector<Rat> g(m);
    for (int n = 1; n <= m; ++n) {
        Rat target = (n % 2 == 1) ? Rat(1, 2) : Rat(0);
        Rat acc(0);
        for (int r = 1; r < n; ++r) acc += Rat(binomial_ll(n, r)) * g[r - 1];
        g[n - 1] = mod2(target - acc);
    }
    return g;
}

} // namespace detail

/// Solves the parity congruence system for maximum order m. With
/// minimize_time the representative of γ_m is the smallest positive value in
/// its class, which yields t_c' = 1/2 for m = 2 and 2/m! for m > 2.
inline GammaSolution solve_gammas(int m, bool minimize_time = true) {
    if (m < 2) throw DomainError("solve_gammas: need m >= 2");
    GammaSolution sol;
    sol.m = m;
    sol.gammas = detail::gamma_residues(m);
    if (minimize_time && sol.gammas[m - 1] == Rat(0))
        sol.gammas[m - 1] = Rat(2); // smallest positive even value, keeps K_m nonzero
    if (sol.gammas[m - 1] == Rat(0))
        throw DomainError("solve_gammas: gamma_m = 0 leaves no m-th order term");
    sol.tc_prime = sol.gammas[m - 1] / Rat(factorial_ll(m));
    return sol;
}

/// Change of basis from binomial coefficients a_r = γ_r / t_c' to polynomial
/// coefficients: K_j = Σ_r s(r,j)/r! a_r. Includes the induced K_1, which
/// acts as a rotating-frame term (it rotates the coherent amplitude without
/// affecting the parity structure).
inline NonlinearDesign binomial_to_polynomial(const GammaSolution& sol) {
    NonlinearDesign d;
    d.m = sol.m;
    d.tc_over_pi = sol.tc_prime;
    d.coeffs.assign(sol.m, Rat(0));
    for (int j = 1; j <= sol.m; ++j) {
        Rat k(0);
        for (int r = j; r <= sol.m; ++r) {
            Rat a_r = sol.gamma(r) / sol.tc_prime;
            k += Rat(stirling_first(r, j), factorial_ll(r)) * a_r;
        }
        d.coeffs[j - 1] = k;
    }
    return d;
}

/// Inverse basis change, recovering a_r from K_j. Evaluating
/// p(n) = Σ_j K_j n^j at n = 1..m determines the a_r row by row, since
/// Σ_r a_r C(n,r) is triangular in r with unit diagonal.
inline std::vector<Rat> polynomial_to_binomial(const std::vector<Rat>& coeffs) {
    int m = static_cast<int>(coeffs.size());
    std::vector<Rat> a(m, Rat(0));
    for (int n = 1; n <= m; ++n) {
        Rat pn(0);
        Rat npow(1);
        for (int j = 1; j <= m; ++j) {
            npow *= Rat(n);
            pn += coeffs[j - 1] * npow;
        }
        Rat acc(0);
        for (int r = 1; r < n; ++r) acc += a[r - 1] * Rat(binomial_ll(n, r));
        a[n - 1] = pn - acc; // C(n,n) = 1
    }
    return a;
}

/// Result of the parity check at a given time.
struct ParityReport {
    bool pass = false;
    /// Smallest period of the phase sequence p(n)·t' mod 2 (the number of
    /// coherent components of the revival); 0 if no period was found.
    int components = 0;
    Rat even_phase; ///< common even-n phase in units of π, mod 2
};

/// Checks whether exp(-i p(n) t) produces a two-component cat of phase π/2:
/// all even-n phases equal some θ_e and all odd-n phases equal θ_e + π/2.
/// Exact: coeffs are K_1..K_m and the time enters as t/π.
inline ParityReport verify_parity(const std::vector<Rat>& coeffs, const Rat& t_over_pi,
                                  int nmax) {
    int m = static_cast<int>(coeffs.size());
    if (nmax < m + 2) throw DomainError("verify_parity: nmax must be >= m + 2");
    std::vector<Rat> theta(nmax + 1); // phase/π mod 2
    for (int n = 0; n <= nmax; ++n) {
        Rat pn(0);
        Rat npow(1);
        for (int j = 1; j <= m; ++j) {
            npow *= Rat(n);
            pn += coeffs[j - 1] * npow;
        }
        theta[n] = mod2(pn * t_over_pi);
    }
    ParityReport rep;
    rep.even_phase = theta[0];
    bool pass = true;
    for (int n = 0; n <= nmax; ++n) {
        Rat expect = (n % 2 == 0) ? theta[0] : mod2(theta[0] + Rat(1, 2));
        if (theta[n] != expect) {
            pass = false;
            break;
        }
    }
    rep.pass = pass;
    for (int period = 1; period <= nmax / 2; ++period) {
        bool ok = true;
        for (int n = 0; n + period <= nmax; ++n)
            if (theta[n] != theta[n + period]) {
                ok = false;
                break;
            }
        if (ok) {
            rep.components = period;
            break;
        }
    }
    return rep;
}

inline ParityReport verify_parity(const NonlinearDesign& d, int nmax = 30) {
    return verify_parity(d.coeffs, d.tc_over_pi, nmax);
}

/// Bounded search over residue representatives γ_r + 2z, z in [-window, window],
/// for a design with |K_{j<m}| <= c·|K_m| = c. Among admissible designs the one
/// minimizing max_j |K_j| is returned; nullopt if none exists in the window.
inline std::optional<NonlinearDesign> solve_gammas_constrained(int m, const Rat& c,
                                                               int window = 5) {
    if (m < 2) throw DomainError("solve_gammas_constrained: need m >= 2");
    GammaSolution base = solve_gammas(m);
    std::vector<int> offset(m - 1, -window);
    std::optional<NonlinearDesign> best;
    Rat best_score(0);
    for (;;) {
        GammaSolution trial = base;
        for (int r = 1; r < m; ++r) trial.gammas[r - 1] += Rat(2 * offset[r - 1]);
        NonlinearDesign d = binomial_to_polynomial(trial);
        Rat worst(0);
        bool ok = true;
        for (int j = 1; j < m; ++j) {
            Rat mag = boost::abs(d.coeffs[j - 1]);
            if (mag > c) {
                ok = false;
                break;
            }
            if (mag > worst) worst = mag;
        }
        if (ok && (!best || worst < best_score)) {
            best = d;
            best_score = worst;
        }
        int i = 0;
        for (; i < m - 1; ++i) {
            if (offset[i] < window) {
                ++offset[i];
                break;
            }
            offset[i] = -window;
        }
        if (i == m - 1) break;
    }
    return best;
}

} // namespace kercat
