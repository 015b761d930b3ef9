#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "kercat/design.hpp"

using namespace kercat;

namespace {

/// Independent Stirling oracle: expand x(x-1)...(x-n+1) by polynomial
/// convolution and read off the coefficients.
std::vector<long long> falling_factorial_coeffs(int n) {
    std::vector<long long> c{1}; // constant polynomial 1
    for (int i = 0; i < n; ++i) {
        std::vector<long long> next(c.size() + 1, 0);
        for (std::size_t j = 0; j < c.size(); ++j) {
            next[j + 1] += c[j];          // x * c_j
            next[j] += -(long long)i * c[j]; // -i * c_j
        }
        c = std::move(next);
    }
    return c;
}

Rat eval_poly(const std::vector<Rat>& coeffs, int n) {
    Rat p(0), npow(1);
    for (const Rat& k : coeffs) {
        npow *= Rat(n);
        p += k * npow;
    }
    return p;
}

} // namespace

TEST_CASE("stirling numbers of the first kind") {
    REQUIRE(stirling_first(1, 1) == 1);
    REQUIRE(stirling_first(3, 2) == -3);
    REQUIRE(stirling_first(4, 2) == 11);
    REQUIRE_THROWS_AS(stirling_first(3, 4), DomainError);

    for (int n = 0; n <= 10; ++n) {
        auto oracle = falling_factorial_coeffs(n);
        for (int k = 0; k <= n; ++k) REQUIRE(stirling_first(n, k) == oracle[k]);
    }
}

TEST_CASE("congruence residues and minimal time") {
    SECTION("residue ladder") {
        auto sol = solve_gammas(6);
        REQUIRE(mod2(sol.gamma(1)) == Rat(1, 2));
        REQUIRE(mod2(sol.gamma(2)) == Rat(1));
        for (int r = 3; r <= 6; ++r) REQUIRE(mod2(sol.gamma(r)) == Rat(0));
    }
    SECTION("minimal-time law, exact rationals") {
        REQUIRE(solve_gammas(2).tc_prime == Rat(1, 2));
        for (int m = 3; m <= 8; ++m)
            REQUIRE(solve_gammas(m).tc_prime == Rat(2, factorial_ll(m)));
    }
    SECTION("named times") {
        REQUIRE(binomial_to_polynomial(solve_gammas(2)).tc_over_pi == Rat(1, 2));
        REQUIRE(binomial_to_polynomial(solve_gammas(3)).tc_over_pi == Rat(1, 3));
        REQUIRE(binomial_to_polynomial(solve_gammas(4)).tc_over_pi == Rat(1, 12));
    }
    SECTION("m below 2 rejected") { REQUIRE_THROWS_AS(solve_gammas(1), DomainError); }
}

TEST_CASE("binomial-to-polynomial transform") {
    SECTION("order-4 reference coefficients") {
        auto d = binomial_to_polynomial(solve_gammas(4));
        REQUIRE(d.coeffs == std::vector<Rat>{Rat(-6), Rat(17), Rat(-6), Rat(1)});
        REQUIRE(d.tc_over_pi == Rat(1, 12));
    }
    SECTION("order-2 reference coefficients") {
        auto d = binomial_to_polynomial(solve_gammas(2));
        REQUIRE(d.coeffs == std::vector<Rat>{Rat(0), Rat(1)});
    }
    SECTION("basis-change identity over n = 0..20") {
        for (int m = 2; m <= 6; ++m) {
            auto sol = solve_gammas(m);
            auto d = binomial_to_polynomial(sol);
            for (int n = 0; n <= 20; ++n) {
                Rat lhs = eval_poly(d.coeffs, n);
                Rat rhs(0);
                for (int r = 1; r <= m; ++r)
                    rhs += (sol.gamma(r) / sol.tc_prime) * Rat(binomial_ll(n, r));
                REQUIRE(lhs == rhs);
            }
        }
    }
    SECTION("round trip recovers the binomial coefficients") {
        for (int m = 2; m <= 7; ++m) {
            auto sol = solve_gammas(m);
            auto d = binomial_to_polynomial(sol);
            auto a = polynomial_to_binomial(d.coeffs);
            for (int r = 1; r <= m; ++r)
                REQUIRE(a[r - 1] == sol.gamma(r) / sol.tc_prime);
        }
    }
}

TEST_CASE("parity verification") {
    SECTION("frame-completed order-4 coefficients pass at pi/12") {
        std::vector<Rat> k{Rat(-2), Rat(5), Rat(2), Rat(1)};
        auto rep = verify_parity(k, Rat(1, 12), 30);
        REQUIRE(rep.pass);
        REQUIRE(rep.components == 2);
    }
    SECTION("plain Kerr passes at pi/2") {
        auto rep = verify_parity({Rat(0), Rat(1)}, Rat(1, 2), 20);
        REQUIRE(rep.pass);
    }
    SECTION("quarter time fails as a four-component revival") {
        auto rep = verify_parity({Rat(0), Rat(1)}, Rat(1, 4), 20);
        REQUIRE_FALSE(rep.pass);
        REQUIRE(rep.components == 4);
    }
    SECTION("window too small for the order") {
        REQUIRE_THROWS_AS(verify_parity({Rat(0), Rat(1)}, Rat(1, 2), 3), DomainError);
    }
    SECTION("all solved designs pass at their critical time") {
        for (int m = 2; m <= 8; ++m) {
            auto d = binomial_to_polynomial(solve_gammas(m));
            REQUIRE(verify_parity(d, 30).pass);
        }
    }
}

TEST_CASE("residue-class freedom") {
    std::mt19937_64 rng(42);
    for (int m = 2; m <= 6; ++m) {
        auto base = solve_gammas(m);
        for (int trial = 0; trial < 5; ++trial) {
            GammaSolution sol = base;
            // shift lower residues inside their class; critical time unchanged
            for (int r = 1; r < m; ++r)
                sol.gammas[r - 1] += Rat(2 * (int(rng() % 11) - 5));
            auto d = binomial_to_polynomial(sol);
            REQUIRE(d.tc_over_pi == base.tc_prime);
            REQUIRE(verify_parity(d, 30).pass);
        }
        // shifting the top residue rescales the critical time but stays valid
        GammaSolution sol = base;
        sol.gammas[m - 1] += Rat(2);
        sol.tc_prime = sol.gammas[m - 1] / Rat(factorial_ll(m));
        REQUIRE(verify_parity(binomial_to_polynomial(sol), 30).pass);
    }
}

TEST_CASE("constrained representative search") {
    SECTION("loose constraint succeeds and respects the bound") {
        auto d = solve_gammas_constrained(4, Rat(8), 3);
        REQUIRE(d.has_value());
        for (int j = 1; j < 4; ++j) REQUIRE(boost::abs(d->coeffs[j - 1]) <= Rat(8));
        REQUIRE(verify_parity(*d, 30).pass);
        REQUIRE(d->coeffs[3] == Rat(1));
    }
    SECTION("impossible constraint returns nothing") {
        auto d = solve_gammas_constrained(4, Rat(1, 100), 2);
        REQUIRE_FALSE(d.has_value());
    }
}
