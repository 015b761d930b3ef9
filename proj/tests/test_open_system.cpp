#include <catch2/catch_amalgamated.hpp>

#include "kercat/open_system.hpp"

using namespace kercat;
using Catch::Approx;

TEST_CASE("lindblad propagation basics") {
    SECTION("closed limit matches unitary evolution") {
        auto psi = coherent_state(1.5, 30);
        std::vector<double> coeffs{0.0, 1.0};
        double t = 0.4;
        auto rho = lindblad_propagate(DensityMatrix::pure(psi), Hamiltonian{coeffs, {}},
                                      LindbladParams(0.0, 0.0), t);
        auto unitary = evolve_diagonal(psi, coeffs, t);
        REQUIRE(fidelity(rho, unitary) >= 1.0 - 1e-10);
    }
    SECTION("pure loss keeps a coherent state coherent") {
        double alpha = 1.5, kappa = 0.4, t = 0.8;
        auto rho = lindblad_propagate(DensityMatrix::pure(coherent_state(alpha, 30)),
                                      Hamiltonian{}, LindbladParams(kappa, 0.0), t);
        auto expect = coherent_state(alpha * std::exp(-0.5 * kappa * t), 30);
        REQUIRE(fidelity(rho, expect) >= 1.0 - 1e-8);
        REQUIRE(rho.purity() >= 1.0 - 1e-8);
    }
    SECTION("trace preserved") {
        auto rho0 = DensityMatrix::pure(cat_state(2.0, 0.5 * pi, 30));
        for (double t : {0.2, 0.6, 1.0}) {
            auto rho = lindblad_propagate(rho0, Hamiltonian{}, LindbladParams(0.5, 0.5), t);
            REQUIRE(rho.matrix().trace().real() == Approx(1.0).margin(1e-10));
        }
    }
}

TEST_CASE("analytic decay channel") {
    auto cat = cat_state(2.0, 0.5 * pi, 30);
    auto rho0 = DensityMatrix::pure(cat);

    SECTION("zero time is the identity channel") {
        auto rho = analytic_decay(rho0, LindbladParams(0.7, 0.3), 0.0);
        REQUIRE((rho.matrix() - rho0.matrix()).cwiseAbs().maxCoeff() < 1e-14);
    }
    SECTION("pure dephasing multiplies coherences elementwise") {
        double kphi = 0.8, t = 0.5;
        auto rho = analytic_decay(rho0, LindbladParams(0.0, kphi), t);
        for (int n = 0; n < 30; n += 7)
            for (int m = 0; m < 30; m += 5) {
                double factor = std::exp(-0.5 * kphi * (n - m) * (n - m) * t);
                REQUIRE(std::abs(rho.matrix()(n, m) - factor * rho0.matrix()(n, m)) < 1e-12);
            }
    }
    SECTION("agrees with the time-stepped integrator") {
        LindbladParams lp(0.6, 0.4);
        for (double t : {0.25, 1.0}) {
            auto ra = analytic_decay(rho0, lp, t);
            auto rl = lindblad_propagate(rho0, Hamiltonian{}, lp, t);
            REQUIRE(trace_distance(ra.matrix(), rl.matrix()) < 1e-7);
        }
    }
    SECTION("semigroup composition") {
        LindbladParams lp(0.5, 0.3);
        auto one = analytic_decay(analytic_decay(rho0, lp, 0.3), lp, 0.45);
        auto two = analytic_decay(rho0, lp, 0.75);
        REQUIRE(trace_distance(one.matrix(), two.matrix()) < 1e-9);
    }
    SECTION("purity never increases under free decay") {
        LindbladParams lp(0.4, 0.2);
        double last = 1.0 + 1e-12;
        for (double t : {0.0, 0.1, 0.3, 0.7, 1.2}) {
            double p = analytic_decay(rho0, lp, t).purity();
            REQUIRE(p <= last + 1e-10);
            last = p;
        }
    }
}

TEST_CASE("dephasing jump-operator equivalence") {
    auto rho0 = DensityMatrix::pure(cat_state(1.8, 0.5 * pi, 28));
    LindbladParams with_n(0.3, 0.7, LindbladParams::Dephasing::number_op);
    LindbladParams with_aad(0.3, 0.7, LindbladParams::Dephasing::a_adagger);
    auto ra = lindblad_propagate(rho0, Hamiltonian{}, with_n, 0.5);
    auto rb = lindblad_propagate(rho0, Hamiltonian{}, with_aad, 0.5);
    REQUIRE((ra.matrix() - rb.matrix()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("overlap expansion") {
    auto cat = cat_state(2.0, 0.5 * pi, 40);

    SECTION("no decay gives unit overlap") {
        REQUIRE(overlap_expansion(cat, 0.0, 0.0) == 1.0);
    }
    SECTION("pure loss on the cat: V = 1 - 4 kappa to leading order") {
        double k = 1e-3;
        REQUIRE(overlap_expansion(cat, k, 0.0, ExpansionOrder::linear) ==
                Approx(1.0 - 4.0 * k).margin(1e-12));
    }
    SECTION("linear sensitivities match the exact channel") {
        auto rho0 = DensityMatrix::pure(cat);
        auto cum = number_cumulants(cat);
        double h = 1e-5;
        auto v_at = [&](double k1, double kphi) {
            return fidelity(analytic_decay(rho0, LindbladParams(k1, kphi), 1.0), cat);
        };
        double dv_dk1 = (v_at(h, 0.0) - v_at(0.0, 0.0)) / h;
        double dv_dkphi = (v_at(0.0, h) - v_at(0.0, 0.0)) / h;
        REQUIRE(dv_dk1 == Approx(-cum.k1).epsilon(1e-3));
        REQUIRE(dv_dkphi == Approx(-cum.k2).epsilon(1e-3));
    }
    SECTION("second-order form tracks the exact overlap at third order") {
        auto rho0 = DensityMatrix::pure(cat);
        // third-order coefficient for this state is about 430
        for (double k : {1e-3, 3e-3}) {
            double exact = fidelity(analytic_decay(rho0, LindbladParams(k, k), 1.0), cat);
            double second = overlap_expansion(cat, k, k, ExpansionOrder::second_order);
            double eq_form = overlap_expansion(cat, k, k, ExpansionOrder::linear_cross);
            REQUIRE(std::abs(exact - second) < std::abs(exact - eq_form));
            REQUIRE(std::abs(exact - second) < 600.0 * k * k * k);
        }
    }
}

TEST_CASE("dissipative re-evaluation bookkeeping") {
    // a crude hand pulse: dissipation must only make things worse
    int d = 30;
    FockVector target = cat_state(1.5, 0.5 * pi, d);
    Pulse p = Pulse::constant(1.0, 0.5, 200, 2.0);
    std::vector<double> coeffs{0.0, 1.0};
    auto closed = evolve_driven(basis_state(0, d), coeffs, p);
    double closed_infid = 1.0 - fidelity(closed, target);
    auto row = dissipative_reevaluate_one(coeffs, p, target, LindbladParams(3e-3, 3e-3),
                                          closed_infid);
    REQUIRE(row.dissipative_infidelity > row.closed_infidelity);
    // and the closed limit of the same path agrees with the unitary result
    auto row0 =
        dissipative_reevaluate_one(coeffs, p, target, LindbladParams(0.0, 0.0), closed_infid);
    REQUIRE(row0.dissipative_infidelity == Approx(closed_infid).margin(1e-8));

    // the batch form reproduces the single-row path
    std::vector<PulseEvaluation> runs{{0.0, p, closed_infid}};
    auto rows = dissipative_reevaluate(runs, target, LindbladParams(3e-3, 3e-3));
    REQUIRE(rows.size() == 1);
    REQUIRE(rows[0].dissipative_infidelity ==
            Approx(row.dissipative_infidelity).margin(1e-12));
}
