#include <catch2/catch_amalgamated.hpp>

#include "kercat/dynamics.hpp"
#include "kercat/rydberg.hpp"

using namespace kercat;
using Catch::Approx;

namespace {

RydbergParams reference_params() {
    RydbergParams p;
    p.omega_er = 50.0;
    p.delta = 150.0;
    p.v = 80.0;
    p.n_atoms = 2;
    return p;
}

} // namespace

TEST_CASE("single-excitation energy coefficient") {
    auto p = reference_params();
    SECTION("leading light shift") {
        REQUIRE(f_of_m(0, p) == Approx(50.0 * 50.0 / (4.0 * 150.0)).margin(1e-12));
    }
    SECTION("interaction terms vanish with V") {
        auto q = p;
        q.v = 1e-9;
        for (int m = 1; m <= 3; ++m) REQUIRE(std::abs(f_of_m(m, q)) < 1e-12);
    }
    SECTION("guard band triggers near a two-photon resonance") {
        auto q = p;
        q.v = 299.0; // delta - v/2 = 0.5, well inside 0.02 * 299
        REQUIRE_THROWS_AS(f_of_m(1, q), ResonanceError);
    }
    SECTION("coefficients blow up approaching the resonance") {
        auto q = p;
        q.resonance_guard = 1e-6;
        double prev = 0.0;
        for (double v : {250.0, 280.0, 290.0, 299.0}) {
            q.v = v;
            double mag = std::abs(f_of_m(1, q));
            REQUIRE(mag > prev);
            prev = mag;
        }
    }
}

TEST_CASE("effective coefficients") {
    SECTION("one atom carries only the light shift") {
        RydbergParams p = reference_params();
        p.n_atoms = 1;
        auto k = effective_coefficients(p, 3);
        REQUIRE(k[0] == Approx(f_of_m(0, p)).margin(1e-12));
        REQUIRE(k[1] == 0.0);
        REQUIRE(k[2] == 0.0);
    }
    SECTION("Stirling recombination is a pure basis change") {
        RydbergParams p = reference_params();
        p.n_atoms = 5;
        auto k = effective_coefficients(p, 5);
        for (int ne = 0; ne <= 5; ++ne) {
            double via_powers = 0.0, npow = 1.0;
            for (int j = 0; j < 5; ++j) {
                npow *= ne;
                via_powers += k[j] * npow;
            }
            REQUIRE(via_powers == Approx(effective_energy(p, ne)).margin(1e-12));
        }
    }
}

TEST_CASE("raw ensemble Hamiltonian") {
    SECTION("single-atom eigenvalues of the e-r block") {
        RydbergParams p = reference_params();
        p.n_atoms = 1;
        Mat h = raw_hamiltonian_excited_block(p);
        Eigen::SelfAdjointEigenSolver<Mat> es(h);
        double disc = std::sqrt(p.delta * p.delta + p.omega_er * p.omega_er);
        REQUIRE(es.eigenvalues()[0] == Approx(-0.5 * p.delta - 0.5 * disc).margin(1e-9));
        REQUIRE(es.eigenvalues()[1] == Approx(-0.5 * p.delta + 0.5 * disc).margin(1e-9));
    }
    SECTION("dressed energy approaches the light shift at large detuning") {
        RydbergParams p = reference_params();
        p.n_atoms = 1;
        p.delta = 5000.0;
        auto r = validate_effective(p);
        // neglected next order is Omega^4 / (16 delta^3)
        REQUIRE(r.epsilon ==
                Approx(std::pow(p.omega_er, 4) / (16.0 * std::pow(p.delta, 3))).epsilon(1e-2));
    }
    SECTION("hermitian by construction") {
        RydbergParams p = reference_params();
        p.n_atoms = 4;
        Mat h = raw_hamiltonian(p);
        REQUIRE((h - h.adjoint()).cwiseAbs().maxCoeff() == 0.0);
        REQUIRE(h.rows() == (4 + 1) * (4 + 2) / 2);
    }
    SECTION("atom count limits") {
        RydbergParams p = reference_params();
        p.n_atoms = 9;
        REQUIRE_THROWS_AS(raw_hamiltonian(p), DomainError);
    }
}

TEST_CASE("effective-model validation") {
    SECTION("error decreases with detuning and converges at fourth order") {
        RydbergParams p = reference_params();
        std::vector<double> ratios{3.0, 5.0, 10.0, 20.0};
        std::vector<double> eps;
        for (double ratio : ratios) {
            auto q = p;
            q.delta = ratio * q.omega_er;
            auto r = validate_effective(q);
            REQUIRE_FALSE(r.ambiguous);
            if (!eps.empty()) REQUIRE(r.epsilon < eps.back());
            eps.push_back(r.epsilon);
        }
        // dimensionless error per atom (units of the detuning) vs Omega/delta
        double slope = std::log((eps.front() / (ratios.front() * p.omega_er)) /
                                (eps.back() / (ratios.back() * p.omega_er))) /
                       std::log(ratios.back() / ratios.front());
        REQUIRE(slope > 3.5);
        REQUIRE(slope < 4.5);
    }
    SECTION("factorizable limit at V = 0") {
        RydbergParams p = reference_params();
        p.v = 0.0;
        auto r = validate_effective(p);
        double single = 0.5 * (std::sqrt(p.delta * p.delta + p.omega_er * p.omega_er) -
                               p.delta) -
                        p.omega_er * p.omega_er / (4.0 * p.delta);
        REQUIRE(r.epsilon == Approx(std::abs(single)).margin(1e-9));
    }
    SECTION("two-atom eigenvalue matches low-order perturbation theory") {
        RydbergParams p = reference_params();
        auto r = validate_effective(p);
        double e_pt2 = p.omega_er * p.omega_er / (2.0 * p.delta);
        double rel = r.epsilon * p.n_atoms / e_pt2;
        double x = p.omega_er / p.delta;
        REQUIRE(rel < 2.0 * x * x);
    }
}

TEST_CASE("driven ensemble evolves like a weakly excited oscillator") {
    // collective drive on the excitation-number basis vs the bosonic limit
    int n_atoms = 200;
    Mat x_atoms = (dicke_raising(n_atoms) + dicke_lowering(n_atoms)) /
                  std::sqrt(double(n_atoms));
    std::vector<double> diag_atoms(n_atoms + 1, 0.0);
    Pulse drive = Pulse::constant(0.8, 1.5, 300, 1.0);
    auto evolved = evolve_driven_generic(basis_state(0, n_atoms + 1), diag_atoms, x_atoms,
                                         drive);
    auto bosonic = evolve_driven(basis_state(0, 30), {0.0}, drive);
    double n_ens = number_moments(evolved, 1)[1];
    double n_bos = number_moments(bosonic, 1)[1];
    REQUIRE(evolved.amps().norm() == Catch::Approx(1.0).margin(1e-10));
    REQUIRE(n_ens == Catch::Approx(n_bos).epsilon(0.03));
}

TEST_CASE("collective drive operators") {
    SECTION("raising and lowering are mutual adjoints") {
        auto up = dicke_raising(6);
        auto dn = dicke_lowering(6);
        REQUIRE((up - dn.adjoint()).cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("excitation counter spectrum") {
        auto up = dicke_raising(5);
        Mat ne = Mat(dicke_lowering(5).adjoint() * dicke_lowering(5));
        // N_e = b† b has eigenvalues n(N-n+1); the plain counter is diagonal 0..N
        for (int n = 0; n <= 5; ++n) {
            double expect = double(n) * (5 - n + 1);
            REQUIRE(ne(n, n).real() == Approx(expect).margin(1e-12));
        }
    }
    SECTION("bosonic limit at large atom number") {
        int big = 1000;
        auto up = dicke_raising(big);
        for (int n = 0; n <= 5; ++n) {
            double scaled = up(n + 1, n).real() / std::sqrt(double(big));
            REQUIRE(std::abs(scaled - std::sqrt(n + 1.0)) / std::sqrt(n + 1.0) <= 1e-2);
        }
    }
}
