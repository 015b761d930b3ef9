// kercat command-line interface: coefficient design, propagation, pulse
// optimization, open-system scans, squeezing studies and Rydberg maps.
//
// Conventions:
//   - simulation subcommands work in units of K_2 (frequencies) and 1/K_2
//     (times); Rydberg subcommands take ordinary frequencies (MHz)
//   - scalar results are printed as JSON; curves and grids as CSV with a
//     header comment carrying the resolved configuration and its hash
//   - identical configuration and seed produce byte-identical output
//
// Exit codes: 0 success, 1 domain error, 2 convergence error, 64 usage.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "kercat/control.hpp"
#include "kercat/design.hpp"
#include "kercat/dynamics.hpp"
#include "kercat/fock.hpp"
#include "kercat/open_system.hpp"
#include "kercat/rydberg.hpp"
#include "kercat/squeezing.hpp"
#include "kercat/threading.hpp"

using nlohmann::json;
using namespace kercat;

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string config_hash(const json& config) {
    std::size_t h = std::hash<std::string>{}(config.dump());
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016zx", h);
    return buf;
}

/// Output sink: stdout by default, file when --output is given.
struct Sink {
    std::optional<std::string> path;

    void write(const std::string& text) const {
        if (path) {
            std::ofstream f(*path, std::ios::binary);
            if (!f) throw DomainError("cannot open output file: " + *path);
            f << text;
        } else {
            std::cout << text;
        }
    }
};

std::string csv_header(const json& config, const std::string& columns,
                       const std::string& units) {
    std::ostringstream os;
    os << "# config " << config.dump() << "\n";
    os << "# config_hash " << config_hash(config) << "\n";
    os << "# units " << units << "\n";
    os << columns << "\n";
    return os.str();
}

json load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DomainError("cannot open config file: " + path);
    json j;
    f >> j;
    return j;
}

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i)
        v[i] = n > 1 ? lo + (hi - lo) * i / (n - 1) : lo;
    return v;
}

json rational_json(const Rat& q) {
    return json{{"num", q.numerator()}, {"den", q.denominator()}, {"value", to_double(q)}};
}

// ---------------------------------------------------------------------------

int cmd_design(int m, double constraint, int window, const Sink& sink) {
    json out;
    out["m"] = m;
    NonlinearDesign d;
    if (constraint > 0.0) {
        // nearest rational with a modest denominator keeps arithmetic exact
        auto c = Rat(static_cast<long long>(std::llround(constraint * 1000)), 1000);
        auto found = solve_gammas_constrained(m, c, window);
        if (!found)
            throw DomainError("design: no admissible coefficients within the search window");
        d = *found;
        out["constraint"] = constraint;
        // recover the chosen representatives from the returned coefficients
        auto a = polynomial_to_binomial(d.coeffs);
        json gs = json::array();
        for (const auto& ar : a) gs.push_back(rational_json(ar * d.tc_over_pi));
        out["gammas"] = gs;
    } else {
        GammaSolution sol = solve_gammas(m);
        json gs = json::array();
        for (const auto& g : sol.gammas) gs.push_back(rational_json(g));
        out["gammas"] = gs;
        d = binomial_to_polynomial(sol);
    }
    json ks = json::array();
    for (const auto& k : d.coeffs) ks.push_back(rational_json(k));
    out["coeffs"] = ks;
    out["tc_over_pi"] = rational_json(d.tc_over_pi);
    out["tc"] = d.tc();
    auto rep = verify_parity(d);
    out["parity_pass"] = rep.pass;
    out["revival_components"] = rep.components;
    sink.write(out.dump(2) + "\n");
    return 0;
}

int cmd_evolve(const std::string& config_path, const Sink& sink) {
    json cfg = load_config(config_path);
    std::vector<double> coeffs = cfg.at("coeffs").get<std::vector<double>>();
    double alpha_re = cfg.value("alpha", 0.0);
    double alpha_im = cfg.value("alpha_im", 0.0);
    cplx alpha(alpha_re, alpha_im);
    int dim = cfg.value("dim", default_dim(std::abs(alpha)));
    FockVector psi = coherent_state(alpha, dim);

    FockVector final = [&] {
        if (cfg.contains("pulse")) {
            const auto& pj = cfg.at("pulse");
            Pulse pulse(pj.at("samples").get<std::vector<double>>(), pj.at("dt").get<double>(),
                        pj.value("bound", 1e30));
            return evolve_driven(psi, coeffs, pulse);
        }
        return evolve_diagonal(psi, coeffs, cfg.at("time").get<double>());
    }();

    json out;
    out["config"] = cfg;
    out["dim"] = dim;
    out["tail_population"] = final.tail_population();
    if (cfg.contains("target")) {
        const auto& tj = cfg.at("target");
        FockVector target = cat_state(cplx(tj.value("alpha", 0.0), tj.value("alpha_im", 0.0)),
                                      tj.value("phi", 0.5 * pi), dim);
        out["fidelity"] = fidelity(final, target);
        out["infidelity"] = 1.0 - fidelity(final, target);
    }
    json amps = json::array();
    for (int n = 0; n < final.dim(); ++n)
        amps.push_back({final[n].real(), final[n].imag()});
    out["amplitudes"] = amps;
    sink.write(out.dump(2) + "\n");
    return 0;
}

int cmd_optimize(const std::string& config_path, std::uint64_t seed, const Sink& sink) {
    json cfg = load_config(config_path);
    std::vector<double> coeffs = cfg.at("coeffs").get<std::vector<double>>();
    double alpha = cfg.value("alpha", 2.0);
    double T = cfg.at("T").get<double>();
    double bound = cfg.value("bound", 30.0);
    int dim = cfg.value("dim", default_dim(alpha));
    cfg["seed"] = seed;

    KrotovOptions ko;
    ko.max_iters = cfg.value("max_iters", 1000);
    ko.target_infidelity = cfg.value("target_infidelity", 1e-3);
    FockVector target = cat_state(alpha, cfg.value("cat_phi", 0.5 * pi), dim);
    int n_samples = std::max(cfg.value("min_samples", 240),
                             static_cast<int>(std::ceil(cfg.value("samples_per_time", 400.0) * T)));
    Pulse guess = random_guess_pulse(T, n_samples, bound, seed);
    OptimizationRun run = krotov_optimize(coeffs, target, T, guess, ko);

    std::ostringstream os;
    os << csv_header(cfg, "t,epsilon", "time 1/K2, drive K2");
    for (std::size_t k = 0; k < run.pulse.samples.size(); ++k)
        os << fmt17((k + 0.5) * run.pulse.dt) << "," << fmt17(run.pulse.samples[k]) << "\n";
    os << "# infidelity " << fmt17(run.final_infidelity) << "\n";
    os << "# converged " << (run.converged ? 1 : 0) << "\n";
    os << "# iterations " << run.infidelity_trace.size() - 1 << "\n";
    sink.write(os.str());
    return run.converged ? 0 : 2;
}

int cmd_scan(const std::string& config_path, std::uint64_t seed, int threads,
             const Sink& sink) {
    json cfg = load_config(config_path);
    cfg["seed"] = seed;
    ScanOptions so;
    so.alpha = cfg.value("alpha", 2.0);
    so.bound = cfg.value("bound", 30.0);
    so.dim = cfg.value("dim", 40);
    so.n_guesses = cfg.value("n_guesses", 8);
    so.seed = seed;
    so.threads = threads;
    so.krotov.max_iters = cfg.value("max_iters", 1500);
    so.krotov.lambda_decay = cfg.value("lambda_decay", 0.7);
    auto k3s = cfg.at("k3_values").get<std::vector<double>>();
    auto ts = cfg.at("T_grid").get<std::vector<double>>();

    auto cells = min_time_scan(k3s, ts, so);

    std::ostringstream os;
    os << csv_header(cfg, "K3,T,best_infidelity,seed_of_best,converged",
                     "K3 in K2, T in 1/K2");
    for (const auto& c : cells)
        os << fmt17(c.k3) << "," << fmt17(c.T) << "," << fmt17(c.best_infidelity) << ","
           << c.best_seed << "," << (c.converged ? 1 : 0) << "\n";
    for (double k3 : k3s)
        os << "# T_min " << fmt17(k3) << " " << fmt17(min_converged_T(cells, k3)) << "\n";
    sink.write(os.str());
    return 0;
}

int cmd_decay(const std::string& config_path, const Sink& sink) {
    json cfg = load_config(config_path);
    double alpha = cfg.value("alpha", 2.0);
    double phi = cfg.value("cat_phi", 0.5 * pi);
    int dim = cfg.value("dim", default_dim(alpha));
    LindbladParams lp(cfg.value("kappa_1ph", 0.0), cfg.value("kappa_phi", 0.0));
    auto ts = cfg.contains("t_grid") ? cfg.at("t_grid").get<std::vector<double>>()
                                     : linspace(0.0, cfg.value("t_max", 1.0),
                                                cfg.value("n_times", 21));

    FockVector target = cat_state(alpha, phi, dim);
    DensityMatrix rho0 = DensityMatrix::pure(target);
    std::ostringstream os;
    os << csv_header(cfg, "t,overlap_exact,overlap_expansion", "t in 1/K2, rates in K2");
    for (double t : ts) {
        DensityMatrix rho = analytic_decay(rho0, lp, t);
        double exact = fidelity(rho, target);
        double approx = overlap_expansion(target, lp.kappa_1ph * t, lp.kappa_phi * t);
        os << fmt17(t) << "," << fmt17(exact) << "," << fmt17(approx) << "\n";
    }
    sink.write(os.str());
    return 0;
}

int cmd_reeval(const std::string& config_path, std::uint64_t seed, int threads,
               const Sink& sink) {
    json cfg = load_config(config_path);
    cfg["seed"] = seed;
    ScanOptions so;
    so.alpha = cfg.value("alpha", 2.0);
    so.bound = cfg.value("bound", 30.0);
    so.dim = cfg.value("dim", 40);
    so.n_guesses = cfg.value("n_guesses", 8);
    so.seed = seed;
    so.threads = threads;
    so.krotov.max_iters = cfg.value("max_iters", 1500);
    so.krotov.lambda_decay = cfg.value("lambda_decay", 0.7);
    auto k3s = cfg.at("k3_values").get<std::vector<double>>();
    auto ts = cfg.at("T_grid").get<std::vector<double>>();
    LindbladParams lp(cfg.value("kappa_1ph", 3e-3), cfg.value("kappa_phi", 3e-3));

    auto cells = min_time_scan(k3s, ts, so);
    FockVector target = cat_state(so.alpha, 0.5 * pi, so.dim);

    std::vector<PulseEvaluation> runs;
    for (const auto& c : cells)
        if (c.converged) runs.push_back({c.k3, c.best_pulse, c.best_infidelity});
    auto rows = dissipative_reevaluate(runs, target, lp, threads);

    std::ostringstream os;
    os << csv_header(cfg, "K3,T,infidelity_closed,infidelity_dissipative",
                     "K3 in K2, T in 1/K2, rates in K2");
    for (const auto& r : rows)
        os << fmt17(r.k3) << "," << fmt17(r.T) << "," << fmt17(r.closed_infidelity) << ","
           << fmt17(r.dissipative_infidelity) << "\n";
    sink.write(os.str());
    return 0;
}

int cmd_squeeze_opt(double alpha, double kappa1, double kappaphi, int c, const Sink& sink) {
    LindbladParams lp(kappa1, kappaphi);
    SqueezeOptimum opt = optimize_squeezing(alpha, lp, c);
    SqCatMoments m = sq_cat_moments(alpha, opt.params);
    json out;
    out["alpha"] = alpha;
    out["kappa_1ph"] = kappa1;
    out["kappa_phi"] = kappaphi;
    out["c"] = c;
    out["r"] = opt.params.r;
    out["phi"] = opt.params.phi;
    out["decay_coefficient"] = opt.decay_coeff;
    out["mean_n"] = m.mean_n;
    out["var_n"] = m.var_n;
    sink.write(out.dump(2) + "\n");
    return 0;
}

int cmd_squeeze_scan(const std::string& config_path, const Sink& sink) {
    json cfg = load_config(config_path);
    double alpha = cfg.value("alpha", 2.0);
    int c = cfg.value("c", 2);
    LindbladParams lp(cfg.value("kappa_1ph", 1.0), cfg.value("kappa_phi", 1.0));
    auto rs = cfg.contains("r_values") ? cfg.at("r_values").get<std::vector<double>>()
                                       : std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0};
    auto phis = cfg.contains("phi_values") ? cfg.at("phi_values").get<std::vector<double>>()
                                           : std::vector<double>{0.0, 0.5 * pi, pi};
    auto ts = cfg.contains("t_grid") ? cfg.at("t_grid").get<std::vector<double>>()
                                     : linspace(0.0, cfg.value("t_max", 0.1),
                                                cfg.value("n_times", 11));
    std::vector<SqueezeParams> sqs;
    for (double r : rs)
        for (double phi : phis) sqs.push_back(SqueezeParams(r, phi, c));
    auto curves = decay_scan(alpha, sqs, lp, ts);

    std::ostringstream os;
    os << csv_header(cfg, "t,r,phi,overlap", "t such that kappa*t is the dimensionless decay");
    for (const auto& curve : curves)
        for (std::size_t i = 0; i < ts.size(); ++i)
            os << fmt17(ts[i]) << "," << fmt17(curve.params.r) << ","
               << fmt17(curve.params.phi) << "," << fmt17(curve.overlap[i]) << "\n";
    sink.write(os.str());
    return 0;
}

int cmd_rydberg_map(const std::string& config_path, int threads, const Sink& sink) {
    json cfg = load_config(config_path);
    RydbergParams base;
    base.omega_er = cfg.value("omega_er", 50.0);
    base.n_atoms = cfg.value("n_atoms", 8);
    base.resonance_guard = cfg.value("guard", 0.02);
    int max_order = cfg.value("max_order", 4);
    auto d_range = cfg.value("delta_range", std::vector<double>{-200.0, 200.0});
    auto v_range = cfg.value("v_range", std::vector<double>{-400.0, 400.0});
    int grid = cfg.value("grid", 81);

    auto deltas = linspace(d_range.at(0), d_range.at(1), grid);
    auto vs = linspace(v_range.at(0), v_range.at(1), grid);

    struct Row {
        double delta, v;
        std::vector<double> k;
        bool resonant;
    };
    std::vector<Row> rows(deltas.size() * vs.size());
    parallel_for(rows.size(), threads, [&](std::size_t idx) {
        RydbergParams p = base;
        p.delta = deltas[idx / vs.size()];
        p.v = vs[idx % vs.size()];
        Row row{p.delta, p.v, {}, false};
        try {
            row.k = effective_coefficients(p, max_order);
        } catch (const ResonanceError&) {
            row.resonant = true;
            row.k.assign(max_order, 0.0);
        }
        rows[idx] = std::move(row);
    });

    std::ostringstream os;
    std::string cols = "delta,v";
    for (int n = 1; n <= max_order; ++n) cols += ",K" + std::to_string(n);
    cols += ",resonance_flag";
    os << csv_header(cfg, cols, "frequencies in MHz (omega/2pi)");
    for (const auto& r : rows) {
        os << fmt17(r.delta) << "," << fmt17(r.v);
        for (double k : r.k) os << "," << fmt17(k);
        os << "," << (r.resonant ? 1 : 0) << "\n";
    }
    sink.write(os.str());
    return 0;
}

int cmd_rydberg_validate(const std::string& config_path, const Sink& sink) {
    json cfg = load_config(config_path);
    RydbergParams p;
    p.omega_er = cfg.value("omega_er", 50.0);
    p.v = cfg.value("v", 80.0);
    p.n_atoms = cfg.value("n_atoms", 2);
    p.resonance_guard = cfg.value("guard", 0.02);
    auto deltas = cfg.contains("delta_values")
                      ? cfg.at("delta_values").get<std::vector<double>>()
                      : std::vector<double>{150.0, 250.0, 500.0, 1000.0};

    std::ostringstream os;
    os << csv_header(cfg, "delta,v,n_atoms,adiabaticity,epsilon,match_overlap,ambiguous",
                     "frequencies in MHz (omega/2pi), epsilon in MHz");
    for (double delta : deltas) {
        RydbergParams q = p;
        q.delta = delta;
        ValidationResult r = validate_effective(q);
        os << fmt17(delta) << "," << fmt17(q.v) << "," << q.n_atoms << ","
           << fmt17(q.adiabaticity()) << "," << fmt17(r.epsilon) << ","
           << fmt17(r.match_overlap) << "," << (r.ambiguous ? 1 : 0) << "\n";
    }
    sink.write(os.str());
    return 0;
}

int cmd_wigner(const std::string& config_path, const Sink& sink) {
    json cfg = load_config(config_path);
    double alpha = cfg.value("alpha", 2.0);
    double phi = cfg.value("cat_phi", 0.5 * pi);
    std::string kind = cfg.value("state", "cat");
    int dim = cfg.value("dim", default_dim(std::abs(alpha)));
    double half = cfg.value("half_width", 4.0 * std::sqrt(2.0));
    int n = cfg.value("grid", 201);

    FockVector psi = [&]() -> FockVector {
        if (kind == "cat") return cat_state(alpha, phi, dim);
        if (kind == "coherent") return coherent_state(alpha, dim);
        if (kind == "vacuum") return basis_state(0, dim);
        throw DomainError("wigner: unknown state kind " + kind);
    }();

    auto grid = PhaseSpaceGrid::centered(half, n);
    auto w = wigner(psi, grid);

    std::ostringstream os;
    os << csv_header(cfg, "x,p,W", "quadratures x=(a+adag)/sqrt(2), p=i(adag-a)/sqrt(2)");
    for (int i = 0; i < grid.x.size(); ++i)
        for (int j = 0; j < grid.p.size(); ++j)
            os << fmt17(grid.x[i]) << "," << fmt17(grid.p[j]) << "," << fmt17(w(i, j)) << "\n";
    os << "# integral " << fmt17(wigner_integral(w, grid)) << "\n";
    os << "# min " << fmt17(w.minCoeff()) << "\n";
    sink.write(os.str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"kercat: fast cat-state preparation with higher-order Kerr nonlinearities"};
    app.require_subcommand(1);
    app.fallthrough(); // global options may follow the subcommand

    std::string output_path;
    std::uint64_t seed = 1;
    int threads = 0;
    app.add_option("--output,-o", output_path, "write results to this file instead of stdout");
    app.add_option("--seed", seed, "RNG seed (reproducibility)");
    app.add_option("--threads", threads,
                   "worker threads (default: KERCAT_THREADS env var or hardware)");

    int m = 4;
    double constraint = 0.0;
    int window = 5;
    auto* design = app.add_subcommand("design", "solve the coefficient congruences");
    design->add_option("--m", m, "maximum nonlinear order")->required();
    design->add_option("--constraint", constraint,
                       "bound |K_j|/|K_m| for j < m (bounded representative search)");
    design->add_option("--window", window, "representative search half-width");

    std::string config;
    auto add_config = [&config](CLI::App* cmd) {
        cmd->add_option("--config", config, "JSON configuration file")->required();
    };

    auto* evolve = app.add_subcommand("evolve", "propagate a state under a design or pulse");
    add_config(evolve);
    auto* optimize = app.add_subcommand("optimize", "single Krotov pulse optimization");
    add_config(optimize);
    auto* scan = app.add_subcommand("scan", "minimum-duration scan over K3 families");
    add_config(scan);
    auto* decay = app.add_subcommand("decay", "free decay of a cat: exact vs expansion");
    add_config(decay);
    auto* reeval = app.add_subcommand("reeval", "re-evaluate optimized pulses with dissipation");
    add_config(reeval);

    double alpha = 2.0, kappa1 = 1.0, kappaphi = 1.0;
    int c_components = 2;
    auto* sqopt = app.add_subcommand("squeeze-opt", "optimal squeezing for a noisy cat");
    sqopt->add_option("--alpha", alpha, "cat amplitude (real)");
    sqopt->add_option("--kappa-1ph", kappa1, "1-photon loss rate");
    sqopt->add_option("--kappa-phi", kappaphi, "dephasing rate");
    sqopt->add_option("--c", c_components, "cat component count");

    auto* sqscan = app.add_subcommand("squeeze-scan", "overlap decay curves per (r, phi)");
    add_config(sqscan);
    auto* rmap = app.add_subcommand("rydberg-map", "effective coefficients over (delta, V)");
    add_config(rmap);
    auto* rval = app.add_subcommand("rydberg-validate", "effective vs exact ensemble energies");
    add_config(rval);
    auto* wig = app.add_subcommand("wigner", "Wigner function on a phase-space grid");
    add_config(wig);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        std::cerr << app.help() << "\n";
        return 64;
    }

    Sink sink;
    if (!output_path.empty()) sink.path = output_path;

    try {
        if (design->parsed()) return cmd_design(m, constraint, window, sink);
        if (evolve->parsed()) return cmd_evolve(config, sink);
        if (optimize->parsed()) return cmd_optimize(config, seed, sink);
        if (scan->parsed()) return cmd_scan(config, seed, threads, sink);
        if (decay->parsed()) return cmd_decay(config, sink);
        if (reeval->parsed()) return cmd_reeval(config, seed, threads, sink);
        if (sqopt->parsed()) return cmd_squeeze_opt(alpha, kappa1, kappaphi, c_components, sink);
        if (sqscan->parsed()) return cmd_squeeze_scan(config, sink);
        if (rmap->parsed()) return cmd_rydberg_map(config, threads, sink);
        if (rval->parsed()) return cmd_rydberg_validate(config, sink);
        if (wig->parsed()) return cmd_wigner(config, sink);
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const ConvergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
