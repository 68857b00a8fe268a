#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "kacsim/config.hpp"
#include "kacsim/errors.hpp"
#include "kacsim/fourier.hpp"
#include "kacsim/kernels.hpp"
#include "kacsim/metrics.hpp"
#include "kacsim/steady.hpp"
#include "kacsim/wild.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed_override;
    std::string out_dir = ".";
    unsigned workers = 1;
    bool strict = false;
};

struct Run {
    kacsim::ConfigTable cfg;
    kacsim::KernelPtr kernel;
    std::uint64_t seed = 0;
};

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

Run load_run(const CommonArgs& args) {
    Run run{kacsim::ConfigTable::parse_file(args.config_path), nullptr, 0};
    if (args.seed_override) {
        run.seed = *args.seed_override;
    } else if (run.cfg.has("seed")) {
        run.seed = run.cfg.at("seed").as_u64();
    } else {
        throw kacsim::ConfigError(
            "config: a seed is required (top-level `seed` key or --seed flag)");
    }
    run.kernel = kernel_from_config(run.cfg.table("kernel"));
    return run;
}

kacsim::InitialDistribution load_init(const Run& run) {
    return init_from_config(run.cfg.table("init"));
}

std::string csv_header(const Run& run) {
    return "# config: " + run.cfg.to_json().dump() + "\n# seed: " +
           std::to_string(run.seed) + '\n';
}

fs::path prepare_out(const CommonArgs& args) {
    fs::path dir(args.out_dir);
    fs::create_directories(dir);
    return dir;
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream os(path);
    if (!os) throw kacsim::ConfigError("cannot open for writing: " + path.string());
    os << j.dump(2) << '\n';
}

void write_runtime_log(const fs::path& dir, const std::string& command,
                       std::chrono::steady_clock::time_point start) {
    const auto elapsed = std::chrono::duration<double>(
        std::chrono::steady_clock::now() - start);
    std::ofstream os(dir / "run.log", std::ios::app);
    os << command << " runtime_seconds=" << elapsed.count() << '\n';
}

std::vector<double> xi_grid_from_config(const kacsim::ConfigTable& cfg) {
    const auto* f = cfg.find_table("fourier");
    if (f == nullptr) return kacsim::default_xi_grid();
    const double lo = f->get_double("xi_min", -5.0);
    const double hi = f->get_double("xi_max", 5.0);
    const auto npts = static_cast<std::size_t>(f->get_u64("xi_points", 41));
    if (npts < 2 || !(lo < hi))
        throw kacsim::ConfigError("config: fourier: need xi_min < xi_max, xi_points >= 2");
    std::vector<double> grid(npts);
    for (std::size_t i = 0; i < npts; ++i)
        grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(npts - 1);
    return grid;
}

kacsim::SteadyConfig steady_config_from(const kacsim::ConfigTable& cfg) {
    kacsim::SteadyConfig sc;
    const auto* s = cfg.find_table("steady");
    if (s != nullptr) {
        sc.pool_size = static_cast<std::size_t>(s->get_u64("pool_size", 10000));
        sc.max_iters = static_cast<std::size_t>(s->get_u64("max_iters", 200));
        sc.tol = s->get_double("tol", 1e-3);
        sc.gamma_check = s->get_double("gamma_check", 2.0);
        if (s->has("mean_pin")) sc.mean_pin = s->get_double("mean_pin");
    }
    return sc;
}

json q_summary(const kacsim::Kernel& kernel) {
    json q = json::object();
    for (const double g : {0.5, 1.0, 2.0}) {
        if (const auto v = kacsim::q_exact(kernel, g))
            q["q(" + std::to_string(g).substr(0, 3) + ")"] = *v;
    }
    return q;
}

// ---------------------------------------------------------------------------

int cmd_simulate(const CommonArgs& args) {
    const auto start = std::chrono::steady_clock::now();
    Run run = load_run(args);
    const kacsim::InitialDistribution init = load_init(run);
    const auto& sim = run.cfg.table("simulate");
    const double t = sim.get_double("t");
    const auto n = static_cast<std::size_t>(sim.at("n_samples").as_u64());
    const double t_max = sim.get_double("t_max", kacsim::kDefaultTMax);

    kacsim::RngStream rng(run.seed);
    kacsim::EmpiricalMeasure measure =
        kacsim::sample_mu_t(t, *run.kernel, init, n, rng, args.workers, t_max);

    const fs::path dir = prepare_out(args);
    {
        json meta = measure.meta();
        meta["config"] = run.cfg.to_json();
        measure = kacsim::EmpiricalMeasure::from_samples(measure.samples(), meta);
    }
    measure.save(dir / "measure.txt");

    json summary;
    summary["command"] = "simulate";
    summary["config"] = run.cfg.to_json();
    summary["seed"] = run.seed;
    summary["t"] = t;
    summary["n_samples"] = n;
    summary["kernel"] = run.kernel->describe();
    summary["init"] = init.describe();
    summary["mean"] = measure.mean();
    summary["variance"] = measure.variance();
    summary["second_moment"] = measure.second_moment();
    summary["q"] = q_summary(*run.kernel);
    write_json(dir / "summary.json", summary);
    write_runtime_log(dir, "simulate", start);
    return 0;
}

int cmd_steady(const CommonArgs& args) {
    const auto start = std::chrono::steady_clock::now();
    Run run = load_run(args);
    const kacsim::SteadyConfig sc = steady_config_from(run.cfg);

    kacsim::RngStream rng(run.seed);
    kacsim::SteadyResult result =
        kacsim::solve_steady(*run.kernel, sc, rng, args.workers);

    const fs::path dir = prepare_out(args);
    {
        json meta = result.measure.meta();
        meta["config"] = run.cfg.to_json();
        result.measure =
            kacsim::EmpiricalMeasure::from_samples(result.measure.samples(), meta);
    }
    result.measure.save(dir / "steady.txt");

    json convergence = json::array();
    for (std::size_t i = 0; i < result.log.size(); ++i) {
        convergence.push_back({{"iteration", i + 1},
                               {"gap", result.log[i].gap},
                               {"mean", result.log[i].mean},
                               {"variance", result.log[i].variance}});
    }
    write_json(dir / "convergence.json",
               json{{"config", run.cfg.to_json()},
                    {"seed", run.seed},
                    {"iterations", convergence}});

    json summary;
    summary["command"] = "steady";
    summary["config"] = run.cfg.to_json();
    summary["seed"] = run.seed;
    summary["kernel"] = run.kernel->describe();
    summary["converged"] = result.converged;
    summary["iterations"] = result.iterations;
    summary["final_gap"] = result.final_gap;
    summary["mean"] = result.measure.mean();
    summary["variance"] = result.measure.variance();
    try {
        const kacsim::SteadyMoments m =
            kacsim::steady_moments(*run.kernel, sc.mean_pin, &rng);
        summary["moments"] = {{"mean", m.mean},
                              {"second_moment", m.second_moment},
                              {"variance", m.variance}};
    } catch (const kacsim::InfiniteMomentError&) {
        summary["moments"] = {{"infinite_second_moment", true}};
    } catch (const kacsim::UndefinedMeanError&) {
        summary["moments"] = {{"undefined_mean", true}};
    }

    const std::vector<double> grid = xi_grid_from_config(run.cfg);
    const auto* f = run.cfg.find_table("fourier");
    const auto mc_pairs = static_cast<std::size_t>(
        f != nullptr ? f->get_u64("mc_pairs", 100000) : 100000);
    const kacsim::ResidualReport residual = kacsim::stationarity_residual(
        *run.kernel, result.measure, grid, mc_pairs, rng, args.workers);
    summary["max_stationarity_residual"] = residual.max_abs_residual;
    {
        std::ofstream os(dir / "residual.csv");
        os << csv_header(run) << "xi,residual,se\n";
        for (const auto& p : residual.per_point)
            os << fmt17(p.xi) << ',' << fmt17(p.residual) << ',' << fmt17(p.se) << '\n';
    }

    write_json(dir / "summary.json", summary);
    write_runtime_log(dir, "steady", start);
    if (!result.converged) {
        std::cerr << "warning: steady solve did not converge within "
                  << sc.max_iters << " iterations (final gap " << result.final_gap
                  << ")\n";
        if (args.strict) return 4;
    }
    return 0;
}

int cmd_contraction(const CommonArgs& args) {
    const auto start = std::chrono::steady_clock::now();
    Run run = load_run(args);
    const kacsim::InitialDistribution init = load_init(run);
    const auto& ct = run.cfg.table("contraction");
    const double gamma = ct.get_double("gamma");
    const std::vector<double> times = ct.at("times").as_double_array();
    const auto n = static_cast<std::size_t>(ct.at("n_samples").as_u64());

    kacsim::ContractionOptions opts;
    opts.slack = ct.get_double("slack", 0.15);
    opts.mc_floor_mult = ct.get_double("mc_floor_mult", 3.0);
    opts.bootstrap = static_cast<std::size_t>(ct.get_u64("bootstrap", 80));
    opts.workers = args.workers;

    kacsim::RngStream rng(run.seed);
    bool solver_converged = true;
    std::optional<kacsim::EmpiricalMeasure> ref;
    if (ct.has("steady_ref")) {
        ref = kacsim::EmpiricalMeasure::load(fs::path(ct.get_string("steady_ref")));
    } else {
        kacsim::SteadyResult sr =
            kacsim::solve_steady(*run.kernel, steady_config_from(run.cfg), rng,
                                 args.workers);
        solver_converged = sr.converged;
        ref = std::move(sr.measure);
    }

    const kacsim::ContractionReport report = kacsim::contraction_check(
        *run.kernel, init, gamma, times, n, *ref, rng, opts);

    const fs::path dir = prepare_out(args);
    {
        std::ofstream os(dir / "contraction.csv");
        os << csv_header(run) << "t,observed,bound,mc_floor,pass\n";
        for (const auto& p : report.points)
            os << fmt17(p.t) << ',' << fmt17(p.observed) << ',' << fmt17(p.bound) << ','
               << fmt17(p.mc_floor) << ',' << (p.pass ? 1 : 0) << '\n';
    }

    json summary;
    summary["command"] = "contraction";
    summary["config"] = run.cfg.to_json();
    summary["seed"] = run.seed;
    summary["kernel"] = run.kernel->describe();
    summary["init"] = init.describe();
    summary["gamma"] = report.gamma;
    summary["q_gamma"] = report.q;
    summary["rate"] = report.rate;
    summary["prefactor"] = report.prefactor;
    summary["initial_distance"] = report.initial_distance;
    summary["all_pass"] = report.all_pass;
    summary["n_samples"] = n;
    write_json(dir / "summary.json", summary);
    write_runtime_log(dir, "contraction", start);
    if (!solver_converged) {
        std::cerr << "warning: internal steady solve did not converge\n";
        if (args.strict) return 4;
    }
    return 0;
}

int cmd_moments(const CommonArgs& args) {
    const auto start = std::chrono::steady_clock::now();
    Run run = load_run(args);
    const auto* mt = run.cfg.find_table("moments");

    std::vector<double> gamma_grid = {0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
    std::vector<double> beta_grid = {1.0, 2.0, 3.0};
    std::size_t c_n_max = 20;
    std::size_t mc_reps = 200000;
    if (mt != nullptr) {
        if (mt->has("gamma_grid")) gamma_grid = mt->at("gamma_grid").as_double_array();
        if (mt->has("beta_grid")) beta_grid = mt->at("beta_grid").as_double_array();
        c_n_max = static_cast<std::size_t>(mt->get_u64("c_n_max", 20));
        mc_reps = static_cast<std::size_t>(mt->get_u64("mc_reps", 200000));
    }

    kacsim::RngStream rng(run.seed);
    const fs::path dir = prepare_out(args);

    json summary;
    summary["command"] = "moments";
    summary["config"] = run.cfg.to_json();
    summary["seed"] = run.seed;
    summary["kernel"] = run.kernel->describe();
    try {
        summary["m_bar"] = kacsim::m_bar(*run.kernel);
    } catch (const kacsim::UndefinedMeanError&) {
        summary["mean_pinned_case"] = true;
    }

    {
        std::ofstream os(dir / "q_gamma.csv");
        os << csv_header(run) << "gamma,q,method,se\n";
        std::ofstream cs(dir / "c_n.csv");
        cs << csv_header(run) << "gamma,n,c_n\n";
        for (const double g : gamma_grid) {
            double q = 0.0;
            std::string method;
            std::string se;
            try {
                q = kacsim::q_gamma(*run.kernel, g, kacsim::QMethod::ClosedForm).value;
                method = "closed_form";
            } catch (const kacsim::UnsupportedMethodError&) {
                try {
                    q = kacsim::q_gamma(*run.kernel, g, kacsim::QMethod::Quadrature).value;
                    method = "quadrature";
                } catch (const kacsim::UnsupportedMethodError&) {
                    const auto est = kacsim::q_gamma(
                        *run.kernel, g, kacsim::QMethod::MonteCarlo, mc_reps, &rng);
                    q = est.value;
                    se = fmt17(*est.std_error);
                    method = "monte_carlo";
                }
            }
            os << fmt17(g) << ',' << fmt17(q) << ',' << method << ',' << se << '\n';
            if (std::isfinite(q) && q > 0.0) {
                for (std::size_t nn = 0; nn <= c_n_max; ++nn)
                    cs << fmt17(g) << ',' << nn << ',' << fmt17(kacsim::c_n(q, nn))
                       << '\n';
            }
        }
    }

    // Wrapped-rule moment identity: q(beta) = factor(beta) * q_base(beta).
    if (run.kernel->base() != nullptr) {
        double max_diff = 0.0;
        bool any = false;
        std::ofstream os(dir / "q_identity.csv");
        os << csv_header(run)
           << "beta,q_kernel,q_base,factor,q_product,abs_diff,q_mc,q_mc_se\n";
        for (const double b : beta_grid) {
            const auto factor = run.kernel->q_factor(b);
            const auto base_q = kacsim::q_exact(*run.kernel->base(), b);
            if (!factor || !base_q) continue;
            double qk = 0.0;
            try {
                qk = kacsim::q_gamma(*run.kernel, b, kacsim::QMethod::Quadrature).value;
            } catch (const kacsim::UnsupportedMethodError&) {
                try {
                    qk = kacsim::q_gamma(*run.kernel, b, kacsim::QMethod::ClosedForm).value;
                } catch (const kacsim::UnsupportedMethodError&) {
                    continue;
                }
            }
            const double product = *factor * *base_q;
            const double diff = std::abs(qk - product);
            const auto mc = kacsim::q_gamma(*run.kernel, b, kacsim::QMethod::MonteCarlo,
                                            mc_reps, &rng);
            os << fmt17(b) << ',' << fmt17(qk) << ',' << fmt17(*base_q) << ','
               << fmt17(*factor) << ',' << fmt17(product) << ',' << fmt17(diff) << ','
               << fmt17(mc.value) << ',' << fmt17(*mc.std_error) << '\n';
            max_diff = std::max(max_diff, diff);
            any = true;
        }
        if (any) summary["identity_max_abs_diff"] = max_diff;
    }

    write_json(dir / "summary.json", summary);
    write_runtime_log(dir, "moments", start);
    return 0;
}

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "configuration file")->required();
    cmd->add_option("--seed", args.seed_override, "seed override (64-bit unsigned)");
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--workers", args.workers, "worker thread cap");
    cmd->add_flag("--strict", args.strict, "treat non-convergence as an error");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo engine for one-dimensional kinetic equations with "
                 "randomly perturbed binary collisions"};
    app.require_subcommand(1);

    CommonArgs args;
    int (*handler)(const CommonArgs&) = nullptr;

    auto* sim = app.add_subcommand("simulate", "sample the time-t solution");
    add_common(sim, args);
    sim->callback([&] { handler = cmd_simulate; });

    auto* steady = app.add_subcommand("steady", "solve for the steady state");
    add_common(steady, args);
    steady->callback([&] { handler = cmd_steady; });

    auto* contraction =
        app.add_subcommand("contraction", "verify exponential contraction bounds");
    add_common(contraction, args);
    contraction->callback([&] { handler = cmd_contraction; });

    auto* moments = app.add_subcommand("moments", "tabulate moment functionals");
    add_common(moments, args);
    moments->callback([&] { handler = cmd_moments; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        return handler(args);
    } catch (const kacsim::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const kacsim::HypothesisError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const kacsim::UndefinedMeanError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const kacsim::UnsupportedMethodError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const kacsim::ResourceCapError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const kacsim::InfiniteMomentError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
