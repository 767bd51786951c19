#include "crane/scenario.hpp"

#include <fstream>
#include <future>
#include <iomanip>
#include <ostream>

namespace crane::scenario {

config::ScenarioConfig apply_overrides(config::ScenarioConfig cfg, const RunOptions &opts) {
    if (opts.seed) {
        cfg.sim.seed = *opts.seed;
    }
    if (opts.adaptive) {
        cfg.adaptive_enabled = *opts.adaptive;
    }
    if (opts.controller) {
        cfg.controller = *opts.controller;
        if (cfg.controller == sim::ControllerKind::Angular) {
            cfg.adaptive_enabled = false;
        }
    }
    if (opts.deadzone) {
        cfg.deadzone_enabled = *opts.deadzone;
    }
    if (opts.out_dir) {
        cfg.output = opts.out_dir->string();
    }
    cfg.validate(opts.config_path.string());
    return cfg;
}

std::vector<Variant> paired_variants(const config::ScenarioConfig &cfg) {
    std::vector<Variant> out;
    if (cfg.id == config::ScenarioId::AngularVsCartesian) {
        auto angular = cfg;
        angular.controller = sim::ControllerKind::Angular;
        angular.adaptive_enabled = false;
        auto cartesian = cfg;
        cartesian.controller = sim::ControllerKind::Cartesian;
        out.push_back({"angular", angular});
        out.push_back({"cartesian", cartesian});
    } else {
        auto off = cfg;
        off.adaptive_enabled = false;
        auto on = cfg;
        on.adaptive_enabled = true;
        on.controller = sim::ControllerKind::Cartesian;
        out.push_back({"adaptive_off", off});
        out.push_back({"adaptive_on", on});
    }
    return out;
}

metrics::Window metrics_window(const config::ScenarioConfig &cfg) {
    metrics::Window w;
    if (cfg.metrics_t_start) {
        w.t_start = *cfg.metrics_t_start;
    }
    if (cfg.metrics_t_end) {
        w.t_end = *cfg.metrics_t_end;
    }
    return w;
}

std::vector<VariantResult> run_variants(const std::vector<Variant> &variants) {
    // Setups are built up front so file errors surface before any work.
    std::vector<sim::ClosedLoopSetup> setups;
    for (const auto &v : variants) {
        setups.push_back(config::build_setup(v.cfg));
    }
    std::vector<std::future<sim::SimResult>> futures;
    for (std::size_t i = 0; i < variants.size(); ++i) {
        futures.push_back(std::async(std::launch::async, [&, i] {
            return sim::run_closed_loop(variants[i].cfg.sim, setups[i]);
        }));
    }
    for (auto &f : futures) {
        f.wait();
    }
    std::vector<VariantResult> out;
    for (std::size_t i = 0; i < variants.size(); ++i) {
        VariantResult r;
        r.label = variants[i].label;
        r.sim = futures[i].get();
        r.metrics = metrics::compute_metrics(r.sim.rows, metrics_window(variants[i].cfg));
        out.push_back(std::move(r));
    }
    return out;
}

void write_metrics(std::ostream &os, const config::ScenarioConfig &cfg,
                   const std::vector<VariantResult> &results) {
    os << "scenario " << config::to_string(cfg.id) << '\n'
       << "seed " << cfg.sim.seed << '\n'
       << std::left << std::setw(16) << "variant" << std::setw(16) << "MSE[m^2]"
       << std::setw(16) << "MAE[m]" << std::setw(16) << "MSE_x" << std::setw(16) << "MSE_y"
       << "max|e|[m]\n";
    os << std::scientific << std::setprecision(6);
    for (const auto &r : results) {
        os << std::setw(16) << r.label << std::setw(16) << r.metrics.mse << std::setw(16)
           << r.metrics.mae << std::setw(16) << r.metrics.mse_x << std::setw(16)
           << r.metrics.mse_y << r.metrics.max_error << '\n';
    }
    if (results.size() == 2) {
        os << std::fixed << std::setprecision(2) << std::setw(16) << "improvement[%]"
           << std::setw(16)
           << metrics::improvement_percent(results[0].metrics.mse, results[1].metrics.mse)
           << std::setw(16)
           << metrics::improvement_percent(results[0].metrics.mae, results[1].metrics.mae)
           << '\n';
    }
}

int run_scenario(const RunOptions &opts, std::ostream &out, std::ostream &err) {
    config::ScenarioConfig cfg;
    std::vector<Variant> variants;
    try {
        cfg = apply_overrides(config::load_scenario(opts.config_path), opts);
        variants = opts.paired ? paired_variants(cfg)
                               : std::vector<Variant>{{"run", cfg}};
        for (const auto &v : variants) {
            v.cfg.validate(opts.config_path.string());
        }
    } catch (const config::ConfigError &e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    }

    std::vector<VariantResult> results;
    try {
        results = run_variants(variants);
    } catch (const config::ConfigError &e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const sim::SimulationAbort &e) {
        err << "simulation aborted at " << e.what() << '\n';
        return kExitAbort;
    } catch (const std::invalid_argument &e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    }

    const std::filesystem::path dir = cfg.output;
    try {
        std::filesystem::create_directories(dir);
        for (const auto &r : results) {
            const auto name = results.size() == 1 ? std::string("trace.csv")
                                                  : "trace_" + r.label + ".csv";
            std::ofstream f(dir / name);
            sim::write_trace_csv(f, r.sim.rows);
            if (!f) {
                throw std::runtime_error("failed writing " + (dir / name).string());
            }
        }
        std::ofstream m(dir / "metrics.txt");
        write_metrics(m, cfg, results);
        if (!m) {
            throw std::runtime_error("failed writing metrics.txt");
        }
    } catch (const std::exception &e) {
        err << "output error: " << e.what() << '\n';
        return kExitFailure;
    }
    write_metrics(out, cfg, results);
    out << "wrote " << dir.string() << '\n';
    return kExitOk;
}

} // namespace crane::scenario
