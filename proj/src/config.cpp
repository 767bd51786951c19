#include "crane/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <set>
#include <sstream>

namespace crane::config {

namespace {

std::string trim(const std::string &s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
    for (auto &c : s) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return s;
}

bool parse_plain_double(const std::string &s, double &out) {
    if (s.empty()) {
        return false;
    }
    const char *first = s.data();
    const char *last = s.data() + s.size();
    if (*first == '+') {
        ++first;
    }
    const auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

struct Context {
    std::string source;
    int line = 0;
    std::string key;

    [[noreturn]] void fail(const std::string &msg) const {
        throw ConfigError(source, line, key, msg);
    }

    double number(const std::string &v) const {
        double out = 0.0;
        if (const auto slash = v.find('/'); slash != std::string::npos) {
            double num = 0.0, den = 0.0;
            if (!parse_plain_double(trim(v.substr(0, slash)), num) ||
                !parse_plain_double(trim(v.substr(slash + 1)), den) || den == 0.0) {
                fail("expected a number or fraction, got '" + v + "'");
            }
            return num / den;
        }
        if (!parse_plain_double(v, out)) {
            fail("expected a number, got '" + v + "'");
        }
        return out;
    }

    double positive(const std::string &v) const {
        const double x = number(v);
        if (!(x > 0.0)) {
            fail("must be positive");
        }
        return x;
    }

    double non_negative(const std::string &v) const {
        const double x = number(v);
        if (!(x >= 0.0)) {
            fail("must be non-negative");
        }
        return x;
    }

    int integer(const std::string &v) const {
        int out = 0;
        const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc() || ptr != v.data() + v.size()) {
            fail("expected an integer, got '" + v + "'");
        }
        return out;
    }

    std::uint64_t seed(const std::string &v) const {
        std::uint64_t out = 0;
        const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc() || ptr != v.data() + v.size()) {
            fail("expected a non-negative integer seed, got '" + v + "'");
        }
        return out;
    }

    bool boolean(const std::string &v) const {
        const auto l = lower(v);
        if (l == "on" || l == "true" || l == "yes" || l == "1") {
            return true;
        }
        if (l == "off" || l == "false" || l == "no" || l == "0") {
            return false;
        }
        fail("expected on/off, got '" + v + "'");
    }

    template <typename E>
    E choice(const std::string &v, const std::map<std::string, E> &options) const {
        if (const auto it = options.find(lower(v)); it != options.end()) {
            return it->second;
        }
        std::string names;
        for (const auto &[name, _] : options) {
            names += (names.empty() ? "" : ", ") + name;
        }
        fail("expected one of {" + names + "}, got '" + v + "'");
    }
};

using Setter = std::function<void(ScenarioConfig &, const std::string &, const Context &)>;

const std::map<std::string, Setter> &setters() {
    using C = ScenarioConfig;
    using Ctx = Context;
    using S = std::string;
    static const std::map<std::string, Setter> table = {
        {"scenario.id", [](C &c, const S &v, const Ctx &x) {
             c.id = x.choice<ScenarioId>(v, {{"angular_vs_cartesian", ScenarioId::AngularVsCartesian},
                                             {"adaptive_sim", ScenarioId::AdaptiveSim},
                                             {"adaptive_experiment_replica",
                                              ScenarioId::AdaptiveExperimentReplica}});
         }},
        {"scenario.output", [](C &c, const S &v, const Ctx &x) {
             if (v.empty()) x.fail("empty output path");
             c.output = v;
         }},

        {"plant.m", [](C &c, const S &v, const Ctx &x) { c.m = x.positive(v); }},
        {"plant.L", [](C &c, const S &v, const Ctx &x) { c.L = x.positive(v); }},
        {"plant.g", [](C &c, const S &v, const Ctx &x) { c.g = x.positive(v); }},
        {"plant.model", [](C &c, const S &v, const Ctx &x) {
             c.sim.model = x.choice<sim::Model>(v, {{"cartesian", sim::Model::Cartesian},
                                                   {"euler", sim::Model::Euler}});
         }},

        {"sim.dt_physics", [](C &c, const S &v, const Ctx &x) { c.sim.dt_physics = x.positive(v); }},
        {"sim.dt_control", [](C &c, const S &v, const Ctx &x) { c.sim.dt_control = x.positive(v); }},
        {"sim.duration", [](C &c, const S &v, const Ctx &x) { c.sim.duration = x.positive(v); }},
        {"sim.integrator", [](C &c, const S &v, const Ctx &x) {
             c.sim.integrator = x.choice<sim::Integrator>(
                 v, {{"rk4", sim::Integrator::Rk4}, {"euler", sim::Integrator::Euler}});
         }},
        {"sim.seed", [](C &c, const S &v, const Ctx &x) { c.sim.seed = x.seed(v); }},
        {"sim.noise_seed", [](C &c, const S &v, const Ctx &x) { c.sim.noise_seed = x.seed(v); }},
        {"sim.noise_std", [](C &c, const S &v, const Ctx &x) { c.sim.noise_std = x.non_negative(v); }},
        {"sim.lowpass_hz", [](C &c, const S &v, const Ctx &x) {
             if (lower(v) == "off") c.sim.lowpass_hz.reset();
             else c.sim.lowpass_hz = x.positive(v);
         }},
        {"sim.tip_feedback", [](C &c, const S &v, const Ctx &x) {
             c.tip_feedback = x.choice<sim::TipFeedback>(
                 v, {{"world", sim::TipFeedback::World}, {"base", sim::TipFeedback::Base}});
         }},

        {"controller.type", [](C &c, const S &v, const Ctx &x) {
             c.controller = x.choice<sim::ControllerKind>(
                 v, {{"cartesian", sim::ControllerKind::Cartesian},
                     {"angular", sim::ControllerKind::Angular}});
         }},
        {"controller.omega_c", [](C &c, const S &v, const Ctx &x) { c.omega_c = x.positive(v); }},
        {"controller.zeta_c", [](C &c, const S &v, const Ctx &x) { c.zeta_c = x.positive(v); }},
        {"controller.k_p0", [](C &c, const S &v, const Ctx &x) { c.k_p0 = x.positive(v); }},
        {"controller.k_d0", [](C &c, const S &v, const Ctx &x) { c.k_d0 = x.positive(v); }},
        {"controller.omega_d", [](C &c, const S &v, const Ctx &x) { c.omega_d = x.positive(v); }},
        {"controller.zeta_d", [](C &c, const S &v, const Ctx &x) { c.zeta_d = x.positive(v); }},
        {"controller.omega_t", [](C &c, const S &v, const Ctx &x) { c.omega_t = x.positive(v); }},
        {"controller.zeta_t", [](C &c, const S &v, const Ctx &x) { c.zeta_t = x.positive(v); }},

        {"adaptive.enabled", [](C &c, const S &v, const Ctx &x) { c.adaptive_enabled = x.boolean(v); }},
        {"adaptive.d", [](C &c, const S &v, const Ctx &x) {
             c.adaptive.d = x.integer(v);
             if (c.adaptive.d < 1) x.fail("must be >= 1");
         }},
        {"adaptive.sigma", [](C &c, const S &v, const Ctx &x) { c.adaptive.sigma = x.positive(v); }},
        {"adaptive.gamma", [](C &c, const S &v, const Ctx &x) { c.adaptive.gamma = x.positive(v); }},
        {"adaptive.c", [](C &c, const S &v, const Ctx &x) { c.adaptive.c = x.positive(v); }},
        {"adaptive.regressor", [](C &c, const S &v, const Ctx &x) {
             c.adaptive.regressor = x.choice<control::Regressor>(
                 v, {{"error", control::Regressor::Error},
                     {"state", control::Regressor::State},
                     {"error_state", control::Regressor::ErrorAndState}});
         }},
        {"adaptive.deadzone", [](C &c, const S &v, const Ctx &x) { c.deadzone_enabled = x.boolean(v); }},
        {"adaptive.delta", [](C &c, const S &v, const Ctx &x) { c.delta = x.positive(v); }},
        {"adaptive.mu", [](C &c, const S &v, const Ctx &x) { c.mu = x.positive(v); }},

        {"disturbance.base_amplitude", [](C &c, const S &v, const Ctx &x) {
             c.base_amplitude = x.non_negative(v);
         }},
        {"disturbance.base_omega", [](C &c, const S &v, const Ctx &x) {
             if (lower(v) == "omega0") c.base_omega.reset();
             else c.base_omega = x.non_negative(v);
         }},
        {"disturbance.base_axis", [](C &c, const S &v, const Ctx &x) {
             c.base_axis = x.choice<trajectory::Axis>(
                 v, {{"x", trajectory::Axis::X}, {"y", trajectory::Axis::Y}});
         }},
        {"disturbance.force_x", [](C &c, const S &v, const Ctx &x) { c.force.x() = x.number(v); }},
        {"disturbance.force_y", [](C &c, const S &v, const Ctx &x) { c.force.y() = x.number(v); }},
        {"disturbance.force_z", [](C &c, const S &v, const Ctx &x) { c.force.z() = x.number(v); }},

        {"trajectory.type", [](C &c, const S &v, const Ctx &x) {
             c.trajectory.kind = x.choice<TrajectorySpec::Kind>(
                 v, {{"sinusoidal", TrajectorySpec::Kind::Sinusoidal},
                     {"waypoints", TrajectorySpec::Kind::Waypoints},
                     {"constant", TrajectorySpec::Kind::Constant}});
         }},
        {"trajectory.start_x", [](C &c, const S &v, const Ctx &x) { c.trajectory.start.x() = x.number(v); }},
        {"trajectory.start_y", [](C &c, const S &v, const Ctx &x) { c.trajectory.start.y() = x.number(v); }},
        {"trajectory.end_x", [](C &c, const S &v, const Ctx &x) { c.trajectory.end.x() = x.number(v); }},
        {"trajectory.end_y", [](C &c, const S &v, const Ctx &x) { c.trajectory.end.y() = x.number(v); }},
        {"trajectory.T", [](C &c, const S &v, const Ctx &x) { c.trajectory.T = x.positive(v); }},
        {"trajectory.buffer", [](C &c, const S &v, const Ctx &x) { c.trajectory.buffer = x.non_negative(v); }},
        {"trajectory.file", [](C &c, const S &v, const Ctx &x) {
             if (v.empty()) x.fail("empty file path");
             c.trajectory.file = v;
         }},
        {"trajectory.offset_x", [](C &c, const S &v, const Ctx &x) { c.payload_offset.x() = x.number(v); }},
        {"trajectory.offset_y", [](C &c, const S &v, const Ctx &x) { c.payload_offset.y() = x.number(v); }},

        {"metrics.t_start", [](C &c, const S &v, const Ctx &x) { c.metrics_t_start = x.non_negative(v); }},
        {"metrics.t_end", [](C &c, const S &v, const Ctx &x) { c.metrics_t_end = x.non_negative(v); }},
    };
    return table;
}

} // namespace

ConfigError::ConfigError(std::string source, int line, std::string key, const std::string &msg)
    : std::runtime_error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) +
                         (key.empty() ? "" : ": " + key) + ": " + msg),
      line_(line), key_(std::move(key)) {}

std::string to_string(ScenarioId id) {
    switch (id) {
    case ScenarioId::AngularVsCartesian:
        return "angular_vs_cartesian";
    case ScenarioId::AdaptiveSim:
        return "adaptive_sim";
    case ScenarioId::AdaptiveExperimentReplica:
        return "adaptive_experiment_replica";
    }
    return "unknown";
}

void ScenarioConfig::validate(const std::string &source) const {
    auto fail = [&](const std::string &key, const std::string &msg) {
        throw ConfigError(source, 0, key, msg);
    };
    try {
        sim.validate();
    } catch (const std::invalid_argument &e) {
        fail("sim", e.what());
    }
    if (deadzone_enabled && (!delta || !mu)) {
        fail("adaptive.deadzone", "deadzone on requires adaptive.delta and adaptive.mu");
    }
    if (adaptive_enabled && controller != sim::ControllerKind::Cartesian) {
        fail("adaptive.enabled", "adaptive compensation requires controller.type = cartesian");
    }
    if (adaptive_enabled && 2.0 * zeta_c * omega_c <= adaptive.c) {
        fail("adaptive.c", "needs c < k_d = 2 zeta_c omega_c");
    }
    if (trajectory.kind == TrajectorySpec::Kind::Waypoints && trajectory.file.empty()) {
        fail("trajectory.file", "waypoint trajectory needs a file");
    }
    if (metrics_t_start && metrics_t_end && !(*metrics_t_end > *metrics_t_start)) {
        fail("metrics.t_end", "must exceed metrics.t_start");
    }
    if (id == ScenarioId::AdaptiveExperimentReplica && !sim.lowpass_hz) {
        fail("sim.lowpass_hz", "experiment replica needs a measurement filter");
    }
}

ScenarioConfig parse_scenario(std::istream &is, const std::string &source,
                              const std::filesystem::path &base_dir) {
    ScenarioConfig cfg;
    std::set<std::string> seen;
    std::string section;
    std::string raw;
    Context ctx;
    ctx.source = source;
    while (std::getline(is, raw)) {
        ++ctx.line;
        ctx.key.clear();
        std::string line = raw;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']') {
                ctx.fail("unterminated section header");
            }
            section = trim(line.substr(1, line.size() - 2));
            const auto &tbl = setters();
            const auto it = tbl.lower_bound(section + ".");
            if (it == tbl.end() || it->first.rfind(section + ".", 0) != 0) {
                ctx.key = section;
                ctx.fail("unknown section");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            ctx.fail("expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty()) {
            ctx.key = key;
            ctx.fail("entry outside of a section");
        }
        ctx.key = section + "." + key;
        const auto it = setters().find(ctx.key);
        if (it == setters().end()) {
            ctx.fail("unknown key");
        }
        if (!seen.insert(ctx.key).second) {
            ctx.fail("duplicate key");
        }
        it->second(cfg, value, ctx);
    }
    if (!cfg.trajectory.file.empty() && cfg.trajectory.file.is_relative()) {
        cfg.trajectory.file = base_dir / cfg.trajectory.file;
    }
    cfg.validate(source);
    return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(path.string(), 0, "", "cannot open config file");
    }
    return parse_scenario(in, path.string(), path.parent_path());
}

sim::ClosedLoopSetup build_setup(const ScenarioConfig &cfg) {
    sim::ClosedLoopSetup s;
    s.params = dynamics::PendulumParams(cfg.m, cfg.L, cfg.g);
    switch (cfg.trajectory.kind) {
    case TrajectorySpec::Kind::Sinusoidal:
        s.reference = trajectory::sinusoidal_profile_trajectory(
            cfg.trajectory.start, cfg.trajectory.end, cfg.trajectory.T, cfg.trajectory.buffer);
        break;
    case TrajectorySpec::Kind::Waypoints:
        try {
            s.reference = trajectory::min_jerk_trajectory(
                trajectory::load_waypoints(cfg.trajectory.file.string(), cfg.trajectory.buffer));
        } catch (const std::runtime_error &e) {
            throw ConfigError(cfg.trajectory.file.string(), 0, "trajectory.file", e.what());
        }
        break;
    case TrajectorySpec::Kind::Constant:
        s.reference = std::make_shared<const trajectory::ConstantTrajectory>(cfg.trajectory.start);
        break;
    }
    s.controller = cfg.controller;
    s.gains = control::TrackingGains::from_design(cfg.omega_c, cfg.zeta_c, cfg.k_p0, cfg.k_d0);
    s.angular = control::AngularGains::from_design(cfg.omega_d, cfg.zeta_d, cfg.omega_t,
                                                   cfg.zeta_t, s.params.omega0());
    if (cfg.adaptive_enabled) {
        s.adaptive = cfg.adaptive;
        if (cfg.deadzone_enabled) {
            s.adaptive->deadzone = control::DeadzoneConfig{*cfg.delta, *cfg.mu};
        } else {
            s.adaptive->deadzone.reset();
        }
    }
    s.base.amplitude = cfg.base_amplitude;
    s.base.omega = cfg.base_omega.value_or(s.params.omega0());
    s.base.axis = cfg.base_axis;
    s.force.constant = cfg.force;
    s.tip_feedback = cfg.tip_feedback;
    s.payload_offset = cfg.payload_offset;
    return s;
}

} // namespace crane::config
