// Scenario configuration files.
//
// Grammar (one level of sections, no nesting):
//   file    := { line }
//   line    := blank | comment | section | entry
//   comment := '#' ...
//   section := '[' name ']'
//   entry   := key '=' value [ '#' ... ]
// Numbers accept decimal/scientific notation or a fraction `a/b`; booleans
// accept on/off, true/false, yes/no. Unknown sections or keys, duplicate
// keys and malformed values are errors.
#pragma once

#include "crane/sim.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

namespace crane::config {

class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string source, int line, std::string key, const std::string &msg);
    int line() const { return line_; }
    const std::string &key() const { return key_; }

private:
    int line_;
    std::string key_;
};

enum class ScenarioId { AngularVsCartesian, AdaptiveSim, AdaptiveExperimentReplica };

std::string to_string(ScenarioId id);

struct TrajectorySpec {
    enum class Kind { Sinusoidal, Waypoints, Constant };
    Kind kind = Kind::Sinusoidal;
    Eigen::Vector2d start{1.35, 0.0};
    Eigen::Vector2d end{0.0, -1.35};
    double T = 40.0;
    double buffer = 10.0;
    /// Waypoint file, relative paths resolved against the config directory.
    std::filesystem::path file;
};

struct ScenarioConfig {
    ScenarioId id = ScenarioId::AdaptiveSim;
    std::string output = "out";

    double m = 4.0;
    double L = 1.255;
    double g = 9.81;

    sim::SimConfig sim;
    sim::TipFeedback tip_feedback = sim::TipFeedback::World;

    sim::ControllerKind controller = sim::ControllerKind::Cartesian;
    double omega_c = 2.796;
    double zeta_c = 0.2;
    double k_p0 = 49.0;
    double k_d0 = 14.0;
    double omega_d = 2.796;
    double zeta_d = 0.2;
    double omega_t = 0.559;
    double zeta_t = 1.0;

    bool adaptive_enabled = false;
    sim::AdaptiveSetup adaptive;
    bool deadzone_enabled = false;
    std::optional<double> delta;
    std::optional<double> mu;

    double base_amplitude = 0.0;
    /// Empty means the pendulum natural frequency.
    std::optional<double> base_omega;
    trajectory::Axis base_axis = trajectory::Axis::Y;
    Eigen::Vector3d force = Eigen::Vector3d::Zero();

    TrajectorySpec trajectory;
    Eigen::Vector2d payload_offset = Eigen::Vector2d::Zero();

    std::optional<double> metrics_t_start;
    std::optional<double> metrics_t_end;

    /// Cross-field checks. Throws ConfigError with key context.
    void validate(const std::string &source = "<config>") const;
};

ScenarioConfig parse_scenario(std::istream &is, const std::string &source,
                              const std::filesystem::path &base_dir);
ScenarioConfig load_scenario(const std::filesystem::path &path);

/// Builds the simulation pieces (loads waypoint files). Throws ConfigError
/// for unreadable or invalid referenced files.
sim::ClosedLoopSetup build_setup(const ScenarioConfig &cfg);

} // namespace crane::config
