// Fixed-step closed-loop simulation of the crane tip and payload.
//
// The plant state is the payload (Cartesian position/velocity or Euler
// angles/rates) plus the tip position and velocity relative to the crane
// base. The world tip position is tip + base offset. The tip is a double
// integrator driven by an acceleration law evaluated inside the integrator,
// so the inner (tip) loop is continuous while the outer controller runs at
// dt_control with zero-order-held measurements.
#pragma once

#include "crane/control.hpp"
#include "crane/dynamics.hpp"
#include "crane/trajectory.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace crane::sim {

enum class Model { Cartesian, Euler };
enum class Integrator { Rk4, Euler };
enum class ControllerKind { Cartesian, Angular };

/// Frame of the tip position fed back by the tip loop and used by the payload
/// controller: World reads the inertial tip position (encoders referenced to
/// the ground), Base reads it relative to the moving crane base.
enum class TipFeedback { World, Base };

struct SimConfig {
    double dt_physics = 1e-3;
    double dt_control = 1e-2;
    double duration = 60.0;
    Model model = Model::Cartesian;
    Integrator integrator = Integrator::Rk4;
    /// Std of additive payload position noise seen by the controller [m].
    double noise_std = 0.0;
    /// When set, the controller sees low-pass filtered positions and
    /// backward-difference velocities (experiment replica).
    std::optional<double> lowpass_hz;
    /// Feeds feature sampling.
    std::uint64_t seed = 1;
    /// Feeds measurement noise only.
    std::uint64_t noise_seed = 1;

    /// Throws std::invalid_argument unless 0 < dt_physics <= dt_control,
    /// dt_control is an integer multiple of dt_physics and duration > 0.
    void validate() const;
    int substeps() const;
    int control_steps() const;
};

struct BaseMotion {
    double amplitude = 0.0;
    double omega = 0.0;
    trajectory::Axis axis = trajectory::Axis::Y;

    Reference at(double t) const;
};

/// F(t) = constant + amplitude sin(omega t) acting on the payload.
struct ForceDisturbance {
    Eigen::Vector3d constant = Eigen::Vector3d::Zero();
    Eigen::Vector3d amplitude = Eigen::Vector3d::Zero();
    double omega = 0.0;

    dynamics::DisturbanceForce at(double t) const;
};

struct AdaptiveSetup {
    int d = 100;
    double sigma = 1.0;
    double gamma = 1.0;
    double c = 0.5;
    std::optional<control::DeadzoneConfig> deadzone;
    control::Regressor regressor = control::Regressor::Error;
};

struct ClosedLoopSetup {
    dynamics::PendulumParams params = dynamics::PendulumParams::lab_default();
    std::shared_ptr<const trajectory::Trajectory> reference;
    ControllerKind controller = ControllerKind::Cartesian;
    control::TrackingGains gains;
    control::AngularGains angular;
    /// Adaptive compensation on when present (Cartesian controller only).
    std::optional<AdaptiveSetup> adaptive;
    BaseMotion base;
    ForceDisturbance force;
    TipFeedback tip_feedback = TipFeedback::World;
    /// Initial payload offset from the reference start.
    Eigen::Vector2d payload_offset = Eigen::Vector2d::Zero();
    /// Initial tip offset from the point directly above the payload.
    Eigen::Vector2d tip_offset = Eigen::Vector2d::Zero();
};

/// Payload state (Cartesian x, y, dx, dy or Euler phi_x, phi_y, dphi_x,
/// dphi_y), then tip position and velocity relative to the base.
using PlantState = Eigen::Matrix<double, 8, 1>;

/// Tip acceleration law v(t, measured tip).
using TipLaw = std::function<Eigen::Vector2d(double t, const dynamics::SuspensionState &tip)>;

/// Raised when the simulation cannot continue. time() is the simulated time
/// of the failure.
class SimulationAbort : public std::runtime_error {
public:
    SimulationAbort(double t, const std::string &what);
    double time() const { return t_; }

private:
    double t_;
};

class Plant {
public:
    Plant(dynamics::PendulumParams params, Model model, BaseMotion base = {},
          ForceDisturbance force = {}, TipFeedback feedback = TipFeedback::World);

    PlantState initial_state(const dynamics::PayloadState &payload_world,
                             const dynamics::SuspensionState &tip_world) const;

    PlantState derivative(double t, const PlantState &x, const TipLaw &law) const;

    /// World-frame tip position/velocity (acceleration left zero).
    dynamics::SuspensionState tip_world(double t, const PlantState &x) const;
    /// Tip as the feedback sensors see it.
    dynamics::SuspensionState tip_measured(double t, const PlantState &x) const;
    dynamics::PayloadState payload(double t, const PlantState &x) const;
    /// True Cartesian payload acceleration under the given tip law.
    Eigen::Vector2d payload_acc(double t, const PlantState &x, const TipLaw &law) const;

    const dynamics::PendulumParams &params() const { return params_; }
    Model model() const { return model_; }
    const BaseMotion &base() const { return base_; }
    TipFeedback feedback() const { return feedback_; }

private:
    dynamics::PendulumParams params_;
    Model model_;
    BaseMotion base_;
    ForceDisturbance force_;
    TipFeedback feedback_;
};

/// One integrator step. Singularities and non-finite states are rethrown
/// as SimulationAbort carrying t.
PlantState step_physics(const Plant &plant, double t, const PlantState &x,
                        double dt, Integrator integrator, const TipLaw &law);

struct TraceRow {
    double t = 0.0;
    Eigen::Vector2d pos_d = Eigen::Vector2d::Zero();
    Eigen::Vector2d vel_d = Eigen::Vector2d::Zero();
    Eigen::Vector2d acc_d = Eigen::Vector2d::Zero();
    Eigen::Vector2d pos = Eigen::Vector2d::Zero();
    Eigen::Vector2d vel = Eigen::Vector2d::Zero();
    /// True payload acceleration at t under the command issued at t.
    Eigen::Vector2d acc = Eigen::Vector2d::Zero();
    /// Tip setpoint issued at t and its derivatives.
    Eigen::Vector2d tip_cmd = Eigen::Vector2d::Zero();
    Eigen::Vector2d tip_cmd_vel = Eigen::Vector2d::Zero();
    Eigen::Vector2d tip_cmd_acc = Eigen::Vector2d::Zero();
    Eigen::Vector2d tip_pos = Eigen::Vector2d::Zero();
    Eigen::Vector2d tip_vel = Eigen::Vector2d::Zero();
    Eigen::Vector2d base = Eigen::Vector2d::Zero();
    Eigen::Vector2d v = Eigen::Vector2d::Zero();
    Eigen::Vector2d w = Eigen::Vector2d::Zero();
    Eigen::Vector2d u = Eigen::Vector2d::Zero();
    Eigen::Vector2d h = Eigen::Vector2d::Zero();
    /// Tracking error of the plant truth.
    control::ErrorState e = control::ErrorState::Zero();
    /// Tracking error as the controller measured it.
    control::ErrorState e_meas = control::ErrorState::Zero();
    double Q = 0.0;
    double gate = 0.0;
};

struct SimResult {
    std::vector<TraceRow> rows;
    Eigen::VectorXd alpha_hat;
    double dt_control = 0.0;
    /// Controller measurements were filtered (no ground truth on its side).
    bool replica = false;
};

/// Runs the scenario. Throws std::invalid_argument on an invalid setup and
/// SimulationAbort on singularity, NaN or |e| > 10 L.
SimResult run_closed_loop(const SimConfig &cfg, const ClosedLoopSetup &setup);

/// Disturbance seen by the payload loop at each recorded step: the plant
/// truth h = w - dd(y), or in replica mode the residual between w and the
/// backward-difference measured acceleration.
std::vector<Eigen::Vector2d> reconstruct_h(const SimResult &result);

/// Trace CSV with a header row and 15 significant digits.
void write_trace_csv(std::ostream &os, const std::vector<TraceRow> &rows);
std::string trace_csv_header();

/// Error-only closed loop
///   de1/dt = e2,  de2/dt = -k_p e1 - k_d e2 + u - h(x)
/// with u = h_hat(x) held over each control step. The state part of the
/// regressor is reference + e when a reference is given, otherwise e.
struct ErrorSystemSetup {
    double k_p = 0.0;
    double k_d = 0.0;
    std::function<Eigen::Vector2d(const Eigen::VectorXd &x)> h;
    std::shared_ptr<const trajectory::Trajectory> reference;
    control::ErrorState e0 = control::ErrorState::Zero();
    double duration = 10.0;
    double dt_physics = 1e-3;
    double dt_control = 1e-3;
    /// When the disturbance is in-class, h = Psi^T alpha_true, the trace
    /// reports V = G(Q) + |alpha_hat - alpha_true|^2 / (2 gamma).
    std::optional<Eigen::VectorXd> alpha_true;
};

struct ErrorTraceRow {
    double t = 0.0;
    control::ErrorState e = control::ErrorState::Zero();
    double Q = 0.0;
    double V = 0.0;
    double gate = 0.0;
    Eigen::Vector2d u = Eigen::Vector2d::Zero();
    Eigen::Vector2d h = Eigen::Vector2d::Zero();
};

std::vector<ErrorTraceRow> simulate_error_dynamics(const ErrorSystemSetup &setup,
                                                   control::AdaptiveController &ctrl);

} // namespace crane::sim
