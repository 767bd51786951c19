// Reference trajectories: minimum-jerk waypoint splines, sinusoidal
// acceleration point-to-point moves and the sinusoidal base motion.
#pragma once

#include "crane/reference.hpp"

#include <Eigen/Core>

#include <array>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace crane::trajectory {

struct TrajectorySample {
    double t = 0.0;
    Eigen::Vector2d pos = Eigen::Vector2d::Zero();
    Eigen::Vector2d vel = Eigen::Vector2d::Zero();
    Eigen::Vector2d acc = Eigen::Vector2d::Zero();

    Reference reference() const { return {pos, vel, acc}; }
};

/// Immutable sampler t -> (pos, vel, acc).
class Trajectory {
public:
    virtual ~Trajectory() = default;
    virtual TrajectorySample sample(double t) const = 0;
    /// Time after which the sampler is constant.
    virtual double end_time() const = 0;
};

struct Waypoint {
    double t = 0.0;
    Eigen::Vector2d pos = Eigen::Vector2d::Zero();
};

/// Knot times are relative to the start of motion; the sampler holds the
/// first waypoint for `buffer` seconds before it.
struct WaypointPlan {
    std::vector<Waypoint> waypoints;
    double buffer = 0.0;

    /// Throws std::invalid_argument on < 2 knots, non-increasing times or a
    /// negative buffer.
    void validate() const;
};

/// Piecewise quintic through all knots with zero velocity and acceleration at
/// both ends and continuous derivatives up to fourth order at interior knots,
/// which is the minimizer of the integrated squared jerk.
class MinJerkTrajectory final : public Trajectory {
public:
    explicit MinJerkTrajectory(WaypointPlan plan);

    TrajectorySample sample(double t) const override;
    double end_time() const override;

    /// Integral of |d^3 pos/dt^3|^2 over the motion, per axis summed.
    double jerk_integral() const;

    const WaypointPlan &plan() const { return plan_; }

    /// Coefficients of segment s on axis a in the normalized variable
    /// u = (tau - t_s) / h_s, lowest order first.
    const std::array<double, 6> &coefficients(int axis, int segment) const {
        return coeffs_[axis][segment];
    }

private:
    WaypointPlan plan_;
    std::array<std::vector<std::array<double, 6>>, 2> coeffs_;
};

/// Convenience wrapper returning a shared sampler.
std::shared_ptr<const MinJerkTrajectory> min_jerk_trajectory(WaypointPlan plan);

/// Rest-to-rest move with a single-period sinusoidal acceleration per axis,
///   acc(tau) = 2 pi D / T^2 sin(2 pi tau / T),
/// so the speed is a sin^2 pulse peaking at 2 D / T at mid-motion.
class SinusoidalProfileTrajectory final : public Trajectory {
public:
    /// Throws std::invalid_argument unless T > 0 and buffer >= 0.
    SinusoidalProfileTrajectory(Eigen::Vector2d start, Eigen::Vector2d end,
                                double T, double buffer);

    TrajectorySample sample(double t) const override;
    double end_time() const override { return buffer_ + T_; }

    /// Peak speed 2 |D_i| / T for each axis.
    Eigen::Vector2d peak_speed() const;

private:
    Eigen::Vector2d start_;
    Eigen::Vector2d disp_;
    double T_;
    double buffer_;
};

std::shared_ptr<const SinusoidalProfileTrajectory>
sinusoidal_profile_trajectory(const Eigen::Vector2d &start,
                              const Eigen::Vector2d &end, double T,
                              double buffer);

/// Fixed point at rest.
class ConstantTrajectory final : public Trajectory {
public:
    explicit ConstantTrajectory(Eigen::Vector2d pos) : pos_(std::move(pos)) {}
    TrajectorySample sample(double t) const override { return {t, pos_, {0, 0}, {0, 0}}; }
    double end_time() const override { return 0.0; }

private:
    Eigen::Vector2d pos_;
};

enum class Axis { X = 0, Y = 1 };

/// Base offset a sin(omega t) along one horizontal axis with its exact
/// derivatives.
Reference base_disturbance(double t, double amplitude, double omega, Axis axis);

/// Reads `t x y` lines; `#` starts a comment, blank lines are skipped.
/// Throws std::runtime_error naming the offending line.
WaypointPlan read_waypoints(std::istream &is, double buffer);
WaypointPlan load_waypoints(const std::string &path, double buffer);

} // namespace crane::trajectory
