// Payload dynamics of a spherical pendulum hanging from a horizontally moving
// suspension point, in Euler angles and in Cartesian payload coordinates.
//
// Frames: inertial z-axis up, suspension point at height z0 (constant). The
// cable rotation is R = R_x(phi_x) R_y(phi_y), so the payload sits at
//   r_r = L * (-s_y, s_x c_y, -c_x c_y)
// relative to the suspension point.
#pragma once

#include <Eigen/Core>

namespace crane::dynamics {

/// States closer than this to the horizontal-cable or gimbal-lock boundary
/// are rejected.
inline constexpr double kSingularityTol = 1e-9;

/// Physical constants. omega0 is derived from g and L at construction.
class PendulumParams {
public:
    /// Throws std::invalid_argument unless m, L, g are all positive.
    PendulumParams(double m, double L, double g);

    /// Payload used in the lab setup: 4 kg on a 1.255 m cable.
    static PendulumParams lab_default() { return {4.0, 1.255, 9.81}; }

    double m() const { return m_; }
    double L() const { return L_; }
    double g() const { return g_; }
    double omega0() const { return omega0_; }
    double omega0_sq() const { return g_ / L_; }

private:
    double m_;
    double L_;
    double g_;
    double omega0_;
};

struct AngularState {
    double phi_x = 0.0;
    double phi_y = 0.0;
    double dphi_x = 0.0;
    double dphi_y = 0.0;
};

/// Horizontal payload position and velocity in the inertial frame.
struct PayloadState {
    Eigen::Vector2d pos = Eigen::Vector2d::Zero();
    Eigen::Vector2d vel = Eigen::Vector2d::Zero();
};

/// Suspension point (crane tip) motion in the horizontal plane.
struct SuspensionState {
    Eigen::Vector2d pos = Eigen::Vector2d::Zero();
    Eigen::Vector2d vel = Eigen::Vector2d::Zero();
    Eigen::Vector2d acc = Eigen::Vector2d::Zero();
};

struct RelativeKinematics {
    double x_r = 0.0;
    double y_r = 0.0;
    double z_r = 0.0;
    double dx_r = 0.0;
    double dy_r = 0.0;
    double dz_r = 0.0;
    double L_z = 0.0;
    double Omega_z_sq = 0.0;
};

/// External force on the payload, inertial frame [N].
struct DisturbanceForce {
    Eigen::Vector3d F = Eigen::Vector3d::Zero();
};

/// Individual terms of the Cartesian payload model
///   dd(y) = -Omega_z^2 (y - y0) + n_a + n_v + sigma
struct CartesianAccelParts {
    Eigen::Vector2d restoring = Eigen::Vector2d::Zero(); // Omega_z^2 (y0 - y)
    Eigen::Vector2d n_a = Eigen::Vector2d::Zero();       // tip acceleration coupling
    Eigen::Vector2d n_v = Eigen::Vector2d::Zero();       // velocity (centripetal) terms
    Eigen::Vector2d sigma = Eigen::Vector2d::Zero();     // external force

    Eigen::Vector2d total() const { return restoring + n_a + n_v + sigma; }
};

struct CartesianAccels {
    Eigen::Vector2d acc = Eigen::Vector2d::Zero();
    CartesianAccelParts parts;
};

/// Payload position relative to the tip plus the derived cable quantities.
/// Throws CableSingularity when x_r^2 + y_r^2 >= L^2 (within tolerance).
RelativeKinematics relative_kinematics(const PayloadState &p,
                                       const SuspensionState &s,
                                       const PendulumParams &params);

/// Euler angles to Cartesian payload position/velocity, constant cable length.
PayloadState angles_to_cartesian(const AngularState &a,
                                 const SuspensionState &s,
                                 const PendulumParams &params);

/// Inverse of angles_to_cartesian on |phi_x|, |phi_y| < pi/2.
/// Throws JacobianSingularity when c_x c_y^2 falls below kSingularityTol.
AngularState cartesian_to_angles(const PayloadState &p,
                                 const SuspensionState &s,
                                 const PendulumParams &params);

/// Raw Kane equations for the spherical pendulum including cable-rate and
/// vertical tip acceleration terms. tip_acc = (ddx0, ddy0, ddz0), dL = dL/dt.
/// Cable acceleration ddL drops out because the partial velocities are
/// orthogonal to the cable. Returns (ddphi_x, ddphi_y).
Eigen::Vector2d kane_angle_accels(const AngularState &a,
                                  const Eigen::Vector3d &tip_acc, double dL,
                                  const DisturbanceForce &f,
                                  const PendulumParams &params);

/// Angular accelerations for constant cable length and planar tip motion.
Eigen::Vector2d euler_angle_accels(const AngularState &a,
                                   const SuspensionState &s,
                                   const DisturbanceForce &f,
                                   const PendulumParams &params);

/// Cartesian payload acceleration with each model term exposed.
CartesianAccels cartesian_accels(const PayloadState &p,
                                 const SuspensionState &s,
                                 const DisturbanceForce &f,
                                 const PendulumParams &params);

/// Kinetic plus potential energy with the suspension height as zero level.
double total_energy(const PayloadState &p, const SuspensionState &s,
                    const PendulumParams &params);

} // namespace crane::dynamics
