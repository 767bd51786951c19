#include "crane/dynamics.hpp"

#include "crane/errors.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace crane::dynamics {

PendulumParams::PendulumParams(double m, double L, double g)
    : m_(m), L_(L), g_(g), omega0_(0.0) {
    if (!(m > 0.0) || !(L > 0.0) || !(g > 0.0)) {
        throw std::invalid_argument(
            "PendulumParams: m, L and g must be positive (m=" +
            std::to_string(m) + ", L=" + std::to_string(L) +
            ", g=" + std::to_string(g) + ")");
    }
    omega0_ = std::sqrt(g / L);
}

RelativeKinematics relative_kinematics(const PayloadState &p,
                                       const SuspensionState &s,
                                       const PendulumParams &params) {
    RelativeKinematics k;
    k.x_r = p.pos.x() - s.pos.x();
    k.y_r = p.pos.y() - s.pos.y();
    k.dx_r = p.vel.x() - s.vel.x();
    k.dy_r = p.vel.y() - s.vel.y();

    const double L = params.L();
    const double Lz_sq = L * L - k.x_r * k.x_r - k.y_r * k.y_r;
    if (!(Lz_sq > kSingularityTol * kSingularityTol)) {
        throw CableSingularity("horizontal offset (" + std::to_string(k.x_r) +
                               ", " + std::to_string(k.y_r) +
                               ") reaches cable length " + std::to_string(L));
    }
    k.L_z = std::sqrt(Lz_sq);
    k.z_r = -k.L_z;
    // From x_r dx_r + y_r dy_r + z_r dz_r = 0.
    k.dz_r = (k.x_r * k.dx_r + k.y_r * k.dy_r) / k.L_z;
    k.Omega_z_sq = params.omega0_sq() * k.L_z / L;
    return k;
}

PayloadState angles_to_cartesian(const AngularState &a,
                                 const SuspensionState &s,
                                 const PendulumParams &params) {
    const double L = params.L();
    const double sx = std::sin(a.phi_x), cx = std::cos(a.phi_x);
    const double sy = std::sin(a.phi_y), cy = std::cos(a.phi_y);

    PayloadState p;
    p.pos = s.pos + Eigen::Vector2d(-sy * L, sx * cy * L);
    // Rows of the Jacobian A.
    p.vel = s.vel + Eigen::Vector2d(-cy * L * a.dphi_y,
                                    cx * cy * L * a.dphi_x - sx * sy * L * a.dphi_y);
    return p;
}

AngularState cartesian_to_angles(const PayloadState &p,
                                 const SuspensionState &s,
                                 const PendulumParams &params) {
    const auto k = relative_kinematics(p, s, params);
    const double L = params.L();

    const double sy = -k.x_r / L;
    const double cy = std::sqrt(L * L - k.x_r * k.x_r) / L;
    // s_x c_y = y_r / L and c_x c_y = L_z / L.
    const double cx = k.L_z / (cy * L);
    if (!(cx * cy * cy > kSingularityTol)) {
        throw JacobianSingularity("c_x c_y^2 = " + std::to_string(cx * cy * cy));
    }
    const double sx = k.y_r / (cy * L);

    AngularState a;
    a.phi_x = std::atan2(k.y_r, k.L_z);
    a.phi_y = std::asin(sy);
    // A^-1 applied to the relative velocity.
    a.dphi_x = -sx * sy / (cx * cy * cy * L) * k.dx_r + k.dy_r / (cx * cy * L);
    a.dphi_y = -k.dx_r / (cy * L);
    return a;
}

Eigen::Vector2d kane_angle_accels(const AngularState &a,
                                  const Eigen::Vector3d &tip_acc, double dL,
                                  const DisturbanceForce &f,
                                  const PendulumParams &params) {
    const double sx = std::sin(a.phi_x), cx = std::cos(a.phi_x);
    const double sy = std::sin(a.phi_y), cy = std::cos(a.phi_y);
    if (std::abs(cy) < kSingularityTol) {
        throw JacobianSingularity("cos(phi_y) = " + std::to_string(cy));
    }
    const double L = params.L();
    const double w0sq = params.omega0_sq();
    const double mL = params.m() * L;
    const double ddx0 = tip_acc.x(), ddy0 = tip_acc.y(), ddz0 = tip_acc.z();
    const double Fx = f.F.x(), Fy = f.F.y(), Fz = f.F.z();

    const double rhs_x = (-cx * ddy0 - sx * ddz0 - 2.0 * dL * cy * a.dphi_x) / L +
                         2.0 * sy * a.dphi_x * a.dphi_y - w0sq * sx +
                         (cx * Fy + sx * Fz) / mL;
    const double rhs_y =
        (cy * ddx0 + sx * sy * ddy0 - cx * sy * ddz0 - 2.0 * dL * a.dphi_y) / L -
        sy * cy * a.dphi_x * a.dphi_x - w0sq * cx * sy +
        (-cy * Fx - sx * sy * Fy + cx * sy * Fz) / mL;

    return {rhs_x / cy, rhs_y};
}

Eigen::Vector2d euler_angle_accels(const AngularState &a,
                                   const SuspensionState &s,
                                   const DisturbanceForce &f,
                                   const PendulumParams &params) {
    return kane_angle_accels(a, Eigen::Vector3d(s.acc.x(), s.acc.y(), 0.0), 0.0,
                             f, params);
}

CartesianAccels cartesian_accels(const PayloadState &p,
                                 const SuspensionState &s,
                                 const DisturbanceForce &f,
                                 const PendulumParams &params) {
    const auto k = relative_kinematics(p, s, params);
    const double L = params.L();
    const double L2 = L * L;
    const double Lz2 = k.L_z * k.L_z;
    const double xr = k.x_r, yr = k.y_r, zr = k.z_r;
    const double dxr = k.dx_r, dyr = k.dy_r;
    const double Lx2 = L2 - xr * xr; // = y_r^2 + z_r^2 > 0 whenever L_z > 0

    CartesianAccels out;
    auto &parts = out.parts;
    parts.restoring = k.Omega_z_sq * (s.pos - p.pos);

    parts.n_a.x() = (xr * xr * s.acc.x() + xr * yr * s.acc.y()) / L2;
    parts.n_a.y() = (yr * yr * s.acc.y() + xr * yr * s.acc.x()) / L2;

    const double dxr2 = dxr * dxr, dyr2 = dyr * dyr;
    const double L2Lz2 = L2 * Lz2;
    parts.n_v.x() = -xr * dxr2 / Lx2 -
                    xr * xr * xr * yr * yr * dxr2 / (L2Lz2 * Lx2) -
                    2.0 * xr * xr * yr * dxr * dyr / L2Lz2 -
                    xr * Lx2 * dyr2 / L2Lz2;
    parts.n_v.y() = -yr * dxr2 / Lx2 -
                    xr * xr * yr * yr * yr * dxr2 / (L2Lz2 * Lx2) -
                    2.0 * xr * yr * yr * dxr * dyr / L2Lz2 -
                    yr * Lx2 * dyr2 / L2Lz2;

    // Tangential projection (I - u u^T) F / m of the external force.
    const double mL2 = params.m() * L2;
    const double Fx = f.F.x(), Fy = f.F.y(), Fz = f.F.z();
    parts.sigma.x() = ((yr * yr + zr * zr) * Fx - xr * yr * Fy - xr * zr * Fz) / mL2;
    parts.sigma.y() = (-xr * yr * Fx + (xr * xr + zr * zr) * Fy - yr * zr * Fz) / mL2;

    out.acc = parts.total();
    return out;
}

double total_energy(const PayloadState &p, const SuspensionState &s,
                    const PendulumParams &params) {
    const auto k = relative_kinematics(p, s, params);
    const double speed_sq = p.vel.squaredNorm() + k.dz_r * k.dz_r;
    return 0.5 * params.m() * speed_sq + params.m() * params.g() * k.z_r;
}

} // namespace crane::dynamics
