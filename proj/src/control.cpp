#include "crane/control.hpp"

#include "crane/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace crane::control {

using dynamics::kSingularityTol;

TrackingGains TrackingGains::from_design(double omega_c, double zeta_c,
                                         double k_p0, double k_d0) {
    if (!(omega_c > 0.0) || !(zeta_c > 0.0) || !(k_p0 > 0.0) || !(k_d0 > 0.0)) {
        throw std::invalid_argument("TrackingGains: all design values must be positive");
    }
    TrackingGains g;
    g.omega_c = omega_c;
    g.zeta_c = zeta_c;
    g.k_p = omega_c * omega_c;
    g.k_d = 2.0 * zeta_c * omega_c;
    g.k_p0 = k_p0;
    g.k_d0 = k_d0;
    return g;
}

AngularGains AngularGains::from_design(double omega_d, double zeta_d,
                                       double omega_t, double zeta_t,
                                       double omega0) {
    if (!(omega_d > 0.0) || !(zeta_d > 0.0) || !(omega_t > 0.0) || !(zeta_t > 0.0)) {
        throw std::invalid_argument("AngularGains: design values must be positive");
    }
    AngularGains g;
    // omega_d below omega0 would need negative stiffness injection; the
    // tuning tables round omega_d to omega0, which means k_pd = 0.
    g.k_pd = std::max(0.0, omega_d * omega_d - omega0 * omega0);
    g.k_dd = 2.0 * zeta_d * omega_d;
    g.k_pt = omega_t * omega_t;
    g.k_dt = 2.0 * zeta_t * omega_t;
    return g;
}

Eigen::Vector2d suspension_control_v(const Reference &target,
                                     const dynamics::SuspensionState &actual,
                                     double k_p0, double k_d0) {
    return target.acc - k_d0 * (actual.vel - target.vel) -
           k_p0 * (actual.pos - target.pos);
}

Eigen::Vector2d payload_control_w(const Reference &target,
                                  const dynamics::PayloadState &actual,
                                  const TrackingGains &gains,
                                  const Eigen::Vector2d &u) {
    return target.acc - gains.k_d * (actual.vel - target.vel) -
           gains.k_p * (actual.pos - target.pos) + u;
}

Eigen::Vector2d tip_setpoint_from_w(const Eigen::Vector2d &w,
                                    const dynamics::PayloadState &p,
                                    const dynamics::RelativeKinematics &kin) {
    if (!(kin.Omega_z_sq > kSingularityTol)) {
        throw CableSingularity("Omega_z^2 = " + std::to_string(kin.Omega_z_sq));
    }
    return w / kin.Omega_z_sq + p.pos;
}

Eigen::Vector2d angular_baseline_control(const dynamics::AngularState &a,
                                         const Reference &target,
                                         const dynamics::SuspensionState &actual,
                                         const AngularGains &gains,
                                         const dynamics::PendulumParams &params) {
    const double sx = std::sin(a.phi_x), cx = std::cos(a.phi_x);
    const double sy = std::sin(a.phi_y), cy = std::cos(a.phi_y);
    if (std::abs(cy) < kSingularityTol) {
        throw JacobianSingularity("cos(phi_y) = " + std::to_string(cy));
    }
    const double L = params.L();
    Eigen::Vector2d v = suspension_control_v(target, actual, gains.k_pt, gains.k_dt);
    v.x() -= L * (gains.k_pd * sy * cx + gains.k_dd * a.dphi_y);
    v.y() += L * (gains.k_pd * sx + gains.k_dd * a.dphi_x * cy);
    return v;
}

ErrorState make_error(const Reference &target, const dynamics::PayloadState &p) {
    ErrorState e;
    e << p.pos - target.pos, p.vel - target.vel;
    return e;
}

LyapunovConfig LyapunovConfig::make(double k_p, double k_d, double c) {
    if (!(k_p > 0.0) || !(c > 0.0) || !(k_d - c > 0.0)) {
        throw std::invalid_argument(
            "LyapunovConfig: need k_p > 0, c > 0 and k_d - c > 0 (k_d=" +
            std::to_string(k_d) + ", c=" + std::to_string(c) + ")");
    }
    LyapunovConfig l;
    l.k_p = k_p;
    l.k_d = k_d;
    l.c = c;
    l.k_c = k_d - c;

    const Eigen::Matrix2d I = Eigen::Matrix2d::Identity();
    l.P.setZero();
    l.P.topLeftCorner<2, 2>() = (k_p + (l.k_c + c) * c) * I;
    l.P.topRightCorner<2, 2>() = c * I;
    l.P.bottomLeftCorner<2, 2>() = c * I;
    l.P.bottomRightCorner<2, 2>() = I;

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> half_p(0.5 * l.P);
    l.k1 = half_p.eigenvalues().minCoeff();
    l.k2 = half_p.eigenvalues().maxCoeff();

    // Nominal error dynamics de/dt = A e.
    Eigen::Matrix4d A = Eigen::Matrix4d::Zero();
    A.topRightCorner<2, 2>() = I;
    A.bottomLeftCorner<2, 2>() = -k_p * I;
    A.bottomRightCorner<2, 2>() = -k_d * I;
    const Eigen::Matrix4d decay = -0.5 * (l.P * A + A.transpose() * l.P);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> decay_eig(decay);
    l.k_Q = decay_eig.eigenvalues().minCoeff();

    const Eigen::Matrix<double, 2, 4> BtP = l.P.bottomRows<2>();
    Eigen::JacobiSVD<Eigen::Matrix<double, 2, 4>> svd(BtP);
    l.k_g = svd.singularValues()(0);
    return l;
}

double lyapunov_Q(const LyapunovConfig &lyap, const ErrorState &e) {
    return 0.5 * e.dot(lyap.P * e);
}

Eigen::Vector2d lyapunov_grad_B(const LyapunovConfig &lyap, const ErrorState &e) {
    return lyap.c * e.head<2>() + e.tail<2>();
}

double deadzone_F(const DeadzoneConfig &cfg, double q) {
    if (q <= cfg.delta) {
        return 0.0;
    }
    if (q < cfg.delta + 2.0 * cfg.mu) {
        return (q - cfg.delta) / (2.0 * cfg.mu);
    }
    return 1.0;
}

double deadzone_G(const DeadzoneConfig &cfg, double q) {
    if (q <= cfg.delta) {
        return 0.0;
    }
    if (q < cfg.delta + 2.0 * cfg.mu) {
        const double r = q - cfg.delta;
        return r * r / (4.0 * cfg.mu);
    }
    return q - (cfg.delta + cfg.mu);
}

int regressor_dim(Regressor r) {
    switch (r) {
    case Regressor::Error:
    case Regressor::State:
        return 4;
    case Regressor::ErrorAndState:
        return 8;
    }
    return 0;
}

Eigen::VectorXd make_regressor(Regressor r, const ErrorState &e,
                               const dynamics::PayloadState &p) {
    Eigen::VectorXd x(regressor_dim(r));
    switch (r) {
    case Regressor::Error:
        x = e;
        break;
    case Regressor::State:
        x << p.pos, p.vel;
        break;
    case Regressor::ErrorAndState:
        x << e, p.pos, p.vel;
        break;
    }
    return x;
}

AdaptiveController::AdaptiveController(std::shared_ptr<const kernel::RffMap> map,
                                       double gamma, LyapunovConfig lyap,
                                       std::optional<DeadzoneConfig> deadzone,
                                       Regressor regressor)
    : map_(std::move(map)), gamma_(gamma), lyap_(std::move(lyap)),
      deadzone_(deadzone), regressor_(regressor) {
    if (!map_) {
        throw std::invalid_argument("AdaptiveController: null feature map");
    }
    if (!(gamma_ > 0.0)) {
        throw std::invalid_argument("AdaptiveController: gamma must be positive");
    }
    if (deadzone_ && (!(deadzone_->delta > 0.0) || !(deadzone_->mu > 0.0))) {
        throw std::invalid_argument("AdaptiveController: deadzone needs delta, mu > 0");
    }
    if (map_->n() != regressor_dim(regressor_)) {
        throw DimensionMismatch("AdaptiveController regressor", regressor_dim(regressor_),
                                map_->n());
    }
    alpha_hat_ = Eigen::VectorXd::Zero(2 * map_->d() * kOutputs);
}

Eigen::Vector2d AdaptiveController::h_hat(const Eigen::VectorXd &x) const {
    const Eigen::VectorXd psi = map_->features(x);
    // Psi(x)^T alpha with alpha viewed as a (2 x 2d) column-major matrix.
    const Eigen::Map<const Eigen::MatrixXd> alpha(alpha_hat_.data(), kOutputs,
                                                  psi.size());
    return alpha * psi;
}

Eigen::Vector2d AdaptiveController::coefficient(const ErrorState &e) const {
    const double gate =
        deadzone_ ? deadzone_F(*deadzone_, lyapunov_Q(lyap_, e)) : 1.0;
    return -gamma_ * gate * lyapunov_grad_B(lyap_, e);
}

double AdaptiveController::update(const Eigen::VectorXd &x, const ErrorState &e,
                                  double dt) {
    if (!(dt > 0.0)) {
        throw std::invalid_argument("AdaptiveController::update: dt must be positive");
    }
    const double gate =
        deadzone_ ? deadzone_F(*deadzone_, lyapunov_Q(lyap_, e)) : 1.0;
    if (gate == 0.0) {
        return 0.0;
    }
    const Eigen::Vector2d c = -gamma_ * gate * lyapunov_grad_B(lyap_, e);
    const Eigen::VectorXd psi = map_->features(x);
    Eigen::Map<Eigen::MatrixXd> alpha(alpha_hat_.data(), kOutputs, psi.size());
    alpha.noalias() += dt * c * psi.transpose();
    return gate;
}

void AdaptiveController::set_alpha_hat(const Eigen::VectorXd &alpha) {
    if (alpha.size() != alpha_hat_.size()) {
        throw DimensionMismatch("AdaptiveController::set_alpha_hat",
                                alpha_hat_.size(), alpha.size());
    }
    alpha_hat_ = alpha;
}

} // namespace crane::control
