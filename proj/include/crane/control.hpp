// Payload tracking control: partial feedback linearization of the crane tip,
// the Cartesian payload law, an angular damping baseline, and the
// nonparametric (random Fourier feature) adaptive compensation.
#pragma once

#include "crane/dynamics.hpp"
#include "crane/kernel.hpp"
#include "crane/reference.hpp"

#include <Eigen/Core>

#include <memory>
#include <optional>
#include <vector>

namespace crane::control {

using crane::Reference;

/// Gains of the payload loop (k_p = omega_c^2, k_d = 2 zeta_c omega_c) and of
/// the tip loop (k_p0, k_d0).
struct TrackingGains {
    double omega_c = 0.0;
    double zeta_c = 0.0;
    double k_p = 0.0;
    double k_d = 0.0;
    double k_p0 = 0.0;
    double k_d0 = 0.0;

    /// Throws std::invalid_argument on non-positive inputs.
    static TrackingGains from_design(double omega_c, double zeta_c,
                                     double k_p0, double k_d0);
};

/// Gains of the angular baseline: damping injection tuned as
/// omega_d^2 = k_pd + omega0^2, zeta_d = k_dd / (2 omega_d), and the tip
/// tracking loop k_pt = omega_t^2, k_dt = 2 zeta_t omega_t.
struct AngularGains {
    double k_pd = 0.0;
    double k_dd = 0.0;
    double k_pt = 0.0;
    double k_dt = 0.0;

    static AngularGains from_design(double omega_d, double zeta_d,
                                    double omega_t, double zeta_t,
                                    double omega0);
};

/// v = dd(y0d) - k_d0 (dy0 - dy0d) - k_p0 (y0 - y0d).
Eigen::Vector2d suspension_control_v(const Reference &target,
                                     const dynamics::SuspensionState &actual,
                                     double k_p0, double k_d0);

/// w = dd(yd) - k_d de - k_p e + u.
Eigen::Vector2d payload_control_w(const Reference &target,
                                  const dynamics::PayloadState &actual,
                                  const TrackingGains &gains,
                                  const Eigen::Vector2d &u);

/// Tip position y0d = w / Omega_z^2 + y that realizes w through the
/// restoring term. Throws CableSingularity if Omega_z^2 is not positive.
Eigen::Vector2d tip_setpoint_from_w(const Eigen::Vector2d &w,
                                    const dynamics::PayloadState &p,
                                    const dynamics::RelativeKinematics &kin);

/// Tip acceleration command of the angular baseline: tip PD tracking of
/// `target` plus angular damping injection,
///   v_x -= L (k_pd s_y c_x + k_dd dphi_y)
///   v_y += L (k_pd s_x + k_dd dphi_x c_y)
/// which linearizes the pendulum to dd(phi) + k_dd d(phi) + (omega0^2 + k_pd) phi = 0.
Eigen::Vector2d angular_baseline_control(const dynamics::AngularState &a,
                                         const Reference &target,
                                         const dynamics::SuspensionState &actual,
                                         const AngularGains &gains,
                                         const dynamics::PendulumParams &params);

/// Error state e = (e1, e2), e1 = y - yd, e2 = dy - dyd, stacked as
/// (e1x, e1y, e2x, e2y).
using ErrorState = Eigen::Vector4d;

ErrorState make_error(const Reference &target, const dynamics::PayloadState &p);

/// Quadratic Lyapunov function Q(e) = 1/2 e^T P e for the PD error dynamics,
///   P = [(k_p + k_d c) I, c I; c I, I],
/// with its bound constants
///   k1 |e|^2 <= Q <= k2 |e|^2,  dQ/dt <= -k_Q |e|^2,  |B^T grad Q| <= k_g |e|.
struct LyapunovConfig {
    double k_p = 0.0;
    double k_d = 0.0;
    double c = 0.0;
    double k_c = 0.0;
    Eigen::Matrix4d P = Eigen::Matrix4d::Identity();
    double k1 = 0.0;
    double k2 = 0.0;
    double k_Q = 0.0;
    double k_g = 0.0;

    /// Throws std::invalid_argument unless k_p > 0, c > 0 and k_d - c > 0.
    static LyapunovConfig make(double k_p, double k_d, double c);
};

double lyapunov_Q(const LyapunovConfig &lyap, const ErrorState &e);

/// B^T grad Q = c e1 + e2.
Eigen::Vector2d lyapunov_grad_B(const LyapunovConfig &lyap, const ErrorState &e);

struct DeadzoneConfig {
    double delta = 0.0;
    double mu = 0.0;
};

/// Piecewise-linear deadzone/saturation gate in [0, 1].
double deadzone_F(const DeadzoneConfig &cfg, double q);

/// Antiderivative of deadzone_F with G(delta) = 0.
double deadzone_G(const DeadzoneConfig &cfg, double q);

/// Which signals feed the feature map.
enum class Regressor {
    Error,         // (e1, e2) in R^4
    State,         // (x, y, dx, dy) in R^4
    ErrorAndState, // both, R^8
};

int regressor_dim(Regressor r);
Eigen::VectorXd make_regressor(Regressor r, const ErrorState &e,
                               const dynamics::PayloadState &p);

/// RFF form of the nonparametric adaptive law for m = 2 outputs:
///   h_hat(x) = Psi(x)^T alpha_hat
///   d(alpha_hat)/dt = -gamma F(Q(e)) Psi(x) (c e1 + e2)
/// integrated with forward Euler at the controller rate. F == 1 without a
/// deadzone. alpha_hat uses the layout of kernel::RffMap (j*2 + i).
class AdaptiveController {
public:
    static constexpr int kOutputs = 2;

    AdaptiveController(std::shared_ptr<const kernel::RffMap> map, double gamma,
                       LyapunovConfig lyap,
                       std::optional<DeadzoneConfig> deadzone,
                       Regressor regressor = Regressor::Error);

    Eigen::Vector2d h_hat(const Eigen::VectorXd &x) const;

    /// Kernel-integral coefficient c = -gamma F(Q(e)) B^T grad Q(e).
    Eigen::Vector2d coefficient(const ErrorState &e) const;

    /// One Euler step of the update law. Returns the gate value F(Q(e)).
    double update(const Eigen::VectorXd &x, const ErrorState &e, double dt);

    const Eigen::VectorXd &alpha_hat() const { return alpha_hat_; }
    void set_alpha_hat(const Eigen::VectorXd &alpha);

    const kernel::RffMap &map() const { return *map_; }
    double gamma() const { return gamma_; }
    const LyapunovConfig &lyapunov() const { return lyap_; }
    const std::optional<DeadzoneConfig> &deadzone() const { return deadzone_; }
    Regressor regressor() const { return regressor_; }

private:
    std::shared_ptr<const kernel::RffMap> map_;
    Eigen::VectorXd alpha_hat_;
    double gamma_;
    LyapunovConfig lyap_;
    std::optional<DeadzoneConfig> deadzone_;
    Regressor regressor_;
};

/// One step of the adaptation history: regressor x(tau), coefficient c(tau)
/// and the step length.
struct KernelSample {
    Eigen::VectorXd x;
    Eigen::Vector2d c = Eigen::Vector2d::Zero();
    double dt = 0.0;
};

/// Kernel-trick form h_hat(x) = sum_tau k(x, x_tau) c_tau dtau, for any scalar
/// kernel k (the matrix kernel is k I_2). Empty history gives zero.
template <typename ScalarKernel>
Eigen::Vector2d kernel_trick_oracle(const std::vector<KernelSample> &history,
                                    const Eigen::VectorXd &query,
                                    const ScalarKernel &k) {
    Eigen::Vector2d out = Eigen::Vector2d::Zero();
    for (const auto &s : history) {
        out += k(query, s.x) * s.c * s.dt;
    }
    return out;
}

} // namespace crane::control
