#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "crane/control.hpp"
#include "crane/errors.hpp"
#include "crane/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>

using namespace crane;
using namespace crane::control;
using dynamics::AngularState;
using dynamics::PayloadState;
using dynamics::SuspensionState;

namespace {

const dynamics::PendulumParams kLab = dynamics::PendulumParams::lab_default();

ErrorState random_error(Rng &rng, double amp) {
    ErrorState e;
    for (int i = 0; i < 4; ++i) {
        e(i) = rng.uniform(-amp, amp);
    }
    return e;
}

// Pendulum + tip double integrator under the angular baseline, state
// (phi_x, phi_y, dphi_x, dphi_y, x0, y0, dx0, dy0), tip target at rest at 0.
Eigen::Matrix<double, 8, 1> angular_loop(const Eigen::Matrix<double, 8, 1> &s,
                                         const AngularGains &g, double sign) {
    const AngularState a{s(0), s(1), s(2), s(3)};
    SuspensionState tip;
    tip.pos = s.segment<2>(4);
    tip.vel = s.segment<2>(6);
    const Reference target;
    const Eigen::Vector2d pd = suspension_control_v(target, tip, g.k_pt, g.k_dt);
    const Eigen::Vector2d v = angular_baseline_control(a, target, tip, g, kLab);
    // sign = -1 reverses the injected damping term.
    tip.acc = pd + sign * (v - pd);
    const Eigen::Vector2d dd = dynamics::euler_angle_accels(a, tip, {}, kLab);
    Eigen::Matrix<double, 8, 1> out;
    out << s(2), s(3), dd, s.segment<2>(6), tip.acc;
    return out;
}

Eigen::Matrix<double, 8, 8> linearize(const AngularGains &g, double sign) {
    Eigen::Matrix<double, 8, 8> J;
    const double h = 1e-6;
    for (int i = 0; i < 8; ++i) {
        Eigen::Matrix<double, 8, 1> dp = Eigen::Matrix<double, 8, 1>::Zero();
        dp(i) = h;
        J.col(i) = (angular_loop(dp, g, sign) - angular_loop(-dp, g, sign)) / (2 * h);
    }
    return J;
}

} // namespace

TEST_CASE("tracking gains from the design values") {
    const auto g = TrackingGains::from_design(2.796, 0.2, 49, 14);
    CHECK(g.k_p == 2.796 * 2.796);
    CHECK(g.k_d == 2 * 0.2 * 2.796);
    CHECK(g.k_p == doctest::Approx(7.817).epsilon(1e-4));
    CHECK(g.k_d == doctest::Approx(1.118).epsilon(1e-3));
    CHECK_THROWS_AS(TrackingGains::from_design(0, 0.2, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(TrackingGains::from_design(1, 0.2, 1, -1), std::invalid_argument);
}

TEST_CASE("angular gains from the design values") {
    const auto g = AngularGains::from_design(2.796, 0.2, 0.559, 1.0, kLab.omega0());
    CHECK(g.k_pd == doctest::Approx(0.0).epsilon(1e-3));
    CHECK(g.k_pd >= 0.0);
    CHECK(g.k_dd == doctest::Approx(1.118).epsilon(1e-3));
    CHECK(g.k_pt == doctest::Approx(0.313).epsilon(2e-3));
    CHECK(g.k_dt == doctest::Approx(1.118).epsilon(1e-3));
    // omega_d below omega0 would need negative stiffness.
    CHECK(AngularGains::from_design(2.0, 0.2, 0.4, 1.0, kLab.omega0()).k_pd == 0.0);
}

TEST_CASE("suspension control") {
    SuspensionState tip;
    Reference target;
    CHECK(suspension_control_v(target, tip, 0.313, 1.118).norm() == 0.0);
    tip.pos = {0.1, 0.0};
    const auto v = suspension_control_v(target, tip, 0.313, 1.118);
    CHECK(v.x() == doctest::Approx(-0.0313));
    CHECK(v.y() == 0.0);
    tip.pos.setZero();
    target.acc = {1, 2};
    CHECK((suspension_control_v(target, tip, 0.313, 1.118) - Eigen::Vector2d(1, 2)).norm() == 0.0);
}

TEST_CASE("payload control") {
    const auto g = TrackingGains::from_design(2.796, 0.2, 49, 14);
    PayloadState p;
    Reference target;
    CHECK(payload_control_w(target, p, g, {0, 0}).norm() == 0.0);
    p.pos = {0.1, 0.0};
    auto w = payload_control_w(target, p, g, {0, 0});
    CHECK(w.x() == doctest::Approx(-0.1 * g.k_p));
    CHECK(w.x() == doctest::Approx(-0.7817).epsilon(1e-3));
    const auto wu = payload_control_w(target, p, g, {0.5, -0.5});
    CHECK((wu - w - Eigen::Vector2d(0.5, -0.5)).norm() < 1e-15);
}

TEST_CASE("tip setpoint realizes w through the restoring term") {
    SuspensionState tip;
    PayloadState p;
    auto kin = dynamics::relative_kinematics(p, tip, kLab);
    CHECK((tip_setpoint_from_w({0, 0}, p, kin) - p.pos).norm() == 0.0);
    CHECK((tip_setpoint_from_w({kin.Omega_z_sq, 0}, p, kin) - Eigen::Vector2d(1, 0)).norm() < 1e-15);
    const auto g = TrackingGains::from_design(2.796, 0.2, 49, 14);
    const auto off = tip_setpoint_from_w({-0.1 * g.k_p, 0}, p, kin);
    CHECK(off.x() == doctest::Approx(-0.1 * g.k_p / kLab.omega0_sq()));
    CHECK(off.x() == doctest::Approx(-0.1).epsilon(1e-3));

    // With the tip at the setpoint the Cartesian restoring term equals w.
    Rng rng(1);
    for (int i = 0; i < 100; ++i) {
        PayloadState q{{rng.uniform(-1, 1), rng.uniform(-1, 1)}, {0, 0}};
        SuspensionState t0;
        t0.pos = q.pos + Eigen::Vector2d(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3));
        const auto k = dynamics::relative_kinematics(q, t0, kLab);
        const Eigen::Vector2d w(rng.uniform(-1, 1), rng.uniform(-1, 1));
        SuspensionState t1;
        t1.pos = tip_setpoint_from_w(w, q, k);
        // Restoring term uses the Omega_z of the measurement state.
        CHECK((k.Omega_z_sq * (t1.pos - q.pos) - w).norm() < 1e-12);
    }
    kin.Omega_z_sq = 0.0;
    CHECK_THROWS_AS(tip_setpoint_from_w({0, 0}, p, kin), CableSingularity);
}

TEST_CASE("angular baseline") {
    const auto g = AngularGains::from_design(2.796, 0.2, 0.559, 1.0, kLab.omega0());
    SuspensionState tip;
    CHECK(angular_baseline_control({0, 0, 0, 0}, {}, tip, g, kLab).norm() == 0.0);
    CHECK_THROWS_AS(angular_baseline_control({0, std::acos(0.0), 0, 0}, {}, tip, g, kLab),
                    JacobianSingularity);
}

TEST_CASE("angular damping places the pendulum poles") {
    // Damping-only injection: no tip feedback.
    AngularGains g = AngularGains::from_design(2.796, 0.2, 0.559, 1.0, kLab.omega0());
    g.k_pt = 0.0;
    g.k_dt = 0.0;
    const auto J = linearize(g, 1.0);
    Eigen::EigenSolver<Eigen::Matrix4d> es(J.topLeftCorner<4, 4>());
    for (int i = 0; i < 4; ++i) {
        const std::complex<double> l = es.eigenvalues()(i);
        const double wn = std::abs(l);
        CHECK(wn == doctest::Approx(2.796).epsilon(1e-3));
        CHECK(-l.real() / wn == doctest::Approx(0.2).epsilon(1e-3));
    }

    // Reversing the injected term destabilizes the swing.
    const auto Jr = linearize(g, -1.0);
    Eigen::EigenSolver<Eigen::Matrix4d> er(Jr.topLeftCorner<4, 4>());
    CHECK(er.eigenvalues().real().maxCoeff() > 0.5);
}

TEST_CASE("angular baseline closed loop with tip tracking is Hurwitz") {
    const auto g = AngularGains::from_design(2.796, 0.2, 0.559, 1.0, kLab.omega0());
    Eigen::EigenSolver<Eigen::Matrix<double, 8, 8>> es(linearize(g, 1.0));
    CHECK(es.eigenvalues().real().maxCoeff() < 0.0);
}

TEST_CASE("Lyapunov function") {
    const double kp = 7.817, kd = 1.118, c = 0.5;
    const auto l = LyapunovConfig::make(kp, kd, c);
    CHECK(l.k_c == doctest::Approx(kd - c));
    CHECK(l.P(0, 0) == doctest::Approx(kp + kd * c));
    CHECK(l.P(0, 2) == c);
    CHECK(l.P(2, 2) == 1.0);
    CHECK(l.P(0, 1) == 0.0);
    CHECK((l.P - l.P.transpose()).norm() == 0.0);
    CHECK(l.k1 == doctest::Approx(0.483).epsilon(1e-3));
    CHECK(std::sqrt(0.007 / l.k1) == doctest::Approx(0.12).epsilon(5e-3));
    CHECK(l.k_Q == doctest::Approx(std::min(c * kp, kd - c)).epsilon(1e-12));
    CHECK(l.k_g == doctest::Approx(std::sqrt(1 + c * c)).epsilon(1e-12));

    ErrorState e = ErrorState::Zero();
    CHECK(lyapunov_Q(l, e) == 0.0);
    CHECK(lyapunov_grad_B(l, e).norm() == 0.0);
    e(0) = 1.0;
    CHECK(lyapunov_Q(l, e) == doctest::Approx(0.5 * (kp + kd * c)));
    CHECK(lyapunov_Q(l, e) == doctest::Approx(4.188).epsilon(1e-3));
    CHECK((lyapunov_grad_B(l, e) - Eigen::Vector2d(0.5, 0)).norm() == 0.0);

    Eigen::Matrix4d A = Eigen::Matrix4d::Zero();
    A.topRightCorner<2, 2>().setIdentity();
    A.bottomLeftCorner<2, 2>() = -kp * Eigen::Matrix2d::Identity();
    A.bottomRightCorner<2, 2>() = -kd * Eigen::Matrix2d::Identity();

    Rng rng(8);
    const double h = 1e-6;
    for (int i = 0; i < 1000; ++i) {
        const auto x = random_error(rng, 2.0);
        const double q = lyapunov_Q(l, x);
        const double n2 = x.squaredNorm();
        CHECK(q >= l.k1 * n2 * (1 - 1e-12));
        CHECK(q <= l.k2 * n2 * (1 + 1e-12));

        // Finite-difference gradient, projected on B = [0; I].
        Eigen::Vector4d grad;
        for (int j = 0; j < 4; ++j) {
            ErrorState p = x, m = x;
            p(j) += h;
            m(j) -= h;
            grad(j) = (lyapunov_Q(l, p) - lyapunov_Q(l, m)) / (2 * h);
        }
        CHECK((grad.tail<2>() - lyapunov_grad_B(l, x)).norm() < 1e-6);
        CHECK(lyapunov_grad_B(l, x).norm() <= l.k_g * x.norm() * (1 + 1e-12));
        // Nominal decay.
        CHECK(grad.dot(A * x) <= -l.k_Q * n2 * (1 - 1e-6) + 1e-9);
    }

    CHECK_THROWS_AS(LyapunovConfig::make(kp, kd, kd), std::invalid_argument);
    CHECK_THROWS_AS(LyapunovConfig::make(kp, kd, 0.0), std::invalid_argument);
}

TEST_CASE("deadzone gate") {
    const DeadzoneConfig dz{0.007, 0.002};
    CHECK(deadzone_F(dz, 0.0) == 0.0);
    CHECK(deadzone_F(dz, dz.delta) == 0.0);
    CHECK(deadzone_F(dz, dz.delta + dz.mu) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(deadzone_F(dz, dz.delta + 2 * dz.mu) == 1.0);
    CHECK(deadzone_F(dz, 1.0) == 1.0);
    CHECK(deadzone_G(dz, dz.delta) == 0.0);
    CHECK(deadzone_G(dz, dz.delta + 2 * dz.mu) == doctest::Approx(dz.mu).epsilon(1e-12));

    const double h = 1e-7;
    for (double q = 0.0; q < 0.02; q += 1.37e-4) {
        const double fd = (deadzone_G(dz, q + h) - deadzone_G(dz, q - h)) / (2 * h);
        CHECK(std::abs(fd - deadzone_F(dz, q)) < 1e-6);
    }
    // Continuity at the knots.
    for (double knot : {dz.delta, dz.delta + 2 * dz.mu}) {
        CHECK(std::abs(deadzone_G(dz, knot + 1e-12) - deadzone_G(dz, knot - 1e-12)) < 1e-11);
    }
}

TEST_CASE("regressors") {
    ErrorState e;
    e << 1, 2, 3, 4;
    PayloadState p{{5, 6}, {7, 8}};
    CHECK(make_regressor(Regressor::Error, e, p) == e);
    CHECK(make_regressor(Regressor::State, e, p) == Eigen::Vector4d(5, 6, 7, 8));
    const auto both = make_regressor(Regressor::ErrorAndState, e, p);
    CHECK(both.size() == 8);
    CHECK(both(4) == 5);
}

TEST_CASE("adaptive h_hat") {
    auto map = std::make_shared<const kernel::RffMap>(kernel::RffMap::sample(100, 1.5, 4, 1));
    const auto lyap = LyapunovConfig::make(7.817, 1.118, 0.5);
    AdaptiveController ctrl(map, 9.0, lyap, std::nullopt);
    Rng rng(2);
    const Eigen::VectorXd x0 = random_error(rng, 1.0);
    CHECK(ctrl.h_hat(x0).norm() == 0.0);

    // alpha = Psi(x0) a gives h_hat(x0) = a.
    const Eigen::Vector2d a(0.7, -1.3);
    const Eigen::MatrixXd Psi = kernel::kron_features(map->features(x0), 2);
    ctrl.set_alpha_hat(Psi * a);
    CHECK((ctrl.h_hat(x0) - a).norm() < 1e-12);

    // Output i depends only on the i-strided slice of alpha.
    Eigen::VectorXd alpha = ctrl.alpha_hat();
    const Eigen::Vector2d before = ctrl.h_hat(x0);
    for (Eigen::Index j = 1; j < alpha.size(); j += 2) {
        alpha(j) += rng.uniform(-1, 1);
    }
    ctrl.set_alpha_hat(alpha);
    CHECK(ctrl.h_hat(x0)(0) == before(0));
    CHECK(ctrl.h_hat(x0)(1) != before(1));
    // Runtime form equals the explicit Kronecker product.
    CHECK((ctrl.h_hat(x0) - Psi.transpose() * alpha).norm() < 1e-12);

    CHECK_THROWS_AS(ctrl.set_alpha_hat(Eigen::VectorXd::Zero(3)), DimensionMismatch);
    CHECK_THROWS_AS(ctrl.h_hat(Eigen::VectorXd::Zero(3)), DimensionMismatch);
    CHECK_THROWS_AS(AdaptiveController(map, 0.0, lyap, std::nullopt), std::invalid_argument);
    CHECK_THROWS_AS(AdaptiveController(map, 1.0, lyap, std::nullopt, Regressor::ErrorAndState),
                    DimensionMismatch);
}

TEST_CASE("adaptive update") {
    auto map = std::make_shared<const kernel::RffMap>(kernel::RffMap::sample(30, 1.0, 4, 5));
    const auto lyap = LyapunovConfig::make(7.817, 1.118, 0.5);
    const double gamma = 9.0, dt = 0.01;
    AdaptiveController ctrl(map, gamma, lyap, std::nullopt);
    Rng rng(3);
    const Eigen::VectorXd x = random_error(rng, 1.0);

    CHECK(ctrl.update(x, ErrorState::Zero(), dt) == 1.0);
    CHECK(ctrl.alpha_hat().norm() == 0.0);

    const ErrorState e = random_error(rng, 0.5);
    ctrl.update(x, e, dt);
    const Eigen::Vector2d cvec = 0.5 * e.head<2>() + e.tail<2>();
    const Eigen::VectorXd want = -dt * gamma * kernel::kron_features(map->features(x), 2) * cvec;
    CHECK((ctrl.alpha_hat() - want).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((ctrl.coefficient(e) + gamma * cvec).norm() < 1e-15);
    CHECK_THROWS_AS(ctrl.update(x, e, 0.0), std::invalid_argument);

    // Below the deadzone nothing changes.
    AdaptiveController gated(map, gamma, lyap, DeadzoneConfig{0.007, 0.002});
    ErrorState small = ErrorState::Zero();
    small(0) = 0.01;
    CHECK(lyapunov_Q(lyap, small) < 0.007);
    CHECK(gated.update(x, small, dt) == 0.0);
    CHECK(gated.alpha_hat().norm() == 0.0);
}

TEST_CASE("kernel trick form equals the RFF law") {
    auto map = std::make_shared<const kernel::RffMap>(kernel::RffMap::sample(200, 1.5, 4, 11));
    const auto lyap = LyapunovConfig::make(7.817, 1.118, 0.5);
    const kernel::GaussianKernel exact(1.5, 2);

    CHECK(kernel_trick_oracle({}, Eigen::Vector4d::Zero(), [](auto &, auto &) { return 1.0; })
              .norm() == 0.0);
    KernelSample one{Eigen::Vector4d(0.1, 0.2, 0.3, 0.4), {2.0, -1.0}, 0.01};
    const auto single = kernel_trick_oracle(
        {one}, one.x, [&](const Eigen::VectorXd &a, const Eigen::VectorXd &b) { return exact.eval(a, b); });
    CHECK((single - one.c * one.dt).norm() < 1e-15);

    for (auto dz : {std::optional<DeadzoneConfig>{}, std::optional<DeadzoneConfig>{{0.05, 0.02}}}) {
        AdaptiveController ctrl(map, 9.0, lyap, dz);
        std::vector<KernelSample> history;
        Rng rng(21);
        for (int k = 0; k < 50; ++k) {
            const Eigen::VectorXd x = random_error(rng, 1.0);
            const ErrorState e = random_error(rng, 0.5);
            const double dt = rng.uniform(0.005, 0.02);
            history.push_back({x, ctrl.coefficient(e), dt});
            ctrl.update(x, e, dt);
        }
        auto rff = [&](const Eigen::VectorXd &a, const Eigen::VectorXd &b) {
            return map->approx_kernel(a, b);
        };
        for (int q = 0; q < 20; ++q) {
            const Eigen::VectorXd query = random_error(rng, 1.0);
            CHECK((kernel_trick_oracle(history, query, rff) - ctrl.h_hat(query)).norm() < 1e-10);
        }
    }
}
