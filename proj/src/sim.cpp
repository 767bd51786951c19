#include "crane/sim.hpp"

#include "crane/errors.hpp"
#include "crane/kernel.hpp"
#include "crane/rng.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

namespace crane::sim {

using dynamics::PayloadState;
using dynamics::SuspensionState;

void SimConfig::validate() const {
    if (!(dt_physics > 0.0) || !(dt_control >= dt_physics)) {
        throw std::invalid_argument("SimConfig: need 0 < dt_physics <= dt_control");
    }
    const double ratio = dt_control / dt_physics;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) {
        throw std::invalid_argument("SimConfig: dt_control must be an integer multiple of dt_physics");
    }
    if (!(duration > 0.0)) {
        throw std::invalid_argument("SimConfig: duration must be positive");
    }
    if (!(noise_std >= 0.0)) {
        throw std::invalid_argument("SimConfig: noise_std must be non-negative");
    }
    if (lowpass_hz && !(*lowpass_hz > 0.0)) {
        throw std::invalid_argument("SimConfig: lowpass cutoff must be positive");
    }
}

int SimConfig::substeps() const {
    return static_cast<int>(std::lround(dt_control / dt_physics));
}

int SimConfig::control_steps() const {
    return static_cast<int>(std::lround(duration / dt_control));
}

Reference BaseMotion::at(double t) const {
    return trajectory::base_disturbance(t, amplitude, omega, axis);
}

dynamics::DisturbanceForce ForceDisturbance::at(double t) const {
    return {constant + amplitude * std::sin(omega * t)};
}

SimulationAbort::SimulationAbort(double t, const std::string &what)
    : std::runtime_error("t=" + [t] {
          std::ostringstream ss;
          ss << std::setprecision(6) << t;
          return ss.str();
      }() + " s: " + what),
      t_(t) {}

Plant::Plant(dynamics::PendulumParams params, Model model, BaseMotion base,
             ForceDisturbance force, TipFeedback feedback)
    : params_(params), model_(model), base_(base), force_(force), feedback_(feedback) {}

PlantState Plant::initial_state(const PayloadState &payload_world,
                                const SuspensionState &tip_world) const {
    const Reference b = base_.at(0.0);
    PlantState x;
    if (model_ == Model::Cartesian) {
        x.head<2>() = payload_world.pos;
        x.segment<2>(2) = payload_world.vel;
    } else {
        const auto a = dynamics::cartesian_to_angles(payload_world, tip_world, params_);
        x.head<4>() << a.phi_x, a.phi_y, a.dphi_x, a.dphi_y;
    }
    x.segment<2>(4) = tip_world.pos - b.pos;
    x.segment<2>(6) = tip_world.vel - b.vel;
    return x;
}

SuspensionState Plant::tip_world(double t, const PlantState &x) const {
    const Reference b = base_.at(t);
    SuspensionState s;
    s.pos = x.segment<2>(4) + b.pos;
    s.vel = x.segment<2>(6) + b.vel;
    return s;
}

SuspensionState Plant::tip_measured(double t, const PlantState &x) const {
    if (feedback_ == TipFeedback::World) {
        return tip_world(t, x);
    }
    SuspensionState s;
    s.pos = x.segment<2>(4);
    s.vel = x.segment<2>(6);
    return s;
}

PayloadState Plant::payload(double t, const PlantState &x) const {
    if (model_ == Model::Cartesian) {
        return {x.head<2>(), x.segment<2>(2)};
    }
    const dynamics::AngularState a{x(0), x(1), x(2), x(3)};
    return dynamics::angles_to_cartesian(a, tip_world(t, x), params_);
}

namespace {

struct Evaluated {
    PlantState dx;
    Eigen::Vector2d payload_acc;
};

Evaluated evaluate(const Plant &plant, double t, const PlantState &x,
                   const TipLaw &law, const BaseMotion &base,
                   const ForceDisturbance &force, bool want_cartesian_acc) {
    const Eigen::Vector2d v = law(t, plant.tip_measured(t, x));
    SuspensionState tip = plant.tip_world(t, x);
    tip.acc = v + base.at(t).acc;
    const auto F = force.at(t);

    Evaluated out;
    out.dx.segment<2>(4) = x.segment<2>(6);
    out.dx.segment<2>(6) = v;
    if (plant.model() == Model::Cartesian) {
        const PayloadState p{x.head<2>(), x.segment<2>(2)};
        out.payload_acc = dynamics::cartesian_accels(p, tip, F, plant.params()).acc;
        out.dx.head<2>() = p.vel;
        out.dx.segment<2>(2) = out.payload_acc;
    } else {
        const dynamics::AngularState a{x(0), x(1), x(2), x(3)};
        out.dx.head<2>() = x.segment<2>(2);
        out.dx.segment<2>(2) = dynamics::euler_angle_accels(a, tip, F, plant.params());
        out.payload_acc.setZero();
        if (want_cartesian_acc) {
            const PayloadState p = dynamics::angles_to_cartesian(a, tip, plant.params());
            out.payload_acc = dynamics::cartesian_accels(p, tip, F, plant.params()).acc;
        }
    }
    return out;
}

} // namespace

PlantState Plant::derivative(double t, const PlantState &x, const TipLaw &law) const {
    return evaluate(*this, t, x, law, base_, force_, false).dx;
}

Eigen::Vector2d Plant::payload_acc(double t, const PlantState &x, const TipLaw &law) const {
    return evaluate(*this, t, x, law, base_, force_, true).payload_acc;
}

PlantState step_physics(const Plant &plant, double t, const PlantState &x,
                        double dt, Integrator integrator, const TipLaw &law) {
    PlantState next;
    try {
        if (integrator == Integrator::Euler) {
            next = x + dt * plant.derivative(t, x, law);
        } else {
            const PlantState k1 = plant.derivative(t, x, law);
            const PlantState k2 = plant.derivative(t + 0.5 * dt, x + 0.5 * dt * k1, law);
            const PlantState k3 = plant.derivative(t + 0.5 * dt, x + 0.5 * dt * k2, law);
            const PlantState k4 = plant.derivative(t + dt, x + dt * k3, law);
            next = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
    } catch (const CableSingularity &e) {
        throw SimulationAbort(t, e.what());
    } catch (const JacobianSingularity &e) {
        throw SimulationAbort(t, e.what());
    }
    if (!next.allFinite()) {
        throw SimulationAbort(t, "non-finite plant state");
    }
    return next;
}

namespace {

// Tip loop target between controller updates: constant-acceleration
// extrapolation of the last commanded sample, plus a held feedforward.
struct TipCommand {
    Reference target;
    double t0 = 0.0;
    Eigen::Vector2d offset = Eigen::Vector2d::Zero();
    double k_p = 0.0;
    double k_d = 0.0;

    Eigen::Vector2d operator()(double t, const SuspensionState &tip) const {
        const double tau = t - t0;
        Reference r;
        r.acc = target.acc;
        r.vel = target.vel + tau * target.acc;
        r.pos = target.pos + tau * target.vel + 0.5 * tau * tau * target.acc;
        return offset + control::suspension_control_v(r, tip, k_p, k_d);
    }
};

// Controller-side view of the payload.
class Measurement {
public:
    Measurement(const SimConfig &cfg)
        : noise_std_(cfg.noise_std), dt_(cfg.dt_control), rng_(cfg.noise_seed),
          replica_(cfg.lowpass_hz.has_value()) {
        if (replica_) {
            const double tau = 1.0 / (2.0 * std::numbers::pi * *cfg.lowpass_hz);
            alpha_ = dt_ / (tau + dt_);
        }
    }

    PayloadState operator()(const PayloadState &truth) {
        PayloadState out = truth;
        if (noise_std_ > 0.0) {
            out.pos.x() += noise_std_ * rng_.normal();
            out.pos.y() += noise_std_ * rng_.normal();
        }
        if (!replica_) {
            return out;
        }
        if (!started_) {
            filtered_ = out.pos;
            prev_ = filtered_;
            started_ = true;
        } else {
            filtered_ += alpha_ * (out.pos - filtered_);
        }
        out.pos = filtered_;
        out.vel = (filtered_ - prev_) / dt_;
        prev_ = filtered_;
        return out;
    }

private:
    double noise_std_;
    double dt_;
    Rng rng_;
    bool replica_;
    double alpha_ = 1.0;
    bool started_ = false;
    Eigen::Vector2d filtered_ = Eigen::Vector2d::Zero();
    Eigen::Vector2d prev_ = Eigen::Vector2d::Zero();
};

// Tip setpoint derivatives by backward differences of the setpoint sequence.
class SetpointDifferentiator {
public:
    explicit SetpointDifferentiator(double dt) : dt_(dt) {}

    Reference operator()(const Eigen::Vector2d &pos) {
        Reference r;
        r.pos = pos;
        if (count_ >= 1) {
            r.vel = (pos - prev_pos_) / dt_;
        }
        if (count_ >= 2) {
            r.acc = (r.vel - prev_vel_) / dt_;
        }
        prev_pos_ = pos;
        prev_vel_ = r.vel;
        ++count_;
        return r;
    }

private:
    double dt_;
    int count_ = 0;
    Eigen::Vector2d prev_pos_ = Eigen::Vector2d::Zero();
    Eigen::Vector2d prev_vel_ = Eigen::Vector2d::Zero();
};

void validate_setup(const ClosedLoopSetup &s) {
    if (!s.reference) {
        throw std::invalid_argument("ClosedLoopSetup: missing reference trajectory");
    }
    if (s.adaptive && s.controller != ControllerKind::Cartesian) {
        throw std::invalid_argument("ClosedLoopSetup: adaptive compensation needs the Cartesian controller");
    }
    if (s.controller == ControllerKind::Cartesian && !(s.gains.k_p0 > 0.0 && s.gains.k_d0 > 0.0)) {
        throw std::invalid_argument("ClosedLoopSetup: tip loop gains must be positive");
    }
    if (s.controller == ControllerKind::Angular && !(s.angular.k_pt > 0.0 && s.angular.k_dt > 0.0)) {
        throw std::invalid_argument("ClosedLoopSetup: angular tip gains must be positive");
    }
}

} // namespace

SimResult run_closed_loop(const SimConfig &cfg, const ClosedLoopSetup &setup) {
    cfg.validate();
    validate_setup(setup);

    const auto &params = setup.params;
    const Plant plant(params, cfg.model, setup.base, setup.force, setup.tip_feedback);

    std::optional<control::AdaptiveController> adaptive;
    if (setup.adaptive) {
        const auto &a = *setup.adaptive;
        auto map = std::make_shared<const kernel::RffMap>(kernel::RffMap::sample(
            a.d, a.sigma, control::regressor_dim(a.regressor), cfg.seed));
        adaptive.emplace(map, a.gamma,
                         control::LyapunovConfig::make(setup.gains.k_p, setup.gains.k_d, a.c),
                         a.deadzone, a.regressor);
    }

    // Initial condition: payload at the reference start (plus offset), tip
    // directly above it and at rest in its feedback frame.
    const auto r0 = setup.reference->sample(0.0);
    PayloadState p0{r0.pos + setup.payload_offset, r0.vel};
    SuspensionState tip0;
    tip0.pos = p0.pos + setup.tip_offset;
    tip0.vel = p0.vel;
    if (setup.tip_feedback == TipFeedback::Base) {
        tip0.vel += setup.base.at(0.0).vel;
    }
    PlantState x;
    try {
        x = plant.initial_state(p0, tip0);
    } catch (const std::runtime_error &e) {
        throw SimulationAbort(0.0, e.what());
    }

    Measurement measure(cfg);
    SetpointDifferentiator differentiate(cfg.dt_control);

    SimResult result;
    result.dt_control = cfg.dt_control;
    result.replica = cfg.lowpass_hz.has_value();
    const int steps = cfg.control_steps();
    const int sub = cfg.substeps();
    result.rows.reserve(steps + 1);
    const double abort_norm = 10.0 * params.L();

    for (int k = 0; k <= steps; ++k) {
        const double t = k * cfg.dt_control;
        const PayloadState truth = plant.payload(t, x);
        const PayloadState meas = measure(truth);
        const SuspensionState tip_meas = plant.tip_measured(t, x);
        const auto ref = setup.reference->sample(t).reference();

        TraceRow row;
        row.t = t;
        row.pos_d = ref.pos;
        row.vel_d = ref.vel;
        row.acc_d = ref.acc;
        row.pos = truth.pos;
        row.vel = truth.vel;
        row.e = control::make_error(ref, truth);
        row.e_meas = control::make_error(ref, meas);

        if (!row.e.allFinite() || row.e.head<2>().norm() > abort_norm) {
            throw SimulationAbort(t, "tracking error exceeds 10 L");
        }

        TipCommand cmd;
        cmd.t0 = t;
        try {
            if (setup.controller == ControllerKind::Cartesian) {
                if (adaptive) {
                    const auto xr = control::make_regressor(adaptive->regressor(), row.e_meas, meas);
                    row.u = adaptive->h_hat(xr);
                    row.Q = control::lyapunov_Q(adaptive->lyapunov(), row.e_meas);
                    row.gate = adaptive->update(xr, row.e_meas, cfg.dt_control);
                }
                row.w = control::payload_control_w(ref, meas, setup.gains, row.u);
                const auto kin = dynamics::relative_kinematics(meas, tip_meas, params);
                const Eigen::Vector2d y0d = control::tip_setpoint_from_w(row.w, meas, kin);
                cmd.target = differentiate(y0d);
                cmd.k_p = setup.gains.k_p0;
                cmd.k_d = setup.gains.k_d0;
            } else {
                row.w = control::payload_control_w(ref, meas, setup.gains, row.u);
                const auto angles = dynamics::cartesian_to_angles(meas, tip_meas, params);
                const Eigen::Vector2d v = control::angular_baseline_control(
                    angles, ref, tip_meas, setup.angular, params);
                cmd.target = ref;
                cmd.k_p = setup.angular.k_pt;
                cmd.k_d = setup.angular.k_dt;
                cmd.offset = v - control::suspension_control_v(ref, tip_meas, cmd.k_p, cmd.k_d);
            }
        } catch (const CableSingularity &e) {
            throw SimulationAbort(t, e.what());
        } catch (const JacobianSingularity &e) {
            throw SimulationAbort(t, e.what());
        }

        const TipLaw law = cmd;
        const SuspensionState tip_w = plant.tip_world(t, x);
        row.tip_cmd = cmd.target.pos;
        row.tip_cmd_vel = cmd.target.vel;
        row.tip_cmd_acc = cmd.target.acc;
        row.tip_pos = tip_w.pos;
        row.tip_vel = tip_w.vel;
        row.base = setup.base.at(t).pos;
        row.v = law(t, tip_meas);
        try {
            row.acc = plant.payload_acc(t, x, law);
        } catch (const std::runtime_error &e) {
            throw SimulationAbort(t, e.what());
        }
        result.rows.push_back(row);

        if (k == steps) {
            break;
        }
        for (int i = 0; i < sub; ++i) {
            x = step_physics(plant, t + i * cfg.dt_physics, x, cfg.dt_physics,
                             cfg.integrator, law);
        }
    }

    const auto h = reconstruct_h(result);
    for (std::size_t i = 0; i < h.size(); ++i) {
        result.rows[i].h = h[i];
    }
    if (adaptive) {
        result.alpha_hat = adaptive->alpha_hat();
    }
    return result;
}

std::vector<Eigen::Vector2d> reconstruct_h(const SimResult &result) {
    std::vector<Eigen::Vector2d> h(result.rows.size(), Eigen::Vector2d::Zero());
    for (std::size_t k = 0; k < result.rows.size(); ++k) {
        const auto &r = result.rows[k];
        if (!result.replica) {
            h[k] = r.w - r.acc;
        } else if (k > 0) {
            const auto &prev = result.rows[k - 1];
            const Eigen::Vector2d vel = r.vel_d + r.e_meas.tail<2>();
            const Eigen::Vector2d vel_prev = prev.vel_d + prev.e_meas.tail<2>();
            h[k] = r.w - (vel - vel_prev) / result.dt_control;
        }
    }
    return h;
}

std::string trace_csv_header() {
    return "t,xd,yd,dxd,dyd,ddxd,ddyd,x,y,dx,dy,ddx,ddy,x0_cmd,y0_cmd,dx0_cmd,dy0_cmd,"
           "ddx0_cmd,ddy0_cmd,x0,y0,dx0,dy0,"
           "bx,by,vx,vy,wx,wy,ux,uy,hx,hy,ex,ey,dex,dey,ex_meas,ey_meas,dex_meas,dey_meas,"
           "Q,gate";
}

void write_trace_csv(std::ostream &os, const std::vector<TraceRow> &rows) {
    os << trace_csv_header() << '\n';
    os << std::setprecision(15);
    auto put2 = [&os](const Eigen::Vector2d &v) { os << ',' << v.x() << ',' << v.y(); };
    for (const auto &r : rows) {
        os << r.t;
        put2(r.pos_d);
        put2(r.vel_d);
        put2(r.acc_d);
        put2(r.pos);
        put2(r.vel);
        put2(r.acc);
        put2(r.tip_cmd);
        put2(r.tip_cmd_vel);
        put2(r.tip_cmd_acc);
        put2(r.tip_pos);
        put2(r.tip_vel);
        put2(r.base);
        put2(r.v);
        put2(r.w);
        put2(r.u);
        put2(r.h);
        for (int i = 0; i < 4; ++i) {
            os << ',' << r.e(i);
        }
        for (int i = 0; i < 4; ++i) {
            os << ',' << r.e_meas(i);
        }
        os << ',' << r.Q << ',' << r.gate << '\n';
    }
}

std::vector<ErrorTraceRow> simulate_error_dynamics(const ErrorSystemSetup &setup,
                                                   control::AdaptiveController &ctrl) {
    if (!setup.h) {
        throw std::invalid_argument("simulate_error_dynamics: missing disturbance");
    }
    SimConfig timing;
    timing.dt_physics = setup.dt_physics;
    timing.dt_control = setup.dt_control;
    timing.duration = setup.duration;
    timing.validate();

    const auto &lyap = ctrl.lyapunov();
    const auto regressor = ctrl.regressor();
    auto regress = [&](double t, const control::ErrorState &e) {
        PayloadState p{e.head<2>(), e.tail<2>()};
        if (setup.reference) {
            const auto r = setup.reference->sample(t);
            p.pos += r.pos;
            p.vel += r.vel;
        }
        return control::make_regressor(regressor, e, p);
    };
    auto rhs = [&](double t, const control::ErrorState &e, const Eigen::Vector2d &u) {
        control::ErrorState de;
        de.head<2>() = e.tail<2>();
        de.tail<2>() = -setup.k_p * e.head<2>() - setup.k_d * e.tail<2>() + u - setup.h(regress(t, e));
        return de;
    };

    std::vector<ErrorTraceRow> out;
    const int steps = timing.control_steps();
    const int sub = timing.substeps();
    out.reserve(steps + 1);
    control::ErrorState e = setup.e0;
    for (int k = 0; k <= steps; ++k) {
        const double t = k * setup.dt_control;
        const auto xr = regress(t, e);
        ErrorTraceRow row;
        row.t = t;
        row.e = e;
        row.Q = control::lyapunov_Q(lyap, e);
        row.u = ctrl.h_hat(xr);
        row.h = setup.h(xr);
        const double g = ctrl.deadzone() ? control::deadzone_G(*ctrl.deadzone(), row.Q) : row.Q;
        row.V = g;
        if (setup.alpha_true) {
            row.V += (ctrl.alpha_hat() - *setup.alpha_true).squaredNorm() / (2.0 * ctrl.gamma());
        }
        if (k < steps) {
            row.gate = ctrl.update(xr, e, setup.dt_control);
        }
        out.push_back(row);
        if (k == steps) {
            break;
        }
        const double dt = setup.dt_physics;
        for (int i = 0; i < sub; ++i) {
            const double ti = t + i * dt;
            const auto k1 = rhs(ti, e, row.u);
            const auto k2 = rhs(ti + 0.5 * dt, e + 0.5 * dt * k1, row.u);
            const auto k3 = rhs(ti + 0.5 * dt, e + 0.5 * dt * k2, row.u);
            const auto k4 = rhs(ti + dt, e + dt * k3, row.u);
            e += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        if (!e.allFinite()) {
            throw SimulationAbort(t, "non-finite error state");
        }
    }
    return out;
}

} // namespace crane::sim
