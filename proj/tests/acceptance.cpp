// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
// criterion fails.

#include "crane/config.hpp"
#include "crane/control.hpp"
#include "crane/dynamics.hpp"
#include "crane/kernel.hpp"
#include "crane/metrics.hpp"
#include "crane/rng.hpp"
#include "crane/scenario.hpp"
#include "crane/sim.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace crane;
using dynamics::PayloadState;
using dynamics::SuspensionState;

namespace {

const std::string kConfigDir = CRANE_CONFIG_DIR;
const dynamics::PendulumParams kLab = dynamics::PendulumParams::lab_default();

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char *f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

sim::PlantState step(const sim::Plant &p, double t, const sim::PlantState &x, double dt,
                     const sim::TipLaw &law) {
    return sim::step_physics(p, t, x, dt, sim::Integrator::Rk4, law);
}

// 1. Euler-angle and Cartesian models give the same payload path.
Outcome model_equivalence() {
    Rng rng(11);
    const sim::Plant euler(kLab, sim::Model::Euler);
    const sim::Plant cart(kLab, sim::Model::Cartesian);
    const double dt = 1e-3;
    double worst = 0.0;
    for (int c = 0; c < 20; ++c) {
        const dynamics::AngularState a{rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3),
                                       rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)};
        const double ax = rng.uniform(0.05, 0.5), ay = rng.uniform(0.05, 0.5);
        const double wx = rng.uniform(0.2, 2.0), wy = rng.uniform(0.2, 2.0);
        const double px = rng.uniform(0.0, 6.3), py = rng.uniform(0.0, 6.3);
        const sim::TipLaw law = [=](double t, const SuspensionState &) {
            return Eigen::Vector2d(ax * std::sin(wx * t + px), ay * std::sin(wy * t + py));
        };
        SuspensionState tip;
        const auto p0 = dynamics::angles_to_cartesian(a, tip, kLab);
        auto xe = euler.initial_state(p0, tip);
        auto xc = cart.initial_state(p0, tip);
        for (int i = 0; i < 10000; ++i) {
            xe = step(euler, i * dt, xe, dt, law);
            xc = step(cart, i * dt, xc, dt, law);
            const double t = (i + 1) * dt;
            worst = std::max(worst, (euler.payload(t, xe).pos - cart.payload(t, xc).pos).norm());
        }
    }
    return {worst < 1e-6, fmt("20 cases, 10 s, max |dy| = %.2e m (< 1e-6)", worst)};
}

// 2. Energy is conserved with the tip at rest.
Outcome energy_drift() {
    Rng rng(12);
    const double dt = 1e-3;
    double worst = 0.0;
    for (auto model : {sim::Model::Euler, sim::Model::Cartesian}) {
        const sim::Plant plant(kLab, model);
        for (int c = 0; c < 5; ++c) {
            const dynamics::AngularState a{rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3),
                                           rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)};
            SuspensionState tip;
            const auto p0 = dynamics::angles_to_cartesian(a, tip, kLab);
            const double E0 = dynamics::total_energy(p0, tip, kLab);
            auto x = plant.initial_state(p0, tip);
            const sim::TipLaw still = [](double, const SuspensionState &) {
                return Eigen::Vector2d::Zero();
            };
            for (int i = 0; i < 10000; ++i) {
                x = step(plant, i * dt, x, dt, still);
            }
            const double E = dynamics::total_energy(plant.payload(10.0, x), tip, kLab);
            worst = std::max(worst, std::abs(E - E0) / std::abs(E0));
        }
    }
    return {worst < 1e-6, fmt("10 s, dt 1e-3, max relative drift %.2e (< 1e-6)", worst)};
}

// 3. Random Fourier features approximate the Gaussian kernel at d^-1/2.
Outcome rff_accuracy() {
    Rng rng(13);
    std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> pairs;
    for (int i = 0; i < 1000; ++i) {
        Eigen::VectorXd x(4), z(4);
        for (int k = 0; k < 4; ++k) {
            x(k) = rng.uniform(-2.0, 2.0);
            z(k) = rng.uniform(-2.0, 2.0);
        }
        pairs.emplace_back(x, z);
    }
    const kernel::GaussianKernel k(1.0, 1);
    auto sup_error = [&](int d, std::uint64_t seed) {
        const auto map = kernel::RffMap::sample(d, 1.0, 4, seed);
        double sup = 0.0;
        for (const auto &[x, z] : pairs) {
            sup = std::max(sup, std::abs(map.approx_kernel(x, z) - k.eval(x, z)));
        }
        return sup;
    };
    const double sup_1e4 = sup_error(10000, 1);

    // Least-squares slope of log(mean sup error) against log d.
    const std::vector<int> ds{100, 1000, 10000};
    std::vector<double> lx, ly;
    for (int d : ds) {
        double mean = 0.0;
        for (std::uint64_t s = 1; s <= 5; ++s) {
            mean += sup_error(d, 100 + s) / 5.0;
        }
        lx.push_back(std::log(static_cast<double>(d)));
        ly.push_back(std::log(mean));
    }
    const double mx = (lx[0] + lx[1] + lx[2]) / 3.0, my = (ly[0] + ly[1] + ly[2]) / 3.0;
    double sxy = 0.0, sxx = 0.0;
    for (int i = 0; i < 3; ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    const double exponent = -sxy / sxx;
    const bool pass = sup_1e4 < 0.05 && exponent >= 0.3 && exponent <= 0.7;
    return {pass, fmt("d=1e4 sup error %.4f (< 0.05), decay exponent %.3f (in [0.3, 0.7])",
                      sup_1e4, exponent)};
}

// 4. The truncated exact feature map reproduces the kernel.
Outcome exact_map() {
    Rng rng(14);
    const kernel::GaussianKernel k(1.0, 1);
    auto unit_ball = [&] {
        Eigen::VectorXd v(4);
        do {
            for (int i = 0; i < 4; ++i) {
                v(i) = rng.uniform(-1.0, 1.0);
            }
        } while (v.norm() > 1.0);
        return v;
    };
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const auto x = unit_ball(), z = unit_ball();
        const double approx = kernel::exact_feature_map_truncated(1.0, x, 20)
                                  .dot(kernel::exact_feature_map_truncated(1.0, z, 20));
        worst = std::max(worst, std::abs(approx - k.eval(x, z)));
    }
    return {worst < 1e-12, fmt("degree 20, |x|,|z| <= 1, max error %.2e (< 1e-12)", worst)};
}

// 5. The feature-space update equals the kernel-integral form.
Outcome kernel_trick() {
    Rng rng(15);
    auto map = std::make_shared<const kernel::RffMap>(kernel::RffMap::sample(200, 1.0, 4, 7));
    const auto lyap = control::LyapunovConfig::make(7.82, 1.118, 0.5);
    double worst = 0.0;
    for (int run = 0; run < 10; ++run) {
        std::optional<control::DeadzoneConfig> dz;
        if (run % 2) {
            dz = control::DeadzoneConfig{0.02, 0.01};
        }
        control::AdaptiveController ctrl(map, 3.0, lyap, dz);
        std::vector<control::KernelSample> history;
        const double dt = 0.01;
        for (int step = 0; step < 50; ++step) {
            control::ErrorState e;
            for (int i = 0; i < 4; ++i) {
                e(i) = rng.uniform(-0.3, 0.3);
            }
            history.push_back({e, ctrl.coefficient(e), dt});
            ctrl.update(e, e, dt);
            const auto oracle = control::kernel_trick_oracle(
                history, e, [&](const Eigen::VectorXd &a, const Eigen::VectorXd &b) {
                    return map->approx_kernel(a, b);
                });
            worst = std::max(worst, (ctrl.h_hat(e) - oracle).cwiseAbs().maxCoeff());
        }
    }
    return {worst < 1e-10, fmt("10 runs x 50 steps, max difference %.2e (< 1e-10)", worst)};
}

// 6. Deadzone gate and its antiderivative.
Outcome deadzone_algebra() {
    const control::DeadzoneConfig dz{0.007, 0.002};
    bool ok = control::deadzone_F(dz, 0.0) == 0.0 && control::deadzone_F(dz, dz.delta) == 0.0 &&
              std::abs(control::deadzone_F(dz, dz.delta + dz.mu) - 0.5) < 1e-12 &&
              control::deadzone_F(dz, dz.delta + 2 * dz.mu) == 1.0 &&
              control::deadzone_F(dz, 1.0) == 1.0 && control::deadzone_G(dz, dz.delta) == 0.0;
    double worst = 0.0;
    const double h = 1e-7;
    for (int i = 1; i < 400; ++i) {
        const double q = 0.02 * i / 400.0;
        if (std::abs(q - dz.delta) < 2 * h || std::abs(q - dz.delta - 2 * dz.mu) < 2 * h) {
            continue;
        }
        const double fd = (control::deadzone_G(dz, q + h) - control::deadzone_G(dz, q - h)) / (2 * h);
        worst = std::max(worst, std::abs(fd - control::deadzone_F(dz, q)));
    }
    // G continuous at the band edges.
    for (double edge : {dz.delta, dz.delta + 2 * dz.mu}) {
        ok = ok && std::abs(control::deadzone_G(dz, edge + 1e-12) -
                            control::deadzone_G(dz, edge - 1e-12)) < 1e-11;
    }
    ok = ok && worst < 1e-6;
    return {ok, fmt("F(delta)=0, F(delta+mu)=0.5, F(delta+2mu)=1, max |G'-F| = %.1e", worst)};
}

std::vector<scenario::VariantResult> run_paired(const std::string &file) {
    const auto cfg = config::load_scenario(kConfigDir + "/" + file);
    return scenario::run_variants(scenario::paired_variants(cfg));
}

// 7. Adaptive compensation in the resonant base-motion scenario.
Outcome adaptive_improvement() {
    const auto r = run_paired("adaptive_sim.cfg");
    const double mse = metrics::improvement_percent(r[0].metrics.mse, r[1].metrics.mse);
    const double mae = metrics::improvement_percent(r[0].metrics.mae, r[1].metrics.mae);
    return {mse >= 50.0 && mae >= 35.0,
            fmt("MSE -%.2f%% (>= 50), MAE -%.2f%% (>= 35)", mse, mae)};
}

// 8. Cartesian controller against the angular baseline on the waypoint plan.
Outcome cartesian_vs_angular() {
    const auto r = run_paired("angular_vs_cartesian.cfg");
    const double ratio = r[1].metrics.mse / r[0].metrics.mse;
    return {ratio <= 0.2, fmt("angular MSE %.3e, Cartesian MSE %.3e, ratio %.2e (<= 0.2)",
                              r[0].metrics.mse, r[1].metrics.mse, ratio)};
}

// 9. Deadzone adaptation keeps the error in the predicted ball.
Outcome deadzone_bound() {
    const auto gains = control::TrackingGains::from_design(2.796, 0.2, 49.0, 14.0);
    const auto lyap = control::LyapunovConfig::make(gains.k_p, gains.k_d, 0.5);
    const int d = 1000;
    auto map = std::make_shared<const kernel::RffMap>(kernel::RffMap::sample(d, 0.5, 4, 21));
    Rng rng(22);
    Eigen::VectorXd alpha(4 * d);
    for (Eigen::Index i = 0; i < alpha.size(); ++i) {
        alpha(i) = 4.0 * rng.normal();
    }
    control::AdaptiveController ctrl(map, 7.0, lyap, control::DeadzoneConfig{0.007, 0.002});
    sim::ErrorSystemSetup es;
    es.k_p = gains.k_p;
    es.k_d = gains.k_d;
    es.h = [&](const Eigen::VectorXd &x) {
        const Eigen::VectorXd psi = map->features(x);
        const Eigen::Map<const Eigen::MatrixXd> a(alpha.data(), 2, psi.size());
        return Eigen::Vector2d(a * psi);
    };
    es.e0 << 0.3, -0.2, 0.0, 0.0;
    es.duration = 60.0;
    es.dt_physics = 1.0 / 1200.0;
    es.dt_control = 1.0 / 30.0;
    es.alpha_true = alpha;
    auto tail_max = [](const std::vector<sim::ErrorTraceRow> &rows) {
        double m = 0.0;
        for (const auto &r : rows) {
            if (r.t >= 40.0) {
                m = std::max(m, r.e.norm());
            }
        }
        return m;
    };
    const double worst = tail_max(sim::simulate_error_dynamics(es, ctrl));
    // Same disturbance with a deadzone that never opens: no adaptation.
    control::AdaptiveController frozen(map, 7.0, lyap, control::DeadzoneConfig{1e9, 1.0});
    const double baseline = tail_max(sim::simulate_error_dynamics(es, frozen));
    const double bound = 1.05 * std::sqrt(0.007 / lyap.k1);
    return {worst <= bound && baseline > bound,
            fmt("max |e| on [40, 60] s: adaptive %.4f, frozen %.4f; bound %.4f", worst, baseline,
                bound)};
}

// 10. The tip loop realizes the designed second-order error response.
Outcome suspension_fidelity() {
    auto cfg = config::load_scenario(kConfigDir + "/adaptive_sim.cfg");
    cfg.adaptive_enabled = false;
    cfg.base_amplitude = 0.0;
    auto setup = config::build_setup(cfg);
    const auto r = sim::run_closed_loop(cfg.sim, setup);
    const double kp = setup.gains.k_p0, kd = setup.gains.k_d0, dt = r.dt_control;
    Eigen::Matrix2d A;
    A << 0.0, 1.0, -kp, -kd;
    const Eigen::Matrix2d Phi = (A * dt).exp();

    // Within each control interval the tip error against the extrapolated
    // setpoint obeys e'' + k_d0 e' + k_p0 e = 0.
    std::vector<double> measured, predicted;
    for (std::size_t k = 0; k + 1 < r.rows.size(); ++k) {
        const auto &a = r.rows[k];
        const auto &b = r.rows[k + 1];
        const Eigen::Vector2d target_next =
            a.tip_cmd + dt * a.tip_cmd_vel + 0.5 * dt * dt * a.tip_cmd_acc;
        for (int i = 0; i < 2; ++i) {
            const Eigen::Vector2d e0(a.tip_pos(i) - a.tip_cmd(i), a.tip_vel(i) - a.tip_cmd_vel(i));
            predicted.push_back((Phi * e0)(0));
            measured.push_back(b.tip_pos(i) - target_next(i));
        }
    }
    double mean = 0.0;
    for (double m : measured) {
        mean += m / measured.size();
    }
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < measured.size(); ++i) {
        ss_res += (measured[i] - predicted[i]) * (measured[i] - predicted[i]);
        ss_tot += (measured[i] - mean) * (measured[i] - mean);
    }
    const double r2 = 1.0 - ss_res / ss_tot;
    return {r2 > 0.999, fmt("R^2 = %.9f over %.0f interval samples (> 0.999)", r2,
                            static_cast<double>(measured.size()))};
}

// 11. Shipped configs reproduce byte-identical traces.
Outcome determinism() {
    bool ok = true;
    int files = 0;
    for (const char *file : {"adaptive_sim.cfg", "adaptive_experiment.cfg", "angular_vs_cartesian.cfg"}) {
        const auto a = run_paired(file);
        const auto b = run_paired(file);
        for (std::size_t i = 0; i < a.size(); ++i) {
            std::ostringstream sa, sb;
            sim::write_trace_csv(sa, a[i].sim.rows);
            sim::write_trace_csv(sb, b[i].sim.rows);
            ok = ok && std::hash<std::string>{}(sa.str()) == std::hash<std::string>{}(sb.str()) &&
                 sa.str() == sb.str();
            ++files;
        }
    }
    return {ok, fmt("%.0f traces from 3 configs hash-identical across reruns", files)};
}

} // namespace

int main() {
    struct Criterion {
        const char *name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {"model equivalence", model_equivalence},
        {"energy conservation", energy_drift},
        {"random feature accuracy", rff_accuracy},
        {"exact feature map", exact_map},
        {"kernel trick equivalence", kernel_trick},
        {"deadzone algebra", deadzone_algebra},
        {"adaptive improvement", adaptive_improvement},
        {"Cartesian vs angular", cartesian_vs_angular},
        {"deadzone error bound", deadzone_bound},
        {"tip loop fidelity", suspension_fidelity},
        {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].run();
        } catch (const std::exception &e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::printf("%s AC%zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name,
                    o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
