#include "crane/trajectory.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace crane::trajectory {

namespace {

// d^r/du^r of u^j at u = 1.
double falling(int j, int r) {
    double out = 1.0;
    for (int i = 0; i < r; ++i) {
        out *= j - i;
    }
    return out;
}

std::vector<std::array<double, 6>> solve_axis(const std::vector<double> &t,
                                              const std::vector<double> &p) {
    const int N = static_cast<int>(t.size()) - 1;
    const int n = 6 * N;
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    auto idx = [](int seg, int k) { return 6 * seg + k; };
    int row = 0;

    for (int s = 0; s < N; ++s) {
        trip.emplace_back(row, idx(s, 0), 1.0);
        rhs(row++) = p[s];
        for (int k = 0; k < 6; ++k) {
            trip.emplace_back(row, idx(s, k), 1.0);
        }
        rhs(row++) = p[s + 1];
    }
    // Rest at both ends.
    trip.emplace_back(row++, idx(0, 1), 1.0);
    trip.emplace_back(row++, idx(0, 2), 1.0);
    for (int r = 1; r <= 2; ++r) {
        for (int k = r; k < 6; ++k) {
            trip.emplace_back(row, idx(N - 1, k), falling(k, r));
        }
        ++row;
    }
    // Derivatives 1..4 continuous at interior knots, scaled by h_s^r.
    for (int s = 1; s < N; ++s) {
        const double ratio = (t[s + 1] - t[s]) / (t[s] - t[s - 1]);
        for (int r = 1; r <= 4; ++r) {
            const double scale = std::pow(ratio, r);
            for (int k = r; k < 6; ++k) {
                trip.emplace_back(row, idx(s - 1, k), falling(k, r) * scale);
            }
            trip.emplace_back(row, idx(s, r), -falling(r, r));
            ++row;
        }
    }

    Eigen::SparseMatrix<double> A(n, n);
    A.setFromTriplets(trip.begin(), trip.end());
    A.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) {
        throw std::runtime_error("min-jerk: spline system is singular");
    }
    const Eigen::VectorXd c = lu.solve(rhs);

    std::vector<std::array<double, 6>> out(N);
    for (int s = 0; s < N; ++s) {
        for (int k = 0; k < 6; ++k) {
            out[s][k] = c(idx(s, k));
        }
    }
    return out;
}

} // namespace

void WaypointPlan::validate() const {
    if (waypoints.size() < 2) {
        throw std::invalid_argument("WaypointPlan: need at least two waypoints");
    }
    if (!(buffer >= 0.0)) {
        throw std::invalid_argument("WaypointPlan: buffer must be non-negative");
    }
    for (std::size_t i = 1; i < waypoints.size(); ++i) {
        if (!(waypoints[i].t > waypoints[i - 1].t)) {
            throw std::invalid_argument("WaypointPlan: knot times must be strictly increasing (knot " +
                                        std::to_string(i) + ")");
        }
    }
}

MinJerkTrajectory::MinJerkTrajectory(WaypointPlan plan) : plan_(std::move(plan)) {
    plan_.validate();
    std::vector<double> t, px, py;
    for (const auto &w : plan_.waypoints) {
        t.push_back(w.t);
        px.push_back(w.pos.x());
        py.push_back(w.pos.y());
    }
    coeffs_[0] = solve_axis(t, px);
    coeffs_[1] = solve_axis(t, py);
}

TrajectorySample MinJerkTrajectory::sample(double t) const {
    const auto &wp = plan_.waypoints;
    const double tau = t - plan_.buffer;
    TrajectorySample out;
    out.t = t;
    if (tau <= wp.front().t) {
        out.pos = wp.front().pos;
        return out;
    }
    if (tau >= wp.back().t) {
        out.pos = wp.back().pos;
        return out;
    }
    const auto it = std::upper_bound(wp.begin(), wp.end(), tau,
                                     [](double v, const Waypoint &w) { return v < w.t; });
    const int s = static_cast<int>(it - wp.begin()) - 1;
    const double h = wp[s + 1].t - wp[s].t;
    const double u = (tau - wp[s].t) / h;
    for (int a = 0; a < 2; ++a) {
        const auto &c = coeffs_[a][s];
        double p = 0.0, v = 0.0, acc = 0.0;
        for (int k = 5; k >= 0; --k) {
            p = p * u + c[k];
        }
        for (int k = 5; k >= 1; --k) {
            v = v * u + k * c[k];
        }
        for (int k = 5; k >= 2; --k) {
            acc = acc * u + k * (k - 1) * c[k];
        }
        out.pos(a) = p;
        out.vel(a) = v / h;
        out.acc(a) = acc / (h * h);
    }
    return out;
}

double MinJerkTrajectory::end_time() const {
    return plan_.buffer + plan_.waypoints.back().t;
}

double MinJerkTrajectory::jerk_integral() const {
    const auto &wp = plan_.waypoints;
    double total = 0.0;
    for (int a = 0; a < 2; ++a) {
        for (std::size_t s = 0; s + 1 < wp.size(); ++s) {
            const double h = wp[s + 1].t - wp[s].t;
            const auto &c = coeffs_[a][s];
            // d^3/du^3 = q0 + q1 u + q2 u^2.
            const double q0 = 6.0 * c[3], q1 = 24.0 * c[4], q2 = 60.0 * c[5];
            const double sq = q0 * q0 + q1 * q1 / 3.0 + q2 * q2 / 5.0 + q0 * q1 +
                              2.0 * q0 * q2 / 3.0 + q1 * q2 / 2.0;
            total += sq / std::pow(h, 5);
        }
    }
    return total;
}

std::shared_ptr<const MinJerkTrajectory> min_jerk_trajectory(WaypointPlan plan) {
    return std::make_shared<const MinJerkTrajectory>(std::move(plan));
}

SinusoidalProfileTrajectory::SinusoidalProfileTrajectory(Eigen::Vector2d start,
                                                         Eigen::Vector2d end,
                                                         double T, double buffer)
    : start_(std::move(start)), disp_(end - start_), T_(T), buffer_(buffer) {
    if (!(T > 0.0) || !(buffer >= 0.0)) {
        throw std::invalid_argument("SinusoidalProfileTrajectory: need T > 0, buffer >= 0");
    }
}

TrajectorySample SinusoidalProfileTrajectory::sample(double t) const {
    TrajectorySample out;
    out.t = t;
    const double tau = t - buffer_;
    if (tau <= 0.0) {
        out.pos = start_;
        return out;
    }
    if (tau >= T_) {
        out.pos = start_ + disp_;
        return out;
    }
    constexpr double two_pi = 2.0 * std::numbers::pi;
    const double phase = two_pi * tau / T_;
    out.pos = start_ + disp_ * (tau / T_ - std::sin(phase) / two_pi);
    out.vel = disp_ * ((1.0 - std::cos(phase)) / T_);
    out.acc = disp_ * (two_pi * std::sin(phase) / (T_ * T_));
    return out;
}

Eigen::Vector2d SinusoidalProfileTrajectory::peak_speed() const {
    return 2.0 * disp_.cwiseAbs() / T_;
}

std::shared_ptr<const SinusoidalProfileTrajectory>
sinusoidal_profile_trajectory(const Eigen::Vector2d &start,
                              const Eigen::Vector2d &end, double T,
                              double buffer) {
    return std::make_shared<const SinusoidalProfileTrajectory>(start, end, T, buffer);
}

Reference base_disturbance(double t, double amplitude, double omega, Axis axis) {
    Reference r;
    const int i = static_cast<int>(axis);
    r.pos(i) = amplitude * std::sin(omega * t);
    r.vel(i) = amplitude * omega * std::cos(omega * t);
    r.acc(i) = -amplitude * omega * omega * std::sin(omega * t);
    return r;
}

WaypointPlan read_waypoints(std::istream &is, double buffer) {
    WaypointPlan plan;
    plan.buffer = buffer;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        std::istringstream ss(line);
        Waypoint w;
        if (!(ss >> w.t)) {
            ss.clear();
            std::string rest;
            if (ss >> rest) {
                throw std::runtime_error("waypoints line " + std::to_string(lineno) +
                                         ": expected 't x y'");
            }
            continue;
        }
        std::string extra;
        if (!(ss >> w.pos.x() >> w.pos.y()) || (ss >> extra)) {
            throw std::runtime_error("waypoints line " + std::to_string(lineno) +
                                     ": expected 't x y'");
        }
        plan.waypoints.push_back(w);
    }
    try {
        plan.validate();
    } catch (const std::invalid_argument &e) {
        throw std::runtime_error(std::string("waypoints: ") + e.what());
    }
    return plan;
}

WaypointPlan load_waypoints(const std::string &path, double buffer) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open waypoint file '" + path + "'");
    }
    return read_waypoints(in, buffer);
}

} // namespace crane::trajectory
