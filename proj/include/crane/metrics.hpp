#pragma once

#include "crane/sim.hpp"

#include <cstddef>
#include <limits>
#include <vector>

namespace crane::metrics {

/// Closed interval [t_start, t_end] of trace time.
struct Window {
    double t_start = -std::numeric_limits<double>::infinity();
    double t_end = std::numeric_limits<double>::infinity();
};

/// MSE = mean(e_x^2 + e_y^2), MAE = mean(|e|) over the window; per-axis
/// variants use the single component.
struct MetricsReport {
    std::size_t samples = 0;
    double mse = 0.0;
    double mae = 0.0;
    double mse_x = 0.0;
    double mse_y = 0.0;
    double mae_x = 0.0;
    double mae_y = 0.0;
    double max_error = 0.0;
};

/// Throws std::invalid_argument when no row falls inside the window.
MetricsReport compute_metrics(const std::vector<sim::TraceRow> &rows, Window window = {});

/// 100 (1 - improved / baseline).
double improvement_percent(double baseline, double improved);

} // namespace crane::metrics
