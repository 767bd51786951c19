#include "crane/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace crane::metrics {

MetricsReport compute_metrics(const std::vector<sim::TraceRow> &rows, Window window) {
    MetricsReport r;
    for (const auto &row : rows) {
        if (row.t < window.t_start || row.t > window.t_end) {
            continue;
        }
        const double ex = row.e(0), ey = row.e(1);
        const double norm = std::hypot(ex, ey);
        r.mse += ex * ex + ey * ey;
        r.mae += norm;
        r.mse_x += ex * ex;
        r.mse_y += ey * ey;
        r.mae_x += std::abs(ex);
        r.mae_y += std::abs(ey);
        r.max_error = std::max(r.max_error, norm);
        ++r.samples;
    }
    if (r.samples == 0) {
        throw std::invalid_argument("compute_metrics: no samples in window");
    }
    const double n = static_cast<double>(r.samples);
    r.mse /= n;
    r.mae /= n;
    r.mse_x /= n;
    r.mse_y /= n;
    r.mae_x /= n;
    r.mae_y /= n;
    return r;
}

double improvement_percent(double baseline, double improved) {
    if (!(baseline > 0.0)) {
        throw std::invalid_argument("improvement_percent: baseline must be positive");
    }
    return 100.0 * (1.0 - improved / baseline);
}

} // namespace crane::metrics
