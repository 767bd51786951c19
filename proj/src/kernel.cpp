#include "crane/kernel.hpp"

#include "crane/errors.hpp"
#include "crane/rng.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace crane::kernel {

namespace {
constexpr const char *kRffHeader = "crane-rff-v1";
}

GaussianKernel::GaussianKernel(double sigma_, int m_out_)
    : sigma(sigma_), m_out(m_out_) {
    if (!(sigma > 0.0) || m_out < 1) {
        throw std::invalid_argument("GaussianKernel: need sigma > 0, m_out >= 1");
    }
}

double GaussianKernel::eval(const Eigen::VectorXd &x,
                            const Eigen::VectorXd &z) const {
    if (x.size() != z.size()) {
        throw DimensionMismatch("GaussianKernel::eval", x.size(), z.size());
    }
    return std::exp(-(x - z).squaredNorm() / (2.0 * sigma * sigma));
}

RffMap::RffMap(Eigen::MatrixXd weights, double sigma, std::uint64_t seed)
    : weights_(std::move(weights)), sigma_(sigma), seed_(seed) {
    if (weights_.rows() < 1 || weights_.cols() < 1 || !(sigma_ > 0.0)) {
        throw std::invalid_argument("RffMap: need d >= 1, n >= 1, sigma > 0");
    }
}

RffMap RffMap::sample(int d, double sigma, int n, std::uint64_t seed) {
    if (d < 1 || n < 1 || !(sigma > 0.0)) {
        throw std::invalid_argument("RffMap::sample: need d >= 1, n >= 1, sigma > 0");
    }
    Rng rng(seed);
    Eigen::MatrixXd w(d, n);
    // Row-by-row so the stream order does not depend on storage order.
    for (int j = 0; j < d; ++j) {
        for (int i = 0; i < n; ++i) {
            w(j, i) = rng.normal() / sigma;
        }
    }
    return RffMap(std::move(w), sigma, seed);
}

Eigen::VectorXd RffMap::features(const Eigen::VectorXd &x) const {
    if (x.size() != n()) {
        throw DimensionMismatch("RffMap::features", n(), x.size());
    }
    const Eigen::VectorXd proj = weights_ * x;
    const double scale = 1.0 / std::sqrt(static_cast<double>(d()));
    Eigen::VectorXd psi(2 * d());
    for (int j = 0; j < d(); ++j) {
        psi(2 * j) = scale * std::cos(proj(j));
        psi(2 * j + 1) = scale * std::sin(proj(j));
    }
    return psi;
}

double RffMap::approx_kernel(const Eigen::VectorXd &x,
                             const Eigen::VectorXd &z) const {
    return features(x).dot(features(z));
}

void RffMap::write(std::ostream &os) const {
    os << kRffHeader << '\n'
       << "seed " << seed_ << '\n'
       << "d " << d() << '\n'
       << "n " << n() << '\n'
       << std::setprecision(17) << "sigma " << sigma_ << '\n';
    for (int j = 0; j < d(); ++j) {
        for (int i = 0; i < n(); ++i) {
            os << (i ? " " : "") << weights_(j, i);
        }
        os << '\n';
    }
}

RffMap RffMap::read(std::istream &is) {
    auto fail = [](const std::string &what) {
        return std::runtime_error("RffMap::read: " + what);
    };
    std::string token;
    if (!(is >> token) || token != kRffHeader) {
        throw fail("missing header '" + std::string(kRffHeader) + "'");
    }
    auto expect_key = [&](const char *key) {
        if (!(is >> token) || token != key) {
            throw fail(std::string("expected key '") + key + "'");
        }
    };
    std::uint64_t seed = 0;
    int d = 0, n = 0;
    double sigma = 0.0;
    expect_key("seed");
    is >> seed;
    expect_key("d");
    is >> d;
    expect_key("n");
    is >> n;
    expect_key("sigma");
    is >> sigma;
    if (!is || d < 1 || n < 1) {
        throw fail("bad dimensions");
    }
    Eigen::MatrixXd w(d, n);
    for (int j = 0; j < d; ++j) {
        for (int i = 0; i < n; ++i) {
            if (!(is >> w(j, i))) {
                throw fail("truncated weight table");
            }
        }
    }
    return RffMap(std::move(w), sigma, seed);
}

bool RffMap::operator==(const RffMap &other) const {
    return seed_ == other.seed_ && sigma_ == other.sigma_ &&
           weights_.rows() == other.weights_.rows() &&
           weights_.cols() == other.weights_.cols() &&
           weights_ == other.weights_;
}

Eigen::MatrixXd kron_features(const Eigen::VectorXd &psi, int m) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(psi.size() * m, m);
    for (Eigen::Index j = 0; j < psi.size(); ++j) {
        for (int i = 0; i < m; ++i) {
            out(j * m + i, i) = psi(j);
        }
    }
    return out;
}

namespace {

// Appends all components of total degree exactly `remaining` over
// coordinates [dim, n), given the partial product so far.
void emit_monomials(const Eigen::VectorXd &scaled, int dim, int remaining,
                    double partial, std::vector<double> &out) {
    const int n = static_cast<int>(scaled.size());
    if (dim == n - 1) {
        const double k = remaining;
        out.push_back(partial * std::pow(scaled(dim), k) /
                      std::sqrt(std::tgamma(k + 1.0)));
        return;
    }
    for (int k = remaining; k >= 0; --k) {
        const double factor =
            std::pow(scaled(dim), k) / std::sqrt(std::tgamma(k + 1.0));
        emit_monomials(scaled, dim + 1, remaining - k, partial * factor, out);
    }
}

} // namespace

Eigen::VectorXd exact_feature_map_truncated(double sigma,
                                            const Eigen::VectorXd &x,
                                            int degree) {
    if (!(sigma > 0.0) || degree < 0 || x.size() < 1) {
        throw std::invalid_argument(
            "exact_feature_map_truncated: need sigma > 0, degree >= 0, n >= 1");
    }
    const Eigen::VectorXd scaled = x / sigma;
    const double envelope = std::exp(-x.squaredNorm() / (2.0 * sigma * sigma));
    std::vector<double> comps;
    for (int k = 0; k <= degree; ++k) {
        emit_monomials(scaled, 0, k, envelope, comps);
    }
    return Eigen::Map<Eigen::VectorXd>(comps.data(),
                                       static_cast<Eigen::Index>(comps.size()));
}

} // namespace crane::kernel
