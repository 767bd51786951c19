// Gaussian separable kernel K(x, z) = k_sigma(x, z) I_m and its random
// Fourier feature approximation K(x, z) ~ Psi(x)^T Psi(z).
#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>

namespace crane::kernel {

struct GaussianKernel {
    double sigma = 1.0;
    int m_out = 1;

    GaussianKernel(double sigma, int m_out);

    /// exp(-|x - z|^2 / (2 sigma^2)).
    double eval(const Eigen::VectorXd &x, const Eigen::VectorXd &z) const;
};

/// Sampled frequencies w_1..w_d ~ N(0, sigma^-2 I_n), stored as rows.
///
/// Feature vector layout: psi(x) = d^-1/2 [cos(w_1.x), sin(w_1.x), ...,
/// cos(w_d.x), sin(w_d.x)]. The separable map Psi(x) = psi(x) (x) I_m puts
/// the coefficient for scalar feature j and output i at index j*m + i.
class RffMap {
public:
    RffMap(Eigen::MatrixXd weights, double sigma, std::uint64_t seed);

    /// Deterministic in seed. Throws std::invalid_argument when d < 1,
    /// n < 1 or sigma <= 0.
    static RffMap sample(int d, double sigma, int n, std::uint64_t seed);

    int d() const { return static_cast<int>(weights_.rows()); }
    int n() const { return static_cast<int>(weights_.cols()); }
    double sigma() const { return sigma_; }
    std::uint64_t seed() const { return seed_; }
    const Eigen::MatrixXd &weights() const { return weights_; }

    /// psi(x), length 2d.
    Eigen::VectorXd features(const Eigen::VectorXd &x) const;

    /// Approximate kernel psi(x)^T psi(z).
    double approx_kernel(const Eigen::VectorXd &x,
                         const Eigen::VectorXd &z) const;

    /// Text record: header line, seed, d, n, sigma, then d rows of weights.
    /// Values are written with 17 significant digits so reading restores the
    /// map bit-exactly.
    void write(std::ostream &os) const;
    static RffMap read(std::istream &is);

    bool operator==(const RffMap &other) const;

private:
    Eigen::MatrixXd weights_;
    double sigma_;
    std::uint64_t seed_;
};

/// Explicit Psi(x) = psi(x) (x) I_m as a dense (2dm x m) matrix.
Eigen::MatrixXd kron_features(const Eigen::VectorXd &psi, int m);

/// Truncation of the exact (infinite) Gaussian feature map: one component
///   exp(-|x|^2/2sigma^2) prod_i (x_i/sigma)^k_i / sqrt(k_i!)
/// per multi-index with k_1 + ... + k_n <= degree, graded by total degree.
Eigen::VectorXd exact_feature_map_truncated(double sigma,
                                            const Eigen::VectorXd &x,
                                            int degree);

} // namespace crane::kernel
