#pragma once

#include <cstddef>
#include <cstdint>

#include "csrec/linalg.hpp"
#include "csrec/models.hpp"

namespace csrec {

struct NoiseSpec {
    double sigma = 0.0;  // per-measurement standard deviation
    std::uint64_t seed = 0;
};

// f(t) = 4 sin(4 pi t) - sgn(t - 0.3) - sgn(0.72 - t), with sgn(0) = 0.
double heavisine_sample(double t);

// Samples heavisine_sample at t = (i + 0.5) / N. Requires N a power of two.
Vec heavisine(std::size_t n);

// `pieces` polynomial segments of the given degree with distinct random
// breakpoints, coefficients uniform in [-1, 1] over a local coordinate in
// [0, 1), normalized to unit l2 norm.
Vec piecewise_poly(std::size_t n, std::size_t pieces, std::size_t degree, RngStream& rng);

// Best size-K tree projection of an i.i.d. Gaussian coefficient vector.
Vec tree_sparse_random(std::size_t n, std::size_t k, RngStream& rng);

// K distinct blocks of unit-variance Gaussian entries, zero elsewhere.
Vec block_sparse_random(std::size_t block_count, std::size_t block_length, std::size_t k,
                        RngStream& rng);

// Gaussian blocks rescaled so the sorted block norms are exactly
// i^(-s-1/2), i = 1..block_count.
Vec block_compressible_random(std::size_t block_count, std::size_t block_length, double s,
                              RngStream& rng);

// Random signs and positions with sorted magnitudes exactly i^(-1/r),
// where 1/r = s + 1/2.
Vec power_law_random(std::size_t n, double s, RngStream& rng);

// y + n with n i.i.d. Normal(0, sigma^2) drawn from RngStream(spec.seed).
Vec add_noise(const Vec& y, const NoiseSpec& spec);

// ||x - xhat|| / ||x||. Zero signal is an error.
double normalized_rmse(const Vec& x, const Vec& xhat);

// l2 error of the best budget-k model approximation.
double sigma_K_error(const Vec& x, const ModelKind& model, std::size_t k);

// 20 log10(||y_clean|| / (sigma sqrt(M))); +infinity when sigma = 0.
double measurement_snr(const Vec& y_clean, double noise_sigma, std::size_t m);

}  // namespace csrec
