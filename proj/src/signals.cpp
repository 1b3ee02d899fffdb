#include "csrec/signals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace csrec {

namespace {

constexpr double kPi = 3.14159265358979323846;

double sgn(double v) {
    if (v > 0.0) return 1.0;
    if (v < 0.0) return -1.0;
    return 0.0;
}

void normalize_unit(Vec& x) {
    const double n = norm2(x);
    if (n == 0.0) return;
    for (double& v : x) v /= n;
}

}  // namespace

double heavisine_sample(double t) {
    return 4.0 * std::sin(4.0 * kPi * t) - sgn(t - 0.3) - sgn(0.72 - t);
}

Vec heavisine(std::size_t n) {
    if (n == 0 || (n & (n - 1)) != 0)
        throw std::invalid_argument("heavisine: length must be a power of two");
    Vec x(n);
    for (std::size_t i = 0; i < n; ++i)
        x[i] = heavisine_sample((static_cast<double>(i) + 0.5) / static_cast<double>(n));
    return x;
}

Vec piecewise_poly(std::size_t n, std::size_t pieces, std::size_t degree, RngStream& rng) {
    if (pieces < 1) throw std::invalid_argument("piecewise_poly: need at least one piece");
    if (pieces > n) throw std::invalid_argument("piecewise_poly: more pieces than samples");
    std::set<std::size_t> cuts;
    while (cuts.size() < pieces - 1) cuts.insert(1 + rng.below(n - 1));
    std::vector<std::size_t> edges{0};
    edges.insert(edges.end(), cuts.begin(), cuts.end());
    edges.push_back(n);

    Vec x(n);
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
        Vec coeff(degree + 1);
        for (double& c : coeff) c = 2.0 * rng.uniform01() - 1.0;
        const std::size_t lo = edges[p];
        const std::size_t len = edges[p + 1] - lo;
        for (std::size_t i = 0; i < len; ++i) {
            const double u = static_cast<double>(i) / static_cast<double>(len);
            double acc = 0.0;
            for (std::size_t d = coeff.size(); d-- > 0;) acc = acc * u + coeff[d];
            x[lo + i] = acc;
        }
    }
    normalize_unit(x);
    return x;
}

Vec tree_sparse_random(std::size_t n, std::size_t k, RngStream& rng) {
    if (k < 1 || k > n) throw std::invalid_argument("tree_sparse_random: K must be in 1..N");
    Vec g(n);
    for (double& v : g) v = rng.normal();
    return cssa_tree_approx(g, k).approximation;
}

Vec block_sparse_random(std::size_t block_count, std::size_t block_length, std::size_t k,
                        RngStream& rng) {
    if (k > block_count)
        throw std::invalid_argument("block_sparse_random: K exceeds the block count");
    std::vector<std::size_t> blocks(block_count);
    for (std::size_t i = 0; i < block_count; ++i) blocks[i] = i;
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + rng.below(block_count - i);
        std::swap(blocks[i], blocks[j]);
    }
    Vec x(block_count * block_length, 0.0);
    for (std::size_t b = 0; b < k; ++b)
        for (std::size_t i = 0; i < block_length; ++i)
            x[blocks[b] * block_length + i] = rng.normal();
    return x;
}

Vec block_compressible_random(std::size_t block_count, std::size_t block_length, double s,
                              RngStream& rng) {
    if (block_count == 0 || block_length == 0)
        throw std::invalid_argument("block_compressible_random: empty geometry");
    Vec x(block_count * block_length);
    for (double& v : x) v = rng.normal();

    std::vector<double> norms(block_count, 0.0);
    for (std::size_t b = 0; b < block_count; ++b) {
        double acc = 0.0;
        for (std::size_t i = 0; i < block_length; ++i) {
            const double v = x[b * block_length + i];
            acc += v * v;
        }
        norms[b] = std::sqrt(acc);
    }
    // Rank blocks by their random norms, then rescale the rank-i block to
    // norm exactly i^(-s-1/2).
    std::vector<std::size_t> order(block_count);
    for (std::size_t i = 0; i < block_count; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&norms](std::size_t a, std::size_t b) {
        if (norms[a] != norms[b]) return norms[a] > norms[b];
        return a < b;
    });
    for (std::size_t rank = 0; rank < block_count; ++rank) {
        const std::size_t b = order[rank];
        const double target = std::pow(static_cast<double>(rank + 1), -s - 0.5);
        const double scale = norms[b] == 0.0 ? 0.0 : target / norms[b];
        for (std::size_t i = 0; i < block_length; ++i) x[b * block_length + i] *= scale;
    }
    return x;
}

Vec power_law_random(std::size_t n, double s, RngStream& rng) {
    if (n == 0) throw std::invalid_argument("power_law_random: empty signal");
    if (s <= 0.0) throw std::invalid_argument("power_law_random: s must be positive");
    std::vector<std::size_t> pos(n);
    for (std::size_t i = 0; i < n; ++i) pos[i] = i;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const std::size_t j = i + rng.below(n - i);
        std::swap(pos[i], pos[j]);
    }
    const double inv_r = s + 0.5;
    Vec x(n, 0.0);
    for (std::size_t rank = 0; rank < n; ++rank) {
        const double mag = std::pow(static_cast<double>(rank + 1), -inv_r);
        x[pos[rank]] = (rng.uniform01() < 0.5 ? -1.0 : 1.0) * mag;
    }
    return x;
}

Vec add_noise(const Vec& y, const NoiseSpec& spec) {
    if (spec.sigma < 0.0) throw std::invalid_argument("add_noise: sigma must be nonnegative");
    if (spec.sigma == 0.0) return y;
    RngStream rng(spec.seed);
    Vec out = y;
    for (double& v : out) v += spec.sigma * rng.normal();
    return out;
}

double normalized_rmse(const Vec& x, const Vec& xhat) {
    if (x.size() != xhat.size()) throw std::invalid_argument("normalized_rmse: size mismatch");
    const double nx = norm2(x);
    if (nx == 0.0) throw std::invalid_argument("normalized_rmse: zero reference signal");
    Vec diff(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) diff[i] = x[i] - xhat[i];
    return norm2(diff) / nx;
}

double sigma_K_error(const Vec& x, const ModelKind& model, std::size_t k) {
    return model_approx(x, model, k).error_l2;
}

double measurement_snr(const Vec& y_clean, double noise_sigma, std::size_t m) {
    if (noise_sigma < 0.0) throw std::invalid_argument("measurement_snr: negative sigma");
    if (noise_sigma == 0.0) return std::numeric_limits<double>::infinity();
    return 20.0 *
           std::log10(norm2(y_clean) / (noise_sigma * std::sqrt(static_cast<double>(m))));
}

}  // namespace csrec
