#include "csrec/wavelet.hpp"

#include <cmath>
#include <stdexcept>

namespace csrec {

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t log2_exact(std::size_t n) {
    std::size_t levels = 0;
    while (n > 1) {
        n >>= 1;
        ++levels;
    }
    return levels;
}

WaveletFilter validated(std::string name, std::vector<double> taps) {
    constexpr double tol = 1e-10;
    double sum = 0.0;
    for (double h : taps) sum += h;
    if (std::abs(sum - std::sqrt(2.0)) > tol)
        throw std::logic_error("wavelet filter: tap sum is not sqrt(2)");
    for (std::size_t m = 0; 2 * m < taps.size(); ++m) {
        double acc = 0.0;
        for (std::size_t k = 0; k + 2 * m < taps.size(); ++k) acc += taps[k] * taps[k + 2 * m];
        const double want = m == 0 ? 1.0 : 0.0;
        if (std::abs(acc - want) > tol)
            throw std::logic_error("wavelet filter: shifted taps are not orthonormal");
    }
    return WaveletFilter{std::move(name), std::move(taps)};
}

// Mirror highpass g[k] = (-1)^k h[L-1-k].
std::vector<double> highpass_of(const std::vector<double>& h) {
    const std::size_t L = h.size();
    std::vector<double> g(L);
    for (std::size_t k = 0; k < L; ++k) {
        const double s = (k % 2 == 0) ? 1.0 : -1.0;
        g[k] = s * h[L - 1 - k];
    }
    return g;
}

std::size_t checked_levels(std::size_t n, std::size_t levels, const char* op) {
    if (!is_power_of_two(n))
        throw std::invalid_argument(std::string(op) + ": length must be a power of two");
    const std::size_t depth = log2_exact(n);
    if (levels == 0) return depth;
    if (levels > depth)
        throw std::invalid_argument(std::string(op) + ": levels exceed log2 of the length");
    return levels;
}

}  // namespace

WaveletFilter haar() {
    const double r = 1.0 / std::sqrt(2.0);
    return validated("haar", {r, r});
}

WaveletFilter db4() {
    const double s2 = std::sqrt(2.0);
    const double s3 = std::sqrt(3.0);
    return validated("db4", {(1.0 + s3) / (4.0 * s2), (3.0 + s3) / (4.0 * s2),
                             (3.0 - s3) / (4.0 * s2), (1.0 - s3) / (4.0 * s2)});
}

WaveletFilter db6() {
    // Minimum-phase spectral factorization of the degree-3 Daubechies
    // half-band polynomial, correctly rounded to double.
    return validated("db6", {0.33267055295008263, 0.8068915093110925, 0.45987750211849154,
                             -0.13501102001025458, -0.08544127388202666, 0.03522629188570953});
}

WaveletFilter filter_by_name(const std::string& name) {
    if (name == "haar") return haar();
    if (name == "db4") return db4();
    if (name == "db6") return db6();
    throw std::invalid_argument("filter_by_name: unknown filter \"" + name + "\"");
}

Vec dwt(const Vec& x, const WaveletFilter& filter, std::size_t levels) {
    const std::size_t n = x.size();
    levels = checked_levels(n, levels, "dwt");
    const std::vector<double>& h = filter.lowpass;
    const std::vector<double> g = highpass_of(h);
    const std::size_t L = h.size();

    Vec out = x;
    Vec buf(n);
    std::size_t cur = n;
    for (std::size_t level = 0; level < levels; ++level) {
        const std::size_t half = cur / 2;
        for (std::size_t i = 0; i < half; ++i) {
            double a = 0.0;
            double d = 0.0;
            for (std::size_t k = 0; k < L; ++k) {
                const double v = out[(2 * i + k) % cur];
                a += h[k] * v;
                d += g[k] * v;
            }
            buf[i] = a;
            buf[half + i] = d;
        }
        for (std::size_t i = 0; i < cur; ++i) out[i] = buf[i];
        cur = half;
    }
    return out;
}

Vec idwt(const Vec& alpha, const WaveletFilter& filter, std::size_t levels) {
    const std::size_t n = alpha.size();
    levels = checked_levels(n, levels, "idwt");
    const std::vector<double>& h = filter.lowpass;
    const std::vector<double> g = highpass_of(h);
    const std::size_t L = h.size();

    Vec out = alpha;
    Vec buf(n);
    for (std::size_t level = levels; level > 0; --level) {
        const std::size_t cur = n >> (level - 1);
        const std::size_t half = cur / 2;
        for (std::size_t i = 0; i < cur; ++i) buf[i] = 0.0;
        for (std::size_t i = 0; i < half; ++i) {
            const double a = out[i];
            const double d = out[half + i];
            for (std::size_t k = 0; k < L; ++k) {
                buf[(2 * i + k) % cur] += a * h[k] + d * g[k];
            }
        }
        for (std::size_t i = 0; i < cur; ++i) out[i] = buf[i];
    }
    return out;
}

TreeIndex tree_index(std::size_t flat) {
    if (flat == 0) return TreeIndex{0, tree_none, tree_none};
    std::size_t scale = 0;
    while ((std::size_t{2} << scale) <= flat) ++scale;
    return TreeIndex{flat, scale, flat - (std::size_t{1} << scale)};
}

std::size_t flat_index(std::size_t scale, std::size_t offset) {
    if (scale == tree_none)
        throw std::invalid_argument("flat_index: v0 has no scale/offset form");
    if (offset >= (std::size_t{1} << scale))
        throw std::invalid_argument("flat_index: offset out of range for scale");
    return (std::size_t{1} << scale) + offset;
}

std::size_t tree_parent(std::size_t t) {
    if (t == 0) return tree_none;
    return t / 2;  // maps w_{0,0} (t = 1) to v0 (t = 0)
}

std::pair<std::size_t, std::size_t> tree_children(std::size_t t, std::size_t n) {
    if (!is_power_of_two(n))
        throw std::invalid_argument("tree_children: length must be a power of two");
    if (t >= n) throw std::invalid_argument("tree_children: index out of range");
    if (t == 0) return {n >= 2 ? std::size_t{1} : tree_none, tree_none};
    if (2 * t >= n) return {tree_none, tree_none};  // finest scale
    return {2 * t, 2 * t + 1};
}

}  // namespace csrec
