#include "csrec/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace csrec {

namespace {

void check_delta(double delta) {
    if (!(delta > 0.0) || delta > 1.0)
        throw std::invalid_argument("bounds: delta must lie in (0, 1]");
}

void check_counts(const BoundInput& in) {
    if (in.n < 1 || in.k < 1) throw std::invalid_argument("bounds: counts must be >= 1");
    if (in.c <= 0.0) throw std::invalid_argument("bounds: c must be positive");
    if (in.t < 0.0) throw std::invalid_argument("bounds: t must be nonnegative");
}

std::size_t ceil_log2(std::size_t n) {
    std::size_t h = 0;
    std::size_t p = 1;
    while (p < n) {
        p *= 2;
        ++h;
    }
    return h;
}

Support sample_support(const ModelKind& model, std::size_t n, std::size_t k,
                       RngStream& rng) {
    if (std::holds_alternative<PlainSparse>(model)) {
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + rng.below(n - i);
            std::swap(idx[i], idx[j]);
        }
        Support s(idx.begin(), idx.begin() + k);
        std::sort(s.begin(), s.end());
        return s;
    }
    if (std::holds_alternative<WaveletTree>(model)) {
        // Uniform frontier growth from the root.
        Support s{0};
        std::vector<std::size_t> frontier;
        std::vector<char> in(n, 0);
        in[0] = 1;
        if (n > 1) frontier.push_back(1);
        while (s.size() < k) {
            const std::size_t pick = rng.below(frontier.size());
            const std::size_t t = frontier[pick];
            frontier[pick] = frontier.back();
            frontier.pop_back();
            in[t] = 1;
            s.push_back(t);
            if (2 * t < n && t >= 1) {
                frontier.push_back(2 * t);
                frontier.push_back(2 * t + 1);
            }
        }
        std::sort(s.begin(), s.end());
        return s;
    }
    const auto& b = std::get<BlockSparse>(model);
    std::vector<std::size_t> blocks(b.block_count);
    for (std::size_t i = 0; i < b.block_count; ++i) blocks[i] = i;
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + rng.below(b.block_count - i);
        std::swap(blocks[i], blocks[j]);
    }
    Support s;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t c = 0; c < b.block_length; ++c)
            s.push_back(blocks[i] * b.block_length + c);
    std::sort(s.begin(), s.end());
    return s;
}

}  // namespace

double log_binomial(std::size_t n, std::size_t k) {
    if (k > n) return -std::numeric_limits<double>::infinity();
    return std::lgamma(static_cast<double>(n) + 1.0) -
           std::lgamma(static_cast<double>(k) + 1.0) -
           std::lgamma(static_cast<double>(n - k) + 1.0);
}

double model_rip_measurements(const BoundInput& in, double log_mk) {
    check_counts(in);
    check_delta(in.delta);
    const double kd = static_cast<double>(in.k);
    const double body = std::log(2.0) + log_mk + kd * std::log(12.0 / in.delta) + in.t;
    return 2.0 / (in.c * in.delta * in.delta) * body;
}

double ramp_measurements(const BoundInput& in,
                         const std::function<double(std::size_t)>& log_rj,
                         std::size_t jmax) {
    check_counts(in);
    if (in.eps < 0.0) throw std::invalid_argument("ramp_measurements: eps must be >= 0");
    if (in.r < 0.0) throw std::invalid_argument("ramp_measurements: r must be >= 0");
    if (jmax < 1) throw std::invalid_argument("ramp_measurements: jmax must be >= 1");
    const double kd = static_cast<double>(in.k);
    const double log_n_over_k =
        std::log(static_cast<double>(in.n)) - std::log(kd);
    double best = 0.0;
    for (std::size_t j = 1; j <= jmax; ++j) {
        const double base =
            std::pow(static_cast<double>(j), in.r) * std::sqrt(1.0 + in.eps) - 1.0;
        if (base <= 0.0)
            throw std::invalid_argument(
                "ramp_measurements: j^r sqrt(1+eps) must exceed 1; increase eps or r");
        const double numer = 2.0 * kd + 4.0 * (log_rj(j) + log_n_over_k) + 2.0 * in.t;
        best = std::max(best, numer / (base * base));
    }
    return best;
}

mpz_class tree_count_exact(std::size_t n, std::size_t k) {
    if (n < 1 || n > 65536 || k > 2048)
        throw std::invalid_argument("tree_count_exact: guard is N <= 65536, K <= 2048");
    if (k == 0) return 1;
    const std::size_t height = std::max<std::size_t>(1, ceil_log2(n));
    // f(h, kk): subtrees of size kk rooted at the root of a perfect tree
    // of height h; f(h, kk) = sum_{a+b=kk-1} f(h-1, a) f(h-1, b). Rows are
    // clamped at the height-h node count, which zeroes impossible sizes.
    std::vector<mpz_class> prev{mpz_class(1)};  // height 0: only the empty subtree
    for (std::size_t h = 1; h <= height; ++h) {
        std::size_t cap = k;
        if (h < 63) cap = std::min(cap, (std::size_t{1} << h) - 1);
        std::vector<mpz_class> row(cap + 1, mpz_class(0));
        row[0] = 1;
        const std::size_t pcap = prev.size() - 1;
        for (std::size_t kk = 1; kk <= cap; ++kk) {
            mpz_class acc = 0;
            const std::size_t lo = kk - 1 > pcap ? kk - 1 - pcap : 0;
            const std::size_t hi = std::min(kk - 1, pcap);
            for (std::size_t a = lo; a <= hi; ++a) acc += prev[a] * prev[kk - 1 - a];
            row[kk] = acc;
        }
        prev = std::move(row);
    }
    return k < prev.size() ? prev[k] : mpz_class(0);
}

double tree_count_bound(std::size_t n, std::size_t k) {
    if (n < 1 || k < 1) throw std::invalid_argument("tree_count_bound: counts must be >= 1");
    const double kd = static_cast<double>(k);
    if (kd < std::log2(static_cast<double>(n)))
        return kd * (1.0 + std::log(2.0)) - std::log(kd + 1.0);
    return (kd + 4.0) * std::log(4.0) - std::log(kd) - 2.0;
}

double tree_residual_count_bound(std::size_t k, std::size_t j) {
    if (k < 1 || j < 1)
        throw std::invalid_argument("tree_residual_count_bound: counts must be >= 1");
    const double kd = static_cast<double>(k);
    const double jd = static_cast<double>(j);
    return kd * (2.0 * jd + 1.0) * (1.0 + std::log(2.0)) -
           std::log(kd * jd + kd + 1.0) - std::log(kd * jd + 1.0);
}

double tree_ramp_measurements(std::size_t n, std::size_t k, double eps, double t) {
    if (n < 1 || k < 1)
        throw std::invalid_argument("tree_ramp_measurements: counts must be >= 1");
    if (eps <= 0.0) throw std::invalid_argument("tree_ramp_measurements: eps must be > 0");
    if (t < 0.0) throw std::invalid_argument("tree_ramp_measurements: t must be >= 0");
    const double kd = static_cast<double>(k);
    const double logterm = std::log(static_cast<double>(n)) -
                           std::log(kd * (kd + 1.0) * (2.0 * kd + 1.0));
    const double denom = std::sqrt(1.0 + eps) - 1.0;
    return 2.0 * (10.0 * kd + 2.0 * logterm + t) / (denom * denom);
}

double block_rip_measurements(std::size_t n_blocks, std::size_t block_length, std::size_t k,
                              double delta, double c, double t) {
    if (n_blocks < 1 || block_length < 1 || k < 1)
        throw std::invalid_argument("block_rip_measurements: counts must be >= 1");
    check_delta(delta);
    if (c <= 0.0) throw std::invalid_argument("block_rip_measurements: c must be positive");
    const double kd = static_cast<double>(k);
    const double jd = static_cast<double>(block_length);
    const double body =
        kd * (std::log(2.0 * static_cast<double>(n_blocks) / kd) +
              jd * std::log(12.0 / delta)) +
        t;
    return 2.0 / (c * delta * delta) * body;
}

EmpiricalRip empirical_rip(const Matrix& phi, const ModelKind& model, std::size_t k,
                           std::size_t trials, RngStream& rng) {
    if (trials < 1) throw std::invalid_argument("empirical_rip: trials must be >= 1");
    const std::size_t n = phi.cols;
    if (k < 1 || k > max_model_budget(model, n))
        throw std::invalid_argument("empirical_rip: K out of range for the model");
    EmpiricalRip out;
    out.extremes.reserve(trials);
    for (std::size_t trial = 0; trial < trials; ++trial) {
        const Support s = sample_support(model, n, k, rng);
        const SvExtremes sv = extreme_singular_values(phi.columns(s));
        out.extremes.push_back(sv);
        out.delta_hat = std::max(
            {out.delta_hat, 1.0 - sv.sigma_min * sv.sigma_min,
             sv.sigma_max * sv.sigma_max - 1.0});
    }
    return out;
}

EmpiricalRamp empirical_ramp(const Matrix& phi, const ModelKind& model, std::size_t k,
                             double r, std::size_t trials, RngStream& rng) {
    if (trials < 1) throw std::invalid_argument("empirical_ramp: trials must be >= 1");
    if (r < 0.0) throw std::invalid_argument("empirical_ramp: r must be >= 0");
    const std::size_t n = phi.cols;
    const std::size_t stages = (max_model_budget(model, n) + k - 1) / k;
    EmpiricalRamp out;
    out.per_scale_max.assign(stages, -std::numeric_limits<double>::infinity());
    for (std::size_t trial = 0; trial < trials; ++trial) {
        Vec x(n);
        for (double& v : x) v = rng.normal();
        const std::vector<Vec> pieces = residual_partition(x, model, k);
        for (std::size_t j = 1; j <= pieces.size(); ++j) {
            const double nu = norm2(pieces[j - 1]);
            if (nu == 0.0) continue;
            const double amplified = norm2(phi.apply(pieces[j - 1]));
            const double ratio = amplified * amplified /
                                     (std::pow(static_cast<double>(j), 2.0 * r) * nu * nu) -
                                 1.0;
            out.per_scale_max[j - 1] = std::max(out.per_scale_max[j - 1], ratio);
        }
    }
    for (double v : out.per_scale_max)
        if (std::isfinite(v)) out.eps_hat = std::max(out.eps_hat, v);
    out.eps_hat = std::max(out.eps_hat, -1.0);
    return out;
}

}  // namespace csrec
