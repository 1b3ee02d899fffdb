#include "csrec/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>

namespace csrec {

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

ApproxResult restrict_to(const Vec& x, Support support) {
    std::sort(support.begin(), support.end());
    ApproxResult out;
    out.approximation.assign(x.size(), 0.0);
    for (std::size_t i : support) out.approximation[i] = x[i];
    Vec rest = x;
    for (std::size_t i : support) rest[i] = 0.0;
    out.error_l2 = norm2(rest);
    out.support = std::move(support);
    return out;
}

// Magnitude order with the lower index winning ties.
std::vector<std::size_t> magnitude_order(const Vec& x) {
    std::vector<std::size_t> order(x.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&x](std::size_t a, std::size_t b) {
        const double ma = std::abs(x[a]);
        const double mb = std::abs(x[b]);
        if (ma != mb) return ma > mb;
        return a < b;
    });
    return order;
}

std::vector<double> block_sq_norms(const Vec& x, const BlockSparse& model) {
    std::vector<double> sq(model.block_count, 0.0);
    for (std::size_t b = 0; b < model.block_count; ++b) {
        for (std::size_t i = 0; i < model.block_length; ++i) {
            const double v = x[b * model.block_length + i];
            sq[b] += v * v;
        }
    }
    return sq;
}

std::vector<std::size_t> block_order(const std::vector<double>& sq) {
    std::vector<std::size_t> order(sq.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&sq](std::size_t a, std::size_t b) {
        if (sq[a] != sq[b]) return sq[a] > sq[b];
        return a < b;
    });
    return order;
}

Support blocks_to_support(const std::vector<std::size_t>& blocks, std::size_t block_length) {
    Support s;
    s.reserve(blocks.size() * block_length);
    for (std::size_t b : blocks)
        for (std::size_t i = 0; i < block_length; ++i) s.push_back(b * block_length + i);
    std::sort(s.begin(), s.end());
    return s;
}

// Exact subtree knapsack over the coefficient tree rooted at index 0.
// Cells order lexicographically by (forced nodes included, energy), so a
// nonempty forced set is retained whenever a connected superset of the
// requested size exists.
struct Cell {
    std::uint32_t forced = 0;
    double energy = 0.0;
};

bool cell_better(const Cell& a, const Cell& b) {
    if (a.forced != b.forced) return a.forced > b.forced;
    return a.energy > b.energy;
}

Cell cell_plus(const Cell& a, const Cell& b) { return {a.forced + b.forced, a.energy + b.energy}; }

struct TreeDp {
    std::size_t n;
    std::vector<std::vector<Cell>> best;            // best[t][k], k <= min(subtree, cap)
    std::vector<std::vector<std::uint32_t>> pick;   // left-child share at two-child nodes

    TreeDp(const Vec& alpha, std::size_t cap, const std::vector<char>& forced)
        : n(alpha.size()), best(n), pick(n) {
        std::vector<std::size_t> size(n, 1);
        for (std::size_t t = n; t-- > 1;) size[t / 2] += size[t];
        for (std::size_t t = n; t-- > 0;) {
            const Cell self{forced[t] ? 1u : 0u, alpha[t] * alpha[t]};
            const std::size_t kcap = std::min(size[t], cap);
            std::vector<Cell>& row = best[t];
            row.assign(kcap + 1, Cell{});
            if (t == 0 && n > 1) {
                const std::vector<Cell>& a = best[1];
                for (std::size_t k = 1; k <= kcap; ++k) row[k] = cell_plus(self, a[k - 1]);
            } else if (t >= 1 && 2 * t < n) {
                const std::vector<Cell>& a = best[2 * t];
                const std::vector<Cell>& b = best[2 * t + 1];
                std::vector<std::uint32_t>& pk = pick[t];
                pk.assign(kcap + 1, 0);
                for (std::size_t k = 1; k <= kcap; ++k) {
                    const std::size_t j = k - 1;
                    const std::size_t lo = j >= b.size() - 1 ? j - (b.size() - 1) : 0;
                    std::size_t aa = std::min(j, a.size() - 1);
                    Cell top = cell_plus(a[aa], b[j - aa]);
                    std::uint32_t arg = static_cast<std::uint32_t>(aa);
                    while (aa-- > lo) {
                        const Cell cand = cell_plus(a[aa], b[j - aa]);
                        if (cell_better(cand, top)) {
                            top = cand;
                            arg = static_cast<std::uint32_t>(aa);
                        }
                    }
                    row[k] = cell_plus(self, top);
                    pk[k] = arg;
                }
            } else if (kcap >= 1) {
                row[1] = self;
            }
        }
    }

    Support reconstruct(std::size_t k) const {
        Support out;
        std::vector<std::pair<std::size_t, std::size_t>> stack{{std::size_t{0}, k}};
        while (!stack.empty()) {
            const auto [t, kk] = stack.back();
            stack.pop_back();
            if (kk == 0) continue;
            out.push_back(t);
            if (t == 0 && n > 1) {
                stack.emplace_back(1, kk - 1);
            } else if (t >= 1 && 2 * t < n) {
                const std::size_t a = pick[t][kk];
                stack.emplace_back(2 * t, a);
                stack.emplace_back(2 * t + 1, kk - 1 - a);
            }
        }
        std::sort(out.begin(), out.end());
        return out;
    }
};

std::vector<char> no_forced(std::size_t n) { return std::vector<char>(n, 0); }

void check_tree_input(const Vec& alpha, std::size_t k, const char* op) {
    if (!is_power_of_two(alpha.size()))
        throw std::invalid_argument(std::string(op) + ": length must be a power of two");
    if (k < 1 || k > alpha.size())
        throw std::invalid_argument(std::string(op) + ": budget must be in 1..N");
}

}  // namespace

std::string model_name(const ModelKind& model) {
    return std::visit(
        [](const auto& m) -> std::string {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, PlainSparse>) return "plain";
            if constexpr (std::is_same_v<T, WaveletTree>) return "tree";
            if constexpr (std::is_same_v<T, BlockSparse>) return "block";
        },
        model);
}

void validate_model_length(const ModelKind& model, std::size_t n) {
    if (n == 0) throw std::invalid_argument("model: empty signal");
    if (std::holds_alternative<WaveletTree>(model) && !is_power_of_two(n))
        throw std::invalid_argument("model: tree length must be a power of two");
    if (const auto* b = std::get_if<BlockSparse>(&model)) {
        if (b->block_length == 0 || b->block_count == 0)
            throw std::invalid_argument("model: empty block geometry");
        if (b->block_length * b->block_count != n)
            throw std::invalid_argument("model: length must equal block_length * block_count");
    }
}

std::size_t max_model_budget(const ModelKind& model, std::size_t n) {
    validate_model_length(model, n);
    if (const auto* b = std::get_if<BlockSparse>(&model)) return b->block_count;
    return n;
}

bool support_in_model(const Support& support, const ModelKind& model, std::size_t n,
                      std::size_t k) {
    if (!is_valid_support(support, n)) return false;
    if (std::holds_alternative<PlainSparse>(model)) return support.size() <= k;
    if (std::holds_alternative<WaveletTree>(model)) {
        if (support.size() > k) return false;
        std::vector<char> in(n, 0);
        for (std::size_t t : support) in[t] = 1;
        for (std::size_t t : support)
            if (t != 0 && !in[t / 2]) return false;
        return true;
    }
    const auto& b = std::get<BlockSparse>(model);
    std::vector<char> used(b.block_count, 0);
    std::size_t blocks = 0;
    for (std::size_t i : support) {
        const std::size_t bi = i / b.block_length;
        if (!used[bi]) {
            used[bi] = 1;
            ++blocks;
        }
    }
    return blocks <= k;
}

ApproxResult kterm_approx(const Vec& x, std::size_t k) {
    const std::vector<std::size_t> order = magnitude_order(x);
    const std::size_t keep = std::min(k, x.size());
    return restrict_to(x, Support(order.begin(), order.begin() + keep));
}

ApproxResult cssa_tree_approx(const Vec& alpha, std::size_t k) {
    check_tree_input(alpha, k, "cssa_tree_approx");
    const TreeDp dp(alpha, k, no_forced(alpha.size()));
    return restrict_to(alpha, dp.reconstruct(k));
}

ApproxResult brute_force_tree_approx(const Vec& alpha, std::size_t k) {
    check_tree_input(alpha, k, "brute_force_tree_approx");
    if (alpha.size() > 64 || k > 12)
        throw std::invalid_argument("brute_force_tree_approx: guard is N <= 64, K <= 12");
    const std::size_t n = alpha.size();
    // Ascending sequences whose every element has its parent earlier are
    // exactly the connected rooted sets, visited in lexicographic order.
    Support cur{0};
    Support best_support;
    double best_energy = -1.0;
    std::vector<char> in(n, 0);
    in[0] = 1;
    auto energy_of = [&alpha](const Support& s) {
        double e = 0.0;
        for (std::size_t i : s) e += alpha[i] * alpha[i];
        return e;
    };
    auto extend = [&](auto&& self, std::size_t next_min) -> void {
        if (cur.size() == k) {
            const double e = energy_of(cur);
            if (e > best_energy) {
                best_energy = e;
                best_support = cur;
            }
            return;
        }
        for (std::size_t t = next_min; t < n; ++t) {
            if (!in[t / 2]) continue;
            in[t] = 1;
            cur.push_back(t);
            self(self, t + 1);
            cur.pop_back();
            in[t] = 0;
        }
    };
    extend(extend, 1);
    return restrict_to(alpha, std::move(best_support));
}

ApproxResult block_approx(const Vec& x, const BlockSparse& model, std::size_t k) {
    validate_model_length(ModelKind{model}, x.size());
    const std::vector<double> sq = block_sq_norms(x, model);
    const std::vector<std::size_t> order = block_order(sq);
    const std::size_t keep = std::min(k, model.block_count);
    return restrict_to(
        x, blocks_to_support({order.begin(), order.begin() + keep}, model.block_length));
}

ApproxResult model_approx(const Vec& x, const ModelKind& model, std::size_t k) {
    validate_model_length(model, x.size());
    if (std::holds_alternative<PlainSparse>(model)) return kterm_approx(x, k);
    if (std::holds_alternative<WaveletTree>(model)) return cssa_tree_approx(x, k);
    return block_approx(x, std::get<BlockSparse>(model), k);
}

ApproxResult model_approx_B(const Vec& x, const ModelKind& model, std::size_t k,
                            std::size_t b) {
    if (b < 1) throw std::invalid_argument("model_approx_B: B must be at least 1");
    const std::size_t budget = std::min(b * k, max_model_budget(model, x.size()));
    return model_approx(x, model, budget);
}

std::vector<Support> nested_approximations(const Vec& x, const ModelKind& model,
                                           std::size_t k) {
    if (k < 1) throw std::invalid_argument("nested_approximations: K must be at least 1");
    const std::size_t budget = max_model_budget(model, x.size());
    const std::size_t stages = (budget + k - 1) / k;
    std::vector<Support> out;
    out.reserve(stages);

    if (std::holds_alternative<WaveletTree>(model)) {
        std::vector<char> forced = no_forced(x.size());
        Support prev;
        for (std::size_t j = 1; j <= stages; ++j) {
            const std::size_t want = std::min(j * k, budget);
            const TreeDp dp(x, want, forced);
            if (dp.best[0][want].forced != prev.size())
                throw std::logic_error("nested_approximations: forced set not retained");
            Support s = dp.reconstruct(want);
            for (std::size_t t : s) forced[t] = 1;
            prev = s;
            out.push_back(std::move(s));
        }
        return out;
    }

    if (std::holds_alternative<PlainSparse>(model)) {
        const std::vector<std::size_t> order = magnitude_order(x);
        for (std::size_t j = 1; j <= stages; ++j) {
            const std::size_t want = std::min(j * k, budget);
            Support s(order.begin(), order.begin() + want);
            std::sort(s.begin(), s.end());
            out.push_back(std::move(s));
        }
        return out;
    }

    const auto& bs = std::get<BlockSparse>(model);
    const std::vector<std::size_t> order = block_order(block_sq_norms(x, bs));
    for (std::size_t j = 1; j <= stages; ++j) {
        const std::size_t want = std::min(j * k, budget);
        out.push_back(blocks_to_support({order.begin(), order.begin() + want},
                                        bs.block_length));
    }
    return out;
}

std::vector<Vec> residual_partition(const Vec& x, const ModelKind& model, std::size_t k) {
    const std::vector<Support> stages = nested_approximations(x, model, k);
    std::vector<Vec> pieces;
    pieces.reserve(stages.size());
    std::vector<char> taken(x.size(), 0);
    for (const Support& s : stages) {
        Vec piece(x.size(), 0.0);
        for (std::size_t i : s) {
            if (taken[i]) continue;
            taken[i] = 1;
            piece[i] = x[i];
        }
        pieces.push_back(std::move(piece));
    }
    return pieces;
}

Vec model_sigma_profile(const Vec& x, const ModelKind& model) {
    const std::size_t budget = max_model_budget(model, x.size());

    if (std::holds_alternative<WaveletTree>(model)) {
        const TreeDp dp(x, budget, no_forced(x.size()));
        Vec prof(budget, 0.0);
        std::vector<char> in(x.size(), 0);
        for (std::size_t k = 1; k <= budget; ++k) {
            const Support s = dp.reconstruct(k);
            for (std::size_t i : s) in[i] = 1;
            double acc = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i)
                if (!in[i]) acc += x[i] * x[i];
            prof[k - 1] = std::sqrt(acc);
            for (std::size_t i : s) in[i] = 0;
        }
        return prof;
    }

    // Suffix sums of sorted squared weights; no cancellation, exact zeros.
    std::vector<double> sq;
    if (std::holds_alternative<PlainSparse>(model)) {
        sq.resize(x.size());
        const std::vector<std::size_t> order = magnitude_order(x);
        for (std::size_t i = 0; i < order.size(); ++i) sq[i] = x[order[i]] * x[order[i]];
    } else {
        const auto& bs = std::get<BlockSparse>(model);
        std::vector<double> norms = block_sq_norms(x, bs);
        std::sort(norms.begin(), norms.end(), std::greater<double>());
        sq = std::move(norms);
    }
    Vec prof(budget, 0.0);
    double acc = 0.0;
    for (std::size_t k = budget; k-- > 1;) {
        acc += sq[k];
        prof[k - 1] = std::sqrt(acc);
    }
    return prof;
}

CompressibilityFit structured_compressibility_fit(const Vec& x, const ModelKind& model) {
    if (x.size() < 4)
        throw std::invalid_argument("structured_compressibility_fit: need N >= 4");
    const std::size_t budget = max_model_budget(model, x.size());
    const Vec prof = model_sigma_profile(x, model);
    const double floor = 1e-13 * norm2(x);

    std::vector<double> lk;
    std::vector<double> ls;
    for (std::size_t k = 1; k <= budget / 2; ++k) {
        if (prof[k - 1] <= floor) continue;
        lk.push_back(std::log(static_cast<double>(k)));
        ls.push_back(std::log(prof[k - 1]));
    }
    if (lk.size() < 2)
        return {std::numeric_limits<double>::infinity(), 0.0};

    double mk = 0.0;
    double ms = 0.0;
    for (std::size_t i = 0; i < lk.size(); ++i) {
        mk += lk[i];
        ms += ls[i];
    }
    mk /= static_cast<double>(lk.size());
    ms /= static_cast<double>(lk.size());
    double cov = 0.0;
    double var = 0.0;
    for (std::size_t i = 0; i < lk.size(); ++i) {
        cov += (lk[i] - mk) * (ls[i] - ms);
        var += (lk[i] - mk) * (lk[i] - mk);
    }
    CompressibilityFit fit;
    fit.s = -cov / var;
    for (std::size_t i = 0; i < lk.size(); ++i)
        fit.g = std::max(fit.g, std::exp(ls[i] + fit.s * lk[i]));
    return fit;
}

}  // namespace csrec
