#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "csrec/linalg.hpp"
#include "csrec/wavelet.hpp"

namespace csrec {

// Structured-sparsity model: a union of canonical K-dimensional subspaces
// selected by which supports the model admits.
struct PlainSparse {};

// Supports are connected rooted subtrees of the wavelet tree; the scaling
// coefficient (index 0) is the permanent root and counts toward K. The
// filter and levels ride along for signal-domain conversions; the
// approximation operators act on coefficient vectors directly.
struct WaveletTree {
    WaveletFilter filter;
    std::size_t levels = 0;  // 0 = full depth
};

// Supports are unions of K whole blocks of length block_length; the
// sparsity budget counts blocks, not coefficients.
struct BlockSparse {
    std::size_t block_length = 1;
    std::size_t block_count = 0;
};

using ModelKind = std::variant<PlainSparse, WaveletTree, BlockSparse>;

std::string model_name(const ModelKind& model);  // "plain" | "tree" | "block"

// Throws unless a vector of length n is admissible for the model
// (power of two for the tree, block_length * block_count for blocks).
void validate_model_length(const ModelKind& model, std::size_t n);

// Largest meaningful sparsity budget: n for plain and tree, block_count
// for blocks.
std::size_t max_model_budget(const ModelKind& model, std::size_t n);

// True when `support` fits a single model subspace of budget k: at most k
// indices (plain), a connected rooted subtree of at most k nodes (tree),
// or indices covered by at most k blocks (block).
bool support_in_model(const Support& support, const ModelKind& model, std::size_t n,
                      std::size_t k);

struct ApproxResult {
    Vec approximation;   // x restricted to support, zero elsewhere
    Support support;     // strictly increasing
    double error_l2 = 0.0;
};

// Best K-term approximation; ties broken toward the lower index.
ApproxResult kterm_approx(const Vec& x, std::size_t k);

// Best size-K connected rooted subtree by captured energy, computed with
// an exact subtree knapsack over the coefficient tree (the greedy
// condensing heuristic can lose energy when a weak node shields a strong
// descendant, so the optimality contract is met by dynamic programming).
// Requires 1 <= k <= N.
ApproxResult cssa_tree_approx(const Vec& alpha, std::size_t k);

// Exhaustive reference: enumerates every connected rooted subtree of size
// exactly k in lexicographic order. Guarded to N <= 64, k <= 12.
ApproxResult brute_force_tree_approx(const Vec& alpha, std::size_t k);

// Keep the k blocks of largest l2 norm; ties toward the lower block index.
ApproxResult block_approx(const Vec& x, const BlockSparse& model, std::size_t k);

// Dispatch over the model kind.
ApproxResult model_approx(const Vec& x, const ModelKind& model, std::size_t k);

// Enlarged-model approximation, realized as model_approx with budget b*k
// (saturating at the model's maximum budget).
ApproxResult model_approx_B(const Vec& x, const ModelKind& model, std::size_t k,
                            std::size_t b);

// Supports of the stage-j approximations, j = 1..ceil(budget/k), each of
// size min(j*k, budget) in the model's budget unit, nested by
// construction (sorted prefixes for plain/block, continued growth of the
// same tree for the tree model).
std::vector<Support> nested_approximations(const Vec& x, const ModelKind& model,
                                           std::size_t k);

// Disjoint pieces x_{T_j} from consecutive nested supports; they sum to x
// exactly and the first piece equals model_approx(x, k).
std::vector<Vec> residual_partition(const Vec& x, const ModelKind& model, std::size_t k);

// sigma[k-1] = l2 error of the best budget-k model approximation, for
// k = 1..max budget. One pass over the tree knapsack for the tree model.
Vec model_sigma_profile(const Vec& x, const ModelKind& model);

// Fit sigma_K <= G * K^(-s) over K = 1..budget/2 by least squares in
// log-log space, ignoring zero errors; G is the smallest constant
// satisfying the bound at the fitted s. Fewer than two usable points
// (x model-sparse at tiny K) yields s = +infinity, G = 0.
struct CompressibilityFit {
    double s = 0.0;
    double g = 0.0;
};
CompressibilityFit structured_compressibility_fit(const Vec& x, const ModelKind& model);

}  // namespace csrec
