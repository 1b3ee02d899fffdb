#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "csrec/linalg.hpp"

namespace csrec {

// Orthonormal filter bank. Invariants checked at construction:
// sum h[k] = sqrt(2), sum h[k]^2 = 1, sum h[k]h[k+2m] = 0 (m != 0),
// all within 1e-10.
struct WaveletFilter {
    std::string name;
    std::vector<double> lowpass;
};

WaveletFilter haar();
WaveletFilter db4();
WaveletFilter db6();

// Accepts "haar", "db4", "db6". Unknown name throws.
WaveletFilter filter_by_name(const std::string& name);

// Periodic orthonormal DWT. Coefficient layout is the flat tree order
// [v0, w00, w10, w11, w20, ...]: the approximation at depth `levels`
// occupies the leading N >> levels slots, the detail of level l the
// half-open range [N >> l, N >> (l-1)).
//
// Preconditions: length(x) a power of two, levels <= log2 N.
// levels = 0 selects the full decomposition.
Vec dwt(const Vec& x, const WaveletFilter& filter, std::size_t levels = 0);

// Exact inverse of dwt under the same filter and levels.
Vec idwt(const Vec& alpha, const WaveletFilter& filter, std::size_t levels = 0);

// None-marker for parent/children at the tree boundary.
inline constexpr std::size_t tree_none = static_cast<std::size_t>(-1);

// Position of a coefficient in the flat vector. The scaling coefficient
// v0 has index 0 and carries tree_none for scale and offset; the wavelet
// w_{i,j} sits at flat index 2^i + j with 0 <= j < 2^i, 0 <= i < log2 N.
struct TreeIndex {
    std::size_t index = 0;
    std::size_t scale = tree_none;
    std::size_t offset = tree_none;
};

TreeIndex tree_index(std::size_t flat);
std::size_t flat_index(std::size_t scale, std::size_t offset);

// parent(w_{i,j}) = w_{i-1, floor(j/2)}; parent(w_{0,0}) = v0;
// parent(v0) = tree_none.
std::size_t tree_parent(std::size_t t);

// children(w_{i,j}) = (w_{i+1,2j}, w_{i+1,2j+1}); v0 has the single
// child w_{0,0}. Missing children are tree_none (finest scale, or the
// right slot of v0).
std::pair<std::size_t, std::size_t> tree_children(std::size_t t, std::size_t n);

}  // namespace csrec
