#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include <gmpxx.h>

#include "csrec/linalg.hpp"
#include "csrec/models.hpp"

namespace csrec {

// Shared knobs for the measurement-bound evaluators. The absolute
// constant c is unspecified by the theory; bounds are reported up to its
// choice (default 1). delta is accepted on (0, 1].
struct BoundInput {
    std::size_t n = 1;
    std::size_t k = 1;
    std::size_t j = 1;   // block length where applicable
    double delta = 0.5;
    double eps = 0.0;
    double r = 0.0;
    double t = 0.0;
    double c = 1.0;
};

// ln C(n, k) via lgamma.
double log_binomial(std::size_t n, std::size_t k);

// M >= (2/(c delta^2)) (ln(2 m_K) + K ln(12/delta) + t), log-domain input
// log_mk = ln(m_K).
double model_rip_measurements(const BoundInput& in, double log_mk);

// M >= max_{1<=j<=jmax} (2K + 4 ln(R_j N / K) + 2t) / ((j^r sqrt(1+eps) - 1)^2).
// log_rj(j) = ln R_j. Throws when a denominator vanishes (eps = 0 at j = 1).
double ramp_measurements(const BoundInput& in,
                         const std::function<double(std::size_t)>& log_rj,
                         std::size_t jmax);

// Exact number of rooted connected subtrees of size k in the perfect
// binary tree of height max(1, ceil(log2 n)) (the wavelet detail tree of
// an n-sample signal). Guarded to n <= 65536, k <= 2048.
mpz_class tree_count_exact(std::size_t n, std::size_t k);

// ln of the subtree-count bound: (2e)^K/(K+1) for K < log2 N, else
// 4^(K+4)/(K e^2).
double tree_count_bound(std::size_t n, std::size_t k);

// ln of the residual-subspace count bound (2e)^{K(2j+1)} / ((Kj+K+1)(Kj+1)).
double tree_residual_count_bound(std::size_t k, std::size_t j);

// M >= 2 (10K + 2 ln(N / (K(K+1)(2K+1))) + t) / ((sqrt(1+eps) - 1)^2).
double tree_ramp_measurements(std::size_t n, std::size_t k, double eps, double t);

// M >= (2/(c delta^2)) (K (ln(2 N_blocks / K) + J ln(12/delta)) + t).
double block_rip_measurements(std::size_t n_blocks, std::size_t block_length, std::size_t k,
                              double delta, double c, double t);

// Monte-Carlo lower bound on the model-RIP constant: delta_hat =
// max(1 - sigma_min^2, sigma_max^2 - 1) over sampled admissible supports.
// Tree supports grow from the root by uniform frontier picks (not uniform
// over subtrees; adequate for a lower bound). Sequential sampling makes
// delta_hat monotone in `trials` for a fixed starting rng.
struct EmpiricalRip {
    double delta_hat = 0.0;
    std::vector<SvExtremes> extremes;  // one entry per trial
};
EmpiricalRip empirical_rip(const Matrix& phi, const ModelKind& model, std::size_t k,
                           std::size_t trials, RngStream& rng);

// Monte-Carlo lower bound on the residual amplification constant:
// eps_hat = max ||Phi u||^2 / (j^{2r} ||u||^2) - 1 over residual pieces of
// random Gaussian signals; zero pieces are skipped. per_scale_max[j-1]
// holds the stage-j maximum (-infinity when never sampled).
struct EmpiricalRamp {
    double eps_hat = -1.0;
    std::vector<double> per_scale_max;
};
EmpiricalRamp empirical_ramp(const Matrix& phi, const ModelKind& model, std::size_t k,
                             double r, std::size_t trials, RngStream& rng);

}  // namespace csrec
