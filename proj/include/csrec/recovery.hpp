#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "csrec/linalg.hpp"
#include "csrec/models.hpp"

namespace csrec {

enum class RecoveryMode { cosamp, iht };

struct RecoveryConfig {
    std::size_t k = 1;            // target model sparsity
    std::size_t max_iters = 50;
    double halt_tol = 1e-6;       // relative residual-change threshold
    double lsq_tol = 1e-10;
    RecoveryMode mode = RecoveryMode::cosamp;
};

// Per-iteration view for tests and audits. merged_support is the union
// set T solved over (CoSaMP only), b the pre-pruning estimate.
struct IterationTrace {
    std::size_t iteration = 0;  // 1-based
    Support merged_support;
    const Vec* b = nullptr;
    const Vec* estimate = nullptr;
    double residual_norm = 0.0;
};
using IterationObserver = std::function<void(const IterationTrace&)>;

struct RecoveryReport {
    Vec estimate;                      // always in-model (budget K)
    Support support;
    std::size_t iterations = 0;
    std::vector<double> residual_history;  // ||d_i||, one per iteration
    std::vector<Vec> estimate_history;     // raw iterates, one per iteration
    bool diverged = false;        // residual grew 10x over its minimum;
                                  // estimate holds the best iterate instead
    bool degenerate_lsq = false;  // some restricted solve was flagged
    double wall_time = 0.0;       // seconds
};

// One CoSaMP iteration: e = Phi^T d; Omega = supp of the enlarged model
// approximation of e (budget 2K); T = Omega union supp(xhat);
// b|_T solves the restricted least squares, b elsewhere 0;
// xhat = model approximation of b (budget K); d = y - Phi xhat.
// Halts when the relative residual change drops below halt_tol, at
// max_iters, or when the residual reaches 1e-10 ||y||.
RecoveryReport model_cosamp(const Matrix& phi, const Vec& y, const ModelKind& model,
                            const RecoveryConfig& cfg, const IterationObserver& obs = {});

// One IHT iteration: b = xhat + Phi^T d (unit step);
// xhat = model approximation of b; d = y - Phi xhat. Same halting, plus
// the divergence guard described on RecoveryReport.
RecoveryReport model_iht(const Matrix& phi, const Vec& y, const ModelKind& model,
                         const RecoveryConfig& cfg, const IterationObserver& obs = {});

// Dispatch on cfg.mode.
RecoveryReport recover(const Matrix& phi, const Vec& y, const ModelKind& model,
                       const RecoveryConfig& cfg, const IterationObserver& obs = {});

// Checks err_i <= 2^(-i) ||x|| + 15 * noise_norm for i = 0..iterations,
// with xhat_0 = 0. Violations are reported, never fatal: the envelope is
// only guaranteed under the isometry hypothesis.
struct ConvergenceAudit {
    std::vector<double> errors;    // ||x - xhat_i||, starting at i = 0
    std::vector<double> envelope;  // 2^(-i) ||x|| + 15 noise_norm
    std::size_t first_violation = static_cast<std::size_t>(-1);
    bool ok = true;
};
ConvergenceAudit convergence_audit(const RecoveryReport& report, const Vec& x_true,
                                   double noise_norm);

}  // namespace csrec
