#include "csrec/recovery.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace csrec {

namespace {

void check_inputs(const Matrix& phi, const Vec& y, const ModelKind& model,
                  const RecoveryConfig& cfg) {
    if (phi.rows == 0 || phi.cols == 0) throw std::invalid_argument("recover: empty matrix");
    if (y.size() != phi.rows) throw std::invalid_argument("recover: measurement length mismatch");
    validate_model_length(model, phi.cols);
    if (cfg.k == 0) throw std::invalid_argument("recover: k must be positive");
    if (cfg.k > max_model_budget(model, phi.cols))
        throw std::invalid_argument("recover: k exceeds the model budget");
    if (cfg.max_iters == 0) throw std::invalid_argument("recover: max_iters must be positive");
    if (cfg.halt_tol < 0) throw std::invalid_argument("recover: halt_tol must be nonnegative");
}

Support support_union(const Support& a, const Support& b) {
    Support out;
    out.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

RecoveryReport run(const Matrix& phi, const Vec& y, const ModelKind& model,
                   const RecoveryConfig& cfg, const IterationObserver& obs, bool iht) {
    check_inputs(phi, y, model, cfg);
    const auto start = std::chrono::steady_clock::now();
    const std::size_t n = phi.cols;
    const double norm_y = norm2(y);

    RecoveryReport report;
    report.estimate.assign(n, 0.0);
    Vec xhat(n, 0.0);
    Support support;
    Vec d = y;

    // Best iterate seen, for the IHT divergence fallback.
    double res_min = norm_y;
    Vec best = xhat;
    Support best_support;
    double res_prev = norm_y;

    for (std::size_t iter = 1; iter <= cfg.max_iters; ++iter) {
        Vec e = phi.apply_t(d);
        Vec b;
        Support merged;
        if (iht) {
            b = xhat;
            axpy(1.0, e, b);
        } else {
            ApproxResult proxy = model_approx_B(e, model, cfg.k, 2);
            merged = support_union(proxy.support, support);
            LsqResult lsq = restricted_lsq(phi, merged, y, cfg.lsq_tol);
            if (lsq.degenerate) report.degenerate_lsq = true;
            b.assign(n, 0.0);
            for (std::size_t j = 0; j < merged.size(); ++j) b[merged[j]] = lsq.solution[j];
        }
        ApproxResult pruned = model_approx(b, model, cfg.k);
        xhat = pruned.approximation;
        support.clear();
        for (std::size_t i : pruned.support)
            if (xhat[i] != 0.0) support.push_back(i);

        d = sub(y, phi.apply(xhat));
        const double res = norm2(d);
        report.residual_history.push_back(res);
        report.estimate_history.push_back(xhat);
        report.iterations = iter;
        if (obs) {
            IterationTrace trace;
            trace.iteration = iter;
            trace.merged_support = merged;
            trace.b = &b;
            trace.estimate = &xhat;
            trace.residual_norm = res;
            obs(trace);
        }

        if (res < res_min) {
            res_min = res;
            if (iht) {
                best = xhat;
                best_support = support;
            }
        }
        if (res <= 1e-10 * norm_y) break;
        if (iht && res > 10.0 * res_min) {
            report.diverged = true;
            xhat = best;
            support = best_support;
            break;
        }
        if (res_prev > 0.0 && std::abs(res - res_prev) / res_prev < cfg.halt_tol) break;
        res_prev = res;
    }

    report.estimate = xhat;
    report.support = support;
    report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

}  // namespace

RecoveryReport model_cosamp(const Matrix& phi, const Vec& y, const ModelKind& model,
                            const RecoveryConfig& cfg, const IterationObserver& obs) {
    return run(phi, y, model, cfg, obs, false);
}

RecoveryReport model_iht(const Matrix& phi, const Vec& y, const ModelKind& model,
                         const RecoveryConfig& cfg, const IterationObserver& obs) {
    return run(phi, y, model, cfg, obs, true);
}

RecoveryReport recover(const Matrix& phi, const Vec& y, const ModelKind& model,
                       const RecoveryConfig& cfg, const IterationObserver& obs) {
    return cfg.mode == RecoveryMode::iht ? model_iht(phi, y, model, cfg, obs)
                                         : model_cosamp(phi, y, model, cfg, obs);
}

ConvergenceAudit convergence_audit(const RecoveryReport& report, const Vec& x_true,
                                   double noise_norm) {
    if (noise_norm < 0) throw std::invalid_argument("convergence_audit: negative noise norm");
    ConvergenceAudit audit;
    const double nx = norm2(x_true);
    const std::size_t count = report.estimate_history.size();
    audit.errors.reserve(count + 1);
    audit.envelope.reserve(count + 1);
    audit.errors.push_back(nx);
    for (const Vec& est : report.estimate_history) {
        if (est.size() != x_true.size())
            throw std::invalid_argument("convergence_audit: estimate length mismatch");
        audit.errors.push_back(norm2(sub(x_true, est)));
    }
    for (std::size_t i = 0; i <= count; ++i)
        audit.envelope.push_back(std::ldexp(nx, -static_cast<int>(i)) + 15.0 * noise_norm);
    for (std::size_t i = 0; i <= count; ++i) {
        if (audit.errors[i] > audit.envelope[i] * (1.0 + 1e-12)) {
            audit.first_violation = i;
            audit.ok = false;
            break;
        }
    }
    return audit;
}

}  // namespace csrec
