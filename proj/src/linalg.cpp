#include "csrec/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace csrec {

bool is_valid_support(const Support& s, std::size_t n) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] >= n) return false;
    if (i > 0 && s[i] <= s[i - 1]) return false;
  }
  return true;
}

double dot(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const Vec& a) {
  double s = 0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

void axpy(double alpha, const Vec& x, Vec& y) {
  if (x.size() != y.size()) throw std::invalid_argument("axpy: size mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

Vec sub(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw std::invalid_argument("sub: size mismatch");
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

void scale(Vec& a, double alpha) {
  for (double& v : a) v *= alpha;
}

Matrix::Matrix(std::size_t r, std::size_t c) : rows(r), cols(c) {
  if (r != 0 && c > std::numeric_limits<std::size_t>::max() / r)
    throw std::invalid_argument("Matrix: size overflow");
  values.assign(r * c, 0.0);
}

Vec Matrix::apply(const Vec& x) const {
  if (x.size() != cols) throw std::invalid_argument("apply: size mismatch");
  Vec y(rows, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    const double* row = values.data() + i * cols;
    double s = 0;
    for (std::size_t j = 0; j < cols; ++j) s += row[j] * x[j];
    y[i] = s;
  }
  return y;
}

Vec Matrix::apply_t(const Vec& y) const {
  if (y.size() != rows) throw std::invalid_argument("apply_t: size mismatch");
  Vec x(cols, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    const double* row = values.data() + i * cols;
    const double s = y[i];
    if (s == 0.0) continue;
    for (std::size_t j = 0; j < cols; ++j) x[j] += row[j] * s;
  }
  return x;
}

Matrix Matrix::columns(const Support& idx) const {
  if (!is_valid_support(idx, cols))
    throw std::invalid_argument("columns: support not sorted/unique/in range");
  Matrix b(rows, idx.size());
  for (std::size_t i = 0; i < rows; ++i) {
    const double* row = values.data() + i * cols;
    double* out = b.values.data() + i * idx.size();
    for (std::size_t j = 0; j < idx.size(); ++j) out[j] = row[idx[j]];
  }
  return b;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

std::uint64_t RngStream::next_u64() { return engine_(); }

std::uint64_t RngStream::below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("below: zero bound");
  // Reject the low remainder band so every residue is equally likely.
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = next_u64();
    if (r >= threshold) return r % bound;
  }
}

double RngStream::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Box-Muller; u1 in (0,1] so the log is finite.
  const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

RngStream RngStream::child(std::uint64_t stream) const {
  return RngStream(splitmix64(seed_ ^ splitmix64(stream + 0x9E3779B97F4A7C15ull)));
}

Matrix gaussian_matrix(std::size_t m, std::size_t n, RngStream& rng) {
  if (m == 0 || n == 0) throw std::invalid_argument("gaussian_matrix: empty shape");
  Matrix a(m, n);
  const double s = 1.0 / std::sqrt(static_cast<double>(m));
  for (double& v : a.values) v = rng.normal() * s;
  return a;
}

Matrix rademacher_matrix(std::size_t m, std::size_t n, RngStream& rng) {
  if (m == 0 || n == 0) throw std::invalid_argument("rademacher_matrix: empty shape");
  Matrix a(m, n);
  const double s = 1.0 / std::sqrt(static_cast<double>(m));
  for (double& v : a.values) v = (rng.next_u64() & 1ull) ? s : -s;
  return a;
}

LsqResult restricted_lsq(const Matrix& phi, const Support& support, const Vec& y,
                         double tol, std::size_t max_iter) {
  if (support.empty()) throw std::invalid_argument("restricted_lsq: empty support");
  if (!is_valid_support(support, phi.cols))
    throw std::invalid_argument("restricted_lsq: bad support");
  if (y.size() != phi.rows) throw std::invalid_argument("restricted_lsq: size mismatch");
  if (!(tol > 0)) throw std::invalid_argument("restricted_lsq: tol must be positive");

  const Matrix b = phi.columns(support);
  const std::size_t n = b.cols;
  if (max_iter == 0) max_iter = 4 * n;

  LsqResult out;
  out.solution.assign(n, 0.0);

  Vec r = y;            // residual y - B x
  Vec s = b.apply_t(r); // normal-equations residual
  Vec p = s;
  double gamma = dot(s, s);
  const double gamma0 = gamma;
  const double stop = tol * tol * gamma0;

  bool converged = gamma <= stop;  // includes B^T y = 0
  double gamma_best = gamma;
  std::size_t stall = 0;

  while (!converged && out.iterations < max_iter) {
    const Vec q = b.apply(p);
    const double qq = dot(q, q);
    if (!(qq > 0) || !std::isfinite(qq)) {
      out.degenerate = true;  // search direction annihilated: rank deficiency
      break;
    }
    const double alpha = gamma / qq;
    axpy(alpha, p, out.solution);
    axpy(-alpha, q, r);
    s = b.apply_t(r);
    const double gamma_new = dot(s, s);
    ++out.iterations;

    if (gamma_new <= stop) {
      converged = true;
      break;
    }
    // Stagnation: no meaningful progress on ||B^T r|| over a window means the
    // normal matrix is effectively singular at this tolerance.
    if (gamma_new >= gamma_best * (1.0 - 1e-6)) {
      if (++stall >= 40) {
        out.degenerate = true;
        break;
      }
    } else {
      gamma_best = gamma_new;
      stall = 0;
    }
    const double beta = gamma_new / gamma;
    for (std::size_t i = 0; i < n; ++i) p[i] = s[i] + beta * p[i];
    gamma = gamma_new;
  }
  if (!converged && !out.degenerate) out.degenerate = true;  // iteration cap

  out.residual_norm = norm2(sub(y, b.apply(out.solution)));
  return out;
}

namespace {

Matrix gram(const Matrix& a) {
  Matrix g(a.cols, a.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* row = a.values.data() + i * a.cols;
    for (std::size_t j = 0; j < a.cols; ++j) {
      const double v = row[j];
      if (v == 0.0) continue;
      for (std::size_t k = j; k < a.cols; ++k) g.at(j, k) += v * row[k];
    }
  }
  for (std::size_t j = 0; j < a.cols; ++j)
    for (std::size_t k = 0; k < j; ++k) g.at(j, k) = g.at(k, j);
  return g;
}

// Cyclic Jacobi eigensolve of a symmetric matrix; returns eigenvalues ascending.
std::vector<double> jacobi_eigenvalues(Matrix a) {
  const std::size_t n = a.cols;
  double scale = 0;
  for (double v : a.values) scale = std::max(scale, std::fabs(v));
  if (scale == 0) return std::vector<double>(n, 0.0);
  for (std::size_t sweep = 0; sweep < 100; ++sweep) {
    double off = 0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off = std::max(off, std::fabs(a.at(p, q)));
    if (off <= 1e-15 * scale) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a.at(p, q);
        if (std::fabs(apq) <= 1e-18 * scale) continue;
        const double theta = (a.at(q, q) - a.at(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a.at(k, p), akq = a.at(k, q);
          a.at(k, p) = c * akp - s * akq;
          a.at(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a.at(p, k), aqk = a.at(q, k);
          a.at(p, k) = c * apk - s * aqk;
          a.at(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = a.at(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

// Largest eigenvalue of a symmetric PSD matrix by power iteration on a fixed
// deterministic start vector. Convergence: relative Rayleigh-quotient change.
struct PowerResult {
  double lambda = 0;
  std::size_t iterations = 0;
  bool converged = false;
};

PowerResult power_largest(const Matrix& g, double tol, std::size_t max_iter) {
  const std::size_t n = g.cols;
  Vec v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 1e-3 * static_cast<double>(i % 7);
  scale(v, 1.0 / norm2(v));
  PowerResult out;
  double lambda_prev = std::numeric_limits<double>::infinity();
  for (std::size_t it = 0; it < max_iter; ++it) {
    Vec w = g.apply(v);
    ++out.iterations;
    const double lambda = dot(v, w);
    const double wn = norm2(w);
    if (wn == 0) {
      out.lambda = 0;
      out.converged = true;
      return out;
    }
    scale(w, 1.0 / wn);
    v = w;
    if (std::fabs(lambda - lambda_prev) <= tol * std::max(std::fabs(lambda), 1e-300)) {
      out.lambda = lambda;
      out.converged = true;
      return out;
    }
    lambda_prev = lambda;
    out.lambda = lambda;
  }
  return out;
}

}  // namespace

SvExtremes extreme_singular_values(const Matrix& phi_sub, double tol) {
  if (phi_sub.cols == 0 || phi_sub.rows < phi_sub.cols)
    throw std::invalid_argument("extreme_singular_values: need a tall submatrix");
  if (!(tol > 0)) throw std::invalid_argument("extreme_singular_values: tol must be positive");

  const Matrix g = gram(phi_sub);
  const std::size_t n = g.cols;
  const std::size_t max_iter = 100000;

  SvExtremes out;
  const PowerResult top = power_largest(g, tol, max_iter);
  out.iterations = top.iterations;
  out.converged = top.converged;
  out.sigma_max = std::sqrt(std::max(0.0, top.lambda));

  if (n <= 64) {
    const std::vector<double> eig = jacobi_eigenvalues(g);
    out.sigma_min = std::sqrt(std::max(0.0, eig.front()));
  } else {
    // Largest eigenvalue of lambda_max I - G is lambda_max - lambda_min.
    Matrix h = g;
    for (double& v : h.values) v = -v;
    for (std::size_t i = 0; i < n; ++i) h.at(i, i) += top.lambda;
    const PowerResult bottom = power_largest(h, tol, max_iter);
    out.iterations += bottom.iterations;
    out.converged = out.converged && bottom.converged;
    out.sigma_min = std::sqrt(std::max(0.0, top.lambda - bottom.lambda));
  }
  return out;
}

}  // namespace csrec
