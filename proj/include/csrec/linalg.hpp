#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace csrec {

using Vec = std::vector<double>;

// Sorted list of unique column/coefficient indices.
using Support = std::vector<std::size_t>;

bool is_valid_support(const Support& s, std::size_t n);

double dot(const Vec& a, const Vec& b);
double norm2(const Vec& a);
void axpy(double alpha, const Vec& x, Vec& y);  // y += alpha*x
Vec sub(const Vec& a, const Vec& b);
void scale(Vec& a, double alpha);

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;  // row-major, rows*cols entries

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c);

  double& at(std::size_t i, std::size_t j) { return values[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }

  Vec apply(const Vec& x) const;    // A x
  Vec apply_t(const Vec& y) const;  // A^T y

  // Copy of the columns listed in idx (sorted, unique, < cols).
  Matrix columns(const Support& idx) const;
};

// Deterministic random stream. The engine is std::mt19937_64, whose output
// sequence is fixed by the C++ standard, so identical seeds give identical
// u64 draws on every platform. Uniform and normal variates are derived here
// explicitly (53-bit mantissa scaling, Box-Muller with a cached spare) so no
// library distribution enters the picture.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  std::uint64_t next_u64();
  std::uint64_t below(std::uint64_t bound);  // unbiased uniform in [0, bound)
  double uniform01();                        // [0, 1)
  double normal();                           // standard normal

  // Independent substream: the child seed is splitmix64(seed ^
  // splitmix64(stream + golden)), a pure function of (seed, stream).
  RngStream child(std::uint64_t stream) const;

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

// Entries i.i.d. Normal(0, 1/m): expected squared column norm 1. Filled in
// row-major draw order.
Matrix gaussian_matrix(std::size_t m, std::size_t n, RngStream& rng);

// Entries +-1/sqrt(m) with equal probability, one u64 draw per entry,
// row-major order. Columns have unit norm exactly.
Matrix rademacher_matrix(std::size_t m, std::size_t n, RngStream& rng);

struct LsqResult {
  Vec solution;              // coefficients on the support, length |T|
  double residual_norm = 0;  // ||y - Phi_T solution||
  std::size_t iterations = 0;
  bool degenerate = false;   // stagnated or hit the iteration cap
};

// Least squares over the columns in `support`, by CGLS (conjugate gradient
// on the normal equations) started from zero. Stops when
// ||Phi_T^T r|| <= tol * ||Phi_T^T y||; cap max_iter (0 means 4*|T|).
// Starting from zero keeps every iterate in the row space of Phi_T, so on a
// rank-deficient system the converged point is the minimum-norm least-squares
// solution; stagnation or the cap sets the degenerate flag.
LsqResult restricted_lsq(const Matrix& phi, const Support& support, const Vec& y,
                         double tol = 1e-10, std::size_t max_iter = 0);

struct SvExtremes {
  double sigma_min = 0;
  double sigma_max = 0;
  std::size_t iterations = 0;  // total Gram matvecs spent
  bool converged = false;      // false carries the best estimate so far
};

// Extreme singular values of a tall submatrix. sigma_max by power iteration
// on the Gram operator to relative tolerance tol; sigma_min by a dense Jacobi
// eigensolve of the Gram matrix when cols <= 64, otherwise by shifted power
// iteration on sigma_max^2 I - Gram.
SvExtremes extreme_singular_values(const Matrix& phi_sub, double tol = 1e-10);

}  // namespace csrec
