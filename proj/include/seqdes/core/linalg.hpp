#ifndef SEQDES_CORE_LINALG_HPP
#define SEQDES_CORE_LINALG_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

namespace seqdes {

// Solves A x = b in place for a small dense system (row-major, n x n) with
// partial pivoting. Throws on (numerical) singularity.
inline std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b,
                                       std::size_t n) {
  if (a.size() != n * n || b.size() != n)
    throw std::invalid_argument("solve_dense: bad dimensions");
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(a[r * n + col]) > std::fabs(a[piv * n + col])) piv = r;
    if (std::fabs(a[piv * n + col]) < 1e-300)
      throw std::runtime_error("solve_dense: singular system");
    if (piv != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[piv * n + c]);
      std::swap(b[col], b[piv]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / a[col * n + col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a[i * n + c] * x[c];
    x[i] = s / a[i * n + i];
  }
  return x;
}

// Least squares fit of y on the columns of X (row-major, rows x cols) via
// normal equations; fine at the sizes used here (cols <= 8).
inline std::vector<double> least_squares(const std::vector<double>& x,
                                         const std::vector<double>& y,
                                         std::size_t rows, std::size_t cols) {
  if (x.size() != rows * cols || y.size() != rows)
    throw std::invalid_argument("least_squares: bad dimensions");
  std::vector<double> xtx(cols * cols, 0.0), xty(cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t i = 0; i < cols; ++i) {
      xty[i] += x[r * cols + i] * y[r];
      for (std::size_t j = 0; j < cols; ++j)
        xtx[i * cols + j] += x[r * cols + i] * x[r * cols + j];
    }
  }
  return solve_dense(std::move(xtx), std::move(xty), cols);
}

}  // namespace seqdes

#endif
