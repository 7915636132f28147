#include "optrans/jacobi_svd.hpp"

#include <cmath>
#include <string>

#include "optrans/error.hpp"
#include "optrans/kernels.hpp"

namespace optrans {

std::vector<double> jacobi_singular_values(std::vector<std::complex<double>> a, std::size_t rows, std::size_t cols,
                                           const JacobiOptions& opts) {
  using cplx = std::complex<double>;
  if (a.size() != rows * cols) throw DimensionMismatch("dense matrix storage does not match its shape");
  if (rows == 0 || cols == 0) return {};

  // Orthogonalize the shorter side: work on the conjugate transpose when wide.
  if (cols > rows) {
    std::vector<cplx> t(a.size());
    for (std::size_t j = 0; j < cols; ++j) {
      for (std::size_t i = 0; i < rows; ++i) t[i * cols + j] = std::conj(a[j * rows + i]);
    }
    a.swap(t);
    std::swap(rows, cols);
  }

  const auto& k = kernels::active();
  auto col = [&](std::size_t j) { return a.data() + j * rows; };

  std::vector<double> norms(cols);
  for (std::size_t j = 0; j < cols; ++j) norms[j] = k.norm_sq(col(j), rows);

  bool converged = cols == 1;
  for (int sweep = 0; sweep < opts.max_sweeps && !converged; ++sweep) {
    converged = true;
    for (std::size_t p = 0; p + 1 < cols; ++p) {
      for (std::size_t q = p + 1; q < cols; ++q) {
        const double alpha = norms[p], beta = norms[q];
        if (alpha == 0.0 || beta == 0.0) continue;
        const cplx gamma = k.dotc(col(p), col(q), rows);
        const double g = std::abs(gamma);
        if (g <= opts.tolerance * std::sqrt(alpha * beta)) continue;
        converged = false;
        const cplx ph = std::conj(gamma) / g;
        const double zeta = (beta - alpha) / (2.0 * g);
        const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        k.rotate(col(p), col(q), rows, c, s, ph);
        norms[p] = k.norm_sq(col(p), rows);
        norms[q] = k.norm_sq(col(q), rows);
      }
    }
  }
  if (!converged) {
    throw SvdNotConverged("one-sided Jacobi did not converge within " + std::to_string(opts.max_sweeps) +
                          " sweeps on a " + std::to_string(rows) + "x" + std::to_string(cols) + " block");
  }

  std::vector<double> out(cols);
  for (std::size_t j = 0; j < cols; ++j) out[j] = std::sqrt(norms[j]);
  return out;
}

}  // namespace optrans
