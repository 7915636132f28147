#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace optrans {

struct JacobiOptions {
  int max_sweeps = 100;
  /// A column pair is treated as orthogonal once |a_p^H a_q| <= tol * |a_p| |a_q|.
  double tolerance = 1e-14;
};

/// Singular values of a dense rows x cols matrix stored column-major, by one-sided
/// (Hestenes) Jacobi. Unsorted, zeros kept. Throws SvdNotConverged past the sweep cap.
std::vector<double> jacobi_singular_values(std::vector<std::complex<double>> a, std::size_t rows,
                                           std::size_t cols, const JacobiOptions& opts = {});

}  // namespace optrans
