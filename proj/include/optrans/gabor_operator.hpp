#pragma once

#include <complex>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "optrans/lattice.hpp"

namespace optrans {

using cplx = std::complex<double>;

/// p = infinity selects the operator norm.
inline constexpr double kOperatorNorm = std::numeric_limits<double>::infinity();

/// Nonincreasing list of nonnegative singular values.
class SingularSpectrum {
 public:
  SingularSpectrum() = default;
  /// Sorts, and drops values below 1e-12 times the largest.
  explicit SingularSpectrum(std::vector<double> values);

  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  double largest() const noexcept { return values_.empty() ? 0.0 : values_.front(); }

  /// l^p norm of the values; p >= 1 or kOperatorNorm.
  double schatten_norm(double p) const;

  /// Largest elementwise gap after padding the shorter list with zeros.
  static double max_deviation(const SingularSpectrum& a, const SingularSpectrum& b);

  static constexpr double kZeroTolerance = 1e-12;

 private:
  std::vector<double> values_;
};

/// Coefficients c_{m,k} = <U pi(m)psi, pi(k)psi> of an operator in the Gabor basis.
/// Row index m is the input basis element, column index k the output.
class GaborOperator {
 public:
  struct Entry {
    LatticePoint m;
    LatticePoint k;
    cplx c;
  };

  explicit GaborOperator(int d);

  /// Duplicate (m,k) entries are summed; zero results are dropped.
  static GaborOperator from_entries(int d, std::vector<Entry> entries);
  /// Entries must be distinct; a repeated (m,k) throws CollisionError.
  static GaborOperator from_distinct_entries(int d, std::vector<Entry> entries);

  int dim() const noexcept { return d_; }
  std::size_t support_size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  /// Sorted by (m, k).
  std::span<const Entry> entries() const noexcept { return entries_; }

  cplx coefficient(const LatticePoint& m, const LatticePoint& k) const;
  double frobenius_norm_sq() const;

  friend bool operator==(const GaborOperator& a, const GaborOperator& b);
  friend GaborOperator add(const GaborOperator& a, const GaborOperator& b);

 private:
  int d_;
  std::vector<Entry> entries_;
};

GaborOperator rank_one(const LatticePoint& m, const LatticePoint& k, cplx c);
/// Coefficient identity on a finite set of basis indices; repeats are ignored.
GaborOperator identity_on(int d, std::span<const LatticePoint> indices);

/// (m,k) -> (m+i, k+i); no phase, by pi(i1)pi(i2) = pi(i1+i2) on the integer lattice.
GaborOperator translate(const GaborOperator& s, const LatticePoint& i);
GaborOperator adjoint(const GaborOperator& s);
/// ST: (ST)_{m,k} = sum_j T_{m,j} S_{j,k} (apply T first).
GaborOperator compose(const GaborOperator& s, const GaborOperator& t);
GaborOperator add(const GaborOperator& a, const GaborOperator& b);
GaborOperator scale(const GaborOperator& a, cplx alpha);
GaborOperator subtract(const GaborOperator& a, const GaborOperator& b);

/// tr(S T*) = sum c^S conj(c^T).
cplx trace_pairing(const GaborOperator& s, const GaborOperator& t);
/// sum_m c_{m,m}
cplx trace(const GaborOperator& s);

SingularSpectrum singular_values(const GaborOperator& s);
double schatten_norm(const GaborOperator& s, double p);

}  // namespace optrans
