#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "optrans/lattice.hpp"
#include "optrans/qha.hpp"

namespace optrans {

/// Indicator of a set of phase-space cells. Cell (i, j) is
/// [i/rx, (i+1)/rx) x [j/rw, (j+1)/rw); integer shifts move whole cells.
class SupportSet {
 public:
  /// Cells i in [i0, i0+nx), j in [j0, j0+nw), all empty.
  SupportSet(long rx, long rw, long i0, long j0, std::size_t nx, std::size_t nw);

  /// Cells whose lower-left corner lies in [x0,x1) x [w0,w1). Corners must sit on cell boundaries.
  static SupportSet box(long rx, long rw, double x0, double x1, double w0, double w1);
  /// Cells of the map's grid where |f| > threshold * max|f|. Needs N/L and L to be integers.
  static SupportSet from_map(const qha::PhaseSpaceMap& f, double threshold);

  long rx() const noexcept { return rx_; }
  long rw() const noexcept { return rw_; }
  long i0() const noexcept { return i0_; }
  long j0() const noexcept { return j0_; }
  std::size_t nx() const noexcept { return nx_; }
  std::size_t nw() const noexcept { return nw_; }

  bool contains(long i, long j) const noexcept;
  void set(long i, long j, bool v = true);
  std::size_t count() const noexcept;
  /// Same set moved by the integer phase-space vector (n1, n2).
  SupportSet shifted(long n1, long n2) const;

 private:
  long rx_, rw_, i0_, j0_;
  std::size_t nx_, nw_;
  std::vector<char> bits_;
};

struct SpecialFormResult {
  bool holds = true;
  /// Lower-left corner of a cell z in [-1,1]^2 covered by two or more shifts.
  std::optional<qha::PhaseSpacePoint> witness;
  /// The integer shifts n with z + n in the set.
  std::vector<std::pair<long, long>> shifts;
};

/// For every cell z in [-1,1]^2, at most one integer n has z + n in the set.
/// The first witness is searched in [0,1)^2, then in the rest of [-1,1]^2.
SpecialFormResult is_special_form(const SupportSet& omega);

struct SpanMembership {
  bool member = true;
  /// Cells where |F_W T| is above threshold but |F_W S| is not.
  std::size_t offending_cells = 0;
  std::optional<qha::PhaseSpacePoint> first_offender;
};

/// Numerical supp(F_W T) within supp(F_W S), with support meaning |value| > threshold * max.
SpanMembership span_membership(const qha::SampledOperator& s, const qha::SampledOperator& t, double threshold);

/// Unit cell A = [x0, x0+1) x [w0, w0+1) on the grid of g_hat. Returns H with
/// H = conj(g(.+e1)) on A, -conj(g(.-e1)) on A+e1 and 0 elsewhere.
qha::PhaseSpaceMap integer_orthogonal_witness(const qha::PhaseSpaceMap& g_hat, double x0 = -1.0, double w0 = -0.5);

/// max over grid z of |sum_n H(z+n) conj(g(z+n))| for integer n.
double periodized_product_max(const qha::PhaseSpaceMap& h, const qha::PhaseSpaceMap& g);

struct Translate {
  LatticePoint n;
  /// gamma(n), 2d real coordinates
  std::vector<double> gamma;
  std::vector<double> lambda() const;
};

struct TranslateSet {
  double a = 0.5;
  int d = 1;
  /// Ordered by |n|_1, then lexicographically.
  std::vector<Translate> points;
};

/// gamma(n) = (a^{|n|_1} / 2) e_1 for |n|_1 <= radius.
TranslateSet perturbed_lattice(double a, std::int64_t radius, int d = 1);

/// e^{-pi |t|^2} prod_j exp(-1/sin^2(pi t_j)), zero when some t_j is an integer.
double classK_window(std::span<const double> t);

/// A translate moved onto the grid; rejected when the move reaches a^{|n|_1}/4 or the
/// perturbation rounds to zero.
struct GridTranslate {
  LatticePoint n;
  qha::PhaseSpacePoint exact;
  qha::PhaseSpacePoint rounded;
  double rounding = 0.0;
  bool accepted = false;
};

struct ResidualReport {
  std::vector<GridTranslate> translates;
  /// curves[target][M-1]: ||T - P_M T||_HS / ||T||_HS with P_M the projection onto
  /// span{alpha_{lambda_1} S, ..., alpha_{lambda_M} S} over accepted translates.
  std::vector<std::vector<double>> curves;
  /// Largest ratio of Gram eigenvalues seen, after the ridge.
  double max_condition = 0.0;
};

ResidualReport completeness_residual(const qha::SampledOperator& s, const TranslateSet& lambda,
                                     std::span<const qha::SampledOperator> targets);

/// rho(F_sigma phi) for phi = classK_window sampled on the grid.
qha::SampledOperator classK_operator(const qha::Grid& g);

}  // namespace optrans
