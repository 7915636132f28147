#pragma once

// Periodic sampling of L^2(R) and of operator kernels on [-L/2, L/2).
//
// Shifts are restricted to x = a*h (h = L/N) and w = b/L with integer a, b, so
// pi(z) is an exact permutation-times-phase and every transform below is a
// finite sum. The phase-space grid is a, b in [-N/2, N/2); cell area h/L = 1/N.

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace optrans::qha {

using cplx = std::complex<double>;

class Grid {
 public:
  /// N >= 8 a power of two, L > 0.
  Grid(std::size_t n, double l);

  std::size_t n() const noexcept { return n_; }
  double l() const noexcept { return l_; }
  double h() const noexcept { return l_ / static_cast<double>(n_); }
  double t(std::size_t j) const noexcept { return -l_ / 2 + static_cast<double>(j) * h(); }
  /// Phase-space cell area h * (1/L).
  double cell_area() const noexcept { return 1.0 / static_cast<double>(n_); }
  /// Lowest centred index, -N/2.
  long lo() const noexcept { return -static_cast<long>(n_ / 2); }

  /// e^{i pi r / N}
  cplx unit(long r) const noexcept;

  friend bool operator==(const Grid& a, const Grid& b) noexcept { return a.n_ == b.n_ && a.l_ == b.l_; }

 private:
  std::size_t n_;
  double l_;
  std::vector<cplx> roots_;  // order 2N
};

void require_same_grid(const Grid& a, const Grid& b);

struct PhaseSpacePoint {
  double x = 0.0;
  double w = 0.0;
};

/// w1 x2 - w2 x1
double symplectic_form(const PhaseSpacePoint& z1, const PhaseSpacePoint& z2) noexcept;

/// Integer lattice coordinates (a, b) of a grid-aligned point.
struct GridShift {
  long a = 0;
  long b = 0;
};

/// Throws MisalignedPoint unless x/h and w*L are integers (to 1e-9).
GridShift align(const Grid& g, const PhaseSpacePoint& z);
PhaseSpacePoint point_of(const Grid& g, GridShift s) noexcept;

class SampledFunction {
 public:
  explicit SampledFunction(Grid g);
  SampledFunction(Grid g, std::vector<cplx> samples);
  static SampledFunction sample(Grid g, const std::function<cplx(double)>& f);

  const Grid& grid() const noexcept { return grid_; }
  std::span<const cplx> samples() const noexcept { return samples_; }
  std::span<cplx> samples() noexcept { return samples_; }
  cplx operator[](std::size_t j) const noexcept { return samples_[j]; }

 private:
  Grid grid_;
  std::vector<cplx> samples_;
};

/// h * sum f conj(g)
cplx inner(const SampledFunction& f, const SampledFunction& g);
double norm(const SampledFunction& f);

/// Kernel K with (K phi)(t_j) = h sum_k K_{jk} phi(t_k). Stored row-major.
class SampledOperator {
 public:
  explicit SampledOperator(Grid g);
  SampledOperator(Grid g, std::vector<cplx> kernel);
  /// phi1 (x) phi2 : psi -> <psi, phi1> phi2
  static SampledOperator rank_one(const SampledFunction& phi1, const SampledFunction& phi2);
  /// Operator whose matrix on sample vectors is m (that is, K = m / h).
  static SampledOperator from_matrix(Grid g, std::vector<cplx> m);

  const Grid& grid() const noexcept { return grid_; }
  std::size_t n() const noexcept { return grid_.n(); }
  std::span<const cplx> kernel() const noexcept { return kernel_; }
  std::span<cplx> kernel() noexcept { return kernel_; }
  cplx k(std::size_t j, std::size_t c) const noexcept { return kernel_[j * n() + c]; }
  /// h * K, the matrix acting on sample vectors.
  std::vector<cplx> matrix() const;

  SampledFunction apply(const SampledFunction& phi) const;

 private:
  Grid grid_;
  std::vector<cplx> kernel_;
};

/// h sum_j K_jj
cplx trace(const SampledOperator& s);
/// tr(S T*)
cplx trace_pairing(const SampledOperator& s, const SampledOperator& t);
SampledOperator adjoint(const SampledOperator& s);
SampledOperator add(const SampledOperator& a, const SampledOperator& b);
SampledOperator scale(const SampledOperator& a, cplx alpha);
double max_abs_diff(const SampledOperator& a, const SampledOperator& b);

/// (pi(z) phi)(t) = e^{2 pi i w t} phi(t - x), circular in t.
SampledFunction tf_shift(const PhaseSpacePoint& z, const SampledFunction& phi);
/// pi(z) S pi(z)*
SampledOperator heisenberg_translate(const SampledOperator& s, const PhaseSpacePoint& z);
/// P T P with (P phi)(t) = phi(-t), t -> -t taken modulo L.
SampledOperator parity_conjugate(const SampledOperator& t);

/// Values on the centred phase-space grid, row a (position), column b (frequency).
class PhaseSpaceMap {
 public:
  explicit PhaseSpaceMap(Grid g);
  PhaseSpaceMap(Grid g, std::vector<cplx> values);
  static PhaseSpaceMap sample(Grid g, const std::function<cplx(const PhaseSpacePoint&)>& f);

  const Grid& grid() const noexcept { return grid_; }
  std::size_t n() const noexcept { return grid_.n(); }
  std::span<const cplx> values() const noexcept { return values_; }
  std::span<cplx> values() noexcept { return values_; }

  /// a, b in [-N/2, N/2)
  cplx& at(long a, long b);
  cplx at(long a, long b) const;
  PhaseSpacePoint point(long a, long b) const noexcept { return point_of(grid_, {a, b}); }
  double max_abs() const;

 private:
  std::size_t idx(long a, long b) const;
  Grid grid_;
  std::vector<cplx> values_;
};

double max_abs_diff(const PhaseSpaceMap& a, const PhaseSpaceMap& b);

/// F_W S(z) = e^{-pi i x w} tr(pi(-z) S), at arbitrary grid-aligned points.
std::vector<cplx> fourier_wigner(const SampledOperator& s, std::span<const PhaseSpacePoint> zs);
/// On the whole phase-space grid.
PhaseSpaceMap fourier_wigner(const SampledOperator& s);

/// F_sigma f(z) = sum_s f(s) e^{-2 pi i sigma(z,s)} / N; exactly involutive on the grid.
PhaseSpaceMap symplectic_fourier(const PhaseSpaceMap& f);

/// rho(f) = sum_z f(z) e^{-pi i x w} pi(z) / N
SampledOperator weyl_quantize(const PhaseSpaceMap& f);

/// S * T(z) = tr(S alpha_z(T-check)), at grid-aligned points.
std::vector<cplx> operator_convolve(const SampledOperator& s, const SampledOperator& t,
                                    std::span<const PhaseSpacePoint> zs);
/// On the whole phase-space grid, in O(N^3).
PhaseSpaceMap operator_convolve(const SampledOperator& s, const SampledOperator& t);

/// max_z |F_sigma(S*T)(z) - F_W S(z) F_W T(z)| over the whole grid.
double verify_convolution_theorem(const SampledOperator& s, const SampledOperator& t);
/// Same, restricted to the given grid points.
double verify_convolution_theorem(const SampledOperator& s, const SampledOperator& t,
                                  std::span<const PhaseSpacePoint> zs);

/// max over zs of |F_sigma(S*T)(z) - reference(z)|, reading the grid map periodically in w.
/// With reference = the continuum product F_W S F_W T this measures how far the sampled
/// identity is from the continuum one on a fixed region.
double convolution_theorem_discrepancy(const SampledOperator& s, const SampledOperator& t,
                                       const std::function<cplx(const PhaseSpacePoint&)>& reference,
                                       std::span<const PhaseSpacePoint> zs);

/// Points with x a multiple of the coarse step in [-L/2, L/2) and w a multiple of 1/L
/// in the fine frequency window. Both grids need the same L.
std::vector<PhaseSpacePoint> refinement_region(const Grid& coarse, const Grid& fine);

/// 2^{1/4} e^{-pi t^2}
SampledFunction gaussian(const Grid& g);
/// phi (x) phi for the Gaussian above.
SampledOperator gaussian_projection(const Grid& g);

/// Points (x, w) with x a multiple of step_x and w a multiple of step_w, |x| <= half_x, |w| <= half_w.
std::vector<PhaseSpacePoint> rectangle(double half_x, double step_x, double half_w, double step_w);

/// max over zs of |F_W(rho(f_g))(z) - f(z)| where f_g samples f on g.
double quantization_roundtrip_error(const Grid& g, const std::function<cplx(const PhaseSpacePoint&)>& f,
                                    std::span<const PhaseSpacePoint> zs);

}  // namespace optrans::qha
