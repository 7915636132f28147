#include "optrans/qha.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "optrans/error.hpp"
#include "optrans/kernels.hpp"

namespace optrans::qha {

namespace {

std::size_t wrap(long i, std::size_t n) {
  const long m = static_cast<long>(n);
  long r = i % m;
  if (r < 0) r += m;
  return static_cast<std::size_t>(r);
}

// centred representative of i mod n in [-n/2, n/2)
long centre(long i, std::size_t n) {
  const long r = static_cast<long>(wrap(i, n));
  return r >= static_cast<long>(n / 2) ? r - static_cast<long>(n) : r;
}

long nearest_integer(double v, const char* what, double value) {
  const double r = std::round(v);
  if (!std::isfinite(v) || std::abs(v - r) > 1e-9 * std::max(1.0, std::abs(v))) {
    std::ostringstream msg;
    msg << what << " = " << value << " is not on the sampling lattice (ratio " << v << " is not an integer)";
    throw MisalignedPoint(msg.str());
  }
  return static_cast<long>(r);
}

// e^{2 pi i w t_j} for w = b/L: unit(2bj - bN)
std::vector<cplx> modulation(const Grid& g, long b) {
  const long n = static_cast<long>(g.n());
  std::vector<cplx> m(g.n());
  for (long j = 0; j < n; ++j) m[static_cast<std::size_t>(j)] = g.unit(2 * b * j - b * n);
  return m;
}

}  // namespace

Grid::Grid(std::size_t n, double l) : n_(n), l_(l) {
  if (n < 8 || (n & (n - 1)) != 0) {
    throw InvalidArgument("grid size must be a power of two >= 8, got " + std::to_string(n));
  }
  if (!(l > 0.0) || !std::isfinite(l)) throw InvalidArgument("grid length must be positive, got " + std::to_string(l));
  roots_.resize(2 * n);
  for (std::size_t r = 0; r < 2 * n; ++r) {
    roots_[r] = std::polar(1.0, std::numbers::pi * static_cast<double>(r) / static_cast<double>(n));
  }
}

cplx Grid::unit(long r) const noexcept { return roots_[wrap(r, 2 * n_)]; }

void require_same_grid(const Grid& a, const Grid& b) {
  if (!(a == b)) {
    std::ostringstream msg;
    msg << "grid mismatch: (N=" << a.n() << ", L=" << a.l() << ") vs (N=" << b.n() << ", L=" << b.l() << ")";
    throw GridMismatch(msg.str());
  }
}

double symplectic_form(const PhaseSpacePoint& z1, const PhaseSpacePoint& z2) noexcept {
  return z1.w * z2.x - z2.w * z1.x;
}

GridShift align(const Grid& g, const PhaseSpacePoint& z) {
  return {nearest_integer(z.x / g.h(), "x", z.x), nearest_integer(z.w * g.l(), "w", z.w)};
}

PhaseSpacePoint point_of(const Grid& g, GridShift s) noexcept {
  return {static_cast<double>(s.a) * g.h(), static_cast<double>(s.b) / g.l()};
}

SampledFunction::SampledFunction(Grid g) : grid_(std::move(g)), samples_(grid_.n()) {}

SampledFunction::SampledFunction(Grid g, std::vector<cplx> samples) : grid_(std::move(g)), samples_(std::move(samples)) {
  if (samples_.size() != grid_.n()) throw GridMismatch("sample count differs from the grid size");
}

SampledFunction SampledFunction::sample(Grid g, const std::function<cplx(double)>& f) {
  SampledFunction s(std::move(g));
  for (std::size_t j = 0; j < s.grid_.n(); ++j) s.samples_[j] = f(s.grid_.t(j));
  return s;
}

cplx inner(const SampledFunction& f, const SampledFunction& g) {
  require_same_grid(f.grid(), g.grid());
  // dotc conjugates its first argument
  return f.grid().h() * kernels::dotc(g.samples(), f.samples());
}

double norm(const SampledFunction& f) { return std::sqrt(f.grid().h() * kernels::norm_sq(f.samples())); }

SampledOperator::SampledOperator(Grid g) : grid_(std::move(g)), kernel_(grid_.n() * grid_.n()) {}

SampledOperator::SampledOperator(Grid g, std::vector<cplx> kernel) : grid_(std::move(g)), kernel_(std::move(kernel)) {
  if (kernel_.size() != grid_.n() * grid_.n()) throw GridMismatch("kernel is not N x N for its grid");
}

SampledOperator SampledOperator::rank_one(const SampledFunction& phi1, const SampledFunction& phi2) {
  require_same_grid(phi1.grid(), phi2.grid());
  SampledOperator op(phi1.grid());
  const std::size_t n = op.n();
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t c = 0; c < n; ++c) op.kernel_[j * n + c] = phi2[j] * std::conj(phi1[c]);
  }
  return op;
}

SampledOperator SampledOperator::from_matrix(Grid g, std::vector<cplx> m) {
  SampledOperator op(std::move(g), std::move(m));
  const double inv_h = 1.0 / op.grid_.h();
  for (auto& v : op.kernel_) v *= inv_h;
  return op;
}

std::vector<cplx> SampledOperator::matrix() const {
  std::vector<cplx> m(kernel_);
  const double h = grid_.h();
  for (auto& v : m) v *= h;
  return m;
}

SampledFunction SampledOperator::apply(const SampledFunction& phi) const {
  require_same_grid(grid_, phi.grid());
  SampledFunction out(grid_);
  const std::size_t n = this->n();
  for (std::size_t j = 0; j < n; ++j) {
    out.samples()[j] = grid_.h() * kernels::dotu({kernel_.data() + j * n, n}, phi.samples());
  }
  return out;
}

cplx trace(const SampledOperator& s) {
  cplx acc{};
  for (std::size_t j = 0; j < s.n(); ++j) acc += s.k(j, j);
  return s.grid().h() * acc;
}

cplx trace_pairing(const SampledOperator& s, const SampledOperator& t) {
  require_same_grid(s.grid(), t.grid());
  const double h = s.grid().h();
  return h * h * kernels::dotc(t.kernel(), s.kernel());
}

SampledOperator adjoint(const SampledOperator& s) {
  SampledOperator out(s.grid());
  const std::size_t n = s.n();
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t c = 0; c < n; ++c) out.kernel()[j * n + c] = std::conj(s.k(c, j));
  }
  return out;
}

SampledOperator add(const SampledOperator& a, const SampledOperator& b) {
  require_same_grid(a.grid(), b.grid());
  SampledOperator out(a.grid(), std::vector<cplx>(a.kernel().begin(), a.kernel().end()));
  kernels::axpy(1.0, b.kernel(), out.kernel());
  return out;
}

SampledOperator scale(const SampledOperator& a, cplx alpha) {
  SampledOperator out(a.grid());
  kernels::axpy(alpha, a.kernel(), out.kernel());
  return out;
}

double max_abs_diff(const SampledOperator& a, const SampledOperator& b) {
  require_same_grid(a.grid(), b.grid());
  double m = 0.0;
  for (std::size_t i = 0; i < a.kernel().size(); ++i) m = std::max(m, std::abs(a.kernel()[i] - b.kernel()[i]));
  return m;
}

SampledFunction tf_shift(const PhaseSpacePoint& z, const SampledFunction& phi) {
  const Grid& g = phi.grid();
  const auto s = align(g, z);
  const auto mod = modulation(g, s.b);
  SampledFunction out(g);
  for (std::size_t j = 0; j < g.n(); ++j) {
    out.samples()[j] = mod[j] * phi[wrap(static_cast<long>(j) - s.a, g.n())];
  }
  return out;
}

SampledOperator heisenberg_translate(const SampledOperator& op, const PhaseSpacePoint& z) {
  const Grid& g = op.grid();
  const auto s = align(g, z);
  const std::size_t n = g.n();
  SampledOperator out(g);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t sj = wrap(static_cast<long>(j) - s.a, n);
    for (std::size_t c = 0; c < n; ++c) {
      const std::size_t sc = wrap(static_cast<long>(c) - s.a, n);
      const long dj = static_cast<long>(j) - static_cast<long>(c);
      out.kernel()[j * n + c] = g.unit(2 * s.b * dj) * op.k(sj, sc);
    }
  }
  return out;
}

SampledOperator parity_conjugate(const SampledOperator& t) {
  const std::size_t n = t.n();
  SampledOperator out(t.grid());
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t c = 0; c < n; ++c) out.kernel()[j * n + c] = t.k((n - j) % n, (n - c) % n);
  }
  return out;
}

PhaseSpaceMap::PhaseSpaceMap(Grid g) : grid_(std::move(g)), values_(grid_.n() * grid_.n()) {}

PhaseSpaceMap::PhaseSpaceMap(Grid g, std::vector<cplx> values) : grid_(std::move(g)), values_(std::move(values)) {
  if (values_.size() != grid_.n() * grid_.n()) throw GridMismatch("phase-space map is not N x N for its grid");
}

PhaseSpaceMap PhaseSpaceMap::sample(Grid g, const std::function<cplx(const PhaseSpacePoint&)>& f) {
  PhaseSpaceMap m(std::move(g));
  const long lo = m.grid_.lo();
  for (long a = lo; a < -lo; ++a) {
    for (long b = lo; b < -lo; ++b) m.at(a, b) = f(m.point(a, b));
  }
  return m;
}

std::size_t PhaseSpaceMap::idx(long a, long b) const {
  const long lo = grid_.lo();
  if (a < lo || a >= -lo || b < lo || b >= -lo) {
    throw MisalignedPoint("phase-space index (" + std::to_string(a) + ", " + std::to_string(b) +
                          ") outside the grid window");
  }
  return static_cast<std::size_t>(a - lo) * n() + static_cast<std::size_t>(b - lo);
}

cplx& PhaseSpaceMap::at(long a, long b) { return values_[idx(a, b)]; }
cplx PhaseSpaceMap::at(long a, long b) const { return values_[idx(a, b)]; }

double PhaseSpaceMap::max_abs() const {
  double m = 0.0;
  for (auto v : values_) m = std::max(m, std::abs(v));
  return m;
}

double max_abs_diff(const PhaseSpaceMap& a, const PhaseSpaceMap& b) {
  require_same_grid(a.grid(), b.grid());
  double m = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
  return m;
}

std::vector<cplx> fourier_wigner(const SampledOperator& s, std::span<const PhaseSpacePoint> zs) {
  const Grid& g = s.grid();
  const std::size_t n = g.n();
  const double h = g.h();
  std::vector<cplx> out;
  out.reserve(zs.size());
  std::vector<cplx> diag(n);
  for (const auto& z : zs) {
    const auto sh = align(g, z);
    // tr(pi(-z) S) = h sum_j e^{-2 pi i w t_j} K_{j+a, j}
    for (std::size_t j = 0; j < n; ++j) diag[j] = s.k(wrap(static_cast<long>(j) + sh.a, n), j);
    auto mod = modulation(g, -sh.b);
    out.push_back(g.unit(-sh.a * sh.b) * h * kernels::dotu(mod, diag));
  }
  return out;
}

PhaseSpaceMap fourier_wigner(const SampledOperator& s) {
  const Grid& g = s.grid();
  const std::size_t n = g.n();
  const long lo = g.lo();
  const double h = g.h();
  std::vector<std::vector<cplx>> mods;
  mods.reserve(n);
  for (long b = lo; b < -lo; ++b) mods.push_back(modulation(g, -b));
  PhaseSpaceMap out(g);
  std::vector<cplx> diag(n);
  for (long a = lo; a < -lo; ++a) {
    for (std::size_t j = 0; j < n; ++j) diag[j] = s.k(wrap(static_cast<long>(j) + a, n), j);
    for (long b = lo; b < -lo; ++b) {
      out.at(a, b) = g.unit(-a * b) * h * kernels::dotu(mods[static_cast<std::size_t>(b - lo)], diag);
    }
  }
  return out;
}

PhaseSpaceMap symplectic_fourier(const PhaseSpaceMap& f) {
  const Grid& g = f.grid();
  const std::size_t n = g.n();
  const long lo = g.lo();
  // sigma(z, s) = (b a' - b' a) / N
  // G[a][a'] = sum_b' f(a', b') e^{2 pi i b' a / N}
  std::vector<cplx> gt(n * n), e(n);
  for (long a = lo; a < -lo; ++a) {
    for (long bp = lo; bp < -lo; ++bp) e[static_cast<std::size_t>(bp - lo)] = g.unit(2 * bp * a);
    for (long ap = lo; ap < -lo; ++ap) {
      const std::span<const cplx> row(f.values().data() + static_cast<std::size_t>(ap - lo) * n, n);
      gt[static_cast<std::size_t>(a - lo) * n + static_cast<std::size_t>(ap - lo)] = kernels::dotu(row, e);
    }
  }
  PhaseSpaceMap out(g);
  const double area = g.cell_area();
  for (long b = lo; b < -lo; ++b) {
    for (long ap = lo; ap < -lo; ++ap) e[static_cast<std::size_t>(ap - lo)] = g.unit(-2 * b * ap);
    for (long a = lo; a < -lo; ++a) {
      const std::span<const cplx> row(gt.data() + static_cast<std::size_t>(a - lo) * n, n);
      out.at(a, b) = area * kernels::dotu(row, e);
    }
  }
  return out;
}

SampledOperator weyl_quantize(const PhaseSpaceMap& f) {
  const Grid& g = f.grid();
  const std::size_t n = g.n();
  const long lo = g.lo();
  const double area = g.cell_area();
  // c[a][b] = f(a,b) e^{-pi i a b / N} / N ; A_{jk} = sum_b c[a(j-k)][b] e^{2 pi i w_b t_j}
  std::vector<cplx> c(n * n);
  for (long a = lo; a < -lo; ++a) {
    for (long b = lo; b < -lo; ++b) {
      c[static_cast<std::size_t>(a - lo) * n + static_cast<std::size_t>(b - lo)] = area * g.unit(-a * b) * f.at(a, b);
    }
  }
  std::vector<cplx> mod_j(n);
  std::vector<cplx> m(n * n);
  for (std::size_t j = 0; j < n; ++j) {
    for (long b = lo; b < -lo; ++b) {
      mod_j[static_cast<std::size_t>(b - lo)] = g.unit(2 * b * static_cast<long>(j) - b * static_cast<long>(n));
    }
    for (std::size_t k = 0; k < n; ++k) {
      const long a = centre(static_cast<long>(j) - static_cast<long>(k), n);
      const std::span<const cplx> row(c.data() + static_cast<std::size_t>(a - lo) * n, n);
      m[j * n + k] = kernels::dotu(row, mod_j);
    }
  }
  return SampledOperator::from_matrix(g, std::move(m));
}

std::vector<cplx> operator_convolve(const SampledOperator& s, const SampledOperator& t,
                                    std::span<const PhaseSpacePoint> zs) {
  require_same_grid(s.grid(), t.grid());
  const Grid& g = s.grid();
  const std::size_t n = g.n();
  const auto as = s.matrix();
  const auto bm = parity_conjugate(t).matrix();
  std::vector<cplx> out;
  out.reserve(zs.size());
  for (const auto& z : zs) {
    const auto sh = align(g, z);
    // tr(A_S alpha_z(B)) = sum_{k,j} A_S[k][j] B[j-a][k-a] e^{2 pi i b (j-k) / N}
    cplx acc{};
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t ka = wrap(static_cast<long>(k) - sh.a, n);
      for (std::size_t j = 0; j < n; ++j) {
        const std::size_t ja = wrap(static_cast<long>(j) - sh.a, n);
        acc += as[k * n + j] * bm[ja * n + ka] * g.unit(2 * sh.b * (static_cast<long>(j) - static_cast<long>(k)));
      }
    }
    out.push_back(acc);
  }
  return out;
}

PhaseSpaceMap operator_convolve(const SampledOperator& s, const SampledOperator& t) {
  require_same_grid(s.grid(), t.grid());
  const Grid& g = s.grid();
  const std::size_t n = g.n();
  const long lo = g.lo();
  const auto as = s.matrix();
  const auto bm = parity_conjugate(t).matrix();

  // diagonals of A_S: diag_s[r][k] = A_S[k][k+r]
  std::vector<cplx> diag_s(n * n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t k = 0; k < n; ++k) diag_s[r * n + k] = as[k * n + (k + r) % n];
  }
  std::vector<std::vector<cplx>> phases(n, std::vector<cplx>(n));
  for (long b = lo; b < -lo; ++b) {
    for (std::size_t r = 0; r < n; ++r) phases[static_cast<std::size_t>(b - lo)][r] = g.unit(2 * b * static_cast<long>(r));
  }

  PhaseSpaceMap out(g);
  std::vector<cplx> d(n), col(n);
  for (long a = lo; a < -lo; ++a) {
    // D_a(r) = sum_k A_S[k][k+r] B[k+r-a][k-a]
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t k = 0; k < n; ++k) {
        col[k] = bm[wrap(static_cast<long>(k + r) - a, n) * n + wrap(static_cast<long>(k) - a, n)];
      }
      d[r] = kernels::dotu({diag_s.data() + r * n, n}, col);
    }
    for (long b = lo; b < -lo; ++b) out.at(a, b) = kernels::dotu(d, phases[static_cast<std::size_t>(b - lo)]);
  }
  return out;
}

double verify_convolution_theorem(const SampledOperator& s, const SampledOperator& t) {
  require_same_grid(s.grid(), t.grid());
  const auto lhs = symplectic_fourier(operator_convolve(s, t));
  const auto fs = fourier_wigner(s);
  const auto ft = fourier_wigner(t);
  double err = 0.0;
  for (std::size_t i = 0; i < lhs.values().size(); ++i) {
    err = std::max(err, std::abs(lhs.values()[i] - fs.values()[i] * ft.values()[i]));
  }
  return err;
}

double verify_convolution_theorem(const SampledOperator& s, const SampledOperator& t,
                                  std::span<const PhaseSpacePoint> zs) {
  require_same_grid(s.grid(), t.grid());
  const Grid& g = s.grid();
  const auto lhs = symplectic_fourier(operator_convolve(s, t));
  const auto fs = fourier_wigner(s, zs);
  const auto ft = fourier_wigner(t, zs);
  double err = 0.0;
  for (std::size_t i = 0; i < zs.size(); ++i) {
    const auto sh = align(g, zs[i]);
    err = std::max(err, std::abs(lhs.at(sh.a, sh.b) - fs[i] * ft[i]));
  }
  return err;
}

double convolution_theorem_discrepancy(const SampledOperator& s, const SampledOperator& t,
                                       const std::function<cplx(const PhaseSpacePoint&)>& reference,
                                       std::span<const PhaseSpacePoint> zs) {
  require_same_grid(s.grid(), t.grid());
  const Grid& g = s.grid();
  const auto lhs = symplectic_fourier(operator_convolve(s, t));
  double err = 0.0;
  for (const auto& z : zs) {
    const auto sh = align(g, z);
    err = std::max(err, std::abs(lhs.at(centre(sh.a, g.n()), centre(sh.b, g.n())) - reference(z)));
  }
  return err;
}

std::vector<PhaseSpacePoint> refinement_region(const Grid& coarse, const Grid& fine) {
  if (coarse.l() != fine.l()) throw GridMismatch("refinement grids need the same length L");
  const double l = coarse.l();
  const long nx = static_cast<long>(coarse.n() / 2);
  const long nw = static_cast<long>(fine.n() / 2);
  std::vector<PhaseSpacePoint> pts;
  for (long a = -nx; a < nx; ++a) {
    for (long b = -nw; b < nw; ++b) pts.push_back({static_cast<double>(a) * coarse.h(), static_cast<double>(b) / l});
  }
  return pts;
}

SampledFunction gaussian(const Grid& g) {
  const double c = std::pow(2.0, 0.25);
  return SampledFunction::sample(g, [c](double t) { return cplx(c * std::exp(-std::numbers::pi * t * t)); });
}

SampledOperator gaussian_projection(const Grid& g) {
  const auto phi = gaussian(g);
  return SampledOperator::rank_one(phi, phi);
}

std::vector<PhaseSpacePoint> rectangle(double half_x, double step_x, double half_w, double step_w) {
  if (!(step_x > 0) || !(step_w > 0)) throw InvalidArgument("rectangle steps must be positive");
  const long nx = static_cast<long>(std::floor(half_x / step_x + 1e-9));
  const long nw = static_cast<long>(std::floor(half_w / step_w + 1e-9));
  std::vector<PhaseSpacePoint> pts;
  for (long i = -nx; i <= nx; ++i) {
    for (long j = -nw; j <= nw; ++j) pts.push_back({static_cast<double>(i) * step_x, static_cast<double>(j) * step_w});
  }
  return pts;
}

double quantization_roundtrip_error(const Grid& g, const std::function<cplx(const PhaseSpacePoint&)>& f,
                                    std::span<const PhaseSpacePoint> zs) {
  const auto op = weyl_quantize(PhaseSpaceMap::sample(g, f));
  const auto back = fourier_wigner(op, zs);
  double err = 0.0;
  for (std::size_t i = 0; i < zs.size(); ++i) err = std::max(err, std::abs(back[i] - f(zs[i])));
  return err;
}

}  // namespace optrans::qha
