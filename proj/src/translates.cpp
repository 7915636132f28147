#include "optrans/translates.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "optrans/error.hpp"
#include "optrans/kernels.hpp"

namespace optrans {

namespace {

using qha::cplx;

long on_boundary(double v, long r, const char* what) {
  const double s = v * static_cast<double>(r);
  const double k = std::round(s);
  if (std::abs(s - k) > 1e-9) {
    std::ostringstream msg;
    msg << what << " = " << v << " is not a cell boundary at resolution " << r;
    throw GridMismatch(msg.str());
  }
  return static_cast<long>(k);
}

long integral_ratio(double v, const char* what) {
  const double k = std::round(v);
  if (k < 1 || std::abs(v - k) > 1e-9) {
    std::ostringstream msg;
    msg << what << " = " << v << " must be a positive integer so unit shifts move whole cells";
    throw GridMismatch(msg.str());
  }
  return static_cast<long>(k);
}

long floor_div(long a, long b) {
  long q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

long wrap(long i, long m) {
  long r = i % m;
  return r < 0 ? r + m : r;
}

struct CellRatios {
  long rx, rw;
};

CellRatios ratios(const qha::Grid& g) {
  return {integral_ratio(1.0 / g.h(), "N/L"), integral_ratio(g.l(), "L")};
}

std::vector<LatticePoint> l1_ball(int d, std::int64_t radius) {
  const std::size_t n = static_cast<std::size_t>(2 * d);
  std::vector<LatticePoint> out;
  std::vector<std::int64_t> cur(n, -radius);
  while (true) {
    std::int64_t s = 0;
    for (auto v : cur) s += v < 0 ? -v : v;
    if (s <= radius) out.emplace_back(std::span<const std::int64_t>(cur));
    std::size_t pos = n;
    while (pos > 0 && cur[pos - 1] == radius) cur[--pos] = -radius;
    if (pos == 0) break;
    ++cur[pos - 1];
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    const auto na = norm1(a), nb = norm1(b);
    return na != nb ? na < nb : a < b;
  });
  return out;
}

}  // namespace

SupportSet::SupportSet(long rx, long rw, long i0, long j0, std::size_t nx, std::size_t nw)
    : rx_(rx), rw_(rw), i0_(i0), j0_(j0), nx_(nx), nw_(nw), bits_(nx * nw, 0) {
  if (rx < 1 || rw < 1) throw InvalidArgument("support set needs at least one cell per unit interval");
}

SupportSet SupportSet::box(long rx, long rw, double x0, double x1, double w0, double w1) {
  const long i0 = on_boundary(x0, rx, "x0"), i1 = on_boundary(x1, rx, "x1");
  const long j0 = on_boundary(w0, rw, "w0"), j1 = on_boundary(w1, rw, "w1");
  const long nx = std::max(0L, i1 - i0), nw = std::max(0L, j1 - j0);
  SupportSet s(rx, rw, i0, j0, static_cast<std::size_t>(nx), static_cast<std::size_t>(nw));
  std::fill(s.bits_.begin(), s.bits_.end(), 1);
  return s;
}

SupportSet SupportSet::from_map(const qha::PhaseSpaceMap& f, double threshold) {
  const auto r = ratios(f.grid());
  const long lo = f.grid().lo();
  const std::size_t n = f.n();
  SupportSet s(r.rx, r.rw, lo, lo, n, n);
  const double cut = threshold * f.max_abs();
  for (long a = lo; a < -lo; ++a) {
    for (long b = lo; b < -lo; ++b) {
      if (std::abs(f.at(a, b)) > cut) s.set(a, b);
    }
  }
  return s;
}

bool SupportSet::contains(long i, long j) const noexcept {
  if (i < i0_ || j < j0_) return false;
  const auto di = static_cast<std::size_t>(i - i0_), dj = static_cast<std::size_t>(j - j0_);
  if (di >= nx_ || dj >= nw_) return false;
  return bits_[di * nw_ + dj] != 0;
}

void SupportSet::set(long i, long j, bool v) {
  if (i < i0_ || j < j0_ || static_cast<std::size_t>(i - i0_) >= nx_ || static_cast<std::size_t>(j - j0_) >= nw_) {
    throw InvalidArgument("cell outside the support grid");
  }
  bits_[static_cast<std::size_t>(i - i0_) * nw_ + static_cast<std::size_t>(j - j0_)] = v ? 1 : 0;
}

std::size_t SupportSet::count() const noexcept { return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1)); }

SupportSet SupportSet::shifted(long n1, long n2) const {
  SupportSet s = *this;
  s.i0_ = checked::add(i0_, checked::mul(n1, rx_));
  s.j0_ = checked::add(j0_, checked::mul(n2, rw_));
  return s;
}

SpecialFormResult is_special_form(const SupportSet& omega) {
  SpecialFormResult res;
  const long rx = omega.rx(), rw = omega.rw();
  const long imax = omega.i0() + static_cast<long>(omega.nx()) - 1;
  const long jmax = omega.j0() + static_cast<long>(omega.nw()) - 1;

  auto covering = [&](long i, long j) {
    std::vector<std::pair<long, long>> shifts;
    if (omega.nx() == 0 || omega.nw() == 0) return shifts;
    const long n1lo = -floor_div(i - omega.i0(), rx), n1hi = floor_div(imax - i, rx);
    const long n2lo = -floor_div(j - omega.j0(), rw), n2hi = floor_div(jmax - j, rw);
    for (long n1 = n1lo; n1 <= n1hi; ++n1) {
      for (long n2 = n2lo; n2 <= n2hi; ++n2) {
        if (omega.contains(i + n1 * rx, j + n2 * rw)) shifts.emplace_back(n1, n2);
      }
    }
    return shifts;
  };
  auto scan = [&](bool unit_cell_only) {
    for (long i = -rx; i < rx; ++i) {
      for (long j = -rw; j < rw; ++j) {
        const bool in_unit = i >= 0 && j >= 0;
        if (in_unit != unit_cell_only) continue;
        auto shifts = covering(i, j);
        if (shifts.size() > 1) {
          res.holds = false;
          res.witness = qha::PhaseSpacePoint{static_cast<double>(i) / static_cast<double>(rx),
                                             static_cast<double>(j) / static_cast<double>(rw)};
          res.shifts = std::move(shifts);
          return true;
        }
      }
    }
    return false;
  };
  if (!scan(true)) scan(false);
  return res;
}

SpanMembership span_membership(const qha::SampledOperator& s, const qha::SampledOperator& t, double threshold) {
  qha::require_same_grid(s.grid(), t.grid());
  if (!(threshold > 0.0)) throw InvalidArgument("support threshold must be positive");
  const auto fs = qha::fourier_wigner(s);
  const auto ft = qha::fourier_wigner(t);
  const double cs = threshold * fs.max_abs(), ct = threshold * ft.max_abs();
  SpanMembership r;
  const long lo = s.grid().lo();
  for (long a = lo; a < -lo; ++a) {
    for (long b = lo; b < -lo; ++b) {
      if (std::abs(ft.at(a, b)) > ct && !(std::abs(fs.at(a, b)) > cs)) {
        if (r.offending_cells == 0) r.first_offender = fs.point(a, b);
        ++r.offending_cells;
        r.member = false;
      }
    }
  }
  return r;
}

qha::PhaseSpaceMap integer_orthogonal_witness(const qha::PhaseSpaceMap& g_hat, double x0, double w0) {
  const auto& g = g_hat.grid();
  const auto r = ratios(g);
  const long a0 = on_boundary(x0, r.rx, "x0"), b0 = on_boundary(w0, r.rw, "w0");
  const long lo = g.lo();
  if (a0 < lo || a0 + 2 * r.rx > -lo || b0 < lo || b0 + r.rw > -lo) {
    throw InvalidArgument("cells A and A+e1 do not fit inside the phase-space window");
  }
  double on_a = 0.0, on_shift = 0.0;
  for (long a = a0; a < a0 + r.rx; ++a) {
    for (long b = b0; b < b0 + r.rw; ++b) {
      on_a = std::max(on_a, std::abs(g_hat.at(a, b)));
      on_shift = std::max(on_shift, std::abs(g_hat.at(a + r.rx, b)));
    }
  }
  if (on_a == 0.0 || on_shift == 0.0) {
    std::ostringstream msg;
    msg << "window vanishes on the cell at (" << x0 << ", " << w0 << ")" << (on_a == 0.0 ? "" : " shifted by e1")
        << "; pick another cell";
    throw DegenerateWitness(msg.str());
  }
  qha::PhaseSpaceMap h(g);
  for (long a = a0; a < a0 + r.rx; ++a) {
    for (long b = b0; b < b0 + r.rw; ++b) {
      h.at(a, b) = std::conj(g_hat.at(a + r.rx, b));
      h.at(a + r.rx, b) = -std::conj(g_hat.at(a, b));
    }
  }
  return h;
}

double periodized_product_max(const qha::PhaseSpaceMap& h, const qha::PhaseSpaceMap& g) {
  qha::require_same_grid(h.grid(), g.grid());
  const auto r = ratios(g.grid());
  std::vector<cplx> bucket(static_cast<std::size_t>(r.rx * r.rw));
  const long lo = g.grid().lo();
  for (long a = lo; a < -lo; ++a) {
    for (long b = lo; b < -lo; ++b) {
      bucket[static_cast<std::size_t>(wrap(a, r.rx) * r.rw + wrap(b, r.rw))] += h.at(a, b) * std::conj(g.at(a, b));
    }
  }
  double m = 0.0;
  for (auto v : bucket) m = std::max(m, std::abs(v));
  return m;
}

std::vector<double> Translate::lambda() const {
  std::vector<double> l(gamma);
  for (std::size_t i = 0; i < l.size(); ++i) l[i] += static_cast<double>(n[i]);
  return l;
}

TranslateSet perturbed_lattice(double a, std::int64_t radius, int d) {
  if (!(a > 0.0 && a < 1.0)) throw InvalidArgument("decay base must lie in (0,1), got " + std::to_string(a));
  if (radius < 0) throw InvalidArgument("lattice radius must be nonnegative");
  if (d < 1 || d > kMaxDim) throw DimensionMismatch("translate set dimension out of range");
  TranslateSet set;
  set.a = a;
  set.d = d;
  for (auto& n : l1_ball(d, radius)) {
    const double bound = std::pow(a, static_cast<double>(norm1(n)));
    const double g = bound / 2;
    if (!(g > 0.0)) throw InvalidArgument("perturbation a^|n| underflows at |n|_1 = " + std::to_string(norm1(n)));
    std::vector<double> gamma(static_cast<std::size_t>(2 * d), 0.0);
    gamma[0] = g;
    set.points.push_back({std::move(n), std::move(gamma)});
  }
  return set;
}

double classK_window(std::span<const double> t) {
  double r2 = 0.0, prod = 1.0;
  for (double s : t) {
    if (s == std::round(s)) return 0.0;
    const double sn = std::sin(std::numbers::pi * s);
    r2 += s * s;
    prod *= std::exp(-1.0 / (sn * sn));
  }
  return std::exp(-std::numbers::pi * r2) * prod;
}

qha::SampledOperator classK_operator(const qha::Grid& g) {
  const auto phi = qha::PhaseSpaceMap::sample(g, [](const qha::PhaseSpacePoint& z) {
    const double t[2] = {z.x, z.w};
    return cplx(classK_window(t));
  });
  return qha::weyl_quantize(qha::symplectic_fourier(phi));
}

ResidualReport completeness_residual(const qha::SampledOperator& s, const TranslateSet& lambda,
                                     std::span<const qha::SampledOperator> targets) {
  if (lambda.d != 1) throw DimensionMismatch("the residual probe samples phase space R^2 only (d = 1)");
  const auto& g = s.grid();
  for (const auto& t : targets) qha::require_same_grid(g, t.grid());

  ResidualReport rep;
  std::vector<qha::SampledOperator> basis;
  for (const auto& tr : lambda.points) {
    const auto l = tr.lambda();
    GridTranslate gt;
    gt.n = tr.n;
    gt.exact = {l[0], l[1]};
    gt.rounded = {std::round(l[0] / g.h()) * g.h(), std::round(l[1] * g.l()) / g.l()};
    gt.rounding = std::hypot(gt.exact.x - gt.rounded.x, gt.exact.w - gt.rounded.w);
    const double bound = std::pow(lambda.a, static_cast<double>(norm1(tr.n)));
    const bool moved = gt.rounded.x != static_cast<double>(tr.n[0]) || gt.rounded.w != static_cast<double>(tr.n[1]);
    gt.accepted = gt.rounding < bound / 4 && moved;
    if (gt.accepted) basis.push_back(qha::heisenberg_translate(s, gt.rounded));
    rep.translates.push_back(gt);
  }

  const std::size_t m = basis.size();
  Eigen::MatrixXcd gram(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      // G_ij = <V_j, V_i>
      gram(i, j) = qha::trace_pairing(basis[j], basis[i]);
      gram(j, i) = std::conj(gram(i, j));
    }
  }

  for (const auto& target : targets) {
    const double tnorm = std::sqrt(std::max(0.0, qha::trace_pairing(target, target).real()));
    Eigen::VectorXcd rhs(m);
    for (std::size_t i = 0; i < m; ++i) rhs(i) = qha::trace_pairing(target, basis[i]);
    std::vector<double> curve;
    for (std::size_t k = 1; k <= m; ++k) {
      Eigen::MatrixXcd gk = gram.topLeftCorner(k, k);
      const double ridge = 1e-12 * gk.diagonal().real().maxCoeff();
      gk.diagonal().array() += ridge;
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(gk, Eigen::EigenvaluesOnly);
      const double lmin = eig.eigenvalues().minCoeff(), lmax = eig.eigenvalues().maxCoeff();
      const double cond = lmin > 0 ? lmax / lmin : std::numeric_limits<double>::infinity();
      rep.max_condition = std::max(rep.max_condition, cond);
      const Eigen::LDLT<Eigen::MatrixXcd> ldlt(gk);
      const Eigen::VectorXcd c = ldlt.solve(rhs.head(k));
      if (ldlt.info() != Eigen::Success || !c.allFinite()) {
        std::ostringstream msg;
        msg << "Gram system of " << k << " translates is singular (condition estimate " << cond << ")";
        throw SingularGram(msg.str(), cond);
      }
      std::vector<cplx> r(target.kernel().begin(), target.kernel().end());
      for (std::size_t j = 0; j < k; ++j) kernels::axpy(-c(static_cast<Eigen::Index>(j)), basis[j].kernel(), r);
      const double rn = g.h() * std::sqrt(kernels::norm_sq(r));
      curve.push_back(tnorm > 0 ? rn / tnorm : 0.0);
    }
    rep.curves.push_back(std::move(curve));
  }
  return rep;
}

}  // namespace optrans
