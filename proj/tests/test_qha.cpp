#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "optrans/qha.hpp"
#include "support.hpp"

using namespace optrans;
using namespace optrans::qha;

namespace {

constexpr double kPi = std::numbers::pi;

double gauss(double t) { return std::pow(2.0, 0.25) * std::exp(-kPi * t * t); }

// F_W(phi (x) phi)(z) for the L^2-normalised Gaussian, in closed form
double fw_gaussian(const PhaseSpacePoint& z) { return std::exp(-kPi * (z.x * z.x + z.w * z.w) / 2); }

// e^{-pi i x w} <pi(-z) phi, phi> by a midpoint rule on [-8, 8] independent of the grid
cplx fw_gaussian_quadrature(const PhaseSpacePoint& z) {
  const int m = 4000;
  const double a = -8.0, step = 16.0 / m;
  cplx acc{};
  for (int i = 0; i < m; ++i) {
    const double t = a + (i + 0.5) * step;
    acc += std::polar(1.0, -2 * kPi * z.w * t) * gauss(t + z.x) * gauss(t);
  }
  return std::polar(1.0, -kPi * z.x * z.w) * acc * step;
}

double max_gap(std::span<const cplx> a, std::span<const cplx> b) {
  double g = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) g = std::max(g, std::abs(a[i] - b[i]));
  return g;
}

PhaseSpaceMap random_map(std::mt19937_64& rng, const Grid& g) {
  PhaseSpaceMap f(g);
  for (auto& v : f.values()) v = fixtures::random_complex(rng);
  return f;
}

SampledOperator random_self_adjoint(std::mt19937_64& rng, const Grid& g) {
  const auto s = fixtures::random_sampled_operator(rng, g);
  return scale(add(s, adjoint(s)), 0.5);
}

const Grid kGrid(32, 8.0);

}  // namespace

TEST(Grid, RejectsBadSizes) {
  EXPECT_THROW(Grid(12, 8.0), InvalidArgument);
  EXPECT_THROW(Grid(4, 8.0), InvalidArgument);
  EXPECT_THROW(Grid(32, 0.0), InvalidArgument);
  EXPECT_NO_THROW(Grid(8, 1.0));
}

TEST(SymplecticForm, Examples) {
  EXPECT_EQ(symplectic_form({1, 0}, {0, 1}), -1.0);
  EXPECT_EQ(symplectic_form({0.3, 2}, {0.3, 2}), 0.0);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  for (int i = 0; i < 100; ++i) {
    const PhaseSpacePoint a{n(rng), n(rng)}, b{n(rng), n(rng)};
    EXPECT_EQ(symplectic_form(a, b), -symplectic_form(b, a));
  }
}

TEST(Align, AcceptsLatticeRejectsOthers) {
  const auto s = align(kGrid, {0.75, -0.375});
  EXPECT_EQ(s.a, 3);
  EXPECT_EQ(s.b, -3);
  EXPECT_THROW(align(kGrid, {0.1, 0.0}), MisalignedPoint);
  EXPECT_THROW(align(kGrid, {0.0, 0.01}), MisalignedPoint);
  try {
    align(kGrid, {0.3, 0.0});
  } catch (const MisalignedPoint& e) {
    EXPECT_NE(std::string(e.what()).find("x = 0.3"), std::string::npos);
  }
}

TEST(TfShift, IdentityUnitarityAndDelta) {
  std::mt19937_64 rng(2);
  const auto phi = fixtures::random_function(rng, kGrid);
  const auto same = tf_shift({0, 0}, phi);
  EXPECT_EQ(max_gap(same.samples(), phi.samples()), 0.0);
  for (int a = -20; a <= 20; a += 7) {
    for (int b = -40; b <= 40; b += 9) {
      EXPECT_NEAR(norm(tf_shift(point_of(kGrid, {a, b}), phi)), norm(phi), 1e-12);
    }
  }
  SampledFunction delta(kGrid);
  delta.samples()[5] = 1.0;
  const auto moved = tf_shift({3 * kGrid.h(), 0}, delta);
  EXPECT_EQ(moved[8], cplx(1.0));
  const auto wrapped = tf_shift({-7 * kGrid.h(), 0}, delta);
  EXPECT_EQ(wrapped[30], cplx(1.0));
}

TEST(TfShift, ShiftsTheGaussianToTMinusX) {
  const auto phi = gaussian(kGrid);
  const auto moved = tf_shift({1.0, 0.0}, phi);
  for (std::size_t j = 0; j < kGrid.n(); ++j) EXPECT_NEAR(std::abs(moved[j] - gauss(kGrid.t(j) - 1.0)), 0.0, 1e-6);
}

TEST(HeisenbergTranslate, IdentityTraceAndRankOne) {
  std::mt19937_64 rng(3);
  const auto s = fixtures::random_sampled_operator(rng, kGrid);
  EXPECT_EQ(max_abs_diff(heisenberg_translate(s, {0, 0}), s), 0.0);
  const PhaseSpacePoint z{1.25, -0.625};
  EXPECT_NEAR(std::abs(trace(heisenberg_translate(s, z)) - trace(s)), 0.0, 1e-12);
  const auto f1 = fixtures::random_function(rng, kGrid);
  const auto f2 = fixtures::random_function(rng, kGrid);
  const auto lhs = heisenberg_translate(SampledOperator::rank_one(f1, f2), z);
  const auto rhs = SampledOperator::rank_one(tf_shift(z, f1), tf_shift(z, f2));
  EXPECT_LE(max_abs_diff(lhs, rhs), 1e-12);
}

TEST(HeisenbergTranslate, GroupLaw) {
  std::mt19937_64 rng(4);
  const auto s = fixtures::random_sampled_operator(rng, kGrid);
  const PhaseSpacePoint z1{0.5, 0.25}, z2{-1.75, 1.0};
  const auto lhs = heisenberg_translate(heisenberg_translate(s, z2), z1);
  const auto rhs = heisenberg_translate(s, {z1.x + z2.x, z1.w + z2.w});
  EXPECT_LE(max_abs_diff(lhs, rhs), 1e-12);
}

TEST(FourierWigner, OriginIsTrace) {
  std::mt19937_64 rng(5);
  const auto s = fixtures::random_sampled_operator(rng, kGrid);
  const PhaseSpacePoint origin{};
  EXPECT_NEAR(std::abs(fourier_wigner(s, std::span(&origin, 1))[0] - trace(s)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(fourier_wigner(s).at(0, 0) - trace(s)), 0.0, 1e-12);
}

TEST(FourierWigner, GridAndPointVersionsAgree) {
  std::mt19937_64 rng(6);
  const auto s = fixtures::random_sampled_operator(rng, kGrid);
  const auto full = fourier_wigner(s);
  std::vector<PhaseSpacePoint> zs;
  for (long a = -16; a < 16; a += 3)
    for (long b = -16; b < 16; b += 5) zs.push_back(point_of(kGrid, {a, b}));
  const auto pts = fourier_wigner(s, zs);
  for (std::size_t i = 0; i < zs.size(); ++i) {
    const auto sh = align(kGrid, zs[i]);
    EXPECT_NEAR(std::abs(pts[i] - full.at(sh.a, sh.b)), 0.0, 1e-12);
  }
}

TEST(FourierWigner, Covariance) {
  std::mt19937_64 rng(7);
  const auto s = fixtures::random_sampled_operator(rng, kGrid);
  const auto zs = rectangle(2.0, 0.5, 1.0, 0.25);
  const auto us = rectangle(3.0, 0.75, 1.5, 0.375);
  const auto base = fourier_wigner(s, us);
  double worst = 0.0;
  for (const auto& z : zs) {
    const auto moved = fourier_wigner(heisenberg_translate(s, z), us);
    for (std::size_t i = 0; i < us.size(); ++i) {
      worst = std::max(worst, std::abs(moved[i] - std::polar(1.0, 2 * kPi * symplectic_form(z, us[i])) * base[i]));
    }
  }
  EXPECT_LE(worst, 1e-8);
}

TEST(FourierWigner, GaussianAgainstQuadrature) {
  const Grid g(64, 8.0);
  const auto s = gaussian_projection(g);
  const auto zs = rectangle(2.0, 0.25, 2.0, 0.25);
  const auto got = fourier_wigner(s, zs);
  for (std::size_t i = 0; i < zs.size(); ++i) {
    EXPECT_NEAR(std::abs(got[i] - fw_gaussian_quadrature(zs[i])), 0.0, 1e-8);
    EXPECT_NEAR(std::abs(got[i] - fw_gaussian(zs[i])), 0.0, 1e-8);
  }
}

TEST(FourierWigner, PlancherelOnTheGrid) {
  std::mt19937_64 rng(8);
  const auto s = fixtures::random_sampled_operator(rng, kGrid);
  const auto t = fixtures::random_sampled_operator(rng, kGrid);
  const auto fs = fourier_wigner(s), ft = fourier_wigner(t);
  cplx acc{};
  for (std::size_t i = 0; i < fs.values().size(); ++i) acc += fs.values()[i] * std::conj(ft.values()[i]);
  acc *= kGrid.cell_area();
  EXPECT_NEAR(std::abs(acc - trace_pairing(s, t)), 0.0, 1e-10 * std::abs(trace_pairing(s, t)) + 1e-10);
}

TEST(SymplecticFourier, Involution) {
  std::mt19937_64 rng(9);
  for (std::size_t n : {8u, 32u, 64u}) {
    const Grid g(n, 8.0);
    const auto f = random_map(rng, g);
    EXPECT_LE(max_abs_diff(symplectic_fourier(symplectic_fourier(f)), f), 1e-10);
  }
}

TEST(SymplecticFourier, DeltaGivesCellArea) {
  PhaseSpaceMap f(kGrid);
  f.at(0, 0) = 1.0;
  const auto out = symplectic_fourier(f);
  for (auto v : out.values()) EXPECT_NEAR(std::abs(v - kGrid.cell_area()), 0.0, 1e-15);
}

TEST(SymplecticFourier, ModulationBecomesTranslation) {
  std::mt19937_64 rng(10);
  const auto f = random_map(rng, kGrid);
  const GridShift s0{3, -5};
  const auto z0 = point_of(kGrid, s0);
  PhaseSpaceMap mod(kGrid);
  const long lo = kGrid.lo();
  for (long a = lo; a < -lo; ++a)
    for (long b = lo; b < -lo; ++b) mod.at(a, b) = std::polar(1.0, 2 * kPi * symplectic_form(z0, f.point(a, b))) * f.at(a, b);
  const auto lhs = symplectic_fourier(mod);
  const auto ff = symplectic_fourier(f);
  auto c = [&](long i) {
    const long n = static_cast<long>(kGrid.n());
    long r = ((i % n) + n) % n;
    return r >= n / 2 ? r - n : r;
  };
  double worst = 0.0;
  for (long a = lo; a < -lo; ++a)
    for (long b = lo; b < -lo; ++b) worst = std::max(worst, std::abs(lhs.at(a, b) - ff.at(c(a - s0.a), c(b - s0.b))));
  EXPECT_LE(worst, 1e-10);
}

TEST(ParityConjugate, InvolutionEvenAndTrace) {
  std::mt19937_64 rng(11);
  const auto t = fixtures::random_sampled_operator(rng, kGrid);
  EXPECT_EQ(max_abs_diff(parity_conjugate(parity_conjugate(t)), t), 0.0);
  EXPECT_NEAR(std::abs(trace(parity_conjugate(t)) - trace(t)), 0.0, 1e-12);
  const auto even = gaussian_projection(kGrid);
  EXPECT_LE(max_abs_diff(parity_conjugate(even), even), 1e-15);
}

TEST(OperatorConvolve, ZeroAndGridMatchesPoints) {
  std::mt19937_64 rng(12);
  const auto s = fixtures::random_sampled_operator(rng, kGrid);
  const auto t = fixtures::random_sampled_operator(rng, kGrid);
  EXPECT_EQ(operator_convolve(s, SampledOperator(kGrid)).max_abs(), 0.0);
  const auto full = operator_convolve(s, t);
  const auto zs = rectangle(3.0, 0.75, 1.5, 0.5);
  const auto pts = operator_convolve(s, t, zs);
  for (std::size_t i = 0; i < zs.size(); ++i) {
    const auto sh = align(kGrid, zs[i]);
    EXPECT_NEAR(std::abs(pts[i] - full.at(sh.a, sh.b)), 0.0, 1e-10);
  }
}

TEST(OperatorConvolve, CommutativeOnSelfAdjointInputs) {
  std::mt19937_64 rng(13);
  const auto s = random_self_adjoint(rng, kGrid);
  const auto t = random_self_adjoint(rng, kGrid);
  EXPECT_LE(max_abs_diff(operator_convolve(s, t), operator_convolve(t, s)), 1e-8);
}

TEST(OperatorConvolve, PairingIdentity) {
  std::mt19937_64 rng(14);
  const auto s = fixtures::random_sampled_operator(rng, kGrid);
  const auto t = fixtures::random_sampled_operator(rng, kGrid);
  const auto zs = rectangle(2.0, 0.5, 1.0, 0.25);
  // general form <alpha_l S, T> = S * (T*)-check (-l)
  std::vector<PhaseSpacePoint> neg;
  for (const auto& z : zs) neg.push_back({-z.x, -z.w});
  const auto conv = operator_convolve(s, parity_conjugate(adjoint(t)), neg);
  for (std::size_t i = 0; i < zs.size(); ++i) {
    EXPECT_NEAR(std::abs(trace_pairing(heisenberg_translate(s, zs[i]), t) - conv[i]), 0.0, 1e-10);
  }
  // S even and T self-adjoint: <alpha_l S, T> = S * T (l)
  const auto se = gaussian_projection(kGrid);
  const auto ts = random_self_adjoint(rng, kGrid);
  const auto plain = operator_convolve(se, ts, zs);
  for (std::size_t i = 0; i < zs.size(); ++i) {
    EXPECT_NEAR(std::abs(trace_pairing(heisenberg_translate(se, zs[i]), ts) - plain[i]), 0.0, 1e-10);
  }
  // with T even as well, T-check = T and the short form S * T-check (l) holds
  const auto te = scale(add(ts, parity_conjugate(ts)), 0.5);
  const auto short_form = operator_convolve(se, parity_conjugate(te), zs);
  for (std::size_t i = 0; i < zs.size(); ++i) {
    EXPECT_NEAR(std::abs(trace_pairing(heisenberg_translate(se, zs[i]), te) - short_form[i]), 0.0, 1e-10);
  }
}

TEST(OperatorConvolve, ShortPairingFormFailsForOddSelfAdjointT) {
  // the sign of l matters once T is not even
  std::mt19937_64 rng(17);
  const auto se = gaussian_projection(kGrid);
  const auto ts = random_self_adjoint(rng, kGrid);
  const PhaseSpacePoint z{0.75, 0.5};
  const auto short_form = operator_convolve(se, parity_conjugate(ts), std::span(&z, 1))[0];
  EXPECT_GT(std::abs(trace_pairing(heisenberg_translate(se, z), ts) - short_form), 1e-3);
}

TEST(OperatorConvolve, GaussianSelfConvolutionAgainstQuadrature) {
  // S * S(z) = |<pi(z) phi, phi>|^2 for the even Gaussian projection
  const Grid g(64, 8.0);
  const auto s = gaussian_projection(g);
  const auto zs = rectangle(2.0, 0.25, 2.0, 0.25);
  const auto got = operator_convolve(s, s, zs);
  for (std::size_t i = 0; i < zs.size(); ++i) {
    const double q = std::norm(fw_gaussian_quadrature(zs[i]));
    EXPECT_NEAR(std::abs(got[i] - q), 0.0, 1e-7);
  }
}

TEST(WeylQuantize, ZeroLinearityAndInverse) {
  std::mt19937_64 rng(15);
  EXPECT_EQ(max_abs_diff(weyl_quantize(PhaseSpaceMap(kGrid)), SampledOperator(kGrid)), 0.0);
  const auto f = random_map(rng, kGrid);
  const auto h = random_map(rng, kGrid);
  const cplx a{0.5, 1.0}, b{-2.0, 0.25};
  PhaseSpaceMap comb(kGrid);
  for (std::size_t i = 0; i < comb.values().size(); ++i) comb.values()[i] = a * f.values()[i] + b * h.values()[i];
  const auto lhs = weyl_quantize(comb);
  const auto rhs = add(scale(weyl_quantize(f), a), scale(weyl_quantize(h), b));
  EXPECT_LE(max_abs_diff(lhs, rhs), 1e-12 * 64);
  // on the grid F_W inverts rho exactly
  EXPECT_LE(max_abs_diff(fourier_wigner(weyl_quantize(f)), f), 1e-10);
  const auto s = fixtures::random_sampled_operator(rng, kGrid);
  EXPECT_LE(max_abs_diff(weyl_quantize(fourier_wigner(s)), s), 1e-10);
}

TEST(Refinement, RoundTripShrinks) {
  auto f = [](const PhaseSpacePoint& z) { return cplx(std::exp(-kPi * (z.x * z.x + z.w * z.w))); };
  const Grid coarse(32, 8.0), fine(64, 8.0);
  const auto zs = refinement_region(coarse, fine);
  const double e32 = quantization_roundtrip_error(coarse, f, zs);
  const double e64 = quantization_roundtrip_error(fine, f, zs);
  EXPECT_GE(e32, 2.0 * e64);
}

TEST(Refinement, ConvolutionTheoremExactOnEveryGrid) {
  for (std::size_t n : {32u, 64u}) {
    const Grid g(n, 8.0);
    const auto s = gaussian_projection(g);
    const auto t = heisenberg_translate(s, {0.5, 0.25});
    EXPECT_LE(verify_convolution_theorem(s, t), 1e-12);
    EXPECT_LE(verify_convolution_theorem(SampledOperator(g), SampledOperator(g)), 0.0);
  }
}

TEST(Refinement, ConvolutionTheoremApproachesContinuum) {
  const PhaseSpacePoint z0{0.5, 0.25};
  // F_W S F_W (alpha_z0 S) in the continuum
  auto ref = [&](const PhaseSpacePoint& z) {
    return std::polar(fw_gaussian(z) * fw_gaussian(z), 2 * kPi * symplectic_form(z0, z));
  };
  const Grid g32(32, 8.0), g64(64, 8.0), g128(128, 8.0);
  const auto zs = refinement_region(g32, g64);
  auto err = [&](const Grid& g) {
    const auto s = gaussian_projection(g);
    return convolution_theorem_discrepancy(s, heisenberg_translate(s, z0), ref, zs);
  };
  const double e32 = err(g32), e64 = err(g64), e128 = err(g128);
  EXPECT_GE(e32, 2.0 * e64);
  EXPECT_LE(e128, e64 + 1e-14);
}

TEST(Refinement, SwapInvariantForEvenSelfAdjointPair) {
  const Grid g(64, 8.0);
  const auto s = gaussian_projection(g);
  const auto t = scale(add(heisenberg_translate(s, {1.0, 0.0}), heisenberg_translate(s, {-1.0, 0.0})), 0.5);
  EXPECT_NEAR(verify_convolution_theorem(s, t), verify_convolution_theorem(t, s), 1e-9);
}

TEST(GridMismatch, Reported) {
  const Grid g2(64, 8.0);
  EXPECT_THROW(trace_pairing(SampledOperator(kGrid), SampledOperator(g2)), GridMismatch);
  EXPECT_THROW(operator_convolve(SampledOperator(kGrid), SampledOperator(g2)), GridMismatch);
}
