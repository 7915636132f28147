#pragma once

// Shared fixtures: seeded random operators and an Eigen-based singular value oracle.

#include <Eigen/Dense>
#include <algorithm>
#include <map>
#include <random>
#include <vector>

#include "optrans/frame.hpp"
#include "optrans/gabor_operator.hpp"
#include "optrans/qha.hpp"

namespace optrans::fixtures {

inline LatticePoint random_point(std::mt19937_64& rng, int d, std::int64_t radius) {
  std::uniform_int_distribution<std::int64_t> u(-radius, radius);
  std::vector<std::int64_t> c(static_cast<std::size_t>(2 * d));
  for (auto& v : c) v = u(rng);
  return LatticePoint(std::span<const std::int64_t>(c));
}

inline cplx random_complex(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  const double re = n(rng);
  return {re, n(rng)};
}

/// Operator with `count` random coefficients on rows and columns drawn from small index pools.
inline GaborOperator random_operator(std::mt19937_64& rng, int d, std::size_t rows, std::size_t cols,
                                     std::size_t count) {
  std::vector<LatticePoint> rp, cp;
  while (rp.size() < rows) {
    auto p = random_point(rng, d, 3);
    if (std::find(rp.begin(), rp.end(), p) == rp.end()) rp.push_back(p);
  }
  while (cp.size() < cols) {
    auto p = random_point(rng, d, 3);
    if (std::find(cp.begin(), cp.end(), p) == cp.end()) cp.push_back(p);
  }
  std::uniform_int_distribution<std::size_t> ur(0, rows - 1), uc(0, cols - 1);
  std::vector<GaborOperator::Entry> e;
  for (std::size_t i = 0; i < count; ++i) e.push_back({rp[ur(rng)], cp[uc(rng)], random_complex(rng)});
  return GaborOperator::from_entries(d, std::move(e));
}

/// Eigenvalues of C^H C for the dense coefficient matrix C, nonincreasing.
inline std::vector<double> gram_eigenvalues(const GaborOperator& s) {
  std::map<LatticePoint, int> rows, cols;
  for (const auto& e : s.entries()) {
    rows.emplace(e.m, 0);
    cols.emplace(e.k, 0);
  }
  int i = 0;
  for (auto& [k, v] : rows) v = i++;
  i = 0;
  for (auto& [k, v] : cols) v = i++;
  Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(rows.size()),
                                              static_cast<Eigen::Index>(cols.size()));
  for (const auto& e : s.entries()) c(rows[e.m], cols[e.k]) = e.c;
  const Eigen::MatrixXcd g = c.adjoint() * c;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(g, Eigen::EigenvaluesOnly);
  std::vector<double> out(eig.eigenvalues().data(), eig.eigenvalues().data() + eig.eigenvalues().size());
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

/// Largest gap between squared singular values and Gram eigenvalues, zero padded.
inline double squared_spectrum_gap(const SingularSpectrum& sv, const std::vector<double>& eig) {
  double gap = 0.0;
  for (std::size_t i = 0; i < std::max(sv.size(), eig.size()); ++i) {
    const double a = i < sv.size() ? sv.values()[i] * sv.values()[i] : 0.0;
    const double b = i < eig.size() ? eig[i] : 0.0;
    gap = std::max(gap, std::abs(a - b));
  }
  return gap;
}

/// i.i.d. complex normal coefficients on the plan window, normalised in T^p.
inline GaborOperator random_window_operator(std::mt19937_64& rng, const FramePlan& plan) {
  std::vector<GaborOperator::Entry> e;
  for (const auto& pr : plan.schedule.window) e.push_back({pr.m, pr.k, random_complex(rng)});
  const auto u = GaborOperator::from_distinct_entries(plan.schedule.d, std::move(e));
  return scale(u, 1.0 / schatten_norm(u, plan.schedule.p));
}

/// Moves one index of `family` so that the quadruple (i, it, j, jt) built from the
/// `variant`-th choice of i, it, jt satisfies k(i) - i + it = k(j) - j + jt.
/// Needs a family of at least four indices.
inline IndexFamily corrupt_family(const IndexFamily& family, std::size_t variant) {
  std::vector<std::pair<std::size_t, std::size_t>> where;
  for (std::size_t b = 0; b < family.sets.size(); ++b)
    for (std::size_t p = 0; p < family.sets[b].size(); ++p) where.push_back({b, p});
  const std::size_t n = where.size();
  const auto [bi, pi] = where[variant % n];
  const auto [bit, pit] = where[(variant + 1) % n];
  const auto [bjt, pjt] = where[(variant + 2) % n];
  const auto [bj, pj] = where[(variant + 3) % n];
  auto sets = family.sets;
  const auto& i = family.sets[bi][pi];
  const auto& it = family.sets[bit][pit];
  const auto& jt = family.sets[bjt][pjt];
  sets[bj][pj] = family.pairs[bj].k - family.pairs[bi].k + i - it + jt;
  return IndexFamily(family.d, family.pairs, std::move(sets));
}

inline qha::SampledOperator random_sampled_operator(std::mt19937_64& rng, const qha::Grid& g) {
  qha::SampledOperator s(g);
  for (auto& v : s.kernel()) v = random_complex(rng);
  return s;
}

inline qha::SampledFunction random_function(std::mt19937_64& rng, const qha::Grid& g) {
  qha::SampledFunction f(g);
  for (auto& v : f.samples()) v = random_complex(rng);
  return f;
}

}  // namespace optrans::fixtures
