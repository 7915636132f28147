#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "optrans/gabor_operator.hpp"
#include "optrans/lattice.hpp"

namespace optrans {

/// Capacities N_{m,k} over a finite window of (m,k) pairs.
struct CapacitySchedule {
  double p = 0.0;
  int d = 1;
  /// Window pairs in canonical order.
  std::vector<LatticePair> window;
  std::vector<std::int64_t> capacities;
  /// sum N^{1-p/2} over the window
  double budget = 0.0;

  std::int64_t total() const;
  /// budget^{2/p}, the bound on ||E - Id||.
  double frame_bound() const;
};

/// N_{m,k} = least N with N^{1-p/2} <= 2^{-p/2} 3^{-(|m|_1+|k|_1)} / 2^{4d}.
CapacitySchedule default_capacities(double p, int d, std::span<const LatticePair> window);
/// Same, over l1_window(d, radius).
CapacitySchedule default_capacities(double p, int d, std::int64_t radius);

/// Disjoint index sets I_{m,k}; sets[b] belongs to schedule.window[b].
struct IndexFamily {
  int d = 1;
  std::vector<LatticePair> pairs;
  std::vector<std::vector<LatticePoint>> sets;

  /// Validates disjointness and dimensions; throws CollisionError on a shared index.
  IndexFamily(int d, std::vector<LatticePair> pairs, std::vector<std::vector<LatticePoint>> sets);
  IndexFamily() = default;

  std::int64_t total() const;
  /// Block b with lambda in I_{pairs[b]}.
  std::optional<std::size_t> block_of(const LatticePoint& lambda) const;
  /// Every index, block by block.
  std::vector<LatticePoint> all_indices() const;

 private:
  std::unordered_map<LatticePoint, std::size_t, LatticePointHash> reverse_;
};

enum class FamilyStrategy {
  /// Picks along e_1 at (B+1) e_1 with B the lower bound of the greedy rule.
  greedy,
  /// Picks c * a_t e_1 with a_t = 2qt + (t^2 mod q), an Erdos-Turan Sidon set.
  sidon,
  /// greedy, falling back to sidon when greedy overflows 64 bits.
  automatic,
};

std::string_view strategy_name(FamilyStrategy s);
FamilyStrategy parse_strategy(std::string_view name);

IndexFamily greedy_index_sets(const CapacitySchedule& schedule, const PairOrdering& ordering);
IndexFamily sidon_index_sets(const CapacitySchedule& schedule, const PairOrdering& ordering);
IndexFamily build_index_family(const CapacitySchedule& schedule, const PairOrdering& ordering,
                               FamilyStrategy strategy, FamilyStrategy* used = nullptr);

/// A quadruple (i, it, j, jt) with i in I_{m,k}, it in I_{mt,kt}, j in I_{n,l}, jt in I_{nt,lt}
/// for which k-l+it-jt+j-i = 0 (on_k) or m-n+it-jt+j-i = 0 (on_m).
struct Condition2Violation {
  LatticePoint i, it, j, jt;
  std::size_t block_i = 0, block_it = 0, block_j = 0, block_jt = 0;
  bool on_k = false;
  bool on_m = false;
};

/// Brute force over all admissible quadruples. Stops after max_reports violations.
std::vector<Condition2Violation> verify_condition2(const IndexFamily& family, std::size_t max_reports = SIZE_MAX);
/// Same verdict in O(n^2) expected time by hashing k - i + it and m - i + it.
std::vector<Condition2Violation> verify_condition2_fast(const IndexFamily& family,
                                                        std::size_t max_reports = SIZE_MAX);

/// A pair i != it with k-kt+it-i = 0 or m-mt+it-i = 0.
struct Condition1Violation {
  LatticePoint i, it;
  std::size_t block_i = 0, block_it = 0;
  bool on_k = false;
  bool on_m = false;
};
std::vector<Condition1Violation> verify_condition1(const IndexFamily& family, std::size_t max_reports = SIZE_MAX);

struct FramePlan {
  CapacitySchedule schedule;
  IndexFamily family;
  GaborOperator generator{1};
  /// Construction that produced the family.
  FamilyStrategy strategy = FamilyStrategy::greedy;
};

/// S = sum N^{-1/2} sum_{i in I_{m,k}} pi(m-i)psi (x) pi(k-i)psi. Throws CollisionError
/// if two terms share a coefficient.
GaborOperator build_frame_generator(const CapacitySchedule& schedule, const IndexFamily& family);

FramePlan build_plan(double p, int d, std::int64_t radius, FamilyStrategy strategy = FamilyStrategy::automatic);

/// T_lambda(U) = N^{-1/2} c^U_{m,k} for lambda in I_{m,k}, else 0.
cplx analysis_coefficient(const GaborOperator& u, const LatticePoint& lambda, const FramePlan& plan);

/// sum over lambda in lambda_set of T_lambda(U) alpha_lambda S. The set is deduplicated and
/// summed in a fixed order, so the result does not depend on how it is listed.
GaborOperator frame_apply(const GaborOperator& u, const FramePlan& plan, std::span<const LatticePoint> lambda_set);
/// Over every index of the family.
GaborOperator frame_apply(const GaborOperator& u, const FramePlan& plan);

/// Coefficients i.i.d. complex standard normal on the window pairs, scaled to unit T^p norm.
GaborOperator random_window_operator(std::mt19937_64& rng, const FramePlan& plan);

/// The part of U on window pairs.
GaborOperator restrict_to_window(const GaborOperator& u, const FramePlan& plan);
/// E(P U) + (U - P U) with P the window restriction; equals E on window-supported U.
GaborOperator frame_apply_truncated(const GaborOperator& u, const FramePlan& plan);

/// Values N_{mt,kt}^{-1/2} N_{m,k}^{-1/2} |c^U_{mt,kt}| for i in I_{m,k}, it in I_{mt,kt}, i != it.
SingularSpectrum residual_spectrum_closed_form(const GaborOperator& u, const FramePlan& plan);

struct NeumannResult {
  GaborOperator v{1};
  /// ||E(V_n) - U||_p / ||U||_p for n = 0..iterations_run
  std::vector<double> relative_errors;
  int iterations_run = 0;
};

struct NeumannOptions {
  int iterations = 40;
  double stop_tolerance = 1e-12;
};

/// V_0 = U, V_{n+1} = U + (Id - E)V_n, with E as in frame_apply_truncated. Throws NonContraction
/// if an error ratio above one is measured while the error is above the stop tolerance.
NeumannResult neumann_reconstruct(const GaborOperator& u, const FramePlan& plan, const NeumannOptions& opts = {});

}  // namespace optrans
