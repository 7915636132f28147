#include "optrans/frame.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <unordered_set>

namespace optrans {

namespace {

double weight_exponent(double p) { return 1.0 - p / 2.0; }

std::int64_t smallest_capacity(double p, double target) {
  const double e = weight_exponent(p);
  const double guess = std::ceil(std::pow(target, 1.0 / e));
  if (!(guess < 9.0e15)) {
    std::ostringstream msg;
    msg << "capacity overflow: p=" << p << " needs N of order " << guess;
    throw OverflowError(msg.str());
  }
  auto n = std::max<std::int64_t>(1, static_cast<std::int64_t>(guess));
  auto ok = [&](std::int64_t v) { return std::pow(static_cast<double>(v), e) <= target; };
  while (n > 1 && ok(n - 1)) --n;
  while (!ok(n)) ++n;
  return n;
}

std::string describe(const LatticePair& pr) {
  std::ostringstream os;
  os << pr;
  return os.str();
}

bool is_prime(std::int64_t n) {
  if (n < 2) return false;
  for (std::int64_t f = 2; f * f <= n; ++f) {
    if (n % f == 0) return false;
  }
  return true;
}

std::vector<std::size_t> canonical_order(const CapacitySchedule& schedule, const PairOrdering& ordering) {
  if (schedule.window.empty()) throw InvalidArgument("index family requested for an empty window");
  if (ordering.dim() != schedule.d) throw DimensionMismatch("ordering and schedule dimensions differ");
  std::vector<std::size_t> order(schedule.window.size());
  for (std::size_t b = 0; b < order.size(); ++b) order[b] = b;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ordering.compare(schedule.window[a], schedule.window[b]) < 0;
  });
  return order;
}

// Ordered pairs (i, it), i != it, with their block numbers.
struct OrderedPair {
  std::size_t a, b;  // positions in the flattened index list
};

struct Flat {
  std::vector<LatticePoint> idx;
  std::vector<std::size_t> block;
};

Flat flatten(const IndexFamily& f) {
  Flat fl;
  for (std::size_t b = 0; b < f.sets.size(); ++b) {
    for (const auto& i : f.sets[b]) {
      fl.idx.push_back(i);
      fl.block.push_back(b);
    }
  }
  return fl;
}

struct PairKeys {
  std::vector<OrderedPair> pairs;
  std::vector<LatticePoint> key_k;  // k(i) - i + it
  std::vector<LatticePoint> key_m;  // m(i) - i + it
};

PairKeys pair_keys(const IndexFamily& f, const Flat& fl) {
  PairKeys pk;
  const std::size_t n = fl.idx.size();
  pk.pairs.reserve(n * (n - (n ? 1 : 0)));
  for (std::size_t a = 0; a < n; ++a) {
    const auto& pr = f.pairs[fl.block[a]];
    const LatticePoint kd = pr.k - fl.idx[a];
    const LatticePoint md = pr.m - fl.idx[a];
    for (std::size_t b = 0; b < n; ++b) {
      if (a == b) continue;
      pk.pairs.push_back({a, b});
      pk.key_k.push_back(kd + fl.idx[b]);
      pk.key_m.push_back(md + fl.idx[b]);
    }
  }
  return pk;
}

Condition2Violation make_violation(const Flat& fl, const OrderedPair& x, const OrderedPair& y, bool on_k, bool on_m) {
  return {fl.idx[x.a], fl.idx[x.b], fl.idx[y.a], fl.idx[y.b],
          fl.block[x.a], fl.block[x.b], fl.block[y.a], fl.block[y.b], on_k, on_m};
}

std::unordered_set<LatticePair, LatticePairHash> window_set(const FramePlan& plan) {
  return {plan.schedule.window.begin(), plan.schedule.window.end()};
}

}  // namespace

std::int64_t CapacitySchedule::total() const {
  std::int64_t t = 0;
  for (auto n : capacities) t = checked::add(t, n);
  return t;
}

double CapacitySchedule::frame_bound() const { return std::pow(budget, 2.0 / p); }

CapacitySchedule default_capacities(double p, int d, std::span<const LatticePair> window) {
  if (!(p > 2.0) || !std::isfinite(p)) {
    throw InvalidArgument("the frame construction requires p > 2, got p=" + std::to_string(p));
  }
  if (window.empty()) throw InvalidArgument("capacity schedule needs a nonempty window");
  const PairOrdering ordering(d);
  CapacitySchedule s;
  s.p = p;
  s.d = d;
  s.window.assign(window.begin(), window.end());
  std::stable_sort(s.window.begin(), s.window.end(),
                   [&](const auto& a, const auto& b) { return ordering.compare(a, b) < 0; });
  if (std::adjacent_find(s.window.begin(), s.window.end()) != s.window.end()) {
    throw InvalidArgument("window lists a pair twice");
  }
  const double head = std::pow(2.0, -p / 2.0) / std::pow(2.0, 4 * d);
  for (const auto& pr : s.window) {
    if (pr.m.dim() != d || pr.k.dim() != d) throw DimensionMismatch("window pair of the wrong dimension");
    const double target = head * std::pow(3.0, -static_cast<double>(norm1(pr.m) + norm1(pr.k)));
    const auto n = smallest_capacity(p, target);
    s.capacities.push_back(n);
    s.budget += std::pow(static_cast<double>(n), weight_exponent(p));
  }
  return s;
}

CapacitySchedule default_capacities(double p, int d, std::int64_t radius) {
  const auto w = l1_window(d, radius);
  return default_capacities(p, d, w);
}

IndexFamily::IndexFamily(int dim, std::vector<LatticePair> prs, std::vector<std::vector<LatticePoint>> s)
    : d(dim), pairs(std::move(prs)), sets(std::move(s)) {
  if (pairs.size() != sets.size()) throw InvalidArgument("index family needs one set per pair");
  for (std::size_t b = 0; b < sets.size(); ++b) {
    if (pairs[b].m.dim() != d || pairs[b].k.dim() != d) throw DimensionMismatch("family pair of the wrong dimension");
    for (const auto& i : sets[b]) {
      if (i.dim() != d) throw DimensionMismatch("family index of the wrong dimension");
      auto [it, fresh] = reverse_.try_emplace(i, b);
      if (!fresh) {
        std::ostringstream msg;
        msg << "index " << i << " belongs to both " << pairs[it->second] << " and " << pairs[b];
        throw CollisionError(msg.str());
      }
    }
  }
}

std::int64_t IndexFamily::total() const {
  std::int64_t t = 0;
  for (const auto& s : sets) t += static_cast<std::int64_t>(s.size());
  return t;
}

std::optional<std::size_t> IndexFamily::block_of(const LatticePoint& lambda) const {
  auto it = reverse_.find(lambda);
  if (it == reverse_.end()) return std::nullopt;
  return it->second;
}

std::vector<LatticePoint> IndexFamily::all_indices() const {
  std::vector<LatticePoint> out;
  for (const auto& s : sets) out.insert(out.end(), s.begin(), s.end());
  return out;
}

std::string_view strategy_name(FamilyStrategy s) {
  switch (s) {
    case FamilyStrategy::greedy:
      return "greedy";
    case FamilyStrategy::sidon:
      return "sidon";
    case FamilyStrategy::automatic:
      return "auto";
  }
  return "unknown";
}

FamilyStrategy parse_strategy(std::string_view name) {
  if (name == "greedy") return FamilyStrategy::greedy;
  if (name == "sidon") return FamilyStrategy::sidon;
  if (name == "auto") return FamilyStrategy::automatic;
  throw InvalidArgument("unknown family strategy '" + std::string(name) + "' (expected greedy, sidon or auto)");
}

IndexFamily greedy_index_sets(const CapacitySchedule& schedule, const PairOrdering& ordering) {
  const auto order = canonical_order(schedule, ordering);
  std::vector<std::vector<LatticePoint>> sets(schedule.window.size());
  std::int64_t prev_max = 0;
  for (std::size_t b : order) {
    const auto& pr = schedule.window[b];
    const std::int64_t pair_bound = ordering.max_l1_up_to(pr);
    std::int64_t cur_max = 0;
    for (std::int64_t pick = 1; pick <= schedule.capacities[b]; ++pick) {
      try {
        const std::int64_t bound =
            checked::add(checked::mul(3, pair_bound), checked::mul(4, checked::add(prev_max, cur_max)));
        const std::int64_t norm = checked::add(bound, 1);
        sets[b].push_back(LatticePoint::axis(schedule.d, 0, norm));
        cur_max = std::max(cur_max, norm);
      } catch (const OverflowError&) {
        throw OverflowError("greedy index bound overflows int64 at pair " + describe(pr) + ", pick " +
                            std::to_string(pick) + " of " + std::to_string(schedule.capacities[b]));
      }
    }
    prev_max = std::max(prev_max, cur_max);
  }
  return IndexFamily(schedule.d, schedule.window, std::move(sets));
}

IndexFamily sidon_index_sets(const CapacitySchedule& schedule, const PairOrdering& ordering) {
  const auto order = canonical_order(schedule, ordering);
  const std::int64_t n = schedule.total();
  std::int64_t q = n + 1;
  while (!is_prime(q)) ++q;
  std::int64_t coord = 0;
  for (const auto& pr : schedule.window) coord = std::max({coord, max_norm(pr.m), max_norm(pr.k)});
  // c exceeds every |k - l| and |m - n| coordinate, so only exact Sidon coincidences could cancel
  const std::int64_t c = checked::add(checked::mul(2, coord), 1);

  std::vector<std::vector<LatticePoint>> sets(schedule.window.size());
  std::int64_t t = 1;
  for (std::size_t b : order) {
    for (std::int64_t pick = 0; pick < schedule.capacities[b]; ++pick, ++t) {
      const std::int64_t a = checked::add(checked::mul(checked::mul(2, q), t), (t * t) % q);
      sets[b].push_back(LatticePoint::axis(schedule.d, 0, checked::mul(c, a)));
    }
  }
  return IndexFamily(schedule.d, schedule.window, std::move(sets));
}

IndexFamily build_index_family(const CapacitySchedule& schedule, const PairOrdering& ordering,
                               FamilyStrategy strategy, FamilyStrategy* used) {
  auto report = [&](FamilyStrategy s) {
    if (used) *used = s;
  };
  switch (strategy) {
    case FamilyStrategy::greedy:
      report(strategy);
      return greedy_index_sets(schedule, ordering);
    case FamilyStrategy::sidon:
      report(strategy);
      return sidon_index_sets(schedule, ordering);
    case FamilyStrategy::automatic:
      try {
        auto f = greedy_index_sets(schedule, ordering);
        report(FamilyStrategy::greedy);
        return f;
      } catch (const OverflowError&) {
        report(FamilyStrategy::sidon);
        return sidon_index_sets(schedule, ordering);
      }
  }
  throw InvalidArgument("unknown family strategy");
}

std::vector<Condition2Violation> verify_condition2(const IndexFamily& family, std::size_t max_reports) {
  const Flat fl = flatten(family);
  const PairKeys pk = pair_keys(family, fl);
  std::vector<Condition2Violation> out;
  // every quadruple (i,it,j,jt) with i != it, j != jt, (i,it) != (j,jt)
  const std::size_t np = pk.pairs.size();
  for (std::size_t x = 0; x < np && out.size() < max_reports; ++x) {
    for (std::size_t y = 0; y < np && out.size() < max_reports; ++y) {
      if (x == y) continue;
      const bool on_k = pk.key_k[x] == pk.key_k[y];
      const bool on_m = pk.key_m[x] == pk.key_m[y];
      if (on_k || on_m) out.push_back(make_violation(fl, pk.pairs[x], pk.pairs[y], on_k, on_m));
    }
  }
  return out;
}

std::vector<Condition2Violation> verify_condition2_fast(const IndexFamily& family, std::size_t max_reports) {
  const Flat fl = flatten(family);
  const PairKeys pk = pair_keys(family, fl);
  const std::size_t np = pk.pairs.size();
  std::unordered_map<LatticePoint, std::vector<std::size_t>, LatticePointHash> by_k, by_m;
  for (std::size_t x = 0; x < np; ++x) {
    by_k[pk.key_k[x]].push_back(x);
    by_m[pk.key_m[x]].push_back(x);
  }
  std::vector<Condition2Violation> out;
  for (std::size_t x = 0; x < np && out.size() < max_reports; ++x) {
    const auto& ck = by_k[pk.key_k[x]];
    const auto& cm = by_m[pk.key_m[x]];
    if (ck.size() == 1 && cm.size() == 1) continue;
    // merge the two partner lists so a quadruple failing both ways is reported once
    std::vector<std::size_t> partners(ck.begin(), ck.end());
    partners.insert(partners.end(), cm.begin(), cm.end());
    std::sort(partners.begin(), partners.end());
    partners.erase(std::unique(partners.begin(), partners.end()), partners.end());
    for (std::size_t y : partners) {
      if (y == x || out.size() >= max_reports) continue;
      out.push_back(make_violation(fl, pk.pairs[x], pk.pairs[y], pk.key_k[x] == pk.key_k[y],
                                   pk.key_m[x] == pk.key_m[y]));
    }
  }
  return out;
}

std::vector<Condition1Violation> verify_condition1(const IndexFamily& family, std::size_t max_reports) {
  const Flat fl = flatten(family);
  std::unordered_map<LatticePoint, std::vector<std::size_t>, LatticePointHash> by_k, by_m;
  for (std::size_t a = 0; a < fl.idx.size(); ++a) {
    const auto& pr = family.pairs[fl.block[a]];
    by_k[pr.k - fl.idx[a]].push_back(a);
    by_m[pr.m - fl.idx[a]].push_back(a);
  }
  std::vector<Condition1Violation> out;
  for (std::size_t a = 0; a < fl.idx.size() && out.size() < max_reports; ++a) {
    const auto& pr = family.pairs[fl.block[a]];
    const LatticePoint kd = pr.k - fl.idx[a];
    const LatticePoint md = pr.m - fl.idx[a];
    std::vector<std::size_t> partners = by_k[kd];
    partners.insert(partners.end(), by_m[md].begin(), by_m[md].end());
    std::sort(partners.begin(), partners.end());
    partners.erase(std::unique(partners.begin(), partners.end()), partners.end());
    for (std::size_t b : partners) {
      if (b == a || out.size() >= max_reports) continue;
      const auto& pb = family.pairs[fl.block[b]];
      out.push_back({fl.idx[a], fl.idx[b], fl.block[a], fl.block[b], kd == pb.k - fl.idx[b], md == pb.m - fl.idx[b]});
    }
  }
  return out;
}

GaborOperator build_frame_generator(const CapacitySchedule& schedule, const IndexFamily& family) {
  if (family.pairs != schedule.window) throw InvalidArgument("index family does not match the schedule window");
  std::vector<GaborOperator::Entry> e;
  for (std::size_t b = 0; b < family.sets.size(); ++b) {
    if (static_cast<std::int64_t>(family.sets[b].size()) != schedule.capacities[b]) {
      throw InvalidArgument("index set size differs from its capacity at " + describe(family.pairs[b]));
    }
    const double c = 1.0 / std::sqrt(static_cast<double>(schedule.capacities[b]));
    for (const auto& i : family.sets[b]) e.push_back({family.pairs[b].m - i, family.pairs[b].k - i, c});
  }
  return GaborOperator::from_distinct_entries(schedule.d, std::move(e));
}

FramePlan build_plan(double p, int d, std::int64_t radius, FamilyStrategy strategy) {
  FramePlan plan;
  plan.schedule = default_capacities(p, d, radius);
  plan.family = build_index_family(plan.schedule, PairOrdering(d), strategy, &plan.strategy);
  plan.generator = build_frame_generator(plan.schedule, plan.family);
  return plan;
}

cplx analysis_coefficient(const GaborOperator& u, const LatticePoint& lambda, const FramePlan& plan) {
  const auto b = plan.family.block_of(lambda);
  if (!b) return {};
  const auto& pr = plan.family.pairs[*b];
  return u.coefficient(pr.m, pr.k) / std::sqrt(static_cast<double>(plan.schedule.capacities[*b]));
}

GaborOperator frame_apply(const GaborOperator& u, const FramePlan& plan, std::span<const LatticePoint> lambda_set) {
  if (u.dim() != plan.schedule.d) throw DimensionMismatch("operator and plan dimensions differ");
  std::vector<LatticePoint> lambdas(lambda_set.begin(), lambda_set.end());
  std::sort(lambdas.begin(), lambdas.end());
  lambdas.erase(std::unique(lambdas.begin(), lambdas.end()), lambdas.end());

  const auto gen = plan.generator.entries();
  std::vector<LatticePoint> shifts;
  std::vector<cplx> weights;
  for (const auto& lambda : lambdas) {
    const cplx t = analysis_coefficient(u, lambda, plan);
    if (t == cplx{}) continue;
    shifts.push_back(lambda);
    weights.push_back(t);
  }
  // each translate of the sorted generator is itself sorted, so a heap merge of the runs
  // replaces a full sort; ties go to the earlier run
  auto entry_at = [&](std::size_t run, std::size_t pos) {
    return GaborOperator::Entry{gen[pos].m + shifts[run], gen[pos].k + shifts[run], weights[run] * gen[pos].c};
  };
  std::vector<GaborOperator::Entry> head;
  std::vector<std::size_t> pos(shifts.size(), 0), heap;
  if (!gen.empty()) {
    for (std::size_t r = 0; r < shifts.size(); ++r) {
      head.push_back(entry_at(r, 0));
      heap.push_back(r);
    }
  }
  auto later = [&](std::size_t a, std::size_t b) {
    if (auto c = head[a].m <=> head[b].m; c != 0) return c > 0;
    if (auto c = head[a].k <=> head[b].k; c != 0) return c > 0;
    return a > b;
  };
  std::make_heap(heap.begin(), heap.end(), later);
  std::vector<GaborOperator::Entry> out;
  out.reserve(shifts.size() * gen.size());
  while (!heap.empty()) {
    std::pop_heap(heap.begin(), heap.end(), later);
    const std::size_t r = heap.back();
    out.push_back(head[r]);
    if (++pos[r] < gen.size()) {
      head[r] = entry_at(r, pos[r]);
      std::push_heap(heap.begin(), heap.end(), later);
    } else {
      heap.pop_back();
    }
  }
  return GaborOperator::from_entries(u.dim(), std::move(out));
}

GaborOperator frame_apply(const GaborOperator& u, const FramePlan& plan) {
  const auto all = plan.family.all_indices();
  return frame_apply(u, plan, all);
}

GaborOperator random_window_operator(std::mt19937_64& rng, const FramePlan& plan) {
  std::normal_distribution<double> normal;
  std::vector<GaborOperator::Entry> e;
  for (const auto& pr : plan.schedule.window) {
    const double re = normal(rng);
    const double im = normal(rng);
    e.push_back({pr.m, pr.k, {re, im}});
  }
  const auto u = GaborOperator::from_distinct_entries(plan.schedule.d, std::move(e));
  return scale(u, 1.0 / schatten_norm(u, plan.schedule.p));
}

GaborOperator restrict_to_window(const GaborOperator& u, const FramePlan& plan) {
  const auto w = window_set(plan);
  std::vector<GaborOperator::Entry> e;
  for (const auto& x : u.entries()) {
    if (w.contains(LatticePair{x.m, x.k})) e.push_back(x);
  }
  return GaborOperator::from_distinct_entries(u.dim(), std::move(e));
}

GaborOperator frame_apply_truncated(const GaborOperator& u, const FramePlan& plan) {
  const GaborOperator inside = restrict_to_window(u, plan);
  return add(frame_apply(inside, plan), subtract(u, inside));
}

SingularSpectrum residual_spectrum_closed_form(const GaborOperator& u, const FramePlan& plan) {
  const auto& caps = plan.schedule.capacities;
  const auto& pairs = plan.family.pairs;
  std::vector<double> values;
  for (std::size_t bt = 0; bt < pairs.size(); ++bt) {
    const double c = std::abs(u.coefficient(pairs[bt].m, pairs[bt].k));
    if (c == 0.0) continue;
    const double nt = static_cast<double>(caps[bt]);
    for (std::size_t b = 0; b < pairs.size(); ++b) {
      const double v = c / std::sqrt(nt * static_cast<double>(caps[b]));
      const std::int64_t count = b == bt ? caps[b] * (caps[b] - 1) : caps[b] * caps[bt];
      values.insert(values.end(), static_cast<std::size_t>(count), v);
    }
  }
  return SingularSpectrum(std::move(values));
}

NeumannResult neumann_reconstruct(const GaborOperator& u, const FramePlan& plan, const NeumannOptions& opts) {
  if (opts.iterations < 0) throw InvalidArgument("iteration count must be nonnegative");
  const double p = plan.schedule.p;
  NeumannResult r;
  r.v = u;
  const double unorm = schatten_norm(u, p);
  if (unorm == 0.0) {
    r.relative_errors.push_back(0.0);
    return r;
  }
  auto rel_error = [&](const GaborOperator& v, GaborOperator* ev) {
    *ev = frame_apply_truncated(v, plan);
    return schatten_norm(subtract(*ev, u), p) / unorm;
  };
  GaborOperator ev(u.dim());
  r.relative_errors.push_back(rel_error(r.v, &ev));
  for (int n = 0; n < opts.iterations; ++n) {
    const double prev = r.relative_errors.back();
    if (prev < opts.stop_tolerance) break;
    r.v = add(u, subtract(r.v, ev));
    const double err = rel_error(r.v, &ev);
    r.relative_errors.push_back(err);
    ++r.iterations_run;
    if (err > prev && err >= opts.stop_tolerance) {
      std::ostringstream msg;
      msg << "Neumann iteration " << r.iterations_run << " increased the error from " << prev << " to " << err;
      throw NonContraction(msg.str());
    }
  }
  return r;
}

}  // namespace optrans
