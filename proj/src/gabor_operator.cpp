#include "optrans/gabor_operator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstddef>
#include <iterator>
#include <numeric>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>

#include "optrans/jacobi_svd.hpp"

namespace optrans {

namespace {

bool entry_less(const GaborOperator::Entry& a, const GaborOperator::Entry& b) {
  if (auto c = a.m <=> b.m; c != 0) return c < 0;
  return a.k < b.k;
}

bool same_index(const GaborOperator::Entry& a, const GaborOperator::Entry& b) { return a.m == b.m && a.k == b.k; }

void require_dim(int d, const LatticePoint& p) {
  if (p.dim() != d) {
    throw DimensionMismatch("lattice point of dimension " + std::to_string(p.dim()) + " in an operator of dimension " +
                            std::to_string(d));
  }
}

void require_same(const GaborOperator& a, const GaborOperator& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("operators of different dimension");
}

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

// For nonnegative doubles the bit patterns order like the values; four 16-bit LSD passes.
void radix_sort_descending(std::vector<double>& v) {
  std::vector<std::uint64_t> key(v.size()), tmp(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) key[i] = ~std::bit_cast<std::uint64_t>(v[i] + 0.0);  // + 0.0 folds -0 into +0
  std::vector<std::size_t> count(1u << 16);
  for (int shift = 0; shift < 64; shift += 16) {
    std::fill(count.begin(), count.end(), 0);
    for (auto k : key) ++count[(k >> shift) & 0xffff];
    std::size_t sum = 0;
    for (auto& c : count) sum += std::exchange(c, sum);
    for (auto k : key) tmp[count[(k >> shift) & 0xffff]++] = k;
    key.swap(tmp);
  }
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::bit_cast<double>(~key[i]);
}

}  // namespace

SingularSpectrum::SingularSpectrum(std::vector<double> values) : values_(std::move(values)) {
  for (double v : values_) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument("singular values must be finite and nonnegative");
  }
  if (values_.size() < (1u << 16)) {
    std::sort(values_.begin(), values_.end(), std::greater<>());
  } else {
    radix_sort_descending(values_);
  }
  if (!values_.empty()) {
    const double cut = kZeroTolerance * values_.front();
    while (!values_.empty() && (values_.back() < cut || values_.back() == 0.0)) values_.pop_back();
  }
}

double SingularSpectrum::schatten_norm(double p) const {
  if (p == kOperatorNorm) return largest();
  if (!(p >= 1.0)) throw InvalidArgument("Schatten exponent must satisfy p >= 1, got " + std::to_string(p));
  if (values_.empty()) return 0.0;
  // scale by the largest value so large p does not underflow
  const double top = values_.front();
  double acc = 0.0;
  for (auto it = values_.rbegin(); it != values_.rend(); ++it) acc += std::pow(*it / top, p);
  return top * std::pow(acc, 1.0 / p);
}

double SingularSpectrum::max_deviation(const SingularSpectrum& a, const SingularSpectrum& b) {
  const std::size_t n = std::max(a.size(), b.size());
  double dev = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = i < a.size() ? a.values_[i] : 0.0;
    const double y = i < b.size() ? b.values_[i] : 0.0;
    dev = std::max(dev, std::abs(x - y));
  }
  return dev;
}

GaborOperator::GaborOperator(int d) : d_(d) {
  if (d < 1 || d > kMaxDim) throw DimensionMismatch("operator dimension out of range: " + std::to_string(d));
}

GaborOperator GaborOperator::from_entries(int d, std::vector<Entry> entries) {
  GaborOperator op(d);
  for (const auto& e : entries) {
    require_dim(d, e.m);
    require_dim(d, e.k);
  }
  if (!std::is_sorted(entries.begin(), entries.end(), entry_less)) {
    // sort a permutation rather than the 100-byte entries themselves; ties keep input order
    std::vector<std::uint32_t> order(entries.size());
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
      if (entry_less(entries[a], entries[b])) return true;
      if (entry_less(entries[b], entries[a])) return false;
      return a < b;
    });
    std::vector<Entry> sorted;
    sorted.reserve(entries.size());
    for (auto i : order) sorted.push_back(std::move(entries[i]));
    entries = std::move(sorted);
  }
  // sum runs of equal keys in place, dropping entries that cancel
  std::size_t w = 0;
  for (std::size_t r = 0; r < entries.size();) {
    std::size_t q = r + 1;
    cplx c = entries[r].c;
    while (q < entries.size() && same_index(entries[q], entries[r])) c += entries[q++].c;
    if (c != cplx{}) {
      if (w != r) entries[w] = std::move(entries[r]);
      entries[w++].c = c;
    }
    r = q;
  }
  entries.resize(w);
  op.entries_ = std::move(entries);
  return op;
}

GaborOperator GaborOperator::from_distinct_entries(int d, std::vector<Entry> entries) {
  GaborOperator op(d);
  for (const auto& e : entries) {
    require_dim(d, e.m);
    require_dim(d, e.k);
  }
  std::sort(entries.begin(), entries.end(), entry_less);
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (same_index(entries[i - 1], entries[i])) {
      std::ostringstream msg;
      msg << "two contributions at coefficient " << entries[i].m << " -> " << entries[i].k;
      throw CollisionError(msg.str());
    }
  }
  std::erase_if(entries, [](const Entry& e) { return e.c == cplx{}; });
  op.entries_ = std::move(entries);
  return op;
}

cplx GaborOperator::coefficient(const LatticePoint& m, const LatticePoint& k) const {
  const Entry probe{m, k, {}};
  auto it = std::lower_bound(entries_.begin(), entries_.end(), probe, entry_less);
  if (it != entries_.end() && same_index(*it, probe)) return it->c;
  return {};
}

double GaborOperator::frobenius_norm_sq() const {
  double s = 0.0;
  for (const auto& e : entries_) s += std::norm(e.c);
  return s;
}

bool operator==(const GaborOperator& a, const GaborOperator& b) {
  if (a.d_ != b.d_ || a.entries_.size() != b.entries_.size()) return false;
  for (std::size_t i = 0; i < a.entries_.size(); ++i) {
    const auto& x = a.entries_[i];
    const auto& y = b.entries_[i];
    if (!same_index(x, y) || x.c != y.c) return false;
  }
  return true;
}

GaborOperator rank_one(const LatticePoint& m, const LatticePoint& k, cplx c) {
  require_same_dim(m, k);
  return GaborOperator::from_entries(m.dim(), {{m, k, c}});
}

GaborOperator identity_on(int d, std::span<const LatticePoint> indices) {
  std::vector<LatticePoint> unique(indices.begin(), indices.end());
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  std::vector<GaborOperator::Entry> e;
  e.reserve(unique.size());
  for (const auto& p : unique) e.push_back({p, p, 1.0});
  return GaborOperator::from_distinct_entries(d, std::move(e));
}

GaborOperator translate(const GaborOperator& s, const LatticePoint& i) {
  require_dim(s.dim(), i);
  std::vector<GaborOperator::Entry> e;
  e.reserve(s.support_size());
  for (const auto& x : s.entries()) e.push_back({x.m + i, x.k + i, x.c});
  return GaborOperator::from_distinct_entries(s.dim(), std::move(e));
}

GaborOperator adjoint(const GaborOperator& s) {
  std::vector<GaborOperator::Entry> e;
  e.reserve(s.support_size());
  for (const auto& x : s.entries()) e.push_back({x.k, x.m, std::conj(x.c)});
  return GaborOperator::from_distinct_entries(s.dim(), std::move(e));
}

GaborOperator compose(const GaborOperator& s, const GaborOperator& t) {
  require_same(s, t);
  // rows of S are contiguous because entries are sorted by m
  const auto se = s.entries();
  std::vector<GaborOperator::Entry> out;
  for (const auto& te : t.entries()) {
    const GaborOperator::Entry probe{te.k, LatticePoint::zero(s.dim()), {}};
    auto it = std::lower_bound(se.begin(), se.end(), probe, [](const auto& a, const auto& b) { return a.m < b.m; });
    for (; it != se.end() && it->m == te.k; ++it) out.push_back({te.m, it->k, te.c * it->c});
  }
  return GaborOperator::from_entries(s.dim(), std::move(out));
}

GaborOperator add(const GaborOperator& a, const GaborOperator& b) {
  require_same(a, b);
  // both supports are sorted and distinct, so a single merge pass sums shared keys
  GaborOperator out(a.dim());
  auto& e = out.entries_;
  e.reserve(a.support_size() + b.support_size());
  const auto x = a.entries(), y = b.entries();
  std::size_t i = 0, j = 0;
  while (i < x.size() || j < y.size()) {
    if (j == y.size() || (i < x.size() && entry_less(x[i], y[j]))) {
      e.push_back(x[i++]);
    } else if (i == x.size() || entry_less(y[j], x[i])) {
      e.push_back(y[j++]);
    } else {
      const cplx c = x[i].c + y[j].c;
      if (c != cplx{}) e.push_back({x[i].m, x[i].k, c});
      ++i;
      ++j;
    }
  }
  return out;
}

GaborOperator scale(const GaborOperator& a, cplx alpha) {
  // order is kept, so from_entries skips its sort
  std::vector<GaborOperator::Entry> e;
  e.reserve(a.support_size());
  for (const auto& x : a.entries()) e.push_back({x.m, x.k, alpha * x.c});
  return GaborOperator::from_entries(a.dim(), std::move(e));
}

GaborOperator subtract(const GaborOperator& a, const GaborOperator& b) { return add(a, scale(b, -1.0)); }

cplx trace_pairing(const GaborOperator& s, const GaborOperator& t) {
  require_same(s, t);
  // merge walk over the two sorted supports
  const auto a = s.entries();
  const auto b = t.entries();
  cplx acc{};
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (entry_less(a[i], b[j])) {
      ++i;
    } else if (entry_less(b[j], a[i])) {
      ++j;
    } else {
      acc += a[i].c * std::conj(b[j].c);
      ++i;
      ++j;
    }
  }
  return acc;
}

cplx trace(const GaborOperator& s) {
  cplx acc{};
  for (const auto& e : s.entries()) {
    if (e.m == e.k) acc += e.c;
  }
  return acc;
}

SingularSpectrum singular_values(const GaborOperator& s) {
  const auto entries = s.entries();
  if (entries.empty()) return SingularSpectrum{};
  const std::size_t n = entries.size();

  // entries are sorted by m, so rows are runs; columns are numbered through a hash on k
  std::vector<std::size_t> erow(n), ecol(n);
  std::size_t nr = 0;
  for (std::size_t e = 0; e < n; ++e) {
    if (e > 0 && entries[e].m != entries[e - 1].m) ++nr;
    erow[e] = nr;
  }
  ++nr;
  std::size_t nc = 0;
  {
    // open addressing on entry indices; a slot holds the first entry seen with that k
    std::size_t cap = 16;
    while (cap < 2 * n) cap *= 2;
    constexpr std::size_t kEmpty = SIZE_MAX;
    std::vector<std::size_t> slot(cap, kEmpty);
    const LatticePointHash hash;
    for (std::size_t e = 0; e < n; ++e) {
      std::size_t h = hash(entries[e].k) & (cap - 1);
      while (slot[h] != kEmpty && entries[slot[h]].k != entries[e].k) h = (h + 1) & (cap - 1);
      if (slot[h] == kEmpty) {
        slot[h] = e;
        ecol[e] = nc++;
      } else {
        ecol[e] = ecol[slot[h]];
      }
    }
  }

  // connected components of the row/column incidence graph are independent blocks
  DisjointSets ds(nr + nc);
  for (std::size_t e = 0; e < n; ++e) ds.unite(erow[e], nr + ecol[e]);

  // counting sort of the entries by component root
  std::vector<std::size_t> root(n), start(nr + 1), order(n);
  for (std::size_t e = 0; e < n; ++e) ++start[(root[e] = ds.find(erow[e])) + 1];
  std::partial_sum(start.begin(), start.end(), start.begin());
  for (std::size_t e = 0; e < n; ++e) order[start[root[e]]++] = e;

  std::vector<double> values;
  values.reserve(std::min(nr, nc));
  std::unordered_map<std::size_t, std::size_t> lr, lc;
  for (std::size_t lo = 0; lo < n;) {
    std::size_t hi = lo + 1;
    while (hi < n && root[order[hi]] == root[order[lo]]) ++hi;
    if (hi - lo == 1) {
      values.push_back(std::abs(entries[order[lo]].c));
      lo = hi;
      continue;
    }
    lr.clear();
    lc.clear();
    for (std::size_t i = lo; i < hi; ++i) {
      lr.try_emplace(erow[order[i]], lr.size());
      lc.try_emplace(ecol[order[i]], lc.size());
    }
    const std::size_t rows = lr.size(), cols = lc.size();
    std::vector<cplx> dense(rows * cols);
    for (std::size_t i = lo; i < hi; ++i) {
      const std::size_t e = order[i];
      dense[lc[ecol[e]] * rows + lr[erow[e]]] = entries[e].c;
    }
    auto sv = jacobi_singular_values(std::move(dense), rows, cols);
    values.insert(values.end(), sv.begin(), sv.end());
    lo = hi;
  }
  return SingularSpectrum(std::move(values));
}

double schatten_norm(const GaborOperator& s, double p) {
  if (p != kOperatorNorm && !(p >= 1.0)) {
    throw InvalidArgument("Schatten exponent must satisfy p >= 1, got " + std::to_string(p));
  }
  return singular_values(s).schatten_norm(p);
}

}  // namespace optrans
