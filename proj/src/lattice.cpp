#include "optrans/lattice.hpp"

#include <limits>
#include <ostream>
#include <string>

namespace optrans {

namespace checked {

std::int64_t add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw OverflowError("int64 overflow in addition");
  return r;
}

std::int64_t sub(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_sub_overflow(a, b, &r)) throw OverflowError("int64 overflow in subtraction");
  return r;
}

std::int64_t mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw OverflowError("int64 overflow in multiplication");
  return r;
}

std::int64_t abs(std::int64_t a) {
  if (a == std::numeric_limits<std::int64_t>::min()) throw OverflowError("int64 overflow in abs");
  return a < 0 ? -a : a;
}

}  // namespace checked

namespace {

void check_size(std::size_t n) {
  if (n == 0 || n % 2 != 0 || n > kMaxCoords) {
    throw DimensionMismatch("lattice point needs 2d coordinates with 1 <= d <= " +
                            std::to_string(kMaxDim) + ", got " + std::to_string(n));
  }
}

__extension__ typedef unsigned __int128 u128;

// ways[k][s]: vectors in Z^k with all |c| <= bound and sum |c| = s
std::vector<std::vector<u128>> count_table(std::size_t n, std::int64_t bound, std::int64_t max_sum) {
  std::vector<std::vector<u128>> ways(n + 1, std::vector<u128>(static_cast<std::size_t>(max_sum) + 1, 0));
  ways[0][0] = 1;
  if (bound < 0) return ways;
  for (std::size_t k = 1; k <= n; ++k) {
    for (std::int64_t s = 0; s <= max_sum; ++s) {
      u128 acc = ways[k - 1][static_cast<std::size_t>(s)];
      for (std::int64_t u = 1; u <= bound && u <= s; ++u) {
        acc += 2 * ways[k - 1][static_cast<std::size_t>(s - u)];
      }
      ways[k][static_cast<std::size_t>(s)] = acc;
    }
  }
  return ways;
}

// Counts of completions for a shell of max-norm radius, split by whether the
// max has already been attained.
struct ShellCounts {
  std::int64_t radius;
  std::vector<std::vector<u128>> within;  // |c| <= radius
  std::vector<std::vector<u128>> inner;   // |c| <= radius - 1

  ShellCounts(std::size_t n, std::int64_t r)
      : radius(r),
        within(count_table(n, r, static_cast<std::int64_t>(n) * r)),
        inner(count_table(n, r - 1, static_cast<std::int64_t>(n) * r)) {}

  u128 completions(std::size_t k, std::int64_t s, bool hit) const {
    if (s < 0) return 0;
    const auto idx = static_cast<std::size_t>(s);
    if (idx >= within[k].size()) return 0;
    return hit ? within[k][idx] : within[k][idx] - inner[k][idx];
  }
};

u128 pow_u128(u128 base, std::size_t e) {
  u128 r = 1;
  for (std::size_t i = 0; i < e; ++i) {
    if (r > std::numeric_limits<u128>::max() / base) throw OverflowError("pair enumeration rank overflow");
    r *= base;
  }
  return r;
}

// number of vectors with max-norm < radius
u128 shell_base(std::size_t n, std::int64_t radius) {
  if (radius == 0) return 0;
  return pow_u128(static_cast<u128>(2 * radius - 1), n);
}

struct Key {
  std::int64_t max;
  std::int64_t l1;
};

Key key_of(std::span<const std::int64_t> c) {
  Key k{0, 0};
  for (auto v : c) {
    const auto a = checked::abs(v);
    k.max = std::max(k.max, a);
    k.l1 = checked::add(k.l1, a);
  }
  return k;
}

std::strong_ordering compare_coords(std::span<const std::int64_t> a, std::span<const std::int64_t> b) {
  const Key ka = key_of(a), kb = key_of(b);
  if (auto c = ka.max <=> kb.max; c != 0) return c;
  if (auto c = ka.l1 <=> kb.l1; c != 0) return c;
  return std::lexicographical_compare_three_way(a.begin(), a.end(), b.begin(), b.end());
}

// Every vector of Z^n with max-norm exactly radius, in canonical order.
std::vector<std::vector<std::int64_t>> shell(std::size_t n, std::int64_t radius) {
  std::vector<std::vector<std::int64_t>> out;
  std::vector<std::int64_t> cur(n, -radius);
  while (true) {
    std::int64_t mx = 0;
    for (auto v : cur) mx = std::max(mx, v < 0 ? -v : v);
    if (mx == radius) out.push_back(cur);
    std::size_t pos = n;
    while (pos > 0) {
      --pos;
      if (cur[pos] < radius) {
        ++cur[pos];
        break;
      }
      cur[pos] = -radius;
      if (pos == 0) {
        pos = n + 1;
        break;
      }
    }
    if (pos == n + 1 || n == 0) break;
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return compare_coords(a, b) < 0; });
  return out;
}

}  // namespace

LatticePoint::LatticePoint(std::initializer_list<std::int64_t> coords)
    : LatticePoint(std::span<const std::int64_t>(coords.begin(), coords.size())) {}

LatticePoint::LatticePoint(std::span<const std::int64_t> coords) {
  check_size(coords.size());
  std::copy(coords.begin(), coords.end(), coords_.begin());
  size_ = static_cast<std::uint8_t>(coords.size());
}

LatticePoint LatticePoint::zero(int d) {
  check_size(static_cast<std::size_t>(2 * std::max(d, 0)));
  LatticePoint p;
  p.size_ = static_cast<std::uint8_t>(2 * d);
  return p;
}

LatticePoint LatticePoint::axis(int d, std::size_t axis, std::int64_t scale) {
  LatticePoint p = zero(d);
  if (axis >= p.size_) throw DimensionMismatch("axis index out of range");
  p.coords_[axis] = scale;
  return p;
}

bool LatticePoint::is_zero() const noexcept {
  return std::all_of(coords_.begin(), coords_.begin() + size_, [](auto v) { return v == 0; });
}

LatticePoint operator+(const LatticePoint& a, const LatticePoint& b) {
  require_same_dim(a, b);
  LatticePoint r = a;
  for (std::size_t i = 0; i < a.size_; ++i) r.coords_[i] = checked::add(a.coords_[i], b.coords_[i]);
  return r;
}

LatticePoint operator-(const LatticePoint& a, const LatticePoint& b) {
  require_same_dim(a, b);
  LatticePoint r = a;
  for (std::size_t i = 0; i < a.size_; ++i) r.coords_[i] = checked::sub(a.coords_[i], b.coords_[i]);
  return r;
}

LatticePoint LatticePoint::operator-() const {
  LatticePoint r = *this;
  for (std::size_t i = 0; i < size_; ++i) r.coords_[i] = checked::sub(0, coords_[i]);
  return r;
}

std::ostream& operator<<(std::ostream& os, const LatticePoint& p) {
  os << '(';
  for (std::size_t i = 0; i < p.size(); ++i) os << (i ? "," : "") << p[i];
  return os << ')';
}

std::ostream& operator<<(std::ostream& os, const LatticePair& p) { return os << '[' << p.m << ' ' << p.k << ']'; }

std::int64_t norm1(const LatticePoint& p) {
  std::int64_t s = 0;
  for (auto v : p.coords()) s = checked::add(s, checked::abs(v));
  return s;
}

std::int64_t max_norm(const LatticePoint& p) {
  std::int64_t s = 0;
  for (auto v : p.coords()) s = std::max(s, checked::abs(v));
  return s;
}

void require_same_dim(const LatticePoint& a, const LatticePoint& b) {
  if (a.size() != b.size()) {
    throw DimensionMismatch("lattice points of dimension " + std::to_string(a.size()) + " and " +
                            std::to_string(b.size()));
  }
}

std::size_t LatticePointHash::operator()(const LatticePoint& p) const noexcept {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ p.size();
  for (auto v : p.coords()) {
    h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  // splitmix64 finalizer so the low bits are usable as a table index
  h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
  h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
  return static_cast<std::size_t>(h ^ (h >> 31));
}

std::size_t LatticePairHash::operator()(const LatticePair& p) const noexcept {
  LatticePointHash h;
  const std::size_t a = h(p.m);
  return a ^ (h(p.k) + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
}

std::vector<std::int64_t> concat(const LatticePair& p) {
  std::vector<std::int64_t> c(p.m.coords().begin(), p.m.coords().end());
  c.insert(c.end(), p.k.coords().begin(), p.k.coords().end());
  return c;
}

LatticePair split(std::span<const std::int64_t> coords) {
  const std::size_t h = coords.size() / 2;
  return {LatticePoint(coords.first(h)), LatticePoint(coords.subspan(h))};
}

PairOrdering::PairOrdering(int d) : d_(d) {
  if (d < 1 || d > kMaxDim) throw DimensionMismatch("pair ordering dimension out of range");
}

void PairOrdering::check(const LatticePair& p) const {
  if (p.m.dim() != d_ || p.k.dim() != d_) {
    throw DimensionMismatch("pair of dimension " + std::to_string(p.m.dim()) + "/" + std::to_string(p.k.dim()) +
                            " used with ordering of dimension " + std::to_string(d_));
  }
}

LatticePair PairOrdering::enumerate(std::uint64_t t) const {
  const std::size_t n = static_cast<std::size_t>(4 * d_);
  const u128 target = t;
  std::int64_t radius = 0;
  while (shell_base(n, radius + 1) <= target) ++radius;
  u128 rest = target - shell_base(n, radius);

  const ShellCounts counts(n, radius);
  std::int64_t s = radius;
  for (;; ++s) {
    const u128 c = counts.completions(n, s, false);
    if (rest < c) break;
    rest -= c;
  }

  std::vector<std::int64_t> coords(n);
  std::int64_t remaining = s;
  bool hit = radius == 0;
  for (std::size_t pos = 0; pos < n; ++pos) {
    for (std::int64_t v = -radius; v <= radius; ++v) {
      const std::int64_t a = v < 0 ? -v : v;
      const bool h = hit || a == radius;
      const u128 c = counts.completions(n - pos - 1, remaining - a, h);
      if (rest < c) {
        coords[pos] = v;
        remaining -= a;
        hit = h;
        break;
      }
      rest -= c;
    }
  }
  return split(coords);
}

std::uint64_t PairOrdering::rank(const LatticePair& pair) const {
  check(pair);
  const auto coords = concat(pair);
  const std::size_t n = coords.size();
  const Key key = key_of(coords);
  const ShellCounts counts(n, key.max);
  u128 r = shell_base(n, key.max);
  for (std::int64_t s = key.max; s < key.l1; ++s) r += counts.completions(n, s, false);

  std::int64_t remaining = key.l1;
  bool hit = key.max == 0;
  for (std::size_t pos = 0; pos < n; ++pos) {
    for (std::int64_t v = -key.max; v < coords[pos]; ++v) {
      const std::int64_t a = v < 0 ? -v : v;
      r += counts.completions(n - pos - 1, remaining - a, hit || a == key.max);
    }
    const std::int64_t a = checked::abs(coords[pos]);
    remaining -= a;
    hit = hit || a == key.max;
  }
  if (r > std::numeric_limits<std::uint64_t>::max()) throw OverflowError("pair rank exceeds 64 bits");
  return static_cast<std::uint64_t>(r);
}

std::strong_ordering PairOrdering::compare(const LatticePair& a, const LatticePair& b) const {
  check(a);
  check(b);
  return compare_coords(concat(a), concat(b));
}

bool PairOrdering::precedes(const LatticePair& a, const LatticePair& b) const { return compare(a, b) <= 0; }

std::vector<LatticePair> PairOrdering::prefix(std::uint64_t count) const {
  const std::size_t n = static_cast<std::size_t>(4 * d_);
  std::vector<LatticePair> out;
  out.reserve(static_cast<std::size_t>(count));
  for (std::int64_t radius = 0; out.size() < count; ++radius) {
    for (const auto& c : shell(n, radius)) {
      if (out.size() == count) break;
      out.push_back(split(c));
    }
  }
  return out;
}

std::int64_t PairOrdering::max_l1_up_to(const LatticePair& pair) const {
  check(pair);
  const Key key = key_of(concat(pair));
  if (key.max == 0) return 0;
  // everything of max-norm radius-1 precedes the pair, including its l1-extremal corner
  const std::int64_t inner = checked::mul(4 * d_, key.max - 1);
  return std::max(key.l1, inner);
}

std::vector<LatticePair> l1_window(int d, std::int64_t radius) {
  const PairOrdering ord(d);
  if (radius < 0) throw InvalidArgument("window radius must be non-negative");
  const std::size_t n = static_cast<std::size_t>(4 * d);
  std::vector<LatticePair> out;
  for (std::int64_t r = 0; r <= radius; ++r) {
    for (const auto& c : shell(n, r)) {
      if (key_of(c).l1 <= radius) out.push_back(split(c));
    }
  }
  return out;
}

}  // namespace optrans
