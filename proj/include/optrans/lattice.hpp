#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <iosfwd>
#include <span>
#include <vector>

#include "optrans/error.hpp"

namespace optrans {

/// Largest supported phase-space dimension parameter d (points carry 2d coordinates).
inline constexpr int kMaxDim = 3;
inline constexpr std::size_t kMaxCoords = 2 * kMaxDim;

namespace checked {

std::int64_t add(std::int64_t a, std::int64_t b);
std::int64_t sub(std::int64_t a, std::int64_t b);
std::int64_t mul(std::int64_t a, std::int64_t b);
std::int64_t abs(std::int64_t a);

}  // namespace checked

/// A point of Z^{2d}. Coordinates are stored inline; d is at most kMaxDim.
class LatticePoint {
 public:
  LatticePoint() = default;
  LatticePoint(std::initializer_list<std::int64_t> coords);
  explicit LatticePoint(std::span<const std::int64_t> coords);

  static LatticePoint zero(int d);
  /// scale * e_axis
  static LatticePoint axis(int d, std::size_t axis, std::int64_t scale);

  std::size_t size() const noexcept { return size_; }
  int dim() const noexcept { return static_cast<int>(size_ / 2); }
  std::int64_t operator[](std::size_t i) const noexcept { return coords_[i]; }
  std::span<const std::int64_t> coords() const noexcept { return {coords_.data(), size_}; }
  bool is_zero() const noexcept;

  friend bool operator==(const LatticePoint& a, const LatticePoint& b) noexcept {
    return a.size_ == b.size_ && std::equal(a.coords_.begin(), a.coords_.begin() + a.size_, b.coords_.begin());
  }
  /// Lexicographic on coordinates; points of smaller dimension sort first.
  friend std::strong_ordering operator<=>(const LatticePoint& a, const LatticePoint& b) noexcept {
    if (auto c = a.size_ <=> b.size_; c != 0) return c;
    for (std::size_t i = 0; i < a.size_; ++i) {
      if (a.coords_[i] != b.coords_[i]) return a.coords_[i] <=> b.coords_[i];
    }
    return std::strong_ordering::equal;
  }

  friend LatticePoint operator+(const LatticePoint& a, const LatticePoint& b);
  friend LatticePoint operator-(const LatticePoint& a, const LatticePoint& b);
  LatticePoint operator-() const;

 private:
  std::array<std::int64_t, kMaxCoords> coords_{};
  std::uint8_t size_ = 0;
};

std::ostream& operator<<(std::ostream& os, const LatticePoint& p);

/// l1 norm; throws OverflowError when it does not fit in int64.
std::int64_t norm1(const LatticePoint& p);
std::int64_t max_norm(const LatticePoint& p);

void require_same_dim(const LatticePoint& a, const LatticePoint& b);

/// An element (m, k) of Z^{2d} x Z^{2d}.
struct LatticePair {
  LatticePoint m;
  LatticePoint k;

  int dim() const noexcept { return m.dim(); }
  friend bool operator==(const LatticePair&, const LatticePair&) = default;
  friend auto operator<=>(const LatticePair&, const LatticePair&) = default;
};

std::ostream& operator<<(std::ostream& os, const LatticePair& p);

struct LatticePointHash {
  std::size_t operator()(const LatticePoint& p) const noexcept;
};
struct LatticePairHash {
  std::size_t operator()(const LatticePair& p) const noexcept;
};

/// The canonical bijection N -> Z^{2d} x Z^{2d}: pairs are ordered by the max-norm of
/// the concatenated coordinates, then by its l1 norm, then lexicographically.
class PairOrdering {
 public:
  explicit PairOrdering(int d);

  int dim() const noexcept { return d_; }

  /// f(t)
  LatticePair enumerate(std::uint64_t t) const;
  /// f^{-1}(pair)
  std::uint64_t rank(const LatticePair& pair) const;
  /// (a precedes-or-equals b) in the induced total order
  bool precedes(const LatticePair& a, const LatticePair& b) const;
  /// Strict three-way comparison in the induced order.
  std::strong_ordering compare(const LatticePair& a, const LatticePair& b) const;
  /// f(0), ..., f(count-1), generated shell by shell.
  std::vector<LatticePair> prefix(std::uint64_t count) const;
  /// max { |n|_1 + |l|_1 : (n,l) precedes-or-equals pair }.
  std::int64_t max_l1_up_to(const LatticePair& pair) const;

 private:
  void check(const LatticePair& p) const;
  int d_;
};

std::vector<std::int64_t> concat(const LatticePair& p);
LatticePair split(std::span<const std::int64_t> coords);

/// All pairs with |m|_1 + |k|_1 <= radius, in canonical order.
std::vector<LatticePair> l1_window(int d, std::int64_t radius);

}  // namespace optrans
