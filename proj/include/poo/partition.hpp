#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace poo {

using Point = std::vector<double>;

/// Address of one cell: depth h and 0-based index i, 0 <= i < K^h.
struct CellId {
  unsigned depth = 0;
  std::uint64_t index = 0;

  friend auto operator<=>(const CellId&, const CellId&) = default;
};

/// Axis-aligned box of half-open intervals [lo, hi). An axis whose upper end
/// coincides with the domain's upper boundary is closed there.
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;
  std::vector<bool> hi_closed;

  Box() = default;
  Box(std::vector<double> lo, std::vector<double> hi, std::vector<bool> hi_closed);

  /// Closed-topped box [lo, hi] on every axis; the usual way to state a domain.
  static Box closed(std::vector<double> lo, std::vector<double> hi);
  /// [lo, hi) on every axis.
  static Box half_open(std::vector<double> lo, std::vector<double> hi);

  std::size_t dimension() const { return lo.size(); }
  double width(std::size_t axis) const { return hi[axis] - lo[axis]; }
  double measure() const;
  Point center() const;
  bool contains(std::span<const double> x) const;

  friend bool operator==(const Box&, const Box&) = default;
};

/// Regular K-ary partitioning of a box: a depth-h cell is split along
/// coordinate (h mod p) into K equal sub-intervals.
class StandardPartitioning {
 public:
  StandardPartitioning(Box domain, unsigned arity);

  const Box& domain() const { return domain_; }
  unsigned arity() const { return arity_; }
  std::size_t dimension() const { return domain_.dimension(); }

  /// Deepest level whose cell count K^h still fits an index.
  unsigned max_addressable_depth() const { return max_depth_; }

  bool is_valid(const CellId& cell) const;
  std::uint64_t cells_at_depth(unsigned depth) const;

  std::vector<CellId> children(const CellId& cell) const;
  CellId parent(const CellId& cell) const;

  Box region(const CellId& cell) const;
  Point representative(const CellId& cell) const;
  CellId locate(std::span<const double> x, unsigned depth) const;

  /// Child regions of a depth-`depth` cell with region `parent`. Everything
  /// that needs cell geometry goes through this so regions agree bit-for-bit.
  std::vector<Box> split(const Box& parent, unsigned depth) const;
  Box split_child(const Box& parent, unsigned depth, unsigned k) const;

  /// Which child of `parent` (a depth-`depth` cell) holds x.
  unsigned child_containing(const Box& parent, unsigned depth, std::span<const double> x) const;

  std::size_t split_axis(unsigned depth) const { return depth % dimension(); }

 private:
  void require_valid(const CellId& cell) const;

  Box domain_;
  unsigned arity_;
  unsigned max_depth_ = 0;
};

}  // namespace poo
