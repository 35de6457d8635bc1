#include "poo/partition.hpp"

#include <cmath>
#include <string>

#include "poo/error.hpp"

namespace poo {

Box::Box(std::vector<double> lo_, std::vector<double> hi_, std::vector<bool> hi_closed_)
    : lo(std::move(lo_)), hi(std::move(hi_)), hi_closed(std::move(hi_closed_)) {
  if (lo.size() != hi.size() || lo.size() != hi_closed.size()) {
    throw Error(ErrorKind::geometry, "box bounds have mismatched dimensions");
  }
}

Box Box::closed(std::vector<double> lo, std::vector<double> hi) {
  std::vector<bool> flags(lo.size(), true);
  return Box(std::move(lo), std::move(hi), std::move(flags));
}

Box Box::half_open(std::vector<double> lo, std::vector<double> hi) {
  std::vector<bool> flags(lo.size(), false);
  return Box(std::move(lo), std::move(hi), std::move(flags));
}

double Box::measure() const {
  double m = 1.0;
  for (std::size_t j = 0; j < dimension(); ++j) m *= width(j);
  return m;
}

Point Box::center() const {
  Point c(dimension());
  for (std::size_t j = 0; j < dimension(); ++j) c[j] = 0.5 * (lo[j] + hi[j]);
  return c;
}

bool Box::contains(std::span<const double> x) const {
  if (x.size() != dimension()) return false;
  for (std::size_t j = 0; j < dimension(); ++j) {
    if (!(x[j] >= lo[j])) return false;
    if (hi_closed[j] ? !(x[j] <= hi[j]) : !(x[j] < hi[j])) return false;
  }
  return true;
}

StandardPartitioning::StandardPartitioning(Box domain, unsigned arity)
    : domain_(std::move(domain)), arity_(arity) {
  if (arity_ < 2) throw Error(ErrorKind::config, "partitioning arity must be at least 2");
  if (domain_.dimension() == 0) throw Error(ErrorKind::geometry, "domain has no coordinates");
  for (std::size_t j = 0; j < domain_.dimension(); ++j) {
    if (!(domain_.lo[j] < domain_.hi[j])) {
      throw Error(ErrorKind::geometry, "domain has zero width along axis " + std::to_string(j));
    }
  }
  // K^h < 2^63 keeps index arithmetic K*i + k overflow-free.
  std::uint64_t count = 1;
  while (count <= (std::uint64_t{1} << 62) / arity_) {
    count *= arity_;
    ++max_depth_;
  }
}

std::uint64_t StandardPartitioning::cells_at_depth(unsigned depth) const {
  if (depth > max_depth_) {
    throw Error(ErrorKind::address, "depth " + std::to_string(depth) + " exceeds addressable range");
  }
  std::uint64_t count = 1;
  for (unsigned h = 0; h < depth; ++h) count *= arity_;
  return count;
}

bool StandardPartitioning::is_valid(const CellId& cell) const {
  return cell.depth <= max_depth_ && cell.index < cells_at_depth(cell.depth);
}

void StandardPartitioning::require_valid(const CellId& cell) const {
  if (!is_valid(cell)) {
    throw Error(ErrorKind::address, "invalid cell (" + std::to_string(cell.depth) + ", " +
                                        std::to_string(cell.index) + ")");
  }
}

std::vector<CellId> StandardPartitioning::children(const CellId& cell) const {
  require_valid(cell);
  if (cell.depth + 1 > max_depth_) {
    throw Error(ErrorKind::address, "children of cell exceed addressable depth");
  }
  std::vector<CellId> out;
  out.reserve(arity_);
  for (unsigned k = 0; k < arity_; ++k) out.push_back({cell.depth + 1, cell.index * arity_ + k});
  return out;
}

CellId StandardPartitioning::parent(const CellId& cell) const {
  require_valid(cell);
  if (cell.depth == 0) throw Error(ErrorKind::address, "root has no parent");
  return {cell.depth - 1, cell.index / arity_};
}

Box StandardPartitioning::split_child(const Box& parent, unsigned depth, unsigned k) const {
  const std::size_t axis = split_axis(depth);
  const double lo = parent.lo[axis];
  const double span = parent.hi[axis] - lo;
  Box child = parent;
  child.lo[axis] = lo + span * static_cast<double>(k) / arity_;
  if (k + 1 == arity_) {
    child.hi[axis] = parent.hi[axis];
  } else {
    child.hi[axis] = lo + span * static_cast<double>(k + 1) / arity_;
    child.hi_closed[axis] = false;
  }
  return child;
}

std::vector<Box> StandardPartitioning::split(const Box& parent, unsigned depth) const {
  std::vector<Box> out;
  out.reserve(arity_);
  for (unsigned k = 0; k < arity_; ++k) out.push_back(split_child(parent, depth, k));
  return out;
}

unsigned StandardPartitioning::child_containing(const Box& parent, unsigned depth,
                                                std::span<const double> x) const {
  const std::size_t axis = split_axis(depth);
  const double lo = parent.lo[axis];
  const double span = parent.hi[axis] - lo;
  double guess = std::floor((x[axis] - lo) / span * arity_);
  if (!(guess >= 0.0)) guess = 0.0;
  unsigned k = guess >= arity_ - 1 ? arity_ - 1 : static_cast<unsigned>(guess);
  // The floating guess can be off by one next to a boundary; settle it
  // against the exact child bounds.
  while (k > 0 && x[axis] < split_child(parent, depth, k).lo[axis]) --k;
  while (k + 1 < arity_ && x[axis] >= split_child(parent, depth, k + 1).lo[axis]) ++k;
  return k;
}

Box StandardPartitioning::region(const CellId& cell) const {
  require_valid(cell);
  // Base-K digits of the index, most significant first, select the child at
  // each level.
  std::vector<unsigned> digits(cell.depth);
  std::uint64_t index = cell.index;
  for (unsigned h = cell.depth; h-- > 0;) {
    digits[h] = static_cast<unsigned>(index % arity_);
    index /= arity_;
  }
  Box box = domain_;
  for (unsigned h = 0; h < cell.depth; ++h) box = split_child(box, h, digits[h]);
  return box;
}

Point StandardPartitioning::representative(const CellId& cell) const {
  return region(cell).center();
}

CellId StandardPartitioning::locate(std::span<const double> x, unsigned depth) const {
  if (!domain_.contains(x)) throw Error(ErrorKind::domain, "point lies outside the domain");
  if (depth > max_depth_) throw Error(ErrorKind::address, "depth exceeds addressable range");
  Box box = domain_;
  CellId cell{0, 0};
  for (unsigned h = 0; h < depth; ++h) {
    const unsigned k = child_containing(box, h, x);
    box = split_child(box, h, k);
    cell = {h + 1, cell.index * arity_ + k};
  }
  return cell;
}

}  // namespace poo
