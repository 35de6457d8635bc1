#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <vector>

#include "poo/objectives.hpp"
#include "poo/partition.hpp"
#include "poo/random.hpp"

namespace poo {

struct NodeStats {
  std::uint64_t visits = 0;
  double reward_sum = 0.0;
  double u_value = std::numeric_limits<double>::infinity();
  double b_value = std::numeric_limits<double>::infinity();

  double mean() const { return visits == 0 ? 0.0 : reward_sum / static_cast<double>(visits); }
};

/// One explored cell. Children are stored contiguously starting at
/// first_child, always after their parent.
struct HooNode {
  CellId cell;  // index is meaningful only up to the partitioning's addressable depth
  std::int64_t parent = -1;
  std::int64_t first_child = -1;
  bool sampled = false;  // evaluated while it was a leaf
  NodeStats stats;
  Box region;

  unsigned depth() const { return cell.depth; }
  bool is_leaf() const { return first_child < 0; }
};

class HooTree {
 public:
  explicit HooTree(const StandardPartitioning& part);

  std::size_t size() const { return nodes_.size(); }
  unsigned arity() const { return arity_; }
  const HooNode& node(std::size_t i) const { return nodes_[i]; }
  HooNode& node(std::size_t i) { return nodes_[i]; }
  const std::vector<HooNode>& nodes() const { return nodes_; }

  /// Attach the K children of a leaf; returns the index of the first one.
  std::size_t expand(std::size_t leaf, const StandardPartitioning& part);

 private:
  friend struct InstanceCodec;
  HooTree() = default;

  std::vector<HooNode> nodes_;
  unsigned arity_ = 0;
};

/// U(t) = mean + sqrt(2 ln t / N) + nu rho^h, or +inf for an unvisited cell.
double compute_u(const NodeStats& stats, std::uint64_t t, double nu, double rho, unsigned depth);

/// Bottom-up b = u at leaves and b = min(u, max child b) above, using the
/// u-values already stored in the tree.
void propagate_b_values(HooTree& tree);

/// Recompute every u-value for time t, then propagate b.
void refresh_b_values(HooTree& tree, std::uint64_t t, double nu, double rho);

struct Evaluation {
  Point point;
  double reward = 0.0;
  unsigned depth = 0;
  std::size_t node = 0;
};

enum class RecommendMode { uniform_random, deepest };

/// HOO sampling only at cell centers and expanding a cell right after its
/// single sample.
class HooInstance {
 public:
  HooInstance(std::shared_ptr<const StandardPartitioning> part, double nu, double rho, std::uint64_t seed);

  /// One evaluation: refresh U/B for t+1, descend along maximal b (ties at
  /// random), sample the reached leaf's center, update the path, expand.
  const Evaluation& step(EvalProvider& provider);

  /// pre: time() >= 1.
  Point recommend(Engine& rng, RecommendMode mode = RecommendMode::uniform_random) const;
  double mean_reward() const;

  std::uint64_t time() const { return log_.size(); }
  double nu() const { return nu_; }
  double rho() const { return rho_; }
  void set_nu(double nu) { nu_ = nu; }

  const HooTree& tree() const { return tree_; }
  const std::vector<Evaluation>& log() const { return log_; }
  const StandardPartitioning& partitioning() const { return *part_; }

 private:
  friend struct InstanceCodec;

  void refresh(std::uint64_t t);
  double rho_power(unsigned depth);

  std::shared_ptr<const StandardPartitioning> part_;
  double nu_;
  double rho_;
  Engine engine_;
  HooTree tree_;
  std::vector<Evaluation> log_;
  double reward_total_ = 0.0;
  std::vector<double> rho_powers_;
  std::vector<std::size_t> ties_;
};

}  // namespace poo
