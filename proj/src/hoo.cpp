#include "poo/hoo.hpp"

#include <algorithm>
#include <cmath>

#include "poo/error.hpp"

namespace poo {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

HooTree::HooTree(const StandardPartitioning& part) : arity_(part.arity()) {
  HooNode root;
  root.region = part.domain();
  nodes_.push_back(std::move(root));
}

std::size_t HooTree::expand(std::size_t leaf, const StandardPartitioning& part) {
  const std::size_t first = nodes_.size();
  const unsigned depth = nodes_[leaf].depth();
  const bool addressable = depth + 1 <= part.max_addressable_depth();
  std::vector<Box> regions = part.split(nodes_[leaf].region, depth);
  const std::uint64_t base = nodes_[leaf].cell.index;
  for (unsigned k = 0; k < arity_; ++k) {
    HooNode child;
    child.cell = {depth + 1, addressable ? base * arity_ + k : std::numeric_limits<std::uint64_t>::max()};
    child.parent = static_cast<std::int64_t>(leaf);
    child.region = std::move(regions[k]);
    nodes_.push_back(std::move(child));
  }
  nodes_[leaf].first_child = static_cast<std::int64_t>(first);
  return first;
}

double compute_u(const NodeStats& stats, std::uint64_t t, double nu, double rho, unsigned depth) {
  if (stats.visits == 0) return kInf;
  const double width = std::sqrt(2.0 * std::log(static_cast<double>(t)) / static_cast<double>(stats.visits));
  return stats.mean() + width + nu * std::pow(rho, static_cast<double>(depth));
}

void propagate_b_values(HooTree& tree) {
  const unsigned k = tree.arity();
  for (std::size_t i = tree.size(); i-- > 0;) {
    HooNode& n = tree.node(i);
    if (n.is_leaf()) {
      n.stats.b_value = n.stats.u_value;
      continue;
    }
    double best = -kInf;
    for (unsigned c = 0; c < k; ++c) best = std::max(best, tree.node(n.first_child + c).stats.b_value);
    n.stats.b_value = std::min(n.stats.u_value, best);
  }
}

void refresh_b_values(HooTree& tree, std::uint64_t t, double nu, double rho) {
  for (std::size_t i = 0; i < tree.size(); ++i) {
    HooNode& n = tree.node(i);
    n.stats.u_value = compute_u(n.stats, t, nu, rho, n.depth());
  }
  propagate_b_values(tree);
}

// ---------------------------------------------------------------------------

HooInstance::HooInstance(std::shared_ptr<const StandardPartitioning> part, double nu, double rho,
                         std::uint64_t seed)
    : part_(std::move(part)), nu_(nu), rho_(rho), engine_(seed), tree_(*part_) {
  if (!(nu >= 0.0)) throw Error(ErrorKind::config, "HOO nu must be non-negative");
  if (!(rho >= 0.0 && rho < 1.0)) throw Error(ErrorKind::config, "HOO rho must lie in [0, 1)");
}

double HooInstance::rho_power(unsigned depth) {
  while (rho_powers_.size() <= depth) {
    rho_powers_.push_back(std::pow(rho_, static_cast<double>(rho_powers_.size())));
  }
  return rho_powers_[depth];
}

// Same arithmetic as refresh_b_values, with log t and rho^h hoisted out of
// the loop. This runs once per evaluation over the whole tree.
void HooInstance::refresh(std::uint64_t t) {
  const double log_term = 2.0 * std::log(static_cast<double>(t));
  const unsigned k = tree_.arity();
  for (std::size_t i = tree_.size(); i-- > 0;) {
    HooNode& n = tree_.node(i);
    NodeStats& s = n.stats;
    s.u_value = s.visits == 0 ? kInf
                              : s.mean() + std::sqrt(log_term / static_cast<double>(s.visits)) +
                                    nu_ * rho_power(n.depth());
    if (n.is_leaf()) {
      s.b_value = s.u_value;
      continue;
    }
    double best = -kInf;
    for (unsigned c = 0; c < k; ++c) best = std::max(best, tree_.node(n.first_child + c).stats.b_value);
    s.b_value = std::min(s.u_value, best);
  }
}

const Evaluation& HooInstance::step(EvalProvider& provider) {
  refresh(time() + 1);

  std::size_t current = 0;
  const unsigned k = tree_.arity();
  while (!tree_.node(current).is_leaf()) {
    const std::size_t first = static_cast<std::size_t>(tree_.node(current).first_child);
    double best = -kInf;
    ties_.clear();
    for (unsigned c = 0; c < k; ++c) {
      const double b = tree_.node(first + c).stats.b_value;
      if (b > best) {
        best = b;
        ties_.clear();
      }
      if (b == best) ties_.push_back(first + c);
    }
    current = ties_.size() == 1 ? ties_.front() : ties_[uniform_index(engine_, ties_.size())];
  }

  Point x = tree_.node(current).region.center();
  const double reward = provider.evaluate(x);

  for (std::int64_t i = static_cast<std::int64_t>(current); i >= 0; i = tree_.node(i).parent) {
    NodeStats& s = tree_.node(i).stats;
    ++s.visits;
    s.reward_sum += reward;
  }
  tree_.node(current).sampled = true;
  const unsigned depth = tree_.node(current).depth();
  tree_.expand(current, *part_);

  reward_total_ += reward;
  log_.push_back({std::move(x), reward, depth, current});
  return log_.back();
}

Point HooInstance::recommend(Engine& rng, RecommendMode mode) const {
  if (log_.empty()) throw Error(ErrorKind::empty, "HOO instance has no evaluations to recommend from");
  if (mode == RecommendMode::uniform_random) return log_[uniform_index(rng, log_.size())].point;
  std::size_t best = 0;
  for (std::size_t i = 1; i < log_.size(); ++i) {
    if (log_[i].depth >= log_[best].depth) best = i;
  }
  return log_[best].point;
}

double HooInstance::mean_reward() const {
  if (log_.empty()) throw Error(ErrorKind::empty, "HOO instance has no evaluations");
  return reward_total_ / static_cast<double>(log_.size());
}

}  // namespace poo
