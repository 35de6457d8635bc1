#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "poo/hoo.hpp"
#include "poo/objectives.hpp"

namespace poo {

enum class BudgetMode { fresh, logical };
enum class GrowthSchedule { off, dmax_increment, rho_sqrt };
enum class NuGrowth { off, loglog };

struct PooConfig {
  std::shared_ptr<const StandardPartitioning> partitioning;
  double rho_max = 0.9;
  double nu_max = 1.0;
  bool sharing = true;
  std::uint64_t budget = 1000;
  BudgetMode budget_mode = BudgetMode::fresh;
  GrowthSchedule growth = GrowthSchedule::off;
  NuGrowth nu_growth = NuGrowth::off;
  // Logical count at which automatic growth first fires. Later firings:
  // dmax-increment each time n doubles, rho-sqrt each time ln n doubles.
  std::uint64_t growth_start = 64;
  std::uint64_t seed = 0;

  void validate() const;
};

/// ln K / ln(1/rho_max).
double max_dimension(unsigned arity, double rho_max);

/// True when N <= 1/2 D_max ln(n / ln n); never for n < 3.
bool needs_more_instances(std::uint64_t n, std::uint64_t instances, double d_max);

/// Smallest power of two strictly above 1/2 D_max ln(n / ln n), at least 1.
std::uint64_t required_instances(std::uint64_t n, double d_max);

/// {rho_max^(N/i) : i = 1..N}, ascending.
std::vector<double> rho_grid(double rho_max, std::uint64_t count);

/// Point-keyed reward store. A stored reward is handed to each instance at
/// most once; past the stored ones, a request draws a fresh evaluation.
class EvalCache {
 public:
  struct Result {
    double reward;
    bool fresh;
  };

  Result request(std::uint32_t instance, std::span<const double> x, NoisyObjective& objective);

  std::size_t points() const { return entries_.size(); }
  std::size_t stored(std::span<const double> x) const;
  std::size_t consumed(std::uint32_t instance, std::span<const double> x) const;
  std::uint64_t hits() const { return hits_; }
  std::uint64_t misses() const { return misses_; }

 private:
  friend struct PooCodec;
  using Key = std::vector<std::uint64_t>;
  struct Entry {
    std::vector<double> rewards;
    std::map<std::uint32_t, std::uint32_t> consumed;
  };

  static Key key_of(std::span<const double> x);

  std::map<Key, Entry> entries_;
  std::uint64_t hits_ = 0;
  std::uint64_t misses_ = 0;
};

struct StepReport {
  std::uint64_t evaluations = 0;
  std::uint64_t fresh = 0;
  std::uint64_t spawned = 0;
  bool budget_exhausted = false;
};

/// Parallel HOO instances over a grid of rho values, doubled as the
/// evaluation count grows, recommending from the best empirical instance.
class PooState {
 public:
  PooState(PooConfig config, NoisyObjective objective);

  /// Finish the current round and any catch-up it triggers, stopping early
  /// if the budget runs out (the state stays valid and resumable).
  StepReport poo_step();

  /// Exactly one HOO evaluation, or nothing once the budget is spent.
  StepReport advance();

  /// Advance until the budget counter reaches min(target, budget).
  void run_until(std::uint64_t target);
  void run() { run_until(config_.budget); }

  /// Apply the configured growth schedule now. Only valid at a batch boundary.
  void grow_limits();

  bool budget_left() const { return budget_used() < config_.budget; }
  std::uint64_t budget_used() const {
    return config_.budget_mode == BudgetMode::fresh ? n_fresh_ : n_;
  }
  bool at_batch_boundary() const { return pending_.empty() && cursor_ == 0; }

  /// Grid position of argmax mean reward, ties to the smaller position.
  std::size_t best_instance() const;
  Point recommend(Engine& rng, RecommendMode mode = RecommendMode::uniform_random) const;

  std::uint64_t logical_evaluations() const { return n_; }
  std::uint64_t fresh_evaluations() const { return n_fresh_; }
  double cache_hit_rate() const;
  std::size_t instance_count() const { return slots_.size(); }
  double d_max() const { return d_max_; }
  double rho_max() const { return rho_max_; }
  double nu_max() const { return nu_max_; }

  /// Instance at a grid position (ascending rho).
  const HooInstance& instance(std::size_t grid_index) const { return slots_[order_[grid_index]].instance; }
  std::vector<double> rhos() const;

  const PooConfig& config() const { return config_; }
  const EvalCache& cache() const { return cache_; }
  const NoisyObjective& objective() const { return objective_; }

 private:
  friend struct PooCodec;

  struct Slot {
    std::uint32_t id;
    HooInstance instance;
  };
  struct SpawnTask {
    double rho;
    std::uint64_t target_time;
    std::int64_t slot = -1;  // assigned when the first catch-up step runs
  };

  std::uint32_t spawn(double rho);
  double step_slot(std::uint32_t slot, StepReport& report);
  void on_round_complete();
  void plan_growth(std::uint64_t& planned_n, std::uint64_t& planned_count);
  void plan_doublings(std::uint64_t planned_n, std::uint64_t planned_count);
  void apply_nu_growth();

  PooConfig config_;
  NoisyObjective objective_;
  EvalCache cache_;
  std::vector<Slot> slots_;          // spawn order; slot index is the instance id
  std::vector<std::uint32_t> order_;  // slot indices sorted by rho
  std::deque<SpawnTask> pending_;
  std::size_t cursor_ = 0;
  std::uint64_t n_ = 0;
  std::uint64_t n_fresh_ = 0;
  double rho_max_;
  double d_max_;
  double nu_max_;
  std::uint64_t next_growth_n_;
};

}  // namespace poo
