#include "poo/poo.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "poo/error.hpp"

namespace poo {

void PooConfig::validate() const {
  if (!partitioning) throw Error(ErrorKind::config, "POO needs a partitioning");
  if (!(rho_max > 0.0 && rho_max < 1.0)) throw Error(ErrorKind::config, "rho_max must lie in (0, 1)");
  if (!(nu_max > 0.0)) throw Error(ErrorKind::config, "nu_max must be positive");
  if (budget < 1) throw Error(ErrorKind::config, "budget must be at least 1");
}

double max_dimension(unsigned arity, double rho_max) {
  return std::log(static_cast<double>(arity)) / std::log(1.0 / rho_max);
}

bool needs_more_instances(std::uint64_t n, std::uint64_t instances, double d_max) {
  if (n < 3) return false;
  const double nd = static_cast<double>(n);
  return static_cast<double>(instances) <= 0.5 * d_max * std::log(nd / std::log(nd));
}

std::uint64_t required_instances(std::uint64_t n, double d_max) {
  std::uint64_t count = 1;
  while (needs_more_instances(n, count, d_max)) count *= 2;
  return count;
}

std::vector<double> rho_grid(double rho_max, std::uint64_t count) {
  std::vector<double> grid;
  grid.reserve(count);
  for (std::uint64_t i = 1; i <= count; ++i) {
    grid.push_back(std::pow(rho_max, static_cast<double>(count) / static_cast<double>(i)));
  }
  return grid;
}

// ---------------------------------------------------------------------------

EvalCache::Key EvalCache::key_of(std::span<const double> x) {
  Key key(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) key[j] = std::bit_cast<std::uint64_t>(x[j]);
  return key;
}

EvalCache::Result EvalCache::request(std::uint32_t instance, std::span<const double> x,
                                     NoisyObjective& objective) {
  const Key key = key_of(x);
  auto it = entries_.find(key);
  if (it != entries_.end()) {
    std::uint32_t& used = it->second.consumed[instance];
    if (used < it->second.rewards.size()) {
      ++hits_;
      return {it->second.rewards[used++], false};
    }
  }
  const double reward = objective.eval_noisy(x);
  Entry& entry = it != entries_.end() ? it->second : entries_[key];
  entry.rewards.push_back(reward);
  ++entry.consumed[instance];
  ++misses_;
  return {reward, true};
}

std::size_t EvalCache::stored(std::span<const double> x) const {
  auto it = entries_.find(key_of(x));
  return it == entries_.end() ? 0 : it->second.rewards.size();
}

std::size_t EvalCache::consumed(std::uint32_t instance, std::span<const double> x) const {
  auto it = entries_.find(key_of(x));
  if (it == entries_.end()) return 0;
  auto c = it->second.consumed.find(instance);
  return c == it->second.consumed.end() ? 0 : c->second;
}

// ---------------------------------------------------------------------------

namespace {

class SharedProvider final : public EvalProvider {
 public:
  SharedProvider(EvalCache& cache, std::uint32_t id, NoisyObjective& objective)
      : cache_(cache), id_(id), objective_(objective) {}

  double evaluate(std::span<const double> x) override {
    const auto result = cache_.request(id_, x, objective_);
    fresh = result.fresh;
    return result.reward;
  }

  bool fresh = false;

 private:
  EvalCache& cache_;
  std::uint32_t id_;
  NoisyObjective& objective_;
};

}  // namespace

PooState::PooState(PooConfig config, NoisyObjective objective)
    : config_(std::move(config)), objective_(std::move(objective)) {
  config_.validate();
  if (config_.partitioning->dimension() != objective_.base().dimension()) {
    throw Error(ErrorKind::config, "partitioning and objective dimensions differ");
  }
  rho_max_ = config_.rho_max;
  d_max_ = max_dimension(config_.partitioning->arity(), rho_max_);
  nu_max_ = config_.nu_max;
  next_growth_n_ = config_.growth_start;
  spawn(rho_max_);
}

std::uint32_t PooState::spawn(double rho) {
  const auto id = static_cast<std::uint32_t>(slots_.size());
  // Seeded by the instance's rho, not by when it was spawned.
  const std::uint64_t seed = derive_seed(config_.seed, std::bit_cast<std::uint64_t>(rho));
  slots_.push_back({id, HooInstance(config_.partitioning, nu_max_, rho, seed)});
  auto pos = std::find_if(order_.begin(), order_.end(),
                          [&](std::uint32_t s) { return slots_[s].instance.rho() > rho; });
  order_.insert(pos, id);
  return id;
}

double PooState::step_slot(std::uint32_t slot, StepReport& report) {
  HooInstance& inst = slots_[slot].instance;
  bool fresh = true;
  double reward;
  if (config_.sharing) {
    SharedProvider provider(cache_, slot, objective_);
    reward = inst.step(provider).reward;
    fresh = provider.fresh;
  } else {
    reward = inst.step(objective_).reward;
  }
  ++n_;
  ++report.evaluations;
  if (fresh) {
    ++n_fresh_;
    ++report.fresh;
  }
  return reward;
}

StepReport PooState::advance() {
  StepReport report;
  if (!budget_left()) {
    report.budget_exhausted = true;
    return report;
  }
  if (!pending_.empty()) {
    SpawnTask& task = pending_.front();
    if (task.slot < 0) {
      task.slot = spawn(task.rho);
      ++report.spawned;
    }
    step_slot(static_cast<std::uint32_t>(task.slot), report);
    if (slots_[task.slot].instance.time() >= task.target_time) pending_.pop_front();
  } else {
    step_slot(order_[cursor_], report);
    if (++cursor_ == order_.size()) {
      cursor_ = 0;
      on_round_complete();
    }
  }
  report.budget_exhausted = !budget_left();
  return report;
}

StepReport PooState::poo_step() {
  StepReport total;
  if (!budget_left()) {
    total.budget_exhausted = true;
    return total;
  }
  do {
    const StepReport r = advance();
    total.evaluations += r.evaluations;
    total.fresh += r.fresh;
    total.spawned += r.spawned;
  } while (budget_left() && !at_batch_boundary());
  total.budget_exhausted = !budget_left();
  return total;
}

void PooState::run_until(std::uint64_t target) {
  const std::uint64_t stop = std::min(target, config_.budget);
  while (budget_used() < stop) advance();
}

void PooState::on_round_complete() {
  std::uint64_t planned_n = n_;
  std::uint64_t planned_count = slots_.size();
  if (config_.growth != GrowthSchedule::off && n_ >= next_growth_n_) {
    plan_growth(planned_n, planned_count);
    if (config_.growth == GrowthSchedule::rho_sqrt) {
      next_growth_n_ = n_ > std::numeric_limits<std::uint32_t>::max() ? std::numeric_limits<std::uint64_t>::max()
                                                                       : n_ * n_;
    } else {
      next_growth_n_ = 2 * n_;
    }
  }
  if (config_.nu_growth != NuGrowth::off) apply_nu_growth();
  plan_doublings(planned_n, planned_count);
}

void PooState::plan_growth(std::uint64_t& planned_n, std::uint64_t& planned_count) {
  const std::uint64_t count = planned_count;
  const std::uint64_t t = planned_n / count;
  const unsigned arity = config_.partitioning->arity();
  if (config_.growth == GrowthSchedule::rho_sqrt) {
    rho_max_ = std::sqrt(rho_max_);
    d_max_ = max_dimension(arity, rho_max_);
    // The old instances are the lower half of the grid for the new rho_max.
    for (std::uint64_t i = count + 1; i <= 2 * count; ++i) {
      pending_.push_back({std::pow(rho_max_, static_cast<double>(2 * count) / static_cast<double>(i)), t});
    }
    planned_count = 2 * count;
    planned_n += count * t;
  } else if (config_.growth == GrowthSchedule::dmax_increment) {
    const double ratio = static_cast<double>(count) / static_cast<double>(count + 1);
    d_max_ *= static_cast<double>(count + 1) / static_cast<double>(count);
    rho_max_ = std::pow(rho_max_, ratio);
    pending_.push_back({rho_max_, t});
    planned_count = count + 1;
    planned_n += t;
  }
}

void PooState::plan_doublings(std::uint64_t planned_n, std::uint64_t planned_count) {
  while (needs_more_instances(planned_n, planned_count, d_max_)) {
    const std::vector<double> grid = rho_grid(rho_max_, 2 * planned_count);
    const std::uint64_t t = planned_n / planned_count;
    // Even grid positions are the existing instances; fill the odd ones.
    for (std::size_t i = 1; i <= grid.size(); i += 2) pending_.push_back({grid[i - 1], t});
    planned_n *= 2;
    planned_count *= 2;
  }
}

void PooState::apply_nu_growth() {
  const double n = static_cast<double>(n_);
  const double factor = n > std::exp(1.0) ? std::max(1.0, std::log(std::log(n))) : 1.0;
  nu_max_ = config_.nu_max * factor;
  for (Slot& slot : slots_) slot.instance.set_nu(nu_max_);
}

void PooState::grow_limits() {
  if (config_.growth == GrowthSchedule::off) return;
  if (!at_batch_boundary() || n_ == 0) {
    throw Error(ErrorKind::not_ready, "limits can only grow at a batch boundary after the first round");
  }
  std::uint64_t planned_n = n_;
  std::uint64_t planned_count = slots_.size();
  plan_growth(planned_n, planned_count);
}

std::size_t PooState::best_instance() const {
  std::size_t best = 0;
  double best_mean = -std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < order_.size(); ++g) {
    const HooInstance& inst = slots_[order_[g]].instance;
    if (inst.time() == 0) throw Error(ErrorKind::not_ready, "an instance has no evaluations yet");
    const double m = inst.mean_reward();
    if (m > best_mean) {
      best_mean = m;
      best = g;
    }
  }
  return best;
}

Point PooState::recommend(Engine& rng, RecommendMode mode) const {
  return instance(best_instance()).recommend(rng, mode);
}

double PooState::cache_hit_rate() const {
  return n_ == 0 ? 0.0 : 1.0 - static_cast<double>(n_fresh_) / static_cast<double>(n_);
}

std::vector<double> PooState::rhos() const {
  std::vector<double> out;
  out.reserve(order_.size());
  for (std::uint32_t s : order_) out.push_back(slots_[s].instance.rho());
  return out;
}

}  // namespace poo
