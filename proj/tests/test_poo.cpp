#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <set>

#include "doctest.h"
#include "poo/error.hpp"
#include "poo/poo.hpp"
#include "poo/random.hpp"

using namespace poo;

namespace {

std::shared_ptr<const Objective> difficult() { return std::make_shared<DifficultFunction>(); }

PooConfig config_for(const Objective& f, double rho_max, std::uint64_t budget, unsigned arity = 2) {
  PooConfig c;
  c.partitioning = std::make_shared<StandardPartitioning>(f.domain(), arity);
  c.rho_max = rho_max;
  c.budget = budget;
  return c;
}

double threshold(std::uint64_t n, double d_max) {
  const double x = static_cast<double>(n);
  return 0.5 * d_max * std::log(x / std::log(x));
}

bool is_power_of_two(std::uint64_t n) { return n && !(n & (n - 1)); }

}  // namespace

TEST_CASE("instance schedule arithmetic") {
  const double d = max_dimension(2, 0.9);
  CHECK(d == doctest::Approx(6.57881).epsilon(1e-6));
  CHECK(threshold(100, d) == doctest::Approx(10.125).epsilon(1e-3));
  CHECK(required_instances(100, d) == 16);
  CHECK(required_instances(2, d) == 1);
  CHECK(required_instances(1, d) == 1);
  CHECK(threshold(10000, d) == doctest::Approx(23.0).epsilon(2e-3));
  CHECK(required_instances(10000, d) == 32);
  CHECK_FALSE(needs_more_instances(2, 1, 100.0));
  CHECK(needs_more_instances(3, 1, 100.0));
}

TEST_CASE("required_instances is the smallest power of two above the threshold") {
  Engine rng(1);
  for (int i = 0; i < 2000; ++i) {
    const double d = 0.1 + 20.0 * uniform01(rng);
    const std::uint64_t n = 3 + uniform_index(rng, 1000000);
    const std::uint64_t N = required_instances(n, d);
    REQUIRE(is_power_of_two(N));
    REQUIRE(static_cast<double>(N) > threshold(n, d));
    if (N > 1) REQUIRE(static_cast<double>(N / 2) <= threshold(n, d));
  }
}

TEST_CASE("rho grid") {
  CHECK(rho_grid(0.9, 1) == std::vector<double>{0.9});
  const auto g4 = rho_grid(0.9, 4);
  REQUIRE(g4.size() == 4);
  CHECK(g4[0] == doctest::Approx(0.6561).epsilon(1e-12));
  CHECK(g4[1] == doctest::Approx(0.81).epsilon(1e-12));
  CHECK(g4[2] == doctest::Approx(0.86894).epsilon(1e-5));
  CHECK(g4[3] == 0.9);
  const auto g2 = rho_grid(0.9, 2);
  CHECK(g2[0] == g4[1]);
  CHECK(g2[1] == g4[3]);
}

TEST_CASE("rho grid nests and is uniform in 1/ln(1/rho)") {
  for (double rho_max : {0.3, 0.7, 0.9, 0.99}) {
    for (std::uint64_t n = 1; n <= 512; n *= 2) {
      const auto g = rho_grid(rho_max, n);
      REQUIRE(std::is_sorted(g.begin(), g.end()));
      const auto g2 = rho_grid(rho_max, 2 * n);
      for (std::uint64_t i = 1; i <= n; ++i) REQUIRE(g2[2 * i - 1] == g[i - 1]);
      double widest = 0.0;
      for (std::size_t i = 0; i + 1 < g.size(); ++i) {
        widest = std::max(widest, std::abs(1.0 / std::log(1.0 / g[i + 1]) - 1.0 / std::log(1.0 / g[i])));
      }
      if (n > 1) REQUIRE(widest == doctest::Approx(1.0 / (n * std::log(1.0 / rho_max))).epsilon(1e-9));
    }
  }
}

TEST_CASE("evaluation cache") {
  auto f = difficult();
  NoisyObjective noisy(f, NoiseModel::uniform(0.1), 3);
  EvalCache cache;
  const Point x{0.75}, y{0.25};
  CHECK(cache.request(0, x, noisy).fresh);

  // A evaluates x twice: its second request is fresh since it already
  // consumed the first sample.
  const auto a2 = cache.request(0, x, noisy);
  CHECK(a2.fresh);
  CHECK(cache.stored(x) == 2);

  // B then gets the two stored rewards in storage order, then a fresh one.
  NoisyObjective replay(f, NoiseModel::uniform(0.1), 3);
  const double r0 = replay.eval_noisy(x), r1 = replay.eval_noisy(x);
  const auto b0 = cache.request(1, x, noisy), b1 = cache.request(1, x, noisy), b2 = cache.request(1, x, noisy);
  CHECK_FALSE(b0.fresh);
  CHECK_FALSE(b1.fresh);
  CHECK(b2.fresh);
  CHECK(b0.reward == r0);
  CHECK(b1.reward == r1);
  CHECK(cache.stored(x) == 3);
  CHECK(cache.consumed(1, x) == 3);
  CHECK(cache.consumed(0, x) == 2);
  CHECK(cache.consumed(0, y) == 0);
  CHECK(cache.hits() == 2);
  CHECK(cache.misses() == 3);
  CHECK_THROWS_AS(cache.request(0, Point{2.0}, noisy), Error);
  CHECK(cache.points() == 1);
}

TEST_CASE("fresh state and first doublings") {
  auto f = difficult();
  PooConfig cfg = config_for(*f, 0.9, 1000);
  PooState s(cfg, NoisyObjective(f, NoiseModel::uniform(0.1), 1));
  CHECK(s.instance_count() == 1);
  CHECK(s.instance(0).rho() == 0.9);
  CHECK_THROWS_AS(s.best_instance(), Error);

  s.advance();
  s.advance();
  CHECK(s.instance_count() == 1);
  CHECK(s.instance(0).time() == 2);
  s.advance();  // n = 3 completes a round and triggers the first doubling
  CHECK(s.logical_evaluations() == 3);
  CHECK_FALSE(s.at_batch_boundary());

  // Oracle: rounds of N evaluations; after each, double (n, N) while N is at
  // or below the threshold.
  std::vector<std::pair<std::uint64_t, std::size_t>> expected;
  {
    std::uint64_t n = 0, N = 1;
    while (n < 200) {
      n += N;
      const std::uint64_t before = N;
      while (n >= 3 && static_cast<double>(N) <= threshold(n, s.d_max())) { n *= 2; N *= 2; }
      if (N != before) expected.emplace_back(n, N);
    }
  }
  std::vector<std::pair<std::uint64_t, std::size_t>> boundaries;
  while (s.logical_evaluations() < 200) {
    s.poo_step();
    if (!s.at_batch_boundary()) continue;
    for (std::size_t g = 0; g < s.instance_count(); ++g) {
      REQUIRE(s.instance(g).time() * s.instance_count() == s.logical_evaluations());
    }
    if (boundaries.empty() || boundaries.back().second != s.instance_count()) {
      boundaries.emplace_back(s.logical_evaluations(), s.instance_count());
    }
  }
  expected.resize(std::min(expected.size(), boundaries.size()));
  REQUIRE(expected.size() >= 2);
  CHECK(boundaries == expected);
  CHECK(expected.front() == std::make_pair<std::uint64_t, std::size_t>(24, 8));
}

TEST_CASE("new instances catch up exactly to the common time") {
  auto f = difficult();
  PooConfig cfg = config_for(*f, 0.9, 1000);
  cfg.budget_mode = BudgetMode::logical;
  PooState s(cfg, NoisyObjective(f, NoiseModel::uniform(0.1), 2));
  s.run_until(3);
  REQUIRE(s.instance_count() == 1);
  s.advance();  // first catch-up step spawns the next instance
  CHECK(s.instance_count() == 2);
  CHECK(s.instance(1).rho() == 0.9);
  CHECK(s.instance(1).time() == 3);
  CHECK(s.instance(0).time() == 1);
  s.run_until(24);
  REQUIRE(s.at_batch_boundary());
  CHECK(s.instance_count() == 8);
  for (std::size_t g = 0; g < 8; ++g) CHECK(s.instance(g).time() == 3);
  // Next doubling: (n, N) = (48, 16) with each new instance caught up to 6.
  while (s.instance_count() == 8) s.advance();
  s.run_until(96);
  CHECK(s.at_batch_boundary());
  CHECK(s.instance_count() == 16);
  for (std::size_t g = 0; g < 16; ++g) CHECK(s.instance(g).time() == 6);
}

TEST_CASE("schedule and grid invariants over randomized configs") {
  Engine rng(2024);
  auto f = difficult();
  for (int trial = 0; trial < 40; ++trial) {
    const unsigned arity = 2 + uniform_index(rng, 3);
    const double rho_max = 0.2 + 0.75 * uniform01(rng);
    PooConfig cfg = config_for(*f, rho_max, 600 + uniform_index(rng, 1500), arity);
    cfg.sharing = uniform01(rng) < 0.7;
    cfg.budget_mode = uniform01(rng) < 0.5 ? BudgetMode::fresh : BudgetMode::logical;
    cfg.seed = rng();
    PooState s(cfg, NoisyObjective(f, NoiseModel::uniform(0.1), rng()));
    const double d = s.d_max();
    INFO("trial ", trial, " K=", arity, " rho_max=", rho_max);
    while (s.budget_left()) {
      s.poo_step();
      if (!s.at_batch_boundary()) continue;
      const std::uint64_t n = s.logical_evaluations();
      const std::size_t N = s.instance_count();
      REQUIRE(is_power_of_two(N));
      for (std::size_t g = 0; g < N; ++g) REQUIRE(s.instance(g).time() * N == n);
      REQUIRE(s.rhos() == rho_grid(rho_max, N));
      for (std::size_t g = 0; g < N; ++g) REQUIRE(s.instance(g).nu() == cfg.nu_max);
      if (n >= 3) REQUIRE(static_cast<double>(N) > threshold(n, d));
      if (n >= 8 && N >= 2) REQUIRE(static_cast<double>(N) <= 2.0 * threshold(n, d));
    }
    if (cfg.budget_mode == BudgetMode::fresh) {
      CHECK(s.fresh_evaluations() == cfg.budget);
    } else {
      CHECK(s.logical_evaluations() == cfg.budget);
    }
    if (!cfg.sharing) CHECK(s.fresh_evaluations() == s.logical_evaluations());
    CHECK(s.fresh_evaluations() <= s.logical_evaluations());
  }
}

TEST_CASE("budget exhaustion mid-batch leaves a usable state") {
  auto f = difficult();
  PooConfig cfg = config_for(*f, 0.9, 137);
  PooState s(cfg, NoisyObjective(f, NoiseModel::uniform(0.1), 4));
  s.run();
  CHECK(s.fresh_evaluations() == 137);
  CHECK(s.logical_evaluations() > s.fresh_evaluations());
  const StepReport r = s.poo_step();
  CHECK(r.budget_exhausted);
  CHECK(r.evaluations == 0);
  Engine rng(1);
  const Point x = s.recommend(rng);
  CHECK(f->domain().contains(x));
}

TEST_CASE("recommendation picks the best empirical instance") {
  auto f = difficult();
  PooConfig cfg = config_for(*f, 0.9, 400);
  PooState s(cfg, NoisyObjective(f, NoiseModel::uniform(0.1), 5));
  s.run_until(1);
  CHECK(s.best_instance() == 0);  // N = 1
  s.run();
  std::size_t best = 0;
  for (std::size_t g = 1; g < s.instance_count(); ++g) {
    if (s.instance(g).mean_reward() > s.instance(best).mean_reward()) best = g;
  }
  CHECK(s.best_instance() == best);
  Engine rng(5);
  const Point x = s.recommend(rng);
  const auto& log = s.instance(best).log();
  CHECK(std::any_of(log.begin(), log.end(), [&](const Evaluation& e) { return e.point == x; }));

  // Exact ties resolve to the smallest grid index.
  auto zero = std::make_shared<Constant>();
  PooConfig c0 = config_for(*zero, 0.9, 300);
  PooState flat(c0, NoisyObjective(zero, NoiseModel::none(), 0));
  flat.run();
  REQUIRE(flat.instance_count() > 1);
  CHECK(flat.best_instance() == 0);
}

TEST_CASE("sharing keeps point sequences and consumes samples at most once") {
  auto f = difficult();
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    PooConfig on = config_for(*f, 0.9, 3000);
    on.budget_mode = BudgetMode::logical;
    on.seed = seed;
    PooConfig off = on;
    off.sharing = false;
    PooState a(on, NoisyObjective(f, NoiseModel::none(), seed));
    PooState b(off, NoisyObjective(f, NoiseModel::none(), seed));
    a.run();
    b.run();
    REQUIRE(a.instance_count() == b.instance_count());
    for (std::size_t g = 0; g < a.instance_count(); ++g) {
      const auto& la = a.instance(g).log();
      const auto& lb = b.instance(g).log();
      REQUIRE(la.size() == lb.size());
      for (std::size_t i = 0; i < la.size(); ++i) REQUIRE(la[i].point == lb[i].point);
    }
    CHECK(a.fresh_evaluations() < b.fresh_evaluations());
  }

  PooConfig noisy_cfg = config_for(*f, 0.9, 3000);
  noisy_cfg.budget_mode = BudgetMode::logical;
  PooState s(noisy_cfg, NoisyObjective(f, NoiseModel::uniform(0.1), 9));
  s.run();
  for (std::size_t g = 0; g < s.instance_count(); ++g) {
    std::map<Point, int> seen;
    for (const Evaluation& e : s.instance(g).log()) ++seen[e.point];
    for (const auto& [x, count] : seen) {
      REQUIRE(s.cache().stored(x) >= static_cast<std::size_t>(count));
    }
  }
  // Every reward seen by one instance is its own draw: within an instance no
  // stored sample repeats, and noise stays within its bound.
  for (std::size_t g = 0; g < s.instance_count(); ++g) {
    std::set<double> rewards;
    for (const Evaluation& e : s.instance(g).log()) {
      REQUIRE(std::abs(e.reward - f->eval_true(e.point)) <= 0.1);
      REQUIRE(rewards.insert(e.reward).second);
    }
  }
}

TEST_CASE("shared rewards at a point are identically distributed across instances") {
  // Across many runs, the rewards the top instance reads at the domain center
  // (all cached after instance 0's fresh draw) have the noise mean.
  auto f = difficult();
  double sum = 0.0;
  int count = 0;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    PooConfig cfg = config_for(*f, 0.9, 200);
    cfg.seed = seed;
    PooState s(cfg, NoisyObjective(f, NoiseModel::uniform(0.1), seed + 1000));
    s.run();
    for (std::size_t g = 0; g < s.instance_count(); ++g) {
      sum += s.instance(g).log().front().reward;
      ++count;
    }
  }
  const double se = 0.1 / std::sqrt(3.0) / std::sqrt(300.0);  // draws within a run are shared
  CHECK(std::abs(sum / count) < 4.0 * se);
}

TEST_CASE("sharing effectiveness with 64 instances") {
  auto f = difficult();
  PooConfig cfg = config_for(*f, 0.95, 5000);
  cfg.budget_mode = BudgetMode::logical;
  PooState s(cfg, NoisyObjective(f, NoiseModel::uniform(0.1), 11));
  s.run();
  CHECK(s.instance_count() == 64);
  CHECK(static_cast<double>(s.fresh_evaluations()) / s.logical_evaluations() <= 0.10);
}

TEST_CASE("determinism") {
  auto f = difficult();
  auto run = [&] {
    PooConfig cfg = config_for(*f, 0.9, 700);
    cfg.seed = 77;
    PooState s(cfg, NoisyObjective(f, NoiseModel::uniform(0.1), 78));
    s.run();
    Engine rng(3);
    return std::make_tuple(s.recommend(rng), s.logical_evaluations(), s.fresh_evaluations(), s.best_instance());
  };
  CHECK(run() == run());
}

TEST_CASE("growth schedules") {
  auto f = difficult();
  SUBCASE("off is a no-op") {
    PooConfig cfg = config_for(*f, 0.9, 100);
    PooState s(cfg, NoisyObjective(f, NoiseModel::uniform(0.1), 1));
    s.run_until(6);
    const auto before = s.rhos();
    s.grow_limits();
    CHECK(s.rhos() == before);
    CHECK(s.rho_max() == 0.9);
  }
  SUBCASE("rho-sqrt") {
    PooConfig cfg = config_for(*f, 0.81, 10000);
    cfg.growth = GrowthSchedule::rho_sqrt;
    cfg.growth_start = 1u << 30;
    cfg.budget_mode = BudgetMode::logical;
    PooState s(cfg, NoisyObjective(f, NoiseModel::uniform(0.1), 1));
    const double d0 = s.d_max();
    s.run_until(6);
    REQUIRE(s.at_batch_boundary());
    const std::size_t n0 = s.instance_count();
    s.grow_limits();
    CHECK(s.rho_max() == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(s.d_max() == doctest::Approx(2.0 * d0).epsilon(1e-12));
    while (!s.at_batch_boundary()) s.advance();
    CHECK(s.instance_count() == 2 * n0);
    const auto grid = rho_grid(s.rho_max(), s.instance_count());
    const auto rhos = s.rhos();
    for (std::size_t i = 0; i < grid.size(); ++i) CHECK(rhos[i] == doctest::Approx(grid[i]).epsilon(1e-12));
    for (std::size_t g = 0; g < s.instance_count(); ++g) CHECK(s.instance(g).time() == s.instance(0).time());
  }
  SUBCASE("dmax-increment") {
    PooConfig cfg = config_for(*f, 0.81, 10000);
    cfg.growth = GrowthSchedule::dmax_increment;
    cfg.growth_start = 1u << 30;
    cfg.budget_mode = BudgetMode::logical;
    PooState s(cfg, NoisyObjective(f, NoiseModel::uniform(0.1), 1));
    s.run_until(16);
    REQUIRE(s.at_batch_boundary());
    REQUIRE(s.instance_count() == 4);
    const double d0 = s.d_max();
    s.grow_limits();
    CHECK(s.d_max() == doctest::Approx(d0 * 5.0 / 4.0).epsilon(1e-12));
    while (!s.at_batch_boundary()) s.advance();
    CHECK(s.instance_count() == 5);
    const auto grid = rho_grid(s.rho_max(), 5);
    const auto rhos = s.rhos();
    for (std::size_t i = 0; i < 5; ++i) CHECK(rhos[i] == doctest::Approx(grid[i]).epsilon(1e-12));
    CHECK(max_dimension(2, s.rho_max()) == doctest::Approx(s.d_max()).epsilon(1e-12));
  }
  SUBCASE("automatic growth keeps equal times and the grid shape") {
    for (GrowthSchedule g : {GrowthSchedule::dmax_increment, GrowthSchedule::rho_sqrt}) {
      PooConfig cfg = config_for(*f, 0.7, 3000);
      cfg.growth = g;
      cfg.nu_growth = NuGrowth::loglog;
      cfg.growth_start = 32;
      PooState s(cfg, NoisyObjective(f, NoiseModel::uniform(0.1), 8));
      std::size_t boundaries = 0;
      while (s.budget_left()) {
        s.poo_step();
        if (!s.at_batch_boundary()) continue;
        ++boundaries;
        const std::size_t N = s.instance_count();
        const auto grid = rho_grid(s.rho_max(), N);
        const auto rhos = s.rhos();
        for (std::size_t i = 0; i < N; ++i) REQUIRE(rhos[i] == doctest::Approx(grid[i]).epsilon(1e-9));
        for (std::size_t i = 0; i < N; ++i) REQUIRE(s.instance(i).time() == s.instance(0).time());
        for (std::size_t i = 0; i < N; ++i) REQUIRE(s.instance(i).nu() == s.nu_max());
      }
      CHECK(boundaries > 10);
      CHECK(s.rho_max() > 0.7);
      CHECK(s.nu_max() > 1.0);
    }
  }
  SUBCASE("only at a batch boundary") {
    PooConfig cfg = config_for(*f, 0.9, 100);
    cfg.growth = GrowthSchedule::rho_sqrt;
    cfg.budget_mode = BudgetMode::logical;
    PooState s(cfg, NoisyObjective(f, NoiseModel::uniform(0.1), 1));
    s.run_until(7);
    REQUIRE_FALSE(s.at_batch_boundary());
    CHECK_THROWS_AS(s.grow_limits(), Error);
  }
}

TEST_CASE("config validation") {
  auto f = difficult();
  PooConfig cfg = config_for(*f, 1.0, 10);
  CHECK_THROWS_AS(PooState(cfg, NoisyObjective(f, NoiseModel::none(), 0)), Error);
  cfg.rho_max = 0.9;
  cfg.nu_max = 0.0;
  CHECK_THROWS_AS(PooState(cfg, NoisyObjective(f, NoiseModel::none(), 0)), Error);
  cfg.nu_max = 1.0;
  cfg.budget = 0;
  CHECK_THROWS_AS(PooState(cfg, NoisyObjective(f, NoiseModel::none(), 0)), Error);
}
