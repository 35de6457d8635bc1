#include <cmath>
#include <functional>
#include <memory>

#include "doctest.h"
#include "poo/checkpoint.hpp"
#include "poo/error.hpp"

using namespace poo;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::config;
}

PooConfig make_config(const Objective& f, double rho_max, std::uint64_t budget) {
  PooConfig c;
  c.partitioning = std::make_shared<StandardPartitioning>(f.domain(), 2);
  c.rho_max = rho_max;
  c.budget = budget;
  c.seed = 31;
  return c;
}

void require_same_logs(const PooState& a, const PooState& b) {
  REQUIRE(a.instance_count() == b.instance_count());
  REQUIRE(a.logical_evaluations() == b.logical_evaluations());
  REQUIRE(a.fresh_evaluations() == b.fresh_evaluations());
  for (std::size_t g = 0; g < a.instance_count(); ++g) {
    const auto& la = a.instance(g).log();
    const auto& lb = b.instance(g).log();
    REQUIRE(la.size() == lb.size());
    for (std::size_t i = 0; i < la.size(); ++i) {
      REQUIRE(la[i].point == lb[i].point);
      REQUIRE(la[i].reward == lb[i].reward);
    }
  }
}

}  // namespace

TEST_CASE("box round trip keeps closed flags") {
  const Box b({0.0, -1.0}, {1.0, 2.0}, {true, false});
  const Box c = load_box(Json::parse(save_box(b).dump()));
  CHECK(c == b);
}

TEST_CASE("instance round trip continues identically") {
  auto f = std::make_shared<DifficultFunction>();
  auto part = std::make_shared<StandardPartitioning>(f->domain(), 2);
  HooInstance inst(part, 1.0, 0.66, 5);
  NoisyObjective noise(f, NoiseModel::uniform(0.1), 6);
  for (int i = 0; i < 300; ++i) inst.step(noise);

  const std::string blob = save_instance(inst).dump();
  HooInstance copy = load_instance(Json::parse(blob), part);
  CHECK(save_instance(copy).dump() == blob);
  CHECK(copy.time() == inst.time());
  CHECK(copy.mean_reward() == inst.mean_reward());

  NoisyObjective noise_copy = noise;
  for (int i = 0; i < 300; ++i) {
    const Evaluation a = inst.step(noise);
    const Evaluation b = copy.step(noise_copy);
    REQUIRE(a.point == b.point);
    REQUIRE(a.reward == b.reward);
  }
  Engine r1(9), r2(9);
  CHECK(inst.recommend(r1) == copy.recommend(r2));
  for (std::size_t i = 0; i < inst.tree().size(); ++i) {
    REQUIRE(inst.tree().node(i).region == copy.tree().node(i).region);
  }
}

TEST_CASE("state round trip continues bit-identically") {
  auto f = std::make_shared<DifficultFunction>();
  struct Case {
    bool sharing;
    BudgetMode mode;
    GrowthSchedule growth;
    NuGrowth nu_growth;
    std::uint64_t stop;
  };
  const Case cases[] = {
      {true, BudgetMode::fresh, GrowthSchedule::off, NuGrowth::off, 123},
      {false, BudgetMode::logical, GrowthSchedule::off, NuGrowth::off, 400},
      {true, BudgetMode::logical, GrowthSchedule::off, NuGrowth::off, 10},  // mid catch-up
      {true, BudgetMode::logical, GrowthSchedule::rho_sqrt, NuGrowth::loglog, 333},
      {true, BudgetMode::fresh, GrowthSchedule::dmax_increment, NuGrowth::off, 77},
  };
  for (const Case& c : cases) {
    PooConfig cfg = make_config(*f, 0.8, 900);
    cfg.sharing = c.sharing;
    cfg.budget_mode = c.mode;
    cfg.growth = c.growth;
    cfg.nu_growth = c.nu_growth;
    cfg.growth_start = 40;
    PooState whole(cfg, NoisyObjective(f, NoiseModel::uniform(0.1), 17));
    PooState part(cfg, NoisyObjective(f, NoiseModel::uniform(0.1), 17));
    part.run_until(c.stop);
    const std::string blob = save_state(part).dump();
    PooState resumed = load_state(Json::parse(blob));
    CHECK(save_state(resumed).dump() == blob);
    whole.run();
    resumed.run();
    require_same_logs(whole, resumed);
    CHECK(save_state(whole).dump() == save_state(resumed).dump());
    Engine r1(4), r2(4);
    CHECK(whole.recommend(r1) == resumed.recommend(r2));
    CHECK(whole.cache_hit_rate() == resumed.cache_hit_rate());
  }
}

TEST_CASE("state blob for an unnamed objective needs the base") {
  auto g = std::make_shared<FunctionObjective>(
      "neg-abs", Box::closed({0.0}, {1.0}), [](std::span<const double> x) { return -std::abs(x[0] - 0.3); }, 0.0);
  PooConfig cfg = make_config(*g, 0.9, 50);
  PooState s(cfg, NoisyObjective(g, NoiseModel::none(), 1));
  s.run_until(20);
  const Json blob = save_state(s);
  CHECK_THROWS_AS(load_state(blob), Error);
  PooState resumed = load_state(blob, g);
  PooState rest = s;
  rest.run();
  resumed.run();
  require_same_logs(rest, resumed);
}

TEST_CASE("malformed blobs are format errors") {
  auto f = std::make_shared<DifficultFunction>();
  PooState s(make_config(*f, 0.9, 100), NoisyObjective(f, NoiseModel::uniform(0.1), 1));
  s.run_until(40);
  const Json good = save_state(s);

  CHECK(kind_of([&] { load_state(Json::array()); }) == ErrorKind::format);
  {
    Json j = good;
    j["format"] = "something-else";
    CHECK(kind_of([&] { load_state(j); }) == ErrorKind::format);
  }
  {
    Json j = good;
    j["version"] = kStateVersion + 1;
    CHECK(kind_of([&] { load_state(j); }) == ErrorKind::format);
  }
  {
    Json j = good;
    j.erase("cache");
    CHECK(kind_of([&] { load_state(j); }) == ErrorKind::format);
  }
  {
    Json j = good;
    j["counters"]["n"] = "many";
    CHECK(kind_of([&] { load_state(j); }) == ErrorKind::format);
  }
  {
    Json j = good;
    j["order"].push_back(999);
    CHECK(kind_of([&] { load_state(j); }) == ErrorKind::format);
  }

  auto part = std::make_shared<StandardPartitioning>(f->domain(), 2);
  const Json inst = good["instances"][0];
  {
    Json j = inst;
    j["nodes"][0][3] = 100000;
    CHECK(kind_of([&] { load_instance(j, part); }) == ErrorKind::format);
  }
  {
    Json j = inst;
    j["log"].push_back({100000, 0.0});
    CHECK(kind_of([&] { load_instance(j, part); }) == ErrorKind::format);
  }
  {
    Json j = inst;
    j["nodes"] = Json::array();
    CHECK(kind_of([&] { load_instance(j, part); }) == ErrorKind::format);
  }
  {
    Json j = inst;
    j["engine"] = "not an engine";
    CHECK(kind_of([&] { load_instance(j, part); }) == ErrorKind::format);
  }
  CHECK(kind_of([&] { require_field(Json::object(), "x"); }) == ErrorKind::format);
}
