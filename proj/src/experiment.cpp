#include "poo/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "poo/error.hpp"

namespace poo {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::stringstream in(s);
  while (std::getline(in, item, sep)) parts.push_back(trim(item));
  return parts;
}

double to_double(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::logic_error&) {
  }
  throw Error(ErrorKind::config, "'" + key + "' expects a number, got '" + text + "'");
}

std::uint64_t to_u64(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    if (!text.empty() && text[0] != '-') {
      const unsigned long long v = std::stoull(text, &used);
      if (used == text.size()) return v;
    }
  } catch (const std::logic_error&) {
  }
  throw Error(ErrorKind::config, "'" + key + "' expects a non-negative integer, got '" + text + "'");
}

bool to_switch(const std::string& key, const std::string& text) {
  if (text == "on" || text == "true" || text == "1") return true;
  if (text == "off" || text == "false" || text == "0") return false;
  throw Error(ErrorKind::config, "'" + key + "' expects on or off, got '" + text + "'");
}

GrowthSchedule to_growth(const std::string& text) {
  if (text == "off") return GrowthSchedule::off;
  if (text == "dmax") return GrowthSchedule::dmax_increment;
  if (text == "rho-sqrt") return GrowthSchedule::rho_sqrt;
  throw Error(ErrorKind::config, "growth expects off, dmax or rho-sqrt, got '" + text + "'");
}

const char* growth_text(GrowthSchedule g) {
  switch (g) {
    case GrowthSchedule::off: return "off";
    case GrowthSchedule::dmax_increment: return "dmax";
    case GrowthSchedule::rho_sqrt: return "rho-sqrt";
  }
  return "off";
}

NuGrowth to_nu_growth(const std::string& text) {
  if (text == "off") return NuGrowth::off;
  if (text == "loglog") return NuGrowth::loglog;
  throw Error(ErrorKind::config, "nu_growth expects off or loglog, got '" + text + "'");
}

std::vector<double> to_double_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const std::string& item : split(text, ',')) {
    if (!item.empty()) out.push_back(to_double(key, item));
  }
  return out;
}

const Settings& default_settings() {
  static const Settings defaults = {
      {"objective", "difficult"},
      {"noise", "uniform:0.1"},
      {"arity", "2"},
      {"algo", "hoo"},
      {"nu", "1"},
      {"rho", "0.5"},
      {"rho_max", "0.9"},
      {"nu_max", "1"},
      {"sharing", "on"},
      {"growth", "off"},
      {"nu_growth", "off"},
      {"growth_start", "64"},
      {"budget", "500"},
      {"budget_mode", "fresh"},
      {"runs", "1"},
      {"seed", "0"},
      {"checkpoints", ""},
      {"rec_mode", "uniform"},
      {"out", "-"},
      {"rho_list", "0,0.3,0.5,0.66,0.8,0.9,0.95"},
      {"h_max", "18"},
  };
  return defaults;
}

std::string normalize_key(std::string key) {
  std::replace(key.begin(), key.end(), '-', '_');
  return key;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double standard_error(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

}  // namespace

// ---------------------------------------------------------------------------

std::string AlgorithmSpec::tag() const {
  if (kind == AlgoKind::hoo) return "hoo";
  std::string t = "poo";
  if (!sharing) t += "+noshare";
  if (growth != GrowthSchedule::off) t += std::string("+") + growth_text(growth);
  if (nu_growth == NuGrowth::loglog) t += "+loglog";
  return t;
}

std::string AlgorithmSpec::descriptor() const {
  if (kind == AlgoKind::hoo) return "hoo:nu=" + format_double(nu) + ",rho=" + format_double(rho);
  return "poo:rho_max=" + format_double(rho_max) + ",nu_max=" + format_double(nu_max) +
         ",sharing=" + (sharing ? "on" : "off") + ",growth=" + growth_text(growth) +
         ",nu_growth=" + (nu_growth == NuGrowth::loglog ? "loglog" : "off") +
         ",growth_start=" + std::to_string(growth_start);
}

void ExperimentConfig::validate() const {
  if (runs < 1) throw Error(ErrorKind::config, "runs must be at least 1");
  if (budget < 1) throw Error(ErrorKind::config, "budget must be at least 1");
  if (arity < 2) throw Error(ErrorKind::config, "arity must be at least 2");
  if (algorithms.empty()) throw Error(ErrorKind::config, "no algorithm given");
  if (checkpoints.empty()) throw Error(ErrorKind::config, "no checkpoints given");
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] < 1 || checkpoints[i] > budget || (i > 0 && checkpoints[i] <= checkpoints[i - 1])) {
      throw Error(ErrorKind::config, "checkpoints must be ascending, positive and at most the budget");
    }
  }
  for (const AlgorithmSpec& a : algorithms) {
    if (a.kind == AlgoKind::hoo) {
      if (!(a.nu >= 0.0)) throw Error(ErrorKind::config, "HOO nu must be non-negative");
      if (!(a.rho >= 0.0 && a.rho < 1.0)) throw Error(ErrorKind::config, "HOO rho must lie in [0, 1)");
    } else {
      if (!(a.rho_max > 0.0 && a.rho_max < 1.0)) throw Error(ErrorKind::config, "rho_max must lie in (0, 1)");
      if (!(a.nu_max > 0.0)) throw Error(ErrorKind::config, "nu_max must be positive");
    }
  }
}

const std::vector<std::string>& setting_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [key, value] : default_settings()) k.push_back(key);
    return k;
  }();
  return keys;
}

std::vector<std::string> preset_names() { return {"fig2-small", "fig2-large", "rho-sweep", "dim-report"}; }

Settings preset_settings(const std::string& name) {
  if (name == "fig2-small") {
    return {{"objective", "difficult"},
            {"noise", "uniform:0.1"},
            {"algo", "hoo:rho=0;hoo:rho=0.3;hoo:rho=0.66;hoo:rho=0.9;poo"},
            {"budget", "500"},
            {"runs", "100"},
            {"checkpoints", "every:50"}};
  }
  if (name == "fig2-large") {
    return {{"objective", "difficult"},
            {"noise", "uniform:0.1"},
            {"algo", "hoo:rho=0;hoo:rho=0.3;hoo:rho=0.66;hoo:rho=0.9;poo"},
            {"budget", "5000"},
            {"runs", "20"},
            {"checkpoints", "log:12"}};
  }
  if (name == "rho-sweep") {
    return {{"objective", "difficult"},
            {"noise", "uniform:0.1"},
            {"budget", "5000"},
            {"runs", "20"},
            {"rho_list", "0,0.3,0.5,0.66,0.8,0.9,0.95"}};
  }
  if (name == "dim-report") {
    return {{"objective", "difficult"},
            {"nu", "1"},
            {"rho_list", "0.5,0.70710678118654757,0.75,0.8,0.85"},
            {"h_max", "18"}};
  }
  throw Error(ErrorKind::config, "unknown preset '" + name + "'");
}

Settings parse_settings(const std::string& text) {
  Settings out;
  std::stringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::config, "config line " + std::to_string(number) + " lacks '='");
    }
    const std::string key = normalize_key(trim(line.substr(0, eq)));
    if (!default_settings().count(key)) {
      throw Error(ErrorKind::config, "unknown config key '" + key + "' on line " + std::to_string(number));
    }
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

Settings read_settings_file(const std::string& path) { return parse_settings(read_file(path)); }

Settings merge_settings(std::initializer_list<Settings> layers) {
  Settings out;
  for (const Settings& layer : layers) {
    for (const auto& [k, v] : layer) out[normalize_key(k)] = v;
  }
  return out;
}

std::vector<AlgorithmSpec> parse_algorithms(const std::string& text, const AlgorithmSpec& hoo_base,
                                            const AlgorithmSpec& poo_base) {
  std::vector<AlgorithmSpec> out;
  for (const std::string& item : split(text, ';')) {
    if (item.empty()) continue;
    const auto colon = item.find(':');
    const std::string name = trim(item.substr(0, colon));
    AlgorithmSpec spec;
    if (name == "hoo") {
      spec = hoo_base;
      spec.kind = AlgoKind::hoo;
    } else if (name == "poo") {
      spec = poo_base;
      spec.kind = AlgoKind::poo;
    } else {
      throw Error(ErrorKind::config, "unknown algorithm '" + name + "'");
    }
    if (colon != std::string::npos) {
      for (const std::string& kv : split(item.substr(colon + 1), ',')) {
        if (kv.empty()) continue;
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw Error(ErrorKind::config, "algorithm option '" + kv + "' lacks '='");
        const std::string key = normalize_key(trim(kv.substr(0, eq)));
        const std::string value = trim(kv.substr(eq + 1));
        if (spec.kind == AlgoKind::hoo && key == "nu") {
          spec.nu = to_double(key, value);
        } else if (spec.kind == AlgoKind::hoo && key == "rho") {
          spec.rho = to_double(key, value);
        } else if (spec.kind == AlgoKind::poo && key == "rho_max") {
          spec.rho_max = to_double(key, value);
        } else if (spec.kind == AlgoKind::poo && key == "nu_max") {
          spec.nu_max = to_double(key, value);
        } else if (spec.kind == AlgoKind::poo && key == "sharing") {
          spec.sharing = to_switch(key, value);
        } else if (spec.kind == AlgoKind::poo && key == "growth") {
          spec.growth = to_growth(value);
        } else if (spec.kind == AlgoKind::poo && key == "nu_growth") {
          spec.nu_growth = to_nu_growth(value);
        } else if (spec.kind == AlgoKind::poo && key == "growth_start") {
          spec.growth_start = to_u64(key, value);
        } else {
          throw Error(ErrorKind::config, "algorithm '" + name + "' has no option '" + key + "'");
        }
      }
    }
    out.push_back(spec);
  }
  if (out.empty()) throw Error(ErrorKind::config, "no algorithm given");
  return out;
}

std::vector<std::uint64_t> parse_checkpoints(const std::string& text, std::uint64_t budget) {
  std::vector<std::uint64_t> out;
  const std::string t = trim(text);
  auto finish = [&] {
    if (out.empty() || out.back() != budget) out.push_back(budget);
    return out;
  };
  if (t.empty()) return {budget};
  if (t.rfind("every:", 0) == 0) {
    const std::uint64_t step = to_u64("checkpoints", t.substr(6));
    if (step == 0) throw Error(ErrorKind::config, "checkpoint step must be positive");
    for (std::uint64_t c = step; c <= budget; c += step) out.push_back(c);
    return finish();
  }
  if (t.rfind("log2:", 0) == 0) {
    const std::uint64_t first = to_u64("checkpoints", t.substr(5));
    if (first == 0) throw Error(ErrorKind::config, "first checkpoint must be positive");
    for (std::uint64_t c = first; c <= budget; c *= 2) out.push_back(c);
    return finish();
  }
  if (t.rfind("log:", 0) == 0) {
    const std::uint64_t count = to_u64("checkpoints", t.substr(4));
    if (count < 1) throw Error(ErrorKind::config, "checkpoint count must be positive");
    const double top = std::log(static_cast<double>(budget));
    for (std::uint64_t i = 0; i < count; ++i) {
      const double frac = count == 1 ? 1.0 : static_cast<double>(i) / static_cast<double>(count - 1);
      const auto c = static_cast<std::uint64_t>(std::llround(std::exp(frac * top)));
      if (out.empty() || c > out.back()) out.push_back(std::min(std::max<std::uint64_t>(c, 1), budget));
    }
    return finish();
  }
  for (const std::string& item : split(t, ',')) {
    if (!item.empty()) out.push_back(to_u64("checkpoints", item));
  }
  return out;
}

ExperimentConfig config_from_settings(const Settings& given) {
  Settings s = default_settings();
  for (const auto& [key, value] : given) {
    const std::string k = normalize_key(key);
    if (!s.count(k)) throw Error(ErrorKind::config, "unknown setting '" + k + "'");
    s[k] = value;
  }

  ExperimentConfig c;
  c.settings = s;
  c.objective = s["objective"];
  c.noise = s["noise"];
  c.arity = static_cast<unsigned>(to_u64("arity", s["arity"]));
  c.budget = to_u64("budget", s["budget"]);
  if (s["budget_mode"] == "fresh") {
    c.budget_mode = BudgetMode::fresh;
  } else if (s["budget_mode"] == "logical") {
    c.budget_mode = BudgetMode::logical;
  } else {
    throw Error(ErrorKind::config, "budget_mode expects fresh or logical");
  }
  c.runs = to_u64("runs", s["runs"]);
  c.seed = to_u64("seed", s["seed"]);
  if (s["rec_mode"] == "uniform") {
    c.rec_mode = RecommendMode::uniform_random;
  } else if (s["rec_mode"] == "deepest") {
    c.rec_mode = RecommendMode::deepest;
  } else {
    throw Error(ErrorKind::config, "rec_mode expects uniform or deepest");
  }
  c.out = s["out"];
  c.nu = to_double("nu", s["nu"]);
  c.h_max = static_cast<unsigned>(to_u64("h_max", s["h_max"]));
  c.rho_list = to_double_list("rho_list", s["rho_list"]);
  c.checkpoints = parse_checkpoints(s["checkpoints"], c.budget);

  AlgorithmSpec hoo_base;
  hoo_base.nu = c.nu;
  hoo_base.rho = to_double("rho", s["rho"]);
  AlgorithmSpec poo_base;
  poo_base.kind = AlgoKind::poo;
  poo_base.rho_max = to_double("rho_max", s["rho_max"]);
  poo_base.nu_max = to_double("nu_max", s["nu_max"]);
  poo_base.sharing = to_switch("sharing", s["sharing"]);
  poo_base.growth = to_growth(s["growth"]);
  poo_base.nu_growth = to_nu_growth(s["nu_growth"]);
  poo_base.growth_start = to_u64("growth_start", s["growth_start"]);
  c.algorithms = parse_algorithms(s["algo"], hoo_base, poo_base);

  // Fail early on names the run would reject later.
  parse_objective(c.objective);
  NoiseModel::parse(c.noise);
  c.validate();
  return c;
}

std::uint64_t run_seed(std::uint64_t master, std::size_t run) { return derive_seed(master, run); }

// ---------------------------------------------------------------------------

class ExperimentRunner::Executor {
 public:
  Executor(const ExperimentRunner& owner, std::size_t run, std::size_t algo)
      : owner_(&owner), run_(run), algo_(algo), seed_(run_seed(owner.config_.seed, run)) {
    const AlgorithmSpec& spec = this->spec();
    const std::uint64_t noise_seed = derive_seed(seed_, hash_tag("noise"));
    const std::uint64_t algo_seed = derive_seed(seed_, hash_tag(spec.descriptor()));
    rec_ = Engine(derive_seed(algo_seed, hash_tag("recommend")));
    NoisyObjective noisy(owner.objective_, NoiseModel::parse(owner.config_.noise), noise_seed);
    if (spec.kind == AlgoKind::hoo) {
      hoo_.emplace(owner.partitioning_, spec.nu, spec.rho, derive_seed(algo_seed, hash_tag("tree")));
      noisy_.emplace(std::move(noisy));
    } else {
      PooConfig pc;
      pc.partitioning = owner.partitioning_;
      pc.rho_max = spec.rho_max;
      pc.nu_max = spec.nu_max;
      pc.sharing = spec.sharing;
      pc.budget = owner.config_.budget;
      pc.budget_mode = owner.config_.budget_mode;
      pc.growth = spec.growth;
      pc.nu_growth = spec.nu_growth;
      pc.growth_start = spec.growth_start;
      pc.seed = algo_seed;
      poo_.emplace(std::move(pc), std::move(noisy));
    }
  }

  std::size_t run() const { return run_; }
  std::size_t algo() const { return algo_; }
  void rebind(const ExperimentRunner& owner) { owner_ = &owner; }

  /// False when interrupted at `stop_at`.
  bool execute(std::vector<RegretRecord>& rows, std::optional<std::uint64_t> stop_at) {
    const auto& checkpoints = owner_->config_.checkpoints;
    while (next_checkpoint_ < checkpoints.size()) {
      if (stop_at && progress() >= *stop_at) return false;
      const std::uint64_t target = checkpoints[next_checkpoint_];
      advance_to(stop_at ? std::min(target, *stop_at) : target);
      if (progress() >= target) {
        rows.push_back(record(target));
        ++next_checkpoint_;
      }
    }
    return true;
  }

  Json save() const {
    Json j = {{"run", run_}, {"algo", algo_}, {"next_checkpoint", next_checkpoint_}, {"rec_engine", save_engine(rec_)}};
    if (hoo_) {
      j["hoo"] = save_instance(*hoo_);
      j["noise_engine"] = save_engine(noisy_->engine());
    } else {
      j["poo"] = save_state(*poo_);
    }
    return j;
  }

  static std::unique_ptr<Executor> load(const ExperimentRunner& owner, const Json& j) {
    auto ex = std::make_unique<Executor>(owner, j.at("run").get<std::size_t>(), j.at("algo").get<std::size_t>());
    ex->next_checkpoint_ = j.at("next_checkpoint").get<std::size_t>();
    ex->rec_ = load_engine(j.at("rec_engine").get<std::string>());
    if (ex->hoo_) {
      ex->hoo_.emplace(load_instance(require_field(j, "hoo"), owner.partitioning_));
      ex->noisy_->engine() = load_engine(require_field(j, "noise_engine").get<std::string>());
    } else {
      ex->poo_.emplace(load_state(require_field(j, "poo"), owner.objective_));
    }
    return ex;
  }

 private:
  const AlgorithmSpec& spec() const { return owner_->config_.algorithms[algo_]; }

  std::uint64_t progress() const { return hoo_ ? hoo_->time() : poo_->budget_used(); }

  void advance_to(std::uint64_t target) {
    if (hoo_) {
      while (hoo_->time() < target) hoo_->step(*noisy_);
    } else {
      poo_->run_until(target);
    }
  }

  RegretRecord record(std::uint64_t checkpoint) {
    const Objective& obj = *owner_->objective_;
    const AlgorithmSpec& spec = this->spec();
    RegretRecord r;
    r.run_id = run_;
    r.algo = spec.tag();
    r.checkpoint_n = checkpoint;
    r.seed = seed_;
    if (hoo_) {
      r.nu = spec.nu;
      r.rho = spec.rho;
      r.n_logical = r.n_fresh = hoo_->time();
      r.regret_realized = simple_regret(obj, hoo_->recommend(rec_, owner_->config_.rec_mode));
      r.regret_expected = expected_simple_regret(obj, *hoo_);
    } else {
      r.nu = spec.nu_max;
      r.rho = spec.rho_max;
      r.n_logical = poo_->logical_evaluations();
      r.n_fresh = poo_->fresh_evaluations();
      r.n_instances = poo_->instance_count();
      r.cache_hit_rate = poo_->cache_hit_rate();
      r.regret_realized = simple_regret(obj, poo_->recommend(rec_, owner_->config_.rec_mode));
      r.regret_expected = expected_simple_regret(obj, poo_->instance(poo_->best_instance()));
    }
    return r;
  }

  const ExperimentRunner* owner_;
  std::size_t run_;
  std::size_t algo_;
  std::uint64_t seed_;
  Engine rec_;
  std::optional<HooInstance> hoo_;
  std::optional<NoisyObjective> noisy_;
  std::optional<PooState> poo_;
  std::size_t next_checkpoint_ = 0;
};

ExperimentRunner::ExperimentRunner(ExperimentConfig config) : config_(std::move(config)) {
  config_.validate();
  objective_ = parse_objective(config_.objective);
  partitioning_ = std::make_shared<StandardPartitioning>(objective_->domain(), config_.arity);
}

ExperimentRunner::~ExperimentRunner() = default;

ExperimentRunner::ExperimentRunner(ExperimentRunner&& other) noexcept
    : config_(std::move(other.config_)),
      objective_(std::move(other.objective_)),
      partitioning_(std::move(other.partitioning_)),
      rows_(std::move(other.rows_)),
      next_pair_(other.next_pair_),
      current_(std::move(other.current_)) {
  if (current_) current_->rebind(*this);
}

ExperimentRunner& ExperimentRunner::operator=(ExperimentRunner&& other) noexcept {
  config_ = std::move(other.config_);
  objective_ = std::move(other.objective_);
  partitioning_ = std::move(other.partitioning_);
  rows_ = std::move(other.rows_);
  next_pair_ = other.next_pair_;
  current_ = std::move(other.current_);
  if (current_) current_->rebind(*this);
  return *this;
}

bool ExperimentRunner::run(const std::optional<StopRequest>& stop) {
  const std::size_t per_run = config_.algorithms.size();
  if (stop) {
    if (stop->run >= config_.runs || stop->algo >= per_run) {
      throw Error(ErrorKind::config, "checkpoint target names a run or algorithm that does not exist");
    }
    if (stop->at >= config_.budget) throw Error(ErrorKind::config, "checkpoint point must be below the budget");
  }
  const std::size_t total = config_.runs * per_run;
  while (next_pair_ < total) {
    if (!current_) current_ = std::make_unique<Executor>(*this, next_pair_ / per_run, next_pair_ % per_run);
    std::optional<std::uint64_t> at;
    if (stop && stop->run == current_->run() && stop->algo == current_->algo()) at = stop->at;
    if (!current_->execute(rows_, at)) return false;
    current_.reset();
    ++next_pair_;
  }
  return true;
}

Json ExperimentRunner::save() const {
  Json rows = Json::array();
  for (const RegretRecord& r : rows_) {
    rows.push_back({r.run_id, r.algo, r.nu, r.rho, r.checkpoint_n, r.n_logical, r.n_fresh, r.regret_realized,
                    r.regret_expected, r.n_instances, r.cache_hit_rate, r.seed});
  }
  return {{"format", kExperimentFormat},
          {"version", kExperimentVersion},
          {"settings", config_.settings},
          {"next_pair", next_pair_},
          {"rows", std::move(rows)},
          {"current", current_ ? current_->save() : Json()}};
}

ExperimentRunner ExperimentRunner::load(const Json& blob) {
  if (!blob.is_object() || !blob.contains("format") || blob["format"] != kExperimentFormat) {
    throw Error(ErrorKind::format, "not an experiment checkpoint");
  }
  if (blob.value("version", 0) != kExperimentVersion) {
    throw Error(ErrorKind::format, "unsupported experiment checkpoint version");
  }
  try {
    ExperimentRunner runner(config_from_settings(require_field(blob, "settings").get<Settings>()));
    runner.next_pair_ = require_field(blob, "next_pair").get<std::size_t>();
    for (const Json& r : require_field(blob, "rows")) {
      RegretRecord rec;
      rec.run_id = r.at(0).get<std::size_t>();
      rec.algo = r.at(1).get<std::string>();
      rec.nu = r.at(2).get<double>();
      rec.rho = r.at(3).get<double>();
      rec.checkpoint_n = r.at(4).get<std::uint64_t>();
      rec.n_logical = r.at(5).get<std::uint64_t>();
      rec.n_fresh = r.at(6).get<std::uint64_t>();
      rec.regret_realized = r.at(7).get<double>();
      rec.regret_expected = r.at(8).get<double>();
      rec.n_instances = r.at(9).get<std::uint64_t>();
      rec.cache_hit_rate = r.at(10).get<double>();
      rec.seed = r.at(11).get<std::uint64_t>();
      runner.rows_.push_back(std::move(rec));
    }
    const Json& current = require_field(blob, "current");
    if (!current.is_null()) runner.current_ = Executor::load(runner, current);
    return runner;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::format, std::string("experiment checkpoint: ") + e.what());
  }
}

std::vector<RegretRecord> run_experiment(const ExperimentConfig& config) {
  ExperimentRunner runner(config);
  runner.run();
  return runner.rows();
}

std::vector<SweepRow> sweep_rho(const ExperimentConfig& config) {
  if (config.rho_list.empty()) throw Error(ErrorKind::config, "rho list is empty");
  ExperimentConfig c = config;
  c.algorithms.clear();
  for (double rho : config.rho_list) {
    AlgorithmSpec spec;
    spec.nu = config.nu;
    spec.rho = rho;
    c.algorithms.push_back(spec);
  }
  c.checkpoints = {config.budget};
  const std::vector<RegretRecord> rows = run_experiment(c);

  std::vector<SweepRow> out;
  for (std::size_t a = 0; a < c.algorithms.size(); ++a) {
    std::vector<double> expected, realized;
    for (std::size_t i = a; i < rows.size(); i += c.algorithms.size()) {
      expected.push_back(rows[i].regret_expected);
      realized.push_back(rows[i].regret_realized);
    }
    out.push_back({c.algorithms[a].rho, config.nu, config.runs, config.budget, mean_of(expected),
                   standard_error(expected), mean_of(realized), standard_error(realized)});
  }
  return out;
}

std::vector<DimReport> estimate_dim_cmd(const ExperimentConfig& config) {
  if (config.rho_list.empty()) throw Error(ErrorKind::config, "rho list is empty");
  const auto obj = parse_objective(config.objective);
  const StandardPartitioning part(obj->domain(), config.arity);
  std::vector<DimReport> out;
  for (double rho : config.rho_list) out.push_back(estimate_dimension(*obj, part, config.nu, rho, config.h_max));
  return out;
}

// ---------------------------------------------------------------------------

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string regret_csv(const std::vector<RegretRecord>& rows) {
  std::string out = std::string(kRegretSchema) + "\n" + kRegretHeader + "\n";
  for (const RegretRecord& r : rows) {
    out += std::to_string(r.run_id) + ',' + r.algo + ',' + format_double(r.nu) + ',' + format_double(r.rho) + ',' +
           std::to_string(r.checkpoint_n) + ',' + std::to_string(r.n_fresh) + ',' + format_double(r.regret_realized) +
           ',' + format_double(r.regret_expected) + ',' + std::to_string(r.n_instances) + ',' +
           format_double(r.cache_hit_rate) + ',' + std::to_string(r.seed) + '\n';
  }
  return out;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = std::string(kSweepSchema) + "\n" + kSweepHeader + "\n";
  for (const SweepRow& r : rows) {
    out += format_double(r.rho) + ',' + format_double(r.nu) + ',' + std::to_string(r.runs) + ',' +
           std::to_string(r.budget) + ',' + format_double(r.mean_expected) + ',' + format_double(r.se_expected) + ',' +
           format_double(r.mean_realized) + ',' + format_double(r.se_realized) + '\n';
  }
  return out;
}

std::string dim_csv(const std::vector<DimReport>& reports) {
  std::string out = std::string(kDimSchema) + "\n" + kDimHeader + "\n";
  for (const DimReport& r : reports) {
    std::string counts;
    for (std::size_t h = 0; h < r.counts.size(); ++h) {
      if (h) counts += ';';
      counts += std::to_string(r.counts[h]);
    }
    out += format_double(r.nu) + ',' + format_double(r.rho) + ',' + format_double(r.fit.d) + ',' +
           format_double(r.fit.ln_c) + ',' + format_double(r.fit.residual) + ',' + std::to_string(r.h_min) + ',' +
           std::to_string(r.h_max) + ',' + (r.assumption.passed ? "pass" : "fail") + ',' +
           (r.assumption.first_fail_depth ? std::to_string(*r.assumption.first_fail_depth) : "") + ',' + counts +
           '\n';
  }
  return out;
}

void write_output(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text << std::flush;
    if (!std::cout) throw Error(ErrorKind::io, "could not write to standard output");
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorKind::io, "cannot open '" + path + "' for writing");
  file << text;
  file.flush();
  if (!file) throw Error(ErrorKind::io, "failed writing '" + path + "'");
}

std::string read_file(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorKind::io, "cannot open '" + path + "'");
  std::stringstream buf;
  buf << file.rdbuf();
  return buf.str();
}

}  // namespace poo
