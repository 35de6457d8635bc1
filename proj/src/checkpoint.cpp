#include "poo/checkpoint.hpp"

#include "poo/error.hpp"

namespace poo {

const Json& require_field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(ErrorKind::format, std::string("checkpoint field '") + key + "' is missing");
  }
  return j.at(key);
}

namespace {

template <class T>
T field(const Json& j, const char* key) {
  try {
    return require_field(j, key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::format, std::string("checkpoint field '") + key + "': " + e.what());
  }
}

const char* budget_name(BudgetMode m) { return m == BudgetMode::fresh ? "fresh" : "logical"; }

BudgetMode budget_from(const std::string& s) {
  if (s == "fresh") return BudgetMode::fresh;
  if (s == "logical") return BudgetMode::logical;
  throw Error(ErrorKind::format, "unknown budget mode '" + s + "'");
}

const char* growth_name(GrowthSchedule g) {
  switch (g) {
    case GrowthSchedule::off: return "off";
    case GrowthSchedule::dmax_increment: return "dmax";
    case GrowthSchedule::rho_sqrt: return "rho-sqrt";
  }
  return "off";
}

GrowthSchedule growth_from(const std::string& s) {
  if (s == "off") return GrowthSchedule::off;
  if (s == "dmax") return GrowthSchedule::dmax_increment;
  if (s == "rho-sqrt") return GrowthSchedule::rho_sqrt;
  throw Error(ErrorKind::format, "unknown growth schedule '" + s + "'");
}

}  // namespace

Json save_box(const Box& box) {
  return {{"lo", box.lo}, {"hi", box.hi}, {"hi_closed", box.hi_closed}};
}

Box load_box(const Json& j) {
  return Box(field<std::vector<double>>(j, "lo"), field<std::vector<double>>(j, "hi"),
             field<std::vector<bool>>(j, "hi_closed"));
}

struct InstanceCodec {
  static Json save(const HooInstance& inst) {
    Json nodes = Json::array();
    for (const HooNode& n : inst.tree_.nodes()) {
      nodes.push_back({n.cell.depth, n.cell.index, n.parent, n.first_child, n.sampled, n.stats.visits,
                       n.stats.reward_sum});
    }
    Json log = Json::array();
    for (const Evaluation& e : inst.log_) log.push_back({e.node, e.reward});
    return {{"nu", inst.nu_},
            {"rho", inst.rho_},
            {"engine", save_engine(inst.engine_)},
            {"reward_total", inst.reward_total_},
            {"nodes", std::move(nodes)},
            {"log", std::move(log)}};
  }

  static HooInstance load(const Json& j, std::shared_ptr<const StandardPartitioning> part) {
    HooInstance inst(part, field<double>(j, "nu"), field<double>(j, "rho"), 0);
    inst.engine_ = load_engine(field<std::string>(j, "engine"));
    inst.reward_total_ = field<double>(j, "reward_total");

    HooTree tree;
    tree.arity_ = part->arity();
    const Json& nodes = require_field(j, "nodes");
    if (!nodes.is_array() || nodes.empty()) throw Error(ErrorKind::format, "checkpoint tree is empty");
    try {
      for (const Json& r : nodes) {
        HooNode n;
        n.cell = {r.at(0).get<unsigned>(), r.at(1).get<std::uint64_t>()};
        n.parent = r.at(2).get<std::int64_t>();
        n.first_child = r.at(3).get<std::int64_t>();
        n.sampled = r.at(4).get<bool>();
        n.stats.visits = r.at(5).get<std::uint64_t>();
        n.stats.reward_sum = r.at(6).get<double>();
        tree.nodes_.push_back(std::move(n));
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::format, std::string("checkpoint node: ") + e.what());
    }
    const std::int64_t count = static_cast<std::int64_t>(tree.nodes_.size());
    tree.nodes_[0].region = part->domain();
    for (std::int64_t i = 0; i < count; ++i) {
      HooNode& n = tree.nodes_[i];
      if (n.is_leaf()) continue;
      if (n.first_child <= i || n.first_child + static_cast<std::int64_t>(part->arity()) > count) {
        throw Error(ErrorKind::format, "checkpoint tree has an invalid child link");
      }
      std::vector<Box> kids = part->split(n.region, n.depth());
      for (unsigned k = 0; k < part->arity(); ++k) tree.nodes_[n.first_child + k].region = std::move(kids[k]);
    }
    inst.tree_ = std::move(tree);

    try {
      for (const Json& r : require_field(j, "log")) {
        const auto node = r.at(0).get<std::size_t>();
        if (node >= inst.tree_.size()) throw Error(ErrorKind::format, "checkpoint log refers to a missing node");
        const HooNode& n = inst.tree_.node(node);
        inst.log_.push_back({n.region.center(), r.at(1).get<double>(), n.depth(), node});
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::format, std::string("checkpoint log: ") + e.what());
    }
    return inst;
  }
};

Json save_instance(const HooInstance& inst) { return InstanceCodec::save(inst); }

HooInstance load_instance(const Json& j, std::shared_ptr<const StandardPartitioning> part) {
  return InstanceCodec::load(j, std::move(part));
}

struct PooCodec {
  static Json save(const PooState& s) {
    const PooConfig& c = s.config_;
    const Objective& base = s.objective_.base();
    Json params = Json::object();
    for (const auto& [k, v] : base.params()) params[k] = v;

    Json slots = Json::array();
    for (const auto& slot : s.slots_) slots.push_back(InstanceCodec::save(slot.instance));
    Json pending = Json::array();
    for (const auto& t : s.pending_) pending.push_back({t.rho, t.target_time, t.slot});
    Json cache = Json::array();
    for (const auto& [key, entry] : s.cache_.entries_) {
      Json consumed = Json::array();
      for (const auto& [inst, used] : entry.consumed) consumed.push_back({inst, used});
      cache.push_back({{"key", key}, {"rewards", entry.rewards}, {"consumed", std::move(consumed)}});
    }

    return {{"format", kStateFormat},
            {"version", kStateVersion},
            {"objective", {{"name", base.name()}, {"params", std::move(params)}}},
            {"noise", s.objective_.noise().to_string()},
            {"noise_engine", save_engine(s.objective_.engine())},
            {"partitioning", {{"domain", save_box(c.partitioning->domain())}, {"arity", c.partitioning->arity()}}},
            {"config",
             {{"rho_max", c.rho_max},
              {"nu_max", c.nu_max},
              {"sharing", c.sharing},
              {"budget", c.budget},
              {"budget_mode", budget_name(c.budget_mode)},
              {"growth", growth_name(c.growth)},
              {"nu_growth", c.nu_growth == NuGrowth::loglog ? "loglog" : "off"},
              {"growth_start", c.growth_start},
              {"seed", c.seed}}},
            {"counters",
             {{"n", s.n_},
              {"n_fresh", s.n_fresh_},
              {"cursor", s.cursor_},
              {"rho_max", s.rho_max_},
              {"d_max", s.d_max_},
              {"nu_max", s.nu_max_},
              {"next_growth_n", s.next_growth_n_}}},
            {"instances", std::move(slots)},
            {"order", s.order_},
            {"pending", std::move(pending)},
            {"cache", {{"entries", std::move(cache)}, {"hits", s.cache_.hits_}, {"misses", s.cache_.misses_}}}};
  }

  static PooState load(const Json& j, std::shared_ptr<const Objective> base) {
    if (field<std::string>(j, "format") != kStateFormat) throw Error(ErrorKind::format, "not a POO state blob");
    if (field<int>(j, "version") != kStateVersion) throw Error(ErrorKind::format, "unsupported POO state version");

    const Json& obj = require_field(j, "objective");
    if (!base) base = make_objective(field<std::string>(obj, "name"), field<ParamMap>(obj, "params"));
    NoisyObjective noisy(base, NoiseModel::parse(field<std::string>(j, "noise")), 0);
    noisy.engine() = load_engine(field<std::string>(j, "noise_engine"));

    const Json& pj = require_field(j, "partitioning");
    PooConfig c;
    c.partitioning = std::make_shared<StandardPartitioning>(load_box(require_field(pj, "domain")),
                                                            field<unsigned>(pj, "arity"));
    const Json& cj = require_field(j, "config");
    c.rho_max = field<double>(cj, "rho_max");
    c.nu_max = field<double>(cj, "nu_max");
    c.sharing = field<bool>(cj, "sharing");
    c.budget = field<std::uint64_t>(cj, "budget");
    c.budget_mode = budget_from(field<std::string>(cj, "budget_mode"));
    c.growth = growth_from(field<std::string>(cj, "growth"));
    c.nu_growth = field<std::string>(cj, "nu_growth") == "loglog" ? NuGrowth::loglog : NuGrowth::off;
    c.growth_start = field<std::uint64_t>(cj, "growth_start");
    c.seed = field<std::uint64_t>(cj, "seed");

    PooState s(c, std::move(noisy));
    const Json& k = require_field(j, "counters");
    s.n_ = field<std::uint64_t>(k, "n");
    s.n_fresh_ = field<std::uint64_t>(k, "n_fresh");
    s.cursor_ = field<std::size_t>(k, "cursor");
    s.rho_max_ = field<double>(k, "rho_max");
    s.d_max_ = field<double>(k, "d_max");
    s.nu_max_ = field<double>(k, "nu_max");
    s.next_growth_n_ = field<std::uint64_t>(k, "next_growth_n");

    s.slots_.clear();
    for (const Json& ij : require_field(j, "instances")) {
      const auto id = static_cast<std::uint32_t>(s.slots_.size());
      s.slots_.push_back({id, InstanceCodec::load(ij, c.partitioning)});
    }
    s.order_ = field<std::vector<std::uint32_t>>(j, "order");
    if (s.order_.size() != s.slots_.size() || s.cursor_ >= std::max<std::size_t>(1, s.order_.size())) {
      throw Error(ErrorKind::format, "checkpoint instance order is inconsistent");
    }
    for (std::uint32_t id : s.order_) {
      if (id >= s.slots_.size()) throw Error(ErrorKind::format, "checkpoint order refers to a missing instance");
    }
    s.pending_.clear();
    try {
      for (const Json& t : require_field(j, "pending")) {
        s.pending_.push_back({t.at(0).get<double>(), t.at(1).get<std::uint64_t>(), t.at(2).get<std::int64_t>()});
      }
      const Json& cache = require_field(j, "cache");
      s.cache_ = EvalCache();
      for (const Json& e : require_field(cache, "entries")) {
        EvalCache::Entry entry;
        entry.rewards = e.at("rewards").get<std::vector<double>>();
        for (const Json& p : e.at("consumed")) entry.consumed[p.at(0).get<std::uint32_t>()] = p.at(1).get<std::uint32_t>();
        s.cache_.entries_[e.at("key").get<EvalCache::Key>()] = std::move(entry);
      }
      s.cache_.hits_ = cache.at("hits").get<std::uint64_t>();
      s.cache_.misses_ = cache.at("misses").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::format, std::string("checkpoint state: ") + e.what());
    }
    return s;
  }
};

Json save_state(const PooState& state) { return PooCodec::save(state); }

PooState load_state(const Json& j, std::shared_ptr<const Objective> base) {
  return PooCodec::load(j, std::move(base));
}

}  // namespace poo
