#pragma once

#include <memory>
#include <string>

#include "json.hpp"
#include "poo/hoo.hpp"
#include "poo/poo.hpp"

namespace poo {

using Json = nlohmann::json;

inline constexpr const char* kStateFormat = "poo-state";
inline constexpr int kStateVersion = 1;

Json save_box(const Box& box);
Box load_box(const Json& j);

/// Tree shape, statistics, log and RNG state. Regions are rebuilt from the
/// partitioning on load; u/b values are recomputed at the next step.
Json save_instance(const HooInstance& inst);
HooInstance load_instance(const Json& j, std::shared_ptr<const StandardPartitioning> part);

/// Self-describing blob for a whole POO run. The objective is rebuilt by name
/// unless `base` is given (required for objectives not known by name).
Json save_state(const PooState& state);
PooState load_state(const Json& j, std::shared_ptr<const Objective> base = nullptr);

/// Throws a format error when j lacks `key`.
const Json& require_field(const Json& j, const char* key);

}  // namespace poo
