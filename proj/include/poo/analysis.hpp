#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "poo/hoo.hpp"
#include "poo/objectives.hpp"
#include "poo/partition.hpp"

namespace poo {

enum class CountMode { pruned, exhaustive };

/// Largest K^h_max the counters will enumerate.
inline constexpr std::uint64_t kMaxEnumeratedCells = std::uint64_t{1} << 22;

/// N_h = number of depth-h cells with sup f >= f* - 2 nu rho^h, h = 0..h_max.
/// Pruned mode only inspects children of near-optimal cells one level up.
std::vector<std::uint64_t> near_optimal_counts(const Objective& obj, const StandardPartitioning& part, double nu,
                                               double rho, unsigned h_max, CountMode mode = CountMode::pruned,
                                               int resolution = 64);

struct DimFit {
  double d = 0.0;
  double ln_c = 0.0;
  double residual = 0.0;  // RMS of ln N_h about the fitted line
  bool clamped = false;
};

/// Least squares ln N_h = ln C + d h ln(1/rho) over h_min <= h < counts.size(),
/// slope clamped at 0. Needs 4 usable depths.
DimFit fit_dimension(std::span<const std::uint64_t> counts, double rho, unsigned h_min = 3);

struct Assumption1Result {
  bool passed = true;
  std::optional<unsigned> first_fail_depth;
  unsigned h_max = 0;
};

/// Walks the cells containing the declared maximizer down to h_max and checks
/// inf f >= f* - nu rho^h on each.
Assumption1Result check_assumption1(const Objective& obj, const StandardPartitioning& part, double nu, double rho,
                                    unsigned h_max, int resolution = 64);

struct DimReport {
  double nu = 0.0;
  double rho = 0.0;
  unsigned h_min = 3;
  unsigned h_max = 0;
  std::vector<std::uint64_t> counts;
  DimFit fit;
  Assumption1Result assumption;
};

DimReport estimate_dimension(const Objective& obj, const StandardPartitioning& part, double nu, double rho,
                             unsigned h_max, unsigned h_min = 3, CountMode mode = CountMode::pruned);

/// f* - f(x).
double simple_regret(const Objective& obj, std::span<const double> x);

/// f* minus the mean of f over the instance's evaluated points: the exact
/// expectation of simple_regret under uniform-random recommendation.
double expected_simple_regret(const Objective& obj, const HooInstance& inst);

/// One measurement on a regret curve.
struct RegretRecord {
  std::size_t run_id = 0;
  std::string algo;
  double nu = 0.0;   // nu, or nu_max for POO
  double rho = 0.0;  // rho, or rho_max for POO
  std::uint64_t checkpoint_n = 0;  // budget counter at the checkpoint
  std::uint64_t n_logical = 0;
  std::uint64_t n_fresh = 0;
  double regret_realized = 0.0;
  double regret_expected = 0.0;
  std::uint64_t n_instances = 1;
  double cache_hit_rate = 0.0;
  std::uint64_t seed = 0;
};

}  // namespace poo
