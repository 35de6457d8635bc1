#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "poo/analysis.hpp"
#include "poo/checkpoint.hpp"
#include "poo/poo.hpp"

namespace poo {

using Settings = std::map<std::string, std::string>;

enum class AlgoKind { hoo, poo };

struct AlgorithmSpec {
  AlgoKind kind = AlgoKind::hoo;
  double nu = 1.0;
  double rho = 0.5;
  double rho_max = 0.9;
  double nu_max = 1.0;
  bool sharing = true;
  GrowthSchedule growth = GrowthSchedule::off;
  NuGrowth nu_growth = NuGrowth::off;
  std::uint64_t growth_start = 64;

  /// Short label for the CSV algo column.
  std::string tag() const;
  /// Canonical full description; also the seed label of the algorithm's streams.
  std::string descriptor() const;
};

struct ExperimentConfig {
  std::string objective = "difficult";
  std::string noise = "uniform:0.1";
  unsigned arity = 2;
  std::vector<AlgorithmSpec> algorithms;
  std::uint64_t budget = 500;
  BudgetMode budget_mode = BudgetMode::fresh;
  std::size_t runs = 1;
  std::uint64_t seed = 0;
  RecommendMode rec_mode = RecommendMode::uniform_random;
  std::vector<std::uint64_t> checkpoints;  // ascending, last one <= budget
  std::string out = "-";
  std::vector<double> rho_list;
  double nu = 1.0;  // HOO nu used by sweep-rho and dim
  unsigned h_max = 18;

  /// Resolved key-value form this config was built from.
  Settings settings;

  void validate() const;
};

/// Recognised configuration keys, matching the CLI flag names.
const std::vector<std::string>& setting_keys();

/// Named preset values: fig2-small, fig2-large, rho-sweep, dim-report.
Settings preset_settings(const std::string& name);
std::vector<std::string> preset_names();

/// Flat "key = value" text; '#' starts a comment.
Settings parse_settings(const std::string& text);
Settings read_settings_file(const std::string& path);

/// Later maps override earlier ones.
Settings merge_settings(std::initializer_list<Settings> layers);

ExperimentConfig config_from_settings(const Settings& settings);

/// "hoo", "poo", or ';'-separated "name:key=value,key=value" items. Keys not
/// given fall back to the defaults in `base`.
std::vector<AlgorithmSpec> parse_algorithms(const std::string& text, const AlgorithmSpec& hoo_base,
                                            const AlgorithmSpec& poo_base);

/// "a,b,c", "every:S", "log2:A" (A, 2A, 4A, ...), or "log:K" (K log-spaced points).
std::vector<std::uint64_t> parse_checkpoints(const std::string& text, std::uint64_t budget);

/// Seed shared by every algorithm in one run.
std::uint64_t run_seed(std::uint64_t master, std::size_t run);

/// Stop one (run, algorithm) pair when its budget counter reaches `at`.
struct StopRequest {
  std::size_t run = 0;
  std::size_t algo = 0;
  std::uint64_t at = 0;
};

inline constexpr const char* kExperimentFormat = "poo-bench-experiment";
inline constexpr int kExperimentVersion = 1;

/// Executes runs x algorithms in (run, algorithm, checkpoint) order.
class ExperimentRunner {
 public:
  explicit ExperimentRunner(ExperimentConfig config);
  ~ExperimentRunner();
  ExperimentRunner(ExperimentRunner&&) noexcept;
  ExperimentRunner& operator=(ExperimentRunner&&) noexcept;

  /// Runs to completion, or until `stop` is reached; returns true when complete.
  bool run(const std::optional<StopRequest>& stop = std::nullopt);

  const std::vector<RegretRecord>& rows() const { return rows_; }
  const ExperimentConfig& config() const { return config_; }

  Json save() const;
  static ExperimentRunner load(const Json& blob);

 private:
  class Executor;

  ExperimentConfig config_;
  std::shared_ptr<const Objective> objective_;
  std::shared_ptr<const StandardPartitioning> partitioning_;
  std::vector<RegretRecord> rows_;
  std::size_t next_pair_ = 0;
  std::unique_ptr<Executor> current_;
};

std::vector<RegretRecord> run_experiment(const ExperimentConfig& config);

struct SweepRow {
  double rho = 0.0;
  double nu = 0.0;
  std::size_t runs = 0;
  std::uint64_t budget = 0;
  double mean_expected = 0.0;
  double se_expected = 0.0;
  double mean_realized = 0.0;
  double se_realized = 0.0;
};

/// HOO at each rho in config.rho_list, final-budget regret summarised per rho.
std::vector<SweepRow> sweep_rho(const ExperimentConfig& config);

std::vector<DimReport> estimate_dim_cmd(const ExperimentConfig& config);

std::string format_double(double v);
std::string regret_csv(const std::vector<RegretRecord>& rows);
std::string sweep_csv(const std::vector<SweepRow>& rows);
std::string dim_csv(const std::vector<DimReport>& reports);

inline constexpr const char* kRegretSchema = "#schema=poo-regret/1";
inline constexpr const char* kRegretHeader =
    "run_id,algo,nu,rho,checkpoint_n,n_fresh,regret_realized,regret_expected,n_instances,cache_hit_rate,seed";
inline constexpr const char* kSweepSchema = "#schema=poo-sweep/1";
inline constexpr const char* kSweepHeader =
    "rho,nu,runs,budget,mean_regret_expected,se_regret_expected,mean_regret_realized,se_regret_realized";
inline constexpr const char* kDimSchema = "#schema=poo-dim/1";
inline constexpr const char* kDimHeader =
    "nu,rho,d,ln_c,residual,h_min,h_max,assumption,first_fail_depth,counts";

/// Writes to a file, or to stdout for "-". Throws an io error on failure.
void write_output(const std::string& path, const std::string& text);
std::string read_file(const std::string& path);

}  // namespace poo
