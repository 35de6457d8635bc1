#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>

#include "poo/partition.hpp"
#include "poo/random.hpp"

namespace poo {

using ParamMap = std::map<std::string, double>;

/// A deterministic function f on a box domain with a known supremum f*.
/// f* and the maximizer exist for measuring regret; optimizers never see them.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual std::string name() const = 0;
  virtual ParamMap params() const { return {}; }

  const Box& domain() const { return domain_; }
  std::size_t dimension() const { return domain_.dimension(); }
  double f_star() const { return f_star_; }
  const std::optional<Point>& maximizer() const { return maximizer_; }

  /// f(x); throws a domain error outside the domain.
  double eval_true(std::span<const double> x) const;

  /// Exact sup / inf of f over a region, when the objective knows them.
  virtual std::optional<double> exact_sup(const Box&) const { return std::nullopt; }
  virtual std::optional<double> exact_inf(const Box&) const { return std::nullopt; }
  bool has_exact_rules() const { return exact_sup(domain_).has_value(); }

 protected:
  Objective(Box domain, double f_star, std::optional<Point> maximizer);

  virtual double value(std::span<const double> x) const = 0;

 private:
  Box domain_;
  double f_star_;
  std::optional<Point> maximizer_;
};

/// Supremum of f over a region. Uses the exact rule when available; otherwise
/// the max over a `resolution`-per-axis grid spanning the region's corners,
/// plus its center. The grid value never exceeds the true sup.
double sup_on_cell(const Objective& obj, const Box& region, int resolution = 64);

/// Infimum counterpart; the grid value never falls below the true inf.
double inf_on_cell(const Objective& obj, const Box& region, int resolution = 64);

/// f(x) = s(log2 r)(sqrt(r) - r^2) - sqrt(r), r = |x - 1/2|, on [0, 1).
/// s(u) = 1 when frac(u) is in [0, 1/2], else 0. f(1/2) = 0.
class DifficultFunction final : public Objective {
 public:
  DifficultFunction();
  std::string name() const override { return "difficult"; }
  std::optional<double> exact_sup(const Box& region) const override;
  std::optional<double> exact_inf(const Box& region) const override;

 protected:
  double value(std::span<const double> x) const override;
};

/// Step function on [0, 1] that is locally smooth at 0 with rate rho and
/// constant 1 but has taxonomy quality zero.
class ZeroQuality final : public Objective {
 public:
  explicit ZeroQuality(double rho);
  std::string name() const override { return "zero-quality"; }
  ParamMap params() const override { return {{"rho", rho_}}; }
  double rho() const { return rho_; }
  std::optional<double> exact_sup(const Box& region) const override;
  std::optional<double> exact_inf(const Box& region) const override;

 protected:
  double value(std::span<const double> x) const override;

 private:
  double rho_;
};

/// f(x, y) = 1 - |x| - y^2 on [-1, 1)^2.
class Wedge2D final : public Objective {
 public:
  Wedge2D();
  std::string name() const override { return "wedge2d"; }
  std::optional<double> exact_sup(const Box& region) const override;
  std::optional<double> exact_inf(const Box& region) const override;

 protected:
  double value(std::span<const double> x) const override;
};

/// f(x) = -beta * ||x - x*||^alpha on [0, 1]^p.
class PowerEnvelope final : public Objective {
 public:
  explicit PowerEnvelope(double alpha = 1.0, double beta = 1.0, double x_star = 1.0 / 3.0,
                         std::size_t dimension = 1);
  std::string name() const override { return "power-envelope"; }
  ParamMap params() const override;
  std::optional<double> exact_sup(const Box& region) const override;
  std::optional<double> exact_inf(const Box& region) const override;

 protected:
  double value(std::span<const double> x) const override;

 private:
  double alpha_;
  double beta_;
  double x_star_;
};

/// f = 0 on [0, 1]^p.
class Constant final : public Objective {
 public:
  explicit Constant(std::size_t dimension = 1);
  std::string name() const override { return "constant"; }
  ParamMap params() const override { return {{"dim", static_cast<double>(dimension())}}; }
  std::optional<double> exact_sup(const Box&) const override { return 0.0; }
  std::optional<double> exact_inf(const Box&) const override { return 0.0; }

 protected:
  double value(std::span<const double>) const override { return 0.0; }
};

/// f(x) = 1/ln(x) on [0, upper), f(0) = 0. Drops faster than any geometric
/// rate at its maximizer 0.
class LogCusp final : public Objective {
 public:
  explicit LogCusp(double upper = 1.0);
  std::string name() const override { return "log-cusp"; }
  ParamMap params() const override { return {{"upper", upper_}}; }
  std::optional<double> exact_sup(const Box& region) const override;
  std::optional<double> exact_inf(const Box& region) const override;

 protected:
  double value(std::span<const double> x) const override;

 private:
  double upper_;
};

/// User-supplied function without exact cell rules.
class FunctionObjective final : public Objective {
 public:
  using Fn = std::function<double(std::span<const double>)>;
  FunctionObjective(std::string name, Box domain, Fn fn, double f_star,
                    std::optional<Point> maximizer = std::nullopt);
  std::string name() const override { return name_; }

 protected:
  double value(std::span<const double> x) const override { return fn_(x); }

 private:
  std::string name_;
  Fn fn_;
};

/// Build a built-in objective from its name and parameters.
std::shared_ptr<const Objective> make_objective(const std::string& name, const ParamMap& params = {});

/// Parse "name" or "name:key=value,key=value".
std::shared_ptr<const Objective> parse_objective(const std::string& description);

/// Bounded, zero-mean additive noise.
struct NoiseModel {
  enum class Kind { none, uniform, truncated_gaussian };

  Kind kind = Kind::none;
  double scale = 0.0;  // uniform half-width, or gaussian standard deviation
  double bound = 0.0;  // truncation bound for the gaussian

  static NoiseModel none() { return {}; }
  static NoiseModel uniform(double half_width);
  static NoiseModel truncated_gaussian(double sigma, double bound);

  /// "none", "uniform:W", "tgauss:SIGMA:BOUND".
  static NoiseModel parse(const std::string& text);
  std::string to_string() const;

  /// Almost-sure bound on |noise|.
  double max_abs() const;
  double sample(Engine& engine) const;
};

/// Anything that returns one reward for a requested point.
class EvalProvider {
 public:
  virtual ~EvalProvider() = default;
  virtual double evaluate(std::span<const double> x) = 0;
};

/// f plus a fresh noise draw from a dedicated stream: r = f(x) + eps.
class NoisyObjective final : public EvalProvider {
 public:
  NoisyObjective(std::shared_ptr<const Objective> base, NoiseModel noise, std::uint64_t seed);

  double eval_noisy(std::span<const double> x);
  double evaluate(std::span<const double> x) override { return eval_noisy(x); }

  const Objective& base() const { return *base_; }
  const std::shared_ptr<const Objective>& base_ptr() const { return base_; }
  const NoiseModel& noise() const { return noise_; }

  Engine& engine() { return engine_; }
  const Engine& engine() const { return engine_; }

 private:
  std::shared_ptr<const Objective> base_;
  NoiseModel noise_;
  Engine engine_;
};

}  // namespace poo
