#include "poo/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "poo/error.hpp"

namespace poo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Interval on the real line with explicit endpoint closure.
struct Span {
  double lo;
  double hi;
  bool lo_closed;
  bool hi_closed;

  bool empty() const { return lo > hi || (lo == hi && !(lo_closed && hi_closed)); }

  Span intersect(const Span& o) const {
    Span s = *this;
    if (o.lo > s.lo) {
      s.lo = o.lo;
      s.lo_closed = o.lo_closed;
    } else if (o.lo == s.lo) {
      s.lo_closed = s.lo_closed && o.lo_closed;
    }
    if (o.hi < s.hi) {
      s.hi = o.hi;
      s.hi_closed = o.hi_closed;
    } else if (o.hi == s.hi) {
      s.hi_closed = s.hi_closed && o.hi_closed;
    }
    return s;
  }
};

Span axis_span(const Box& box, std::size_t axis) {
  return {box.lo[axis], box.hi[axis], true, static_cast<bool>(box.hi_closed[axis])};
}

void require_1d(const Box& region) {
  if (region.dimension() != 1) throw Error(ErrorKind::geometry, "expected a one-dimensional region");
}

// DifficultFunction in terms of r = |x - 1/2| >= 0. Half-octave m covers
// [2^(m/2), 2^((m+1)/2)); even m is the closed quadratic band -r^2, odd m the
// open square-root band -sqrt(r).
double half_octave_edge(long m) {
  const long q = m >= 0 ? m / 2 : -((-m + 1) / 2);
  return (m - 2 * q) == 0 ? std::ldexp(1.0, static_cast<int>(q))
                          : std::ldexp(std::numbers::sqrt2, static_cast<int>(q));
}

Span half_octave(long m) {
  const bool quadratic = (m % 2) == 0;
  return {half_octave_edge(m), half_octave_edge(m + 1), quadratic, quadratic};
}

double band_value(long m, double r) { return (m % 2) == 0 ? -r * r : -std::sqrt(r); }

long half_octave_index(double r) {
  long m = static_cast<long>(std::floor(2.0 * std::log2(r)));
  while (r < half_octave_edge(m)) --m;
  while (r >= half_octave_edge(m + 1)) ++m;
  return m;
}

double difficult_of_r(double r) {
  if (r == 0.0) return 0.0;
  const double lg = std::log2(r);
  const double frac = lg - std::floor(lg);
  return frac <= 0.5 ? -r * r : -std::sqrt(r);
}

// sup (want_sup) or inf of the r-profile over a span of r >= 0.
double difficult_bound_on_r(const Span& rs, bool want_sup) {
  if (rs.empty()) return want_sup ? -kInf : kInf;
  if (rs.lo == 0.0 && want_sup) return 0.0;
  double best = want_sup ? -kInf : kInf;
  if (rs.lo == 0.0 && rs.lo_closed) best = 0.0;
  const long m_hi = half_octave_index(rs.hi);
  // Below a few half-octaves under the top every band value is closer to 0
  // than the bands above it, so they cannot set the inf.
  const long m_lo = rs.lo == 0.0 ? m_hi - 4 : half_octave_index(rs.lo);
  for (long m = m_lo; m <= m_hi; ++m) {
    const Span piece = rs.intersect(half_octave(m));
    if (piece.empty()) continue;
    // Each band is decreasing in r: sup at its left end, inf at its right end.
    const double v = want_sup ? band_value(m, piece.lo) : band_value(m, piece.hi);
    best = want_sup ? std::max(best, v) : std::min(best, v);
  }
  return best;
}

double difficult_bound(const Box& region, bool want_sup) {
  require_1d(region);
  const Span xs = axis_span(region, 0);
  double best = want_sup ? -kInf : kInf;
  auto fold = [&](double v) { best = want_sup ? std::max(best, v) : std::min(best, v); };
  // x >= 1/2 maps to r = x - 1/2 preserving closures.
  const Span right = xs.intersect({0.5, kInf, true, false});
  if (!right.empty()) {
    fold(difficult_bound_on_r({right.lo - 0.5, right.hi - 0.5, right.lo_closed, right.hi_closed},
                              want_sup));
  }
  // x < 1/2 maps to r = 1/2 - x, which swaps the endpoints.
  const Span left = xs.intersect({-kInf, 0.5, false, false});
  if (!left.empty()) {
    fold(difficult_bound_on_r({0.5 - left.hi, 0.5 - left.lo, left.hi_closed, left.lo_closed},
                              want_sup));
  }
  return best;
}

// ZeroQuality band h is (2^-(h+1), 2^-h], split at m_h = (1 + 1/(h+1)) 2^-(h+1).
int zero_quality_band(double x) {
  int e = 0;
  const double mant = std::frexp(x, &e);
  return mant == 0.5 ? 1 - e : -e;
}

double zero_quality_split(int h) { return std::ldexp(1.0 + 1.0 / (h + 1), -(h + 1)); }

// Smallest distance from c to the closure of the span.
double distance_to(const Span& s, double c) {
  if (c < s.lo) return s.lo - c;
  if (c > s.hi) return c - s.hi;
  return 0.0;
}

double farthest_from(const Span& s, double c) { return std::max(std::abs(s.lo - c), std::abs(s.hi - c)); }

void require_nondegenerate(const Box& region) {
  for (std::size_t j = 0; j < region.dimension(); ++j) {
    if (!(region.lo[j] < region.hi[j])) throw Error(ErrorKind::geometry, "degenerate region");
  }
}

double grid_extreme(const Objective& obj, const Box& region, int resolution, bool want_sup) {
  if (resolution < 2) throw Error(ErrorKind::config, "grid resolution must be at least 2");
  if (region.dimension() != obj.dimension()) {
    throw Error(ErrorKind::geometry, "region dimension does not match the objective");
  }
  require_nondegenerate(region);
  const std::size_t p = region.dimension();
  double best = want_sup ? -kInf : kInf;
  auto fold = [&](const Point& x) {
    const double v = obj.eval_true(x);
    best = want_sup ? std::max(best, v) : std::min(best, v);
  };
  fold(region.center());
  std::vector<int> counter(p, 0);
  Point x(p);
  while (true) {
    for (std::size_t j = 0; j < p; ++j) {
      // An open upper end is approached from inside the cell.
      const double top = region.hi_closed[j] ? region.hi[j] : std::nextafter(region.hi[j], region.lo[j]);
      x[j] = counter[j] == resolution - 1 ? top : region.lo[j] + region.width(j) * counter[j] / (resolution - 1);
    }
    fold(x);
    std::size_t j = 0;
    while (j < p && ++counter[j] == resolution) counter[j++] = 0;
    if (j == p) break;
  }
  return best;
}

}  // namespace

Objective::Objective(Box domain, double f_star, std::optional<Point> maximizer)
    : domain_(std::move(domain)), f_star_(f_star), maximizer_(std::move(maximizer)) {}

double Objective::eval_true(std::span<const double> x) const {
  if (!domain_.contains(x)) throw Error(ErrorKind::domain, name() + ": point outside the domain");
  return value(x);
}

double sup_on_cell(const Objective& obj, const Box& region, int resolution) {
  require_nondegenerate(region);
  if (auto exact = obj.exact_sup(region)) return *exact;
  return grid_extreme(obj, region, resolution, true);
}

double inf_on_cell(const Objective& obj, const Box& region, int resolution) {
  require_nondegenerate(region);
  if (auto exact = obj.exact_inf(region)) return *exact;
  return grid_extreme(obj, region, resolution, false);
}

// ---------------------------------------------------------------------------

DifficultFunction::DifficultFunction() : Objective(Box::half_open({0.0}, {1.0}), 0.0, Point{0.5}) {}

double DifficultFunction::value(std::span<const double> x) const {
  return difficult_of_r(std::abs(x[0] - 0.5));
}

std::optional<double> DifficultFunction::exact_sup(const Box& region) const {
  return difficult_bound(region, true);
}

std::optional<double> DifficultFunction::exact_inf(const Box& region) const {
  return difficult_bound(region, false);
}

// ---------------------------------------------------------------------------

ZeroQuality::ZeroQuality(double rho)
    : Objective(Box::closed({0.0}, {1.0}), 0.0, Point{0.0}), rho_(rho) {
  if (!(rho > 0.0 && rho < 1.0)) throw Error(ErrorKind::config, "zero-quality rho must lie in (0, 1)");
}

double ZeroQuality::value(std::span<const double> x) const {
  if (x[0] == 0.0) return 0.0;
  const int h = zero_quality_band(x[0]);
  const double level = std::pow(rho_, h);
  return x[0] <= zero_quality_split(h) ? -level : -level / 3.0;
}

namespace {

double zero_quality_bound(const Box& region, double rho, bool want_sup) {
  require_1d(region);
  const Span xs = axis_span(region, 0);
  double best = want_sup ? -kInf : kInf;
  auto fold = [&](double v) { best = want_sup ? std::max(best, v) : std::min(best, v); };
  if (xs.lo == 0.0) {
    if (want_sup) return 0.0;  // the point 0 or values approaching it
    if (xs.lo_closed) fold(0.0);
  }
  const int h_top = zero_quality_band(xs.hi);
  // With lo = 0 the bands continue forever but their values climb to 0, so
  // only the top few can hold the inf.
  const int h_bottom = xs.lo == 0.0 ? h_top + 3 : zero_quality_band(xs.lo);
  for (int h = h_top; h <= h_bottom; ++h) {
    const double left = std::ldexp(1.0, -(h + 1));
    const double mid = zero_quality_split(h);
    const double right = std::ldexp(1.0, -h);
    const double level = std::pow(rho, h);
    if (!xs.intersect({left, mid, false, true}).empty()) fold(-level);
    if (!xs.intersect({mid, right, false, true}).empty()) fold(-level / 3.0);
  }
  return best;
}

}  // namespace

std::optional<double> ZeroQuality::exact_sup(const Box& region) const {
  return zero_quality_bound(region, rho_, true);
}

std::optional<double> ZeroQuality::exact_inf(const Box& region) const {
  return zero_quality_bound(region, rho_, false);
}

// ---------------------------------------------------------------------------

Wedge2D::Wedge2D() : Objective(Box::half_open({-1.0, -1.0}, {1.0, 1.0}), 1.0, Point{0.0, 0.0}) {}

double Wedge2D::value(std::span<const double> x) const {
  return 1.0 - std::abs(x[0]) - x[1] * x[1];
}

std::optional<double> Wedge2D::exact_sup(const Box& region) const {
  if (region.dimension() != 2) throw Error(ErrorKind::geometry, "expected a two-dimensional region");
  const double dx = distance_to(axis_span(region, 0), 0.0);
  const double dy = distance_to(axis_span(region, 1), 0.0);
  return 1.0 - dx - dy * dy;
}

std::optional<double> Wedge2D::exact_inf(const Box& region) const {
  if (region.dimension() != 2) throw Error(ErrorKind::geometry, "expected a two-dimensional region");
  const double dx = farthest_from(axis_span(region, 0), 0.0);
  const double dy = farthest_from(axis_span(region, 1), 0.0);
  return 1.0 - dx - dy * dy;
}

// ---------------------------------------------------------------------------

PowerEnvelope::PowerEnvelope(double alpha, double beta, double x_star, std::size_t dimension)
    : Objective(Box::closed(std::vector<double>(dimension, 0.0), std::vector<double>(dimension, 1.0)),
                0.0, Point(dimension, x_star)),
      alpha_(alpha),
      beta_(beta),
      x_star_(x_star) {
  if (!(alpha > 0.0) || !(beta > 0.0)) {
    throw Error(ErrorKind::config, "power-envelope needs alpha > 0 and beta > 0");
  }
  if (!(x_star >= 0.0 && x_star <= 1.0)) throw Error(ErrorKind::config, "power-envelope x_star outside [0, 1]");
}

ParamMap PowerEnvelope::params() const {
  return {{"alpha", alpha_}, {"beta", beta_}, {"x_star", x_star_}, {"dim", static_cast<double>(dimension())}};
}

double PowerEnvelope::value(std::span<const double> x) const {
  double sq = 0.0;
  for (double xi : x) sq += (xi - x_star_) * (xi - x_star_);
  return -beta_ * std::pow(std::sqrt(sq), alpha_);
}

std::optional<double> PowerEnvelope::exact_sup(const Box& region) const {
  double sq = 0.0;
  for (std::size_t j = 0; j < region.dimension(); ++j) {
    const double d = distance_to(axis_span(region, j), x_star_);
    sq += d * d;
  }
  return -beta_ * std::pow(std::sqrt(sq), alpha_);
}

std::optional<double> PowerEnvelope::exact_inf(const Box& region) const {
  double sq = 0.0;
  for (std::size_t j = 0; j < region.dimension(); ++j) {
    const double d = farthest_from(axis_span(region, j), x_star_);
    sq += d * d;
  }
  return -beta_ * std::pow(std::sqrt(sq), alpha_);
}

// ---------------------------------------------------------------------------

Constant::Constant(std::size_t dimension)
    : Objective(Box::closed(std::vector<double>(dimension, 0.0), std::vector<double>(dimension, 1.0)),
                0.0, Point(dimension, 0.5)) {}

// ---------------------------------------------------------------------------

LogCusp::LogCusp(double upper) : Objective(Box::half_open({0.0}, {upper}), 0.0, Point{0.0}), upper_(upper) {
  if (!(upper > 0.0 && upper <= 1.0)) throw Error(ErrorKind::config, "log-cusp upper end must lie in (0, 1]");
}

double LogCusp::value(std::span<const double> x) const {
  if (x[0] == 0.0) return 0.0;
  if (x[0] >= 1.0) return -kInf;
  return 1.0 / std::log(x[0]);
}

// 1/ln(x) decreases on (0, 1): sup at the left end, inf at the right end.
std::optional<double> LogCusp::exact_sup(const Box& region) const {
  require_1d(region);
  return region.lo[0] == 0.0 ? 0.0 : value(std::span<const double>(region.lo));
}

std::optional<double> LogCusp::exact_inf(const Box& region) const {
  require_1d(region);
  return value(std::span<const double>(region.hi));
}

// ---------------------------------------------------------------------------

FunctionObjective::FunctionObjective(std::string name, Box domain, Fn fn, double f_star,
                                     std::optional<Point> maximizer)
    : Objective(std::move(domain), f_star, std::move(maximizer)), name_(std::move(name)), fn_(std::move(fn)) {}

// ---------------------------------------------------------------------------

namespace {

double param_or(const ParamMap& params, const std::string& key, double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

void require_known(const std::string& name, const ParamMap& params, std::initializer_list<const char*> keys) {
  for (const auto& [key, value] : params) {
    if (std::find_if(keys.begin(), keys.end(), [&](const char* k) { return key == k; }) == keys.end()) {
      throw Error(ErrorKind::config, "objective '" + name + "' has no parameter '" + key + "'");
    }
  }
}

std::size_t dimension_param(const ParamMap& params) {
  const double dim = param_or(params, "dim", 1.0);
  if (!(dim >= 1.0) || dim != std::floor(dim)) throw Error(ErrorKind::config, "dim must be a positive integer");
  return static_cast<std::size_t>(dim);
}

}  // namespace

std::shared_ptr<const Objective> make_objective(const std::string& name, const ParamMap& params) {
  if (name == "difficult") {
    require_known(name, params, {});
    return std::make_shared<DifficultFunction>();
  }
  if (name == "zero-quality") {
    require_known(name, params, {"rho"});
    return std::make_shared<ZeroQuality>(param_or(params, "rho", 0.5));
  }
  if (name == "wedge2d") {
    require_known(name, params, {});
    return std::make_shared<Wedge2D>();
  }
  if (name == "power-envelope") {
    require_known(name, params, {"alpha", "beta", "x_star", "dim"});
    return std::make_shared<PowerEnvelope>(param_or(params, "alpha", 1.0), param_or(params, "beta", 1.0),
                                           param_or(params, "x_star", 1.0 / 3.0), dimension_param(params));
  }
  if (name == "constant") {
    require_known(name, params, {"dim"});
    return std::make_shared<Constant>(dimension_param(params));
  }
  if (name == "log-cusp") {
    require_known(name, params, {"upper"});
    return std::make_shared<LogCusp>(param_or(params, "upper", 1.0));
  }
  throw Error(ErrorKind::config, "unknown objective '" + name + "'");
}

std::shared_ptr<const Objective> parse_objective(const std::string& description) {
  const auto colon = description.find(':');
  const std::string name = description.substr(0, colon);
  ParamMap params;
  if (colon != std::string::npos) {
    std::stringstream rest(description.substr(colon + 1));
    std::string item;
    while (std::getline(rest, item, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw Error(ErrorKind::config, "objective parameter '" + item + "' lacks '='");
      try {
        std::size_t used = 0;
        const std::string text = item.substr(eq + 1);
        params[item.substr(0, eq)] = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
      } catch (const std::logic_error&) {
        throw Error(ErrorKind::config, "objective parameter '" + item + "' is not numeric");
      }
    }
  }
  return make_objective(name, params);
}

// ---------------------------------------------------------------------------

NoiseModel NoiseModel::uniform(double half_width) {
  if (!(half_width >= 0.0)) throw Error(ErrorKind::config, "uniform noise width must be non-negative");
  return {Kind::uniform, half_width, half_width};
}

NoiseModel NoiseModel::truncated_gaussian(double sigma, double bound) {
  if (!(sigma > 0.0) || !(bound > 0.0)) {
    throw Error(ErrorKind::config, "truncated gaussian needs positive scale and bound");
  }
  return {Kind::truncated_gaussian, sigma, bound};
}

NoiseModel NoiseModel::parse(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ':')) parts.push_back(item);
  auto number = [&](std::size_t i) {
    try {
      std::size_t used = 0;
      const double v = std::stod(parts.at(i), &used);
      if (used != parts[i].size()) throw std::invalid_argument(parts[i]);
      return v;
    } catch (const std::exception&) {
      throw Error(ErrorKind::config, "malformed noise spec '" + text + "'");
    }
  };
  if (parts.size() == 1 && parts[0] == "none") return none();
  if (parts.size() == 2 && parts[0] == "uniform") return uniform(number(1));
  if (parts.size() == 3 && parts[0] == "tgauss") return truncated_gaussian(number(1), number(2));
  throw Error(ErrorKind::config, "malformed noise spec '" + text + "'");
}

std::string NoiseModel::to_string() const {
  std::ostringstream out;
  out.precision(17);
  switch (kind) {
    case Kind::none: return "none";
    case Kind::uniform: out << "uniform:" << scale; break;
    case Kind::truncated_gaussian: out << "tgauss:" << scale << ":" << bound; break;
  }
  return out.str();
}

double NoiseModel::max_abs() const { return kind == Kind::none ? 0.0 : bound; }

double NoiseModel::sample(Engine& engine) const {
  switch (kind) {
    case Kind::none: return 0.0;
    case Kind::uniform: return uniform_real(engine, -scale, scale);
    case Kind::truncated_gaussian:
      while (true) {
        const double eps = scale * standard_normal(engine);
        if (std::abs(eps) <= bound) return eps;
      }
  }
  return 0.0;
}

NoisyObjective::NoisyObjective(std::shared_ptr<const Objective> base, NoiseModel noise, std::uint64_t seed)
    : base_(std::move(base)), noise_(noise), engine_(seed) {
  if (!base_) throw Error(ErrorKind::config, "noisy objective needs a base objective");
}

double NoisyObjective::eval_noisy(std::span<const double> x) {
  const double f = base_->eval_true(x);
  return f + noise_.sample(engine_);
}

}  // namespace poo
