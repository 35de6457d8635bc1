#include "poo/analysis.hpp"

#include <cmath>

#include "poo/error.hpp"

namespace poo {

namespace {

void guard_enumeration(const StandardPartitioning& part, unsigned h_max) {
  std::uint64_t cells = 1;
  for (unsigned h = 0; h < h_max; ++h) {
    cells *= part.arity();
    if (cells > kMaxEnumeratedCells) {
      throw Error(ErrorKind::resource, "K^h_max exceeds the enumeration guard of 2^22 cells");
    }
  }
}

double threshold(const Objective& obj, double nu, double rho, unsigned h) {
  return obj.f_star() - 2.0 * nu * std::pow(rho, static_cast<double>(h));
}

}  // namespace

std::vector<std::uint64_t> near_optimal_counts(const Objective& obj, const StandardPartitioning& part, double nu,
                                               double rho, unsigned h_max, CountMode mode, int resolution) {
  guard_enumeration(part, h_max);
  std::vector<std::uint64_t> counts(h_max + 1, 0);

  if (mode == CountMode::exhaustive) {
    for (unsigned h = 0; h <= h_max; ++h) {
      const double eps_level = threshold(obj, nu, rho, h);
      const std::uint64_t cells = part.cells_at_depth(h);
      for (std::uint64_t i = 0; i < cells; ++i) {
        if (sup_on_cell(obj, part.region({h, i}), resolution) >= eps_level) ++counts[h];
      }
    }
    return counts;
  }

  std::vector<Box> level{part.domain()};
  std::vector<Box> next;
  for (unsigned h = 0; h <= h_max; ++h) {
    const double eps_level = threshold(obj, nu, rho, h);
    next.clear();
    for (Box& cell : level) {
      if (sup_on_cell(obj, cell, resolution) >= eps_level) next.push_back(std::move(cell));
    }
    counts[h] = next.size();
    if (h == h_max) break;
    level.clear();
    for (const Box& cell : next) {
      for (Box& child : part.split(cell, h)) level.push_back(std::move(child));
    }
  }
  return counts;
}

DimFit fit_dimension(std::span<const std::uint64_t> counts, double rho, unsigned h_min) {
  if (!(rho > 0.0 && rho < 1.0)) throw Error(ErrorKind::config, "dimension fit needs rho in (0, 1)");
  const double scale = std::log(1.0 / rho);
  std::vector<double> xs, ys;
  for (std::size_t h = h_min; h < counts.size(); ++h) {
    if (counts[h] == 0) continue;
    xs.push_back(static_cast<double>(h) * scale);
    ys.push_back(std::log(static_cast<double>(counts[h])));
  }
  if (xs.size() < 4) throw Error(ErrorKind::fit, "dimension fit needs at least 4 depths with N_h >= 1");

  const double m = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }

  DimFit fit;
  fit.d = sxy / sxx;
  fit.ln_c = my - fit.d * mx;
  if (fit.d < 0.0) {
    fit.d = 0.0;
    fit.ln_c = my;
    fit.clamped = true;
  }
  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.ln_c + fit.d * xs[i]);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / m);
  return fit;
}

Assumption1Result check_assumption1(const Objective& obj, const StandardPartitioning& part, double nu, double rho,
                                    unsigned h_max, int resolution) {
  if (!obj.maximizer()) throw Error(ErrorKind::capability, "objective '" + obj.name() + "' declares no maximizer");
  const Point& x_star = *obj.maximizer();
  Assumption1Result result;
  result.h_max = h_max;
  Box cell = part.domain();
  for (unsigned h = 0; h <= h_max; ++h) {
    const double slack = nu * std::pow(rho, static_cast<double>(h));
    // Relative tolerance: several built-ins meet the bound with equality.
    const double bound = obj.f_star() - slack - 1e-12 * (slack + std::abs(obj.f_star()));
    if (!(inf_on_cell(obj, cell, resolution) >= bound)) {
      result.passed = false;
      result.first_fail_depth = h;
      return result;
    }
    if (h < h_max) cell = part.split_child(cell, h, part.child_containing(cell, h, x_star));
  }
  return result;
}

DimReport estimate_dimension(const Objective& obj, const StandardPartitioning& part, double nu, double rho,
                             unsigned h_max, unsigned h_min, CountMode mode) {
  DimReport report;
  report.nu = nu;
  report.rho = rho;
  report.h_min = h_min;
  report.h_max = h_max;
  report.counts = near_optimal_counts(obj, part, nu, rho, h_max, mode);
  report.fit = fit_dimension(report.counts, rho, h_min);
  report.assumption = check_assumption1(obj, part, nu, rho, h_max);
  return report;
}

double simple_regret(const Objective& obj, std::span<const double> x) { return obj.f_star() - obj.eval_true(x); }

double expected_simple_regret(const Objective& obj, const HooInstance& inst) {
  if (inst.time() == 0) throw Error(ErrorKind::not_ready, "expected regret needs at least one evaluation");
  double total = 0.0;
  for (const Evaluation& e : inst.log()) total += obj.eval_true(e.point);
  return obj.f_star() - total / static_cast<double>(inst.time());
}

}  // namespace poo
