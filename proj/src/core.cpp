#include "dichotome/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include "dichotome/errors.hpp"

namespace dichotome {
namespace {

void check_gamma(double gamma, const char* where) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    std::ostringstream msg;
    msg << where << ": gamma must be a finite value >= 0, got " << gamma;
    throw DomainError(msg.str());
  }
}

void check_unit(double x, const char* where) {
  if (!(x >= 0.0 && x <= 1.0)) {
    std::ostringstream msg;
    msg << where << ": sample must lie in [0,1], got " << x;
    throw DomainError(msg.str());
  }
}

void check_nondegenerate(double gamma, const char* where) {
  check_gamma(gamma, where);
  if (gamma == 1.0) throw DegenerateGamma(where);
}

// Unchecked power with 0^0 = 1.
double power(double x, double gamma) { return gamma == 0.0 ? 1.0 : std::pow(x, gamma); }

}  // namespace

void GoldenSearchConfig::validate() const {
  if (!(epsilon > 0.0)) throw DomainError("golden search: epsilon must be > 0");
  if (max_iters < 1) throw DomainError("golden search: max_iters must be >= 1");
}

double gamma_correct(double x, double gamma) {
  check_unit(x, "gamma_correct");
  check_gamma(gamma, "gamma_correct");
  return power(x, gamma);
}

double dichotomy_eval(double x, double gamma) {
  return std::abs(gamma_correct(x, gamma) - x);
}

double signed_dichotomy(double x, double gamma) {
  const double p = gamma_correct(x, gamma);
  return gamma <= 1.0 ? p - x : x - p;
}

double compute_d_max(double gamma) {
  check_nondegenerate(gamma, "compute_d_max");
  if (gamma == 0.0) return 0.0;
  // std::pow keeps exact cases exact (0.5 -> 0.5^2 = 0.25).
  return std::pow(gamma, 1.0 / (1.0 - gamma));
}

DichotomyParams params_at_boundary(double gamma, double boundary) {
  check_nondegenerate(gamma, "params_at_boundary");
  check_unit(boundary, "params_at_boundary");

  DichotomyParams p;
  p.gamma = gamma;
  p.d_max = boundary;
  p.doc_max = dichotomy_eval(boundary, gamma);
  if (!(p.doc_max > 0.0)) {
    throw DomainError("params_at_boundary: boundary is a root of the dichotomy function");
  }
  p.k = 1.0 / p.doc_max;
  p.m_plus = boundary > 0.0 ? p.doc_max / boundary : std::numeric_limits<double>::infinity();
  p.m_minus = boundary < 1.0 ? -p.doc_max / (1.0 - boundary)
                             : -std::numeric_limits<double>::infinity();
  const RegionAreas areas = region_integrals(gamma, boundary);
  p.r_plus = areas.r_plus;
  p.r_minus = areas.r_minus;
  return p;
}

DichotomyParams compute_params(double gamma) {
  return params_at_boundary(gamma, compute_d_max(gamma));
}

double dichotomy_normalized(double x, const DichotomyParams& params) {
  return std::min(1.0, params.k * dichotomy_eval(x, params.gamma));
}

double dichotomy_derivative(double x, double gamma, int order) {
  check_nondegenerate(gamma, "dichotomy_derivative");
  check_unit(x, "dichotomy_derivative");
  if (order < 1) throw DomainError("dichotomy_derivative: order must be >= 1");

  // d^k/dx^k x^g = g (g-1) ... (g-k+1) x^(g-k); the linear term only survives k = 1.
  double falling = 1.0;
  for (int i = 0; i < order; ++i) falling *= gamma - i;

  double power_term = 0.0;
  if (falling != 0.0) {
    const double exponent = gamma - order;
    if (x == 0.0 && exponent < 0.0) {
      std::ostringstream msg;
      msg << "dichotomy_derivative: x = 0 with exponent " << exponent;
      throw SingularPoint(msg.str());
    }
    power_term = falling * power(x, exponent);
  }
  const double signed_term = order == 1 ? power_term - 1.0 : power_term;
  return gamma < 1.0 ? signed_term : -signed_term;
}

double numeric_slope(double x, double gamma, double delta) {
  check_gamma(gamma, "numeric_slope");
  if (!(delta > 0.0)) throw DomainError("numeric_slope: delta must be > 0");
  check_unit(x, "numeric_slope");
  check_unit(x + delta, "numeric_slope");
  const double lo = power(x, gamma);
  const double hi = power(x + delta, gamma);
  if (gamma <= 1.0) return (hi - lo - delta) / delta;
  return (lo + delta - hi) / delta;
}

RegionAreas region_integrals(double gamma, double d) {
  check_nondegenerate(gamma, "region_integrals");
  check_unit(d, "region_integrals");
  const double g1 = gamma + 1.0;
  const double dg1 = std::pow(d, g1);
  const double d2 = d * d;
  RegionAreas areas;
  if (gamma < 1.0) {
    areas.r_plus = dg1 / g1 - d2 / 2.0;
    areas.r_minus = (1.0 - dg1) / g1 + (d2 - 1.0) / 2.0;
  } else {
    areas.r_plus = d2 / 2.0 - dg1 / g1;
    areas.r_minus = (1.0 - d2) / 2.0 - (1.0 - dg1) / g1;
  }
  return areas;
}

Branch branch_of(double x, const DichotomyParams& params) {
  return x <= params.d_max ? Branch::Ascending : Branch::Descending;
}

double invert_golden(double e, const DichotomyParams& params, Branch branch,
                     const GoldenSearchConfig& cfg) {
  cfg.validate();
  if (!(e >= 0.0)) throw DomainError("invert_golden: target must be >= 0");
  if (e > params.doc_max) {
    if (e - params.doc_max > cfg.epsilon) {
      std::ostringstream msg;
      msg << "invert_golden: target " << e << " exceeds the branch maximum " << params.doc_max;
      throw BranchMismatch(msg.str());
    }
    e = params.doc_max;
  }

  const double gamma = params.gamma;
  const auto residual = [&](double x) { return std::abs(std::abs(power(x, gamma) - x) - e); };

  double a = branch == Branch::Ascending ? 0.0 : params.d_max;
  double b = branch == Branch::Ascending ? params.d_max : 1.0;
  if (residual(a) < cfg.epsilon) return a;
  if (residual(b) < cfg.epsilon) return b;

  constexpr double phi = std::numbers::phi;
  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    const double mid = 0.5 * (a + b);
    if (residual(mid) < cfg.epsilon) return mid;
    const double c = b - (b - a) / phi;
    const double d = a + (b - a) / phi;
    if (residual(c) < residual(d)) {
      b = d;
    } else {
      a = c;
    }
  }
  std::ostringstream msg;
  msg << "invert_golden: no convergence after " << cfg.max_iters << " iterations (target " << e
      << ", gamma " << gamma << ")";
  throw NoConvergence(msg.str());
}

DichotomyLut build_lut(double gamma, int bit_max) {
  if (bit_max < 1) throw DomainError("build_lut: bit_max must be >= 1");
  const DichotomyParams params = compute_params(gamma);

  DichotomyLut lut;
  lut.gamma = gamma;
  lut.bit_max = bit_max;
  lut.boundary_index =
      std::clamp(static_cast<int>(std::floor(params.d_max * bit_max)), 0, bit_max);
  lut.entries.resize(static_cast<std::size_t>(bit_max) + 1);
  for (int l = 0; l <= bit_max; ++l) {
    const double x = static_cast<double>(l) / bit_max;
    lut.entries[static_cast<std::size_t>(l)] = dichotomy_normalized(x, params);
  }
  return lut;
}

int invert_lut(double value, const DichotomyLut& lut, Branch branch) {
  const auto& t = lut.entries;
  int lo = 0;
  int hi = lut.boundary_index;  // inclusive
  if (branch == Branch::Descending) {
    lo = lut.boundary_index + 1;
    hi = lut.bit_max;
    // Degenerate split (d_max * b == b): the descending side is just the last level.
    if (lo > hi) lo = hi;
  }

  // First index in [lo, hi] whose entry is on the far side of `value` along the
  // branch's monotone direction; the answer is that index or its predecessor.
  const bool ascending = branch == Branch::Ascending;
  int first = lo;
  int last = hi + 1;
  while (first < last) {
    const int m = first + (last - first) / 2;
    const double v = t[static_cast<std::size_t>(m)];
    const bool before = ascending ? v < value : v > value;
    if (before) {
      first = m + 1;
    } else {
      last = m;
    }
  }

  int best = std::clamp(first, lo, hi);
  if (first > lo) {
    const int prev = first - 1;
    const double d_prev = std::abs(t[static_cast<std::size_t>(prev)] - value);
    const double d_best = std::abs(t[static_cast<std::size_t>(best)] - value);
    if (first > hi || d_prev <= d_best) best = prev;
  }
  return best;
}

}  // namespace dichotome
