#pragma once

// Scalar mathematics of the tone-dichotomy function
//
//     f(x; g) = |x^g - x|,   x in [0,1], g >= 0,
//
// and its normalized form k * f(x; g) with k = 1 / max f. The function rises on
// [0, d_max] and falls on [d_max, 1]; every quantity here is a function of g
// alone. All scalar math is done in double regardless of the image scalar type.

#include <cstdint>
#include <vector>

namespace dichotome {

/// Which side of d_max a sample sits on. Ascending owns x == d_max.
enum class Branch : std::uint8_t { Ascending = 0, Descending = 1 };

/// Everything derived from gamma: the extremum, its normalization, and the
/// secant slopes / areas of the two monotone regions.
struct DichotomyParams {
  double gamma = 0.0;
  double d_max = 0.0;    ///< argmax of |x^g - x| on [0,1]
  double doc_max = 0.0;  ///< |d_max^g - d_max|
  double k = 0.0;        ///< 1 / doc_max
  double m_plus = 0.0;   ///< doc_max / d_max (+inf when d_max == 0)
  double m_minus = 0.0;  ///< -doc_max / (1 - d_max)
  double r_plus = 0.0;   ///< area under f on [0, d_max]
  double r_minus = 0.0;  ///< area under f on [d_max, 1]
};

struct RegionAreas {
  double r_plus = 0.0;
  double r_minus = 0.0;
};

/// Termination for golden-section inversion. epsilon is measured on the
/// unnormalized output scale |x^g - x|.
struct GoldenSearchConfig {
  double epsilon = 1e-12;
  int max_iters = 200;

  void validate() const;
};

/// Forward table for integer levels l in [0, bit_max]:
/// entries[l] = k * |(l/b)^g - l/b|. Levels <= boundary_index are ascending.
struct DichotomyLut {
  double gamma = 0.0;
  int bit_max = 0;
  int boundary_index = 0;
  std::vector<double> entries;
};

/// x^g on [0,1] with 0^0 = 1.
double gamma_correct(double x, double gamma);

/// |x^g - x|. Defined for every g >= 0 (zero everywhere when g == 1).
double dichotomy_eval(double x, double gamma);

/// The branch-signed form: x^g - x for g <= 1, x - x^g for g > 1.
double signed_dichotomy(double x, double gamma);

/// Closed-form argmax g^(1/(1-g)); 0 for g == 0. Throws DegenerateGamma for g == 1.
double compute_d_max(double gamma);

DichotomyParams compute_params(double gamma);

/// Same quantities as compute_params, but with the region boundary placed at a
/// caller-chosen point instead of the exact d_max. Reproduces tables that were
/// computed from a rounded d_max.
DichotomyParams params_at_boundary(double gamma, double boundary);

/// k * |x^g - x|, in [0,1].
double dichotomy_normalized(double x, const DichotomyParams& params);

/// order-th analytic derivative of signed_dichotomy.
double dichotomy_derivative(double x, double gamma, int order);

/// Forward-difference slope of signed_dichotomy over [x, x + delta].
double numeric_slope(double x, double gamma, double delta);

/// Closed-form areas of |t^g - t| over [0, d] and [d, 1].
RegionAreas region_integrals(double gamma, double d);

Branch branch_of(double x, const DichotomyParams& params);

/// Recovers x on the requested branch from e = |x^g - x| (unnormalized).
double invert_golden(double e, const DichotomyParams& params, Branch branch,
                     const GoldenSearchConfig& cfg = {});

DichotomyLut build_lut(double gamma, int bit_max);

/// Index on `branch` whose entry is nearest to `value`; ties go to the lower index.
int invert_lut(double value, const DichotomyLut& lut, Branch branch);

}  // namespace dichotome
