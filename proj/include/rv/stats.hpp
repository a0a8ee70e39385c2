#pragma once

// Numerics kernel: missing-aware moments, Student-t distribution, Welch
// intervals with Bonferroni adjustment, OLS, ranges and robust outlier scores.
// Everything here is a pure function of its arguments.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "rv/error.hpp"
#include "rv/table.hpp"

namespace rv::stats {

struct Moments {
  double mean = 0.0;
  double sd = 0.0;  // sample sd (n - 1); NaN when n == 1
  std::size_t n = 0;
  bool operator==(const Moments&) const = default;
};

// Throws StatsError when every cell is missing.
Moments mean_sd(const MaskedVector& v);

// Median of the non-missing cells. Throws StatsError when there are none.
double median(const MaskedVector& v);

// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

// P(T_df <= x). Throws StatsError for df <= 0 or NaN input.
double t_cdf(double x, double df);

// Inverse of t_cdf. Throws StatsError unless 0 < p < 1 and df > 0.
double t_quantile(double p, double df);

struct CiResult {
  std::string label;
  double estimate = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double level_nominal = 0.95;
  long k_comparisons = 1;  // 1 = unadjusted
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  double df = 0.0;
  double se = 0.0;

  double half_width() const noexcept { return (upper - lower) / 2.0; }
  bool operator==(const CiResult&) const = default;
};

// Welch interval for mean(x) - mean(y). With k > 1 the per-interval level is
// 1 - (1 - level) / k. Throws StatsError when a group has fewer than two
// non-missing values or both groups have zero variance.
CiResult welch_ci(const MaskedVector& x, const MaskedVector& y, double level, long k = 1,
                  std::string label = {});

struct OlsFit {
  std::vector<std::string> coef_names;
  std::vector<double> est;
  std::vector<double> se;
  double df_resid = 0.0;
  std::size_t n = 0;        // rows used
  std::size_t p = 0;        // coefficients incl. intercept
  std::size_t dropped = 0;  // rows removed by complete-case filtering
  std::vector<double> sd_x; // 0 for the intercept
  double sd_y = 0.0;
  double sigma = 0.0;       // residual standard error
  std::vector<double> t_stats;
  std::vector<double> p_values;  // unadjusted, two-sided

  bool operator==(const OlsFit&) const = default;
};

struct Predictor {
  std::string name;
  MaskedVector values;
};

// Complete-case least squares. Throws StatsError on rank deficiency (naming
// the first collinear column) and when n <= p.
OlsFit ols_fit(const MaskedVector& y, std::span<const Predictor> predictors, bool intercept = true);

struct ColumnRange {
  std::string column;
  double min = 0.0;
  double max = 0.0;
  bool operator==(const ColumnRange&) const = default;
};

struct RangeTable {
  std::string table;
  std::vector<ColumnRange> ranges;
  bool operator==(const RangeTable&) const = default;
};

// Throws StatsError naming the first all-missing column.
RangeTable column_ranges(const Table& t);

inline constexpr double kMadScale = 1.4826;

// |v_i - median| / (1.4826 * MAD); missing cells stay missing. Throws
// StatsError with fewer than three values or when MAD is zero ("zero spread").
MaskedVector mad_outlier_scores(const MaskedVector& v);

}  // namespace rv::stats
