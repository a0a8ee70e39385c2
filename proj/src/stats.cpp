#include <algorithm>
#include <cmath>
#include <limits>

#include "rv/stats.hpp"

namespace rv::stats {

namespace {

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::fabs(sum_) >= std::fabs(v)) comp_ += (sum_ - t) + v;
    else comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double median_of(std::vector<double> xs) {
  const std::size_t n = xs.size();
  const auto mid = xs.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(xs.begin(), mid, xs.end());
  if (n % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(xs.begin(), mid);
  return lower + (upper - lower) / 2.0;
}

}  // namespace

Moments mean_sd(const MaskedVector& v) {
  CompensatedSum sum;
  std::size_t n = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v.is_missing(i)) continue;
    sum.add(v.values[i]);
    ++n;
  }
  if (n == 0) throw StatsError("mean/sd: all values are missing");
  Moments m;
  m.n = n;
  m.mean = sum.value() / static_cast<double>(n);
  if (n < 2) {
    m.sd = std::numeric_limits<double>::quiet_NaN();
    return m;
  }
  CompensatedSum ss;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v.is_missing(i)) continue;
    const double d = v.values[i] - m.mean;
    ss.add(d * d);
  }
  m.sd = std::sqrt(ss.value() / static_cast<double>(n - 1));
  return m;
}

double median(const MaskedVector& v) {
  auto xs = v.present();
  if (xs.empty()) throw StatsError("median: all values are missing");
  return median_of(std::move(xs));
}

CiResult welch_ci(const MaskedVector& x, const MaskedVector& y, double level, long k,
                  std::string label) {
  if (!(level > 0.0 && level < 1.0)) throw StatsError("confidence level must lie in (0, 1)");
  if (k < 1) throw StatsError("number of comparisons must be at least 1");
  if (x.count_present() < 2 || y.count_present() < 2)
    throw StatsError("each group needs at least two non-missing values");
  const Moments mx = mean_sd(x);
  const Moments my = mean_sd(y);
  const double vx = mx.sd * mx.sd / static_cast<double>(mx.n);
  const double vy = my.sd * my.sd / static_cast<double>(my.n);
  const double var = vx + vy;
  if (!(var > 0.0)) throw StatsError("both groups have zero variance");
  const double df = var * var / (vx * vx / static_cast<double>(mx.n - 1) +
                                 vy * vy / static_cast<double>(my.n - 1));
  const double alpha = (1.0 - level) / static_cast<double>(k);
  const double se = std::sqrt(var);
  const double half = t_quantile(1.0 - alpha / 2.0, df) * se;

  CiResult ci;
  ci.label = std::move(label);
  ci.estimate = mx.mean - my.mean;
  ci.lower = ci.estimate - half;
  ci.upper = ci.estimate + half;
  ci.level_nominal = level;
  ci.k_comparisons = k;
  ci.n1 = mx.n;
  ci.n2 = my.n;
  ci.df = df;
  ci.se = se;
  return ci;
}

RangeTable column_ranges(const Table& t) {
  RangeTable out;
  out.table = t.name();
  for (const Column& c : t.columns()) {
    bool any = false;
    ColumnRange r{c.name, 0.0, 0.0};
    for (std::size_t i = 0; i < c.data.size(); ++i) {
      if (c.data.is_missing(i)) continue;
      const double v = c.data.values[i];
      if (!any) {
        r.min = r.max = v;
        any = true;
      } else {
        r.min = std::min(r.min, v);
        r.max = std::max(r.max, v);
      }
    }
    if (!any) throw StatsError("column '" + c.name + "' has no non-missing values");
    out.ranges.push_back(std::move(r));
  }
  return out;
}

MaskedVector mad_outlier_scores(const MaskedVector& v) {
  auto xs = v.present();
  if (xs.size() < 3) throw StatsError("outlier scores need at least three non-missing values");
  const double med = median_of(xs);
  for (double& x : xs) x = std::fabs(x - med);
  const double mad = median_of(std::move(xs));
  if (!(mad > 0.0)) throw StatsError("zero spread");
  MaskedVector out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v.is_missing(i)) out.push_missing();
    else out.push_back(std::fabs(v.values[i] - med) / (kMadScale * mad));
  }
  return out;
}

}  // namespace rv::stats
