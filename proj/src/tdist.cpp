#include <algorithm>
#include <cmath>
#include <numbers>

#include "rv/stats.hpp"

namespace rv::stats {

namespace {

// Stirling tail of log Gamma(z): log Gamma(z) - [(z - 1/2) log z - z + log(2 pi)/2].
double stirling_tail(double z) {
  const double z2 = z * z;
  return (1.0 / 12.0 - (1.0 / 360.0 - (1.0 / 1260.0 - 1.0 / (1680.0 * z2)) / z2) / z2) / z;
}

// log B(a, b). When the larger argument is big, lgamma(big) - lgamma(big + small)
// cancels catastrophically, so that difference is taken from the Stirling
// expansion directly.
double log_beta(double a, double b) {
  const double big = std::max(a, b);
  const double small = std::min(a, b);
  if (big < 10.0) return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  const double sum = big + small;
  const double diff = -(big - 0.5) * std::log1p(small / big) - small * std::log(sum) + small +
                      stirling_tail(big) - stirling_tail(sum);
  return std::lgamma(small) + diff;
}

// Continued fraction for I_x(a, b) (modified Lentz).
double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 200000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw StatsError("incomplete beta: continued fraction did not converge");
}

// I_x(a, b) with xc == 1 - x supplied separately so neither side loses digits.
double incomplete_beta_split(double a, double b, double x, double xc) {
  if (x <= 0.0) return 0.0;
  if (xc <= 0.0) return 1.0;
  const double log_x = x < 0.5 ? std::log(x) : std::log1p(-xc);
  const double log_xc = xc < 0.5 ? std::log(xc) : std::log1p(-x);
  const double front = std::exp(a * log_x + b * log_xc - log_beta(a, b));
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
  return 1.0 - front * beta_cf(b, a, xc) / b;
}

// P(T > t) for t >= 0.
double upper_tail(double t, double df) {
  if (t == 0.0) return 0.5;
  const double t2 = t * t;
  if (!std::isfinite(t2)) return 0.0;
  const double x = df / (df + t2);
  const double xc = t2 / (df + t2);
  return 0.5 * incomplete_beta_split(df / 2.0, 0.5, x, xc);
}

double t_pdf(double t, double df) {
  return std::exp(-0.5 * std::log(df) - log_beta(df / 2.0, 0.5) -
                  (df + 1.0) / 2.0 * std::log1p(t * t / df));
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw StatsError("incomplete beta: shape parameters must be positive");
  if (!(x >= 0.0 && x <= 1.0)) throw StatsError("incomplete beta: x outside [0, 1]");
  return incomplete_beta_split(a, b, x, 1.0 - x);
}

double t_cdf(double x, double df) {
  if (!(df > 0.0)) throw StatsError("t distribution: degrees of freedom must be positive");
  if (std::isnan(x)) throw StatsError("t distribution: NaN argument");
  const double tail = upper_tail(std::fabs(x), df);
  return x < 0.0 ? tail : 1.0 - tail;
}

double t_quantile(double p, double df) {
  if (!(df > 0.0)) throw StatsError("t distribution: degrees of freedom must be positive");
  if (!(p > 0.0 && p < 1.0)) throw StatsError("t quantile: probability must lie in (0, 1)");
  if (p == 0.5) return 0.0;
  // Solve P(T > t) = tail for t >= 0, then restore the sign.
  const double tail = p < 0.5 ? p : 1.0 - p;
  double lo = 0.0;
  double hi = 1.0;
  while (upper_tail(hi, df) > tail) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw StatsError("t quantile: bracket overflow");
  }
  double t = 0.5 * (lo + hi);
  for (int iter = 0; iter < 400; ++iter) {
    const double f = upper_tail(t, df) - tail;
    if (f == 0.0) break;
    if (f > 0.0) lo = t;
    else hi = t;
    const double dens = t_pdf(t, df);
    double next = dens > 0.0 ? t + f / dens : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::fabs(next - t) <= 1e-15 * std::max(1.0, std::fabs(t)) || hi - lo <= 1e-15 * hi) {
      t = next;
      break;
    }
    t = next;
  }
  return p < 0.5 ? -t : t;
}

}  // namespace rv::stats
