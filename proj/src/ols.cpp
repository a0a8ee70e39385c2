#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "rv/stats.hpp"

namespace rv::stats {

OlsFit ols_fit(const MaskedVector& y, std::span<const Predictor> predictors, bool intercept) {
  const std::size_t rows = y.size();
  for (const Predictor& pr : predictors)
    if (pr.values.size() != rows)
      throw StatsError("predictor '" + pr.name + "' length differs from the response");

  std::vector<std::size_t> used;
  used.reserve(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    bool complete = !y.is_missing(i);
    for (const Predictor& pr : predictors) complete = complete && !pr.values.is_missing(i);
    if (complete) used.push_back(i);
  }

  const std::size_t n = used.size();
  const std::size_t p = predictors.size() + (intercept ? 1 : 0);
  if (p == 0) throw StatsError("model has no coefficients");
  if (n <= p)
    throw StatsError("need more complete rows than coefficients (n = " + std::to_string(n) +
                     ", p = " + std::to_string(p) + ")");

  OlsFit fit;
  fit.n = n;
  fit.p = p;
  fit.dropped = rows - n;
  fit.df_resid = static_cast<double>(n - p);

  Eigen::MatrixXd X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  Eigen::VectorXd Y(static_cast<Eigen::Index>(n));
  MaskedVector y_used;
  for (std::size_t r = 0; r < n; ++r) {
    Y(static_cast<Eigen::Index>(r)) = y.values[used[r]];
    y_used.push_back(y.values[used[r]]);
  }
  Eigen::Index col = 0;
  if (intercept) {
    X.col(col++).setOnes();
    fit.coef_names.emplace_back("(Intercept)");
    fit.sd_x.push_back(0.0);
  }
  for (const Predictor& pr : predictors) {
    MaskedVector x_used;
    for (std::size_t r = 0; r < n; ++r) {
      X(static_cast<Eigen::Index>(r), col) = pr.values.values[used[r]];
      x_used.push_back(pr.values.values[used[r]]);
    }
    ++col;
    fit.coef_names.push_back(pr.name);
    fit.sd_x.push_back(mean_sd(x_used).sd);
  }
  fit.sd_y = mean_sd(y_used).sd;

  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
  const Eigen::MatrixXd R = qr.matrixQR().topRows(static_cast<Eigen::Index>(p)).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(p); ++j) {
    const double scale = X.col(j).norm();
    if (!(std::fabs(R(j, j)) > 1e-10 * scale))
      throw StatsError("design matrix is rank deficient: column '" +
                       fit.coef_names[static_cast<std::size_t>(j)] +
                       "' is collinear with earlier columns");
  }

  const Eigen::VectorXd beta = qr.solve(Y);
  const Eigen::VectorXd resid = Y - X * beta;
  const double rss = resid.squaredNorm();
  const double sigma2 = rss / fit.df_resid;
  fit.sigma = std::sqrt(sigma2);

  const Eigen::MatrixXd Rinv =
      R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(R.rows(), R.cols()));
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(p); ++j) {
    const double est = beta(j);
    const double se = std::sqrt(sigma2 * Rinv.row(j).squaredNorm());
    double t = 0.0;
    double pv = 1.0;
    if (se > 0.0) {
      t = est / se;
      pv = 2.0 * t_cdf(-std::fabs(t), fit.df_resid);
    } else if (est != 0.0) {
      t = std::copysign(std::numeric_limits<double>::infinity(), est);
      pv = 0.0;
    }
    fit.est.push_back(est);
    fit.se.push_back(se);
    fit.t_stats.push_back(t);
    fit.p_values.push_back(std::min(1.0, pv));
  }
  return fit;
}

}  // namespace rv::stats
