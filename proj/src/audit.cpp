#include "rv/audit.hpp"

#include <algorithm>
#include <cmath>

#include "rv/render.hpp"

namespace rv::audit {

std::vector<CoefAuditRow> coef_audit(const stats::OlsFit& fit, const CoefAuditConfig& config) {
  if (fit.p == 0 || fit.est.size() != fit.p || fit.se.size() != fit.p || fit.p_values.size() != fit.p)
    throw StatsError("coef_audit: malformed fit");
  if (!(config.level > 0.0 && config.level < 1.0))
    throw StatsError("coef_audit: level must lie in (0, 1)");

  const double k = static_cast<double>(fit.p);
  const double alpha = 1.0 - config.level;
  const double crit = stats::t_quantile(1.0 - alpha / (2.0 * k), fit.df_resid);
  const double delta = config.practical_delta * fit.sd_y;

  std::vector<CoefAuditRow> rows;
  rows.reserve(fit.p);
  for (std::size_t j = 0; j < fit.p; ++j) {
    CoefAuditRow row;
    row.name = j < fit.coef_names.size() ? fit.coef_names[j] : std::to_string(j + 1);
    row.est = fit.est[j];
    const double half = crit * fit.se[j];
    row.left = row.est - half;
    row.right = row.est + half;
    row.p_unadjusted = fit.p_values[j];
    row.p_adj = std::min(1.0, k * fit.p_values[j]);

    const double sd_x = j < fit.sd_x.size() ? fit.sd_x[j] : 0.0;
    const bool is_intercept = sd_x == 0.0;
    row.standardized_effect = fit.sd_y > 0.0 ? std::fabs(row.est) * sd_x / fit.sd_y : 0.0;

    if (row.p_adj < alpha) {
      row.small_effect = !is_intercept && row.standardized_effect < config.practical_threshold;
    } else if (delta > 0.0) {
      row.underpowered = row.left < -delta && row.right > delta;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string render_audit_table(const std::vector<CoefAuditRow>& rows) {
  std::vector<std::vector<std::string>> cells{{"", "est.", "left", "right", "p-val", "warning"}};
  for (const CoefAuditRow& r : rows) {
    cells.push_back({r.name, render::sig(r.est, 10), render::sig(r.left, 9), render::sig(r.right, 9),
                     render::sig(r.p_adj, 8), r.small_effect ? "X" : ""});
  }
  return render::align(cells);
}

std::string_view to_string(AdvisoryCode code) {
  switch (code) {
    case AdvisoryCode::W1_SMALL_EFFECT: return "W1_SMALL_EFFECT";
    case AdvisoryCode::W2_UNDERPOWERED: return "W2_UNDERPOWERED";
    case AdvisoryCode::W3_MULTIPLE_INFERENCE: return "W3_MULTIPLE_INFERENCE";
    case AdvisoryCode::W4_OUTLIERS: return "W4_OUTLIERS";
    case AdvisoryCode::W5_OVERFIT: return "W5_OVERFIT";
  }
  return "?";
}

std::string render_advisory(const Advisory& a) {
  return "WARN " + std::string(to_string(a.code)) + ": " + a.message + " (line " +
         std::to_string(a.line) + ")";
}

std::string render_advisories(const std::vector<Advisory>& advisories) {
  std::string out;
  for (const Advisory& a : advisories) out += render_advisory(a) + "\n";
  return out;
}

std::vector<Advisory> audit_session(const engine::SessionState& s, const AuditConfig& config) {
  std::vector<Advisory> out;
  auto line_of = [&](const std::string& name) -> std::size_t {
    const auto it = s.defined_at.find(name);
    return it == s.defined_at.end() ? 0 : it->second;
  };

  const CoefAuditConfig coef_cfg{config.level, config.practical_threshold, config.practical_delta};
  for (const auto& [name, value] : s.env) {
    const auto* fit = std::get_if<stats::OlsFit>(&value);
    if (fit == nullptr) continue;
    for (const CoefAuditRow& row : coef_audit(*fit, coef_cfg)) {
      if (row.small_effect) {
        out.push_back({AdvisoryCode::W1_SMALL_EFFECT,
                       "coefficient '" + row.name + "' of model '" + name +
                           "' is statistically significant (adjusted p = " + render::sig(row.p_adj, 4) +
                           ") but its standardized effect " + render::sig(row.standardized_effect, 4) +
                           " is below the practical-importance cutoff " +
                           render::sig(config.practical_threshold) + "; check whether it matters at domain scale",
                       line_of(name), name + "." + row.name});
      }
      if (row.underpowered) {
        out.push_back({AdvisoryCode::W2_UNDERPOWERED,
                       "coefficient '" + row.name + "' of model '" + name + "' is not significant, but its interval [" +
                           render::sig(row.left, 4) + ", " + render::sig(row.right, 4) +
                           "] spans both large negative and large positive effects; the sample is too small to "
                           "support a no-effect conclusion",
                       line_of(name), name + "." + row.name});
      }
    }
  }

  if (s.inference_count >= config.w3_min && !s.correction_used) {
    const std::size_t line = s.inference_lines.empty() ? 0 : s.inference_lines.back();
    out.push_back({AdvisoryCode::W3_MULTIPLE_INFERENCE,
                   std::to_string(s.inference_count) +
                       " confidence intervals were formed without a multiple inference correction; "
                       "consider Bonferroni intervals (ci_bonf with k = " +
                       std::to_string(s.inference_count) + ") to avoid accidental findings",
                   line, std::to_string(s.inference_count) + " intervals"});
  }

  for (const auto& [name, value] : s.env) {
    const auto* table = std::get_if<Table>(&value);
    if (table == nullptr) continue;
    for (const Column& col : table->columns()) {
      if (col.data.count_present() < 3) continue;
      MaskedVector scores;
      try {
        scores = stats::mad_outlier_scores(col.data);
      } catch (const StatsError&) {
        continue;
      }
      double worst = 0.0;
      std::size_t flagged = 0;
      for (std::size_t i = 0; i < scores.size(); ++i) {
        if (scores.is_missing(i)) continue;
        worst = std::max(worst, scores.values[i]);
        if (scores.values[i] > config.w4_cutoff) ++flagged;
      }
      if (worst > config.w4_cutoff) {
        out.push_back({AdvisoryCode::W4_OUTLIERS,
                       "column " + name + "." + col.name + " has " + std::to_string(flagged) +
                           " value(s) with robust z-score above " + render::sig(config.w4_cutoff) +
                           " (max " + render::sig(worst, 4) +
                           "); these may be highly influential, consider a robust method, e.g. quantile regression",
                       line_of(name), name + "." + col.name});
      }
    }
  }

  for (const auto& [name, value] : s.env) {
    const auto* fit = std::get_if<stats::OlsFit>(&value);
    if (fit == nullptr) continue;
    const double ratio = static_cast<double>(fit->n) / static_cast<double>(fit->p);
    if (ratio < config.w5_min_ratio) {
      out.push_back({AdvisoryCode::W5_OVERFIT,
                     "model '" + name + "' fits " + std::to_string(fit->p) + " coefficients to " +
                         std::to_string(fit->n) + " rows (n/p = " + render::sig(ratio, 4) + " < " +
                         render::sig(config.w5_min_ratio) + "); possible overfitting",
                     line_of(name), name});
    }
  }
  return out;
}

}  // namespace rv::audit
