#pragma once

#include <string>
#include <vector>

#include "rv/stats.hpp"

namespace rv::audit {

struct CoefAuditConfig {
  double level = 0.95;
  // Cutoff on |est| * sd_x / sd_y below which a significant effect is flagged.
  double practical_threshold = 0.05;
  // Practical band half-width in units of sd_y; 0 disables UNDERPOWERED.
  double practical_delta = 0.0;
};

struct CoefAuditRow {
  std::string name;
  double est = 0.0;
  double left = 0.0;
  double right = 0.0;
  double p_adj = 1.0;
  double p_unadjusted = 1.0;
  double standardized_effect = 0.0;
  bool small_effect = false;
  bool underpowered = false;

  bool operator==(const CoefAuditRow&) const = default;
};

// Bonferroni-adjusted intervals and p-values over all fit.p coefficient rows,
// plus the SMALL_EFFECT / UNDERPOWERED flags.
std::vector<CoefAuditRow> coef_audit(const stats::OlsFit& fit, const CoefAuditConfig& config = {});

// Fixed-width `est. left right p-val warning` layout. "X" marks SMALL_EFFECT.
std::string render_audit_table(const std::vector<CoefAuditRow>& rows);

}  // namespace rv::audit
