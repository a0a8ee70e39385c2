#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "rv/coef_audit.hpp"
#include "rv/engine.hpp"

namespace rv::audit {

enum class AdvisoryCode {
  W1_SMALL_EFFECT,
  W2_UNDERPOWERED,
  W3_MULTIPLE_INFERENCE,
  W4_OUTLIERS,
  W5_OVERFIT,
};

std::string_view to_string(AdvisoryCode code);

struct Advisory {
  AdvisoryCode code;
  std::string message;
  std::size_t line = 0;
  std::string subject;

  bool operator==(const Advisory&) const = default;
};

struct AuditConfig {
  std::size_t w3_min = 2;
  double w4_cutoff = 3.5;
  double w5_min_ratio = 10.0;
  // Forwarded to coef_audit for W1/W2 over every fitted model.
  double level = 0.95;
  double practical_threshold = 0.05;
  double practical_delta = 0.0;
};

// Advisories for a session that has finished a run. Ordered W1/W2 (by model),
// W3, W4 (by table, then column), W5 (by model).
std::vector<Advisory> audit_session(const engine::SessionState& s, const AuditConfig& config = {});

// `WARN <code>: <message> (line <n>)`
std::string render_advisory(const Advisory& a);
std::string render_advisories(const std::vector<Advisory>& advisories);

}  // namespace rv::audit
