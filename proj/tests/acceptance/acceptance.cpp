// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Oracles live in ../oracles.hpp and never call the
// library's numerics.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "rv/audit.hpp"
#include "rv/branch_store.hpp"
#include "rv/engine.hpp"
#include "script_gen.hpp"

using namespace rv;
using rv::testing::TempDir;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string name;
  double budget_s;  // 0 = no runtime bound
  std::function<Outcome()> check;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

engine::SessionState run_text(const std::string& text, const fs::path& dir) {
  return engine::continue_run(engine::new_session(dsl::parse_script(text), dir));
}

std::string pima_text() { return rv::testing::read_file(rv::testing::data_dir() / "pima.rvl"); }

const char* kVars[] = {"NPreg", "Gluc", "BP", "Thick", "Insul", "BMI", "Genet", "Age"};

Outcome coef_audit_reproduction() {
  stats::OlsFit f;
  f.coef_names = {"1", "2", "3"};
  f.est = {3.4725821093, 0.0033891042, 0.0002862087};
  f.se = {0.0482655, 0.0011860, 0.0318670};
  f.df_resid = 940;
  f.p = 3;
  f.n = 943;
  f.sd_x = {0.0, 10.0, 0.5};
  f.sd_y = 1.0;
  for (std::size_t j = 0; j < 3; ++j) {
    f.t_stats.push_back(f.est[j] / f.se[j]);
    f.p_values.push_back(2.0 * (1.0 - stats::t_cdf(std::abs(f.t_stats[j]), f.df_resid)));
  }
  const auto rows = audit::coef_audit(f);
  const double left[] = {3.357035467, 0.000549889, -0.076002838};
  const double right[] = {3.588128752, 0.006228319, 0.076575255};
  const double padj[] = {0.0, 0.01280424, 1.0};
  double worst = 0;
  for (int j = 0; j < 3; ++j) {
    worst = std::max({worst, std::abs(rows[j].left - left[j]), std::abs(rows[j].right - right[j]),
                      std::abs(rows[j].p_adj - padj[j])});
  }
  return {rows.size() == 3 && worst <= 5e-4, "max abs deviation " + num(worst) + " (tolerance 5e-4)"};
}

Outcome bonferroni_widening() {
  const std::string text = pima_text();
  const auto plain = run_text(text, rv::testing::data_dir());
  engine::SessionState s = engine::new_session(dsl::parse_script(text), rv::testing::data_dir());
  for (int i = 0; i < 8; ++i)
    s = engine::edit_line(s, 5 + i,
                          std::string("ci_bonf diff_means(pima.") + kVars[i] + " by pima.Diab) level 0.95 k 8");
  const auto bonf = engine::continue_run(s);
  if (plain.intervals.size() != 8 || bonf.intervals.size() != 8) return {false, "expected 8 intervals"};
  double worst = 0;
  bool wider = true;
  for (int i = 0; i < 8; ++i) {
    const auto& a = plain.intervals[i].ci;
    const auto& b = bonf.intervals[i].ci;
    const double want = stats::t_quantile(1 - 0.05 / 16, a.df) / stats::t_quantile(0.975, a.df);
    worst = std::max(worst, std::abs(b.half_width() / a.half_width() - want));
    wider = wider && b.half_width() > a.half_width();
  }
  return {wider && worst <= 1e-9, "8/8 wider=" + std::string(wider ? "yes" : "no") + ", max ratio error " + num(worst)};
}

Outcome pima_cleaning() {
  const fs::path dir = rv::testing::data_dir();
  const std::string head = "load pima = csv(\"pima.csv\")\n";
  const auto before = run_text(head + "print ranges(pima)\n", dir);
  const auto& raw = std::get<Table>(before.env.at("pima"));
  const auto r0 = stats::column_ranges(raw);
  std::string clean = head;
  for (const char* c : {"Gluc", "BP", "Thick", "Insul", "BMI"}) clean += std::string("set_missing pima.") + c + " where == 0\n";
  clean += "print ranges(pima)\n";
  const auto after = run_text(clean, dir);
  const auto& cleaned = std::get<Table>(after.env.at("pima"));
  const auto r1 = stats::column_ranges(cleaned);

  bool ok = true;
  std::ostringstream detail;
  for (const char* c : {"Gluc", "BP", "Thick", "Insul", "BMI"}) {
    double min0 = -1, min1 = -1;
    for (const auto& cr : r0.ranges)
      if (cr.column == c) min0 = cr.min;
    for (const auto& cr : r1.ranges)
      if (cr.column == c) min1 = cr.min;
    std::size_t zeros = 0;
    for (double v : raw.find(c)->data.values) zeros += v == 0.0;
    const std::size_t miss = cleaned.find(c)->data.count_missing();
    ok = ok && min0 == 0.0 && min1 > 0.0 && miss == zeros && raw.find(c)->data.count_missing() == 0;
    detail << c << " " << zeros << "->NA min " << min1 << "; ";
  }
  return {ok, detail.str()};
}

Outcome numerics_oracles() {
  double t_worst = 0;
  for (double df : {1.0, 2.0, 5.0, 30.0, 940.0})
    for (int i = -16; i <= 16; ++i) {
      const double x = i * 0.5;
      t_worst = std::max(t_worst, std::abs(stats::t_cdf(x, df) - static_cast<double>(oracle::t_cdf(x, df))));
    }

  std::mt19937_64 rng(20240917);
  std::normal_distribution<double> z(0, 1);
  double ols_worst = 0;
  for (int t = 0; t < 20; ++t) {
    const int p = 1 + static_cast<int>(testgen::pick(rng, 3));
    const int n = p + 4 + static_cast<int>(testgen::pick(rng, 46 - p));
    std::vector<std::vector<double>> cols(p, std::vector<double>(n));
    std::vector<double> y(n);
    for (auto& c : cols) {
      const double scale = std::exp(z(rng));
      for (auto& v : c) v = scale * z(rng) + z(rng);
    }
    for (int i = 0; i < n; ++i) {
      y[i] = 0.5;
      for (int j = 0; j < p; ++j) y[i] += (j + 1) * cols[j][i];
      y[i] += z(rng);
    }
    std::vector<stats::Predictor> preds;
    for (int j = 0; j < p; ++j) preds.push_back({"x" + std::to_string(j), MaskedVector(cols[j])});
    const auto fit = stats::ols_fit(MaskedVector(y), preds);
    const auto ref = oracle::ols_normal_equations(y, cols, true);
    for (std::size_t j = 0; j < fit.p; ++j) {
      const double e = static_cast<double>(ref.est[j]);
      ols_worst = std::max(ols_worst, std::abs(fit.est[j] - e) / std::max(std::abs(e), 1e-300));
    }
  }

  double welch_worst = 0;
  for (int t = 0; t < 20; ++t) {
    std::vector<double> x(4 + testgen::pick(rng, 40)), y(4 + testgen::pick(rng, 40));
    const double sx = std::exp(z(rng)), sy = std::exp(z(rng));
    for (auto& v : x) v = 1 + sx * z(rng);
    for (auto& v : y) v = sy * z(rng);
    const auto ci = stats::welch_ci(MaskedVector(x), MaskedVector(y), 0.95, 1);
    const auto ref = oracle::welch(x, y, 0.95);
    welch_worst = std::max({welch_worst, std::abs(ci.estimate - static_cast<double>(ref.estimate)),
                            std::abs(ci.lower - static_cast<double>(ref.lower)),
                            std::abs(ci.upper - static_cast<double>(ref.upper))});
  }
  const bool ok = t_worst <= 1e-8 && ols_worst <= 1e-9 && welch_worst <= 1e-10;
  return {ok, "t_cdf " + num(t_worst) + " (1e-8), ols rel " + num(ols_worst) + " (1e-9), welch " + num(welch_worst) +
                  " (1e-10)"};
}

struct Cmd {
  int exit_code = -1;
  std::string out;
};

Cmd rv_cli(const fs::path& root, const std::string& args) {
  const std::string cmd = std::string("'") + RV_BINARY + "' --root '" + root.string() + "' " + args + " 2>/dev/null";
  FILE* p = ::popen(cmd.c_str(), "r");
  if (p == nullptr) return {};
  Cmd r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = ::pclose(p);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

Outcome replay_determinism() {
  TempDir a, b, c;
  rv::testing::stage_pima(a.path());
  rv::testing::stage_pima(b.path());
  rv_cli(a.path(), "load '" + (a / "pima.rvl").string() + "'");
  rv_cli(b.path(), "load '" + (b / "pima.rvl").string() + "'");
  const Cmd ra = rv_cli(a.path(), "run");
  const Cmd rb = rv_cli(b.path(), "run");
  const bool fresh_same = ra.exit_code == 0 && rb.exit_code == 0 && !ra.out.empty() && ra.out == rb.out;

  // Edit, save a branch in tree a; replay from the branch file alone in c.
  rv_cli(a.path(), "edit 12 'ci_bonf diff_means(pima.Age by pima.Diab) level 0.95 k 8'");
  rv_cli(a.path(), "edit 14 'print ranges(pima)'");
  const Cmd edited = rv_cli(a.path(), "run --from 1");
  const Cmd saved = rv_cli(a.path(), "branch save 'bonferroni age'");
  fs::copy_file(a / "pima.1.rvl", c / "pima.1.rvl");
  fs::copy_file(a / "pima.csv", c / "pima.csv");
  const Cmd loaded = rv_cli(c.path(), "load '" + (c / "pima.1.rvl").string() + "'");
  const Cmd replay = rv_cli(c.path(), "run");
  const bool branch_same = saved.exit_code == 0 && loaded.exit_code == 0 && !edited.out.empty() &&
                           replay.out == edited.out;
  return {fresh_same && branch_same, std::string("fresh processes ") + (fresh_same ? "identical" : "DIFFER") +
                                         ", branch replay " + (branch_same ? "identical" : "DIFFERS") + " (" +
                                         std::to_string(edited.out.size()) + " bytes)"};
}

Outcome split_run_equivalence() {
  std::mt19937_64 rng(5050);
  std::size_t partitions = 0;
  for (int i = 0; i < 50; ++i) {
    TempDir d;
    rv::testing::write_file(d / "t.csv", testgen::random_table_csv(rng, 20 + testgen::pick(rng, 40)));
    const std::string text = testgen::random_run_script(rng, "t.csv");
    const auto fresh = engine::new_session(dsl::parse_script(text), d.path());
    const auto full = engine::continue_run(fresh);
    for (int k = 0; k < 10; ++k) {
      engine::SessionState s = fresh;
      for (std::size_t cut : testgen::random_partition(rng, fresh.script.size())) s = engine::run_to_line(s, cut);
      ++partitions;
      if (s.output_log != full.output_log || !(s == full))
        return {false, "script " + std::to_string(i) + " partition " + std::to_string(k) + " diverged"};
    }
  }
  return {true, "50 scripts x 10 partitions = " + std::to_string(partitions) + " partitions identical"};
}

std::size_t count(const std::vector<audit::Advisory>& a, audit::AdvisoryCode c) {
  std::size_t n = 0;
  for (const auto& x : a) n += x.code == c;
  return n;
}

std::size_t w5_count(std::size_t n, std::size_t predictors) {
  TempDir d;
  std::mt19937_64 rng(n * 131 + predictors);
  std::normal_distribution<double> z(0, 1);
  std::string csv = "y";
  for (std::size_t j = 0; j < predictors; ++j) csv += ",x" + std::to_string(j + 1);
  csv += "\n";
  for (std::size_t i = 0; i < n; ++i) {
    csv += std::to_string(z(rng));
    for (std::size_t j = 0; j < predictors; ++j) csv += "," + std::to_string(z(rng));
    csv += "\n";
  }
  rv::testing::write_file(d / "t.csv", csv);
  std::string formula = "y ~ x1";
  for (std::size_t j = 1; j < predictors; ++j) formula += " + x" + std::to_string(j + 1);
  const auto s = run_text("load t = csv(\"t.csv\")\nmodel m = lm(" + formula + ") on t\n", d.path());
  return count(audit::audit_session(s), audit::AdvisoryCode::W5_OVERFIT);
}

Outcome audit_rules() {
  using audit::AdvisoryCode;
  std::ostringstream detail;

  const auto pima = run_text(pima_text(), rv::testing::data_dir());
  const bool w3 = pima.inference_count == 8 && count(audit::audit_session(pima), AdvisoryCode::W3_MULTIPLE_INFERENCE) == 1;
  detail << "W3 " << (w3 ? "ok" : "FAIL");

  bool w4 = false;
  {
    TempDir d;
    const std::size_t n = 200;
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      // Evenly spread values: robust z-scores stay below 1.5.
      a[i] = (static_cast<double>(i) - n / 2.0) / (n / 4.0);
      b[i] = 5 + a[(i * 7) % n];
    }
    const auto m = oracle::moments(b);
    b[123] = static_cast<double>(m.mean + 10 * m.sd);
    std::string csv = "a,b\n";
    char buf[64];
    for (std::size_t i = 0; i < n; ++i) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", a[i], b[i]);
      csv += buf;
    }
    rv::testing::write_file(d / "t.csv", csv);
    const auto adv = audit::audit_session(run_text("load t = csv(\"t.csv\")\n", d.path()));
    w4 = count(adv, AdvisoryCode::W4_OUTLIERS) == 1;
    for (const auto& x : adv)
      if (x.code == AdvisoryCode::W4_OUTLIERS) w4 = w4 && x.subject == "t.b";
  }
  detail << ", W4 " << (w4 ? "ok" : "FAIL");

  const bool w5 = w5_count(15, 1) == 1 && w5_count(30, 2) == 0;
  detail << ", W5 7.5/10 " << (w5 ? "ok" : "FAIL");

  bool small = false, intercept_clean = true;
  {
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> xs(0.0, 40.0), noise(0.0, 1.0);
    std::vector<double> x(10000), y(10000);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = xs(rng);
      y[i] = 0.001 * x[i] + noise(rng);
    }
    const std::vector<stats::Predictor> p = {{"x", MaskedVector(x)}};
    const auto rows = audit::coef_audit(stats::ols_fit(MaskedVector(y), p));
    small = rows[1].small_effect && rows[1].p_adj < 0.05;
    intercept_clean = !rows[0].small_effect;
    // The intercept is exempt even when every slope would be flagged.
    for (int t = 0; t < 20; ++t) {
      std::vector<double> xx(100), yy(100);
      for (std::size_t i = 0; i < xx.size(); ++i) {
        xx[i] = noise(rng);
        yy[i] = 100 + 5 * xx[i] + noise(rng);
      }
      const std::vector<stats::Predictor> pp = {{"x", MaskedVector(xx)}};
      const auto rr = audit::coef_audit(stats::ols_fit(MaskedVector(yy), pp), {0.95, 1e9, 0.0});
      intercept_clean = intercept_clean && !rr[0].small_effect && rr[0].p_adj < 0.05 && rr[1].small_effect;
    }
  }
  detail << ", SMALL_EFFECT " << (small ? "ok" : "FAIL") << ", intercept exempt " << (intercept_clean ? "ok" : "FAIL");
  return {w3 && w4 && w5 && small && intercept_clean, detail.str()};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"coefficient-audit reproduction", 1.0, coef_audit_reproduction},
      {"Bonferroni widening on Pima", 1.0, bonferroni_widening},
      {"Pima cleaning pipeline", 1.0, pima_cleaning},
      {"numerics oracles", 0.0, numerics_oracles},
      {"replay determinism", 0.0, replay_determinism},
      {"split-run equivalence", 0.0, split_run_equivalence},
      {"audit rules", 0.0, audit_rules},
  };
  int failed = 0;
  int index = 0;
  for (const auto& c : criteria) {
    ++index;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s > 0 && secs >= c.budget_s) {
      o.pass = false;
      o.detail += "; over the " + num(c.budget_s) + " s budget";
    }
    failed += !o.pass;
    std::printf("%s [%d] %s: %s (%.3f s)\n", o.pass ? "PASS" : "FAIL", index, c.name.c_str(), o.detail.c_str(), secs);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
