#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <thread>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "rv/branch_store.hpp"
#include "rv/engine.hpp"
#include "script_gen.hpp"

using namespace rv;
using namespace rv::store;
using rv::testing::TempDir;
namespace fs = std::filesystem;

namespace {

std::chrono::system_clock::time_point fixed_time() {
  return std::chrono::system_clock::time_point(std::chrono::seconds(1700000000));
}

dsl::Script pima_script() {
  return dsl::parse_script(rv::testing::read_file(rv::testing::data_dir() / "pima.rvl"), "pima.rvl");
}

dsl::Script with_line(dsl::Script s, std::size_t n, const std::string& text) {
  s.lines[n - 1] = dsl::parse_line(text, n);
  return s;
}

}  // namespace

TEST(Format, Fnv1a64KnownValues) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cull);
  EXPECT_EQ(hex64(0xaf63dc4c8601ec8cull), "af63dc4c8601ec8c");
  EXPECT_EQ(hex64(1), "0000000000000001");
}

TEST(Format, Timestamp) { EXPECT_EQ(iso8601_utc(fixed_time()), "2023-11-14T22:13:20Z"); }

TEST(Format, Filename) {
  EXPECT_EQ(parse_branch_filename("pima.3.rvl"), (std::optional<BranchId>(BranchId{"pima", 3})));
  EXPECT_EQ(parse_branch_filename("my.study.12.rvl"), (std::optional<BranchId>(BranchId{"my.study", 12})));
  EXPECT_FALSE(parse_branch_filename("pima.rvl"));
  EXPECT_FALSE(parse_branch_filename("pima.x.rvl"));
  EXPECT_FALSE(parse_branch_filename("pima.3.txt"));
}

TEST(Format, BranchFileLayout) {
  TempDir d;
  BranchStore store(d.path(), fixed_time);
  store.ensure_original(pima_script(), "pima");
  const auto rec = store.save_branch(pima_script(), "pima", "bonferroni", BranchId{"pima", 0});
  const std::string text = rv::testing::read_file(d / "pima.1.rvl");
  const std::string body = dsl::format_script(pima_script());
  const std::string head = "#: desc bonferroni\n#: parent pima.0\n#: created 2023-11-14T22:13:20Z\n#: hash " +
                           hex64(fnv1a64(body)) + "\n";
  EXPECT_EQ(text, head + body);
  EXPECT_EQ(rec.content_hash, hex64(fnv1a64(body)));
}

TEST(Save, FirstSaveIsOne) {
  TempDir d;
  BranchStore store(d.path(), fixed_time);
  EXPECT_EQ(store.ensure_original(pima_script(), "pima").number, 0);
  const auto rec = store.save_branch(pima_script(), "pima", "edited", BranchId{"pima", 0});
  EXPECT_EQ(rec.number, 1);
  EXPECT_TRUE(fs::exists(d / "pima.1.rvl"));
}

TEST(Save, ParallelBranchesFromOneParent) {
  TempDir d;
  BranchStore store(d.path(), fixed_time);
  store.ensure_original(pima_script(), "pima");
  const auto a = store.save_branch(pima_script(), "pima", "branch a", BranchId{"pima", 0});
  const auto b = store.save_branch(pima_script(), "pima", "branch b", BranchId{"pima", 0});
  EXPECT_EQ(a.number, 1);
  EXPECT_EQ(b.number, 2);
  EXPECT_EQ(a.parent, (std::optional<BranchId>(BranchId{"pima", 0})));
  EXPECT_EQ(b.parent, a.parent);
}

TEST(Save, Errors) {
  TempDir d;
  BranchStore store(d.path(), fixed_time);
  store.ensure_original(pima_script(), "pima");
  EXPECT_THROW(store.save_branch(pima_script(), "pima", "", BranchId{"pima", 0}), StoreError);
  EXPECT_THROW(store.save_branch(pima_script(), "pima", "two\nlines", BranchId{"pima", 0}), StoreError);
  EXPECT_THROW(store.save_branch(pima_script(), "", "x", std::nullopt), StoreError);
  EXPECT_THROW(store.save_branch(pima_script(), "pima", "x", BranchId{"pima", 9}), StoreError);
  EXPECT_EQ(store.list_branches("pima").size(), 1u);
}

TEST(Load, RoundTrip) {
  TempDir d;
  BranchStore store(d.path(), fixed_time);
  store.ensure_original(pima_script(), "pima");
  const auto edited = with_line(pima_script(), 12, "ci_bonf diff_means(pima.Age by pima.Diab) level 0.95 k 8");
  const auto rec = store.save_branch(edited, "pima", "bonferroni age", BranchId{"pima", 0});
  const auto [script, loaded] = store.load_branch("pima", 1);
  EXPECT_EQ(script, edited);
  EXPECT_EQ(loaded, rec);
}

TEST(Load, RandomScriptsRoundTrip) {
  TempDir d;
  BranchStore store(d.path(), fixed_time);
  std::mt19937_64 rng(42);
  store.ensure_original(dsl::Script{}, "r");
  for (int i = 0; i < 40; ++i) {
    const dsl::Script s = testgen::random_script(rng);
    const auto rec = store.save_branch(s, "r", "random " + std::to_string(i), BranchId{"r", 0});
    const auto [back, meta] = store.load_branch("r", rec.number);
    ASSERT_EQ(back, s) << dsl::format_script(s);
    ASSERT_EQ(meta, rec);
  }
}

TEST(Load, TamperedBodyFailsIntegrity) {
  TempDir d;
  BranchStore store(d.path(), fixed_time);
  store.ensure_original(pima_script(), "pima");
  store.save_branch(pima_script(), "pima", "x", BranchId{"pima", 0});
  std::string text = rv::testing::read_file(d / "pima.1.rvl");
  const auto pos = text.find("level 0.95");
  text.replace(pos, 10, "level 0.90");
  rv::testing::write_file(d / "pima.1.rvl", text);
  EXPECT_THROW(store.load_branch("pima", 1), IntegrityError);
  EXPECT_THROW(store.load_branch("pima", 7), StoreError);
}

TEST(Load, MissingHeaderFailsIntegrity) {
  EXPECT_THROW(parse_branch_file("print 1\n", "x", 1), IntegrityError);
  EXPECT_THROW(parse_branch_file("#: desc d\n#: created 2020-01-01T00:00:00Z\nprint 1\n", "x", 1), IntegrityError);
}

TEST(Load, ReplayAcrossSaveIsByteIdentical) {
  TempDir a, b;
  rv::testing::stage_pima(a.path());
  const auto edited = with_line(pima_script(), 12, "ci_bonf diff_means(pima.Age by pima.Diab) level 0.95 k 8");
  const auto first = engine::continue_run(engine::new_session(edited, a.path()));
  BranchStore store(a.path());
  store.ensure_original(pima_script(), "pima");
  store.save_branch(edited, "pima", "bonf", BranchId{"pima", 0});

  // Elsewhere: just the branch file and the data.
  fs::copy_file(a / "pima.1.rvl", b / "pima.1.rvl");
  fs::copy_file(a / "pima.csv", b / "pima.csv");
  BranchStore other(b.path());
  const auto [script, rec] = other.load_branch("pima", 1);
  const auto replay = engine::continue_run(engine::new_session(script, b.path()));
  EXPECT_EQ(engine::render_log(replay.output_log), engine::render_log(first.output_log));
}

TEST(List, OriginalOnlyThenSorted) {
  TempDir d;
  BranchStore store(d.path(), fixed_time);
  store.ensure_original(pima_script(), "pima");
  auto list = store.list_branches("pima");
  ASSERT_EQ(list.size(), 1u);
  EXPECT_EQ(list[0].number, 0);
  EXPECT_FALSE(list[0].parent);
  store.save_branch(pima_script(), "pima", "one", BranchId{"pima", 0});
  store.save_branch(pima_script(), "pima", "two", BranchId{"pima", 1});
  list = store.list_branches("pima");
  ASSERT_EQ(list.size(), 3u);
  for (long i = 0; i < 3; ++i) EXPECT_EQ(list[i].number, i);
  // Other bases are separate.
  store.ensure_original(pima_script(), "other");
  EXPECT_EQ(store.list_branches("pima").size(), 3u);
  EXPECT_EQ(store.list_branches("other").size(), 1u);
}

TEST(List, NumbersNeverReused) {
  TempDir d;
  BranchStore store(d.path(), fixed_time);
  store.ensure_original(pima_script(), "pima");
  store.save_branch(pima_script(), "pima", "one", BranchId{"pima", 0});
  store.save_branch(pima_script(), "pima", "two", BranchId{"pima", 0});
  EXPECT_EQ(store.save_branch(pima_script(), "pima", "three", BranchId{"pima", 2}).number, 3);
}

TEST(List, LineageAcyclicUnderRandomSaves) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    TempDir d;
    BranchStore store(d.path(), fixed_time);
    store.ensure_original(pima_script(), "p");
    long count = 1;
    for (int i = 0; i < 15; ++i) {
      const long parent = static_cast<long>(testgen::pick(rng, static_cast<std::size_t>(count)));
      store.save_branch(pima_script(), "p", "s" + std::to_string(i), BranchId{"p", parent});
      ++count;
    }
    const auto list = store.list_branches("p");
    ASSERT_EQ(list.size(), static_cast<std::size_t>(count));
    std::map<long, std::optional<long>> parent_of;
    for (const auto& r : list) parent_of[r.number] = r.parent ? std::optional<long>(r.parent->number) : std::nullopt;
    for (const auto& r : list) {
      std::set<long> seen;
      std::optional<long> cur = r.number;
      while (cur) {
        ASSERT_TRUE(seen.insert(*cur).second) << "cycle through " << *cur;
        ASSERT_TRUE(parent_of.count(*cur));
        cur = parent_of[*cur];
      }
      EXPECT_TRUE(seen.count(0));  // every chain ends at the original
    }
  }
}

TEST(Concurrency, ParallelSavesGetDistinctGaplessNumbers) {
  TempDir d;
  BranchStore store(d.path());
  store.ensure_original(pima_script(), "pima");
  constexpr int kThreads = 8, kEach = 5;
  std::vector<std::thread> threads;
  std::vector<std::vector<long>> got(kThreads);
  for (int t = 0; t < kThreads; ++t) {
    threads.emplace_back([&, t] {
      BranchStore mine(d.path());
      for (int i = 0; i < kEach; ++i)
        got[t].push_back(mine.save_branch(pima_script(), "pima", "t" + std::to_string(t), BranchId{"pima", 0}).number);
    });
  }
  for (auto& th : threads) th.join();
  std::vector<long> all;
  for (const auto& v : got) all.insert(all.end(), v.begin(), v.end());
  std::sort(all.begin(), all.end());
  ASSERT_EQ(all.size(), static_cast<std::size_t>(kThreads * kEach));
  for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i], static_cast<long>(i + 1));
}

TEST(Diff, IdenticalIsEmpty) {
  TempDir d;
  BranchStore store(d.path(), fixed_time);
  store.ensure_original(pima_script(), "pima");
  store.save_branch(pima_script(), "pima", "same", BranchId{"pima", 0});
  EXPECT_TRUE(store.diff_branches({"pima", 0}, {"pima", 1}).empty());
}

TEST(Diff, EditedLineTwelveSingleHunk) {
  TempDir d;
  BranchStore store(d.path(), fixed_time);
  store.ensure_original(pima_script(), "pima");
  const std::string bonf = "ci_bonf diff_means(pima.Age by pima.Diab) level 0.95 k 8";
  store.save_branch(with_line(pima_script(), 12, bonf), "pima", "bonf", BranchId{"pima", 0});
  const auto diff = store.diff_branches({"pima", 0}, {"pima", 1});
  ASSERT_FALSE(diff.empty());
  for (const auto& e : diff) EXPECT_EQ(e.line_no(), 12u);
  bool saw_left = false, saw_right = false;
  for (const auto& e : diff) {
    if (e.left) saw_left = *e.left == "ci diff_means(pima.Age by pima.Diab) level 0.95";
    if (e.right) saw_right = *e.right == bonf;
  }
  EXPECT_TRUE(saw_left);
  EXPECT_TRUE(saw_right);
}

namespace {

std::vector<DiffEntry> mirror(std::vector<DiffEntry> d) {
  for (auto& e : d) {
    std::swap(e.left, e.right);
    std::swap(e.left_line, e.right_line);
  }
  return d;
}

std::vector<std::string> apply_right(const std::vector<std::string>& a, const std::vector<DiffEntry>& diff) {
  // Rebuild b from a: keep unchanged lines, drop left-only, add right-only.
  std::set<std::size_t> removed;
  std::map<std::size_t, std::string> added;
  for (const auto& e : diff) {
    if (e.left) removed.insert(e.left_line);
    if (e.right) added[e.right_line] = *e.right;
  }
  std::vector<std::string> kept;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!removed.count(i + 1)) kept.push_back(a[i]);
  std::vector<std::string> out;
  std::size_t k = 0;
  for (std::size_t line = 1; k < kept.size() || added.count(line); ++line) {
    if (added.count(line)) out.push_back(added[line]);
    else out.push_back(kept[k++]);
  }
  return out;
}

std::size_t lcs_len(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::vector<std::size_t>> t(a.size() + 1, std::vector<std::size_t>(b.size() + 1, 0));
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j)
      t[i][j] = a[i - 1] == b[j - 1] ? t[i - 1][j - 1] + 1 : std::max(t[i - 1][j], t[i][j - 1]);
  return t[a.size()][b.size()];
}

}  // namespace

TEST(Diff, MirrorReconstructMinimal) {
  std::mt19937_64 rng(17);
  const std::vector<std::string> alphabet = {"a", "b", "c", "d"};
  for (int t = 0; t < 300; ++t) {
    std::vector<std::string> a(testgen::pick(rng, 12)), b(testgen::pick(rng, 12));
    for (auto& s : a) s = alphabet[testgen::pick(rng, alphabet.size())];
    for (auto& s : b) s = alphabet[testgen::pick(rng, alphabet.size())];
    const auto ab = diff_lines(a, b), ba = diff_lines(b, a);
    auto sorted = [](std::vector<DiffEntry> v) {
      std::sort(v.begin(), v.end(), [](const DiffEntry& x, const DiffEntry& y) {
        return std::tie(x.left_line, x.right_line) < std::tie(y.left_line, y.right_line);
      });
      return v;
    };
    ASSERT_EQ(sorted(mirror(ab)), sorted(ba));
    ASSERT_EQ(apply_right(a, ab), b);
    // Minimal: removed lines = |a| - LCS.
    std::size_t removed = 0;
    for (const auto& e : ab) removed += e.left.has_value();
    ASSERT_EQ(removed, a.size() - lcs_len(a, b));
  }
}
