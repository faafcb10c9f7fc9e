#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "n2vrec/eval.hpp"
#include "oracles.hpp"

using namespace n2vrec;

namespace {

std::vector<Rating> random_interactions(std::mt19937_64& rng, std::uint32_t users, std::uint32_t items, std::size_t n) {
  std::set<std::pair<std::uint32_t, std::uint32_t>> pairs;
  while (pairs.size() < n) pairs.insert({static_cast<std::uint32_t>(rng() % users), static_cast<std::uint32_t>(rng() % items)});
  std::vector<Rating> out;
  for (auto [u, i] : pairs) out.push_back({u, i, static_cast<double>(1 + rng() % 5), 0});
  return out;
}

std::vector<TopNList> random_lists(std::mt19937_64& rng, std::uint32_t users, std::uint32_t items, std::size_t len) {
  std::vector<TopNList> lists(users);
  std::vector<std::uint32_t> all(items);
  for (std::uint32_t i = 0; i < items; ++i) all[i] = i;
  for (auto& l : lists) {
    std::shuffle(all.begin(), all.end(), rng);
    const std::size_t n = rng() % (len + 1);
    for (std::size_t r = 0; r < n; ++r) l.push_back({all[r], static_cast<double>(len - r)});
  }
  return lists;
}

void expect_metrics_eq(const Metrics& a, const Metrics& b) {
  EXPECT_NEAR(a.precision, b.precision, 1e-12);
  EXPECT_NEAR(a.recall, b.recall, 1e-12);
  EXPECT_NEAR(a.hit_rate, b.hit_rate, 1e-12);
  EXPECT_NEAR(a.arhr, b.arhr, 1e-12);
  EXPECT_EQ(a.users, b.users);
}

}  // namespace

TEST(Split, EqualFoldSizes) {
  std::vector<Rating> r;
  for (std::uint32_t u = 0; u < 2; ++u)
    for (std::uint32_t i = 0; i < 5; ++i) r.push_back({u, i, 1, 0});
  auto plan = split(r, 5, 3);
  for (std::size_t f = 0; f < 5; ++f) EXPECT_EQ(plan.fold_size(f), 2u);
}

TEST(Split, SingleInteractionUsersStayInTraining) {
  std::mt19937_64 rng(1);
  auto r = random_interactions(rng, 50, 40, 300);
  r.push_back({77, 3, 4, 0});
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto plan = split(r, 5, seed);
    EXPECT_EQ(plan.labels.back(), -1);
  }
}

TEST(Split, EveryUserKeepsATrainingInteraction) {
  std::mt19937_64 rng(2);
  auto r = random_interactions(rng, 80, 50, 400);
  auto plan = split(r, 5, 9);
  for (std::size_t f = 0; f < 5; ++f) {
    auto fd = fold_data(r, plan, f);
    std::set<std::uint32_t> train_users, all_users;
    for (const auto& x : fd.train) train_users.insert(x.user);
    for (const auto& x : r) all_users.insert(x.user);
    EXPECT_EQ(train_users, all_users);
    EXPECT_EQ(fd.train.size() + fd.test.size(), r.size());
  }
}

TEST(Split, IndependentOfInputOrder) {
  std::mt19937_64 rng(3);
  auto r = random_interactions(rng, 30, 30, 200);
  auto shuffled = r;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  auto a = split(r, 5, 11), b = split(shuffled, 5, 11);
  for (std::size_t f = 0; f < 5; ++f) {
    auto fa = fold_data(r, a, f).test, fb = fold_data(shuffled, b, f).test;
    std::sort(fa.begin(), fa.end());
    std::sort(fb.begin(), fb.end());
    EXPECT_EQ(fa, fb);
  }
  EXPECT_NE(split(r, 5, 11).labels, split(r, 5, 12).labels);
  EXPECT_THROW(split(r, 1), Error);
}

TEST(Score, SingleHitAtTop) {
  std::vector<Rating> test = {{0, 4, 1, 0}};
  std::vector<TopNList> lists = {{{4, 1}, {5, 1}, {6, 1}}};
  auto m = score(lists, test, 10);
  EXPECT_DOUBLE_EQ(m.precision, 0.1);
  EXPECT_DOUBLE_EQ(m.recall, 1.0);
  EXPECT_DOUBLE_EQ(m.hit_rate, 1.0);
  EXPECT_DOUBLE_EQ(m.arhr, 1.0);
  EXPECT_EQ(m.users, 1u);
}

TEST(Score, NoHitsIsZero) {
  std::vector<Rating> test = {{0, 4, 1, 0}, {1, 2, 1, 0}};
  std::vector<TopNList> lists = {{{1, 1}}, {}};
  auto m = score(lists, test, 5);
  EXPECT_EQ(m.precision, 0.0);
  EXPECT_EQ(m.recall, 0.0);
  EXPECT_EQ(m.hit_rate, 0.0);
  EXPECT_EQ(m.arhr, 0.0);
}

TEST(Score, MatchesReference) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 30; ++t) {
    auto test = random_interactions(rng, 20, 30, 60);
    auto lists = random_lists(rng, 20, 30, 15);
    for (std::size_t n : {1, 5, 10, 20}) expect_metrics_eq(score(lists, test, n), oracle::metrics_reference(lists, test, n));
  }
}

TEST(Score, Bounds) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    auto test = random_interactions(rng, 15, 20, 40);
    auto lists = random_lists(rng, 15, 20, 10);
    auto m = score(lists, test, 10);
    EXPECT_GE(m.arhr, m.hit_rate / 10 - 1e-15);
    EXPECT_LE(m.hit_rate, 1.0);
    EXPECT_LE(m.recall, 1.0);
    EXPECT_LE(m.precision * 10, 10.0);
  }
}

TEST(Score, InvariantUnderItemRelabeling) {
  std::mt19937_64 rng(6);
  auto test = random_interactions(rng, 15, 20, 50);
  auto lists = random_lists(rng, 15, 20, 10);
  std::vector<std::uint32_t> perm(20);
  for (std::uint32_t i = 0; i < 20; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  auto test2 = test;
  for (auto& r : test2) r.item = perm[r.item];
  auto lists2 = lists;
  for (auto& l : lists2)
    for (auto& s : l) s.item = perm[s.item];
  expect_metrics_eq(score(lists, test, 10), score(lists2, test2, 10));
}

TEST(Score, EmptyTestSet) {
  std::vector<Rating> none;
  try {
    score({}, none, 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyTestSet);
  }
  std::vector<Rating> test = {{0, 0, 1, 0}};
  EXPECT_THROW(score({}, test, 0), Error);
}

TEST(Report, MeanAndJsonRoundTrip) {
  MetricsReport r;
  r.ns = {5, 10};
  r.folds = {{{0.1, 0.2, 0.3, 0.4, 10}, {0.2, 0.3, 0.4, 0.5, 10}}, {{0.3, 0.4, 0.5, 0.6, 12}, {0.4, 0.5, 0.6, 0.7, 12}}};
  auto mean = r.mean(10);
  EXPECT_NEAR(mean.precision, 0.3, 1e-15);
  EXPECT_NEAR(mean.arhr, 0.6, 1e-15);
  EXPECT_THROW(r.mean(20), Error);
  auto back = report_from_json(nlohmann::json::parse(report_json(r).dump()));
  EXPECT_EQ(back.ns, r.ns);
  ASSERT_EQ(back.folds.size(), 2u);
  for (std::size_t f = 0; f < 2; ++f)
    for (std::size_t j = 0; j < 2; ++j) expect_metrics_eq(back.folds[f][j], r.folds[f][j]);
}

TEST(Report, CsvLayout) {
  MetricsReport r;
  r.ns = {10};
  r.folds = {{{0.5, 0.25, 1, 0.75, 4}}};
  std::stringstream s;
  write_report_csv(r, s);
  EXPECT_EQ(s.str(),
            "fold,n,users,precision,recall,hr,arhr\n"
            "1,10,4,0.5000000000,0.2500000000,1.0000000000,0.7500000000\n"
            "mean,10,4,0.5000000000,0.2500000000,1.0000000000,0.7500000000\n");
}
