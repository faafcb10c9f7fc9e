#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "n2vrec/recommend.hpp"
#include "oracles.hpp"

using namespace n2vrec;

namespace {

RatingMatrix block_of(const std::vector<Rating>& ratings, std::size_t users, std::size_t items, bool implicit = false) {
  std::vector<std::uint32_t> us(users), is(items);
  for (std::uint32_t u = 0; u < users; ++u) us[u] = u;
  for (std::uint32_t i = 0; i < items; ++i) is[i] = i;
  return RatingMatrix(us, is, ratings, implicit);
}

/// The leading entries of `got` follow the reference ranking (scores equal, items equal unless tied).
void expect_follows(const TopNList& got, const std::vector<std::pair<std::uint32_t, double>>& want_all, std::size_t n) {
  const auto want = oracle::rank(want_all, n);
  ASSERT_GE(got.size(), want.size());
  std::map<std::uint32_t, double> score(want_all.begin(), want_all.end());
  for (std::size_t r = 0; r < want.size(); ++r) {
    EXPECT_NEAR(got[r].score, want[r].second, 1e-9) << "rank " << r;
    ASSERT_TRUE(score.count(got[r].item)) << "rank " << r;
    EXPECT_NEAR(score[got[r].item], got[r].score, 1e-9);
  }
}

ClusterModel clusters(std::vector<int> a, std::optional<int> cold = std::nullopt) {
  ClusterModel m;
  m.k = static_cast<std::size_t>(*std::max_element(a.begin(), a.end()) + 1);
  m.assignments = std::move(a);
  m.cold_cluster = cold;
  return m;
}

}  // namespace

TEST(RatingMatrix, LocalIndicesAndAveragedDuplicates) {
  std::vector<Rating> r = {{5, 7, 4, 0}, {5, 7, 2, 0}, {2, 9, 1, 0}, {8, 7, 5, 0}};
  RatingMatrix b({8, 2, 5}, {9, 7}, r);
  EXPECT_EQ(b.users(), (std::vector<std::uint32_t>{2, 5, 8}));
  EXPECT_EQ(*b.local_user(5), 1u);
  EXPECT_FALSE(b.local_user(3));
  ASSERT_EQ(b.row(1).size(), 1u);
  EXPECT_DOUBLE_EQ(b.row(1)[0].rating, 3.0);
  EXPECT_EQ(b.column(*b.local_item(7)).size(), 2u);
  EXPECT_EQ(b.nnz(), 3u);
}

TEST(Popular, CountsThenIndex) {
  std::vector<Rating> r = {{0, 2, 1, 0}, {1, 2, 1, 0}, {1, 0, 1, 0}, {2, 1, 1, 0}, {2, 3, 1, 0}};
  auto b = block_of(r, 4, 4);
  auto list = recommend_popular(b, 3, 4);
  ASSERT_EQ(list.size(), 4u);
  EXPECT_EQ(list[0].item, 2u);
  EXPECT_EQ(list[1].item, 0u);
  EXPECT_EQ(list[2].item, 1u);
  EXPECT_EQ(list[3].item, 3u);
  auto seen = recommend_popular(b, 1, 4);
  EXPECT_EQ(seen.size(), 2u);
  EXPECT_THROW(recommend_popular(b, 9, 4), Error);
}

TEST(Ubcf, MatchesReference) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 20; ++t) {
    auto b = oracle::random_block(rng, 15 + t, 25, 0.3);
    for (std::size_t k : {3, 25}) {
      UbcfRecommender rec(k);
      rec.fit(b);
      for (std::uint32_t u = 0; u < b.user_count(); ++u) {
        auto ref = oracle::ubcf_reference(b, u, k);
        if (ref.empty()) continue;
        expect_follows(rec.recommend(u, 10), ref, 10);
      }
    }
  }
}

TEST(Ubcf, HandWorkedScore) {
  // u0 = (5, 1, ?), u1 = (4, 2, 5): centered cosine 1, score = 3 + (5 - 11/3) = 13/3
  std::vector<Rating> r = {{0, 0, 5, 0}, {0, 1, 1, 0}, {1, 0, 4, 0}, {1, 1, 2, 0}, {1, 2, 5, 0}};
  auto list = recommend_ubcf(block_of(r, 2, 3), 0, 1);
  ASSERT_EQ(list.size(), 1u);
  EXPECT_EQ(list[0].item, 2u);
  EXPECT_NEAR(list[0].score, 13.0 / 3.0, 1e-12);
}

TEST(Ubcf, FallsBackToPopularAndPads) {
  std::vector<Rating> r = {{0, 0, 3, 0}, {1, 0, 4, 0}, {1, 1, 2, 0}, {2, 1, 5, 0}, {2, 2, 1, 0}};
  auto b = block_of(r, 4, 4);
  EXPECT_EQ(recommend_ubcf(b, 3, 4).size(), 4u);  // no ratings at all
  auto flat = recommend_ubcf(b, 0, 3);            // single rating, zero centered norm
  EXPECT_EQ(flat.size(), 3u);
  for (const auto& s : flat) EXPECT_NE(s.item, 0u);
}

TEST(Ibcf, MatchesReference) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 20; ++t) {
    auto b = oracle::random_block(rng, 20, 12 + t, 0.35);
    for (std::size_t k : {2, 30}) {
      IbcfRecommender rec(k);
      rec.fit(b);
      for (std::uint32_t u = 0; u < b.user_count(); ++u) {
        auto ref = oracle::ibcf_reference(b, u, k);
        if (ref.empty()) continue;
        expect_follows(rec.recommend(u, 10), ref, 10);
      }
    }
  }
}

TEST(Recommenders, ListsAreUnseenAndDistinct) {
  std::mt19937_64 rng(3);
  auto b = oracle::random_block(rng, 30, 40, 0.2);
  for (auto base : {BaseRecommender::Ubcf, BaseRecommender::Ibcf, BaseRecommender::Nmf, BaseRecommender::Popular}) {
    RecommenderParams params;
    params.base = base;
    params.nmf.rank = 5;
    auto rec = make_recommender(params);
    rec->fit(b);
    for (std::uint32_t u = 0; u < b.user_count(); ++u) {
      auto list = rec->recommend(u, 10);
      EXPECT_EQ(list.size(), std::min<std::size_t>(10, 40 - b.row(u).size())) << to_string(base);
      std::set<std::uint32_t> items;
      for (const auto& s : list) {
        items.insert(s.item);
        for (const auto& e : b.row(u)) EXPECT_NE(e.index, s.item);
      }
      EXPECT_EQ(items.size(), list.size());
    }
  }
}

TEST(Recommenders, NamesRoundTrip) {
  for (auto base : {BaseRecommender::Ubcf, BaseRecommender::Ibcf, BaseRecommender::Nmf, BaseRecommender::Popular})
    EXPECT_EQ(parse_base_recommender(to_string(base)), base);
  EXPECT_THROW(parse_base_recommender("svd"), Error);
}

TEST(Nmf, ObjectiveNeverIncreases) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 10; ++t) {
    auto b = oracle::random_block(rng, 20 + t, 30, 0.3);
    NmfOptions opt;
    opt.rank = 5;
    opt.seed = static_cast<std::uint64_t>(t);
    opt.tolerance = 0;
    opt.max_iterations = 100;
    auto m = fit_nmf(b, opt);
    for (std::size_t i = 1; i < m.objective.size(); ++i) EXPECT_LE(m.objective[i], m.objective[i - 1] * (1 + 1e-12));
    EXPECT_GE(m.W.minCoeff(), 0.0);
    EXPECT_GE(m.H.minCoeff(), 0.0);
  }
}

TEST(Nmf, RecoversRankOneMatrix) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  std::vector<double> a(12), c(9);
  for (auto& x : a) x = u(rng);
  for (auto& x : c) x = u(rng);
  std::vector<Rating> r;
  for (std::uint32_t i = 0; i < 12; ++i)
    for (std::uint32_t j = 0; j < 9; ++j) r.push_back({i, j, a[i] * c[j], 0});
  NmfOptions opt;
  opt.rank = 1;
  opt.tolerance = 1e-14;
  opt.max_iterations = 2000;
  auto m = fit_nmf(block_of(r, 12, 9), opt);
  EXPECT_LT(std::sqrt(m.objective.back() / static_cast<double>(r.size())), 1e-3);
}

TEST(Nmf, ConstantMatrixAndNegativeRatings) {
  std::vector<Rating> r;
  for (std::uint32_t i = 0; i < 5; ++i)
    for (std::uint32_t j = 0; j < 4; ++j) r.push_back({i, j, 3.0, 0});
  NmfOptions opt;
  opt.rank = 2;
  opt.max_iterations = 500;
  opt.tolerance = 1e-12;
  auto m = fit_nmf(block_of(r, 5, 4), opt);
  for (std::uint32_t i = 0; i < 5; ++i)
    for (std::uint32_t j = 0; j < 4; ++j) EXPECT_NEAR(m.predict(i, j), 3.0, 1e-3);
  std::vector<Rating> neg = {{0, 0, -1, 0}};
  EXPECT_THROW(fit_nmf(block_of(neg, 1, 1)), Error);
}

TEST(MatchItemClusters, UpperClassOfOneDimensionalSplit) {
  // user cluster 0 weights to item clusters: 10, 9, 1, 0
  std::vector<Rating> r;
  auto add = [&](std::uint32_t item, int times) {
    for (int k = 0; k < times; ++k) r.push_back({0, item, 1, 0});
  };
  add(0, 10);
  add(1, 9);
  add(2, 1);
  auto users = clusters({0});
  auto items = clusters({0, 1, 2, 3});
  ClusterBipartite cb(r, users, items);
  EXPECT_EQ(match_item_clusters(cb, 0), (std::vector<int>{0, 1}));
  EXPECT_EQ(cb.total(), 20u);
}

TEST(MatchItemClusters, DegenerateWeights) {
  auto users = clusters({0, 1});
  auto items = clusters({0, 1, 2});
  std::vector<Rating> equal = {{0, 0, 1, 0}, {0, 1, 1, 0}, {0, 2, 1, 0}, {1, 2, 1, 0}};
  ClusterBipartite cb(equal, users, items);
  EXPECT_EQ(match_item_clusters(cb, 0), (std::vector<int>{0, 1, 2}));
  std::vector<Rating> only_other = {{1, 1, 1, 0}, {1, 1, 1, 0}, {1, 2, 1, 0}};
  ClusterBipartite none(only_other, users, items);
  EXPECT_EQ(match_item_clusters(none, 0), (std::vector<int>{1}));
  ClusterBipartite single(equal, users, clusters({0, 0, 0}));
  EXPECT_EQ(match_item_clusters(single, 1), (std::vector<int>{0}));
  EXPECT_THROW(match_item_clusters(cb, 5), Error);
}

TEST(MatchItemClusters, TiedWeightsStayTogether) {
  std::vector<Rating> r;
  for (std::uint32_t item : {0u, 0u, 0u, 0u, 0u, 1u, 2u}) r.push_back({0, item, 1, 0});
  ClusterBipartite cb(r, clusters({0}), clusters({0, 1, 2, 3}));
  // weights 5, 1, 1, 0: the two 1s are never split
  EXPECT_EQ(match_item_clusters(cb, 0), (std::vector<int>{0}));
}

TEST(ClusterBipartite, ConservesInteractions) {
  std::mt19937_64 rng(6);
  std::vector<Rating> r;
  for (int k = 0; k < 300; ++k) r.push_back({static_cast<std::uint32_t>(rng() % 20), static_cast<std::uint32_t>(rng() % 30), 1, 0});
  std::vector<int> ua(20), ia(30);
  for (auto& a : ua) a = static_cast<int>(rng() % 4);
  for (auto& a : ia) a = static_cast<int>(rng() % 5);
  ua[0] = 3;
  ia[0] = 4;
  ClusterBipartite cb(r, clusters(ua), clusters(ia));
  EXPECT_EQ(cb.total(), 300u);
  std::uint64_t cols = 0;
  for (std::size_t c = 0; c < 5; ++c) cols += cb.item_cluster_weight(c);
  EXPECT_EQ(cols, 300u);
}

TEST(TwoPhase, ListsAreFullUnseenAndDistinct) {
  std::mt19937_64 rng(7);
  const std::size_t nu = 40, ni = 60;
  std::vector<Rating> train;
  for (std::uint32_t u = 0; u < nu; ++u)
    for (std::uint32_t i = 0; i < ni; ++i)
      if ((u % 2 == i % 2 && rng() % 3 == 0) || rng() % 20 == 0) train.push_back({u, i, static_cast<double>(1 + rng() % 5), 0});
  std::vector<int> ua(nu), ia(ni);
  for (std::uint32_t u = 0; u < nu; ++u) ua[u] = u < 38 ? static_cast<int>(u % 2) : 2;
  for (std::uint32_t i = 0; i < ni; ++i) ia[i] = static_cast<int>(i % 2);
  auto uc = clusters(ua, 2);
  auto ic = clusters(ia);
  for (auto base : {BaseRecommender::Ubcf, BaseRecommender::Ibcf, BaseRecommender::Popular}) {
    TwoPhaseOptions opt;
    opt.recommender.base = base;
    auto res = two_phase(train, nu, ni, uc, ic, opt);
    EXPECT_EQ(res.matched[0], std::vector<int>{0});
    EXPECT_EQ(res.matched[1], std::vector<int>{1});
    EXPECT_TRUE(res.matched[2].empty());
    std::vector<std::set<std::uint32_t>> seen(nu);
    for (const auto& r : train) seen[r.user].insert(r.item);
    for (std::uint32_t u = 0; u < nu; ++u) {
      ASSERT_EQ(res.lists[u].size(), 10u);
      std::set<std::uint32_t> items;
      for (const auto& s : res.lists[u]) {
        EXPECT_FALSE(seen[u].count(s.item));
        items.insert(s.item);
      }
      EXPECT_EQ(items.size(), 10u);
    }
  }
}

TEST(TwoPhase, ColdUsersGetGlobalPopular) {
  std::vector<Rating> train = {{0, 0, 1, 0}, {1, 0, 1, 0}, {1, 1, 1, 0}, {0, 2, 1, 0}, {1, 2, 1, 0}, {2, 2, 1, 0}};
  TwoPhaseOptions opt;
  opt.n = 3;
  auto res = two_phase(train, 3, 4, clusters({0, 0, 1}, 1), clusters({0, 1, 0, 1}), opt);
  ASSERT_EQ(res.lists[2].size(), 3u);
  EXPECT_EQ(res.lists[2][0].item, 0u);
  EXPECT_EQ(res.lists[2][1].item, 1u);
  EXPECT_EQ(res.lists[2][2].item, 3u);
}

TEST(TwoPhase, SingleClusterEqualsOriginalModel) {
  std::mt19937_64 rng(8);
  auto b = oracle::random_block(rng, 25, 30, 0.25);
  std::vector<Rating> train;
  for (std::uint32_t u = 0; u < 25; ++u)
    for (const auto& e : b.row(u)) train.push_back({u, e.index, e.rating, 0});
  TwoPhaseOptions opt;
  opt.recommender.ubcf_neighbors = 5;
  auto clustered = two_phase(train, 25, 30, clusters(std::vector<int>(25, 0)), clusters(std::vector<int>(30, 0)), opt);
  auto original = recommend_all(train, 25, 30, opt);
  for (std::uint32_t u = 0; u < 25; ++u) {
    ASSERT_EQ(clustered.lists[u].size(), original[u].size());
    for (std::size_t r = 0; r < original[u].size(); ++r) EXPECT_EQ(clustered.lists[u][r].item, original[u][r].item);
  }
}

TEST(TwoPhase, RejectsMismatchedModels) {
  std::vector<Rating> train = {{0, 0, 1, 0}};
  EXPECT_THROW(two_phase(train, 2, 1, clusters({0}), clusters({0}), {}), Error);
}

TEST(Recommendations, CsvUsesExternalIds) {
  IdMap users, items;
  users.intern("u9");
  items.intern("a");
  items.intern("b");
  std::vector<TopNList> lists = {{{1, 2.5}, {0, 1.0}}};
  std::stringstream s;
  write_recommendations(lists, users, items, s);
  EXPECT_EQ(s.str(), "user_id,rank,item_id,score\nu9,1,b,2.5\nu9,2,a,1\n");
}
