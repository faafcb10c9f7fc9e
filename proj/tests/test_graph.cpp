#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "n2vrec/graph.hpp"
#include "oracles.hpp"

using namespace n2vrec;

namespace {

struct Built {
  BipartiteGraph ui, ic, uc;
};

Built build(const oracle::BipartiteFixture& f) {
  Built b;
  b.ui = build_user_item(f.ratings, f.users, f.items);
  b.ic = build_item_category(f.memberships, f.items, f.categories);
  b.uc = build_user_category(b.ui, b.ic);
  return b;
}

void expect_matches_oracle(const ProjectionGraph& g,
                           const std::map<std::pair<std::uint32_t, std::uint32_t>,
                                          std::tuple<std::uint32_t, std::uint32_t, double>>& want) {
  ASSERT_EQ(g.edges.size(), want.size());
  for (const auto& e : g.edges) {
    auto it = want.find({e.i, e.j});
    ASSERT_NE(it, want.end()) << e.i << "-" << e.j;
    EXPECT_EQ(e.ck, std::get<0>(it->second));
    EXPECT_EQ(e.ca, std::get<1>(it->second));
    EXPECT_EQ(e.w, std::get<2>(it->second));
  }
}

}  // namespace

TEST(BipartiteGraph, RejectsInvalidEdges) {
  EXPECT_THROW(BipartiteGraph(Namespace::User, Namespace::User, 2, 2, {}), Error);
  EXPECT_THROW(BipartiteGraph(Namespace::User, Namespace::Item, 2, 2, {{0, 5, 1.0}}), Error);
  EXPECT_THROW(BipartiteGraph(Namespace::User, Namespace::Item, 2, 2, {{0, 1, 0.0}}), Error);
  EXPECT_THROW(BipartiteGraph(Namespace::User, Namespace::Item, 2, 2, {{0, 1, 1.0}, {0, 1, 2.0}}), Error);
}

TEST(BipartiteGraph, EmptyInteractionsAreDatasetEmpty) {
  std::vector<Rating> none;
  try {
    build_user_item(none, 3, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DatasetEmpty);
  }
}

TEST(BipartiteGraph, RepeatedInteractionsAddUp) {
  std::vector<Rating> r = {{0, 1, 5, 0}, {0, 1, 3, 0}, {1, 0, 1, 0}};
  auto g = build_user_item(r, 2, 2);
  EXPECT_EQ(g.weight(0, 1), 2.0);
  EXPECT_EQ(g.weight(1, 0), 1.0);
  EXPECT_EQ(g.edges().size(), 2u);
}

TEST(BipartiteGraph, RawInteractionsAreInterned) {
  std::vector<RawInteraction> raw = {{"alice", "x", 4, 10}, {"bob", "y", 2, std::nullopt}, {"alice", "y", 1, 3}};
  auto net = build_user_item(raw);
  EXPECT_EQ(net.users.size(), 2u);
  EXPECT_EQ(net.items.size(), 2u);
  EXPECT_EQ(net.users.external(0), "alice");
  EXPECT_EQ(net.graph.neighbors(Namespace::User, 0).size(), 2u);
}

TEST(BipartiteGraph, UserCategoryWeightsCountCheckedItems) {
  // user 0 rated items 0 and 1, both in category 0; item 1 is also in category 1
  std::vector<Rating> r = {{0, 0, 1, 0}, {0, 1, 1, 0}, {1, 2, 1, 0}};
  auto ui = build_user_item(r, 2, 3);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> m = {{0, 0}, {1, 0}, {1, 1}};
  auto ic = build_item_category(m, 3, 2);
  std::vector<std::uint32_t> uncategorized;
  auto uc = build_user_category(ui, ic, &uncategorized);
  EXPECT_EQ(uc.weight(0, 0), 2.0);
  EXPECT_EQ(uc.weight(0, 1), 1.0);
  EXPECT_TRUE(uc.neighbors(Namespace::User, 1).empty());
  EXPECT_EQ(uncategorized, std::vector<std::uint32_t>{2});
}

TEST(Projection, SharedItemAndCategoryGiveUnitWeight) {
  std::vector<Rating> r = {{0, 0, 1, 0}, {1, 0, 1, 0}};
  auto ui = build_user_item(r, 2, 1);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> m = {{0, 0}};
  auto ic = build_item_category(m, 1, 1);
  auto g = project(ui, build_user_category(ui, ic), Namespace::User);
  ASSERT_EQ(g.edges.size(), 1u);
  EXPECT_EQ(g.edges[0], (ProjectionEdge{0, 1, 1, 1, 1.0}));
}

TEST(Projection, NoSharedItemsNoEdge) {
  std::vector<Rating> r = {{0, 0, 1, 0}, {1, 1, 1, 0}};
  auto ui = build_user_item(r, 2, 2);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> m = {{0, 0}, {1, 0}};
  auto ic = build_item_category(m, 2, 1);
  EXPECT_TRUE(project(ui, build_user_category(ui, ic), Namespace::User).edges.empty());
}

TEST(Projection, UncategorizedPairsNeedTheFloor) {
  std::vector<Rating> r = {{0, 0, 1, 0}, {1, 0, 1, 0}};
  auto ui = build_user_item(r, 2, 1);
  auto ic = build_item_category({}, 1, 1);
  auto uc = build_user_category(ui, ic);
  EXPECT_TRUE(project(ui, uc, Namespace::User).edges.empty());
  ProjectionOptions floor;
  floor.uncategorized_ca_floor = 1;
  auto g = project(ui, uc, Namespace::User, floor);
  ASSERT_EQ(g.edges.size(), 1u);
  EXPECT_EQ(g.edges[0].ca, 1u);
}

TEST(Projection, MatchesBruteForceOnRandomFixtures) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 20; ++t) {
    auto f = oracle::random_bipartite(rng);
    auto b = build(f);
    expect_matches_oracle(project(b.ui, b.uc, Namespace::User), oracle::brute_projection(f, Namespace::User, true));
    expect_matches_oracle(project(b.ui, b.ic, Namespace::Item), oracle::brute_projection(f, Namespace::Item, true));
    expect_matches_oracle(project(b.ui, Namespace::User), oracle::brute_projection(f, Namespace::User, false));
    expect_matches_oracle(project(b.ui, Namespace::Item), oracle::brute_projection(f, Namespace::Item, false));
  }
}

TEST(Projection, EdgesAreSortedWithProductWeights) {
  std::mt19937_64 rng(11);
  auto f = oracle::random_bipartite(rng);
  auto b = build(f);
  auto g = project(b.ui, b.ic, Namespace::Item);
  for (std::size_t k = 0; k < g.edges.size(); ++k) {
    EXPECT_LT(g.edges[k].i, g.edges[k].j);
    EXPECT_EQ(g.edges[k].w, static_cast<double>(g.edges[k].ck) * g.edges[k].ca);
    if (k) {
      EXPECT_TRUE(std::tie(g.edges[k - 1].i, g.edges[k - 1].j) < std::tie(g.edges[k].i, g.edges[k].j));
    }
  }
}

TEST(Projection, TextRoundTrip) {
  std::mt19937_64 rng(3);
  auto f = oracle::random_bipartite(rng);
  auto b = build(f);
  auto g = project(b.ui, b.uc, Namespace::User);
  std::stringstream s;
  write_projection(g, s);
  auto back = read_projection(s, g.node_count, Namespace::User);
  EXPECT_EQ(back.edges, g.edges);
}

TEST(Projection, ReaderRejectsInconsistentWeight) {
  std::stringstream s("0\t1\t2\t3\t7\n");
  EXPECT_THROW(read_projection(s, 2, Namespace::User), ParseError);
}

TEST(WeightedAdjacency, SymmetricSortedRows) {
  ProjectionGraph g{Namespace::User, 4, {{0, 2, 1, 1, 1.0}, {0, 1, 2, 1, 2.0}, {2, 3, 1, 3, 3.0}}};
  WeightedAdjacency adj(g);
  EXPECT_EQ(adj.degree(0), 2u);
  EXPECT_EQ(adj.neighbors(0)[0], 1u);
  EXPECT_EQ(adj.weights(0)[0], 2.0);
  EXPECT_TRUE(adj.has_edge(3, 2));
  EXPECT_FALSE(adj.has_edge(1, 3));
  EXPECT_EQ(adj.position(2, 3), 1u);
  EXPECT_EQ(adj.edge_slots(), 6u);
}
