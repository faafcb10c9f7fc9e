#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "n2vrec/clustering.hpp"
#include "n2vrec/error.hpp"
#include "n2vrec/graph.hpp"
#include "n2vrec/ids.hpp"
#include "n2vrec/rating_matrix.hpp"
#include "n2vrec/recommenders.hpp"

namespace n2vrec {

/// Interaction counts between user clusters and item clusters.
class ClusterBipartite {
 public:
  ClusterBipartite() = default;

  ClusterBipartite(std::span<const Rating> interactions, const ClusterModel& users, const ClusterModel& items)
      : user_clusters_(users.k), item_clusters_(items.k), weights_(users.k * items.k, 0) {
    for (const auto& r : interactions) {
      if (r.user >= users.assignments.size() || r.item >= items.assignments.size())
        throw Error(ErrorKind::InvalidArgument, "interaction outside the clustered node range");
      ++weights_[static_cast<std::size_t>(users.assignments[r.user]) * item_clusters_ +
                 static_cast<std::size_t>(items.assignments[r.item])];
    }
  }

  std::size_t user_clusters() const noexcept { return user_clusters_; }
  std::size_t item_clusters() const noexcept { return item_clusters_; }
  std::uint64_t weight(std::size_t user_cluster, std::size_t item_cluster) const {
    return weights_[user_cluster * item_clusters_ + item_cluster];
  }
  std::uint64_t total() const { return std::accumulate(weights_.begin(), weights_.end(), std::uint64_t{0}); }

  /// Summed weight of an item cluster over all user clusters.
  std::uint64_t item_cluster_weight(std::size_t item_cluster) const {
    std::uint64_t s = 0;
    for (std::size_t u = 0; u < user_clusters_; ++u) s += weight(u, item_cluster);
    return s;
  }

 private:
  std::size_t user_clusters_ = 0;
  std::size_t item_clusters_ = 0;
  std::vector<std::uint64_t> weights_;
};

/// Splits the item clusters into two classes by 1-D k-means (k = 2) on their weights to
/// `user_cluster` and returns the class with the larger mean, ascending. The 1-D optimum is a
/// contiguous split of the sorted weights, so all splits are tried. Equal weights form one class.
/// With no weight at all, returns the item cluster with the most interactions overall.
inline std::vector<int> match_item_clusters(const ClusterBipartite& cb, std::size_t user_cluster) {
  const std::size_t m = cb.item_clusters();
  if (m == 0) throw Error(ErrorKind::InvalidArgument, "no item clusters");
  if (user_cluster >= cb.user_clusters()) throw Error(ErrorKind::InvalidArgument, "unknown user cluster");
  if (m == 1) return {0};

  std::vector<std::pair<double, int>> w(m);
  for (std::size_t i = 0; i < m; ++i) w[i] = {static_cast<double>(cb.weight(user_cluster, i)), static_cast<int>(i)};
  if (std::all_of(w.begin(), w.end(), [](const auto& x) { return x.first == 0.0; })) {
    int best = 0;
    for (std::size_t i = 1; i < m; ++i)
      if (cb.item_cluster_weight(i) > cb.item_cluster_weight(static_cast<std::size_t>(best))) best = static_cast<int>(i);
    return {best};
  }
  std::sort(w.begin(), w.end());
  std::vector<int> out;
  if (w.front().first == w.back().first) {
    for (const auto& x : w) out.push_back(x.second);
    std::sort(out.begin(), out.end());
    return out;
  }

  std::vector<double> prefix(m + 1, 0.0), prefix_sq(m + 1, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    prefix[i + 1] = prefix[i] + w[i].first;
    prefix_sq[i + 1] = prefix_sq[i] + w[i].first * w[i].first;
  }
  auto sse = [&](std::size_t a, std::size_t b) {
    const double s = prefix[b] - prefix[a], n = static_cast<double>(b - a);
    return (prefix_sq[b] - prefix_sq[a]) - s * s / n;
  };
  std::size_t split = 1;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t s = 1; s < m; ++s) {
    if (w[s - 1].first == w[s].first) continue;  // equal weights stay in the same class
    const double cost = sse(0, s) + sse(s, m);
    if (cost < best) {
      best = cost;
      split = s;
    }
  }
  for (std::size_t i = split; i < m; ++i) out.push_back(w[i].second);
  std::sort(out.begin(), out.end());
  return out;
}

struct TwoPhaseOptions {
  RecommenderParams recommender;
  std::size_t n = 10;
  bool implicit = false;
  /// Fill short lists from the remaining item clusters by descending weight.
  bool pad_from_other_clusters = true;
};

struct TwoPhaseResult {
  /// One list per user index.
  std::vector<TopNList> lists;
  ClusterBipartite bipartite;
  /// Matched item clusters per user cluster (empty for the cold cluster).
  std::vector<std::vector<int>> matched;
};

namespace detail {

/// Training popularity ranking over all items: count descending, index ascending.
inline std::vector<std::uint32_t> global_popularity(std::span<const Rating> train, std::size_t item_count) {
  std::vector<std::uint64_t> counts(item_count, 0);
  for (const auto& r : train) ++counts[r.item];
  std::vector<std::uint32_t> order(item_count);
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) { return counts[a] > counts[b]; });
  return order;
}

inline void append_unseen(TopNList& list, std::size_t n, std::span<const std::uint32_t> ranking,
                          const std::vector<char>& seen, std::vector<char>& listed) {
  for (auto item : ranking) {
    if (list.size() >= n) return;
    if (seen[item] || listed[item]) continue;
    listed[item] = 1;
    list.push_back({item, 0.0});
  }
}

}  // namespace detail

/// Cluster-level matching followed by a base recommender inside each (user cluster, matched item
/// clusters) block. Users of the cold cluster get global Popular. Ratings are the training fold.
inline TwoPhaseResult two_phase(std::span<const Rating> train, std::size_t user_count, std::size_t item_count,
                                const ClusterModel& user_clusters, const ClusterModel& item_clusters,
                                const TwoPhaseOptions& options) {
  if (user_clusters.assignments.size() != user_count || item_clusters.assignments.size() != item_count)
    throw Error(ErrorKind::InvalidArgument, "cluster models do not cover the dataset");
  TwoPhaseResult result;
  result.lists.assign(user_count, {});
  result.bipartite = ClusterBipartite(train, user_clusters, item_clusters);
  result.matched.assign(user_clusters.k, {});

  std::vector<std::vector<std::uint32_t>> members(user_clusters.k), cluster_items(item_clusters.k);
  for (std::uint32_t u = 0; u < user_count; ++u) members[user_clusters.assignments[u]].push_back(u);
  for (std::uint32_t i = 0; i < item_count; ++i) cluster_items[item_clusters.assignments[i]].push_back(i);

  const auto popularity = detail::global_popularity(train, item_count);
  std::vector<std::vector<std::uint32_t>> seen_by(user_count);
  for (const auto& r : train) seen_by[r.user].push_back(r.item);

  // per item cluster, its items in global popularity order
  std::vector<std::vector<std::uint32_t>> cluster_ranking(item_clusters.k);
  for (auto item : popularity) cluster_ranking[item_clusters.assignments[item]].push_back(item);

  std::vector<char> seen(item_count, 0), listed(item_count, 0);
  auto finish = [&](std::uint32_t user, TopNList& list, const std::vector<int>& cluster_order) {
    for (auto i : seen_by[user]) seen[i] = 1;
    for (const auto& s : list) listed[s.item] = 1;
    for (int c : cluster_order) detail::append_unseen(list, options.n, cluster_ranking[c], seen, listed);
    for (auto i : seen_by[user]) seen[i] = 0;
    for (const auto& s : list) listed[s.item] = 0;
  };

  for (std::size_t uc = 0; uc < user_clusters.k; ++uc) {
    if (members[uc].empty()) continue;
    if (user_clusters.cold_cluster && static_cast<int>(uc) == *user_clusters.cold_cluster) {
      for (auto u : members[uc]) {
        TopNList list;
        for (auto i : seen_by[u]) seen[i] = 1;
        detail::append_unseen(list, options.n, popularity, seen, listed);
        for (auto i : seen_by[u]) seen[i] = 0;
        for (const auto& s : list) listed[s.item] = 0;
        result.lists[u] = std::move(list);
      }
      continue;
    }
    const auto matched = match_item_clusters(result.bipartite, uc);
    result.matched[uc] = matched;
    std::vector<std::uint32_t> block_items;
    for (int c : matched) block_items.insert(block_items.end(), cluster_items[c].begin(), cluster_items[c].end());

    std::vector<int> padding;
    if (options.pad_from_other_clusters) {
      for (std::size_t c = 0; c < item_clusters.k; ++c)
        if (!std::binary_search(matched.begin(), matched.end(), static_cast<int>(c))) padding.push_back(static_cast<int>(c));
      std::stable_sort(padding.begin(), padding.end(), [&](int a, int b) {
        return result.bipartite.weight(uc, a) > result.bipartite.weight(uc, b);
      });
    }

    const RatingMatrix block(members[uc], std::move(block_items), train, options.implicit);
    auto recommender = make_recommender(options.recommender);
    recommender->fit(block);
    for (auto u : members[uc]) {
      auto list = recommender->recommend(*block.local_user(u), options.n);
      finish(u, list, padding);
      result.lists[u] = std::move(list);
    }
  }
  return result;
}

/// The unclustered model: one block of all users and all items.
inline std::vector<TopNList> recommend_all(std::span<const Rating> train, std::size_t user_count,
                                           std::size_t item_count, const TwoPhaseOptions& options) {
  std::vector<std::uint32_t> users(user_count), items(item_count);
  std::iota(users.begin(), users.end(), 0u);
  std::iota(items.begin(), items.end(), 0u);
  const RatingMatrix block(std::move(users), std::move(items), train, options.implicit);
  auto recommender = make_recommender(options.recommender);
  recommender->fit(block);
  std::vector<TopNList> lists(user_count);
  for (std::uint32_t u = 0; u < user_count; ++u) lists[u] = recommender->recommend(u, options.n);
  return lists;
}

/// CSV `user_id,rank,item_id,score` with external ids and 1-based ranks.
inline void write_recommendations(const std::vector<TopNList>& lists, const IdMap& users, const IdMap& items,
                                  std::ostream& out) {
  out << "user_id,rank,item_id,score\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::uint32_t u = 0; u < lists.size(); ++u)
    for (std::size_t r = 0; r < lists[u].size(); ++r)
      out << users.external(u) << ',' << r + 1 << ',' << items.external(lists[u][r].item) << ',' << lists[u][r].score
          << '\n';
}

inline void write_recommendations(const std::vector<TopNList>& lists, const IdMap& users, const IdMap& items,
                                  const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  write_recommendations(lists, users, items, out);
}

}  // namespace n2vrec
