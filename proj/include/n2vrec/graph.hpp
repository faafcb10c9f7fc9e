#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "n2vrec/error.hpp"
#include "n2vrec/ids.hpp"

namespace n2vrec {

/// One raw interaction record as read from a dataset file.
struct RawInteraction {
  std::string user;
  std::string item;
  double rating = 1.0;
  std::optional<std::int64_t> timestamp;
};

/// An interaction after id mapping.
struct Rating {
  std::uint32_t user = 0;
  std::uint32_t item = 0;
  double rating = 1.0;
  std::int64_t timestamp = 0;

  auto operator<=>(const Rating&) const = default;
};

struct WeightedEdge {
  std::uint32_t left = 0;
  std::uint32_t right = 0;
  double weight = 0.0;
};

/// Weighted edges between two disjoint node sets, with CSR adjacency for both sides.
class BipartiteGraph {
 public:
  BipartiteGraph() = default;

  BipartiteGraph(Namespace left_ns, Namespace right_ns, std::size_t left_count,
                 std::size_t right_count, std::vector<WeightedEdge> edges)
      : left_ns_(left_ns), right_ns_(right_ns), left_count_(left_count), right_count_(right_count),
        edges_(std::move(edges)) {
    if (left_ns_ == right_ns_) throw Error(ErrorKind::InvalidArgument, "bipartite sides share a namespace");
    std::sort(edges_.begin(), edges_.end(), [](const WeightedEdge& a, const WeightedEdge& b) {
      return a.left != b.left ? a.left < b.left : a.right < b.right;
    });
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      const auto& edge = edges_[e];
      if (edge.left >= left_count_ || edge.right >= right_count_)
        throw Error(ErrorKind::InvalidArgument, "bipartite edge endpoint out of range");
      if (!(edge.weight > 0.0)) throw Error(ErrorKind::InvalidArgument, "bipartite edge weight must be > 0");
      if (e > 0 && edges_[e - 1].left == edge.left && edges_[e - 1].right == edge.right)
        throw Error(ErrorKind::InvalidArgument, "duplicate bipartite edge");
    }
    build_csr();
  }

  Namespace left_namespace() const noexcept { return left_ns_; }
  Namespace right_namespace() const noexcept { return right_ns_; }
  std::size_t left_count() const noexcept { return left_count_; }
  std::size_t right_count() const noexcept { return right_count_; }
  const std::vector<WeightedEdge>& edges() const noexcept { return edges_; }

  bool has_namespace(Namespace ns) const noexcept { return ns == left_ns_ || ns == right_ns_; }

  std::size_t count(Namespace ns) const {
    check(ns);
    return ns == left_ns_ ? left_count_ : right_count_;
  }

  Namespace opposite(Namespace ns) const {
    check(ns);
    return ns == left_ns_ ? right_ns_ : left_ns_;
  }

  /// Nodes on the other side adjacent to node `idx` of namespace `ns`, ascending.
  std::span<const std::uint32_t> neighbors(Namespace ns, std::uint32_t idx) const {
    check(ns);
    if (ns == left_ns_) return slice(left_offsets_, left_targets_, idx);
    return slice(right_offsets_, right_targets_, idx);
  }

  double weight(std::uint32_t left, std::uint32_t right) const {
    auto it = std::lower_bound(edges_.begin(), edges_.end(), std::pair{left, right},
                               [](const WeightedEdge& e, const std::pair<std::uint32_t, std::uint32_t>& key) {
                                 return e.left != key.first ? e.left < key.first : e.right < key.second;
                               });
    if (it == edges_.end() || it->left != left || it->right != right) return 0.0;
    return it->weight;
  }

 private:
  void check(Namespace ns) const {
    if (!has_namespace(ns))
      throw Error(ErrorKind::InvalidArgument, std::string("graph has no ") + to_string(ns) + " side");
  }

  static std::span<const std::uint32_t> slice(const std::vector<std::size_t>& offsets,
                                              const std::vector<std::uint32_t>& targets, std::uint32_t idx) {
    if (idx + 1 >= offsets.size()) throw Error(ErrorKind::InvalidArgument, "node index out of range");
    return {targets.data() + offsets[idx], offsets[idx + 1] - offsets[idx]};
  }

  void build_csr() {
    left_offsets_.assign(left_count_ + 1, 0);
    right_offsets_.assign(right_count_ + 1, 0);
    for (const auto& e : edges_) {
      ++left_offsets_[e.left + 1];
      ++right_offsets_[e.right + 1];
    }
    for (std::size_t i = 0; i < left_count_; ++i) left_offsets_[i + 1] += left_offsets_[i];
    for (std::size_t i = 0; i < right_count_; ++i) right_offsets_[i + 1] += right_offsets_[i];
    left_targets_.resize(edges_.size());
    right_targets_.resize(edges_.size());
    std::vector<std::size_t> lpos(left_offsets_.begin(), left_offsets_.end() - 1);
    std::vector<std::size_t> rpos(right_offsets_.begin(), right_offsets_.end() - 1);
    // edges are sorted by (left, right), so both target lists come out ascending
    for (const auto& e : edges_) {
      left_targets_[lpos[e.left]++] = e.right;
      right_targets_[rpos[e.right]++] = e.left;
    }
  }

  Namespace left_ns_ = Namespace::User;
  Namespace right_ns_ = Namespace::Item;
  std::size_t left_count_ = 0;
  std::size_t right_count_ = 0;
  std::vector<WeightedEdge> edges_;
  std::vector<std::size_t> left_offsets_{0}, right_offsets_{0};
  std::vector<std::uint32_t> left_targets_, right_targets_;
};

struct UserItemNetwork {
  BipartiteGraph graph;
  IdMap users;
  IdMap items;
};

/// User-item graph over already-mapped ids; repeated (user, item) pairs aggregate into the weight.
inline BipartiteGraph build_user_item(std::span<const Rating> interactions, std::size_t user_count,
                                      std::size_t item_count) {
  if (interactions.empty()) throw Error(ErrorKind::DatasetEmpty, "no interactions");
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  pairs.reserve(interactions.size());
  for (const auto& r : interactions) pairs.emplace_back(r.user, r.item);
  std::sort(pairs.begin(), pairs.end());
  std::vector<WeightedEdge> edges;
  for (std::size_t i = 0; i < pairs.size();) {
    std::size_t j = i;
    while (j < pairs.size() && pairs[j] == pairs[i]) ++j;
    edges.push_back({pairs[i].first, pairs[i].second, static_cast<double>(j - i)});
    i = j;
  }
  return BipartiteGraph(Namespace::User, Namespace::Item, user_count, item_count, std::move(edges));
}

inline UserItemNetwork build_user_item(std::span<const RawInteraction> interactions) {
  if (interactions.empty()) throw Error(ErrorKind::DatasetEmpty, "no interactions");
  UserItemNetwork net;
  std::vector<Rating> mapped;
  mapped.reserve(interactions.size());
  for (const auto& r : interactions) {
    mapped.push_back({net.users.intern(r.user), net.items.intern(r.item), r.rating, r.timestamp.value_or(0)});
  }
  net.graph = build_user_item(mapped, net.users.size(), net.items.size());
  return net;
}

/// Item-category membership graph, weight 1 per (item, category) pair.
inline BipartiteGraph build_item_category(std::span<const std::pair<std::uint32_t, std::uint32_t>> memberships,
                                          std::size_t item_count, std::size_t category_count) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs(memberships.begin(), memberships.end());
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  std::vector<WeightedEdge> edges;
  edges.reserve(pairs.size());
  for (auto [item, cat] : pairs) edges.push_back({item, cat, 1.0});
  return BipartiteGraph(Namespace::Item, Namespace::Category, item_count, category_count, std::move(edges));
}

/// weight(u, c) = sum over items v of weight(u, v) * [v in c]. Items the user touched that carry no
/// category are appended (once each, ascending) to `uncategorized` when given.
inline BipartiteGraph build_user_category(const BipartiteGraph& user_item, const BipartiteGraph& item_category,
                                          std::vector<std::uint32_t>* uncategorized = nullptr) {
  if (user_item.left_namespace() != Namespace::User || user_item.right_namespace() != Namespace::Item)
    throw Error(ErrorKind::InvalidArgument, "expected a user-item graph");
  if (item_category.left_namespace() != Namespace::Item || item_category.right_namespace() != Namespace::Category)
    throw Error(ErrorKind::InvalidArgument, "expected an item-category graph");
  if (user_item.right_count() != item_category.left_count())
    throw Error(ErrorKind::InvalidArgument, "user-item and item-category graphs disagree on item count");

  const std::size_t cats = item_category.right_count();
  std::vector<double> acc(cats, 0.0);
  std::vector<std::uint32_t> touched;
  std::vector<char> flagged(user_item.right_count(), 0);
  std::vector<WeightedEdge> edges;
  for (std::uint32_t u = 0; u < user_item.left_count(); ++u) {
    for (std::uint32_t v : user_item.neighbors(Namespace::User, u)) {
      const double w = user_item.weight(u, v);
      auto item_cats = item_category.neighbors(Namespace::Item, v);
      if (item_cats.empty()) flagged[v] = 1;
      for (std::uint32_t c : item_cats) {
        if (acc[c] == 0.0) touched.push_back(c);
        acc[c] += w;
      }
    }
    std::sort(touched.begin(), touched.end());
    for (std::uint32_t c : touched) {
      edges.push_back({u, c, acc[c]});
      acc[c] = 0.0;
    }
    touched.clear();
  }
  if (uncategorized) {
    for (std::uint32_t v = 0; v < flagged.size(); ++v)
      if (flagged[v]) uncategorized->push_back(v);
  }
  return BipartiteGraph(Namespace::User, Namespace::Category, user_item.left_count(), cats, std::move(edges));
}

struct ProjectionEdge {
  std::uint32_t i = 0;  // i < j
  std::uint32_t j = 0;
  std::uint32_t ck = 0;
  std::uint32_t ca = 0;
  double w = 0.0;

  bool operator==(const ProjectionEdge&) const = default;
};

/// Undirected one-mode network; edges sorted by (i, j) with i < j. Isolated nodes are part of
/// `node_count` but have no edges.
struct ProjectionGraph {
  Namespace ns = Namespace::User;
  std::size_t node_count = 0;
  std::vector<ProjectionEdge> edges;
};

struct ProjectionOptions {
  /// When false, ca is 1 for every pair with ck > 0 (projection from interactions alone).
  bool category_enrichment = true;
  /// Lower bound applied to ca for pairs with ck > 0; 0 leaves uncategorized pairs edgeless.
  std::uint32_t uncategorized_ca_floor = 0;
};

namespace detail {

/// Counts, for a fixed node i, the common neighbors shared with every j > i. Work per node is the
/// number of wedges i - o - j, so a full sweep is linear in the sum of squared degrees.
class CommonNeighborCounter {
 public:
  CommonNeighborCounter(const BipartiteGraph& g, Namespace side)
      : g_(g), side_(side), other_(g.opposite(side)), counts_(g.count(side), 0) {}

  void count(std::uint32_t i) {
    for (std::uint32_t j : touched_) counts_[j] = 0;
    touched_.clear();
    for (std::uint32_t o : g_.neighbors(side_, i)) {
      auto back = g_.neighbors(other_, o);
      auto first = std::upper_bound(back.begin(), back.end(), i);
      for (auto it = first; it != back.end(); ++it) {
        if (counts_[*it]++ == 0) touched_.push_back(*it);
      }
    }
    std::sort(touched_.begin(), touched_.end());
  }

  std::span<const std::uint32_t> touched() const noexcept { return touched_; }
  std::uint32_t operator[](std::uint32_t j) const noexcept { return counts_[j]; }

 private:
  const BipartiteGraph& g_;
  Namespace side_;
  Namespace other_;
  std::vector<std::uint32_t> counts_;
  std::vector<std::uint32_t> touched_;
};

}  // namespace detail

/// Category-enriched one-mode projection onto `side`: w(i, j) = ck(i, j) * ca(i, j), where ck counts
/// common neighbors in `primary` and ca common neighbors in `category`. Neighbor sets are unweighted.
inline ProjectionGraph project(const BipartiteGraph& primary, const BipartiteGraph& category, Namespace side,
                               const ProjectionOptions& options = {}) {
  if (!primary.has_namespace(side))
    throw Error(ErrorKind::InvalidArgument, "primary graph lacks the projection side");
  ProjectionGraph out;
  out.ns = side;
  out.node_count = primary.count(side);

  std::optional<detail::CommonNeighborCounter> cat_counter;
  if (options.category_enrichment) {
    if (!category.has_namespace(side))
      throw Error(ErrorKind::InvalidArgument, "category graph lacks the projection side");
    if (category.count(side) != out.node_count)
      throw Error(ErrorKind::InvalidArgument, "primary and category graphs disagree on node count");
    cat_counter.emplace(category, side);
  }
  detail::CommonNeighborCounter ck_counter(primary, side);

  for (std::uint32_t i = 0; i < out.node_count; ++i) {
    ck_counter.count(i);
    if (ck_counter.touched().empty()) continue;
    if (cat_counter) cat_counter->count(i);
    for (std::uint32_t j : ck_counter.touched()) {
      const std::uint32_t ck = ck_counter[j];
      std::uint32_t ca = cat_counter ? (*cat_counter)[j] : 1u;
      ca = std::max(ca, options.uncategorized_ca_floor);
      if (ca == 0) continue;
      out.edges.push_back({i, j, ck, ca, static_cast<double>(ck) * static_cast<double>(ca)});
    }
  }
  return out;
}

/// Projection without category enrichment (ca = 1 wherever ck > 0).
inline ProjectionGraph project(const BipartiteGraph& primary, Namespace side) {
  ProjectionOptions options;
  options.category_enrichment = false;
  return project(primary, primary, side, options);
}

/// Symmetric CSR view of a projection graph, neighbors ascending.
class WeightedAdjacency {
 public:
  WeightedAdjacency() = default;

  explicit WeightedAdjacency(const ProjectionGraph& g) : offsets_(g.node_count + 1, 0) {
    for (const auto& e : g.edges) {
      ++offsets_[e.i + 1];
      ++offsets_[e.j + 1];
    }
    for (std::size_t v = 0; v < g.node_count; ++v) offsets_[v + 1] += offsets_[v];
    targets_.resize(offsets_.back());
    weights_.resize(offsets_.back());
    std::vector<std::size_t> pos(offsets_.begin(), offsets_.end() - 1);
    auto edges = g.edges;
    std::sort(edges.begin(), edges.end(), [](const auto& a, const auto& b) {
      return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
    // with edges in (i, j) order every row receives its entries in ascending neighbor order
    for (const auto& e : edges) {
      targets_[pos[e.i]] = e.j;
      weights_[pos[e.i]++] = e.w;
      targets_[pos[e.j]] = e.i;
      weights_[pos[e.j]++] = e.w;
    }
  }

  std::size_t node_count() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t degree(std::uint32_t v) const { return offsets_[v + 1] - offsets_[v]; }
  std::size_t offset(std::uint32_t v) const { return offsets_[v]; }
  std::size_t edge_slots() const noexcept { return targets_.size(); }

  std::span<const std::uint32_t> neighbors(std::uint32_t v) const {
    return {targets_.data() + offsets_[v], degree(v)};
  }
  std::span<const double> weights(std::uint32_t v) const { return {weights_.data() + offsets_[v], degree(v)}; }

  bool has_edge(std::uint32_t u, std::uint32_t v) const {
    auto nb = neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), v);
  }

  /// Position of v within u's neighbor list, or degree(u) if absent.
  std::size_t position(std::uint32_t u, std::uint32_t v) const {
    auto nb = neighbors(u);
    auto it = std::lower_bound(nb.begin(), nb.end(), v);
    return (it != nb.end() && *it == v) ? static_cast<std::size_t>(it - nb.begin()) : nb.size();
  }

 private:
  std::vector<std::size_t> offsets_{0};
  std::vector<std::uint32_t> targets_;
  std::vector<double> weights_;
};

/// Edge list text: `i<TAB>j<TAB>ck<TAB>ca<TAB>w`, one undirected edge per line.
inline void write_projection(const ProjectionGraph& g, std::ostream& out) {
  for (const auto& e : g.edges) out << e.i << '\t' << e.j << '\t' << e.ck << '\t' << e.ca << '\t' << e.ck * static_cast<std::uint64_t>(e.ca) << '\n';
}

inline void write_projection(const ProjectionGraph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  write_projection(g, out);
}

inline ProjectionGraph read_projection(std::istream& in, std::size_t node_count, Namespace ns,
                                       const std::string& source = "<projection>") {
  ProjectionGraph g;
  g.ns = ns;
  g.node_count = node_count;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream fields(line);
    ProjectionEdge e;
    std::uint64_t w = 0;
    if (!(fields >> e.i >> e.j >> e.ck >> e.ca >> w)) throw ParseError(source, lineno, "expected i j ck ca w");
    if (e.i >= e.j || e.j >= node_count) throw ParseError(source, lineno, "edge endpoints out of order or range");
    if (w != e.ck * static_cast<std::uint64_t>(e.ca)) throw ParseError(source, lineno, "w != ck * ca");
    e.w = static_cast<double>(w);
    g.edges.push_back(e);
  }
  std::sort(g.edges.begin(), g.edges.end(), [](const auto& a, const auto& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  return g;
}

inline ProjectionGraph read_projection(const std::string& path, std::size_t node_count, Namespace ns) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path);
  return read_projection(in, node_count, ns, path);
}

}  // namespace n2vrec
