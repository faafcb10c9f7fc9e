#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "n2vrec/error.hpp"
#include "n2vrec/graph.hpp"
#include "n2vrec/random.hpp"

namespace n2vrec {

struct WalkConfig {
  double return_p = 1.0;
  double in_out_q = 1.0;
  std::size_t walk_length = 80;
  std::size_t walks_per_node = 10;
  std::uint64_t seed = 1;
  /// Maximum number of per-edge-pair alias entries (sum of squared degrees) to precompute.
  /// Above it the sampler draws by rejection against the first-order table instead.
  std::size_t alias_budget = std::size_t{1} << 24;
};

using Walk = std::vector<std::uint32_t>;

/// Draws steps of the biased second-order walk. Moving from `cur` (arrived from `prev`) to x has
/// unnormalized probability w(cur, x) * alpha, alpha = 1/p if x == prev, 1 if x is adjacent to prev,
/// 1/q otherwise.
class SecondOrderSampler {
 public:
  SecondOrderSampler(const WeightedAdjacency& adj, double return_p, double in_out_q,
                     std::size_t alias_budget = std::size_t{1} << 24)
      : adj_(adj), inv_p_(1.0 / return_p), inv_q_(1.0 / in_out_q) {
    if (!(return_p > 0.0) || !(in_out_q > 0.0))
      throw Error(ErrorKind::InvalidArgument, "return_p and in_out_q must be positive");
    alpha_max_ = std::max({inv_p_, 1.0, inv_q_});
    const std::size_t n = adj.node_count();
    node_tables_.resize(n);
    std::size_t pair_entries = 0;
    for (std::uint32_t v = 0; v < n; ++v) {
      if (adj.degree(v) > 0) node_tables_[v] = AliasTable(adj.weights(v));
      for (std::uint32_t t : adj.neighbors(v)) pair_entries += adj.degree(t);
    }
    if (pair_entries <= alias_budget && !(inv_p_ == 1.0 && inv_q_ == 1.0)) build_edge_tables();
  }

  bool uses_edge_tables() const noexcept { return !edge_tables_.empty(); }

  /// Index (into neighbors(v)) of a weight-proportional first step.
  std::size_t first_step(std::uint32_t v, Rng& rng) const { return node_tables_[v].sample(rng); }

  /// Index (into neighbors(cur)) of the next step; `slot` is the CSR slot of the edge prev -> cur.
  std::size_t next_step(std::uint32_t prev, std::uint32_t cur, std::size_t slot, Rng& rng) const {
    if (!edge_tables_.empty()) return edge_tables_[slot].sample(rng);
    const auto nb = adj_.neighbors(cur);
    if (alpha_max_ == 1.0) return node_tables_[cur].sample(rng);
    for (;;) {
      const std::size_t k = node_tables_[cur].sample(rng);
      if (uniform01(rng) * alpha_max_ < alpha(prev, nb[k])) return k;
    }
  }

  double alpha(std::uint32_t prev, std::uint32_t x) const {
    if (x == prev) return inv_p_;
    return adj_.has_edge(prev, x) ? 1.0 : inv_q_;
  }

 private:
  void build_edge_tables() {
    edge_tables_.resize(adj_.edge_slots());
    std::vector<double> biased;
    for (std::uint32_t t = 0; t < adj_.node_count(); ++t) {
      const auto tn = adj_.neighbors(t);
      for (std::size_t k = 0; k < tn.size(); ++k) {
        const std::uint32_t v = tn[k];
        const auto vn = adj_.neighbors(v);
        const auto vw = adj_.weights(v);
        biased.resize(vn.size());
        for (std::size_t m = 0; m < vn.size(); ++m) biased[m] = vw[m] * alpha(t, vn[m]);
        edge_tables_[adj_.offset(t) + k] = AliasTable(biased);
      }
    }
  }

  const WeightedAdjacency& adj_;
  double inv_p_;
  double inv_q_;
  double alpha_max_ = 1.0;
  std::vector<AliasTable> node_tables_;
  std::vector<AliasTable> edge_tables_;
};

/// One walk from `start`; stops early only at a node with no neighbors.
inline Walk walk_from(const WeightedAdjacency& adj, const SecondOrderSampler& sampler, std::uint32_t start,
                      std::size_t length, Rng& rng) {
  Walk walk;
  if (length == 0) return walk;
  walk.reserve(length);
  walk.push_back(start);
  if (length == 1 || adj.degree(start) == 0) return walk;
  std::size_t k = sampler.first_step(start, rng);
  std::size_t slot = adj.offset(start) + k;
  walk.push_back(adj.neighbors(start)[k]);
  while (walk.size() < length) {
    const std::uint32_t prev = walk[walk.size() - 2];
    const std::uint32_t cur = walk.back();
    if (adj.degree(cur) == 0) break;
    k = sampler.next_step(prev, cur, slot, rng);
    slot = adj.offset(cur) + k;
    walk.push_back(adj.neighbors(cur)[k]);
  }
  return walk;
}

/// walks_per_node rounds; each round visits every non-isolated node once in a seeded shuffled order.
/// Each walk draws from its own stream seeded by (seed, round, start), so the output does not depend
/// on the worker count.
inline std::vector<Walk> generate_walks(const WeightedAdjacency& adj, const WalkConfig& cfg, unsigned threads = 1) {
  if (cfg.walk_length == 0 || cfg.walks_per_node == 0)
    throw Error(ErrorKind::InvalidArgument, "walk_length and walks_per_node must be positive");
  SecondOrderSampler sampler(adj, cfg.return_p, cfg.in_out_q, cfg.alias_budget);

  std::vector<std::uint32_t> starts;
  for (std::uint32_t v = 0; v < adj.node_count(); ++v)
    if (adj.degree(v) > 0) starts.push_back(v);

  struct Job {
    std::uint32_t start;
    std::size_t round;
  };
  std::vector<Job> jobs;
  jobs.reserve(starts.size() * cfg.walks_per_node);
  for (std::size_t r = 0; r < cfg.walks_per_node; ++r) {
    auto order = starts;
    Rng order_rng(mix_seed(cfg.seed, r, 0xA11CE));
    shuffle(order, order_rng);
    for (auto v : order) jobs.push_back({v, r});
  }

  std::vector<Walk> walks(jobs.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      Rng rng(mix_seed(cfg.seed, jobs[j].round + 1, jobs[j].start));
      walks[j] = walk_from(adj, sampler, jobs[j].start, cfg.walk_length, rng);
    }
  };
  threads = std::max(1u, threads);
  if (threads == 1 || jobs.size() < 2) {
    work(0, jobs.size());
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (jobs.size() + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t b = std::min(jobs.size(), t * chunk), e = std::min(jobs.size(), b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
    for (auto& th : pool) th.join();
  }
  return walks;
}

inline std::vector<Walk> generate_walks(const ProjectionGraph& graph, const WalkConfig& cfg, unsigned threads = 1) {
  if (graph.node_count == 0) throw Error(ErrorKind::InvalidArgument, "empty projection graph");
  WeightedAdjacency adj(graph);
  return generate_walks(adj, cfg, threads);
}

/// One walk per line, node indices separated by spaces.
inline void write_walks(const std::vector<Walk>& walks, std::ostream& out) {
  for (const auto& w : walks) {
    for (std::size_t i = 0; i < w.size(); ++i) out << (i ? " " : "") << w[i];
    out << '\n';
  }
}

inline void write_walks(const std::vector<Walk>& walks, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  write_walks(walks, out);
}

inline std::vector<Walk> read_walks(std::istream& in, const std::string& source = "<walks>") {
  std::vector<Walk> walks;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream fields(line);
    Walk w;
    std::string tok;
    while (fields >> tok) {
      try {
        w.push_back(static_cast<std::uint32_t>(std::stoul(tok)));
      } catch (const std::exception&) {
        throw ParseError(source, lineno, "bad node index '" + tok + "'");
      }
    }
    if (!w.empty()) walks.push_back(std::move(w));
  }
  return walks;
}

}  // namespace n2vrec
