#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "n2vrec/error.hpp"
#include "n2vrec/graph.hpp"
#include "n2vrec/random.hpp"
#include "n2vrec/rating_matrix.hpp"

namespace n2vrec {

/// Fold label per interaction (same order as the input to `split`).
struct FoldPlan {
  std::size_t k = 5;
  std::vector<int> labels;
  std::uint64_t seed = 1;

  std::size_t fold_size(std::size_t fold) const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), static_cast<int>(fold)));
  }
};

/// Uniform random k-way partition. The interactions are put in canonical order before shuffling, so
/// the plan does not depend on input order. Interactions of single-interaction users never enter a
/// test fold; a user whose interactions all land in one fold has one of them moved to the next fold.
inline FoldPlan split(std::span<const Rating> interactions, std::size_t k = 5, std::uint64_t seed = 1) {
  if (k < 2) throw Error(ErrorKind::InvalidArgument, "need at least 2 folds");
  const std::size_t n = interactions.size();
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.labels.assign(n, -1);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return interactions[a] < interactions[b]; });
  Rng rng(mix_seed(seed, 0xF01D));
  shuffle(order, rng);

  std::uint32_t max_user = 0;
  for (const auto& r : interactions) max_user = std::max(max_user, r.user + 1);
  std::vector<std::size_t> degree(max_user, 0);
  for (const auto& r : interactions) ++degree[r.user];

  std::size_t next = 0;
  for (auto idx : order)
    if (degree[interactions[idx].user] > 1) plan.labels[idx] = static_cast<int>(next++ % k);

  std::vector<std::size_t> first(max_user, n);
  std::vector<int> only(max_user, -2);  // -2 unseen, -3 mixed folds
  for (auto idx : order) {
    const auto u = interactions[idx].user;
    if (plan.labels[idx] < 0) continue;
    if (first[u] == n) first[u] = idx;
    if (only[u] == -2) only[u] = plan.labels[idx];
    else if (only[u] != plan.labels[idx]) only[u] = -3;
  }
  for (std::uint32_t u = 0; u < max_user; ++u)
    if (only[u] >= 0) plan.labels[first[u]] = static_cast<int>((static_cast<std::size_t>(only[u]) + 1) % k);
  return plan;
}

struct FoldData {
  std::vector<Rating> train;
  std::vector<Rating> test;
};

inline FoldData fold_data(std::span<const Rating> interactions, const FoldPlan& plan, std::size_t fold) {
  if (plan.labels.size() != interactions.size()) throw Error(ErrorKind::InvalidArgument, "plan does not match data");
  FoldData out;
  for (std::size_t i = 0; i < interactions.size(); ++i)
    (plan.labels[i] == static_cast<int>(fold) ? out.test : out.train).push_back(interactions[i]);
  return out;
}

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double hit_rate = 0.0;
  double arhr = 0.0;
  std::size_t users = 0;
};

/// Top-N metrics over the users with at least one test item. `lists[u]` is the ranked list of user u
/// (missing or short lists count as misses); only the first n entries are scored.
inline Metrics score(const std::vector<TopNList>& lists, std::span<const Rating> test, std::size_t n) {
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "N must be positive");
  std::uint32_t max_user = 0;
  for (const auto& r : test) max_user = std::max(max_user, r.user + 1);
  std::vector<std::vector<std::uint32_t>> truth(max_user);
  for (const auto& r : test) truth[r.user].push_back(r.item);

  Metrics m;
  for (std::uint32_t u = 0; u < max_user; ++u) {
    auto& t = truth[u];
    if (t.empty()) continue;
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    ++m.users;
    std::size_t hits = 0;
    double reciprocal = 0.0;
    if (u < lists.size()) {
      const std::size_t len = std::min(n, lists[u].size());
      for (std::size_t r = 0; r < len; ++r)
        if (std::binary_search(t.begin(), t.end(), lists[u][r].item)) {
          ++hits;
          reciprocal += 1.0 / static_cast<double>(r + 1);
        }
    }
    m.precision += static_cast<double>(hits) / static_cast<double>(n);
    m.recall += static_cast<double>(hits) / static_cast<double>(t.size());
    m.hit_rate += hits > 0 ? 1.0 : 0.0;
    m.arhr += reciprocal;
  }
  if (m.users == 0) throw Error(ErrorKind::EmptyTestSet, "no user has a test item");
  const auto users = static_cast<double>(m.users);
  m.precision /= users;
  m.recall /= users;
  m.hit_rate /= users;
  m.arhr /= users;
  return m;
}

/// Metrics per fold for several list lengths.
struct MetricsReport {
  std::vector<std::size_t> ns{5, 10, 20};
  std::size_t primary_n = 10;
  /// folds[f][j] is fold f at list length ns[j].
  std::vector<std::vector<Metrics>> folds;

  std::size_t index_of(std::size_t n) const {
    auto it = std::find(ns.begin(), ns.end(), n);
    if (it == ns.end()) throw Error(ErrorKind::InvalidArgument, "N=" + std::to_string(n) + " not in report");
    return static_cast<std::size_t>(it - ns.begin());
  }

  Metrics mean(std::size_t n) const {
    const std::size_t j = index_of(n);
    Metrics out;
    for (const auto& f : folds) {
      out.precision += f[j].precision;
      out.recall += f[j].recall;
      out.hit_rate += f[j].hit_rate;
      out.arhr += f[j].arhr;
      out.users += f[j].users;
    }
    if (!folds.empty()) {
      const auto k = static_cast<double>(folds.size());
      out.precision /= k;
      out.recall /= k;
      out.hit_rate /= k;
      out.arhr /= k;
    }
    return out;
  }
};

namespace detail {

inline std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace detail

/// `fold,n,users,precision,recall,hr,arhr`; fold is 1-based, the closing rows are the means.
inline void write_report_csv(const MetricsReport& report, std::ostream& out) {
  out << "fold,n,users,precision,recall,hr,arhr\n";
  auto row = [&](const std::string& fold, std::size_t n, const Metrics& m) {
    out << fold << ',' << n << ',' << m.users << ',' << detail::fixed(m.precision, 10) << ','
        << detail::fixed(m.recall, 10) << ',' << detail::fixed(m.hit_rate, 10) << ',' << detail::fixed(m.arhr, 10)
        << '\n';
  };
  for (std::size_t f = 0; f < report.folds.size(); ++f)
    for (std::size_t j = 0; j < report.ns.size(); ++j) row(std::to_string(f + 1), report.ns[j], report.folds[f][j]);
  for (auto n : report.ns) row("mean", n, report.mean(n));
}

inline void write_report_table(const MetricsReport& report, std::ostream& out) {
  char line[160];
  std::snprintf(line, sizeof line, "%-6s %4s %10s %10s %10s %10s\n", "fold", "N", "precision", "recall", "HR", "ARHR");
  out << line;
  auto row = [&](const std::string& fold, std::size_t n, const Metrics& m) {
    std::snprintf(line, sizeof line, "%-6s %4zu %10.4f %10.4f %10.4f %10.4f\n", fold.c_str(), n, m.precision, m.recall,
                  m.hit_rate, m.arhr);
    out << line;
  };
  for (std::size_t f = 0; f < report.folds.size(); ++f) {
    const auto j = report.index_of(report.primary_n);
    row(std::to_string(f + 1), report.primary_n, report.folds[f][j]);
  }
  for (auto n : report.ns) row("mean", n, report.mean(n));
}

inline nlohmann::json report_json(const MetricsReport& report) {
  auto metrics = [](const Metrics& m) {
    return nlohmann::json{{"users", m.users}, {"precision", m.precision}, {"recall", m.recall}, {"hr", m.hit_rate},
                          {"arhr", m.arhr}};
  };
  nlohmann::json j;
  j["n"] = report.ns;
  j["primary_n"] = report.primary_n;
  j["folds"] = nlohmann::json::array();
  for (const auto& f : report.folds) {
    nlohmann::json fold = nlohmann::json::object();
    for (std::size_t k = 0; k < report.ns.size(); ++k) fold[std::to_string(report.ns[k])] = metrics(f[k]);
    j["folds"].push_back(fold);
  }
  nlohmann::json mean = nlohmann::json::object();
  for (auto n : report.ns) mean[std::to_string(n)] = metrics(report.mean(n));
  j["mean"] = mean;
  return j;
}

inline MetricsReport report_from_json(const nlohmann::json& j) {
  MetricsReport r;
  r.ns = j.at("n").get<std::vector<std::size_t>>();
  r.primary_n = j.at("primary_n").get<std::size_t>();
  for (const auto& fold : j.at("folds")) {
    std::vector<Metrics> row;
    for (auto n : r.ns) {
      const auto& m = fold.at(std::to_string(n));
      row.push_back({m.at("precision").get<double>(), m.at("recall").get<double>(), m.at("hr").get<double>(),
                     m.at("arhr").get<double>(), m.at("users").get<std::size_t>()});
    }
    r.folds.push_back(std::move(row));
  }
  return r;
}

}  // namespace n2vrec
