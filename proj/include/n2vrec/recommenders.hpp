#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "n2vrec/error.hpp"
#include "n2vrec/random.hpp"
#include "n2vrec/rating_matrix.hpp"

namespace n2vrec {

/// A base recommender working inside one rating block: fit once, then rank unseen block items per user.
class BlockRecommender {
 public:
  virtual ~BlockRecommender() = default;
  virtual void fit(const RatingMatrix& block) = 0;
  /// Up to n unseen items for a local user of the fitted block.
  virtual TopNList recommend(std::uint32_t local_user, std::size_t n) const = 0;
};

/// Items ordered by how many block users interacted with them.
class PopularRecommender : public BlockRecommender {
 public:
  void fit(const RatingMatrix& block) override {
    block_ = &block;
    ranking_.resize(block.item_count());
    for (std::uint32_t i = 0; i < block.item_count(); ++i) ranking_[i] = i;
    std::stable_sort(ranking_.begin(), ranking_.end(), [&](std::uint32_t a, std::uint32_t b) {
      return block.column(a).size() > block.column(b).size();
    });
  }

  TopNList recommend(std::uint32_t local_user, std::size_t n) const override {
    TopNList out;
    extend(local_user, n, out);
    return out;
  }

  /// Appends popular unseen items not already in `list` until it holds n entries.
  void extend(std::uint32_t local_user, std::size_t n, TopNList& list) const {
    const auto seen = block_->row(local_user);
    auto rated = [&](std::uint32_t i) {
      return std::binary_search(seen.begin(), seen.end(), RatingMatrix::Entry{i, 0.0},
                                [](const auto& a, const auto& b) { return a.index < b.index; });
    };
    for (std::uint32_t i : ranking_) {
      if (list.size() >= n) break;
      const std::uint32_t global = block_->items()[i];
      if (rated(i)) continue;
      if (std::any_of(list.begin(), list.end(), [&](const ScoredItem& s) { return s.item == global; })) continue;
      list.push_back({global, static_cast<double>(block_->column(i).size())});
    }
  }

 private:
  const RatingMatrix* block_ = nullptr;
  std::vector<std::uint32_t> ranking_;
};

namespace detail {

/// Per-row means (users) of an explicit block; zero for implicit blocks.
inline std::vector<double> user_means(const RatingMatrix& block) {
  std::vector<double> means(block.user_count(), 0.0);
  if (block.implicit()) return means;
  for (std::uint32_t u = 0; u < block.user_count(); ++u) {
    const auto row = block.row(u);
    double s = 0.0;
    for (const auto& e : row) s += e.rating;
    means[u] = row.empty() ? 0.0 : s / static_cast<double>(row.size());
  }
  return means;
}

inline std::vector<double> item_means(const RatingMatrix& block) {
  std::vector<double> means(block.item_count(), 0.0);
  if (block.implicit()) return means;
  for (std::uint32_t i = 0; i < block.item_count(); ++i) {
    const auto col = block.column(i);
    double s = 0.0;
    for (const auto& e : col) s += e.rating;
    means[i] = col.empty() ? 0.0 : s / static_cast<double>(col.size());
  }
  return means;
}

}  // namespace detail

/// User-based collaborative filtering. Similarity is the cosine of mean-centered user rows (plain
/// rows for implicit data). With S the set of the top neighbors (positive similarity only), an item's
/// score is mean_u + sum_{v in S} sim(u, v) (r_vi - mean_v) / sum_{v in S} |sim(u, v)|, where
/// neighbors who did not rate the item contribute zero. Candidates are items rated by some neighbor.
class UbcfRecommender : public BlockRecommender {
 public:
  explicit UbcfRecommender(std::size_t neighborhood_size = 25) : neighborhood_(neighborhood_size) {}

  void fit(const RatingMatrix& block) override {
    block_ = &block;
    means_ = detail::user_means(block);
    norms_.assign(block.user_count(), 0.0);
    for (std::uint32_t u = 0; u < block.user_count(); ++u) {
      double s = 0.0;
      for (const auto& e : block.row(u)) s += (e.rating - means_[u]) * (e.rating - means_[u]);
      norms_[u] = std::sqrt(s);
    }
    popular_.fit(block);
  }

  TopNList recommend(std::uint32_t u, std::size_t n) const override {
    const RatingMatrix& b = *block_;
    if (b.row(u).empty() || norms_[u] == 0.0) return popular_.recommend(u, n);

    std::vector<double> target(b.item_count(), 0.0);
    std::vector<char> seen(b.item_count(), 0);
    for (const auto& e : b.row(u)) {
      target[e.index] = e.rating - means_[u];
      seen[e.index] = 1;
    }
    std::vector<std::pair<std::uint32_t, double>> sims;
    for (std::uint32_t v = 0; v < b.user_count(); ++v) {
      if (v == u || norms_[v] == 0.0) continue;
      double dot = 0.0;
      for (const auto& e : b.row(v)) dot += target[e.index] * (e.rating - means_[v]);
      const double sim = dot / (norms_[u] * norms_[v]);
      if (sim > 0.0) sims.emplace_back(v, sim);
    }
    if (sims.empty()) return popular_.recommend(u, n);
    const std::size_t k = std::min(neighborhood_, sims.size());
    std::partial_sort(sims.begin(), sims.begin() + static_cast<std::ptrdiff_t>(k), sims.end(),
                      [](const auto& a, const auto& c) { return a.second != c.second ? a.second > c.second : a.first < c.first; });
    sims.resize(k);

    std::vector<double> num(b.item_count(), 0.0);
    std::vector<char> reached(b.item_count(), 0);
    double total = 0.0;
    for (const auto& [v, sim] : sims) {
      total += std::abs(sim);
      for (const auto& e : b.row(v)) {
        if (seen[e.index]) continue;
        num[e.index] += sim * (e.rating - means_[v]);
        reached[e.index] = 1;
      }
    }
    std::vector<std::pair<std::uint32_t, double>> candidates;
    for (std::uint32_t i = 0; i < b.item_count(); ++i)
      if (reached[i]) candidates.emplace_back(i, means_[u] + num[i] / total);
    auto list = select_top_n(std::move(candidates), n, b);
    popular_.extend(u, n, list);
    return list;
  }

 private:
  std::size_t neighborhood_;
  const RatingMatrix* block_ = nullptr;
  std::vector<double> means_;
  std::vector<double> norms_;
  PopularRecommender popular_;
};

/// Item-based collaborative filtering. Item similarity is the cosine of mean-centered item columns
/// (plain columns for implicit data); a candidate's score is the similarity-weighted sum of the user's
/// ratings over the candidate's k most similar (positively similar) items.
class IbcfRecommender : public BlockRecommender {
 public:
  explicit IbcfRecommender(std::size_t item_neighbors = 30) : k_(item_neighbors) {}

  void fit(const RatingMatrix& block) override {
    block_ = &block;
    const std::size_t m = block.item_count();
    const auto means = detail::item_means(block);
    Eigen::MatrixXd dot = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    std::vector<double> centered;
    for (std::uint32_t u = 0; u < block.user_count(); ++u) {
      const auto row = block.row(u);
      centered.resize(row.size());
      for (std::size_t a = 0; a < row.size(); ++a) centered[a] = row[a].rating - means[row[a].index];
      for (std::size_t a = 0; a < row.size(); ++a)
        for (std::size_t c = a; c < row.size(); ++c) dot(row[a].index, row[c].index) += centered[a] * centered[c];
    }
    neighbors_.assign(m, {});
    std::vector<std::pair<std::uint32_t, double>> cand;
    for (std::uint32_t i = 0; i < m; ++i) {
      cand.clear();
      const double ni = std::sqrt(dot(i, i));
      if (ni == 0.0) continue;
      for (std::uint32_t j = 0; j < m; ++j) {
        if (j == i) continue;
        const double nj = std::sqrt(dot(j, j));
        if (nj == 0.0) continue;
        const double sim = (i < j ? dot(i, j) : dot(j, i)) / (ni * nj);
        if (sim > 0.0) cand.emplace_back(j, sim);
      }
      const std::size_t keep = std::min(k_, cand.size());
      std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(keep), cand.end(),
                        [](const auto& a, const auto& c) { return a.second != c.second ? a.second > c.second : a.first < c.first; });
      neighbors_[i].assign(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(keep));
    }
    popular_.fit(block);
  }

  TopNList recommend(std::uint32_t u, std::size_t n) const override {
    const RatingMatrix& b = *block_;
    if (b.row(u).empty()) return popular_.recommend(u, n);
    std::vector<double> rating(b.item_count(), 0.0);
    std::vector<char> seen(b.item_count(), 0);
    for (const auto& e : b.row(u)) {
      rating[e.index] = e.rating;
      seen[e.index] = 1;
    }
    std::vector<std::pair<std::uint32_t, double>> candidates;
    for (std::uint32_t c = 0; c < b.item_count(); ++c) {
      if (seen[c]) continue;
      double score = 0.0;
      bool any = false;
      for (const auto& [j, sim] : neighbors_[c])
        if (seen[j]) {
          score += sim * rating[j];
          any = true;
        }
      if (any) candidates.emplace_back(c, score);
    }
    auto list = select_top_n(std::move(candidates), n, b);
    popular_.extend(u, n, list);
    return list;
  }

 private:
  std::size_t k_;
  const RatingMatrix* block_ = nullptr;
  std::vector<std::vector<std::pair<std::uint32_t, double>>> neighbors_;
  PopularRecommender popular_;
};

struct NmfOptions {
  std::size_t rank = 40;
  std::size_t max_iterations = 200;
  /// Stop once the relative decrease of the masked objective falls below this.
  double tolerance = 1e-5;
  std::uint64_t seed = 1;
};

struct NmfModel {
  Eigen::MatrixXd W;  // users x rank
  Eigen::MatrixXd H;  // rank x items
  /// Masked squared error before the first update, then after each iteration.
  std::vector<double> objective;
  bool converged = false;

  double predict(std::uint32_t u, std::uint32_t i) const { return W.row(u).dot(H.col(i)); }
};

/// Non-negative factorization R ~ W H fitted to the observed entries only, with masked
/// multiplicative updates (unrated cells are missing, not zeros). The rank is clamped to
/// min(users, items). Ratings must be non-negative.
inline NmfModel fit_nmf(const RatingMatrix& block, const NmfOptions& options = {}) {
  const auto nu = static_cast<Eigen::Index>(block.user_count());
  const auto ni = static_cast<Eigen::Index>(block.item_count());
  NmfModel model;
  const auto rank = static_cast<Eigen::Index>(
      std::max<std::size_t>(1, std::min({options.rank, block.user_count(), block.item_count()})));
  if (nu == 0 || ni == 0) return model;

  double mean = 0.0;
  for (std::uint32_t u = 0; u < block.user_count(); ++u)
    for (const auto& e : block.row(u)) {
      if (e.rating < 0.0) throw Error(ErrorKind::InvalidArgument, "NMF needs non-negative ratings");
      mean += e.rating;
    }
  mean = block.nnz() ? mean / static_cast<double>(block.nnz()) : 1.0;
  const double scale = std::sqrt(std::max(mean, 1e-12) / static_cast<double>(rank));
  Rng rng(mix_seed(options.seed, 0x4E4D46));
  model.W.resize(nu, rank);
  model.H.resize(rank, ni);
  for (Eigen::Index a = 0; a < model.W.size(); ++a) model.W.data()[a] = scale * (0.5 + uniform01(rng));
  for (Eigen::Index a = 0; a < model.H.size(); ++a) model.H.data()[a] = scale * (0.5 + uniform01(rng));

  auto objective = [&] {
    double err = 0.0;
    for (std::uint32_t u = 0; u < block.user_count(); ++u)
      for (const auto& e : block.row(u)) {
        const double r = e.rating - model.predict(u, e.index);
        err += r * r;
      }
    return err;
  };
  model.objective.push_back(objective());

  Eigen::MatrixXd num, den;
  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    num = Eigen::MatrixXd::Zero(nu, rank);
    den = Eigen::MatrixXd::Zero(nu, rank);
    for (std::uint32_t u = 0; u < block.user_count(); ++u)
      for (const auto& e : block.row(u)) {
        const double pred = model.predict(u, e.index);
        num.row(u) += e.rating * model.H.col(e.index).transpose();
        den.row(u) += pred * model.H.col(e.index).transpose();
      }
    for (Eigen::Index a = 0; a < model.W.size(); ++a)
      if (den.data()[a] > 0.0) model.W.data()[a] *= num.data()[a] / den.data()[a];

    num = Eigen::MatrixXd::Zero(rank, ni);
    den = Eigen::MatrixXd::Zero(rank, ni);
    for (std::uint32_t u = 0; u < block.user_count(); ++u)
      for (const auto& e : block.row(u)) {
        const double pred = model.predict(u, e.index);
        num.col(e.index) += e.rating * model.W.row(u).transpose();
        den.col(e.index) += pred * model.W.row(u).transpose();
      }
    for (Eigen::Index a = 0; a < model.H.size(); ++a)
      if (den.data()[a] > 0.0) model.H.data()[a] *= num.data()[a] / den.data()[a];

    const double prev = model.objective.back();
    model.objective.push_back(objective());
    if (prev - model.objective.back() <= options.tolerance * std::max(prev, 1e-300)) {
      model.converged = true;
      break;
    }
  }
  return model;
}

class NmfRecommender : public BlockRecommender {
 public:
  explicit NmfRecommender(NmfOptions options = {}) : options_(options) {}

  void fit(const RatingMatrix& block) override {
    block_ = &block;
    model_ = fit_nmf(block, options_);
    popular_.fit(block);
  }

  TopNList recommend(std::uint32_t u, std::size_t n) const override {
    const RatingMatrix& b = *block_;
    if (b.row(u).empty()) return popular_.recommend(u, n);
    std::vector<char> seen(b.item_count(), 0);
    for (const auto& e : b.row(u)) seen[e.index] = 1;
    const Eigen::RowVectorXd scores = model_.W.row(u) * model_.H;
    std::vector<std::pair<std::uint32_t, double>> candidates;
    for (std::uint32_t i = 0; i < b.item_count(); ++i)
      if (!seen[i]) candidates.emplace_back(i, scores(i));
    return select_top_n(std::move(candidates), n, b);
  }

  const NmfModel& model() const noexcept { return model_; }

 private:
  NmfOptions options_;
  const RatingMatrix* block_ = nullptr;
  NmfModel model_;
  PopularRecommender popular_;
};

enum class BaseRecommender { Ubcf, Ibcf, Nmf, Popular };

inline const char* to_string(BaseRecommender base) {
  switch (base) {
    case BaseRecommender::Ubcf: return "ubcf";
    case BaseRecommender::Ibcf: return "ibcf";
    case BaseRecommender::Nmf: return "nmf";
    case BaseRecommender::Popular: return "popular";
  }
  return "?";
}

inline BaseRecommender parse_base_recommender(const std::string& name) {
  if (name == "ubcf") return BaseRecommender::Ubcf;
  if (name == "ibcf") return BaseRecommender::Ibcf;
  if (name == "nmf") return BaseRecommender::Nmf;
  if (name == "popular") return BaseRecommender::Popular;
  throw Error(ErrorKind::InvalidArgument, "unknown recommender '" + name + "'");
}

struct RecommenderParams {
  BaseRecommender base = BaseRecommender::Ubcf;
  std::size_t ubcf_neighbors = 25;
  std::size_t ibcf_neighbors = 30;
  NmfOptions nmf;
};

inline std::unique_ptr<BlockRecommender> make_recommender(const RecommenderParams& params) {
  switch (params.base) {
    case BaseRecommender::Ubcf: return std::make_unique<UbcfRecommender>(params.ubcf_neighbors);
    case BaseRecommender::Ibcf: return std::make_unique<IbcfRecommender>(params.ibcf_neighbors);
    case BaseRecommender::Nmf: return std::make_unique<NmfRecommender>(params.nmf);
    case BaseRecommender::Popular: return std::make_unique<PopularRecommender>();
  }
  throw Error(ErrorKind::InvalidArgument, "unknown recommender");
}

namespace detail {

inline std::uint32_t require_local_user(const RatingMatrix& block, std::uint32_t user) {
  auto local = block.local_user(user);
  if (!local) throw Error(ErrorKind::InvalidArgument, "user " + std::to_string(user) + " is not in the block");
  return *local;
}

}  // namespace detail

inline TopNList recommend_ubcf(const RatingMatrix& block, std::uint32_t user, std::size_t n,
                               std::size_t neighborhood_size = 25) {
  UbcfRecommender r(neighborhood_size);
  r.fit(block);
  return r.recommend(detail::require_local_user(block, user), n);
}

inline TopNList recommend_ibcf(const RatingMatrix& block, std::uint32_t user, std::size_t n,
                               std::size_t item_neighbors = 30) {
  IbcfRecommender r(item_neighbors);
  r.fit(block);
  return r.recommend(detail::require_local_user(block, user), n);
}

inline TopNList recommend_nmf(const RatingMatrix& block, std::uint32_t user, std::size_t n, std::size_t rank = 40) {
  NmfOptions options;
  options.rank = rank;
  NmfRecommender r(options);
  r.fit(block);
  return r.recommend(detail::require_local_user(block, user), n);
}

inline TopNList recommend_popular(const RatingMatrix& block, std::uint32_t user, std::size_t n) {
  PopularRecommender r;
  r.fit(block);
  return r.recommend(detail::require_local_user(block, user), n);
}

}  // namespace n2vrec
