#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "n2vrec/error.hpp"
#include "n2vrec/graph.hpp"

namespace n2vrec {

struct ScoredItem {
  std::uint32_t item = 0;  // global item index
  double score = 0.0;

  bool operator==(const ScoredItem&) const = default;
};

/// Ranked recommendations for one user: descending score, ties by ascending item index.
using TopNList = std::vector<ScoredItem>;

/// Sparse ratings restricted to a set of users and items. Local indices follow ascending global
/// order, so ordering by local index is ordering by global index.
class RatingMatrix {
 public:
  struct Entry {
    std::uint32_t index = 0;  // local item (in rows) or local user (in columns)
    double rating = 0.0;
  };

  RatingMatrix() = default;

  /// Keeps the ratings whose user and item are both listed. Repeated (user, item) pairs are averaged.
  /// With `implicit`, every stored rating is 1.
  RatingMatrix(std::vector<std::uint32_t> users, std::vector<std::uint32_t> items, std::span<const Rating> ratings,
               bool implicit = false)
      : users_(std::move(users)), items_(std::move(items)), implicit_(implicit) {
    std::sort(users_.begin(), users_.end());
    users_.erase(std::unique(users_.begin(), users_.end()), users_.end());
    std::sort(items_.begin(), items_.end());
    items_.erase(std::unique(items_.begin(), items_.end()), items_.end());

    std::uint32_t max_user = users_.empty() ? 0 : users_.back() + 1;
    std::uint32_t max_item = items_.empty() ? 0 : items_.back() + 1;
    user_local_.assign(max_user, -1);
    item_local_.assign(max_item, -1);
    for (std::size_t i = 0; i < users_.size(); ++i) user_local_[users_[i]] = static_cast<int>(i);
    for (std::size_t i = 0; i < items_.size(); ++i) item_local_[items_[i]] = static_cast<int>(i);

    struct Triple {
      std::uint32_t u, i;
      double r;
    };
    std::vector<Triple> kept;
    for (const auto& r : ratings) {
      const auto lu = local_user(r.user), li = local_item(r.item);
      if (lu && li) kept.push_back({*lu, *li, implicit ? 1.0 : r.rating});
    }
    std::sort(kept.begin(), kept.end(), [](const Triple& a, const Triple& b) {
      return a.u != b.u ? a.u < b.u : a.i < b.i;
    });
    row_offsets_.assign(users_.size() + 1, 0);
    for (std::size_t k = 0; k < kept.size();) {
      std::size_t e = k;
      double sum = 0.0;
      while (e < kept.size() && kept[e].u == kept[k].u && kept[e].i == kept[k].i) sum += kept[e++].r;
      row_entries_.push_back({kept[k].i, sum / static_cast<double>(e - k)});
      ++row_offsets_[kept[k].u + 1];
      k = e;
    }
    for (std::size_t u = 0; u < users_.size(); ++u) row_offsets_[u + 1] += row_offsets_[u];

    col_offsets_.assign(items_.size() + 1, 0);
    for (const auto& e : row_entries_) ++col_offsets_[e.index + 1];
    for (std::size_t i = 0; i < items_.size(); ++i) col_offsets_[i + 1] += col_offsets_[i];
    col_entries_.resize(row_entries_.size());
    std::vector<std::size_t> pos(col_offsets_.begin(), col_offsets_.end() - 1);
    for (std::uint32_t u = 0; u < users_.size(); ++u)
      for (const auto& e : row(u)) col_entries_[pos[e.index]++] = {u, e.rating};
  }

  const std::vector<std::uint32_t>& users() const noexcept { return users_; }
  const std::vector<std::uint32_t>& items() const noexcept { return items_; }
  std::size_t user_count() const noexcept { return users_.size(); }
  std::size_t item_count() const noexcept { return items_.size(); }
  std::size_t nnz() const noexcept { return row_entries_.size(); }
  bool implicit() const noexcept { return implicit_; }

  std::optional<std::uint32_t> local_user(std::uint32_t global) const {
    if (global >= user_local_.size() || user_local_[global] < 0) return std::nullopt;
    return static_cast<std::uint32_t>(user_local_[global]);
  }
  std::optional<std::uint32_t> local_item(std::uint32_t global) const {
    if (global >= item_local_.size() || item_local_[global] < 0) return std::nullopt;
    return static_cast<std::uint32_t>(item_local_[global]);
  }

  /// Ratings of a local user, ascending local item.
  std::span<const Entry> row(std::uint32_t u) const {
    return {row_entries_.data() + row_offsets_[u], row_offsets_[u + 1] - row_offsets_[u]};
  }
  /// Ratings of a local item, ascending local user.
  std::span<const Entry> column(std::uint32_t i) const {
    return {col_entries_.data() + col_offsets_[i], col_offsets_[i + 1] - col_offsets_[i]};
  }

 private:
  std::vector<std::uint32_t> users_;
  std::vector<std::uint32_t> items_;
  bool implicit_ = false;
  std::vector<int> user_local_;
  std::vector<int> item_local_;
  std::vector<std::size_t> row_offsets_{0};
  std::vector<Entry> row_entries_;
  std::vector<std::size_t> col_offsets_{0};
  std::vector<Entry> col_entries_;
};

/// Best `n` (local item, score) candidates as a TopNList of global items.
inline TopNList select_top_n(std::vector<std::pair<std::uint32_t, double>> candidates, std::size_t n,
                             const RatingMatrix& block) {
  auto better = [](const auto& a, const auto& b) { return a.second != b.second ? a.second > b.second : a.first < b.first; };
  const std::size_t keep = std::min(n, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep), candidates.end(), better);
  TopNList out;
  out.reserve(keep);
  for (std::size_t k = 0; k < keep; ++k) out.push_back({block.items()[candidates[k].first], candidates[k].second});
  return out;
}

}  // namespace n2vrec
