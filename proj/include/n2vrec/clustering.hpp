#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <iostream>  // needed by the Eigen ARPACK wrapper
#include <unsupported/Eigen/ArpackSupport>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "n2vrec/embedding.hpp"
#include "n2vrec/error.hpp"
#include "n2vrec/kmeans.hpp"

namespace n2vrec {

/// Euclidean distances between all point rows. Exact per pair (no Gram-matrix shortcut), so
/// duplicate points are at distance exactly 0.
inline Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& points) {
  const Eigen::Index n = points.rows();
  Eigen::MatrixXd dist = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double d = (points.row(i) - points.row(j)).norm();
      dist(i, j) = d;
      dist(j, i) = d;
    }
  return dist;
}

enum class DensityRule {
  /// rho_i counts points within a cutoff distance chosen so that the average point has `p`
  /// neighbors inside it (the p * n / 2 -th smallest pairwise distance).
  CutoffDistance,
  /// rho_i counts the points at or below i's own p-th nearest-neighbor distance.
  PerPointBudget,
};

struct DensityProfile {
  std::vector<int> rho;
  std::size_t p = 1;
  DensityRule rule = DensityRule::CutoffDistance;
  /// Global cutoff distance (CutoffDistance rule only).
  double cutoff = 0.0;
};

/// ceil(fraction * n), at least 1.
inline std::size_t default_density_budget(std::size_t n, double fraction = 0.02) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-12)));
}

/// Per-point density counts; ties at the boundary distance are all included.
inline DensityProfile compute_density(const Eigen::MatrixXd& dist, std::size_t p,
                                      DensityRule rule = DensityRule::CutoffDistance) {
  const auto n = static_cast<std::size_t>(dist.rows());
  if (n < 2) throw Error(ErrorKind::DegenerateDataset, "density needs at least 2 points");
  if (p == 0) throw Error(ErrorKind::InvalidArgument, "density budget p must be >= 1");
  p = std::min(p, n - 1);
  DensityProfile profile;
  profile.p = p;
  profile.rule = rule;
  profile.rho.assign(n, 0);

  if (rule == DensityRule::PerPointBudget) {
    std::vector<double> row;
    for (std::size_t i = 0; i < n; ++i) {
      row.clear();
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) row.push_back(dist(i, j));
      std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(p - 1), row.end());
      const double bound = row[p - 1];
      int count = 0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i && dist(i, j) <= bound) ++count;
      profile.rho[i] = count;
    }
    return profile;
  }

  std::vector<double> pairs;
  pairs.reserve(n * (n - 1) / 2);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = j + 1; i < n; ++i) pairs.push_back(dist(i, j));
  const std::size_t rank = std::min(pairs.size(), (p * n + 1) / 2);
  std::nth_element(pairs.begin(), pairs.begin() + static_cast<std::ptrdiff_t>(rank - 1), pairs.end());
  profile.cutoff = pairs[rank - 1];
  for (std::size_t i = 0; i < n; ++i) {
    int count = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i && dist(i, j) <= profile.cutoff) ++count;
    profile.rho[i] = count;
  }
  return profile;
}

struct DnnOptions {
  /// Density-difference threshold; defaults to theta_factor * stddev(rho).
  std::optional<double> theta;
  double theta_factor = 0.5;
  /// Size of the initial neighbor set N_i (K nearest neighbors); defaults to max(p, 7).
  std::optional<std::size_t> initial_neighbors;
};

struct DnnSimilarity {
  /// Symmetric, unit diagonal, entries in [0, 1].
  Eigen::SparseMatrix<double> matrix;
  std::vector<double> sigma;
  double theta = 0.0;
  std::size_t initial_neighbors = 0;
  /// N_i, nearest first.
  std::vector<std::vector<std::uint32_t>> neighbor_sets;
  /// T_i, nearest first.
  std::vector<std::vector<std::uint32_t>> dnn_sets;
};

inline double population_stddev(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(v.size()));
}

/// Density-gated Gaussian similarity. For each i, N_i holds the K nearest neighbors,
/// J_i the members of N_i whose density differs from rho_i by more than theta, and T_i the members of
/// N_i strictly closer to i than every member of J_i. S_ij = exp(-d^2 / (2 max(sigma_i, sigma_j)^2))
/// for j in T_i, sigma_i being the mean distance from i to T_i. The result is symmetrized with an
/// elementwise max.
inline DnnSimilarity dnn_similarity(const Eigen::MatrixXd& dist, const DensityProfile& profile,
                                    const DnnOptions& options = {}) {
  const auto n = static_cast<std::size_t>(dist.rows());
  if (profile.rho.size() != n) throw Error(ErrorKind::InvalidArgument, "density profile does not match points");
  if (n < 2) throw Error(ErrorKind::DegenerateDataset, "similarity needs at least 2 points");

  DnnSimilarity out;
  std::vector<double> rho(profile.rho.begin(), profile.rho.end());
  out.theta = options.theta ? *options.theta : options.theta_factor * population_stddev(rho);
  out.initial_neighbors = std::min(n - 1, options.initial_neighbors.value_or(std::max<std::size_t>(profile.p, 7)));
  if (out.initial_neighbors == 0) throw Error(ErrorKind::InvalidArgument, "initial neighbor count must be >= 1");
  const std::size_t K = out.initial_neighbors;

  out.neighbor_sets.resize(n);
  out.dnn_sets.resize(n);
  out.sigma.assign(n, 0.0);
  std::vector<std::uint32_t> order(n);
  for (std::size_t i = 0; i < n; ++i) {
    order.clear();
    for (std::uint32_t j = 0; j < n; ++j)
      if (j != i) order.push_back(j);
    auto closer = [&](std::uint32_t a, std::uint32_t b) {
      return dist(i, a) != dist(i, b) ? dist(i, a) < dist(i, b) : a < b;
    };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(K), order.end(), closer);
    auto& nbrs = out.neighbor_sets[i];
    nbrs.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(K));

    double gate = std::numeric_limits<double>::infinity();
    for (auto j : nbrs)
      if (std::abs(rho[i] - rho[j]) > out.theta) gate = std::min(gate, dist(j, i));
    auto& dnn = out.dnn_sets[i];
    for (auto j : nbrs)
      if (dist(i, j) < gate) dnn.push_back(j);

    if (!dnn.empty()) {
      double s = 0.0;
      for (auto j : dnn) s += dist(i, j);
      out.sigma[i] = s / static_cast<double>(dnn.size());
    } else {
      out.sigma[i] = dist(i, nbrs.front());
    }
  }

  double floor = std::numeric_limits<double>::infinity();
  for (double s : out.sigma)
    if (s > 0.0) floor = std::min(floor, s);
  if (!std::isfinite(floor)) throw Error(ErrorKind::DegenerateDataset, "all points coincide");
  for (auto& s : out.sigma)
    if (s <= 0.0) s = floor;

  std::vector<Eigen::Triplet<double>> entries;
  for (std::size_t i = 0; i < n; ++i) {
    entries.emplace_back(static_cast<int>(i), static_cast<int>(i), 1.0);
    for (auto j : out.dnn_sets[i]) {
      const double scale = std::max(out.sigma[i], out.sigma[j]);
      const double d = dist(i, j);
      const double s = std::exp(-d * d / (2.0 * scale * scale));
      entries.emplace_back(static_cast<int>(i), static_cast<int>(j), s);
      entries.emplace_back(static_cast<int>(j), static_cast<int>(i), s);
    }
  }
  out.matrix.resize(static_cast<int>(n), static_cast<int>(n));
  out.matrix.setFromTriplets(entries.begin(), entries.end(), [](double a, double b) { return std::max(a, b); });
  out.matrix.makeCompressed();
  return out;
}

struct CenterDetection {
  std::vector<double> delta;
  std::vector<double> gamma;
  double mu = 0.0;
  double omega = 0.0;
  double threshold = 0.0;
  /// Ascending point indices.
  std::vector<std::uint32_t> centers;
};

/// delta_i is the distance to the nearest point of higher density, where equal density ranks the
/// lower index higher. The first maximum-density point receives max(delta). gamma = rho * delta; centers are the points with gamma > mu + sigmas * omega (mean and
/// population std of gamma), or the single argmax-gamma point if none qualifies.
inline CenterDetection detect_centers(const DensityProfile& profile, const Eigen::MatrixXd& dist,
                                      double sigmas = 5.0) {
  const auto n = static_cast<std::size_t>(dist.rows());
  if (profile.rho.size() != n) throw Error(ErrorKind::InvalidArgument, "density profile does not match points");
  CenterDetection out;
  out.delta.assign(n, 0.0);
  out.gamma.assign(n, 0.0);
  if (n == 0) return out;
  const int top = *std::max_element(profile.rho.begin(), profile.rho.end());
  std::optional<std::size_t> first_top;
  for (std::size_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    if (profile.rho[i] == top && !first_top) {
      first_top = i;
      continue;
    }
    for (std::size_t j = 0; j < n; ++j)
      if (profile.rho[j] > profile.rho[i] || (profile.rho[j] == profile.rho[i] && j < i))
        best = std::min(best, dist(i, j));
    out.delta[i] = best;
  }
  double max_delta = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (i != *first_top) max_delta = std::max(max_delta, out.delta[i]);
  out.delta[*first_top] = max_delta;

  for (std::size_t i = 0; i < n; ++i) out.gamma[i] = profile.rho[i] * out.delta[i];
  out.mu = std::accumulate(out.gamma.begin(), out.gamma.end(), 0.0) / static_cast<double>(n);
  out.omega = population_stddev(out.gamma);
  out.threshold = out.mu + sigmas * out.omega;
  for (std::uint32_t i = 0; i < n; ++i)
    if (out.gamma[i] > out.threshold) out.centers.push_back(i);
  if (out.centers.empty()) {
    const auto best = std::max_element(out.gamma.begin(), out.gamma.end()) - out.gamma.begin();
    out.centers.push_back(static_cast<std::uint32_t>(best));
  }
  return out;
}

struct SpectralOptions {
  /// Components larger than this use the restarted Lanczos (ARPACK) solver.
  std::size_t dense_limit = 2000;
  double eigen_tolerance = 1e-10;
  KMeansOptions kmeans;
};

struct ClusterModel {
  /// Dense cluster ids 0..k-1, one per node.
  std::vector<int> assignments;
  std::size_t k = 0;
  std::vector<std::uint32_t> centers;
  std::size_t spectral_dim = 0;
  /// Id of the reserved cluster for nodes without similarity links or embeddings, if any exist.
  std::optional<int> cold_cluster;
};

namespace detail {

/// The `count` eigenvectors of D^-1/2 S D^-1/2 with largest eigenvalue (equivalently the smallest of
/// the normalized Laplacian), as columns.
inline Eigen::MatrixXd leading_normalized_eigenvectors(const Eigen::SparseMatrix<double>& block, std::size_t count,
                                                       const SpectralOptions& options) {
  const Eigen::Index m = block.rows();
  Eigen::VectorXd inv_sqrt_deg(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double deg = block.col(i).sum();
    inv_sqrt_deg(i) = deg > 0.0 ? 1.0 / std::sqrt(deg) : 0.0;
  }
  Eigen::SparseMatrix<double> normalized = inv_sqrt_deg.asDiagonal() * block * inv_sqrt_deg.asDiagonal();
  const auto c = static_cast<Eigen::Index>(count);
  if (static_cast<std::size_t>(m) <= options.dense_limit || c >= m - 1) {
    Eigen::MatrixXd laplacian = Eigen::MatrixXd::Identity(m, m) - Eigen::MatrixXd(normalized);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(laplacian);
    if (solver.info() != Eigen::Success) throw Error(ErrorKind::DegenerateDataset, "eigensolver failed");
    return solver.eigenvectors().leftCols(c);  // eigenvalues ascending
  }
  Eigen::ArpackGeneralizedSelfAdjointEigenSolver<Eigen::SparseMatrix<double>> solver(
      normalized, c, "LA", Eigen::ComputeEigenvectors, options.eigen_tolerance);
  if (solver.info() != Eigen::Success) throw Error(ErrorKind::DegenerateDataset, "ARPACK did not converge");
  return solver.eigenvectors();  // column order is irrelevant to the k-means step
}

}  // namespace detail

/// Normalized spectral clustering of a similarity graph with k taken from the detected centers.
/// Each connected component is solved on its own with as many clusters as it holds centers;
/// k-means in the row-normalized eigenvector space starts from the centers' rows. When `dist` is given,
/// components without a center are attached greedily, the one closest to an already clustered node
/// first, taking that node's cluster; otherwise they form their own clusters. Without `dist`, nodes lacking any off-diagonal similarity go to a reserved cold cluster
/// with the last id; with it they are treated like centerless components.
inline ClusterModel spectral_cluster(const DnnSimilarity& similarity, const CenterDetection& detection,
                                     const SpectralOptions& options = {}, const Eigen::MatrixXd* dist = nullptr) {
  const Eigen::SparseMatrix<double>& S = similarity.matrix;
  const auto n = static_cast<std::size_t>(S.rows());
  if (detection.centers.empty()) throw Error(ErrorKind::InvalidK, "no cluster centers");
  ClusterModel model;
  model.centers = detection.centers;
  model.assignments.assign(n, -1);

  std::vector<int> component(n, -1);
  std::vector<std::vector<std::uint32_t>> members;
  for (std::uint32_t s = 0; s < n; ++s) {
    if (component[s] >= 0) continue;
    const int id = static_cast<int>(members.size());
    members.emplace_back();
    std::vector<std::uint32_t> stack{s};
    component[s] = id;
    while (!stack.empty()) {
      const auto v = stack.back();
      stack.pop_back();
      members[id].push_back(v);
      for (Eigen::SparseMatrix<double>::InnerIterator it(S, static_cast<int>(v)); it; ++it) {
        const auto u = static_cast<std::uint32_t>(it.row());
        if (it.value() > 0.0 && component[u] < 0) {
          component[u] = id;
          stack.push_back(u);
        }
      }
    }
    std::sort(members[id].begin(), members[id].end());
  }

  std::vector<char> is_center(n, 0);
  for (auto c : detection.centers) is_center[c] = 1;
  int next_id = 0;
  bool any_cold = false;
  std::vector<const std::vector<std::uint32_t>*> centerless;
  for (const auto& comp : members) {
    if (comp.size() == 1 && !is_center[comp.front()]) {
      if (dist) centerless.push_back(&comp);
      else any_cold = true;
      continue;
    }
    std::vector<std::uint32_t> comp_centers;
    for (auto v : comp)
      if (is_center[v]) comp_centers.push_back(v);
    if (comp_centers.empty() && dist) {
      centerless.push_back(&comp);
      continue;
    }
    const std::size_t kc = std::max<std::size_t>(1, comp_centers.size());
    if (kc == 1) {
      for (auto v : comp) model.assignments[v] = next_id;
      ++next_id;
      model.spectral_dim = std::max<std::size_t>(model.spectral_dim, 1);
      continue;
    }
    const auto m = static_cast<Eigen::Index>(comp.size());
    std::vector<int> local(n, -1);
    for (Eigen::Index a = 0; a < m; ++a) local[comp[a]] = static_cast<int>(a);
    std::vector<Eigen::Triplet<double>> entries;
    for (auto v : comp)
      for (Eigen::SparseMatrix<double>::InnerIterator it(S, static_cast<int>(v)); it; ++it)
        entries.emplace_back(local[it.row()], local[v], it.value());
    Eigen::SparseMatrix<double> block(m, m);
    block.setFromTriplets(entries.begin(), entries.end());

    Eigen::MatrixXd rows = detail::leading_normalized_eigenvectors(block, kc, options);
    for (Eigen::Index r = 0; r < rows.rows(); ++r) {
      const double norm = rows.row(r).norm();
      if (norm > 0.0) rows.row(r) /= norm;
    }
    Eigen::MatrixXd init(static_cast<Eigen::Index>(kc), rows.cols());
    for (std::size_t c = 0; c < kc; ++c) init.row(static_cast<Eigen::Index>(c)) = rows.row(local[comp_centers[c]]);
    const auto km = kmeans(rows, kc, init, options.kmeans);

    // compact ids in case k-means left a cluster empty
    std::vector<int> remap(kc, -1);
    for (Eigen::Index a = 0; a < m; ++a) {
      int& id = remap[km.assignments[a]];
      if (id < 0) id = next_id++;
      model.assignments[comp[a]] = id;
    }
    model.spectral_dim = std::max(model.spectral_dim, kc);
  }
  // centerless components join clusters one at a time, nearest to the labeled set first, so labels
  // spread along chains of fragments
  if (!centerless.empty()) {
    std::vector<double> reach(n, std::numeric_limits<double>::infinity());
    std::vector<int> via(n, -1);
    auto absorb = [&](std::uint32_t l) {
      for (const auto* comp : centerless)
        for (auto v : *comp)
          if (model.assignments[v] < 0 && (*dist)(v, l) < reach[v]) {
            reach[v] = (*dist)(v, l);
            via[v] = model.assignments[l];
          }
    };
    for (std::uint32_t v = 0; v < n; ++v)
      if (model.assignments[v] >= 0) absorb(v);
    std::vector<char> done(centerless.size(), 0);
    for (std::size_t round = 0; round < centerless.size(); ++round) {
      std::size_t pick = centerless.size();
      double best = std::numeric_limits<double>::infinity();
      int target = -1;
      for (std::size_t c = 0; c < centerless.size(); ++c) {
        if (done[c]) continue;
        if (pick == centerless.size()) pick = c;
        for (auto v : *centerless[c])
          if (reach[v] < best) {
            best = reach[v];
            pick = c;
            target = via[v];
          }
      }
      done[pick] = 1;
      if (target < 0) target = next_id++;
      for (auto v : *centerless[pick]) model.assignments[v] = target;
      for (auto v : *centerless[pick]) absorb(v);
    }
  }
  if (any_cold) {
    model.cold_cluster = next_id++;
    for (auto& a : model.assignments)
      if (a < 0) a = *model.cold_cluster;
  }
  model.k = static_cast<std::size_t>(next_id);
  return model;
}

struct ClusterConfig {
  /// Density budget as a fraction of the number of points.
  double p_fraction = 0.02;
  DensityRule density_rule = DensityRule::CutoffDistance;
  DnnOptions dnn;
  double center_sigmas = 5.0;
  SpectralOptions spectral;
};

struct ClusterResult {
  ClusterModel model;
  /// Embedding rows that took part (non-zero vectors), ascending; diagnostics are indexed by position.
  std::vector<std::uint32_t> active;
  DensityProfile density;
  CenterDetection detection;
};

/// Clusters the non-zero rows of an embedding; zero rows (isolated nodes) form the cold cluster.
/// Center indices in the returned model refer to embedding rows.
inline ClusterResult cluster_embeddings(const EmbeddingMatrix& embedding, const ClusterConfig& config = {}) {
  ClusterResult result;
  const std::size_t n = embedding.rows();
  for (std::uint32_t i = 0; i < n; ++i)
    if (!embedding.is_zero(i)) result.active.push_back(i);
  auto& model = result.model;
  model.assignments.assign(n, -1);

  if (result.active.size() < 3) {
    // too few points for density estimation: everything active shares one cluster
    int next = 0;
    if (!result.active.empty()) {
      for (auto i : result.active) model.assignments[i] = 0;
      model.centers.push_back(result.active.front());
      next = 1;
    }
    if (result.active.size() < n) {
      model.cold_cluster = next++;
      for (auto& a : model.assignments)
        if (a < 0) a = *model.cold_cluster;
    }
    model.k = static_cast<std::size_t>(next);
    return result;
  }

  const auto m = static_cast<Eigen::Index>(result.active.size());
  Eigen::MatrixXd points(m, static_cast<Eigen::Index>(embedding.dim));
  for (Eigen::Index r = 0; r < m; ++r) {
    auto row = embedding.row(result.active[r]);
    for (std::size_t c = 0; c < embedding.dim; ++c) points(r, static_cast<Eigen::Index>(c)) = row[c];
  }
  const Eigen::MatrixXd dist = pairwise_distances(points);
  result.density = compute_density(dist, default_density_budget(result.active.size(), config.p_fraction),
                                   config.density_rule);
  const auto similarity = dnn_similarity(dist, result.density, config.dnn);
  result.detection = detect_centers(result.density, dist, config.center_sigmas);
  const auto local = spectral_cluster(similarity, result.detection, config.spectral, &dist);

  for (Eigen::Index r = 0; r < m; ++r) model.assignments[result.active[r]] = local.assignments[r];
  for (auto c : local.centers) model.centers.push_back(result.active[c]);
  model.spectral_dim = local.spectral_dim;
  std::size_t k = local.k;
  std::optional<int> cold = local.cold_cluster;
  if (static_cast<std::size_t>(m) < n) {
    if (!cold) cold = static_cast<int>(k++);
    for (auto& a : model.assignments)
      if (a < 0) a = *cold;
  }
  model.cold_cluster = cold;
  model.k = k;
  return result;
}

/// A `# k=<k> cold=<id|->` header, then `node_index<TAB>cluster_id` lines.
inline void write_clusters(const ClusterModel& model, std::ostream& out) {
  out << "# k=" << model.k << " cold=";
  if (model.cold_cluster) out << *model.cold_cluster;
  else out << '-';
  out << '\n';
  for (std::size_t i = 0; i < model.assignments.size(); ++i) out << i << '\t' << model.assignments[i] << '\n';
}

inline void write_clusters(const ClusterModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  write_clusters(model, out);
}

/// Reads assignments back; centers are not stored. Without a header, k is the largest id + 1.
inline ClusterModel read_clusters(std::istream& in, const std::string& source = "<clusters>") {
  ClusterModel model;
  std::string line;
  std::size_t lineno = 0;
  int max_id = -1;
  std::optional<std::size_t> declared_k;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line.front() == '#') {
      std::size_t k = 0;
      char cold[32] = {};
      if (std::sscanf(line.c_str(), "# k=%zu cold=%31s", &k, cold) != 2)
        throw ParseError(source, lineno, "bad header");
      declared_k = k;
      if (std::string(cold) != "-") model.cold_cluster = std::stoi(cold);
      continue;
    }
    std::istringstream fields(line);
    std::size_t idx = 0;
    int cluster = -1;
    if (!(fields >> idx >> cluster) || cluster < 0) throw ParseError(source, lineno, "expected node<TAB>cluster");
    if (idx != model.assignments.size()) throw ParseError(source, lineno, "node indices must be dense and ordered");
    model.assignments.push_back(cluster);
    max_id = std::max(max_id, cluster);
  }
  model.k = declared_k.value_or(static_cast<std::size_t>(max_id + 1));
  if (max_id >= 0 && static_cast<std::size_t>(max_id) >= model.k)
    throw ParseError(source, lineno, "cluster id exceeds declared k");
  return model;
}

inline ClusterModel read_clusters(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path);
  return read_clusters(in, path);
}

/// CSV of per-point rho, delta, gamma and center flag (for decision-graph plots).
inline void write_cluster_diagnostics(const ClusterResult& result, std::ostream& out) {
  out << "node_index,rho,delta,gamma,is_center\n";
  std::vector<char> center(result.model.assignments.size(), 0);
  for (auto c : result.model.centers) center[c] = 1;
  out << std::setprecision(10);
  for (std::size_t r = 0; r < result.active.size() && r < result.density.rho.size(); ++r) {
    const auto node = result.active[r];
    out << node << ',' << result.density.rho[r] << ',' << result.detection.delta[r] << ','
        << result.detection.gamma[r] << ',' << int(center[node]) << '\n';
  }
}

}  // namespace n2vrec
