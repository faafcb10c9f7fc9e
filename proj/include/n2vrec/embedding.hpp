#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "n2vrec/error.hpp"
#include "n2vrec/ids.hpp"
#include "n2vrec/random.hpp"
#include "n2vrec/walk.hpp"

namespace n2vrec {

struct TrainConfig {
  std::size_t dim = 100;
  std::size_t window = 10;
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  double initial_learning_rate = 0.025;
  std::uint64_t seed = 1;
};

/// Dense row-major node vectors. Rows of nodes that never occur in a walk are all zero.
struct EmbeddingMatrix {
  Namespace ns = Namespace::User;
  std::size_t dim = 0;
  std::vector<float> values;

  EmbeddingMatrix() = default;
  EmbeddingMatrix(Namespace ns_, std::size_t rows, std::size_t dim_) : ns(ns_), dim(dim_), values(rows * dim_, 0.0f) {}

  std::size_t rows() const noexcept { return dim == 0 ? 0 : values.size() / dim; }
  std::span<float> row(std::size_t i) { return {values.data() + i * dim, dim}; }
  std::span<const float> row(std::size_t i) const { return {values.data() + i * dim, dim}; }

  bool is_zero(std::size_t i) const {
    auto r = row(i);
    return std::all_of(r.begin(), r.end(), [](float x) { return x == 0.0f; });
  }
};

namespace detail {

template <std::floating_point T>
T dot(std::span<const T> a, std::span<const T> b) {
  // eight independent lanes so the loop vectorizes without reassociating a single sum
  T acc[8] = {};
  const std::size_t n = a.size(), blocks = n / 8 * 8;
  for (std::size_t i = 0; i < blocks; i += 8)
    for (std::size_t k = 0; k < 8; ++k) acc[k] += a[i + k] * b[i + k];
  T tail = 0;
  for (std::size_t i = blocks; i < n; ++i) tail += a[i] * b[i];
  return ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7])) + tail;
}

template <std::floating_point T>
T softplus(T x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

}  // namespace detail

/// One SGD step on the skip-gram negative-sampling loss
///   L = -log s(c . o_0) - sum_{k>=1} log s(-c . o_k),
/// where `outputs[0]` is the positive context vector and the rest are negatives. All gradients are
/// taken at the incoming point: each output moves by -lr * dL/do_k, then the center moves by
/// -lr * dL/dc. `scratch` must have the vector length. Returns L before the step.
template <std::floating_point T>
T sgns_pair_update(std::span<T> center, std::span<const std::span<T>> outputs, T lr, std::span<T> scratch) {
  std::fill(scratch.begin(), scratch.end(), T(0));
  T loss = 0;
  for (std::size_t k = 0; k < outputs.size(); ++k) {
    std::span<T> out = outputs[k];
    const T score = detail::dot<T>(center, out);
    const T label = k == 0 ? T(1) : T(0);
    const T sig = T(1) / (T(1) + std::exp(-score));
    loss += k == 0 ? detail::softplus(-score) : detail::softplus(score);
    const T g = (label - sig) * lr;
    for (std::size_t i = 0; i < out.size(); ++i) scratch[i] += g * out[i];
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += g * center[i];
  }
  for (std::size_t i = 0; i < center.size(); ++i) center[i] += scratch[i];
  return loss;
}

/// Number of (center, context) pairs a walk corpus yields with a symmetric window.
inline std::uint64_t count_training_pairs(const std::vector<Walk>& walks, std::size_t window) {
  std::uint64_t total = 0;
  for (const auto& w : walks) {
    const std::size_t n = w.size();
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t lo = i >= window ? i - window : 0;
      const std::size_t hi = std::min(n - 1, i + window);
      total += hi - lo;
    }
  }
  return total;
}

/// Skip-gram with negative sampling over walk sequences. Every (center, context) pair within
/// `window` positions gets one update; negatives come from the unigram^0.75 distribution of walk
/// tokens; the learning rate decays linearly towards zero over all epochs. `threads` > 1 runs
/// lock-free workers over disjoint walk ranges (not bitwise reproducible); one worker is.
inline EmbeddingMatrix train_sgns(const std::vector<Walk>& walks, std::size_t node_count, const TrainConfig& cfg,
                                  Namespace ns = Namespace::User, unsigned threads = 1) {
  if (cfg.dim == 0 || cfg.window == 0 || cfg.epochs == 0 || !(cfg.initial_learning_rate > 0.0))
    throw Error(ErrorKind::InvalidArgument, "dim, window, epochs and learning rate must be positive");
  std::vector<double> freq(node_count, 0.0);
  for (const auto& w : walks)
    for (auto v : w) {
      if (v >= node_count) throw Error(ErrorKind::InvalidArgument, "walk node index out of range");
      freq[v] += 1.0;
    }
  const std::uint64_t pairs_per_epoch = count_training_pairs(walks, cfg.window);
  if (pairs_per_epoch == 0) throw Error(ErrorKind::EmptyCorpus, "no walk of length >= 2");

  std::vector<double> noise(node_count);
  for (std::size_t v = 0; v < node_count; ++v) noise[v] = std::pow(freq[v], 0.75);
  const AliasTable noise_table(noise);

  const std::size_t d = cfg.dim;
  EmbeddingMatrix input(ns, node_count, d);
  std::vector<float> output(node_count * d, 0.0f);
  {
    Rng init(mix_seed(cfg.seed, 0x1A17));
    for (std::size_t v = 0; v < node_count; ++v) {
      if (freq[v] == 0.0) continue;
      for (auto& x : input.row(v)) x = static_cast<float>((uniform01(init) - 0.5) / static_cast<double>(d));
    }
  }

  const double total = static_cast<double>(pairs_per_epoch) * static_cast<double>(cfg.epochs);
  std::atomic<std::uint64_t> progress{0};
  const float lr0 = static_cast<float>(cfg.initial_learning_rate);

  auto run = [&](std::size_t epoch, std::size_t begin, std::size_t end, std::uint64_t stream) {
    Rng rng(mix_seed(cfg.seed, epoch + 1, stream));
    std::vector<float> scratch(d);
    std::vector<std::span<float>> outs(cfg.negatives + 1);
    std::uint64_t local = 0;
    float lr = lr0;
    for (std::size_t wi = begin; wi < end; ++wi) {
      const auto& w = walks[wi];
      const std::size_t n = w.size();
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i >= cfg.window ? i - cfg.window : 0;
        const std::size_t hi = std::min(n - 1, i + cfg.window);
        for (std::size_t c = lo; c <= hi; ++c) {
          if (c == i) continue;
          if ((local & 1023) == 0) {
            const double done = static_cast<double>(progress.fetch_add(local) + local);
            local = 0;
            lr = lr0 * static_cast<float>(std::max(1e-4, 1.0 - done / total));
          }
          ++local;
          const std::uint32_t ctx = w[c];
          std::size_t used = 0;
          outs[used++] = std::span<float>(output.data() + ctx * d, d);
          for (std::size_t k = 0; k < cfg.negatives; ++k) {
            const auto neg = static_cast<std::uint32_t>(noise_table.sample(rng));
            if (neg == ctx) continue;
            outs[used++] = std::span<float>(output.data() + neg * d, d);
          }
          sgns_pair_update<float>(input.row(w[i]), std::span<const std::span<float>>(outs.data(), used), lr,
                                  scratch);
        }
      }
    }
    progress.fetch_add(local);
  };

  threads = std::max(1u, threads);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (threads == 1) {
      run(epoch, 0, walks.size(), 0);
      continue;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (walks.size() + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t b = std::min(walks.size(), t * chunk), e = std::min(walks.size(), b + chunk);
      if (b < e) pool.emplace_back(run, epoch, b, e, t);
    }
    for (auto& th : pool) th.join();
  }

  for (auto x : input.values)
    if (!std::isfinite(x)) throw Error(ErrorKind::DegenerateDataset, "non-finite embedding after training");
  return input;
}

/// word2vec text layout: a `rows dim` header, then `index v1 ... vdim` per node.
inline void write_embeddings(const EmbeddingMatrix& m, std::ostream& out) {
  out << m.rows() << ' ' << m.dim << '\n';
  out << std::setprecision(std::numeric_limits<float>::max_digits10);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    out << i;
    for (float x : m.row(i)) out << ' ' << x;
    out << '\n';
  }
}

inline void write_embeddings(const EmbeddingMatrix& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  write_embeddings(m, out);
}

inline EmbeddingMatrix read_embeddings(std::istream& in, Namespace ns = Namespace::User,
                                       const std::string& source = "<embeddings>") {
  std::size_t rows = 0, dim = 0;
  std::string line;
  if (!std::getline(in, line)) throw ParseError(source, 1, "missing header");
  {
    std::istringstream header(line);
    if (!(header >> rows >> dim) || dim == 0) throw ParseError(source, 1, "expected 'rows dim'");
  }
  EmbeddingMatrix m(ns, rows, dim);
  std::vector<char> seen(rows, 0);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::size_t idx = 0;
    if (!(fields >> idx) || idx >= rows) throw ParseError(source, lineno, "bad node index");
    for (auto& x : m.row(idx)) {
      if (!(fields >> x)) throw ParseError(source, lineno, "expected " + std::to_string(dim) + " values");
    }
    seen[idx] = 1;
  }
  if (std::count(seen.begin(), seen.end(), 1) != static_cast<std::ptrdiff_t>(rows))
    throw ParseError(source, lineno, "missing rows");
  return m;
}

inline EmbeddingMatrix read_embeddings(const std::string& path, Namespace ns = Namespace::User) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path);
  return read_embeddings(in, ns, path);
}

}  // namespace n2vrec
