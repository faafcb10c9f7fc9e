#pragma once

#include <openssl/evp.h>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "n2vrec/clustering.hpp"
#include "n2vrec/dataset.hpp"
#include "n2vrec/embedding.hpp"
#include "n2vrec/error.hpp"
#include "n2vrec/eval.hpp"
#include "n2vrec/graph.hpp"
#include "n2vrec/recommend.hpp"
#include "n2vrec/walk.hpp"

namespace n2vrec {

/// Invalid configuration key or value.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::InvalidArgument, what) {}
};

/// A pipeline stage failed; `stage()` names it.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause)
      : Error(cause.kind(), "stage '" + stage + "' failed: " + cause.what()), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

enum class DatasetKind { MovieLens, Table, Canonical };
enum class ModelKind { Clustered, Original };

struct DatasetConfig {
  DatasetKind kind = DatasetKind::MovieLens;
  /// MovieLens: directory with u.data and u.item. Canonical: the dataset directory.
  std::string path;
  /// Table: interaction and category files.
  std::string interactions;
  std::string categories;
  TableFormat table;
  CategoryFormat category_table;
  /// Optional key=value file of expected counts.
  std::string manifest;
};

struct PipelineConfig {
  DatasetConfig dataset;
  ModelKind model = ModelKind::Clustered;
  ProjectionOptions projection;
  WalkConfig walk;
  TrainConfig train{100, 10, 5, 1, 0.025, 1};
  ClusterConfig cluster;
  RecommenderParams recommender;
  bool implicit = false;
  bool pad_from_other_clusters = true;
  std::size_t folds = 5;
  /// Run only the first `max_folds` folds (all when 0).
  std::size_t max_folds = 0;
  std::size_t n = 10;
  std::vector<std::size_t> report_ns{5, 10, 20};
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string cache_dir;
};

namespace detail {

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
  std::istringstream in(v);
  T out{};
  if (!(in >> out) || !(in >> std::ws).eof()) throw ConfigError(key + ": bad number '" + v + "'");
  if constexpr (std::is_unsigned_v<T>)
    if (v.find('-') != std::string::npos) throw ConfigError(key + ": must be non-negative");
  return out;
}

inline char parse_delimiter(const std::string& key, const std::string& v) {
  if (v == "tab" || v == "\\t") return '\t';
  if (v == "comma") return ',';
  if (v == "pipe") return '|';
  if (v == "semicolon") return ';';
  if (v.size() == 1) return v[0];
  throw ConfigError(key + ": bad delimiter '" + v + "'");
}

}  // namespace detail

/// Applies one `key=value` setting.
inline void apply_setting(PipelineConfig& c, const std::string& key, const std::string& value) {
  using detail::parse_bool;
  using detail::parse_number;
  auto positive = [&](std::size_t v) {
    if (v == 0) throw ConfigError(key + ": must be positive");
    return v;
  };
  auto& d = c.dataset;
  if (key == "dataset.kind") {
    if (value == "movielens") d.kind = DatasetKind::MovieLens;
    else if (value == "table") d.kind = DatasetKind::Table;
    else if (value == "canonical") d.kind = DatasetKind::Canonical;
    else throw ConfigError(key + ": expected movielens, table or canonical");
  } else if (key == "dataset.path") d.path = value;
  else if (key == "dataset.interactions") d.interactions = value;
  else if (key == "dataset.categories") d.categories = value;
  else if (key == "dataset.manifest") d.manifest = value;
  else if (key == "dataset.delimiter") d.table.delimiter = detail::parse_delimiter(key, value);
  else if (key == "dataset.header") d.table.header = parse_bool(key, value);
  else if (key == "dataset.user_column") d.table.user_column = value;
  else if (key == "dataset.item_column") d.table.item_column = value;
  else if (key == "dataset.rating_column") d.table.rating_column = value;
  else if (key == "dataset.timestamp_column") d.table.timestamp_column = value;
  else if (key == "dataset.category_delimiter") d.category_table.delimiter = detail::parse_delimiter(key, value);
  else if (key == "dataset.category_header") d.category_table.header = parse_bool(key, value);
  else if (key == "dataset.category_item_column") d.category_table.item_column = value;
  else if (key == "dataset.category_column") d.category_table.category_column = value;
  else if (key == "dataset.category_separator") {
    if (value.empty()) d.category_table.multi_separator.reset();
    else d.category_table.multi_separator = detail::parse_delimiter(key, value);
  } else if (key == "model") {
    if (value == "clustered") c.model = ModelKind::Clustered;
    else if (value == "original") c.model = ModelKind::Original;
    else throw ConfigError(key + ": expected clustered or original");
  } else if (key == "enrichment") c.projection.category_enrichment = parse_bool(key, value);
  else if (key == "projection.uncategorized_floor") c.projection.uncategorized_ca_floor = parse_number<std::uint32_t>(key, value);
  else if (key == "walk.p") c.walk.return_p = parse_number<double>(key, value);
  else if (key == "walk.q") c.walk.in_out_q = parse_number<double>(key, value);
  else if (key == "walk.length") c.walk.walk_length = positive(parse_number<std::size_t>(key, value));
  else if (key == "walk.per_node") c.walk.walks_per_node = positive(parse_number<std::size_t>(key, value));
  else if (key == "walk.alias_budget") c.walk.alias_budget = parse_number<std::size_t>(key, value);
  else if (key == "embed.dim") c.train.dim = positive(parse_number<std::size_t>(key, value));
  else if (key == "embed.window") c.train.window = positive(parse_number<std::size_t>(key, value));
  else if (key == "embed.negatives") c.train.negatives = parse_number<std::size_t>(key, value);
  else if (key == "embed.epochs") c.train.epochs = positive(parse_number<std::size_t>(key, value));
  else if (key == "embed.learning_rate") c.train.initial_learning_rate = parse_number<double>(key, value);
  else if (key == "cluster.p_fraction") c.cluster.p_fraction = parse_number<double>(key, value);
  else if (key == "cluster.density_rule") {
    if (value == "cutoff") c.cluster.density_rule = DensityRule::CutoffDistance;
    else if (value == "per_point") c.cluster.density_rule = DensityRule::PerPointBudget;
    else throw ConfigError(key + ": expected cutoff or per_point");
  } else if (key == "cluster.theta_factor") c.cluster.dnn.theta_factor = parse_number<double>(key, value);
  else if (key == "cluster.theta") {
    if (value.empty() || value == "auto") c.cluster.dnn.theta.reset();
    else c.cluster.dnn.theta = parse_number<double>(key, value);
  } else if (key == "cluster.neighbors") {
    if (value.empty() || value == "auto") c.cluster.dnn.initial_neighbors.reset();
    else c.cluster.dnn.initial_neighbors = positive(parse_number<std::size_t>(key, value));
  } else if (key == "cluster.sigmas") c.cluster.center_sigmas = parse_number<double>(key, value);
  else if (key == "recommend.base") {
    try {
      c.recommender.base = parse_base_recommender(value);
    } catch (const Error&) {
      throw ConfigError(key + ": expected ubcf, ibcf, nmf or popular");
    }
  } else if (key == "recommend.ubcf_neighbors") c.recommender.ubcf_neighbors = positive(parse_number<std::size_t>(key, value));
  else if (key == "recommend.ibcf_neighbors") c.recommender.ibcf_neighbors = positive(parse_number<std::size_t>(key, value));
  else if (key == "recommend.nmf_rank") c.recommender.nmf.rank = positive(parse_number<std::size_t>(key, value));
  else if (key == "recommend.nmf_iterations") c.recommender.nmf.max_iterations = parse_number<std::size_t>(key, value);
  else if (key == "recommend.implicit") c.implicit = parse_bool(key, value);
  else if (key == "recommend.pad") c.pad_from_other_clusters = parse_bool(key, value);
  else if (key == "eval.folds") c.folds = parse_number<std::size_t>(key, value);
  else if (key == "eval.max_folds") c.max_folds = parse_number<std::size_t>(key, value);
  else if (key == "eval.n") c.n = positive(parse_number<std::size_t>(key, value));
  else if (key == "eval.report_n") {
    c.report_ns.clear();
    std::istringstream in(value);
    std::string part;
    while (std::getline(in, part, ',')) c.report_ns.push_back(positive(parse_number<std::size_t>(key, part)));
  } else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "threads") c.threads = static_cast<unsigned>(positive(parse_number<std::size_t>(key, value)));
  else if (key == "cache_dir") c.cache_dir = value;
  else throw ConfigError("unknown key '" + key + "'");
}

/// Applies `key=value`; blank lines and lines starting with '#' are skipped.
inline void apply_setting_line(PipelineConfig& c, const std::string& line, const std::string& source = "<override>",
                               std::size_t lineno = 0) {
  const auto t = detail::trim(line);
  if (t.empty() || t.front() == '#') return;
  const auto eq = t.find('=');
  if (eq == std::string_view::npos)
    throw ConfigError(source + (lineno ? ":" + std::to_string(lineno) : "") + ": expected key=value");
  apply_setting(c, std::string(detail::trim(t.substr(0, eq))), std::string(detail::trim(t.substr(eq + 1))));
}

inline void load_config_file(PipelineConfig& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) apply_setting_line(c, line, path, ++lineno);
}

inline void validate(PipelineConfig& c) {
  if (c.folds < 2) throw ConfigError("eval.folds must be at least 2");
  if (!(c.walk.return_p > 0.0) || !(c.walk.in_out_q > 0.0)) throw ConfigError("walk.p and walk.q must be positive");
  if (!(c.train.initial_learning_rate > 0.0)) throw ConfigError("embed.learning_rate must be positive");
  if (!(c.cluster.p_fraction > 0.0) || c.cluster.p_fraction > 1.0) throw ConfigError("cluster.p_fraction must be in (0, 1]");
  if (std::find(c.report_ns.begin(), c.report_ns.end(), c.n) == c.report_ns.end()) c.report_ns.push_back(c.n);
  std::sort(c.report_ns.begin(), c.report_ns.end());
  c.report_ns.erase(std::unique(c.report_ns.begin(), c.report_ns.end()), c.report_ns.end());
}

/// SHA-256 over strings, hex digest.
class Hasher {
 public:
  Hasher() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) throw Error(ErrorKind::Io, "sha256 init failed");
  }
  ~Hasher() { EVP_MD_CTX_free(ctx_); }
  Hasher(const Hasher&) = delete;
  Hasher& operator=(const Hasher&) = delete;

  Hasher& add(std::string_view s) {
    const std::uint64_t len = s.size();
    EVP_DigestUpdate(ctx_, &len, sizeof len);
    EVP_DigestUpdate(ctx_, s.data(), s.size());
    return *this;
  }
  template <class T>
    requires std::is_arithmetic_v<T>
  Hasher& add(T v) {
    std::ostringstream s;
    s << std::setprecision(17) << v;
    return add(s.str());
  }

  std::string hex() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_, md, &len);
    std::ostringstream s;
    for (unsigned i = 0; i < len; ++i) s << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return s.str();
  }

 private:
  EVP_MD_CTX* ctx_;
};

inline std::string dataset_digest(const Dataset& d) {
  Hasher h;
  for (const auto& r : d.ratings) h.add(r.user).add(r.item).add(r.rating).add(r.timestamp);
  h.add("memberships");
  for (auto [i, c] : d.memberships) h.add(i).add(c);
  h.add(d.users.size()).add(d.items.size()).add(d.categories.size());
  return h.hex();
}

inline Dataset load_dataset(const DatasetConfig& c) {
  Dataset d;
  switch (c.kind) {
    case DatasetKind::MovieLens: d = load_movielens(c.path + "/u.data", c.path + "/u.item"); break;
    case DatasetKind::Table: d = load_table(c.interactions, c.table, c.categories, c.category_table); break;
    case DatasetKind::Canonical: d = read_dataset(c.path); break;
  }
  if (!c.manifest.empty()) check_manifest(d, c.manifest);
  return d;
}

/// Stage artifacts stored as `<cache_dir>/<stage>-<key>.<ext>` in their module text formats.
class StageCache {
 public:
  explicit StageCache(std::string dir) : dir_(std::move(dir)) {
    if (!dir_.empty()) std::filesystem::create_directories(dir_);
  }

  bool enabled() const noexcept { return !dir_.empty(); }
  std::string path(const std::string& stage, const std::string& key, const std::string& ext) const {
    return dir_ + "/" + stage + "-" + key.substr(0, 32) + "." + ext;
  }

  /// Returns the cached artifact, or computes, stores and returns it.
  template <class T>
  T get(const std::string& stage, const std::string& key, const std::string& ext, const std::function<T()>& compute,
        const std::function<void(const T&, const std::string&)>& write,
        const std::function<T(const std::string&)>& read) {
    if (enabled()) {
      const auto p = path(stage, key, ext);
      if (std::filesystem::exists(p)) {
        ++hits_;
        return read(p);
      }
      T value = compute();
      const auto tmp = p + ".tmp";
      write(value, tmp);
      std::filesystem::rename(tmp, p);
      return value;
    }
    return compute();
  }

  std::size_t hits() const noexcept { return hits_; }

 private:
  std::string dir_;
  std::size_t hits_ = 0;
};

struct PipelineRun {
  MetricsReport report;
  /// Clusters found per fold (user, item), clustered model only.
  std::vector<std::pair<std::size_t, std::size_t>> cluster_counts;
  std::size_t cache_hits = 0;
};

namespace detail {

template <class F>
auto run_stage(const std::string& name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e);
  } catch (const std::exception& e) {
    throw StageError(name, Error(ErrorKind::Io, e.what()));
  }
}

inline void write_lists(const std::vector<TopNList>& lists, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << lists.size() << '\n';
  for (const auto& l : lists) {
    out << l.size();
    for (const auto& s : l) out << ' ' << s.item << ' ' << s.score;
    out << '\n';
  }
}

inline std::vector<TopNList> read_lists(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path);
  std::size_t users = 0;
  if (!(in >> users)) throw ParseError(path, 1, "missing count");
  std::vector<TopNList> lists(users);
  for (auto& l : lists) {
    std::size_t n = 0;
    if (!(in >> n)) throw ParseError(path, 0, "truncated");
    l.resize(n);
    for (auto& s : l)
      if (!(in >> s.item >> s.score)) throw ParseError(path, 0, "truncated");
  }
  return lists;
}

}  // namespace detail

struct FoldContext {
  std::size_t user_count = 0;
  std::size_t item_count = 0;
  std::size_t category_count = 0;
  const std::vector<std::pair<std::uint32_t, std::uint32_t>>* memberships = nullptr;
  std::string key;
};

/// Projection, walks, embedding and clustering of one side of a training fold.
inline ClusterModel cluster_side(const std::vector<Rating>& train, const FoldContext& ctx, Namespace side,
                                 const PipelineConfig& config, StageCache& cache, std::uint64_t fold_seed) {
  const std::string side_name = to_string(side);
  Hasher pk;
  pk.add(ctx.key).add("projection").add(side_name).add(config.projection.category_enrichment).add(config.projection.uncategorized_ca_floor);
  const std::string projection_key = pk.hex();
  const std::size_t nodes = side == Namespace::User ? ctx.user_count : ctx.item_count;

  auto projection = cache.get<ProjectionGraph>(
      "projection-" + side_name, projection_key, "tsv",
      [&] {
        return detail::run_stage("project", [&] {
          const auto ui = build_user_item(train, ctx.user_count, ctx.item_count);
          if (!config.projection.category_enrichment) {
            ProjectionOptions opt = config.projection;
            return project(ui, ui, side, opt);
          }
          const auto ic = build_item_category(*ctx.memberships, ctx.item_count, ctx.category_count);
          if (side == Namespace::Item) return project(ui, ic, side, config.projection);
          const auto uc = build_user_category(ui, ic);
          return project(ui, uc, side, config.projection);
        });
      },
      [](const ProjectionGraph& g, const std::string& p) { write_projection(g, p); },
      [&](const std::string& p) { return read_projection(p, nodes, side); });

  WalkConfig walk = config.walk;
  walk.seed = mix_seed(fold_seed, 0x3A1C, side == Namespace::User ? 1 : 2);
  TrainConfig train_cfg = config.train;
  train_cfg.seed = mix_seed(fold_seed, 0xE3B, side == Namespace::User ? 1 : 2);
  Hasher ek;
  ek.add(projection_key).add("embedding").add(walk.return_p).add(walk.in_out_q).add(walk.walk_length)
      .add(walk.walks_per_node).add(walk.seed).add(train_cfg.dim).add(train_cfg.window).add(train_cfg.negatives)
      .add(train_cfg.epochs).add(train_cfg.initial_learning_rate).add(train_cfg.seed).add(config.threads);
  const std::string embedding_key = ek.hex();

  auto embedding = cache.get<EmbeddingMatrix>(
      "embedding-" + side_name, embedding_key, "emb",
      [&] {
        return detail::run_stage("embed", [&] {
          if (projection.edges.empty()) return EmbeddingMatrix(side, nodes, train_cfg.dim);
          const auto walks = generate_walks(projection, walk, config.threads);
          return train_sgns(walks, nodes, train_cfg, side, config.threads);
        });
      },
      [](const EmbeddingMatrix& m, const std::string& p) { write_embeddings(m, p); },
      [&](const std::string& p) { return read_embeddings(p, side); });

  ClusterConfig cluster_cfg = config.cluster;
  cluster_cfg.spectral.kmeans.seed = mix_seed(fold_seed, 0xC1, side == Namespace::User ? 1 : 2);
  Hasher ck;
  ck.add(embedding_key).add("cluster").add(cluster_cfg.p_fraction).add(static_cast<int>(cluster_cfg.density_rule))
      .add(cluster_cfg.dnn.theta.value_or(-1.0)).add(cluster_cfg.dnn.theta_factor)
      .add(cluster_cfg.dnn.initial_neighbors.value_or(0)).add(cluster_cfg.center_sigmas)
      .add(cluster_cfg.spectral.dense_limit).add(cluster_cfg.spectral.kmeans.seed);
  return cache.get<ClusterModel>(
      "clusters-" + side_name, ck.hex(), "tsv",
      [&] { return detail::run_stage("cluster", [&] { return cluster_embeddings(embedding, cluster_cfg).model; }); },
      [](const ClusterModel& m, const std::string& p) { write_clusters(m, p); },
      [](const std::string& p) { return read_clusters(p); });
}

/// Cross-validated run of the configured model. Progress lines go to `log` when given.
inline PipelineRun run_pipeline(PipelineConfig config, std::ostream* log = nullptr) {
  validate(config);
  const Dataset data = detail::run_stage("ingest", [&] { return load_dataset(config.dataset); });
  StageCache cache(config.cache_dir);
  PipelineRun run;
  run.report.ns = config.report_ns;
  run.report.primary_n = config.n;
  const std::size_t max_n = config.report_ns.back();

  const FoldPlan plan = split(data.ratings, config.folds, mix_seed(config.seed, 0x5B1));
  const std::string data_key = dataset_digest(data);
  const std::size_t folds = config.max_folds ? std::min(config.max_folds, config.folds) : config.folds;

  for (std::size_t f = 0; f < folds; ++f) {
    const auto started = std::chrono::steady_clock::now();
    const FoldData fold = fold_data(data.ratings, plan, f);
    FoldContext ctx{data.users.size(), data.items.size(), data.categories.size(), &data.memberships, {}};
    Hasher fk;
    fk.add(data_key).add("fold").add(config.folds).add(config.seed).add(f);
    ctx.key = fk.hex();
    const std::uint64_t fold_seed = mix_seed(config.seed, 0xF0, f);

    TwoPhaseOptions options;
    options.recommender = config.recommender;
    options.recommender.nmf.seed = mix_seed(fold_seed, 0x11F);
    options.n = max_n;
    options.implicit = config.implicit;
    options.pad_from_other_clusters = config.pad_from_other_clusters;

    Hasher rk;
    rk.add(ctx.key).add("recommend").add(to_string(options.recommender.base)).add(options.recommender.ubcf_neighbors)
        .add(options.recommender.ibcf_neighbors).add(options.recommender.nmf.rank)
        .add(options.recommender.nmf.max_iterations).add(options.recommender.nmf.seed).add(options.n)
        .add(options.implicit);

    std::vector<TopNList> lists;
    if (config.model == ModelKind::Original) {
      rk.add("original");
      lists = cache.get<std::vector<TopNList>>(
          "lists", rk.hex(), "txt",
          [&] {
            return detail::run_stage("recommend", [&] {
              return recommend_all(fold.train, data.users.size(), data.items.size(), options);
            });
          },
          detail::write_lists, detail::read_lists);
    } else {
      const auto users = cluster_side(fold.train, ctx, Namespace::User, config, cache, fold_seed);
      const auto items = cluster_side(fold.train, ctx, Namespace::Item, config, cache, fold_seed);
      run.cluster_counts.emplace_back(users.k, items.k);
      std::ostringstream models;
      write_clusters(users, models);
      write_clusters(items, models);
      rk.add("clustered").add(options.pad_from_other_clusters).add(models.str());
      lists = cache.get<std::vector<TopNList>>(
          "lists", rk.hex(), "txt",
          [&] {
            return detail::run_stage("recommend", [&] {
              return two_phase(fold.train, data.users.size(), data.items.size(), users, items, options).lists;
            });
          },
          detail::write_lists, detail::read_lists);
    }

    std::vector<Metrics> row;
    detail::run_stage("evaluate", [&] {
      for (auto n : config.report_ns) row.push_back(score(lists, fold.test, n));
      return 0;
    });
    run.report.folds.push_back(std::move(row));
    if (log) {
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
      const auto& m = run.report.folds.back()[run.report.index_of(config.n)];
      *log << "fold " << f + 1 << "/" << folds;
      if (!run.cluster_counts.empty() && config.model == ModelKind::Clustered)
        *log << " clusters " << run.cluster_counts.back().first << "x" << run.cluster_counts.back().second;
      *log << " P@" << config.n << "=" << detail::fixed(m.precision, 4) << " R=" << detail::fixed(m.recall, 4)
           << " HR=" << detail::fixed(m.hit_rate, 4) << " ARHR=" << detail::fixed(m.arhr, 4) << " ("
           << detail::fixed(secs, 1) << "s)\n";
    }
  }
  run.cache_hits = cache.hits();
  return run;
}

}  // namespace n2vrec
