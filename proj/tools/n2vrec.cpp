// n2vrec command line: dataset ingestion, the individual stages, and the cross-validated pipeline.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "n2vrec/n2vrec.hpp"

namespace {

using namespace n2vrec;

enum Exit { Ok = 0, ConfigFailure = 2, IngestFailure = 3, StageFailure = 4 };

struct Globals {
  std::string config_path;
  std::vector<std::string> settings;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string cache_dir;
  bool seed_given = false;
};

PipelineConfig make_config(const Globals& g, CLI::App& app) {
  PipelineConfig c;
  if (!g.config_path.empty()) load_config_file(c, g.config_path);
  for (const auto& s : g.settings) apply_setting_line(c, s);
  if (app.count("--seed")) c.seed = g.seed;
  if (app.count("--threads")) c.threads = g.threads;
  if (app.count("--cache-dir")) c.cache_dir = g.cache_dir;
  validate(c);
  return c;
}

Namespace parse_side(const std::string& s) {
  if (s == "user") return Namespace::User;
  if (s == "item") return Namespace::Item;
  throw ConfigError("side must be user or item");
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  return out;
}

void print_counts(const Dataset& d) {
  const auto c = counts(d);
  std::cout << "rows " << d.rows_read << "\nusers " << c.users << "\nitems " << c.items << "\ninteractions "
            << c.interactions << "\ncategories " << c.categories << "\n";
}

std::vector<TopNList> read_recommendation_csv(const std::string& path, const Dataset& d) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path);
  std::vector<TopNList> lists(d.users.size());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || lineno == 1) continue;
    std::stringstream fields(line);
    std::string user, rank, item, score;
    if (!std::getline(fields, user, ',') || !std::getline(fields, rank, ',') || !std::getline(fields, item, ',') ||
        !std::getline(fields, score))
      throw ParseError(path, lineno, "expected user_id,rank,item_id,score");
    const auto u = d.users.find(user);
    const auto i = d.items.find(item);
    if (!u || !i) throw ParseError(path, lineno, "unknown user or item");
    lists[*u].push_back({*i, std::stod(score)});
  }
  return lists;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Clustering-based top-N recommender over node2vec embeddings of projection networks"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "key=value configuration file");
  app.add_option("--set", g.settings, "configuration override key=value (repeatable)");
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--threads", g.threads, "worker threads (1 is bitwise reproducible)")->check(CLI::PositiveNumber);
  app.add_option("--cache-dir", g.cache_dir, "stage artifact cache directory");

  auto* ingest = app.add_subcommand("ingest", "convert a dataset into the canonical directory format");
  std::string out_path;
  ingest->add_option("--out", out_path, "output directory")->required();

  auto* project_cmd = app.add_subcommand("project", "one-mode projection network of a canonical dataset");
  std::string data_dir, side_name = "user";
  project_cmd->add_option("--data", data_dir, "canonical dataset directory")->required();
  project_cmd->add_option("--side", side_name, "user or item");
  project_cmd->add_option("--out", out_path, "projection file")->required();

  auto* embed = app.add_subcommand("embed", "random walks and skip-gram embedding of a projection network");
  std::string projection_path, walks_path;
  embed->add_option("--data", data_dir, "canonical dataset directory")->required();
  embed->add_option("--projection", projection_path, "projection file")->required();
  embed->add_option("--side", side_name, "user or item");
  embed->add_option("--walks-out", walks_path, "also write the walk corpus here");
  embed->add_option("--out", out_path, "embedding file")->required();

  auto* cluster = app.add_subcommand("cluster", "density-peak spectral clustering of an embedding");
  std::string embedding_path, diagnostics_path;
  cluster->add_option("--embedding", embedding_path, "embedding file")->required();
  cluster->add_option("--diagnostics", diagnostics_path, "per-point rho/delta/gamma CSV");
  cluster->add_option("--out", out_path, "cluster file")->required();

  auto* recommend = app.add_subcommand("recommend", "top-N lists for every user from all interactions");
  std::string user_clusters_path, item_clusters_path;
  recommend->add_option("--data", data_dir, "canonical dataset directory")->required();
  recommend->add_option("--user-clusters", user_clusters_path, "user cluster file (clustered model)");
  recommend->add_option("--item-clusters", item_clusters_path, "item cluster file (clustered model)");
  recommend->add_option("--out", out_path, "recommendation CSV")->required();

  auto* evaluate = app.add_subcommand("evaluate", "score a recommendation CSV against held-out interactions");
  std::string recommendations_path, test_path;
  evaluate->add_option("--data", data_dir, "canonical dataset directory")->required();
  evaluate->add_option("--recommendations", recommendations_path, "recommendation CSV")->required();
  evaluate->add_option("--test", test_path, "held-out interactions (canonical dataset directory)")->required();
  std::string json_path, csv_path;
  evaluate->add_option("--json", json_path, "write the report as JSON");

  auto* pipeline = app.add_subcommand("pipeline", "cross-validated run of the configured model");
  pipeline->add_option("--csv", csv_path, "write the report as CSV");
  pipeline->add_option("--json", json_path, "write the report as JSON");
  bool quiet = false;
  pipeline->add_flag("--quiet", quiet, "no progress output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? Ok : ConfigFailure;
  }

  PipelineConfig config;
  try {
    config = make_config(g, app);
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return ConfigFailure;
  }

  try {
    if (ingest->parsed()) {
      Dataset d;
      try {
        d = load_dataset(config.dataset);
      } catch (const Error& e) {
        std::cerr << "ingest error: " << e.what() << "\n";
        return IngestFailure;
      }
      write_dataset(d, out_path);
      print_counts(d);
      return Ok;
    }

    Dataset d;
    if (!data_dir.empty()) {
      try {
        d = read_dataset(data_dir);
      } catch (const Error& e) {
        std::cerr << "ingest error: " << e.what() << "\n";
        return IngestFailure;
      }
    }

    if (project_cmd->parsed()) {
      const auto side = parse_side(side_name);
      const auto ui = build_user_item(d.ratings, d.users.size(), d.items.size());
      ProjectionGraph g2;
      if (!config.projection.category_enrichment) {
        g2 = project(ui, side);
      } else {
        const auto ic = build_item_category(d.memberships, d.items.size(), d.categories.size());
        g2 = side == Namespace::Item ? project(ui, ic, side, config.projection)
                                     : project(ui, build_user_category(ui, ic), side, config.projection);
      }
      write_projection(g2, out_path);
      std::cout << "nodes " << g2.node_count << "\nedges " << g2.edges.size() << "\n";
    } else if (embed->parsed()) {
      const auto side = parse_side(side_name);
      const std::size_t nodes = side == Namespace::User ? d.users.size() : d.items.size();
      const auto graph = read_projection(projection_path, nodes, side);
      WalkConfig walk = config.walk;
      walk.seed = mix_seed(config.seed, 0x3A1C);
      TrainConfig train = config.train;
      train.seed = mix_seed(config.seed, 0xE3B);
      const auto walks = generate_walks(graph, walk, config.threads);
      if (!walks_path.empty()) write_walks(walks, walks_path);
      write_embeddings(train_sgns(walks, nodes, train, side, config.threads), out_path);
      std::cout << "walks " << walks.size() << "\n";
    } else if (cluster->parsed()) {
      const auto embedding = read_embeddings(embedding_path);
      ClusterConfig cc = config.cluster;
      cc.spectral.kmeans.seed = mix_seed(config.seed, 0xC1);
      const auto result = cluster_embeddings(embedding, cc);
      write_clusters(result.model, out_path);
      if (!diagnostics_path.empty()) {
        auto out = open_output(diagnostics_path);
        write_cluster_diagnostics(result, out);
      }
      std::cout << "clusters " << result.model.k << "\ncenters " << result.model.centers.size() << "\n";
    } else if (recommend->parsed()) {
      TwoPhaseOptions options;
      options.recommender = config.recommender;
      options.recommender.nmf.seed = mix_seed(config.seed, 0x11F);
      options.n = config.n;
      options.implicit = config.implicit;
      options.pad_from_other_clusters = config.pad_from_other_clusters;
      std::vector<TopNList> lists;
      if (config.model == ModelKind::Original || user_clusters_path.empty() || item_clusters_path.empty()) {
        if (config.model == ModelKind::Clustered)
          throw ConfigError("the clustered model needs --user-clusters and --item-clusters");
        lists = recommend_all(d.ratings, d.users.size(), d.items.size(), options);
      } else {
        lists = two_phase(d.ratings, d.users.size(), d.items.size(), read_clusters(user_clusters_path),
                          read_clusters(item_clusters_path), options)
                    .lists;
      }
      write_recommendations(lists, d.users, d.items, out_path);
    } else if (evaluate->parsed()) {
      const Dataset test = read_dataset(test_path);
      std::vector<Rating> held_out;
      for (const auto& r : test.ratings) {
        const auto u = d.users.find(test.users.external(r.user));
        const auto i = d.items.find(test.items.external(r.item));
        if (u && i) held_out.push_back({*u, *i, r.rating, r.timestamp});
      }
      const auto lists = read_recommendation_csv(recommendations_path, d);
      MetricsReport report;
      report.ns = config.report_ns;
      report.primary_n = config.n;
      std::vector<Metrics> row;
      for (auto n : config.report_ns) row.push_back(score(lists, held_out, n));
      report.folds.push_back(std::move(row));
      write_report_table(report, std::cout);
      if (!json_path.empty()) open_output(json_path) << report_json(report).dump(2) << "\n";
    } else if (pipeline->parsed()) {
      const auto run = run_pipeline(config, quiet ? nullptr : &std::cerr);
      write_report_table(run.report, std::cout);
      if (!csv_path.empty()) {
        auto out = open_output(csv_path);
        write_report_csv(run.report, out);
      }
      if (!json_path.empty()) open_output(json_path) << report_json(run.report).dump(2) << "\n";
      if (!quiet && config.cache_dir.size()) std::cerr << "cache hits " << run.cache_hits << "\n";
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return ConfigFailure;
  } catch (const StageError& e) {
    std::cerr << e.what() << "\n";
    return e.stage() == "ingest" ? IngestFailure : StageFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return StageFailure;
  }
  return Ok;
}
