#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "n2vrec/pipeline.hpp"

using namespace n2vrec;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("n2vrec_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Two user communities, each rating mostly its own half of the items.
Dataset communities(std::uint64_t seed = 1) {
  std::mt19937_64 rng(seed);
  Dataset d;
  for (int u = 0; u < 60; ++u) d.users.intern("u" + std::to_string(u));
  for (int i = 0; i < 80; ++i) d.items.intern("i" + std::to_string(i));
  for (int c = 0; c < 4; ++c) d.categories.intern("c" + std::to_string(c));
  std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
  for (std::uint32_t u = 0; u < 60; ++u) {
    const std::uint32_t base = u < 30 ? 0 : 40;
    while (seen.size() < (u + 1) * 14) {
      const bool home = rng() % 8 != 0;
      const auto item = static_cast<std::uint32_t>(home ? base + rng() % 40 : rng() % 80);
      if (seen.insert({u, item}).second) d.ratings.push_back({u, item, static_cast<double>(1 + rng() % 5), 0});
    }
  }
  for (std::uint32_t i = 0; i < 80; ++i) {
    d.memberships.emplace_back(i, i < 40 ? 0 : 2);
    d.memberships.emplace_back(i, (i < 40 ? 1 : 3));
  }
  return d;
}

PipelineConfig small_config(const fs::path& data) {
  PipelineConfig c;
  c.dataset.kind = DatasetKind::Canonical;
  c.dataset.path = data.string();
  c.walk.walk_length = 20;
  c.walk.walks_per_node = 4;
  c.train.dim = 16;
  c.train.window = 4;
  c.folds = 3;
  c.max_folds = 2;
  return c;
}

int run_cli(const std::string& args) {
  const int status = std::system((std::string(N2VREC_CLI) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, SettingsAndErrors) {
  PipelineConfig c;
  apply_setting_line(c, "walk.p = 0.5");
  apply_setting_line(c, "  # comment");
  apply_setting_line(c, "recommend.base=ibcf");
  apply_setting_line(c, "eval.report_n=5,20");
  apply_setting_line(c, "enrichment=off");
  apply_setting_line(c, "dataset.delimiter=tab");
  EXPECT_EQ(c.walk.return_p, 0.5);
  EXPECT_EQ(c.recommender.base, BaseRecommender::Ibcf);
  EXPECT_FALSE(c.projection.category_enrichment);
  EXPECT_EQ(c.dataset.table.delimiter, '\t');
  validate(c);
  EXPECT_EQ(c.report_ns, (std::vector<std::size_t>{5, 10, 20}));
  EXPECT_THROW(apply_setting_line(c, "walk.r=1"), ConfigError);
  EXPECT_THROW(apply_setting_line(c, "walk.p=fast"), ConfigError);
  EXPECT_THROW(apply_setting_line(c, "walk.length=0"), ConfigError);
  EXPECT_THROW(apply_setting_line(c, "recommend.base=svd"), ConfigError);
  EXPECT_THROW(apply_setting_line(c, "no equals sign"), ConfigError);
  c.folds = 1;
  EXPECT_THROW(validate(c), ConfigError);
}

TEST(Config, DefaultsAndFile) {
  PipelineConfig c;
  EXPECT_EQ(c.train.dim, 100u);
  EXPECT_EQ(c.walk.return_p, 1.0);
  EXPECT_EQ(c.walk.in_out_q, 1.0);
  EXPECT_EQ(c.cluster.p_fraction, 0.02);
  EXPECT_EQ(c.recommender.nmf.rank, 40u);
  EXPECT_EQ(c.folds, 5u);
  auto dir = scratch("config");
  write_file(dir / "run.conf", "# run\nseed=7\nembed.dim=32\n\ncluster.theta=1.5\n");
  load_config_file(c, (dir / "run.conf").string());
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.train.dim, 32u);
  EXPECT_EQ(c.cluster.dnn.theta, std::optional<double>(1.5));
  EXPECT_THROW(load_config_file(c, (dir / "missing.conf").string()), ConfigError);
}

TEST(Ingest, MovieLensLayout) {
  auto dir = scratch("ml");
  write_file(dir / "u.data", "1\t10\t5\t100\n2\t10\t3\t101\n1\t20\t4\t102\n");
  std::string flags0, flags1;
  for (int g = 0; g < 19; ++g) flags0 += g == 1 ? "|1" : "|0";
  for (int g = 0; g < 19; ++g) flags1 += g == 5 || g == 8 ? "|1" : "|0";
  write_file(dir / "u.item", "10|Film A|01-Jan-1995||http://x" + flags0 + "\n20|Film B|01-Jan-1995||http://y" + flags1 + "\n");
  auto d = load_movielens((dir / "u.data").string(), (dir / "u.item").string());
  auto n = counts(d);
  EXPECT_EQ(n.users, 2u);
  EXPECT_EQ(n.items, 2u);
  EXPECT_EQ(n.interactions, 3u);
  EXPECT_EQ(d.memberships.size(), 3u);
  EXPECT_EQ(d.ratings[0].timestamp, 100);

  std::string bad;
  for (int g = 0; g < 19; ++g) bad += "|2";
  write_file(dir / "bad.item", "10|Film A|x||y" + bad + "\n");
  EXPECT_THROW(load_movielens((dir / "u.data").string(), (dir / "bad.item").string()), ParseError);
  write_file(dir / "empty.data", "");
  try {
    load_movielens((dir / "empty.data").string(), (dir / "u.item").string());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DatasetEmpty);
  }
}

TEST(Ingest, DelimitedTables) {
  auto dir = scratch("table");
  write_file(dir / "r.csv", "ts,user,item,rating\n5,ann,x,4\n6,bob,x,2\n7,ann,y,1\n");
  write_file(dir / "c.csv", "item,category\nx,drama|comedy\ny,drama\n");
  TableFormat t;
  t.timestamp_column = "ts";
  CategoryFormat cf;
  cf.multi_separator = '|';
  auto d = load_table((dir / "r.csv").string(), t, (dir / "c.csv").string(), cf);
  EXPECT_EQ(d.users.size(), 2u);
  EXPECT_EQ(d.categories.size(), 2u);
  EXPECT_EQ(d.memberships.size(), 3u);
  TableFormat wrong;
  wrong.user_column = "person";
  EXPECT_THROW(load_table((dir / "r.csv").string(), wrong), ParseError);
}

TEST(Ingest, CanonicalRoundTripAndManifest) {
  auto dir = scratch("canonical");
  auto d = communities();
  write_dataset(d, (dir / "data").string());
  auto back = read_dataset((dir / "data").string());
  EXPECT_EQ(back.ratings, d.ratings);
  EXPECT_EQ(back.memberships, d.memberships);
  EXPECT_EQ(back.items.external(7), "i7");
  write_file(dir / "ok.manifest", "users=60\nitems=80\ninteractions=840\ncategories=4\n");
  EXPECT_NO_THROW(check_manifest(back, (dir / "ok.manifest").string()));
  write_file(dir / "bad.manifest", "users=61\n");
  try {
    check_manifest(back, (dir / "bad.manifest").string());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::IngestMismatch);
  }
}

TEST(Pipeline, OriginalAndClusteredRun) {
  auto dir = scratch("pipeline");
  write_dataset(communities(), (dir / "data").string());
  auto c = small_config(dir / "data");
  c.model = ModelKind::Original;
  auto original = run_pipeline(c);
  ASSERT_EQ(original.report.folds.size(), 2u);
  c.model = ModelKind::Clustered;
  auto clustered = run_pipeline(c);
  ASSERT_EQ(clustered.report.folds.size(), 2u);
  ASSERT_EQ(clustered.cluster_counts.size(), 2u);
  for (const auto& [u, i] : clustered.cluster_counts) {
    EXPECT_GE(u, 1u);
    EXPECT_GE(i, 1u);
  }
  const auto m = clustered.report.mean(10);
  EXPECT_GT(m.hit_rate, 0.0);
  EXPECT_LE(m.precision, 1.0);
}

TEST(Pipeline, CacheReusesStagesWithIdenticalResults) {
  auto dir = scratch("cache");
  write_dataset(communities(2), (dir / "data").string());
  auto c = small_config(dir / "data");
  c.max_folds = 1;
  const auto fresh = run_pipeline(c);
  c.cache_dir = (dir / "cache").string();
  const auto first = run_pipeline(c);
  EXPECT_EQ(first.cache_hits, 0u);
  const auto second = run_pipeline(c);
  EXPECT_EQ(second.cache_hits, 7u);  // 3 stages per side plus the lists
  for (const auto* run : {&first, &second}) {
    std::ostringstream a, b;
    write_report_csv(fresh.report, a);
    write_report_csv(run->report, b);
    EXPECT_EQ(a.str(), b.str());
  }
}

TEST(Pipeline, WithoutCategoryEnrichment) {
  auto dir = scratch("plain");
  write_dataset(communities(3), (dir / "data").string());
  auto c = small_config(dir / "data");
  c.max_folds = 1;
  c.projection.category_enrichment = false;
  auto run = run_pipeline(c);
  EXPECT_EQ(run.report.folds.size(), 1u);
}

TEST(Pipeline, IngestFailureNamesStage) {
  PipelineConfig c;
  c.dataset.kind = DatasetKind::Canonical;
  c.dataset.path = "/nonexistent/n2vrec";
  try {
    run_pipeline(c);
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "ingest");
  }
}

TEST(Cli, ExitCodes) {
  auto dir = scratch("cli");
  write_dataset(communities(4), (dir / "data").string());
  const std::string data = "--set dataset.kind=canonical --set dataset.path=" + (dir / "data").string();
  EXPECT_EQ(run_cli("--set walk.q=-1 pipeline --quiet"), 2);
  EXPECT_EQ(run_cli("--set no.such.key=1 pipeline --quiet"), 2);
  EXPECT_EQ(run_cli("--set dataset.path=/nonexistent ingest --out " + (dir / "x").string()), 3);
  const std::string csv = (dir / "report.csv").string();
  EXPECT_EQ(run_cli(data + " --set model=original --set eval.max_folds=1 pipeline --quiet --csv " + csv), 0);
  EXPECT_NE(read_file(csv).find("fold,n,users,precision,recall,hr,arhr"), std::string::npos);
}

TEST(Cli, StagewiseCommands) {
  auto dir = scratch("stages");
  write_dataset(communities(5), (dir / "data").string());
  const std::string d = (dir / "data").string(), o = dir.string();
  const std::string small = "--set walk.length=20 --set walk.per_node=4 --set embed.dim=16 ";
  ASSERT_EQ(run_cli(small + "project --data " + d + " --side user --out " + o + "/u.proj"), 0);
  ASSERT_EQ(run_cli(small + "project --data " + d + " --side item --out " + o + "/i.proj"), 0);
  ASSERT_EQ(run_cli(small + "embed --data " + d + " --projection " + o + "/u.proj --side user --out " + o + "/u.emb"), 0);
  ASSERT_EQ(run_cli(small + "embed --data " + d + " --projection " + o + "/i.proj --side item --out " + o + "/i.emb"), 0);
  ASSERT_EQ(run_cli("cluster --embedding " + o + "/u.emb --out " + o + "/u.clu"), 0);
  ASSERT_EQ(run_cli("cluster --embedding " + o + "/i.emb --diagnostics " + o + "/i.csv --out " + o + "/i.clu"), 0);
  ASSERT_EQ(run_cli("recommend --data " + d + " --user-clusters " + o + "/u.clu --item-clusters " + o +
                    "/i.clu --out " + o + "/recs.csv"),
            0);
  EXPECT_EQ(read_file(o + "/recs.csv").rfind("user_id,rank,item_id,score\n", 0), 0u);
  EXPECT_EQ(run_cli("evaluate --data " + d + " --recommendations " + o + "/recs.csv --test " + d + " --json " + o +
                    "/eval.json"),
            0);
  auto report = nlohmann::json::parse(read_file(o + "/eval.json"));
  EXPECT_TRUE(report.contains("mean"));
}
