#include <gtest/gtest.h>

#include <json.hpp>
#include <sstream>

#include "ease/cli.h"
#include "ease/error.h"
#include "ease/synthetic.h"
#include "fixtures.h"

using namespace ease;
using nlohmann::json;

namespace {

struct Outcome {
  int status;
  std::string out;
  std::string err;
};

Outcome run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int status = run_cli(args, out, err);
  return {status, out.str(), err.str()};
}

std::size_t count_lines(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

std::vector<json> read_jsonl(const std::string& path) {
  std::vector<json> rows;
  std::istringstream in(fx::read_file(path));
  std::string line;
  while (std::getline(in, line)) rows.push_back(json::parse(line));
  return rows;
}

// A small synthetic dataset written once per test binary.
class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    data_dir_ = new fx::TempDir;
    SyntheticOptions o;
    o.sentences = 300;
    o.dev_pairs = 40;
    o.test_pairs = 40;
    write_synthetic(make_synthetic(o), data_dir_->path().string());
  }
  static void TearDownTestSuite() {
    delete data_dir_;
    data_dir_ = nullptr;
  }

  static std::string data(const std::string& name) { return (*data_dir_) / name; }

  std::vector<std::string> train_args(const std::string& out) const {
    return {"train",        "--corpus",     data("corpus.jsonl"), "--catalog", data("catalog.jsonl"),
            "--min-count",  "1",            "--d-s",              "8",         "--d-e",
            "8",            "--batch-size", "32",                 "--dev-src", data("dev.src.tsv"),
            "--dev-tgt",    data("dev.tgt.tsv"), "--eval-every",  "4",         "--out",
            out};
  }

  fx::TempDir scratch_;

 private:
  static fx::TempDir* data_dir_;
};

fx::TempDir* CliTest::data_dir_ = nullptr;

}  // namespace

// ---- general ------------------------------------------------------------------

TEST(Cli, NoSubcommandIsUsageError) { EXPECT_EQ(run({}).status, 2); }

TEST(Cli, UnknownSubcommandIsUsageError) { EXPECT_EQ(run({"frobnicate"}).status, 2); }

TEST(Cli, HelpSucceeds) {
  const Outcome o = run({"--help"});
  EXPECT_EQ(o.status, 0);
  EXPECT_NE(o.out.find("train"), std::string::npos);
}

TEST(Fnv, KnownVectors) {
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
}

TEST(Report, SortedKeysWithoutWallClock) {
  Report r;
  r.metrics = {{"zeta", 1.0}, {"alpha", 0.5}};
  r.config_hash = "h";
  r.run_id = "id";
  r.wall_clock_seconds = 12.0;
  const std::string text = r.to_json();
  EXPECT_EQ(text.find("wall"), std::string::npos);
  EXPECT_LT(text.find("alpha"), text.find("zeta"));
  EXPECT_LT(text.find("config_hash"), text.find("metrics"));
}

TEST(Report, NonFiniteMetricRejected) {
  Report r;
  r.metrics = {{"bad", std::nan("")}};
  try {
    r.to_json();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNonFinite);
  }
}

TEST(RunConfigTest, Validation) {
  auto kind = [](RunConfig c) {
    try {
      c.validate();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::kIo;
  };
  EXPECT_EQ(kind({}), ErrorKind::kIo);
  EXPECT_EQ(kind({.batch_size = 0}), ErrorKind::kConfig);
  EXPECT_EQ(kind({.eval_every = 0}), ErrorKind::kConfig);
  EXPECT_EQ(kind({.tau = 0.0}), ErrorKind::kConfig);
  EXPECT_EQ(kind({.dropout_p = 1.0}), ErrorKind::kConfig);
  EXPECT_EQ(kind({.lambda = 0.0, .no_self_cl = true}), ErrorKind::kConfig);
  RunConfig a, b;
  b.out = "elsewhere";
  EXPECT_EQ(a.canonical_json(), b.canonical_json());
  b.seed = 1;
  EXPECT_NE(a.canonical_json(), b.canonical_json());
}

// ---- ingest and mine ------------------------------------------------------------

TEST_F(CliTest, IngestWritesOneLinePerPair) {
  const std::string dump = scratch_ / "pairs.jsonl";
  const Outcome o = run({"ingest", "--corpus", data("corpus.jsonl"), "--catalog",
                         data("catalog.jsonl"), "--min-count", "1", "--out", dump});
  ASSERT_EQ(o.status, 0) << o.err;
  const std::size_t lines = count_lines(fx::read_file(dump));
  EXPECT_GT(lines, 300u);
  EXPECT_NE(o.out.find("pairs\t" + std::to_string(lines)), std::string::npos);
  for (const auto& row : read_jsonl(dump)) EXPECT_TRUE(row["hard_negative"].is_null());
}

TEST_F(CliTest, IngestHugeMinCountWarnsAndSucceeds) {
  const std::string dump = scratch_ / "pairs.jsonl";
  const Outcome o = run({"ingest", "--corpus", data("corpus.jsonl"), "--catalog",
                         data("catalog.jsonl"), "--min-count", "1000000", "--out", dump});
  EXPECT_EQ(o.status, 0);
  EXPECT_EQ(fx::read_file(dump), "");
  EXPECT_NE(o.err.find("warning"), std::string::npos);
}

TEST_F(CliTest, IngestWithoutCatalogShowsUsage) {
  const Outcome o = run({"ingest", "--corpus", data("corpus.jsonl"), "--out", scratch_ / "x"});
  EXPECT_EQ(o.status, 2);
  EXPECT_NE(o.err.find("--catalog"), std::string::npos);
  EXPECT_NE(o.err.find("Usage"), std::string::npos);
}

TEST_F(CliTest, MissingInputFileIsRuntimeFailure) {
  const Outcome o = run({"ingest", "--corpus", scratch_ / "missing.jsonl", "--catalog",
                         data("catalog.jsonl"), "--out", scratch_ / "x"});
  EXPECT_EQ(o.status, 1);
}

TEST_F(CliTest, LockedOutputIsRefused) {
  const std::string dump = scratch_ / "pairs.jsonl";
  fx::write_file(dump + ".lock", "");
  const Outcome o = run({"ingest", "--corpus", data("corpus.jsonl"), "--catalog",
                         data("catalog.jsonl"), "--out", dump});
  EXPECT_EQ(o.status, 1);
  EXPECT_NE(o.err.find("locked"), std::string::npos);
}

TEST_F(CliTest, MineAfterIngestEqualsIngestWithMining) {
  const std::string plain = scratch_ / "plain.jsonl";
  const std::string mined = scratch_ / "mined.jsonl";
  const std::string direct = scratch_ / "direct.jsonl";
  const std::vector<std::string> common{"--corpus", data("corpus.jsonl"), "--catalog",
                                        data("catalog.jsonl"), "--min-count", "1", "--seed", "5"};
  auto with = [&](std::vector<std::string> head, std::vector<std::string> tail) {
    head.insert(head.end(), common.begin(), common.end());
    head.insert(head.end(), tail.begin(), tail.end());
    return head;
  };
  ASSERT_EQ(run(with({"ingest"}, {"--out", plain})).status, 0);
  ASSERT_EQ(run(with({"mine"}, {"--instances", plain, "--out", mined})).status, 0);
  ASSERT_EQ(run(with({"ingest", "--mine"}, {"--out", direct})).status, 0);
  EXPECT_EQ(fx::read_file(mined), fx::read_file(direct));
  std::size_t negatives = 0;
  for (const auto& row : read_jsonl(mined)) negatives += !row["hard_negative"].is_null();
  EXPECT_GT(negatives, 0u);
}

// ---- train ------------------------------------------------------------------------

TEST_F(CliTest, TrainWritesArtifacts) {
  const std::string out = scratch_ / "run";
  const Outcome o = run(train_args(out));
  ASSERT_EQ(o.status, 0) << o.err;
  for (const char* f : {"checkpoint.ease", "vocab.txt", "entities.txt", "train_log.jsonl",
                        "steps.jsonl", "report.json", "timing.json"}) {
    EXPECT_TRUE(std::filesystem::exists(out + "/" + f)) << f;
  }
  const json report = json::parse(fx::read_file(out + "/report.json"));
  const json& m = report["metrics"];
  EXPECT_GT(m["total_steps"].get<double>(), 0);
  EXPECT_EQ(report["run_id"].get<std::string>().size(), 12u);
  const auto log = read_jsonl(out + "/train_log.jsonl");
  ASSERT_FALSE(log.empty());
  EXPECT_EQ(log.back()["step"].get<double>(), m["total_steps"].get<double>());
  EXPECT_FALSE(std::filesystem::exists(out + "/.lock"));
}

TEST_F(CliTest, TrainIsByteDeterministic) {
  const std::string a = scratch_ / "a", b = scratch_ / "b";
  ASSERT_EQ(run(train_args(a)).status, 0);
  ASSERT_EQ(run(train_args(b)).status, 0);
  for (const char* f : {"checkpoint.ease", "report.json", "train_log.jsonl", "steps.jsonl"}) {
    EXPECT_EQ(fx::read_file(a + "/" + f), fx::read_file(b + "/" + f)) << f;
  }
}

TEST_F(CliTest, NoSelfClLambdaOneTrainsOnEntityLoss) {
  const std::string out = scratch_ / "entity-only";
  auto args = train_args(out);
  args.insert(args.end(), {"--no-self-cl", "--lambda", "1"});
  ASSERT_EQ(run(args).status, 0);
  const auto steps = read_jsonl(out + "/steps.jsonl");
  ASSERT_FALSE(steps.empty());
  for (const auto& s : steps) {
    EXPECT_EQ(s["loss"].get<double>(), s["entity_loss"].get<double>());
    EXPECT_EQ(s["self_loss"].get<double>(), 0.0);
  }
}

TEST_F(CliTest, NoSelfClWithZeroLambdaIsConfigError) {
  auto args = train_args(scratch_ / "zero");
  args.insert(args.end(), {"--no-self-cl", "--lambda", "0"});
  const Outcome o = run(args);
  EXPECT_EQ(o.status, 2);
  EXPECT_NE(o.err.find("ConfigError"), std::string::npos);
}

TEST_F(CliTest, ConfigFileValuesYieldToFlags) {
  const std::string cfg = scratch_ / "run.cfg";
  fx::write_file(cfg, "# toy\nbatch-size = 100\ntau = 5\n");
  auto args = train_args(scratch_ / "cfg");
  args.erase(args.begin() + 11, args.begin() + 13);  // drop --batch-size 32
  args.insert(args.begin() + 1, {"--config", cfg});
  ASSERT_EQ(run(args).status, 0);
  const auto steps_from_file = read_jsonl(scratch_ / "cfg/steps.jsonl").size();

  args.back() = scratch_ / "cfg-override";
  args.insert(args.end(), {"--batch-size", "50"});
  ASSERT_EQ(run(args).status, 0);
  const auto steps_from_flag = read_jsonl(scratch_ / "cfg-override/steps.jsonl").size();
  EXPECT_GT(steps_from_flag, steps_from_file);

  const json m = json::parse(fx::read_file(scratch_ / "cfg/report.json"))["metrics"];
  const auto instances = m["instances"].get<std::size_t>();
  EXPECT_EQ(steps_from_file, (instances + 99) / 100);
  EXPECT_EQ(steps_from_flag, (instances + 49) / 50);
}

TEST_F(CliTest, ConfigFileUnknownKeyIsUsageError) {
  const std::string cfg = scratch_ / "bad.cfg";
  fx::write_file(cfg, "no-such-flag = 3\n");
  auto args = train_args(scratch_ / "bad");
  args.insert(args.begin() + 1, {"--config", cfg});
  EXPECT_EQ(run(args).status, 2);
}

TEST_F(CliTest, NoHardNegativeEqualsStrippedDump) {
  const std::string stripped = scratch_ / "stripped.jsonl";
  const std::string mined = scratch_ / "mined.jsonl";
  const std::vector<std::string> src{"--corpus", data("corpus.jsonl"), "--catalog",
                                     data("catalog.jsonl"), "--min-count", "1"};
  auto cmd = [&](std::vector<std::string> head, std::vector<std::string> tail) {
    head.insert(head.end(), src.begin(), src.end());
    head.insert(head.end(), tail.begin(), tail.end());
    return head;
  };
  ASSERT_EQ(run(cmd({"ingest"}, {"--out", stripped})).status, 0);
  ASSERT_EQ(run(cmd({"ingest", "--mine"}, {"--out", mined})).status, 0);

  auto a = train_args(scratch_ / "flag");
  a.insert(a.end(), {"--instances", mined, "--no-hard-negative"});
  auto b = train_args(scratch_ / "dump");
  b.insert(b.end(), {"--instances", stripped});
  ASSERT_EQ(run(a).status, 0);
  ASSERT_EQ(run(b).status, 0);
  EXPECT_EQ(fx::read_file(scratch_ / "flag/checkpoint.ease"),
            fx::read_file(scratch_ / "dump/checkpoint.ease"));
  EXPECT_EQ(fx::read_file(scratch_ / "flag/train_log.jsonl"),
            fx::read_file(scratch_ / "dump/train_log.jsonl"));
  EXPECT_EQ(fx::read_file(scratch_ / "flag/steps.jsonl"), fx::read_file(scratch_ / "dump/steps.jsonl"));
  const json ma = json::parse(fx::read_file(scratch_ / "flag/report.json"))["metrics"];
  const json mb = json::parse(fx::read_file(scratch_ / "dump/report.json"))["metrics"];
  for (const char* key : {"best_dev_metric", "best_step", "total_steps", "instances", "final_window_loss"}) {
    EXPECT_EQ(ma[key], mb[key]) << key;
  }
}

TEST_F(CliTest, GridSearchWritesCellsAndBestRun) {
  auto args = train_args(scratch_ / "grid");
  args[0] = "grid-search";
  args.insert(args.end(), {"--batch-sizes", "32,64", "--lrs", "0.01,0.001"});
  const Outcome o = run(args);
  ASSERT_EQ(o.status, 0) << o.err;
  const json grid = json::parse(fx::read_file(scratch_ / "grid/grid.json"));
  EXPECT_EQ(grid["cells"].size(), 4u);
  EXPECT_TRUE(std::filesystem::exists(scratch_ / "grid/checkpoint.ease"));
}

TEST_F(CliTest, GridSearchBadListIsUsageError) {
  auto args = train_args(scratch_ / "grid-bad");
  args[0] = "grid-search";
  args.insert(args.end(), {"--batch-sizes", "32,abc"});
  EXPECT_EQ(run(args).status, 2);
}

// ---- embed and eval -----------------------------------------------------------------

class CliTrained : public CliTest {
 protected:
  void SetUp() override {
    run_dir_ = scratch_ / "run";
    ASSERT_EQ(run(train_args(run_dir_)).status, 0);
  }
  std::string run_dir_;
};

TEST_F(CliTrained, EmbedThreeSentences) {
  const std::string input = scratch_ / "in.tsv";
  fx::write_file(input, "a\ten_t00_w0 en_t00_w1\nb\txx_t03_w2\nc\tcompletely unknown words\n");
  const Outcome o = run({"embed", "--checkpoint", run_dir_ + "/checkpoint.ease", "--input", input,
                         "--out", scratch_ / "emb.tsv"});
  ASSERT_EQ(o.status, 0) << o.err;
  std::istringstream rows(fx::read_file(scratch_ / "emb.tsv"));
  std::string line;
  std::size_t n = 0;
  while (std::getline(rows, line)) {
    ++n;
    EXPECT_EQ(std::count(line.begin(), line.end(), '\t'), 8);
  }
  EXPECT_EQ(n, 3u);
}

TEST_F(CliTrained, EmbedEmptyInput) {
  const std::string input = scratch_ / "empty.tsv";
  fx::write_file(input, "");
  const Outcome o = run({"embed", "--checkpoint", run_dir_ + "/checkpoint.ease", "--input", input,
                         "--out", scratch_ / "emb.tsv"});
  EXPECT_EQ(o.status, 0);
  EXPECT_EQ(fx::read_file(scratch_ / "emb.tsv"), "");
}

TEST_F(CliTrained, EvalTatoebaOnEmbeddedDev) {
  const std::string emb_src = scratch_ / "src.emb", emb_tgt = scratch_ / "tgt.emb";
  ASSERT_EQ(run({"embed", "--checkpoint", run_dir_ + "/checkpoint.ease", "--input",
                 data("test.src.tsv"), "--out", emb_src})
                .status,
            0);
  ASSERT_EQ(run({"embed", "--checkpoint", run_dir_ + "/checkpoint.ease", "--input",
                 data("test.tgt.tsv"), "--out", emb_tgt})
                .status,
            0);
  const Outcome o = run({"eval", "tatoeba", "--embeddings", emb_src, "--embeddings", emb_tgt,
                         "--gold", data("test.gold.tsv"), "--out", scratch_ / "r.json"});
  ASSERT_EQ(o.status, 0) << o.err;
  const json r = json::parse(fx::read_file(scratch_ / "r.json"));
  const double acc = r["metrics"]["tatoeba/accuracy"];
  EXPECT_GE(acc, 0.0);
  EXPECT_LE(acc, 1.0);
}

namespace {

// Embeddings where the cosine of pair i equals its gold score / 5.
void write_sts_fixture(const fx::TempDir& dir) {
  std::string emb, pairs;
  const double golds[] = {0.5, 1.5, 2.0, 3.5, 4.5, 5.0};
  for (int i = 0; i < 6; ++i) {
    const double c = golds[i] / 5.0;
    emb += "a" + std::to_string(i) + "\t1\t0\n";
    emb += "b" + std::to_string(i) + "\t" + std::to_string(c) + "\t" + std::to_string(std::sqrt(1 - c * c)) + "\n";
    pairs += "a" + std::to_string(i) + "\tb" + std::to_string(i) + "\t" + std::to_string(golds[i]) + "\n";
  }
  fx::write_file(dir / "emb.tsv", emb);
  fx::write_file(dir / "sts.tsv", pairs);
}

}  // namespace

TEST(CliEval, StsSelfConsistentDump) {
  fx::TempDir dir;
  write_sts_fixture(dir);
  const Outcome o = run({"eval", "sts", "--embeddings", dir / "emb.tsv", "--pairs", dir / "sts.tsv",
                         "--out", dir / "report.json"});
  ASSERT_EQ(o.status, 0) << o.err;
  EXPECT_NE(o.out.find("sts/avg"), std::string::npos);
  EXPECT_NE(o.out.find("1.000000"), std::string::npos);
  const json r = json::parse(fx::read_file(dir / "report.json"));
  EXPECT_DOUBLE_EQ(r["metrics"]["sts/avg"].get<double>(), 1.0);
  EXPECT_DOUBLE_EQ(r["metrics"]["sts/sts"].get<double>(), 1.0);
}

TEST(CliEval, ReportsAreReproducible) {
  fx::TempDir dir;
  write_sts_fixture(dir);
  const std::vector<std::string> args{"eval", "sts", "--embeddings", dir / "emb.tsv", "--pairs",
                                      dir / "sts.tsv"};
  auto a = args, b = args;
  a.insert(a.end(), {"--out", dir / "a.json"});
  b.insert(b.end(), {"--out", dir / "b.json"});
  ASSERT_EQ(run(a).status, 0);
  ASSERT_EQ(run(b).status, 0);
  EXPECT_EQ(fx::read_file(dir / "a.json"), fx::read_file(dir / "b.json"));
}

TEST(CliEval, AlignUniform) {
  fx::TempDir dir;
  write_sts_fixture(dir);
  const Outcome o = run({"eval", "align-uniform", "--embeddings", dir / "emb.tsv", "--pairs",
                         dir / "sts.tsv", "--out", dir / "r.json"});
  ASSERT_EQ(o.status, 0) << o.err;
  const json m = json::parse(fx::read_file(dir / "r.json"))["metrics"];
  EXPECT_GE(m["align"].get<double>(), 0.0);
  EXPECT_LE(m["uniform"].get<double>(), 0.0);

  const Outcome none = run({"eval", "align-uniform", "--embeddings", dir / "emb.tsv", "--pairs",
                            dir / "sts.tsv", "--pos-threshold", "5"});
  EXPECT_EQ(none.status, 1);
  EXPECT_NE(none.err.find("AlignmentUndefined"), std::string::npos);
}

TEST(CliEval, BuccTunesOnSampleWithoutThreshold) {
  fx::TempDir dir;
  fx::write_file(dir / "emb.tsv",
                 "s0\t1\t0\ns1\t0\t1\nt0\t0.95\t0.31\nt1\t0.3\t0.95\n"
                 "u0\t1\t0.1\nu1\t0.1\t1\nv0\t1\t0\nv1\t0\t1\n");
  fx::write_file(dir / "sample.src", "s0\ns1\n");
  fx::write_file(dir / "sample.tgt", "t0\nt1\n");
  fx::write_file(dir / "sample.gold", "s0\tt0\ns1\tt1\n");
  fx::write_file(dir / "src", "u0\nu1\n");
  fx::write_file(dir / "tgt", "v0\nv1\n");
  fx::write_file(dir / "gold", "u0\tv0\nu1\tv1\n");
  const Outcome o = run({"eval", "bucc", "--embeddings", dir / "emb.tsv", "--sample", dir / "sample",
                         "--src", dir / "src", "--tgt", dir / "tgt", "--gold", dir / "gold", "--out",
                         dir / "r.json"});
  ASSERT_EQ(o.status, 0) << o.err;
  EXPECT_NE(o.out.find("threshold tuned on sample"), std::string::npos);
  const json m = json::parse(fx::read_file(dir / "r.json"))["metrics"];
  EXPECT_EQ(m["bucc/sample_f1"].get<double>(), 1.0);
  EXPECT_EQ(m["bucc/f1"].get<double>(), 1.0);

  const Outcome missing = run({"eval", "bucc", "--embeddings", dir / "emb.tsv", "--src", dir / "src",
                               "--tgt", dir / "tgt", "--gold", dir / "gold"});
  EXPECT_EQ(missing.status, 2);
}

TEST(CliEval, UnknownTaskIsUsageError) {
  fx::TempDir dir;
  write_sts_fixture(dir);
  EXPECT_EQ(run({"eval", "glue", "--embeddings", dir / "emb.tsv"}).status, 2);
}

TEST(CliEval, StcAndLareqaAndMldoc) {
  fx::TempDir dir;
  std::string emb, labels, queries, cands, rel;
  for (int i = 0; i < 12; ++i) {
    const int c = i % 3;
    const double x = c == 0 ? 10 : 0, y = c == 1 ? 10 : 0, z = c == 2 ? 10 : 0;
    emb += "p" + std::to_string(i) + "\t" + std::to_string(x + 0.01 * i) + "\t" + std::to_string(y + 1) +
           "\t" + std::to_string(z + 1) + "\n";
    labels += "p" + std::to_string(i) + "\tclass" + std::to_string(c) + "\n";
  }
  for (int i = 0; i < 3; ++i) {
    queries += "p" + std::to_string(i) + "\n";
    rel += R"({"query_id":"p)" + std::to_string(i) + R"(","relevant":["p)" + std::to_string(i + 3) + "\"]}\n";
  }
  for (int i = 3; i < 12; ++i) cands += "p" + std::to_string(i) + "\n";
  fx::write_file(dir / "emb.tsv", emb);
  fx::write_file(dir / "labels.tsv", labels);
  fx::write_file(dir / "q", queries);
  fx::write_file(dir / "c", cands);
  fx::write_file(dir / "rel.jsonl", rel);

  Outcome o = run({"eval", "stc", "--embeddings", dir / "emb.tsv", "--labels", dir / "labels.tsv",
                   "--runs", "2", "--out", dir / "stc.json"});
  ASSERT_EQ(o.status, 0) << o.err;
  EXPECT_EQ(json::parse(fx::read_file(dir / "stc.json"))["metrics"]["stc/accuracy"].get<double>(), 1.0);

  o = run({"eval", "lareqa", "--embeddings", dir / "emb.tsv", "--queries", dir / "q", "--candidates",
           dir / "c", "--relevance", dir / "rel.jsonl", "--k", "1000", "--out", dir / "map.json"});
  ASSERT_EQ(o.status, 0) << o.err;
  const double map = json::parse(fx::read_file(dir / "map.json"))["metrics"]["lareqa/map"];
  EXPECT_GT(map, 0.0);
  EXPECT_LE(map, 1.0);

  o = run({"eval", "mldoc", "--embeddings", dir / "emb.tsv", "--train", dir / "labels.tsv", "--dev",
           dir / "labels.tsv", "--test", dir / "labels.tsv", "--epochs", "5", "--out", dir / "ml.json"});
  ASSERT_EQ(o.status, 0) << o.err;
  EXPECT_EQ(json::parse(fx::read_file(dir / "ml.json"))["metrics"]["mldoc/test/labels"].get<double>(), 1.0);
}
