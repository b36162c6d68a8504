#include "ease/cli.h"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "ease/checkpoint.h"
#include "ease/clustering.h"
#include "ease/corpus.h"
#include "ease/error.h"
#include "ease/eval_io.h"
#include "ease/metrics.h"
#include "ease/probe.h"
#include "ease/retrieval.h"
#include "json.hpp"

namespace ease {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// Independent random streams derived from the run seed.
constexpr std::uint64_t kMineStream = 1;
constexpr std::uint64_t kSampleStream = 2;
constexpr std::uint64_t kInitStream = 3;

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

// Exclusive lock file held for the lifetime of the object.
class OutputLock {
 public:
  explicit OutputLock(const fs::path& lock_path) : path_(lock_path) {
    if (lock_path.has_parent_path()) fs::create_directories(lock_path.parent_path());
    fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd_ < 0) {
      throw Error(ErrorKind::kIo, "output is locked by another writer (" + path_.string() + ")");
    }
  }
  ~OutputLock() {
    ::close(fd_);
    std::error_code ec;
    fs::remove(path_, ec);
  }
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  fs::path path_;
  int fd_ = -1;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::kIo, "write failed: " + path.string());
}

void write_bytes(const fs::path& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::kIo, "write failed: " + path.string());
}

// First column of every non-empty line.
std::vector<std::string> load_id_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path);
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto cut = line.find_first_of("\t ");
    std::string id = line.substr(0, cut);
    if (!id.empty()) ids.push_back(std::move(id));
  }
  return ids;
}

std::vector<std::vector<int>> encode_texts(
    const std::vector<std::pair<std::string, std::string>>& rows, const Vocabulary& vocab) {
  std::vector<std::vector<int>> tokens;
  tokens.reserve(rows.size());
  for (const auto& [id, text] : rows) tokens.push_back(vocab.encode_frozen(text));
  return tokens;
}

std::optional<DevMetric> make_dev_metric(const RunConfig& c, const Vocabulary& vocab) {
  std::string task = c.dev_task;
  if (task.empty()) {
    if (!c.dev_src.empty() || !c.dev_tgt.empty()) task = "tatoeba";
    if (!c.dev_pairs.empty() || !c.dev_sentences.empty()) task = "sts";
  }
  if (task.empty()) return std::nullopt;
  if (task == "tatoeba") {
    if (c.dev_src.empty() || c.dev_tgt.empty()) {
      throw Error(ErrorKind::kConfig, "tatoeba dev metric needs --dev-src and --dev-tgt");
    }
    auto src = encode_texts(load_sentences(c.dev_src), vocab);
    auto tgt = encode_texts(load_sentences(c.dev_tgt), vocab);
    if (src.size() != tgt.size()) {
      throw Error(ErrorKind::kLengthMismatch, "dev source and target differ in length");
    }
    return DevMetric([src = std::move(src), tgt = std::move(tgt)](const ModelParams& p) {
      return eval_tatoeba(encode_all(src, p), encode_all(tgt, p)).accuracy;
    });
  }
  if (task == "sts") {
    if (c.dev_sentences.empty() || c.dev_pairs.empty()) {
      throw Error(ErrorKind::kConfig, "sts dev metric needs --dev-sentences and --dev-pairs");
    }
    const auto rows = load_sentences(c.dev_sentences);
    std::map<std::string, std::size_t> row_of;
    for (std::size_t i = 0; i < rows.size(); ++i) row_of.emplace(rows[i].first, i);
    const auto tokens = encode_texts(rows, vocab);
    std::vector<std::size_t> left, right;
    std::vector<double> gold;
    for (const auto& pair : load_sts_pairs(c.dev_pairs)) {
      auto a = row_of.find(pair.a), b = row_of.find(pair.b);
      if (a == row_of.end() || b == row_of.end()) {
        throw Error(ErrorKind::kConfig, "dev pair references unknown sentence " +
                                            (a == row_of.end() ? pair.a : pair.b));
      }
      left.push_back(a->second);
      right.push_back(b->second);
      gold.push_back(pair.gold);
    }
    return DevMetric([tokens, left, right, gold](const ModelParams& p) {
      const Matrix all = encode_all(tokens, p);
      Matrix l(0, all.dim()), r(0, all.dim());
      for (std::size_t i = 0; i < left.size(); ++i) {
        l.append_row(all.row(left[i]));
        r.append_row(all.row(right[i]));
      }
      return eval_sts(l, r, gold);
    });
  }
  throw Error(ErrorKind::kConfig, "unknown dev task \"" + task + "\" (expected sts or tatoeba)");
}

std::string report_json(const json& metrics, const std::string& config_hash,
                         const std::string& run_id) {
  json j;
  j["metrics"] = metrics;
  j["config_hash"] = config_hash;
  j["run_id"] = run_id;
  return j.dump(2) + "\n";
}

void print_table(const std::map<std::string, double>& metrics, std::ostream& out) {
  std::size_t width = 6;
  for (const auto& [k, v] : metrics) width = std::max(width, k.size());
  for (const auto& [k, v] : metrics) {
    out << k << std::string(width - k.size() + 2, ' ') << format_double(v) << '\n';
  }
}

// Everything the train and grid-search commands write into the output
// directory.
void write_run(const RunConfig& c, const TrainingRun& run, std::map<std::string, double> metrics,
               std::chrono::steady_clock::time_point start, std::ostream& out) {
  const fs::path dir(c.out);
  const auto bytes = serialize_checkpoint(run.result.best);
  write_bytes(dir / "checkpoint.ease", bytes);
  run.vocab.save((dir / "vocab.txt").string());
  std::string entities;
  for (const auto& e : run.entity_ids) entities += e + "\n";
  write_text(dir / "entities.txt", entities);

  std::string log;
  for (const auto& r : run.result.log) {
    log += json{{"step", r.step}, {"dev_metric", r.dev_metric}, {"loss", r.loss}}.dump() + "\n";
  }
  write_text(dir / "train_log.jsonl", log);
  std::string steps;
  for (std::size_t i = 0; i < run.result.steps.size(); ++i) {
    const auto& s = run.result.steps[i];
    steps += json{{"step", i + 1}, {"loss", s.loss}, {"entity_loss", s.entity_loss}, {"self_loss", s.self_loss}}
                 .dump() +
             "\n";
  }
  write_text(dir / "steps.jsonl", steps);

  metrics["best_dev_metric"] = run.result.best_metric;
  metrics["best_step"] = static_cast<double>(run.result.best_step);
  metrics["total_steps"] = static_cast<double>(run.result.total_steps);
  metrics["instances"] = static_cast<double>(run.instances);
  metrics["hard_negatives"] = static_cast<double>(run.hard_negatives);
  if (!run.result.log.empty()) metrics["final_window_loss"] = run.result.log.back().loss;

  Report report;
  report.metrics = std::move(metrics);
  report.config_hash = fnv1a_hex(c.canonical_json());
  std::string id_source = report.config_hash;
  id_source.append(bytes.begin(), bytes.end());
  report.run_id = fnv1a_hex(id_source).substr(0, 12);
  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_text(dir / "report.json", report.to_json());
  write_text(dir / "timing.json",
             json{{"run_id", report.run_id}, {"wall_clock_seconds", report.wall_clock_seconds}}.dump(2) + "\n");

  print_table(report.metrics, out);
  out << "run " << report.run_id << " written to " << dir.string() << '\n';
}

// ---------------------------------------------------------------- commands

struct IngestOptions {
  std::string corpus;
  std::string catalog;
  std::string instances;
  std::string out;
  long long min_count = 11;
  bool mine = false;
  std::uint64_t seed = 42;
};

int cmd_ingest(const IngestOptions& o, std::ostream& out, std::ostream& err) {
  const auto corpus = load_corpus(o.corpus);
  const Catalog catalog = load_catalog(o.catalog);
  const auto allowed = filter_entities(catalog, o.min_count);
  auto pairs = build_pairs(corpus, allowed);
  if (o.mine) {
    Rng rng(mix_seed(o.seed, kMineStream));
    NegativeMiner(catalog, &allowed).mine_all(pairs, corpus, rng);
  }
  OutputLock lock(o.out + ".lock");
  save_instances(pairs, corpus, o.out);
  const auto negatives = std::count_if(pairs.begin(), pairs.end(),
                                       [](const TrainingInstance& t) { return t.hard_negative.has_value(); });
  out << "sentences\t" << corpus.size() << '\n'
      << "entities\t" << allowed.size() << '\n'
      << "pairs\t" << pairs.size() << '\n'
      << "hard_negatives\t" << negatives << '\n';
  if (pairs.empty()) err << "warning: no sentence-entity pairs survive min-count " << o.min_count << '\n';
  return 0;
}

int cmd_mine(const IngestOptions& o, std::ostream& out, std::ostream&) {
  const auto corpus = load_corpus(o.corpus);
  const Catalog catalog = load_catalog(o.catalog);
  const auto allowed = filter_entities(catalog, o.min_count);
  auto pairs = load_instances(o.instances, corpus);
  Rng rng(mix_seed(o.seed, kMineStream));
  NegativeMiner(catalog, &allowed).mine_all(pairs, corpus, rng);
  OutputLock lock(o.out + ".lock");
  save_instances(pairs, corpus, o.out);
  const auto negatives = std::count_if(pairs.begin(), pairs.end(),
                                       [](const TrainingInstance& t) { return t.hard_negative.has_value(); });
  out << "pairs\t" << pairs.size() << '\n' << "hard_negatives\t" << negatives << '\n';
  return 0;
}

int cmd_train(const RunConfig& c, std::ostream& out) {
  c.validate();
  if (c.out.empty()) throw Error(ErrorKind::kConfig, "--out is required");
  const auto start = std::chrono::steady_clock::now();
  OutputLock lock(fs::path(c.out) / ".lock");
  const TrainingRun run = run_training(c, out);
  write_run(c, run, {}, start, out);
  return 0;
}

int cmd_grid(const RunConfig& base, const std::vector<std::size_t>& batch_sizes,
             const std::vector<double>& lrs, std::ostream& out) {
  base.validate();
  if (base.out.empty()) throw Error(ErrorKind::kConfig, "--out is required");
  const auto cells = make_grid(batch_sizes, lrs);
  if (cells.empty()) throw Error(ErrorKind::kConfig, "empty grid");
  const auto start = std::chrono::steady_clock::now();
  OutputLock lock(fs::path(base.out) / ".lock");

  std::vector<std::optional<TrainingRun>> runs(cells.size());
  std::size_t next = 0;
  const GridResult grid = grid_search(cells, [&](const GridCell& cell) {
    RunConfig c = base;
    c.batch_size = cell.batch_size;
    c.learning_rate = cell.learning_rate;
    c.validate();
    const std::size_t index = next++;
    out << "cell " << index << ": batch " << cell.batch_size << ", lr " << cell.learning_rate << '\n';
    runs[index] = run_training(c, out);
    return runs[index]->result;
  });

  json cells_json = json::array();
  for (const auto& o : grid.outcomes) {
    json cell{{"batch_size", o.cell.batch_size}, {"learning_rate", o.cell.learning_rate}};
    cell["dev_score"] = o.dev_score ? json(*o.dev_score) : json(nullptr);
    if (!o.note.empty()) cell["note"] = o.note;
    cells_json.push_back(cell);
  }
  write_text(fs::path(base.out) / "grid.json",
             json{{"cells", cells_json}, {"best_index", grid.best_index}}.dump(2) + "\n");

  RunConfig best = base;
  best.batch_size = grid.outcomes[grid.best_index].cell.batch_size;
  best.learning_rate = grid.outcomes[grid.best_index].cell.learning_rate;
  write_run(best, *runs[grid.best_index],
            {{"grid/best_batch_size", static_cast<double>(best.batch_size)},
             {"grid/best_learning_rate", best.learning_rate}},
            start, out);
  return 0;
}

struct EmbedOptions {
  std::string checkpoint;
  std::string vocab;
  std::string input;
  std::string out;
};

int cmd_embed(const EmbedOptions& o, std::ostream& out) {
  const ModelParams params = load_checkpoint(o.checkpoint);
  const std::string vocab_path =
      o.vocab.empty() ? (fs::path(o.checkpoint).parent_path() / "vocab.txt").string() : o.vocab;
  Vocabulary vocab = Vocabulary::load(vocab_path);
  vocab.freeze();
  if (vocab.size() != params.token_emb.rows()) {
    throw Error(ErrorKind::kShapeMismatch, "vocabulary has " + std::to_string(vocab.size()) +
                                               " words but the checkpoint has " +
                                               std::to_string(params.token_emb.rows()) + " rows");
  }
  const auto rows = load_sentences(o.input);
  std::vector<std::string> ids;
  Matrix embeddings(0, params.sentence_dim());
  for (const auto& [id, text] : rows) {
    ids.push_back(id);
    embeddings.append_row(encode(vocab.encode_frozen(text), params));
  }
  OutputLock lock(o.out + ".lock");
  save_embeddings(ids, embeddings, o.out);
  out << "embedded\t" << ids.size() << '\n';
  return 0;
}

struct EvalOptions {
  std::string task;
  std::vector<std::string> embeddings;
  std::vector<std::string> pairs;
  std::string labels;
  std::size_t runs = 3;
  std::uint64_t seed = 42;
  std::optional<double> threshold;
  std::string sample;
  std::string src;
  std::string tgt;
  std::string gold;
  std::string mode = "all";
  std::string train;
  std::string dev;
  std::vector<std::string> tests;
  std::size_t epochs = 50;
  std::string queries;
  std::string candidates;
  std::string relevance;
  std::size_t k = 1000;
  double pos_threshold = 4.0;
  std::string out;
};

void require(const std::string& value, const char* flag, const std::string& task) {
  if (value.empty()) throw Error(ErrorKind::kConfig, "eval " + task + " requires " + flag);
}

std::string stem(const std::string& path) { return fs::path(path).stem().string(); }

BitextPools load_pools(const EmbeddingTable& table, const std::string& src_path,
                       const std::string& tgt_path, const std::string& gold_path) {
  BitextPools pools;
  pools.src_ids = load_id_list(src_path);
  pools.tgt_ids = load_id_list(tgt_path);
  pools.src = table.gather(pools.src_ids);
  pools.tgt = table.gather(pools.tgt_ids);
  std::map<std::string, std::size_t> src_row, tgt_row;
  for (std::size_t i = 0; i < pools.src_ids.size(); ++i) src_row.emplace(pools.src_ids[i], i);
  for (std::size_t i = 0; i < pools.tgt_ids.size(); ++i) tgt_row.emplace(pools.tgt_ids[i], i);
  for (const auto& [s, t] : load_bitext_gold(gold_path)) {
    auto a = src_row.find(s), b = tgt_row.find(t);
    if (a == src_row.end() || b == tgt_row.end()) {
      throw Error(ErrorKind::kConfig, "gold pair (" + s + ", " + t + ") is not in the pools");
    }
    pools.gold.emplace(a->second, b->second);
  }
  return pools;
}

ProbeData load_probe_data(const EmbeddingTable& table, const std::string& path,
                          const std::map<std::string, int>& classes) {
  ProbeData data;
  std::vector<std::string> ids;
  for (const auto& [id, label] : load_labels(path)) {
    auto it = classes.find(label);
    if (it == classes.end()) throw Error(ErrorKind::kConfig, "label \"" + label + "\" not seen in training data");
    ids.push_back(id);
    data.labels.push_back(it->second);
  }
  data.features = table.gather(ids);
  return data;
}

std::map<std::string, double> run_eval(const EvalOptions& o, std::ostream& out) {
  if (o.embeddings.empty()) throw Error(ErrorKind::kConfig, "eval requires --embeddings");
  EmbeddingTable table;
  for (const auto& path : o.embeddings) table.merge(load_embeddings(path));
  std::map<std::string, double> m;

  if (o.task == "sts") {
    if (o.pairs.empty()) throw Error(ErrorKind::kConfig, "eval sts requires --pairs");
    double sum = 0.0;
    for (const auto& path : o.pairs) {
      const auto pairs = load_sts_pairs(path);
      std::vector<std::string> a, b;
      std::vector<double> gold;
      for (const auto& p : pairs) {
        a.push_back(p.a);
        b.push_back(p.b);
        gold.push_back(p.gold);
      }
      const double rho = eval_sts(table.gather(a), table.gather(b), gold);
      m["sts/" + stem(path)] = rho;
      sum += rho;
    }
    m["sts/avg"] = sum / static_cast<double>(o.pairs.size());
  } else if (o.task == "stc") {
    require(o.labels, "--labels", o.task);
    std::map<std::string, int> classes;
    LabeledSet set;
    std::vector<std::string> ids;
    for (const auto& [id, label] : load_labels(o.labels)) {
      ids.push_back(id);
      auto [it, fresh] = classes.emplace(label, static_cast<int>(classes.size()));
      set.labels.push_back(it->second);
    }
    set.embeddings = table.gather(ids);
    set.k = classes.size();
    const StcResult r = eval_stc(set, o.runs, o.seed);
    m["stc/accuracy"] = r.mean_accuracy;
    for (std::size_t i = 0; i < r.run_accuracy.size(); ++i) {
      m["stc/run" + std::to_string(i + 1)] = r.run_accuracy[i];
    }
  } else if (o.task == "tatoeba") {
    require(o.gold, "--gold", o.task);
    std::vector<std::string> src, tgt;
    for (const auto& [s, t] : load_bitext_gold(o.gold)) {
      src.push_back(s);
      tgt.push_back(t);
    }
    const TatoebaResult r = eval_tatoeba(table.gather(src), table.gather(tgt));
    m["tatoeba/accuracy"] = r.accuracy;
    m["tatoeba/forward"] = r.forward;
    m["tatoeba/backward"] = r.backward;
  } else if (o.task == "bucc") {
    require(o.src, "--src", o.task);
    require(o.tgt, "--tgt", o.task);
    require(o.gold, "--gold", o.task);
    MiningMode mode = MiningMode::kAllPairs;
    if (o.mode == "forward") mode = MiningMode::kForward;
    else if (o.mode == "backward") mode = MiningMode::kBackward;
    else if (o.mode != "all") throw Error(ErrorKind::kConfig, "unknown mining mode \"" + o.mode + "\"");
    double threshold = 0.0;
    if (o.threshold) {
      threshold = *o.threshold;
    } else {
      if (o.sample.empty()) throw Error(ErrorKind::kConfig, "eval bucc requires --threshold or --sample");
      const BitextPools sample = load_pools(table, o.sample + ".src", o.sample + ".tgt", o.sample + ".gold");
      const ThresholdResult tuned = tune_threshold(sample, mode);
      threshold = tuned.threshold;
      m["bucc/sample_f1"] = tuned.f1;
      out << "threshold tuned on sample: " << format_double(threshold) << '\n';
    }
    const MiningScore s = eval_bucc(load_pools(table, o.src, o.tgt, o.gold), threshold, mode);
    m["bucc/threshold"] = threshold;
    m["bucc/precision"] = s.precision;
    m["bucc/recall"] = s.recall;
    m["bucc/f1"] = s.f1;
  } else if (o.task == "mldoc") {
    require(o.train, "--train", o.task);
    require(o.dev, "--dev", o.task);
    std::map<std::string, int> classes;
    for (const auto& [id, label] : load_labels(o.train)) classes.emplace(label, 0);
    int next = 0;
    for (auto& [label, index] : classes) index = next++;
    const ProbeData train = load_probe_data(table, o.train, classes);
    const ProbeData dev = load_probe_data(table, o.dev, classes);
    std::vector<ProbeData> tests;
    for (const auto& path : o.tests) tests.push_back(load_probe_data(table, path, classes));
    ProbeGrid grid;
    grid.epochs = o.epochs;
    const ProbeResult r = eval_mldoc(train, dev, tests, grid);
    m["mldoc/dev"] = r.best.dev_accuracy;
    m["mldoc/best_batch_size"] = static_cast<double>(r.best.batch_size);
    m["mldoc/best_learning_rate"] = r.best.learning_rate;
    for (std::size_t i = 0; i < o.tests.size(); ++i) m["mldoc/test/" + stem(o.tests[i])] = r.test_accuracy[i];
  } else if (o.task == "lareqa") {
    require(o.queries, "--queries", o.task);
    require(o.candidates, "--candidates", o.task);
    require(o.relevance, "--relevance", o.task);
    const auto query_ids = load_id_list(o.queries);
    const auto candidate_ids = load_id_list(o.candidates);
    std::map<std::string, std::size_t> candidate_row;
    for (std::size_t i = 0; i < candidate_ids.size(); ++i) candidate_row.emplace(candidate_ids[i], i);
    std::map<std::string, std::vector<std::size_t>> relevant_of;
    for (const auto& entry : load_relevance(o.relevance)) {
      auto& rel = relevant_of[entry.query_id];
      for (const auto& id : entry.relevant) {
        auto it = candidate_row.find(id);
        if (it == candidate_row.end()) throw Error(ErrorKind::kConfig, "relevant id \"" + id + "\" is not a candidate");
        rel.push_back(it->second);
      }
    }
    std::vector<std::vector<std::size_t>> relevant;
    for (const auto& q : query_ids) {
      auto it = relevant_of.find(q);
      relevant.push_back(it == relevant_of.end() ? std::vector<std::size_t>{} : it->second);
    }
    const MapResult r = eval_map(table.gather(query_ids), table.gather(candidate_ids), relevant, o.k);
    m["lareqa/map"] = r.map;
    m["lareqa/scored_queries"] = static_cast<double>(r.scored_queries);
  } else if (o.task == "align-uniform") {
    if (o.pairs.empty()) throw Error(ErrorKind::kConfig, "eval align-uniform requires --pairs");
    std::vector<StsPair> pairs;
    for (const auto& path : o.pairs) {
      const auto more = load_sts_pairs(path);
      pairs.insert(pairs.end(), more.begin(), more.end());
    }
    std::vector<std::string> a, b, all;
    std::set<std::string> seen;
    for (const auto& p : pairs) {
      for (const auto* id : {&p.a, &p.b}) {
        if (seen.insert(*id).second) all.push_back(*id);
      }
    }
    for (const auto& p : select_positive_pairs(pairs, o.pos_threshold)) {
      a.push_back(p.a);
      b.push_back(p.b);
    }
    if (a.empty()) {
      throw Error(ErrorKind::kAlignmentUndefined,
                  "no pair scores above " + format_double(o.pos_threshold));
    }
    m["align"] = alignment(table.gather(a), table.gather(b));
    m["uniform"] = uniformity(table.gather(all));
  } else {
    throw Error(ErrorKind::kConfig, "unknown eval task \"" + o.task + "\"");
  }
  return m;
}

int cmd_eval(const EvalOptions& o, const std::string& canonical_args, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  Report report;
  report.metrics = run_eval(o, out);
  report.config_hash = fnv1a_hex(canonical_args);
  report.run_id = fnv1a_hex(report.config_hash + report_json(report.metrics, "", "")).substr(0, 12);
  report.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const std::string text = report.to_json();
  print_table(report.metrics, out);
  if (!o.out.empty()) {
    OutputLock lock(o.out + ".lock");
    write_text(o.out, text);
  }
  return 0;
}

void add_train_options(CLI::App* cmd, RunConfig& c) {
  cmd->add_option("--config", "flat key = value file; command-line flags take precedence");
  cmd->add_option("--corpus", c.corpus, "sentence corpus (JSONL)");
  cmd->add_option("--catalog", c.catalog, "entity catalog (JSONL)");
  cmd->add_option("--instances", c.instances, "instance dump from ingest or mine");
  cmd->add_option("--entity-vectors", c.entity_vectors, "pretrained entity vectors (TSV)");
  cmd->add_option("--dev-task", c.dev_task, "sts or tatoeba");
  cmd->add_option("--dev-sentences", c.dev_sentences, "sts dev sentences (id TAB text)");
  cmd->add_option("--dev-pairs", c.dev_pairs, "sts dev pairs (id TAB id TAB gold)");
  cmd->add_option("--dev-src", c.dev_src, "tatoeba dev source side (id TAB text)");
  cmd->add_option("--dev-tgt", c.dev_tgt, "tatoeba dev target side, row-aligned");
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_option("--seed", c.seed);
  cmd->add_option("--d-s", c.sentence_dim, "sentence embedding size");
  cmd->add_option("--d-e", c.entity_dim, "entity embedding size");
  cmd->add_option("--tau", c.tau);
  cmd->add_option("--lambda", c.lambda);
  cmd->add_option("--dropout", c.dropout_p);
  cmd->add_option("--batch-size", c.batch_size);
  cmd->add_option("--lr", c.learning_rate);
  cmd->add_option("--eval-every", c.eval_every);
  cmd->add_option("--token-std", c.token_std);
  cmd->add_option("--entity-std", c.entity_std);
  cmd->add_option("--min-count", c.min_count);
  cmd->add_option("--per-lang", c.per_lang, "instances sampled per language (0 keeps all)");
  cmd->add_flag("--no-self-cl", c.no_self_cl);
  cmd->add_flag("--no-hard-negative", c.no_hard_negative);
  cmd->add_flag("--no-pretrained-init", c.no_pretrained_init);
  cmd->add_flag("--train-head", c.train_head, "train-only linear layer on sentence embeddings");
}

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* flag) {
  std::vector<T> values;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    T v{};
    if (!CLI::detail::lexical_conversion<T, T>({cell}, v)) {
      throw Error(ErrorKind::kConfig, std::string(flag) + ": cannot parse \"" + cell + "\"");
    }
    values.push_back(v);
  }
  return values;
}

// Splices the entries of a `--config` file in front of the remaining flags,
// so that flags given on the command line win under take-last parsing.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kConfig, "cannot read config file " + path);
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
  };
  std::vector<std::string> expanded{args.front()};
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(number, "expected key = value in " + path);
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (key.empty() || key == "config") throw ParseError(number, "bad key in " + path);
    expanded.push_back("--" + key + "=" + value);
  }
  expanded.insert(expanded.end(), args.begin() + 1, args.end());
  return expanded;
}

std::string canonical_eval_args(const EvalOptions& o) {
  json j{{"task", o.task},       {"embeddings", o.embeddings}, {"pairs", o.pairs},
         {"labels", o.labels},   {"runs", o.runs},             {"seed", o.seed},
         {"sample", o.sample},   {"src", o.src},               {"tgt", o.tgt},
         {"gold", o.gold},       {"mode", o.mode},             {"train", o.train},
         {"dev", o.dev},         {"test", o.tests},            {"epochs", o.epochs},
         {"queries", o.queries}, {"candidates", o.candidates}, {"relevance", o.relevance},
         {"k", o.k},             {"pos_threshold", o.pos_threshold}};
  j["threshold"] = o.threshold ? json(*o.threshold) : json(nullptr);
  return j.dump();
}

}  // namespace

void RunConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::kConfig, what); };
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (eval_every < 1) fail("eval_every must be >= 1");
  if (sentence_dim < 1 || entity_dim < 1) fail("embedding sizes must be >= 1");
  if (!(tau > 0.0) || !std::isfinite(tau)) fail("tau must be > 0");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) fail("lambda must be >= 0");
  if (!(dropout_p >= 0.0 && dropout_p < 1.0)) fail("dropout must be in [0, 1)");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) fail("learning rate must be >= 0");
  if (!(token_std >= 0.0) || !(entity_std >= 0.0)) fail("init std must be >= 0");
  if (no_self_cl && lambda == 0.0) fail("--no-self-cl with lambda 0 leaves the loss identically zero");
}

std::string RunConfig::canonical_json() const {
  const json j{{"seed", seed},
               {"d_s", sentence_dim},
               {"d_e", entity_dim},
               {"tau", tau},
               {"lambda", lambda},
               {"dropout", dropout_p},
               {"batch_size", batch_size},
               {"learning_rate", learning_rate},
               {"eval_every", eval_every},
               {"no_self_cl", no_self_cl},
               {"no_hard_negative", no_hard_negative},
               {"no_pretrained_init", no_pretrained_init},
               {"train_head", train_head},
               {"token_std", token_std},
               {"entity_std", entity_std},
               {"min_count", min_count},
               {"per_lang", per_lang},
               {"corpus", corpus},
               {"catalog", catalog},
               {"instances", instances},
               {"entity_vectors", entity_vectors},
               {"dev_task", dev_task},
               {"dev_sentences", dev_sentences},
               {"dev_pairs", dev_pairs},
               {"dev_src", dev_src},
               {"dev_tgt", dev_tgt}};
  return j.dump();
}

std::string Report::to_json() const {
  for (const auto& [k, v] : metrics) {
    if (!std::isfinite(v)) throw Error(ErrorKind::kNonFinite, "metric " + k + " is not finite");
  }
  return report_json(json(metrics), config_hash, run_id);
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

TrainingRun run_training(const RunConfig& c, std::ostream& log,
                         const decltype(TrainConfig::observer)& observer) {
  c.validate();
  if (c.corpus.empty() || c.catalog.empty()) {
    throw Error(ErrorKind::kConfig, "--corpus and --catalog are required");
  }
  TrainingRun run;
  const auto corpus = load_corpus(c.corpus, &run.vocab);
  run.vocab.freeze();
  const Catalog catalog = load_catalog(c.catalog);
  std::set<std::string> entities = filter_entities(catalog, c.min_count);

  std::vector<TrainingInstance> instances;
  if (!c.instances.empty()) {
    instances = load_instances(c.instances, corpus);
    for (const auto& t : instances) {
      entities.insert(t.positive);
      if (t.hard_negative) entities.insert(*t.hard_negative);
    }
  } else {
    instances = build_pairs(corpus, entities);
    Rng rng(mix_seed(c.seed, kMineStream));
    NegativeMiner(catalog, &entities).mine_all(instances, corpus, rng);
  }
  if (c.per_lang > 0) {
    Rng rng(mix_seed(c.seed, kSampleStream));
    SampleResult sampled = sample_multilingual(group_by_language(instances, corpus), c.per_lang, rng);
    for (const auto& w : sampled.warnings) log << "warning: " << w << '\n';
    instances = std::move(sampled.instances);
  }

  std::map<std::string, int> entity_index;
  for (const auto& e : entities) {
    entity_index.emplace(e, static_cast<int>(run.entity_ids.size()));
    run.entity_ids.push_back(e);
  }
  const TrainingSet data = resolve_instances(instances, corpus, entity_index);
  run.instances = data.size();
  if (!c.no_hard_negative) {
    run.hard_negatives = static_cast<std::size_t>(
        std::count_if(data.hard_negative.begin(), data.hard_negative.end(), [](int r) { return r >= 0; }));
  }

  InitOptions init;
  init.vocab_size = run.vocab.size();
  init.num_entities = run.entity_ids.size();
  init.sentence_dim = c.sentence_dim;
  init.entity_dim = c.entity_dim;
  init.token_std = c.token_std;
  init.entity_std = c.entity_std;
  init.train_head = c.train_head;
  Rng init_rng(mix_seed(c.seed, kInitStream));
  ModelParams params = init_params(init, init_rng);
  params.tau = c.tau;
  params.lambda = c.lambda;
  params.dropout_p = c.dropout_p;
  if (!c.entity_vectors.empty() && !c.no_pretrained_init) {
    const std::size_t loaded = load_entity_vectors(c.entity_vectors, entity_index, params.entity_emb);
    params.entity_init_pretrained = true;
    log << "entity vectors loaded\t" << loaded << '\n';
  }

  TrainConfig tc;
  tc.batch_size = c.batch_size;
  tc.learning_rate = c.learning_rate;
  tc.eval_every = c.eval_every;
  tc.seed = c.seed;
  tc.self_cl = !c.no_self_cl;
  tc.hard_negatives = !c.no_hard_negative;
  tc.observer = observer;
  std::optional<DevMetric> dev = make_dev_metric(c, run.vocab);
  if (!dev) {
    // Without a dev set only the end-of-epoch parameters are scored.
    dev = [](const ModelParams&) { return 0.0; };
    tc.eval_every = std::max<std::size_t>(data.size(), 1);
  }
  log << "instances\t" << run.instances << '\n' << "entities\t" << run.entity_ids.size() << '\n';
  run.result = train(params, data, tc, *dev);
  return run;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Entity-aware contrastive sentence embeddings", "ease"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  IngestOptions ingest_opts;
  auto* ingest = app.add_subcommand("ingest", "build sentence-entity instances");
  ingest->add_option("--corpus", ingest_opts.corpus, "sentence corpus (JSONL)")->required();
  ingest->add_option("--catalog", ingest_opts.catalog, "entity catalog (JSONL)")->required();
  ingest->add_option("--out", ingest_opts.out, "instance dump (JSONL)")->required();
  ingest->add_option("--min-count", ingest_opts.min_count, "minimum hyperlink count");
  ingest->add_flag("--mine", ingest_opts.mine, "also mine hard negatives");
  ingest->add_option("--seed", ingest_opts.seed);

  IngestOptions mine_opts;
  auto* mine = app.add_subcommand("mine", "mine hard negatives for an instance dump");
  mine->add_option("--corpus", mine_opts.corpus)->required();
  mine->add_option("--catalog", mine_opts.catalog)->required();
  mine->add_option("--instances", mine_opts.instances, "input dump")->required();
  mine->add_option("--out", mine_opts.out, "output dump")->required();
  mine->add_option("--min-count", mine_opts.min_count);
  mine->add_option("--seed", mine_opts.seed);

  RunConfig train_cfg;
  auto* train_cmd = app.add_subcommand("train", "train and keep the best checkpoint");
  add_train_options(train_cmd, train_cfg);

  RunConfig grid_cfg;
  std::string batch_sizes = "64";
  std::string lrs = "0.01";
  auto* grid = app.add_subcommand("grid-search", "train over batch size x learning rate");
  add_train_options(grid, grid_cfg);
  grid->add_option("--batch-sizes", batch_sizes, "comma-separated list");
  grid->add_option("--lrs", lrs, "comma-separated list");

  EmbedOptions embed_opts;
  auto* embed = app.add_subcommand("embed", "encode sentences with a checkpoint");
  embed->add_option("--checkpoint", embed_opts.checkpoint)->required();
  embed->add_option("--vocab", embed_opts.vocab, "defaults to vocab.txt next to the checkpoint");
  embed->add_option("--input", embed_opts.input, "sentences (id TAB text)")->required();
  embed->add_option("--out", embed_opts.out, "embedding dump (TSV)")->required();

  EvalOptions eval_opts;
  double threshold = 0.0;
  auto* eval = app.add_subcommand("eval", "evaluate embedding dumps");
  eval->add_option("task", eval_opts.task)
      ->required()
      ->check(CLI::IsMember({"sts", "stc", "tatoeba", "bucc", "mldoc", "lareqa", "align-uniform"}));
  eval->add_option("--embeddings", eval_opts.embeddings, "embedding dump(s)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  eval->add_option("--pairs", eval_opts.pairs, "sts pair file(s)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  eval->add_option("--labels", eval_opts.labels);
  eval->add_option("--runs", eval_opts.runs);
  eval->add_option("--seed", eval_opts.seed);
  auto* threshold_opt = eval->add_option("--threshold", threshold);
  eval->add_option("--sample", eval_opts.sample, "prefix of <p>.src, <p>.tgt, <p>.gold");
  eval->add_option("--src", eval_opts.src);
  eval->add_option("--tgt", eval_opts.tgt);
  eval->add_option("--gold", eval_opts.gold);
  eval->add_option("--mode", eval_opts.mode, "all, forward or backward");
  eval->add_option("--train", eval_opts.train);
  eval->add_option("--dev", eval_opts.dev);
  eval->add_option("--test", eval_opts.tests)->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  eval->add_option("--epochs", eval_opts.epochs);
  eval->add_option("--queries", eval_opts.queries);
  eval->add_option("--candidates", eval_opts.candidates);
  eval->add_option("--relevance", eval_opts.relevance);
  eval->add_option("--k", eval_opts.k);
  eval->add_option("--pos-threshold", eval_opts.pos_threshold);
  eval->add_option("--out", eval_opts.out, "report file (JSON)");

  std::vector<std::string> argv_storage{"ease"};
  try {
    const auto expanded = args.empty() ? args : expand_config(args);
    argv_storage.insert(argv_storage.end(), expanded.begin(), expanded.end());
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  std::vector<const char*> argv;
  for (const auto& a : argv_storage) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    const CLI::App* failed = &app;
    for (const auto* sub : app.get_subcommands()) failed = sub;
    err << failed->help();
    return 2;
  }

  try {
    if (*ingest) return cmd_ingest(ingest_opts, out, err);
    if (*mine) return cmd_mine(mine_opts, out, err);
    if (*train_cmd) return cmd_train(train_cfg, out);
    if (*grid) {
      return cmd_grid(grid_cfg, parse_list<std::size_t>(batch_sizes, "--batch-sizes"),
                      parse_list<double>(lrs, "--lrs"), out);
    }
    if (*embed) return cmd_embed(embed_opts, out);
    if (*eval) {
      if (threshold_opt->count() > 0) eval_opts.threshold = threshold;
      return cmd_eval(eval_opts, canonical_eval_args(eval_opts), out);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::kConfig ? 2 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace ease
