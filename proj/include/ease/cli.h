#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ease/trainer.h"

namespace ease {

struct RunConfig {
  std::uint64_t seed = 42;
  std::size_t sentence_dim = 32;
  std::size_t entity_dim = 32;
  double tau = 10.0;
  double lambda = 0.01;
  double dropout_p = 0.1;
  std::size_t batch_size = 64;
  double learning_rate = 1e-2;
  std::size_t eval_every = 250;
  bool no_self_cl = false;
  bool no_hard_negative = false;
  bool no_pretrained_init = false;
  bool train_head = false;
  double token_std = 0.02;
  double entity_std = 0.02;
  long long min_count = 11;
  std::size_t per_lang = 0;  // 0 keeps every instance

  std::string corpus;
  std::string catalog;
  std::string instances;       // optional dump from ingest/mine
  std::string entity_vectors;  // optional pretrained entity table
  std::string dev_task;        // "sts", "tatoeba" or empty
  std::string dev_sentences;   // sts: "id TAB text"
  std::string dev_pairs;       // sts: "id_a TAB id_b TAB gold"
  std::string dev_src;         // tatoeba: "id TAB text", row-aligned
  std::string dev_tgt;
  std::string out;

  // Throws ConfigError when a field is out of range or the flags leave the
  // loss identically zero.
  void validate() const;
  // Sorted-key JSON of every field except the output directory.
  std::string canonical_json() const;
};

struct Report {
  std::map<std::string, double> metrics;
  std::string config_hash;
  std::string run_id;
  double wall_clock_seconds = 0.0;

  // Sorted-key JSON without the wall-clock, so identical runs produce
  // identical bytes. Throws NonFinite for a non-finite metric.
  std::string to_json() const;
};

// 64-bit FNV-1a as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);

struct TrainingRun {
  TrainResult result;
  Vocabulary vocab;
  std::vector<std::string> entity_ids;
  std::size_t instances = 0;
  std::size_t hard_negatives = 0;
};

// The full train pipeline of the `train` subcommand without file output.
// The observer, when set, is forwarded to the trainer.
TrainingRun run_training(const RunConfig& config, std::ostream& log,
                         const decltype(TrainConfig::observer)& observer = {});

// Entry point of the `ease` tool. args excludes the program name. Returns
// the process exit status: 0 success, 1 runtime failure, 2 usage or
// configuration error.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace ease
