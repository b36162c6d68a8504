#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "ease/rng.h"
#include "ease/vocabulary.h"

namespace ease {

struct SentenceRecord {
  std::string id;
  std::string lang;
  std::string text;
  std::string page_id;
  // Hyperlink targets, distinct, in annotation order.
  std::vector<std::string> entity_ids;
  std::vector<int> tokens;
};

struct EntityRecord {
  std::string entity_id;
  std::optional<std::string> type_id;
  long long count = 0;
  std::set<std::string> page_ids;
};

using Catalog = std::map<std::string, EntityRecord>;

struct TrainingInstance {
  std::size_t sentence = 0;  // index into the corpus
  std::string positive;
  std::optional<std::string> hard_negative;

  friend bool operator==(const TrainingInstance&,
                         const TrainingInstance&) = default;
};

// Reads corpus JSONL. When vocab is given, sentence tokens are encoded with
// it (growing it unless frozen).
std::vector<SentenceRecord> load_corpus(const std::string& path,
                                        Vocabulary* vocab = nullptr);
Catalog load_catalog(const std::string& path);

void save_corpus(const std::vector<SentenceRecord>& corpus,
                 const std::string& path);
void save_catalog(const Catalog& catalog, const std::string& path);

// Entities hyperlinked at least min_count times. The default keeps entities
// that appear more than ten times.
std::set<std::string> filter_entities(const Catalog& catalog,
                                      long long min_count = 11);

std::vector<TrainingInstance> build_pairs(
    const std::vector<SentenceRecord>& corpus,
    const std::set<std::string>& vocab);

// Same-type entities that share no page with the positive. Empty when the
// positive has no type.
std::set<std::string> hard_negative_candidates(const std::string& positive,
                                               const Catalog& catalog);

std::optional<std::string> mine_hard_negative(const std::string& positive,
                                              const Catalog& catalog,
                                              Rng& rng);

// Batch miner: indexes the catalog by type once and caches candidate sets.
// Per instance it also drops the sentence's own entities and, when an
// allow-list is given, anything outside it.
class NegativeMiner {
 public:
  explicit NegativeMiner(const Catalog& catalog,
                         const std::set<std::string>* allowed = nullptr);

  const std::vector<std::string>& candidates(const std::string& positive);

  std::optional<std::string> mine(const TrainingInstance& instance,
                                  const SentenceRecord& sentence, Rng& rng);

  void mine_all(std::vector<TrainingInstance>& instances,
                const std::vector<SentenceRecord>& corpus, Rng& rng);

 private:
  const Catalog& catalog_;
  const std::set<std::string>* allowed_;
  std::map<std::string, std::vector<std::string>> by_type_;
  std::unordered_map<std::string, std::vector<std::string>> cache_;
};

struct SampleResult {
  std::vector<TrainingInstance> instances;
  std::vector<std::string> warnings;
};

// Draws per_lang instances (without replacement) from every language,
// concatenates them in language order and shuffles the union.
SampleResult sample_multilingual(
    const std::map<std::string, std::vector<TrainingInstance>>& by_language,
    std::size_t per_lang, Rng& rng);

std::map<std::string, std::vector<TrainingInstance>> group_by_language(
    const std::vector<TrainingInstance>& instances,
    const std::vector<SentenceRecord>& corpus);

void save_instances(const std::vector<TrainingInstance>& instances,
                    const std::vector<SentenceRecord>& corpus,
                    const std::string& path);
std::vector<TrainingInstance> load_instances(
    const std::string& path, const std::vector<SentenceRecord>& corpus);

}  // namespace ease
