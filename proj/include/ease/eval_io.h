#pragma once

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ease/embedding.h"
#include "ease/metrics.h"

namespace ease {

// Embeddings keyed by sentence id, in file order.
class EmbeddingTable {
 public:
  void add(const std::string& id, std::span<const double> values);
  // Appends every row of other; ids must not collide.
  void merge(const EmbeddingTable& other);

  bool contains(const std::string& id) const { return index_.contains(id); }
  std::span<const double> at(const std::string& id) const;
  Matrix gather(const std::vector<std::string>& ids) const;

  const std::vector<std::string>& ids() const { return ids_; }
  const Matrix& matrix() const { return matrix_; }
  std::size_t size() const { return ids_.size(); }

 private:
  std::vector<std::string> ids_;
  Matrix matrix_;
  std::unordered_map<std::string, std::size_t> index_;
};

// "id TAB v1 TAB ... TAB v_d"; all rows share one dimension.
EmbeddingTable load_embeddings(const std::string& path);
void save_embeddings(const std::vector<std::string>& ids, const Matrix& m,
                     const std::string& path);

// "sent_id_a TAB sent_id_b TAB gold", gold in [0, 5].
std::vector<StsPair> load_sts_pairs(const std::string& path);

// "sent_id TAB class_id".
std::vector<std::pair<std::string, std::string>> load_labels(const std::string& path);

// "src_id TAB tgt_id".
std::vector<std::pair<std::string, std::string>> load_bitext_gold(const std::string& path);

struct RelevanceEntry {
  std::string query_id;
  std::vector<std::string> relevant;
};

// {"query_id": str, "relevant": [str, ...]} per line.
std::vector<RelevanceEntry> load_relevance(const std::string& path);

// "id TAB text" per line; used for embedding input and dev sets.
std::vector<std::pair<std::string, std::string>> load_sentences(const std::string& path);

}  // namespace ease
