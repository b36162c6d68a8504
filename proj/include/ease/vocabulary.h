#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ease {

// Whitespace tokenization with ASCII lowercasing.
std::vector<std::string> tokenize(std::string_view text);

// Word -> id table. Id 0 is reserved for out-of-vocabulary tokens.
class Vocabulary {
 public:
  static constexpr int kOov = 0;
  static constexpr std::string_view kOovToken = "<unk>";

  Vocabulary();

  // Returns the id of word, adding it unless the vocabulary is frozen.
  int add(const std::string& word);
  int lookup(const std::string& word) const;

  std::vector<int> encode(std::string_view text);
  std::vector<int> encode_frozen(std::string_view text) const;

  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }
  std::size_t size() const { return words_.size(); }
  const std::string& word(int id) const { return words_.at(id); }

  // One word per line, line number = id.
  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

 private:
  std::unordered_map<std::string, int> ids_;
  std::vector<std::string> words_;
  bool frozen_ = false;
};

}  // namespace ease
