#include "ease/vocabulary.h"

#include <cctype>
#include <fstream>

#include "ease/error.h"

namespace ease {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  for (char ch : text) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(static_cast<char>(
          std::tolower(static_cast<unsigned char>(ch))));
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

Vocabulary::Vocabulary() {
  words_.emplace_back(kOovToken);
  ids_.emplace(std::string(kOovToken), kOov);
}

int Vocabulary::add(const std::string& word) {
  if (auto it = ids_.find(word); it != ids_.end()) return it->second;
  if (frozen_) return kOov;
  const int id = static_cast<int>(words_.size());
  words_.push_back(word);
  ids_.emplace(word, id);
  return id;
}

int Vocabulary::lookup(const std::string& word) const {
  auto it = ids_.find(word);
  return it == ids_.end() ? kOov : it->second;
}

std::vector<int> Vocabulary::encode(std::string_view text) {
  std::vector<int> ids;
  for (const auto& w : tokenize(text)) ids.push_back(add(w));
  return ids;
}

std::vector<int> Vocabulary::encode_frozen(std::string_view text) const {
  std::vector<int> ids;
  for (const auto& w : tokenize(text)) ids.push_back(lookup(w));
  return ids;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
  for (const auto& w : words_) out << w << '\n';
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path);
  Vocabulary vocab;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) {
      if (line != kOovToken) throw ParseError(1, "vocabulary must start with <unk>");
      continue;
    }
    if (line.empty()) throw ParseError(line_no, "empty vocabulary entry");
    if (vocab.ids_.contains(line)) throw ParseError(line_no, "duplicate word " + line);
    vocab.add(line);
  }
  vocab.freeze();
  return vocab;
}

}  // namespace ease
