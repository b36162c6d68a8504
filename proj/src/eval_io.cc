#include "ease/eval_io.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "ease/error.h"
#include "json.hpp"

namespace ease {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

template <typename Fn>
void for_each_line(const std::string& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    fn(line_no, line);
  }
}

double parse_double(const std::string& cell, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    throw ParseError(line, "not a number: \"" + cell + "\"");
  }
}

}  // namespace

void EmbeddingTable::add(const std::string& id, std::span<const double> values) {
  if (!index_.emplace(id, ids_.size()).second) {
    throw Error(ErrorKind::kDuplicateId, "embedding id \"" + id + "\" repeated");
  }
  ids_.push_back(id);
  matrix_.append_row(values);
}

void EmbeddingTable::merge(const EmbeddingTable& other) {
  for (std::size_t i = 0; i < other.size(); ++i) add(other.ids_[i], other.matrix_.row(i));
}

std::span<const double> EmbeddingTable::at(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw Error(ErrorKind::kShapeMismatch, "no embedding for id \"" + id + "\"");
  return matrix_.row(it->second);
}

Matrix EmbeddingTable::gather(const std::vector<std::string>& ids) const {
  Matrix out(0, matrix_.dim());
  for (const auto& id : ids) out.append_row(at(id));
  return out;
}

EmbeddingTable load_embeddings(const std::string& path) {
  EmbeddingTable table;
  for_each_line(path, [&](std::size_t line, const std::string& text) {
    auto cells = split_tabs(text);
    if (cells.size() < 2) throw ParseError(line, "expected id and at least one component");
    std::vector<double> values;
    values.reserve(cells.size() - 1);
    for (std::size_t i = 1; i < cells.size(); ++i) values.push_back(parse_double(cells[i], line));
    if (!all_finite(values)) throw ParseError(line, "non-finite component");
    if (table.size() > 0 && values.size() != table.matrix().dim()) {
      throw ParseError(line, "dimension differs from earlier rows");
    }
    try {
      table.add(cells[0], values);
    } catch (const Error& e) {
      throw ParseError(line, e.what());
    }
  });
  return table;
}

void save_embeddings(const std::vector<std::string>& ids, const Matrix& m,
                     const std::string& path) {
  if (ids.size() != m.rows()) throw Error(ErrorKind::kShapeMismatch, "ids and rows disagree");
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (f == nullptr) throw Error(ErrorKind::kIo, "cannot write " + path);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    std::fputs(ids[i].c_str(), f);
    for (double v : m.row(i)) std::fprintf(f, "\t%.17g", v);
    std::fputc('\n', f);
  }
  if (std::fclose(f) != 0) throw Error(ErrorKind::kIo, "cannot close " + path);
}

std::vector<StsPair> load_sts_pairs(const std::string& path) {
  std::vector<StsPair> out;
  for_each_line(path, [&](std::size_t line, const std::string& text) {
    auto cells = split_tabs(text);
    if (cells.size() != 3) throw ParseError(line, "expected 3 tab-separated fields");
    const double gold = parse_double(cells[2], line);
    if (!(gold >= 0.0 && gold <= 5.0)) throw ParseError(line, "gold score outside [0, 5]");
    out.push_back({cells[0], cells[1], gold});
  });
  return out;
}

namespace {

std::vector<std::pair<std::string, std::string>> load_two_columns(const std::string& path) {
  std::vector<std::pair<std::string, std::string>> out;
  for_each_line(path, [&](std::size_t line, const std::string& text) {
    auto cells = split_tabs(text);
    if (cells.size() != 2 || cells[0].empty() || cells[1].empty()) {
      throw ParseError(line, "expected 2 non-empty tab-separated fields");
    }
    out.emplace_back(cells[0], cells[1]);
  });
  return out;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> load_labels(const std::string& path) {
  return load_two_columns(path);
}

std::vector<std::pair<std::string, std::string>> load_bitext_gold(const std::string& path) {
  return load_two_columns(path);
}

std::vector<RelevanceEntry> load_relevance(const std::string& path) {
  std::vector<RelevanceEntry> out;
  for_each_line(path, [&](std::size_t line, const std::string& text) {
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(line, e.what());
    }
    if (!obj.is_object() || !obj.contains("query_id") || !obj["query_id"].is_string() ||
        !obj.contains("relevant") || !obj["relevant"].is_array()) {
      throw ParseError(line, "expected {\"query_id\": str, \"relevant\": [str, ...]}");
    }
    RelevanceEntry entry;
    entry.query_id = obj["query_id"].get<std::string>();
    for (const auto& r : obj["relevant"]) {
      if (!r.is_string()) throw ParseError(line, "relevant ids must be strings");
      entry.relevant.push_back(r.get<std::string>());
    }
    out.push_back(std::move(entry));
  });
  return out;
}

std::vector<std::pair<std::string, std::string>> load_sentences(const std::string& path) {
  std::vector<std::pair<std::string, std::string>> out;
  std::set<std::string> seen;
  for_each_line(path, [&](std::size_t line, const std::string& text) {
    const std::size_t tab = text.find('\t');
    if (tab == std::string::npos || tab == 0) throw ParseError(line, "expected id TAB text");
    std::string id = text.substr(0, tab);
    if (!seen.insert(id).second) throw Error(ErrorKind::kDuplicateId, "sentence id \"" + id + "\" repeated");
    out.emplace_back(std::move(id), text.substr(tab + 1));
  });
  return out;
}

}  // namespace ease
