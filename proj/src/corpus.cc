#include "ease/corpus.h"

#include <algorithm>
#include <fstream>

#include "ease/error.h"
#include "json.hpp"

namespace ease {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
  return out;
}

// Calls fn(line_no, object) for every non-blank line.
template <typename Fn>
void for_each_json_line(const std::string& path, Fn&& fn) {
  auto in = open_input(path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(line_no, e.what());
    }
    if (!obj.is_object()) throw ParseError(line_no, "expected a JSON object");
    fn(line_no, obj);
  }
}

std::string require_string(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw ParseError(line, std::string("field \"") + key + "\" must be a string");
  }
  return it->get<std::string>();
}

std::vector<std::string> string_array(const json& obj, const char* key,
                                      std::size_t line, bool required) {
  std::vector<std::string> out;
  auto it = obj.find(key);
  if (it == obj.end()) {
    if (required) throw ParseError(line, std::string("missing field \"") + key + "\"");
    return out;
  }
  if (!it->is_array()) throw ParseError(line, std::string("\"") + key + "\" must be an array");
  for (const auto& v : *it) {
    if (!v.is_string()) throw ParseError(line, std::string("\"") + key + "\" entries must be strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace

std::vector<SentenceRecord> load_corpus(const std::string& path,
                                        Vocabulary* vocab) {
  std::vector<SentenceRecord> corpus;
  std::set<std::string> seen;
  for_each_json_line(path, [&](std::size_t line, const json& obj) {
    SentenceRecord rec;
    rec.id = require_string(obj, "id", line);
    rec.lang = require_string(obj, "lang", line);
    rec.text = require_string(obj, "text", line);
    rec.page_id = require_string(obj, "page_id", line);
    for (auto& e : string_array(obj, "entities", line, true)) {
      if (std::find(rec.entity_ids.begin(), rec.entity_ids.end(), e) ==
          rec.entity_ids.end()) {
        rec.entity_ids.push_back(std::move(e));
      }
    }
    if (tokenize(rec.text).empty()) throw ParseError(line, "sentence has no tokens");
    if (!seen.insert(rec.id).second) {
      throw Error(ErrorKind::kDuplicateId,
                  "sentence id \"" + rec.id + "\" repeated at line " + std::to_string(line));
    }
    if (vocab != nullptr) rec.tokens = vocab->encode(rec.text);
    corpus.push_back(std::move(rec));
  });
  return corpus;
}

Catalog load_catalog(const std::string& path) {
  Catalog catalog;
  for_each_json_line(path, [&](std::size_t line, const json& obj) {
    EntityRecord rec;
    rec.entity_id = require_string(obj, "entity_id", line);
    if (auto it = obj.find("type_id"); it != obj.end() && !it->is_null()) {
      if (!it->is_string()) throw ParseError(line, "\"type_id\" must be a string or null");
      rec.type_id = it->get<std::string>();
    }
    auto count = obj.find("count");
    if (count == obj.end() || !count->is_number_integer()) {
      throw ParseError(line, "\"count\" must be an integer");
    }
    rec.count = count->get<long long>();
    if (rec.count < 0) throw ParseError(line, "negative count");
    for (auto& p : string_array(obj, "page_ids", line, false)) rec.page_ids.insert(std::move(p));
    if (rec.count > 0 && rec.page_ids.empty()) {
      throw ParseError(line, "entity with positive count lists no pages");
    }
    const std::string id = rec.entity_id;
    if (!catalog.emplace(id, std::move(rec)).second) {
      throw Error(ErrorKind::kDuplicateId,
                  "entity id \"" + id + "\" repeated at line " + std::to_string(line));
    }
  });
  return catalog;
}

void save_corpus(const std::vector<SentenceRecord>& corpus,
                 const std::string& path) {
  auto out = open_output(path);
  for (const auto& rec : corpus) {
    ordered_json obj;
    obj["id"] = rec.id;
    obj["lang"] = rec.lang;
    obj["text"] = rec.text;
    obj["page_id"] = rec.page_id;
    obj["entities"] = rec.entity_ids;
    out << obj.dump() << '\n';
  }
}

void save_catalog(const Catalog& catalog, const std::string& path) {
  auto out = open_output(path);
  for (const auto& [id, rec] : catalog) {
    ordered_json obj;
    obj["entity_id"] = id;
    obj["type_id"] = rec.type_id ? ordered_json(*rec.type_id) : ordered_json(nullptr);
    obj["count"] = rec.count;
    obj["page_ids"] = rec.page_ids;
    out << obj.dump() << '\n';
  }
}

std::set<std::string> filter_entities(const Catalog& catalog,
                                      long long min_count) {
  std::set<std::string> kept;
  for (const auto& [id, rec] : catalog) {
    if (rec.count >= min_count) kept.insert(id);
  }
  return kept;
}

std::vector<TrainingInstance> build_pairs(
    const std::vector<SentenceRecord>& corpus,
    const std::set<std::string>& vocab) {
  std::vector<TrainingInstance> out;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    for (const auto& e : corpus[i].entity_ids) {
      if (vocab.contains(e)) out.push_back({i, e, std::nullopt});
    }
  }
  return out;
}

namespace {

bool pages_disjoint(const std::set<std::string>& a,
                    const std::set<std::string>& b) {
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      return false;
    }
  }
  return true;
}

const EntityRecord& find_entity(const Catalog& catalog, const std::string& id) {
  auto it = catalog.find(id);
  if (it == catalog.end()) {
    throw Error(ErrorKind::kUnknownEntity, "entity \"" + id + "\" not in catalog");
  }
  return it->second;
}

}  // namespace

std::set<std::string> hard_negative_candidates(const std::string& positive,
                                               const Catalog& catalog) {
  const EntityRecord& pos = find_entity(catalog, positive);
  std::set<std::string> out;
  if (!pos.type_id) return out;
  for (const auto& [id, rec] : catalog) {
    if (id == positive || rec.type_id != pos.type_id) continue;
    if (pages_disjoint(rec.page_ids, pos.page_ids)) out.insert(id);
  }
  return out;
}

std::optional<std::string> mine_hard_negative(const std::string& positive,
                                              const Catalog& catalog,
                                              Rng& rng) {
  const auto candidates = hard_negative_candidates(positive, catalog);
  if (candidates.empty()) return std::nullopt;
  auto it = candidates.begin();
  std::advance(it, static_cast<long>(rng.uniform_index(candidates.size())));
  return *it;
}

NegativeMiner::NegativeMiner(const Catalog& catalog,
                             const std::set<std::string>* allowed)
    : catalog_(catalog), allowed_(allowed) {
  for (const auto& [id, rec] : catalog_) {
    if (rec.type_id) by_type_[*rec.type_id].push_back(id);
  }
}

const std::vector<std::string>& NegativeMiner::candidates(
    const std::string& positive) {
  if (auto it = cache_.find(positive); it != cache_.end()) return it->second;
  const EntityRecord& pos = find_entity(catalog_, positive);
  std::vector<std::string> out;
  if (pos.type_id) {
    for (const auto& id : by_type_.at(*pos.type_id)) {
      if (id == positive) continue;
      if (allowed_ != nullptr && !allowed_->contains(id)) continue;
      if (pages_disjoint(catalog_.at(id).page_ids, pos.page_ids)) out.push_back(id);
    }
  }
  return cache_.emplace(positive, std::move(out)).first->second;
}

std::optional<std::string> NegativeMiner::mine(const TrainingInstance& instance,
                                               const SentenceRecord& sentence,
                                               Rng& rng) {
  const auto& all = candidates(instance.positive);
  std::vector<const std::string*> usable;
  usable.reserve(all.size());
  for (const auto& id : all) {
    if (std::find(sentence.entity_ids.begin(), sentence.entity_ids.end(), id) ==
        sentence.entity_ids.end()) {
      usable.push_back(&id);
    }
  }
  if (usable.empty()) return std::nullopt;
  return *usable[rng.uniform_index(usable.size())];
}

void NegativeMiner::mine_all(std::vector<TrainingInstance>& instances,
                             const std::vector<SentenceRecord>& corpus,
                             Rng& rng) {
  for (auto& inst : instances) {
    inst.hard_negative = mine(inst, corpus.at(inst.sentence), rng);
  }
}

SampleResult sample_multilingual(
    const std::map<std::string, std::vector<TrainingInstance>>& by_language,
    std::size_t per_lang, Rng& rng) {
  SampleResult result;
  for (const auto& [lang, instances] : by_language) {
    if (instances.size() < per_lang) {
      result.warnings.push_back("language " + lang + " has only " +
                                std::to_string(instances.size()) +
                                " instances (< " + std::to_string(per_lang) +
                                "); taking all");
      result.instances.insert(result.instances.end(), instances.begin(),
                              instances.end());
      continue;
    }
    // Partial Fisher-Yates over indices: the first per_lang slots form a
    // uniform sample without replacement.
    std::vector<std::size_t> idx(instances.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    for (std::size_t i = 0; i < per_lang; ++i) {
      const std::size_t j = i + rng.uniform_index(idx.size() - i);
      std::swap(idx[i], idx[j]);
    }
    for (std::size_t i = 0; i < per_lang; ++i) {
      result.instances.push_back(instances[idx[i]]);
    }
  }
  rng.shuffle(std::span<TrainingInstance>(result.instances));
  return result;
}

std::map<std::string, std::vector<TrainingInstance>> group_by_language(
    const std::vector<TrainingInstance>& instances,
    const std::vector<SentenceRecord>& corpus) {
  std::map<std::string, std::vector<TrainingInstance>> out;
  for (const auto& inst : instances) out[corpus.at(inst.sentence).lang].push_back(inst);
  return out;
}

void save_instances(const std::vector<TrainingInstance>& instances,
                    const std::vector<SentenceRecord>& corpus,
                    const std::string& path) {
  auto out = open_output(path);
  for (const auto& inst : instances) {
    ordered_json obj;
    obj["sentence_id"] = corpus.at(inst.sentence).id;
    obj["positive"] = inst.positive;
    obj["hard_negative"] =
        inst.hard_negative ? ordered_json(*inst.hard_negative) : ordered_json(nullptr);
    out << obj.dump() << '\n';
  }
}

std::vector<TrainingInstance> load_instances(
    const std::string& path, const std::vector<SentenceRecord>& corpus) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < corpus.size(); ++i) index.emplace(corpus[i].id, i);
  std::vector<TrainingInstance> out;
  for_each_json_line(path, [&](std::size_t line, const json& obj) {
    TrainingInstance inst;
    const auto sid = require_string(obj, "sentence_id", line);
    auto it = index.find(sid);
    if (it == index.end()) throw ParseError(line, "unknown sentence id \"" + sid + "\"");
    inst.sentence = it->second;
    inst.positive = require_string(obj, "positive", line);
    const auto& ents = corpus[inst.sentence].entity_ids;
    if (std::find(ents.begin(), ents.end(), inst.positive) == ents.end()) {
      throw ParseError(line, "positive \"" + inst.positive + "\" is not linked by the sentence");
    }
    if (auto hn = obj.find("hard_negative"); hn != obj.end() && !hn->is_null()) {
      if (!hn->is_string()) throw ParseError(line, "\"hard_negative\" must be a string or null");
      inst.hard_negative = hn->get<std::string>();
      if (*inst.hard_negative == inst.positive ||
          std::find(ents.begin(), ents.end(), *inst.hard_negative) != ents.end()) {
        throw ParseError(line, "hard negative is linked by the sentence");
      }
    }
    out.push_back(std::move(inst));
  });
  return out;
}

}  // namespace ease
