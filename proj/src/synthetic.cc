#include "ease/synthetic.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <span>

#include "ease/error.h"
#include "ease/rng.h"

namespace ease {

namespace {

using Signature = std::vector<std::size_t>;  // one or two topics, ascending

std::string word(const std::string& lang, std::size_t topic, std::size_t w) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_t%02zu_w%zu", lang.c_str(), topic, w);
  return buf;
}

std::string entity_id(std::size_t topic) { return "Q" + std::to_string(100 + topic); }

std::string page_id(const std::string& lang, const Signature& sig) {
  std::string p = lang + ":";
  for (std::size_t i = 0; i < sig.size(); ++i) {
    if (i > 0) p += "+";
    p += std::to_string(sig[i]);
  }
  return p;
}

// Concept draws (topic, word index) for a sentence with the given signature.
std::vector<std::pair<std::size_t, std::size_t>> draw_concepts(
    const Signature& sig, const SyntheticOptions& o, Rng& rng) {
  std::vector<std::pair<std::size_t, std::size_t>> concepts;
  for (std::size_t i = 0; i < o.words_per_sentence; ++i) {
    const std::size_t topic = sig[i % sig.size()];
    concepts.emplace_back(topic, rng.uniform_index(o.words_per_topic));
  }
  rng.shuffle(std::span(concepts));
  return concepts;
}

std::string render(const std::vector<std::pair<std::size_t, std::size_t>>& concepts,
                   const std::string& lang) {
  std::string text;
  for (const auto& [topic, w] : concepts) {
    if (!text.empty()) text += ' ';
    text += word(lang, topic, w);
  }
  return text;
}

}  // namespace

SyntheticData make_synthetic(const SyntheticOptions& o) {
  if (o.topics == 0 || o.types == 0 || o.topics % o.types != 0) {
    throw Error(ErrorKind::kConfig, "topics must split evenly across types");
  }
  if (o.languages.size() < 2) throw Error(ErrorKind::kConfig, "need two languages");
  if (o.words_per_sentence < 2 || o.words_per_topic == 0) {
    throw Error(ErrorKind::kConfig, "sentences need at least two words");
  }
  const std::size_t per_type = o.topics / o.types;
  auto type_of = [per_type](std::size_t topic) { return topic / per_type; };

  std::vector<Signature> singles, mixed;
  for (std::size_t a = 0; a < o.topics; ++a) {
    singles.push_back({a});
    for (std::size_t b = a + 1; b < o.topics; ++b) {
      if (type_of(a) != type_of(b)) mixed.push_back({a, b});
    }
  }
  Rng rng(o.seed);
  auto random_signature = [&]() -> Signature {
    if (!mixed.empty() && rng.uniform01() < o.mixed_fraction) {
      return mixed[rng.uniform_index(mixed.size())];
    }
    return singles[rng.uniform_index(singles.size())];
  };

  SyntheticData data;
  std::map<std::size_t, std::set<std::string>> pages_of;
  std::map<std::size_t, long long> links;
  const std::size_t per_lang = o.sentences / o.languages.size();
  for (const auto& lang : o.languages) {
    for (std::size_t i = 0; i < per_lang; ++i) {
      const Signature sig = random_signature();
      SentenceRecord rec;
      rec.id = lang + "-" + std::to_string(i);
      rec.lang = lang;
      rec.text = render(draw_concepts(sig, o, rng), lang);
      rec.page_id = page_id(lang, sig);
      for (std::size_t t : sig) {
        rec.entity_ids.push_back(entity_id(t));
        pages_of[t].insert(rec.page_id);
        ++links[t];
      }
      data.corpus.push_back(std::move(rec));
    }
  }
  for (std::size_t t = 0; t < o.topics; ++t) {
    EntityRecord e;
    e.entity_id = entity_id(t);
    e.type_id = "type-" + std::to_string(type_of(t));
    e.count = links[t];
    e.page_ids = pages_of[t];
    data.catalog.emplace(e.entity_id, std::move(e));
  }

  // Held-out pairs use every signature once (in a shuffled order) before
  // repeating any.
  std::vector<Signature> all = singles;
  all.insert(all.end(), mixed.begin(), mixed.end());
  auto make_pairs = [&](std::size_t count, const std::string& tag) {
    ParallelPairs pairs;
    std::vector<Signature> pool;
    for (std::size_t i = 0; i < count; ++i) {
      if (pool.empty()) {
        pool = all;
        rng.shuffle(std::span(pool));
      }
      const Signature sig = pool.back();
      pool.pop_back();
      const auto concepts = draw_concepts(sig, o, rng);
      const std::string n = std::to_string(i);
      pairs.src.emplace_back(tag + "-" + o.languages[0] + "-" + n, render(concepts, o.languages[0]));
      pairs.tgt.emplace_back(tag + "-" + o.languages[1] + "-" + n, render(concepts, o.languages[1]));
    }
    return pairs;
  };
  data.dev = make_pairs(o.dev_pairs, "dev");
  data.test = make_pairs(o.test_pairs, "test");
  return data;
}

void write_synthetic(const SyntheticData& data, const std::string& dir) {
  std::filesystem::create_directories(dir);
  save_corpus(data.corpus, dir + "/corpus.jsonl");
  save_catalog(data.catalog, dir + "/catalog.jsonl");
  auto write_tsv = [](const std::vector<std::pair<std::string, std::string>>& rows,
                      const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
    for (const auto& [a, b] : rows) out << a << '\t' << b << '\n';
  };
  for (const auto& [name, pairs] : {std::pair{"dev", &data.dev}, std::pair{"test", &data.test}}) {
    const std::string base = dir + "/" + name;
    write_tsv(pairs->src, base + ".src.tsv");
    write_tsv(pairs->tgt, base + ".tgt.tsv");
    std::vector<std::pair<std::string, std::string>> gold;
    for (std::size_t i = 0; i < pairs->src.size(); ++i) gold.emplace_back(pairs->src[i].first, pairs->tgt[i].first);
    write_tsv(gold, base + ".gold.tsv");
  }
}

}  // namespace ease
