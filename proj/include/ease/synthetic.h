#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ease/corpus.h"

namespace ease {

// Latent-topic bilingual corpus. Every topic owns one language-shared entity
// and a disjoint word list per language; word w of a topic in one language
// translates to word w of the same topic in the other. A sentence talks about
// one topic, or about two topics of different types, and links their
// entities. Articles (page ids) are per language and topic combination, so
// same-type entities never share a page and are each other's hard negatives.
struct SyntheticOptions {
  std::size_t topics = 20;
  std::size_t types = 10;  // topics are split evenly across types
  std::vector<std::string> languages{"en", "xx"};
  std::size_t sentences = 2000;  // training sentences, split evenly
  std::size_t words_per_topic = 8;
  std::size_t words_per_sentence = 6;
  double mixed_fraction = 0.5;
  std::size_t dev_pairs = 200;
  std::size_t test_pairs = 200;
  std::uint64_t seed = 7;
};

struct ParallelPairs {
  std::vector<std::pair<std::string, std::string>> src;  // (id, text), first language
  std::vector<std::pair<std::string, std::string>> tgt;  // (id, text), second language
};

struct SyntheticData {
  std::vector<SentenceRecord> corpus;
  Catalog catalog;
  ParallelPairs dev;
  ParallelPairs test;
};

SyntheticData make_synthetic(const SyntheticOptions& options);

// Writes corpus.jsonl, catalog.jsonl, {dev,test}.{src,tgt}.tsv and
// {dev,test}.gold.tsv into dir.
void write_synthetic(const SyntheticData& data, const std::string& dir);

}  // namespace ease
