// Writes the synthetic bilingual topic corpus used by the end-to-end checks.
#include <iostream>

#include "CLI11.hpp"
#include "ease/error.h"
#include "ease/synthetic.h"

int main(int argc, char** argv) {
  ease::SyntheticOptions o;
  std::string out;
  CLI::App app{"Generate a synthetic bilingual topic corpus", "ease_synth"};
  app.add_option("--out", out, "output directory")->required();
  app.add_option("--topics", o.topics);
  app.add_option("--types", o.types);
  app.add_option("--sentences", o.sentences);
  app.add_option("--words-per-topic", o.words_per_topic);
  app.add_option("--words-per-sentence", o.words_per_sentence);
  app.add_option("--mixed-fraction", o.mixed_fraction);
  app.add_option("--dev-pairs", o.dev_pairs);
  app.add_option("--test-pairs", o.test_pairs);
  app.add_option("--seed", o.seed);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  try {
    ease::write_synthetic(ease::make_synthetic(o), out);
  } catch (const ease::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.kind() == ease::ErrorKind::kConfig ? 2 : 1;
  }
  return 0;
}
