#pragma once

// Seeded generators for the bundled desk-scale corpora: a 4-class topic
// corpus of encyclopedia-style abstracts and a 2-class review corpus.

#include <filesystem>
#include <vector>

#include "advtext/codec.hpp"

namespace advtext {

struct ToySplit {
  std::vector<Doc> train;
  std::vector<Doc> test;
};

/// Classes Building, Company, Film, Transportation (balanced).
ToySplit make_topic_corpus(std::size_t train, std::size_t test, std::uint64_t seed = 7);

/// Classes Negative, Positive (balanced), lowercase with spaced punctuation.
ToySplit make_sentiment_corpus(std::size_t train, std::size_t test, std::uint64_t seed = 11);

/// Writes topic_{train,test}.csv and sentiment_{train,test}.csv into `dir`
/// (1000/250 and 800/200 docs).
void write_toy_data(const std::filesystem::path& dir, std::uint64_t seed = 7);

}  // namespace advtext
