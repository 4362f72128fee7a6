#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "bicf/corpus.hpp"

namespace bicf {

struct FrequencyEntry {
  std::string word;
  double score = 0.0;
  bool operator==(const FrequencyEntry&) const = default;
};

// Sorted by score descending, ties broken by word.
struct FrequencyLexicon {
  std::vector<FrequencyEntry> entries;

  std::size_t size() const { return entries.size(); }
  bool operator==(const FrequencyLexicon&) const = default;
};

// How per-(word, utterance) tf-idf values collapse to one score per word.
// kMean averages over the utterances that contain the word.
enum class TfidfAggregation { kMax, kMean };

// Occurrences of the normalised word over the utterance length.
double term_frequency(const std::string& word, const Utterance& utterance);

// log(|S| / (1 + df)), natural log, utterances as documents.
double inverse_document_frequency(const std::string& word,
                                  const AnnotatedCorpus& corpus);

// Throws EmptyCorpus on a corpus without utterances.
FrequencyLexicon build_frequency_lexicon(
    const AnnotatedCorpus& corpus,
    TfidfAggregation aggregation = TfidfAggregation::kMax);

void sort_frequency_entries(std::vector<FrequencyEntry>& entries);

// TSV: word <TAB> score.
void write_frequency_lexicon(std::ostream& out, const FrequencyLexicon& lex);
FrequencyLexicon read_frequency_lexicon(std::istream& in);
void save_frequency_lexicon(const FrequencyLexicon& lex,
                            const std::filesystem::path& path);
FrequencyLexicon load_frequency_lexicon(const std::filesystem::path& path);

}  // namespace bicf
