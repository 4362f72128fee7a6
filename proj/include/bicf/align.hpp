#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace bicf {

struct SentencePair {
  std::vector<std::string> source;
  std::vector<std::string> target;
  bool operator==(const SentencePair&) const = default;
};

// Source-side token used by IBM Model 1 for unaligned target words.
inline constexpr const char* kNullWord = "<null>";

// p(target | source); each source row is a distribution over the target
// words it co-occurred with.
struct TranslationTable {
  std::map<std::string, std::map<std::string, double>> probabilities;

  double probability(const std::string& source, const std::string& target) const;
};

struct Model1Options {
  std::size_t iterations = 10;
  // Uniform initialisation is the standard EM starting point; a seeded
  // random start is available for restarts.
  bool random_init = false;
  std::uint64_t seed = 0;
};

struct Model1Fit {
  TranslationTable table;
  // Entry k is the data log-likelihood after k EM iterations (entry 0 is
  // the initial table).
  std::vector<double> log_likelihood;
};

Model1Fit train_model1(const std::vector<SentencePair>& pairs,
                       const Model1Options& options);
// Data log-likelihood of the pairs under a table, NULL-augmented.
double model1_log_likelihood(const std::vector<SentencePair>& pairs,
                             const TranslationTable& table);

struct ConfidenceEntry {
  std::string source_word;
  std::string target_word;
  double confidence = 0.0;
  bool operator==(const ConfidenceEntry&) const = default;
};

// Sorted by confidence descending; ties by source word, then target word.
struct ConfidenceLexicon {
  std::vector<ConfidenceEntry> entries;

  std::size_t size() const { return entries.size(); }
  bool operator==(const ConfidenceLexicon&) const = default;
};

void sort_confidence_entries(std::vector<ConfidenceEntry>& entries);

ConfidenceLexicon build_confidence_lexicon(const TranslationTable& table);

// Reads Pharaoh "i-j" lines (source index i, target index j), one per pair.
// Confidence of (s, t) = co-alignment count / occurrences of s.
ConfidenceLexicon import_pharaoh(std::istream& alignments,
                                 const std::vector<SentencePair>& pairs);
ConfidenceLexicon import_pharaoh(const std::filesystem::path& alignments,
                                 const std::vector<SentencePair>& pairs);

// "source tokens ||| target tokens", normalised on read.
std::vector<SentencePair> read_parallel(std::istream& in);
std::vector<SentencePair> load_parallel(const std::filesystem::path& path);
void write_parallel(std::ostream& out, const std::vector<SentencePair>& pairs);
void save_parallel(const std::vector<SentencePair>& pairs,
                   const std::filesystem::path& path);

// TSV: source <TAB> target <TAB> confidence.
void write_confidence_lexicon(std::ostream& out, const ConfidenceLexicon& lex);
ConfidenceLexicon read_confidence_lexicon(std::istream& in);
void save_confidence_lexicon(const ConfidenceLexicon& lex,
                             const std::filesystem::path& path);
ConfidenceLexicon load_confidence_lexicon(const std::filesystem::path& path);

}  // namespace bicf
