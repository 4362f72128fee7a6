#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "bicf/align.hpp"
#include "bicf/corpus.hpp"
#include "bicf/lexstats.hpp"

namespace bicf {

// Unit of the lambda thresholds. kFraction keeps the top ceil(lambda * n)
// entries; kCount keeps the top floor(lambda) entries; kScore keeps entries
// whose score/confidence is at least lambda.
enum class ThreshMode { kFraction, kCount, kScore };

// kIntersection is the literal set intersection of the two top subsets.
// kUnion keeps a word selected by either branch provided it appears in both
// thresholded inputs.
enum class FusionMode { kIntersection, kUnion };

struct ThreshParams {
  double lambda_freq = 1.0;
  double lambda_conf = 1.0;
  double theta = 0.5;
  ThreshMode thresh_mode = ThreshMode::kFraction;
  FusionMode fusion_mode = FusionMode::kIntersection;

  void check() const;  // throws InvalidArgument
};

// Number of entries selected from n by a top fraction (ceiling rounding).
std::size_t top_count(std::size_t n, double fraction);

FrequencyLexicon thresh(const FrequencyLexicon& lexicon, double lambda,
                        ThreshMode mode = ThreshMode::kFraction);
ConfidenceLexicon thresh(const ConfidenceLexicon& lexicon, double lambda,
                         ThreshMode mode = ThreshMode::kFraction);

struct SubstitutionEntry {
  std::string source;
  std::string target;
  std::size_t freq_rank = 0;  // 1-based rank in the frequency lexicon
  double confidence = 0.0;
  bool operator==(const SubstitutionEntry&) const = default;
};

// Functional map from source word to target word; entries ordered by
// frequency rank.
class SubstitutionTable {
 public:
  SubstitutionTable() = default;
  explicit SubstitutionTable(std::vector<SubstitutionEntry> entries);

  const std::vector<SubstitutionEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  // nullptr when the word is not substituted.
  const std::string* lookup(const std::string& source) const;
  bool operator==(const SubstitutionTable& o) const { return entries_ == o.entries_; }

 private:
  std::vector<SubstitutionEntry> entries_;
  std::map<std::string, std::size_t> index_;
};

SubstitutionTable fusion(const FrequencyLexicon& freq, const ConfidenceLexicon& conf,
                         double theta, FusionMode mode = FusionMode::kIntersection);

struct SubstitutionRecord {
  std::size_t index = 0;
  std::string original;
  std::string substituted;
  bool operator==(const SubstitutionRecord&) const = default;
};

struct MixedCorpus {
  AnnotatedCorpus corpus;  // language_tag "mixed"
  std::vector<std::vector<SubstitutionRecord>> log;  // parallel to utterances

  std::size_t substitution_count() const;
};

MixedCorpus mix_corpus(const AnnotatedCorpus& source, const SubstitutionTable& table);

// Thresh, Fusion and mixing in one call.
struct MixingResult {
  SubstitutionTable table;
  MixedCorpus mixed;
};
MixingResult bicf_mix(const AnnotatedCorpus& source, const FrequencyLexicon& freq,
                      const ConfidenceLexicon& conf, const ThreshParams& params);

// Checks that the mixed corpus differs from the source only at logged
// positions. Returns an empty string on success, otherwise the first
// violation.
std::string check_label_preservation(const AnnotatedCorpus& source,
                                     const MixedCorpus& mixed);

// TSV: source <TAB> target <TAB> freq_rank <TAB> confidence.
void write_substitution_table(std::ostream& out, const SubstitutionTable& table);
SubstitutionTable read_substitution_table(std::istream& in);
void save_substitution_table(const SubstitutionTable& table,
                             const std::filesystem::path& path);

// Sidecar JSONL, one line per utterance:
// {"utterance":i,"substitutions":[{"index":k,"original":..,"substituted":..}]}
void write_substitution_log(std::ostream& out, const MixedCorpus& mixed);
std::vector<std::vector<SubstitutionRecord>> read_substitution_log(std::istream& in);
void save_mixed_corpus(const MixedCorpus& mixed, const std::filesystem::path& corpus_path,
                       const std::filesystem::path& log_path);

}  // namespace bicf
