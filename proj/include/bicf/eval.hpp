#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "bicf/corpus.hpp"

namespace bicf {

class JointModel;

struct PrCounts {
  std::size_t true_positive = 0;
  std::size_t false_positive = 0;
  std::size_t false_negative = 0;

  PrCounts& operator+=(const PrCounts& o);
  bool operator==(const PrCounts&) const = default;
};

struct PrfScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  PrCounts counts;
};

// Zero denominators give zero; F1 is 0 when P + R is 0.
PrfScore prf_from_counts(const PrCounts& counts);

// Exact (start, end, type) matching, pooled over utterances.
// Throws LengthMismatch when the lists are not aligned.
PrfScore slot_f1(const std::vector<std::vector<SlotSpan>>& gold,
                 const std::vector<std::vector<SlotSpan>>& pred);
// Pooled over (utterance, label) decisions.
PrfScore intent_f1(const std::vector<std::set<std::string>>& gold,
                   const std::vector<std::set<std::string>>& pred);

// counts[item][category] = raters assigning that category.
struct AgreementTable {
  std::vector<std::vector<std::size_t>> counts;

  static AgreementTable from_ratings(const std::vector<std::vector<std::size_t>>& ratings,
                                     std::size_t categories);
};

struct KappaResult {
  double kappa = 0.0;
  double observed = 0.0;  // p_o
  double expected = 0.0;  // p_e
  bool degenerate = false;  // p_e == 1: every rating fell into one category
};

// Throws InvalidArgument unless there are >= 2 raters, >= 1 item, and every
// item's counts sum to the same rater count.
KappaResult fleiss_kappa(const AgreementTable& table);

// Corpus-level BLEU with clipped n-gram precisions for n = 1..max_n and the
// brevity penalty exp(min(0, 1 - r/c)). No smoothing: any zero precision
// gives 0. Throws EmptyInput, LengthMismatch, InvalidArgument (max_n == 0).
double bleu(const std::vector<std::vector<std::string>>& hypotheses,
            const std::vector<std::vector<std::string>>& references, std::size_t max_n);

struct TaskScores {
  PrfScore intent;
  PrfScore slot;
  std::size_t n_utterances = 0;
  std::size_t n_intent_utterances = 0;  // user turns scored for intent
};

struct EvalReport {
  TaskScores overall;
  std::map<std::string, TaskScores> per_domain;
  std::map<std::string, std::string> metadata;

  bool operator==(const EvalReport& o) const;
};

struct PredictionRecord {
  std::set<std::string> intents;
  std::vector<std::string> slot_tags;
};

// System turns count for slots only.
EvalReport evaluate_predictions(const AnnotatedCorpus& gold,
                                const std::vector<PredictionRecord>& predictions);
EvalReport evaluate(const JointModel& model, const AnnotatedCorpus& gold);

// Stable key order; reals in shortest round-trip form.
std::string report_to_json(const EvalReport& report, int indent = 2);

}  // namespace bicf
