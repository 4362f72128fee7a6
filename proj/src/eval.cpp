#include "bicf/eval.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "bicf/error.hpp"
#include "bicf/neural.hpp"

namespace bicf {

PrCounts& PrCounts::operator+=(const PrCounts& o) {
  true_positive += o.true_positive;
  false_positive += o.false_positive;
  false_negative += o.false_negative;
  return *this;
}

PrfScore prf_from_counts(const PrCounts& c) {
  PrfScore s;
  s.counts = c;
  const double tp = static_cast<double>(c.true_positive);
  if (c.true_positive + c.false_positive > 0) {
    s.precision = tp / static_cast<double>(c.true_positive + c.false_positive);
  }
  if (c.true_positive + c.false_negative > 0) {
    s.recall = tp / static_cast<double>(c.true_positive + c.false_negative);
  }
  if (s.precision + s.recall > 0) {
    s.f1 = 2 * s.precision * s.recall / (s.precision + s.recall);
  }
  return s;
}

namespace {

template <typename T>
PrCounts set_counts(const std::set<T>& gold, const std::set<T>& pred) {
  PrCounts c;
  for (const auto& p : pred) {
    if (gold.count(p)) {
      ++c.true_positive;
    } else {
      ++c.false_positive;
    }
  }
  c.false_negative = gold.size() - c.true_positive;
  return c;
}

void require_aligned(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw Error(ErrorCode::kLengthMismatch, std::string(what) + ": " + std::to_string(a) +
                                                " gold vs " + std::to_string(b) + " predicted");
  }
}

}  // namespace

PrfScore slot_f1(const std::vector<std::vector<SlotSpan>>& gold,
                 const std::vector<std::vector<SlotSpan>>& pred) {
  require_aligned(gold.size(), pred.size(), "slot_f1");
  PrCounts total;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    total += set_counts(std::set<SlotSpan>(gold[i].begin(), gold[i].end()),
                        std::set<SlotSpan>(pred[i].begin(), pred[i].end()));
  }
  return prf_from_counts(total);
}

PrfScore intent_f1(const std::vector<std::set<std::string>>& gold,
                   const std::vector<std::set<std::string>>& pred) {
  require_aligned(gold.size(), pred.size(), "intent_f1");
  PrCounts total;
  for (std::size_t i = 0; i < gold.size(); ++i) total += set_counts(gold[i], pred[i]);
  return prf_from_counts(total);
}

AgreementTable AgreementTable::from_ratings(const std::vector<std::vector<std::size_t>>& ratings,
                                            std::size_t categories) {
  AgreementTable t;
  for (const auto& item : ratings) {
    std::vector<std::size_t> row(categories, 0);
    for (auto r : item) {
      if (r >= categories) throw Error(ErrorCode::kInvalidArgument, "rating outside categories");
      ++row[r];
    }
    t.counts.push_back(std::move(row));
  }
  return t;
}

KappaResult fleiss_kappa(const AgreementTable& table) {
  const auto& rows = table.counts;
  if (rows.empty()) throw Error(ErrorCode::kInvalidArgument, "agreement table has no items");
  const std::size_t k = rows.front().size();
  std::size_t n = 0;
  for (auto v : rows.front()) n += v;
  if (n < 2) throw Error(ErrorCode::kInvalidArgument, "agreement needs at least two raters");
  std::vector<double> marginal(k, 0.0);
  double observed = 0.0;
  for (const auto& row : rows) {
    if (row.size() != k) throw Error(ErrorCode::kInvalidArgument, "ragged agreement table");
    std::size_t sum = 0, sq = 0;
    for (std::size_t j = 0; j < k; ++j) {
      sum += row[j];
      sq += row[j] * row[j];
      marginal[j] += static_cast<double>(row[j]);
    }
    if (sum != n) {
      throw Error(ErrorCode::kInvalidArgument, "every item needs the same number of ratings");
    }
    observed += static_cast<double>(sq - n) / static_cast<double>(n * (n - 1));
  }
  const double N = static_cast<double>(rows.size());
  KappaResult r;
  r.observed = observed / N;
  for (double m : marginal) {
    const double p = m / (N * static_cast<double>(n));
    r.expected += p * p;
  }
  if (r.expected >= 1.0) {
    r.kappa = 1.0;
    r.degenerate = true;
    return r;
  }
  r.kappa = (r.observed - r.expected) / (1.0 - r.expected);
  return r;
}

double bleu(const std::vector<std::vector<std::string>>& hypotheses,
            const std::vector<std::vector<std::string>>& references, std::size_t max_n) {
  if (hypotheses.empty()) throw Error(ErrorCode::kEmptyInput, "bleu: no hypotheses");
  require_aligned(references.size(), hypotheses.size(), "bleu");
  if (max_n == 0) throw Error(ErrorCode::kInvalidArgument, "bleu: max_n must be >= 1");
  std::vector<std::size_t> matched(max_n, 0), total(max_n, 0);
  std::size_t hyp_len = 0, ref_len = 0;
  for (std::size_t s = 0; s < hypotheses.size(); ++s) {
    const auto& h = hypotheses[s];
    const auto& r = references[s];
    hyp_len += h.size();
    ref_len += r.size();
    for (std::size_t n = 1; n <= max_n; ++n) {
      if (h.size() < n) continue;
      std::map<std::vector<std::string>, std::size_t> ref_counts, hyp_counts;
      for (std::size_t i = 0; i + n <= r.size(); ++i) {
        ++ref_counts[std::vector<std::string>(r.begin() + i, r.begin() + i + n)];
      }
      for (std::size_t i = 0; i + n <= h.size(); ++i) {
        ++hyp_counts[std::vector<std::string>(h.begin() + i, h.begin() + i + n)];
      }
      for (const auto& [gram, c] : hyp_counts) {
        auto it = ref_counts.find(gram);
        if (it != ref_counts.end()) matched[n - 1] += std::min(c, it->second);
      }
      total[n - 1] += h.size() - n + 1;
    }
  }
  if (hyp_len == 0) return 0.0;
  double log_sum = 0.0;
  for (std::size_t n = 0; n < max_n; ++n) {
    if (matched[n] == 0) return 0.0;
    log_sum += std::log(static_cast<double>(matched[n]) / static_cast<double>(total[n]));
  }
  const double bp =
      std::exp(std::min(0.0, 1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp_len)));
  return bp * std::exp(log_sum / static_cast<double>(max_n));
}

namespace {

bool same_score(const PrfScore& a, const PrfScore& b) {
  return a.counts == b.counts && a.precision == b.precision && a.recall == b.recall &&
         a.f1 == b.f1;
}

bool same_task(const TaskScores& a, const TaskScores& b) {
  return same_score(a.intent, b.intent) && same_score(a.slot, b.slot) &&
         a.n_utterances == b.n_utterances && a.n_intent_utterances == b.n_intent_utterances;
}

struct Tally {
  PrCounts intent, slot;
  std::size_t n = 0, n_intent = 0;

  TaskScores scores() const {
    return {prf_from_counts(intent), prf_from_counts(slot), n, n_intent};
  }
};

}  // namespace

bool EvalReport::operator==(const EvalReport& o) const {
  if (!same_task(overall, o.overall) || metadata != o.metadata ||
      per_domain.size() != o.per_domain.size()) {
    return false;
  }
  for (const auto& [d, s] : per_domain) {
    auto it = o.per_domain.find(d);
    if (it == o.per_domain.end() || !same_task(s, it->second)) return false;
  }
  return true;
}

EvalReport evaluate_predictions(const AnnotatedCorpus& gold,
                                const std::vector<PredictionRecord>& predictions) {
  require_aligned(gold.size(), predictions.size(), "evaluate");
  Tally all;
  std::map<std::string, Tally> domains;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const Utterance& u = gold.utterances[i];
    const PredictionRecord& p = predictions[i];
    require_aligned(u.slot_tags.size(), p.slot_tags.size(), "evaluate tags");
    const auto g = spans_from_bio(u.slot_tags);
    const auto s = spans_from_bio(p.slot_tags);
    const PrCounts slot = set_counts(std::set<SlotSpan>(g.begin(), g.end()),
                                     std::set<SlotSpan>(s.begin(), s.end()));
    for (Tally* t : {&all, &domains[u.domain]}) {
      t->slot += slot;
      ++t->n;
      if (u.speaker == Speaker::kUser) {
        t->intent += set_counts(u.intents, p.intents);
        ++t->n_intent;
      }
    }
  }
  EvalReport r;
  r.overall = all.scores();
  for (const auto& [d, t] : domains) r.per_domain.emplace(d, t.scores());
  r.metadata["intent_averaging"] = "micro";
  r.metadata["slot_matching"] = "exact-span";
  return r;
}

EvalReport evaluate(const JointModel& model, const AnnotatedCorpus& gold) {
  std::vector<PredictionRecord> preds;
  preds.reserve(gold.size());
  for (const auto& u : gold.utterances) {
    Prediction p = predict(model, u);
    preds.push_back({std::move(p.intent_set), std::move(p.slot_tags)});
  }
  return evaluate_predictions(gold, preds);
}

namespace {

nlohmann::ordered_json score_json(const PrfScore& s) {
  return {{"precision", s.precision},
          {"recall", s.recall},
          {"f1", s.f1},
          {"tp", s.counts.true_positive},
          {"fp", s.counts.false_positive},
          {"fn", s.counts.false_negative}};
}

nlohmann::ordered_json task_json(const TaskScores& t) {
  return {{"n_utterances", t.n_utterances},
          {"n_intent_utterances", t.n_intent_utterances},
          {"intent", score_json(t.intent)},
          {"slot", score_json(t.slot)}};
}

}  // namespace

std::string report_to_json(const EvalReport& report, int indent) {
  nlohmann::ordered_json j;
  j["metadata"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : report.metadata) j["metadata"][k] = v;
  j["overall"] = task_json(report.overall);
  j["per_domain"] = nlohmann::ordered_json::object();
  for (const auto& [d, t] : report.per_domain) j["per_domain"][d] = task_json(t);
  return j.dump(indent);
}

}  // namespace bicf
