#include "bicf/mixing.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include <json.hpp>

#include "bicf/error.hpp"
#include "tsv.hpp"

namespace bicf {

void ThreshParams::check() const {
  auto unit = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument,
                  std::string(name) + " must lie in [0,1], got " + std::to_string(v));
    }
  };
  if (thresh_mode == ThreshMode::kFraction) {
    unit(lambda_freq, "lambda_freq");
    unit(lambda_conf, "lambda_conf");
  } else if (thresh_mode == ThreshMode::kCount && (lambda_freq < 0 || lambda_conf < 0)) {
    throw Error(ErrorCode::kInvalidArgument, "count thresholds must be non-negative");
  }
  unit(theta, "theta");
}

std::size_t top_count(std::size_t n, double fraction) {
  const double exact = fraction * static_cast<double>(n);
  // Guard against 0.3 * 10 landing a hair above 3.
  const double rounded = std::round(exact);
  const double k = std::abs(exact - rounded) < 1e-9 ? rounded : std::ceil(exact);
  return std::min(n, static_cast<std::size_t>(std::max(0.0, k)));
}

namespace {

template <typename Entry, typename Score>
std::vector<Entry> top_subset(const std::vector<Entry>& entries, double lambda,
                              ThreshMode mode, Score score) {
  std::size_t keep = 0;
  switch (mode) {
    case ThreshMode::kFraction:
      if (!(lambda >= 0.0 && lambda <= 1.0)) {
        throw Error(ErrorCode::kInvalidArgument, "lambda must lie in [0,1]");
      }
      keep = top_count(entries.size(), lambda);
      break;
    case ThreshMode::kCount:
      keep = std::min(entries.size(),
                      static_cast<std::size_t>(std::max(0.0, std::floor(lambda))));
      break;
    case ThreshMode::kScore:
      while (keep < entries.size() && score(entries[keep]) >= lambda) ++keep;
      break;
  }
  return {entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(keep)};
}

}  // namespace

FrequencyLexicon thresh(const FrequencyLexicon& lexicon, double lambda, ThreshMode mode) {
  return {top_subset(lexicon.entries, lambda, mode,
                     [](const FrequencyEntry& e) { return e.score; })};
}

ConfidenceLexicon thresh(const ConfidenceLexicon& lexicon, double lambda,
                         ThreshMode mode) {
  return {top_subset(lexicon.entries, lambda, mode,
                     [](const ConfidenceEntry& e) { return e.confidence; })};
}

SubstitutionTable::SubstitutionTable(std::vector<SubstitutionEntry> entries)
    : entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end(),
            [](const SubstitutionEntry& a, const SubstitutionEntry& b) {
              if (a.freq_rank != b.freq_rank) return a.freq_rank < b.freq_rank;
              return a.source < b.source;
            });
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (!index_.emplace(entries_[i].source, i).second) {
      throw Error(ErrorCode::kValidation,
                  "substitution table maps '" + entries_[i].source + "' twice");
    }
  }
}

const std::string* SubstitutionTable::lookup(const std::string& source) const {
  auto it = index_.find(source);
  return it == index_.end() ? nullptr : &entries_[it->second].target;
}

SubstitutionTable fusion(const FrequencyLexicon& freq, const ConfidenceLexicon& conf,
                         double theta, FusionMode mode) {
  if (!(theta >= 0.0 && theta <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "theta must lie in [0,1]");
  }
  std::map<std::string, std::size_t> freq_rank;
  for (std::size_t i = 0; i < freq.entries.size(); ++i) {
    freq_rank.emplace(freq.entries[i].word, i + 1);
  }
  std::map<std::string, const ConfidenceEntry*> conf_of;
  for (const auto& e : conf.entries) conf_of.emplace(e.source_word, &e);

  const std::size_t n_freq = top_count(freq.entries.size(), theta);
  const std::size_t n_conf = top_count(conf.entries.size(), 1.0 - theta);
  std::set<std::string> freq_top, conf_top;
  for (std::size_t i = 0; i < n_freq; ++i) freq_top.insert(freq.entries[i].word);
  for (std::size_t i = 0; i < n_conf; ++i) conf_top.insert(conf.entries[i].source_word);

  std::set<std::string> chosen;
  if (mode == FusionMode::kIntersection) {
    std::set_intersection(freq_top.begin(), freq_top.end(), conf_top.begin(),
                          conf_top.end(), std::inserter(chosen, chosen.end()));
  } else {
    std::set_union(freq_top.begin(), freq_top.end(), conf_top.begin(), conf_top.end(),
                   std::inserter(chosen, chosen.end()));
  }
  std::vector<SubstitutionEntry> entries;
  for (const auto& w : chosen) {
    auto r = freq_rank.find(w);
    auto c = conf_of.find(w);
    if (r == freq_rank.end() || c == conf_of.end()) continue;
    entries.push_back({w, c->second->target_word, r->second, c->second->confidence});
  }
  return SubstitutionTable(std::move(entries));
}

std::size_t MixedCorpus::substitution_count() const {
  std::size_t n = 0;
  for (const auto& l : log) n += l.size();
  return n;
}

MixedCorpus mix_corpus(const AnnotatedCorpus& source, const SubstitutionTable& table) {
  MixedCorpus mixed;
  mixed.corpus = source;
  mixed.corpus.language_tag = "mixed";
  mixed.log.resize(source.size());
  for (std::size_t j = 0; j < mixed.corpus.size(); ++j) {
    auto& tokens = mixed.corpus.utterances[j].tokens;
    for (std::size_t k = 0; k < tokens.size(); ++k) {
      const std::string* target = table.lookup(tokens[k].normalized);
      if (target == nullptr) continue;
      mixed.log[j].push_back({k, tokens[k].surface, normalize(*target)});
      tokens[k] = Token(normalize(*target));
    }
  }
  return mixed;
}

MixingResult bicf_mix(const AnnotatedCorpus& source, const FrequencyLexicon& freq,
                      const ConfidenceLexicon& conf, const ThreshParams& params) {
  params.check();
  const FrequencyLexicon freq_hat = thresh(freq, params.lambda_freq, params.thresh_mode);
  const ConfidenceLexicon conf_hat = thresh(conf, params.lambda_conf, params.thresh_mode);
  MixingResult r;
  r.table = fusion(freq_hat, conf_hat, params.theta, params.fusion_mode);
  r.mixed = mix_corpus(source, r.table);
  return r;
}

std::string check_label_preservation(const AnnotatedCorpus& source,
                                     const MixedCorpus& mixed) {
  if (source.size() != mixed.corpus.size() || mixed.log.size() != source.size()) {
    return "utterance count differs";
  }
  for (std::size_t j = 0; j < source.size(); ++j) {
    const auto& a = source.utterances[j];
    const auto& b = mixed.corpus.utterances[j];
    const std::string where = "utterance " + std::to_string(j) + ": ";
    if (a.size() != b.size()) return where + "token count changed";
    if (a.slot_tags != b.slot_tags) return where + "slot tags changed";
    if (a.intents != b.intents) return where + "intents changed";
    if (a.speaker != b.speaker || a.domain != b.domain) return where + "metadata changed";
    std::vector<bool> logged(a.size(), false);
    for (const auto& rec : mixed.log[j]) {
      if (rec.index >= a.size()) return where + "log index out of range";
      if (a.tokens[rec.index].surface != rec.original ||
          b.tokens[rec.index].surface != rec.substituted) {
        return where + "log disagrees with tokens at " + std::to_string(rec.index);
      }
      logged[rec.index] = true;
    }
    for (std::size_t k = 0; k < a.size(); ++k) {
      if (!logged[k] && a.tokens[k] != b.tokens[k]) {
        return where + "unlogged change at " + std::to_string(k);
      }
    }
  }
  return {};
}

void write_substitution_table(std::ostream& out, const SubstitutionTable& table) {
  for (const auto& e : table.entries()) {
    out << e.source << '\t' << e.target << '\t' << e.freq_rank << '\t'
        << detail::format_real(e.confidence) << '\n';
  }
}

SubstitutionTable read_substitution_table(std::istream& in) {
  std::vector<SubstitutionEntry> entries;
  std::size_t lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto f = detail::split_tabs(line);
    if (f.size() != 4) throw ParseError(lineno, "expected 4 tab-separated fields");
    const double rank = detail::parse_real(f[2], lineno);
    if (rank < 1 || rank != std::floor(rank)) throw ParseError(lineno, "bad freq_rank");
    entries.push_back({f[0], f[1], static_cast<std::size_t>(rank),
                       detail::parse_real(f[3], lineno)});
  }
  return SubstitutionTable(std::move(entries));
}

void save_substitution_table(const SubstitutionTable& table,
                             const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  write_substitution_table(out, table);
}

void write_substitution_log(std::ostream& out, const MixedCorpus& mixed) {
  using nlohmann::json;
  for (std::size_t j = 0; j < mixed.log.size(); ++j) {
    std::string line = "{\"utterance\":" + std::to_string(j) + ",\"substitutions\":[";
    for (std::size_t k = 0; k < mixed.log[j].size(); ++k) {
      const auto& r = mixed.log[j][k];
      if (k) line += ',';
      line += "{\"index\":" + std::to_string(r.index) +
              ",\"original\":" + json(r.original).dump() +
              ",\"substituted\":" + json(r.substituted).dump() + "}";
    }
    out << line << "]}\n";
  }
}

std::vector<std::vector<SubstitutionRecord>> read_substitution_log(std::istream& in) {
  using nlohmann::json;
  std::vector<std::vector<SubstitutionRecord>> log;
  std::size_t lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    if (line.empty()) continue;
    try {
      json rec = json::parse(line);
      std::vector<SubstitutionRecord> subs;
      for (const auto& s : rec.at("substitutions")) {
        subs.push_back({s.at("index").get<std::size_t>(), s.at("original").get<std::string>(),
                        s.at("substituted").get<std::string>()});
      }
      log.push_back(std::move(subs));
    } catch (const json::exception& e) {
      throw ParseError(lineno, e.what());
    }
  }
  return log;
}

void save_mixed_corpus(const MixedCorpus& mixed, const std::filesystem::path& corpus_path,
                       const std::filesystem::path& log_path) {
  save_corpus(mixed.corpus, corpus_path);
  std::ofstream out(log_path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + log_path.string());
  write_substitution_log(out, mixed);
}

}  // namespace bicf
