#include "bicf/lexstats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>

#include "bicf/error.hpp"
#include "tsv.hpp"

namespace bicf {

double term_frequency(const std::string& word, const Utterance& utterance) {
  if (utterance.tokens.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& t : utterance.tokens) hits += t.normalized == word;
  return static_cast<double>(hits) / static_cast<double>(utterance.tokens.size());
}

double inverse_document_frequency(const std::string& word,
                                  const AnnotatedCorpus& corpus) {
  std::size_t df = 0;
  for (const auto& u : corpus.utterances) {
    for (const auto& t : u.tokens) {
      if (t.normalized == word) {
        ++df;
        break;
      }
    }
  }
  return std::log(static_cast<double>(corpus.size()) / (1.0 + static_cast<double>(df)));
}

void sort_frequency_entries(std::vector<FrequencyEntry>& entries) {
  std::sort(entries.begin(), entries.end(),
            [](const FrequencyEntry& a, const FrequencyEntry& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.word < b.word;
            });
}

FrequencyLexicon build_frequency_lexicon(const AnnotatedCorpus& corpus,
                                         TfidfAggregation aggregation) {
  if (corpus.empty()) {
    throw Error(ErrorCode::kEmptyCorpus, "cannot rank words of an empty corpus");
  }
  // Per utterance term counts, computed once.
  std::vector<std::map<std::string, std::size_t>> counts(corpus.size());
  std::map<std::string, std::size_t> df;
  for (std::size_t j = 0; j < corpus.size(); ++j) {
    for (const auto& t : corpus.utterances[j].tokens) ++counts[j][t.normalized];
    for (const auto& [w, _] : counts[j]) ++df[w];
  }
  std::map<std::string, double> idf;
  const double n = static_cast<double>(corpus.size());
  for (const auto& [w, d] : df) idf[w] = std::log(n / (1.0 + static_cast<double>(d)));

  struct Acc {
    double best = 0.0;
    double sum = 0.0;
    std::size_t seen = 0;
  };
  std::map<std::string, Acc> acc;
  for (std::size_t j = 0; j < corpus.size(); ++j) {
    const double len = static_cast<double>(corpus.utterances[j].size());
    for (const auto& [w, c] : counts[j]) {
      const double score = static_cast<double>(c) / len * idf[w];
      Acc& a = acc[w];
      if (a.seen == 0 || score > a.best) a.best = score;
      a.sum += score;
      ++a.seen;
    }
  }
  FrequencyLexicon lex;
  lex.entries.reserve(acc.size());
  for (const auto& [w, a] : acc) {
    const double score = aggregation == TfidfAggregation::kMax
                             ? a.best
                             : a.sum / static_cast<double>(a.seen);
    lex.entries.push_back({w, score});
  }
  sort_frequency_entries(lex.entries);
  return lex;
}

void write_frequency_lexicon(std::ostream& out, const FrequencyLexicon& lex) {
  for (const auto& e : lex.entries) out << e.word << '\t' << detail::format_real(e.score) << '\n';
}

FrequencyLexicon read_frequency_lexicon(std::istream& in) {
  FrequencyLexicon lex;
  std::set<std::string> seen;
  std::size_t lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = detail::split_tabs(line);
    if (fields.size() != 2) throw ParseError(lineno, "expected 2 tab-separated fields");
    if (!seen.insert(fields[0]).second) {
      throw ParseError(lineno, "duplicate word '" + fields[0] + "'");
    }
    lex.entries.push_back({fields[0], detail::parse_real(fields[1], lineno)});
  }
  sort_frequency_entries(lex.entries);
  return lex;
}

void save_frequency_lexicon(const FrequencyLexicon& lex,
                            const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  write_frequency_lexicon(out, lex);
}

FrequencyLexicon load_frequency_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  try {
    return read_frequency_lexicon(in);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.reason(), path.string());
  }
}

}  // namespace bicf
