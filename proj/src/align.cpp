#include "bicf/align.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "bicf/corpus.hpp"
#include "bicf/error.hpp"
#include "bicf/rng.hpp"
#include "tsv.hpp"

namespace bicf {

double TranslationTable::probability(const std::string& source,
                                     const std::string& target) const {
  auto row = probabilities.find(source);
  if (row == probabilities.end()) return 0.0;
  auto cell = row->second.find(target);
  return cell == row->second.end() ? 0.0 : cell->second;
}

namespace {

// Dense-id view of the parallel corpus; source id 0 is NULL.
struct IndexedCorpus {
  std::vector<std::string> source_vocab{kNullWord};
  std::vector<std::string> target_vocab;
  std::vector<std::vector<std::uint32_t>> source;  // NULL prepended
  std::vector<std::vector<std::uint32_t>> target;
};

IndexedCorpus index_pairs(const std::vector<SentencePair>& pairs) {
  IndexedCorpus c;
  std::map<std::string, std::uint32_t> src_ids{{kNullWord, 0}}, tgt_ids;
  auto id_of = [](std::map<std::string, std::uint32_t>& ids,
                  std::vector<std::string>& vocab, const std::string& w) {
    auto [it, fresh] = ids.emplace(w, static_cast<std::uint32_t>(vocab.size()));
    if (fresh) vocab.push_back(w);
    return it->second;
  };
  for (const auto& p : pairs) {
    std::vector<std::uint32_t> s{0}, t;
    for (const auto& w : p.source) s.push_back(id_of(src_ids, c.source_vocab, w));
    for (const auto& w : p.target) t.push_back(id_of(tgt_ids, c.target_vocab, w));
    c.source.push_back(std::move(s));
    c.target.push_back(std::move(t));
  }
  return c;
}

inline std::uint64_t cell_key(std::uint32_t s, std::uint32_t t) {
  return (static_cast<std::uint64_t>(s) << 32) | t;
}

using Cells = std::unordered_map<std::uint64_t, double>;

double log_likelihood(const IndexedCorpus& c, const Cells& t_table) {
  double ll = 0.0;
  for (std::size_t k = 0; k < c.source.size(); ++k) {
    const double norm = 1.0 / static_cast<double>(c.source[k].size());
    for (auto f : c.target[k]) {
      double total = 0.0;
      for (auto e : c.source[k]) total += t_table.at(cell_key(e, f));
      ll += std::log(total * norm);
    }
  }
  return ll;
}

TranslationTable to_table(const IndexedCorpus& c, const Cells& t_table) {
  TranslationTable table;
  for (const auto& [key, p] : t_table) {
    const auto s = static_cast<std::uint32_t>(key >> 32);
    const auto t = static_cast<std::uint32_t>(key & 0xffffffffu);
    table.probabilities[c.source_vocab[s]][c.target_vocab[t]] = p;
  }
  return table;
}

void check_pairs(const std::vector<SentencePair>& pairs) {
  if (pairs.empty()) {
    throw Error(ErrorCode::kEmptyParallelCorpus, "parallel corpus is empty");
  }
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (pairs[i].source.empty() || pairs[i].target.empty()) {
      throw Error(ErrorCode::kValidation,
                  "sentence pair " + std::to_string(i) + " has an empty side");
    }
  }
}

}  // namespace

Model1Fit train_model1(const std::vector<SentencePair>& pairs,
                       const Model1Options& options) {
  check_pairs(pairs);
  if (options.iterations == 0) {
    throw Error(ErrorCode::kInvalidArgument, "iterations must be at least 1");
  }
  const IndexedCorpus c = index_pairs(pairs);

  // Only co-occurring cells are stored; every row is normalised over them.
  Cells t_table;
  for (std::size_t k = 0; k < c.source.size(); ++k) {
    for (auto e : c.source[k]) {
      for (auto f : c.target[k]) t_table.emplace(cell_key(e, f), 1.0);
    }
  }
  if (options.random_init) {
    Rng rng(options.seed);
    std::vector<std::uint64_t> keys;
    keys.reserve(t_table.size());
    for (const auto& [key, _] : t_table) keys.push_back(key);
    std::sort(keys.begin(), keys.end());
    for (auto key : keys) t_table[key] = 0.5 + rng.uniform();
  }
  {
    std::vector<double> row_sum(c.source_vocab.size(), 0.0);
    for (const auto& [key, p] : t_table) row_sum[key >> 32] += p;
    for (auto& [key, p] : t_table) p /= row_sum[key >> 32];
  }

  Model1Fit fit;
  fit.log_likelihood.push_back(log_likelihood(c, t_table));
  Cells counts;
  std::vector<double> totals(c.source_vocab.size());
  for (std::size_t it = 0; it < options.iterations; ++it) {
    counts.clear();
    std::fill(totals.begin(), totals.end(), 0.0);
    for (std::size_t k = 0; k < c.source.size(); ++k) {
      for (auto f : c.target[k]) {
        double z = 0.0;
        for (auto e : c.source[k]) z += t_table.at(cell_key(e, f));
        for (auto e : c.source[k]) {
          const double posterior = t_table.at(cell_key(e, f)) / z;
          counts[cell_key(e, f)] += posterior;
          totals[e] += posterior;
        }
      }
    }
    for (auto& [key, p] : t_table) {
      auto found = counts.find(key);
      p = found == counts.end() ? 0.0 : found->second / totals[key >> 32];
    }
    fit.log_likelihood.push_back(log_likelihood(c, t_table));
  }
  fit.table = to_table(c, t_table);
  return fit;
}

double model1_log_likelihood(const std::vector<SentencePair>& pairs,
                             const TranslationTable& table) {
  double ll = 0.0;
  for (const auto& p : pairs) {
    const double norm = 1.0 / static_cast<double>(p.source.size() + 1);
    for (const auto& f : p.target) {
      double total = table.probability(kNullWord, f);
      for (const auto& e : p.source) total += table.probability(e, f);
      ll += std::log(total * norm);
    }
  }
  return ll;
}

void sort_confidence_entries(std::vector<ConfidenceEntry>& entries) {
  std::sort(entries.begin(), entries.end(),
            [](const ConfidenceEntry& a, const ConfidenceEntry& b) {
              if (a.confidence != b.confidence) return a.confidence > b.confidence;
              if (a.source_word != b.source_word) return a.source_word < b.source_word;
              return a.target_word < b.target_word;
            });
}

namespace {

// Argmax per row; std::map iteration is lexicographic, so strict '>' keeps
// the smaller target on ties.
ConfidenceLexicon argmax_rows(
    const std::map<std::string, std::map<std::string, double>>& rows) {
  ConfidenceLexicon lex;
  for (const auto& [source, row] : rows) {
    if (source == kNullWord) continue;
    const std::string* best = nullptr;
    double best_p = 0.0;
    for (const auto& [target, p] : row) {
      if (best == nullptr || p > best_p) {
        best = &target;
        best_p = p;
      }
    }
    if (best != nullptr && best_p > 0.0) {
      lex.entries.push_back({source, *best, best_p});
    }
  }
  sort_confidence_entries(lex.entries);
  return lex;
}

}  // namespace

ConfidenceLexicon build_confidence_lexicon(const TranslationTable& table) {
  return argmax_rows(table.probabilities);
}

ConfidenceLexicon import_pharaoh(std::istream& alignments,
                                 const std::vector<SentencePair>& pairs) {
  std::vector<std::string> lines;
  for (std::string line; std::getline(alignments, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  if (lines.size() != pairs.size()) {
    throw Error(ErrorCode::kPairCountMismatch,
                std::to_string(lines.size()) + " alignment lines for " +
                    std::to_string(pairs.size()) + " sentence pairs");
  }
  std::map<std::string, std::map<std::string, double>> co_counts;
  std::map<std::string, double> occurrences;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto& pair = pairs[k];
    for (const auto& w : pair.source) occurrences[w] += 1.0;
    std::istringstream links(lines[k]);
    for (std::string link; links >> link;) {
      const auto dash = link.find('-');
      std::size_t i = 0, j = 0;
      const char* begin = link.data();
      const char* end = link.data() + link.size();
      bool ok = dash != std::string::npos;
      if (ok) {
        auto r1 = std::from_chars(begin, begin + dash, i);
        auto r2 = std::from_chars(begin + dash + 1, end, j);
        ok = r1.ec == std::errc() && r1.ptr == begin + dash &&
             r2.ec == std::errc() && r2.ptr == end;
      }
      if (!ok) throw ParseError(k + 1, "malformed alignment link '" + link + "'");
      if (i >= pair.source.size() || j >= pair.target.size()) {
        throw IndexOutOfRange(k + 1, "link " + link + " outside a " +
                                         std::to_string(pair.source.size()) + "x" +
                                         std::to_string(pair.target.size()) +
                                         " sentence pair");
      }
      co_counts[pair.source[i]][pair.target[j]] += 1.0;
    }
  }
  for (auto& [source, row] : co_counts) {
    for (auto& [target, count] : row) count /= occurrences[source];
  }
  return argmax_rows(co_counts);
}

ConfidenceLexicon import_pharaoh(const std::filesystem::path& alignments,
                                 const std::vector<SentencePair>& pairs) {
  std::ifstream in(alignments, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open alignment file " + alignments.string());
  return import_pharaoh(in, pairs);
}

namespace {

std::vector<std::string> split_tokens(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(normalize(w));
  return out;
}

}  // namespace

std::vector<SentencePair> read_parallel(std::istream& in) {
  std::vector<SentencePair> pairs;
  std::size_t lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    auto sep = line.find("|||");
    if (sep == std::string::npos) throw ParseError(lineno, "missing ' ||| ' separator");
    SentencePair p{split_tokens(line.substr(0, sep)), split_tokens(line.substr(sep + 3))};
    if (p.source.empty() || p.target.empty()) {
      throw ParseError(lineno, "sentence pair has an empty side");
    }
    pairs.push_back(std::move(p));
  }
  return pairs;
}

std::vector<SentencePair> load_parallel(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open parallel file " + path.string());
  try {
    return read_parallel(in);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.reason(), path.string());
  }
}

void write_parallel(std::ostream& out, const std::vector<SentencePair>& pairs) {
  auto join = [](const std::vector<std::string>& ws) {
    std::string s;
    for (std::size_t i = 0; i < ws.size(); ++i) {
      if (i) s += ' ';
      s += ws[i];
    }
    return s;
  };
  for (const auto& p : pairs) out << join(p.source) << " ||| " << join(p.target) << '\n';
}

void save_parallel(const std::vector<SentencePair>& pairs,
                   const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  write_parallel(out, pairs);
}

void write_confidence_lexicon(std::ostream& out, const ConfidenceLexicon& lex) {
  for (const auto& e : lex.entries) {
    out << e.source_word << '\t' << e.target_word << '\t' << detail::format_real(e.confidence)
        << '\n';
  }
}

ConfidenceLexicon read_confidence_lexicon(std::istream& in) {
  ConfidenceLexicon lex;
  std::size_t lineno = 0;
  std::set<std::string> seen;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = detail::split_tabs(line);
    if (fields.size() != 3) throw ParseError(lineno, "expected 3 tab-separated fields");
    double p = detail::parse_real(fields[2], lineno);
    if (!(p > 0.0 && p <= 1.0)) throw ParseError(lineno, "confidence outside (0,1]");
    if (!seen.insert(fields[0]).second) {
      throw ParseError(lineno, "duplicate source word '" + fields[0] + "'");
    }
    lex.entries.push_back({fields[0], fields[1], p});
  }
  sort_confidence_entries(lex.entries);
  return lex;
}

void save_confidence_lexicon(const ConfidenceLexicon& lex,
                             const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  write_confidence_lexicon(out, lex);
}

ConfidenceLexicon load_confidence_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  try {
    return read_confidence_lexicon(in);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.reason(), path.string());
  }
}

}  // namespace bicf
