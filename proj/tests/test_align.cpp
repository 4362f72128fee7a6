#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "bicf/align.hpp"
#include "bicf/error.hpp"
#include "bicf/rng.hpp"
#include "oracles.hpp"

using namespace bicf;

namespace {

std::vector<SentencePair> parse(const std::string& text) {
  std::istringstream in(text);
  return read_parallel(in);
}

// Maps the string pairs onto the dense ids the oracle works with and builds
// its uniform-over-co-occurrence starting table.
struct Indexed {
  std::map<std::string, int> src{{kNullWord, 0}}, tgt;
  std::vector<oracle::IdPair> pairs;
  oracle::TTable t;
};

Indexed index(const std::vector<SentencePair>& pairs) {
  Indexed x;
  auto id = [](std::map<std::string, int>& m, const std::string& w) {
    auto [it, fresh] = m.emplace(w, static_cast<int>(m.size()));
    (void)fresh;
    return it->second;
  };
  for (const auto& p : pairs) {
    oracle::IdPair q;
    for (const auto& w : p.source) q.src.push_back(id(x.src, w));
    for (const auto& w : p.target) q.tgt.push_back(id(x.tgt, w));
    x.pairs.push_back(q);
  }
  x.t.assign(x.src.size(), std::vector<double>(x.tgt.size(), 0.0));
  std::vector<std::set<int>> cooc(x.src.size());
  for (const auto& q : x.pairs) {
    for (int f : q.tgt) {
      cooc[0].insert(f);
      for (int s : q.src) cooc[s].insert(f);
    }
  }
  for (std::size_t s = 0; s < cooc.size(); ++s) {
    for (int f : cooc[s]) x.t[s][f] = 1.0 / static_cast<double>(cooc[s].size());
  }
  return x;
}

std::vector<SentencePair> random_pairs(std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  std::vector<SentencePair> out;
  for (std::size_t k = 0; k < n; ++k) {
    SentencePair p;
    const std::size_t ls = 1 + rng.below(4), lt = 1 + rng.below(4);
    for (std::size_t i = 0; i < ls; ++i) p.source.push_back("s" + std::to_string(rng.below(5)));
    for (std::size_t i = 0; i < lt; ++i) p.target.push_back("t" + std::to_string(rng.below(5)));
    out.push_back(p);
  }
  return out;
}

}  // namespace

TEST(Model1, HandComputedFirstIteration) {
  // Pairs (a b -> x y) and (a -> x). Uniform start over co-occurring targets:
  // t(x|a) = t(y|a) = 1/2, t(x|b) = t(y|b) = 1/2, t(x|N) = t(y|N) = 1/2.
  // Pair 1: every posterior is 1/3. Pair 2: x shared by N and a, 1/2 each.
  // Counts: a: x 1/3+1/2, y 1/3; b: x 1/3, y 1/3; N: x 1/3+1/2, y 1/3.
  const auto pairs = parse("a b ||| x y\na ||| x\n");
  const auto fit = train_model1(pairs, {1, false, 0});
  EXPECT_NEAR(fit.table.probability("a", "x"), (5.0 / 6.0) / (7.0 / 6.0), 1e-15);
  EXPECT_NEAR(fit.table.probability("a", "y"), (1.0 / 3.0) / (7.0 / 6.0), 1e-15);
  EXPECT_NEAR(fit.table.probability("b", "x"), 0.5, 1e-15);
  EXPECT_NEAR(fit.table.probability(kNullWord, "x"), 5.0 / 7.0, 1e-15);
  // Initial log-likelihood: pair 1 has 2 words each with sum 3/2 over 3
  // sources, pair 2 one word with sum 1 over 2 sources.
  EXPECT_NEAR(fit.log_likelihood[0], 2.0 * std::log(0.5) + std::log(0.5), 1e-12);
}

TEST(Model1, MatchesIndependentEmOnRandomCorpora) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto pairs = random_pairs(seed, 12);
    Indexed x = index(pairs);
    const auto fit = train_model1(pairs, {6, false, 0});
    ASSERT_EQ(fit.log_likelihood.size(), 7u);
    EXPECT_NEAR(fit.log_likelihood[0], oracle::model1_ll(x.pairs, x.t), 1e-10);
    for (int it = 1; it <= 6; ++it) {
      x.t = oracle::model1_step(x.pairs, x.t);
      EXPECT_NEAR(fit.log_likelihood[it], oracle::model1_ll(x.pairs, x.t), 1e-10);
    }
    for (const auto& [s, si] : x.src) {
      for (const auto& [f, fi] : x.tgt) {
        EXPECT_NEAR(fit.table.probability(s, f), x.t[si][fi], 1e-12) << s << " " << f;
      }
    }
  }
}

TEST(Model1, LogLikelihoodNeverDecreases) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    for (bool random_init : {false, true}) {
      const auto fit = train_model1(random_pairs(seed + 50, 30), {15, random_init, seed});
      for (std::size_t k = 1; k < fit.log_likelihood.size(); ++k) {
        EXPECT_GE(fit.log_likelihood[k], fit.log_likelihood[k - 1] - 1e-9);
      }
    }
  }
}

TEST(Model1, RowsAreDistributions) {
  const auto fit = train_model1(random_pairs(3, 25), {5, true, 9});
  for (const auto& [s, row] : fit.table.probabilities) {
    double sum = 0.0;
    for (const auto& [t, p] : row) sum += p;
    EXPECT_NEAR(sum, 1.0, 1e-12) << s;
  }
}

TEST(Model1, RejectsDegenerateInput) {
  try {
    train_model1({}, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyParallelCorpus);
  }
  EXPECT_THROW(train_model1(parse("a ||| b\n"), {0, false, 0}), Error);
}

TEST(ConfidenceLexicon, ArgmaxPerSourceSortedByConfidence) {
  TranslationTable t;
  t.probabilities["a"] = {{"x", 0.7}, {"y", 0.3}};
  t.probabilities["b"] = {{"x", 0.5}, {"z", 0.5}};
  t.probabilities[kNullWord] = {{"x", 1.0}};
  const auto lex = build_confidence_lexicon(t);
  ASSERT_EQ(lex.size(), 2u);
  EXPECT_EQ(lex.entries[0], (ConfidenceEntry{"a", "x", 0.7}));
  EXPECT_EQ(lex.entries[1], (ConfidenceEntry{"b", "x", 0.5}));  // tie keeps smaller target
}

TEST(Pharaoh, CoAlignmentOverSourceOccurrences) {
  const auto pairs = parse("a b ||| x y\na c ||| x z\na ||| y\n");
  std::istringstream links("0-0 1-1\n0-0 1-1\n0-0\n");
  const auto lex = import_pharaoh(links, pairs);
  // a: x twice, y once, over 3 occurrences.
  ASSERT_EQ(lex.size(), 3u);
  EXPECT_EQ(lex.entries[0].source_word, "b");
  EXPECT_DOUBLE_EQ(lex.entries[0].confidence, 1.0);
  EXPECT_EQ(lex.entries[2], (ConfidenceEntry{"a", "x", 2.0 / 3.0}));
}

TEST(Pharaoh, ErrorsAreTyped) {
  const auto pairs = parse("a b ||| x y\n");
  std::istringstream too_many("0-0\n1-1\n");
  try {
    import_pharaoh(too_many, pairs);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPairCountMismatch);
  }
  std::istringstream out_of_range("0-5\n");
  EXPECT_THROW(import_pharaoh(out_of_range, pairs), IndexOutOfRange);
  std::istringstream malformed("0:1\n");
  EXPECT_THROW(import_pharaoh(malformed, pairs), ParseError);
}

TEST(ParallelIo, ParsesAndRoundTrips) {
  const auto pairs = parse("Hello World ||| halo dunia\n\n");
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].source, (std::vector<std::string>{"hello", "world"}));
  std::ostringstream out;
  write_parallel(out, pairs);
  EXPECT_EQ(parse(out.str()), pairs);
  EXPECT_THROW(parse("no separator\n"), ParseError);
  EXPECT_THROW(parse("a |||\n"), ParseError);
}

TEST(ConfidenceLexiconIo, RoundTripAndValidation) {
  const auto lex = build_confidence_lexicon(train_model1(random_pairs(8, 20), {4}).table);
  std::ostringstream out;
  write_confidence_lexicon(out, lex);
  std::istringstream in(out.str());
  EXPECT_EQ(read_confidence_lexicon(in), lex);
  std::istringstream bad("a\tx\t1.5\n");
  EXPECT_THROW(read_confidence_lexicon(bad), ParseError);
}
