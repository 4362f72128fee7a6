#include <gtest/gtest.h>

#include <sstream>

#include "bicf/corpus.hpp"
#include "bicf/error.hpp"
#include "oracles.hpp"

using namespace bicf;

namespace {

// Validity straight from the definition: every I-x continues a B-x or I-x.
bool valid_by_definition(const std::vector<std::string>& tags) {
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (tags[i].rfind("I-", 0) != 0) continue;
    if (i == 0) return false;
    const std::string type = tags[i].substr(2);
    if (tags[i - 1] != "B-" + type && tags[i - 1] != "I-" + type) return false;
  }
  return true;
}

std::vector<std::vector<std::string>> all_tag_sequences(std::size_t max_len) {
  const std::vector<std::string> alphabet = {"O", "B-a", "I-a", "B-b", "I-b"};
  std::vector<std::vector<std::string>> out;
  for (std::size_t n = 1; n <= max_len; ++n) {
    for (const auto& p : oracle::all_paths(n, alphabet.size())) {
      std::vector<std::string> tags;
      for (auto k : p) tags.push_back(alphabet[k]);
      out.push_back(tags);
    }
  }
  return out;
}

const char* kRecord =
    R"({"tokens":["Book","a","table"],"tags":["O","O","B-obj"],"intents":["book"],"speaker":"user","domain":"rest"})";

}  // namespace

TEST(Bio, EnumerationMatchesDefinition) {
  const auto seqs = all_tag_sequences(3);
  ASSERT_EQ(seqs.size(), 5u + 25u + 125u);
  for (const auto& tags : seqs) {
    const bool valid = valid_by_definition(tags);
    EXPECT_EQ(is_bio_valid(tags), valid);
    if (!valid) {
      EXPECT_THROW(check_bio(tags), BioError);
      continue;
    }
    // Valid sequences survive a span round trip and are left alone by repair.
    EXPECT_EQ(bio_from_spans(spans_from_bio(tags), tags.size()), tags);
    EXPECT_EQ(repair_bio(tags), tags);
  }
}

TEST(Bio, RepairProducesValidSequencesWithSameTypes) {
  for (const auto& tags : all_tag_sequences(3)) {
    const auto fixed = repair_bio(tags);
    EXPECT_TRUE(is_bio_valid(fixed));
    ASSERT_EQ(fixed.size(), tags.size());
    for (std::size_t i = 0; i < tags.size(); ++i) {
      EXPECT_EQ(parse_tag(fixed[i]).slot_type, parse_tag(tags[i]).slot_type);
    }
  }
}

TEST(Bio, OrphanAfterOtherTypeBecomesBegin) {
  EXPECT_EQ(repair_bio({"B-a", "I-b", "I-b"}),
            (std::vector<std::string>{"B-a", "B-b", "I-b"}));
}

TEST(Bio, SpansAreHalfOpen) {
  const auto spans = spans_from_bio({"B-a", "I-a", "O", "B-b"});
  ASSERT_EQ(spans.size(), 2u);
  EXPECT_EQ(spans[0], (SlotSpan{0, 2, "a"}));
  EXPECT_EQ(spans[1], (SlotSpan{3, 4, "b"}));
}

TEST(Bio, MalformedTagRejected) {
  EXPECT_THROW(parse_tag("X-a"), ValidationError);
  EXPECT_THROW(parse_tag("B-"), ValidationError);
  EXPECT_THROW(bio_from_spans({{1, 3, "a"}, {2, 4, "b"}}, 5), ValidationError);
}

TEST(CorpusIo, RoundTripIsByteStable) {
  auto u1 = oracle::utt({"Book", "a", "table"}, {"O", "O", "B-obj"}, {"book"}, "rest");
  auto u2 = oracle::utt({"ok"}, {"O"}, {}, "rest", Speaker::kSystem);
  u2.dialogue_id = "d7";
  const AnnotatedCorpus c = oracle::corpus({u1, u2}, "en");
  std::ostringstream first;
  write_corpus(first, c);
  std::istringstream in(first.str());
  const AnnotatedCorpus back = read_corpus(in, "en");
  EXPECT_EQ(back, c);
  std::ostringstream second;
  write_corpus(second, back);
  EXPECT_EQ(first.str(), second.str());
  EXPECT_EQ(back.utterances[0].tokens[0].normalized, "book");
  EXPECT_EQ(*back.utterances[1].dialogue_id, "d7");
}

TEST(CorpusIo, BlankLinesSkippedAndLabelsAbsorbed) {
  std::istringstream in(std::string("\n") + kRecord + "\n\n");
  const auto c = read_corpus(in);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c.intent_inventory, (std::set<std::string>{"book"}));
  EXPECT_EQ(c.slot_inventory, (std::set<std::string>{"obj"}));
}

TEST(CorpusIo, ParseErrorsCarryLineNumbers) {
  std::istringstream in(std::string(kRecord) + "\n{\"tokens\": [\n");
  try {
    read_corpus(in);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  std::istringstream missing(R"({"tokens":["a"],"tags":["O"],"intents":[],"domain":"d"})");
  EXPECT_THROW(read_corpus(missing), ParseError);
  std::istringstream bad_tag(
      R"({"tokens":["a"],"tags":["Q"],"intents":[],"speaker":"user","domain":"d"})");
  EXPECT_THROW(read_corpus(bad_tag), ParseError);
}

TEST(CorpusIo, StructuralViolationsAreValidationErrors) {
  std::istringstream length(
      R"({"tokens":["a","b"],"tags":["O"],"intents":[],"speaker":"user","domain":"d"})");
  EXPECT_THROW(read_corpus(length), ValidationError);
  std::istringstream orphan(
      R"({"tokens":["a"],"tags":["I-x"],"intents":[],"speaker":"user","domain":"d"})");
  EXPECT_THROW(read_corpus(orphan), ValidationError);
  std::istringstream empty(
      R"({"tokens":[],"tags":[],"intents":[],"speaker":"user","domain":"d"})");
  EXPECT_THROW(read_corpus(empty), ValidationError);
}

TEST(CorpusIo, MissingFileIsIoError) {
  try {
    load_corpus("/nonexistent/corpus.jsonl");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
  }
}

TEST(Validate, LabelsMustBeDeclared) {
  AnnotatedCorpus c = oracle::corpus({oracle::utt({"a"}, {"B-x"}, {"i"})});
  EXPECT_NO_THROW(validate(c));
  c.slot_inventory.clear();
  EXPECT_THROW(validate(c), ValidationError);
}

TEST(Normalize, AsciiLowercaseOnly) {
  EXPECT_EQ(normalize("HeLLo"), "hello");
  EXPECT_EQ(normalize("\xC3\x89t\xC3\xA9"), "\xC3\x89t\xC3\xA9");
}
