#include <gtest/gtest.h>

#include <sstream>

#include "bicf/config.hpp"
#include "bicf/error.hpp"

using namespace bicf;

namespace {

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in, "test.toml");
}

std::size_t config_error_line(const std::string& text) {
  try {
    parse(text);
  } catch (const ParseError& e) {
    return e.line();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfig) << e.what();
    const std::string msg = e.what();
    const auto pos = msg.find("test.toml:");
    if (pos == std::string::npos) return 0;
    return std::stoul(msg.substr(pos + 10));
  }
  return 0;
}

}  // namespace

TEST(Config, DefaultsAndSections) {
  const RunConfig c = parse(
      "# run\n"
      "mode = \"mlen\"\n"
      "seed = 7\n"
      "target_feed = 200\n"
      "[train]\n"
      "eta_top = 0.005   # inline comment\n"
      "batch_size = 32\n"
      "[model]\n"
      "hard_bio_mask = true\n"
      "intent_mode = \"singlelabel\"\n");
  EXPECT_EQ(c.mode, RunMode::kMlen);
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(*c.target_feed, 200u);
  EXPECT_DOUBLE_EQ(c.training.eta_top, 0.005);
  EXPECT_EQ(c.training.batch_size, 32u);
  EXPECT_TRUE(c.model.hard_bio_mask);
  EXPECT_EQ(c.model.intent_mode, IntentMode::kSingleLabel);
  EXPECT_DOUBLE_EQ(c.training.xi, 1.0);
  EXPECT_EQ(c.tfidf, TfidfAggregation::kMax);
}

TEST(Config, DottedKeysInsideSectionAreRelative) {
  // [model] followed by "mix.theta" resolves to model.mix.theta, which is unknown.
  EXPECT_EQ(config_error_line("[model]\nd_emb = 8\nmix.theta = 0.2\n"), 3u);
}

TEST(Config, ErrorsNameTheLine) {
  EXPECT_EQ(config_error_line("seed = 1\nbogus = 2\n"), 2u);
  EXPECT_EQ(config_error_line("seed = 1\n\nseed = x\n"), 3u);
  EXPECT_EQ(config_error_line("mode = \"nope\"\n"), 1u);
  EXPECT_EQ(config_error_line("[train\n"), 1u);
  EXPECT_EQ(config_error_line("data.source = \"unterminated\n"), 1u);
  EXPECT_EQ(config_error_line("justakey\n"), 1u);
}

TEST(Config, QuotedStringsWithEscapes) {
  const RunConfig c = parse("out_dir = \"a \\\"b\\\" #c\"\n");
  EXPECT_EQ(c.out_dir, "a \"b\" #c");
}

TEST(Config, DumpParsesBackToSameHash) {
  RunConfig c;
  config_set(c, "mode", "target_only");
  config_set(c, "data.source", "");
  config_set(c, "data.target_test", "x y.jsonl");
  config_set(c, "mix.fusion_mode", "union");
  config_set(c, "train.xi", "0.3");
  config_set(c, "synth.multiword_prob", "0.1");
  const RunConfig back = parse(dump_config(c));
  EXPECT_EQ(dump_config(back), dump_config(c));
  EXPECT_EQ(config_hash(back), config_hash(c));
}

TEST(Config, HashIgnoresOutputDirectoryOnly) {
  RunConfig a, b;
  b.out_dir = "/somewhere/else";
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.seed = 2;
  EXPECT_NE(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
}

TEST(Config, KeysGetSetRoundTrip) {
  RunConfig c;
  for (const auto& key : config_keys()) {
    const std::string v = config_get(c, key);
    EXPECT_NO_THROW(config_set(c, key, v)) << key;
    EXPECT_EQ(config_get(c, key), v) << key;
  }
  EXPECT_EQ(config_get(c, "target_feed"), "all");
  config_set(c, "target_feed", "0");
  EXPECT_EQ(*c.target_feed, 0u);
}

TEST(Config, OverridesAndValidation) {
  RunConfig c;
  config_apply_override(c, "model.hidden=12");
  EXPECT_EQ(c.model.hidden, 12u);
  config_apply_override(c, "data.source = a=b.jsonl");
  EXPECT_EQ(c.data.source, "a=b.jsonl");
  EXPECT_THROW(config_apply_override(c, "novalue"), Error);
  EXPECT_THROW(config_set(c, "model.hidden", "-3"), Error);
  EXPECT_THROW(config_set(c, "model.hidden", "1.5"), Error);
  EXPECT_THROW(config_set(c, "model.hard_bio_mask", "maybe"), Error);
  EXPECT_THROW(config_set(c, "mix.tfidf", "median"), Error);
}

TEST(Config, RunModeNames) {
  for (RunMode m : {RunMode::kBicf, RunMode::kMlen, RunMode::kMtImport, RunMode::kTargetOnly}) {
    EXPECT_EQ(parse_run_mode(run_mode_name(m)), m);
  }
  EXPECT_THROW(parse_run_mode("bilingual"), Error);
}
