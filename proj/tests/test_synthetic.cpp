#include <gtest/gtest.h>

#include <map>
#include <set>

#include "bicf/synthetic.hpp"

using namespace bicf;

namespace {

struct TagShares {
  double outside = 0, begin = 0, inside = 0;
};

TagShares shares(const AnnotatedCorpus& c) {
  TagShares s;
  double n = 0;
  for (const auto& u : c.utterances) {
    for (const auto& t : u.slot_tags) {
      const auto k = parse_tag(t).kind;
      (k == TagKind::kOutside ? s.outside : k == TagKind::kBegin ? s.begin : s.inside) += 1;
      n += 1;
    }
  }
  s.outside /= n;
  s.begin /= n;
  s.inside /= n;
  return s;
}

}  // namespace

TEST(Synthetic, DeterministicPerSeed) {
  SyntheticSpec spec;
  spec.n_source = 200;
  spec.n_target = 100;
  spec.n_test = 50;
  const auto a = generate_synthetic_bilingual(spec, 4);
  const auto b = generate_synthetic_bilingual(spec, 4);
  const auto c = generate_synthetic_bilingual(spec, 5);
  EXPECT_EQ(a.source, b.source);
  EXPECT_EQ(a.target, b.target);
  EXPECT_EQ(a.parallel, b.parallel);
  EXPECT_NE(a.source, c.source);
}

TEST(Synthetic, SizesInventoriesAndValidity) {
  SyntheticSpec spec;
  spec.n_intents = 5;
  spec.n_slots = 4;
  spec.n_source = 300;
  spec.n_target = 120;
  spec.n_test = 60;
  spec.n_parallel = 40;
  const auto b = generate_synthetic_bilingual(spec, 1);
  EXPECT_EQ(b.source.size(), 300u);
  EXPECT_EQ(b.target.size(), 120u);
  EXPECT_EQ(b.target_test.size(), 60u);
  EXPECT_EQ(b.parallel.size(), 40u);
  EXPECT_EQ(b.source.intent_inventory.size(), 5u);
  EXPECT_EQ(b.source.slot_inventory.size(), 4u);
  EXPECT_EQ(b.target.intent_inventory, b.source.intent_inventory);
  EXPECT_EQ(b.target.slot_inventory, b.source.slot_inventory);
  for (const auto* c : {&b.source, &b.target, &b.target_test}) {
    EXPECT_NO_THROW(validate(*c));
  }
  EXPECT_EQ(b.source.language_tag, "en");
  EXPECT_EQ(b.target.language_tag, "id");
}

TEST(Synthetic, DictionaryIsABijectionAndRelexifiesTarget) {
  SyntheticSpec spec;
  spec.n_source = 200;
  const auto b = generate_synthetic_bilingual(spec, 2);
  EXPECT_EQ(b.dictionary.size(), spec.vocab_size);
  std::set<std::string> images;
  for (const auto& [s, t] : b.dictionary) images.insert(t);
  EXPECT_EQ(images.size(), b.dictionary.size());
  std::set<std::string> source_words;
  for (const auto& [s, t] : b.dictionary) source_words.insert(s);
  for (const auto& u : b.target.utterances) {
    for (const auto& w : u.normalized_tokens()) EXPECT_TRUE(images.count(w)) << w;
  }
  for (const auto& p : b.parallel) {
    ASSERT_EQ(p.source.size(), p.target.size());
    for (std::size_t i = 0; i < p.source.size(); ++i) {
      EXPECT_EQ(b.dictionary.at(p.source[i]), p.target[i]);
    }
  }
  const auto translated = translate_corpus(b.source, b.dictionary, "id");
  for (std::size_t i = 0; i < b.source.size(); ++i) {
    EXPECT_EQ(translated.utterances[i].slot_tags, b.source.utterances[i].slot_tags);
    EXPECT_EQ(translated.utterances[i].intents, b.source.utterances[i].intents);
  }
}

TEST(Synthetic, TagProportionsAgreeAcrossLanguages) {
  SyntheticSpec spec;
  spec.n_source = 3000;
  spec.n_target = 3000;
  const auto b = generate_synthetic_bilingual(spec, 3);
  const auto s = shares(b.source);
  const auto t = shares(b.target);
  EXPECT_NEAR(s.outside, t.outside, 0.05);
  EXPECT_NEAR(s.begin, t.begin, 0.05);
  EXPECT_NEAR(s.inside, t.inside, 0.05);
  EXPECT_GT(s.begin, 0.0);
  EXPECT_GT(s.inside, 0.0);
}

TEST(Synthetic, MultiwordAndSystemTurnRates) {
  SyntheticSpec spec;
  spec.n_source = 4000;
  spec.n_target = 50;
  spec.multiword_prob = 0.4;
  spec.system_turn_prob = 0.25;
  const auto b = generate_synthetic_bilingual(spec, 6);
  double spans = 0, multi = 0, system = 0;
  for (const auto& u : b.source.utterances) {
    system += u.speaker == Speaker::kSystem;
    for (const auto& sp : spans_from_bio(u.slot_tags)) {
      spans += 1;
      multi += sp.end - sp.start > 1;
    }
  }
  EXPECT_NEAR(multi / spans, 0.4, 0.05);
  EXPECT_NEAR(system / b.source.size(), 0.25, 0.05);
}
