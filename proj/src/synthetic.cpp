#include "bicf/synthetic.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "bicf/error.hpp"
#include "bicf/rng.hpp"

namespace bicf {

namespace {

constexpr const char* kDomainNames[] = {"restaurant", "hotel",  "taxi",   "attraction",
                                        "train",      "movie",  "plane",  "wear",
                                        "police",     "hospital"};
constexpr const char* kIntentNames[] = {"inform",  "request", "book",   "greet",
                                        "thank",   "bye",     "confirm", "deny",
                                        "select",  "recommend"};
constexpr const char* kSlotNames[] = {"food",      "area",      "price",   "name",
                                      "people",    "day",       "time",    "stars",
                                      "type",      "destination", "departure",
                                      "leave_at",  "arrive_by", "parking", "internet"};

template <std::size_t N>
std::string pick_name(const char* const (&names)[N], std::size_t i,
                      const char* fallback) {
  if (i < N) return names[i];
  return std::string(fallback) + std::to_string(i);
}

// Source words end in a vowel and target words in a consonant, so the two
// surface vocabularies can never collide.
std::string make_word(Rng& rng, bool target) {
  static constexpr const char kSrcCons[] = "bdfgklmnprstvz";
  static constexpr const char kTgtCons[] = "bcdghjklmnprstwy";
  static constexpr const char kVowels[] = "aeiou";
  static constexpr const char kTgtFinal[] = "nkrhs";
  std::string w;
  const std::size_t syllables = 2 + rng.below(2);
  for (std::size_t s = 0; s < syllables; ++s) {
    if (target) {
      w += kTgtCons[rng.below(sizeof(kTgtCons) - 1)];
    } else {
      w += kSrcCons[rng.below(sizeof(kSrcCons) - 1)];
    }
    w += kVowels[rng.below(sizeof(kVowels) - 1)];
  }
  if (target) w += kTgtFinal[rng.below(sizeof(kTgtFinal) - 1)];
  return w;
}

std::vector<std::string> make_lexicon(Rng& rng, std::size_t n, bool target) {
  std::set<std::string> seen;
  std::vector<std::string> out;
  while (out.size() < n) {
    std::string w = make_word(rng, target);
    if (seen.insert(w).second) out.push_back(std::move(w));
  }
  return out;
}

void check_spec(const SyntheticSpec& spec) {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::kSpec, m); };
  if (spec.n_intents == 0) fail("n_intents must be positive");
  if (spec.n_slots == 0) fail("n_slots must be positive");
  if (spec.n_domains == 0) fail("n_domains must be positive");
  if (spec.templates_per_domain == 0) fail("templates_per_domain must be positive");
  if (spec.n_slots > spec.vocab_size) {
    fail("more slot types than vocabulary words");
  }
  // one trigger per intent, cue + value per slot, two fillers
  const std::size_t needed = spec.n_intents + 2 * spec.n_slots + 2;
  if (spec.vocab_size < needed) {
    fail("vocab_size " + std::to_string(spec.vocab_size) + " below the minimum " +
         std::to_string(needed) + " for the declared inventories");
  }
  auto unit = [&](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) fail(std::string(name) + " must lie in [0,1]");
  };
  unit(spec.multiword_prob, "multiword_prob");
  unit(spec.multi_intent_prob, "multi_intent_prob");
  unit(spec.system_turn_prob, "system_turn_prob");
  if (spec.source_language == spec.target_language) {
    fail("source and target language tags must differ");
  }
}

// Picks a Zipf-distributed rank in [0, n).
std::size_t zipf_rank(Rng& rng, std::size_t n) {
  double total = 0.0;
  for (std::size_t r = 0; r < n; ++r) total += 1.0 / static_cast<double>(r + 1);
  double x = rng.uniform() * total;
  for (std::size_t r = 0; r < n; ++r) {
    x -= 1.0 / static_cast<double>(r + 1);
    if (x < 0.0) return r;
  }
  return n - 1;
}

struct SampledUtterance {
  std::vector<std::size_t> words;
  std::vector<std::string> tags;
  std::set<std::string> intents;
  std::size_t domain = 0;
  Speaker speaker = Speaker::kUser;
};

SampledUtterance sample_utterance(const Grammar& g, Rng& rng) {
  const Template& t = g.templates[rng.below(g.templates.size())];
  SampledUtterance out;
  out.domain = t.domain;
  out.speaker = rng.bernoulli(g.system_turn_prob) ? Speaker::kSystem : Speaker::kUser;
  if (out.speaker == Speaker::kUser) {
    for (auto i : t.intents) out.intents.insert(g.intent_names[i]);
  }
  for (const auto& e : t.elements) {
    switch (e.kind) {
      case ElementKind::kFiller:
        out.words.push_back(g.filler_words[rng.below(g.filler_words.size())]);
        out.tags.emplace_back("O");
        break;
      case ElementKind::kTrigger: {
        // System turns keep the template shape but carry no intent cue.
        const auto& pool = out.speaker == Speaker::kUser ? g.trigger_words[e.label]
                                                         : g.filler_words;
        out.words.push_back(pool[rng.below(pool.size())]);
        out.tags.emplace_back("O");
        break;
      }
      case ElementKind::kCue:
        out.words.push_back(g.cue_words[e.label]);
        out.tags.emplace_back("O");
        break;
      case ElementKind::kValue: {
        const auto& values = g.value_words[e.label];
        const std::string& slot = g.slot_names[e.label];
        out.words.push_back(values[zipf_rank(rng, values.size())]);
        out.tags.push_back("B-" + slot);
        if (rng.bernoulli(g.multiword_prob)) {
          out.words.push_back(values[zipf_rank(rng, values.size())]);
          out.tags.push_back("I-" + slot);
        }
        break;
      }
    }
  }
  return out;
}

Utterance realise(const SampledUtterance& s, const Grammar& g, bool target) {
  Utterance u;
  const auto& surfaces = target ? g.target_words : g.source_words;
  for (auto w : s.words) u.tokens.emplace_back(surfaces[w]);
  u.slot_tags = s.tags;
  u.intents = s.intents;
  u.speaker = s.speaker;
  u.domain = g.domain_names[s.domain];
  return u;
}

AnnotatedCorpus empty_corpus(const Grammar& g, const std::string& language) {
  AnnotatedCorpus c;
  c.language_tag = language;
  c.intent_inventory.insert(g.intent_names.begin(), g.intent_names.end());
  c.slot_inventory.insert(g.slot_names.begin(), g.slot_names.end());
  return c;
}

AnnotatedCorpus sample_corpus(const Grammar& g, std::size_t n, std::uint64_t seed,
                              bool target, const std::string& language) {
  Rng rng(seed);
  AnnotatedCorpus c = empty_corpus(g, language);
  c.utterances.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    c.utterances.push_back(realise(sample_utterance(g, rng), g, target));
  }
  return c;
}

}  // namespace

Grammar make_grammar(const SyntheticSpec& spec, std::uint64_t seed) {
  check_spec(spec);
  Rng rng(derive_seed(seed, 1));
  Grammar g;
  g.multiword_prob = spec.multiword_prob;
  g.system_turn_prob = spec.system_turn_prob;
  g.source_words = make_lexicon(rng, spec.vocab_size, false);
  g.target_words = make_lexicon(rng, spec.vocab_size, true);
  for (std::size_t d = 0; d < spec.n_domains; ++d) {
    g.domain_names.push_back(pick_name(kDomainNames, d, "domain"));
  }
  for (std::size_t i = 0; i < spec.n_intents; ++i) {
    g.intent_names.push_back(pick_name(kIntentNames, i, "intent"));
  }
  for (std::size_t s = 0; s < spec.n_slots; ++s) {
    g.slot_names.push_back(pick_name(kSlotNames, s, "slot"));
  }

  // Partition word ids: fillers, triggers, cues, then values.
  std::vector<std::size_t> ids(spec.vocab_size);
  std::iota(ids.begin(), ids.end(), 0);
  rng.shuffle(std::span<std::size_t>(ids));
  std::size_t next = 0;
  const std::size_t n_fillers = std::max<std::size_t>(2, spec.vocab_size / 10);
  const std::size_t per_intent =
      spec.vocab_size >= 4 * (2 * spec.n_intents + spec.n_slots) ? 2 : 1;
  for (std::size_t k = 0; k < n_fillers; ++k) g.filler_words.push_back(ids[next++]);
  g.trigger_words.resize(spec.n_intents);
  for (auto& pool : g.trigger_words) {
    for (std::size_t k = 0; k < per_intent; ++k) pool.push_back(ids[next++]);
  }
  for (std::size_t s = 0; s < spec.n_slots; ++s) g.cue_words.push_back(ids[next++]);
  g.value_words.resize(spec.n_slots);
  for (std::size_t k = 0; next < ids.size(); ++k) {
    g.value_words[k % spec.n_slots].push_back(ids[next++]);
  }

  for (std::size_t d = 0; d < spec.n_domains; ++d) {
    std::vector<std::size_t> intents, slots;
    for (std::size_t i = d; i < spec.n_intents; i += spec.n_domains) intents.push_back(i);
    for (std::size_t s = d; s < spec.n_slots; s += spec.n_domains) slots.push_back(s);
    if (intents.empty()) intents.push_back(d % spec.n_intents);
    if (slots.empty()) slots.push_back(d % spec.n_slots);

    for (std::size_t k = 0; k < spec.templates_per_domain; ++k) {
      Template t;
      t.domain = d;
      t.intents.push_back(intents[rng.below(intents.size())]);
      if (intents.size() > 1 && rng.bernoulli(spec.multi_intent_prob)) {
        std::size_t second = intents[rng.below(intents.size())];
        while (second == t.intents[0]) second = intents[rng.below(intents.size())];
        t.intents.push_back(second);
      }
      std::vector<std::size_t> chosen = slots;
      rng.shuffle(std::span<std::size_t>(chosen));
      const std::size_t max_slots = std::min(spec.max_slots_per_template, chosen.size());
      chosen.resize(rng.below(max_slots + 1));

      std::vector<std::vector<TemplateElement>> chunks;
      for (auto i : t.intents) chunks.push_back({{ElementKind::kTrigger, i}});
      for (auto s : chosen) {
        if (rng.bernoulli(0.5)) {
          chunks.push_back({{ElementKind::kCue, s}, {ElementKind::kValue, s}});
        } else {
          chunks.push_back({{ElementKind::kValue, s}, {ElementKind::kCue, s}});
        }
      }
      rng.shuffle(std::span<std::vector<TemplateElement>>(chunks));
      const std::size_t n_fill = rng.below(spec.max_fillers_per_template + 1);
      for (std::size_t f = 0; f < n_fill; ++f) {
        chunks.insert(chunks.begin() + static_cast<std::ptrdiff_t>(rng.below(chunks.size() + 1)),
                      {{ElementKind::kFiller, 0}});
      }
      for (auto& c : chunks) t.elements.insert(t.elements.end(), c.begin(), c.end());
      g.templates.push_back(std::move(t));
    }
  }
  return g;
}

SyntheticBundle generate_synthetic_bilingual(const SyntheticSpec& spec,
                                             std::uint64_t seed) {
  SyntheticBundle b;
  b.grammar = make_grammar(spec, seed);
  const Grammar& g = b.grammar;
  for (std::size_t w = 0; w < g.source_words.size(); ++w) {
    b.dictionary.emplace(g.source_words[w], g.target_words[w]);
  }
  b.source = sample_corpus(g, spec.n_source, derive_seed(seed, 2), false,
                           spec.source_language);
  b.target = sample_corpus(g, spec.n_target, derive_seed(seed, 3), true,
                           spec.target_language);
  b.target_test = sample_corpus(g, spec.n_test, derive_seed(seed, 4), true,
                                spec.target_language);
  Rng rng(derive_seed(seed, 5));
  for (std::size_t i = 0; i < spec.n_parallel; ++i) {
    SampledUtterance s = sample_utterance(g, rng);
    SentencePair p;
    for (auto w : s.words) {
      p.source.push_back(g.source_words[w]);
      p.target.push_back(g.target_words[w]);
    }
    b.parallel.push_back(std::move(p));
  }
  return b;
}

AnnotatedCorpus translate_corpus(const AnnotatedCorpus& corpus,
                                 const std::map<std::string, std::string>& dictionary,
                                 const std::string& language_tag) {
  AnnotatedCorpus out = corpus;
  out.language_tag = language_tag;
  for (auto& u : out.utterances) {
    for (auto& t : u.tokens) {
      auto it = dictionary.find(t.normalized);
      if (it != dictionary.end()) t = Token(it->second);
    }
  }
  return out;
}

}  // namespace bicf
