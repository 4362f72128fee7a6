#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bicf/align.hpp"
#include "bicf/corpus.hpp"

namespace bicf {

// Desk-scale stand-in for a pair of real dialogue corpora: both languages
// share one template grammar and label inventory, and the target language is
// a word-for-word relexification of the source through a fixed bijection.
struct SyntheticSpec {
  std::size_t vocab_size = 50;  // distinct words per language
  std::size_t n_intents = 4;
  std::size_t n_slots = 3;
  std::size_t n_domains = 2;
  std::size_t n_source = 2000;
  std::size_t n_target = 500;
  std::size_t n_test = 200;
  std::size_t n_parallel = 100;
  std::size_t templates_per_domain = 6;
  std::size_t max_slots_per_template = 2;
  std::size_t max_fillers_per_template = 2;
  double multiword_prob = 0.3;     // value spans of two words
  double multi_intent_prob = 0.2;  // templates carrying two intents
  double system_turn_prob = 0.0;
  std::string source_language = "en";
  std::string target_language = "id";
};

enum class ElementKind { kFiller, kTrigger, kCue, kValue };

struct TemplateElement {
  ElementKind kind;
  std::size_t label = 0;  // intent index for triggers, slot index for cues/values
};

struct Template {
  std::size_t domain = 0;
  std::vector<std::size_t> intents;
  std::vector<TemplateElement> elements;
};

// Word ids index both surface tables; source_words[k] translates to
// target_words[k].
struct Grammar {
  std::vector<std::string> source_words;
  std::vector<std::string> target_words;
  std::vector<std::string> domain_names;
  std::vector<std::string> intent_names;
  std::vector<std::string> slot_names;
  std::vector<std::size_t> filler_words;
  std::vector<std::vector<std::size_t>> trigger_words;  // per intent
  std::vector<std::size_t> cue_words;                   // per slot
  std::vector<std::vector<std::size_t>> value_words;    // per slot, Zipf ranked
  std::vector<Template> templates;                      // sampled uniformly
  double multiword_prob = 0.0;
  double system_turn_prob = 0.0;
};

struct SyntheticBundle {
  AnnotatedCorpus source;
  AnnotatedCorpus target;       // target-language training pool
  AnnotatedCorpus target_test;  // held-out target-language test set
  std::vector<SentencePair> parallel;
  std::map<std::string, std::string> dictionary;  // source -> target
  Grammar grammar;
};

Grammar make_grammar(const SyntheticSpec& spec, std::uint64_t seed);
SyntheticBundle generate_synthetic_bilingual(const SyntheticSpec& spec,
                                             std::uint64_t seed);

// Word-for-word translation with labels carried over unchanged; words
// missing from the dictionary are copied.
AnnotatedCorpus translate_corpus(const AnnotatedCorpus& corpus,
                                 const std::map<std::string, std::string>& dictionary,
                                 const std::string& language_tag);

}  // namespace bicf
