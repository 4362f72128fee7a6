#include "bicf/bicf.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <new>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bicf/align.hpp"
#include "bicf/checkpoint.hpp"
#include "bicf/config.hpp"
#include "bicf/corpus.hpp"
#include "bicf/error.hpp"
#include "bicf/eval.hpp"
#include "bicf/lexstats.hpp"
#include "bicf/mixing.hpp"
#include "bicf/pipeline.hpp"
#include "bicf/synthetic.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

struct bicf_config {
  bicf::RunConfig value;
};
struct bicf_corpus {
  bicf::AnnotatedCorpus value;
};
struct bicf_freq_lexicon {
  bicf::FrequencyLexicon value;
};
struct bicf_conf_lexicon {
  bicf::ConfidenceLexicon value;
};
struct bicf_mixed {
  bicf::MixingResult value;
};
struct bicf_model {
  bicf::Checkpoint value;
};

static_assert(BICF_E_IO == static_cast<int>(bicf::ErrorCode::kIo));
static_assert(BICF_E_INVALID_ARGUMENT == static_cast<int>(bicf::ErrorCode::kInvalidArgument));

namespace {

thread_local std::string g_last_error;

template <typename Fn>
int guard(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return BICF_OK;
  } catch (const bicf::Error& e) {
    g_last_error = e.what();
    return static_cast<int>(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return BICF_E_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return BICF_E_INTERNAL;
  } catch (...) {
    g_last_error = "unknown exception";
    return BICF_E_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) throw bicf::Error(bicf::ErrorCode::kInvalidArgument, std::string(what) + " is null");
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw bicf::Error(bicf::ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  if (!out) throw bicf::Error(bicf::ErrorCode::kIo, "write failed: " + path.string());
}

fs::path ensure_dir(const std::string& dir) {
  const fs::path p = dir.empty() ? fs::path(".") : fs::path(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw bicf::Error(bicf::ErrorCode::kIo, "cannot create " + p.string() + ": " + ec.message());
  return p;
}

std::vector<std::string> split_list(const char* text) {
  std::vector<std::string> items;
  std::string cur;
  for (const char* c = text; *c; ++c) {
    if (*c == ',') {
      if (!cur.empty()) items.push_back(cur);
      cur.clear();
    } else if (*c != ' ') {
      cur += *c;
    }
  }
  if (!cur.empty()) items.push_back(cur);
  return items;
}

std::uint64_t parse_count(const std::string& s, const char* what) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty() || s[0] == '-') {
    throw bicf::Error(bicf::ErrorCode::kInvalidArgument,
                      std::string("bad ") + what + " '" + s + "'");
  }
  return v;
}

std::vector<std::vector<std::string>> read_token_lines(const char* path) {
  std::ifstream in(path);
  if (!in) throw bicf::Error(bicf::ErrorCode::kIo, std::string("cannot open ") + path);
  std::vector<std::vector<std::string>> lines;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream words(line);
    std::vector<std::string> toks;
    for (std::string w; words >> w;) toks.push_back(w);
    lines.push_back(std::move(toks));
  }
  return lines;
}

ordered_json corpus_stats(const bicf::AnnotatedCorpus& c) {
  std::size_t user = 0, system = 0, spans = 0, multi_intent = 0;
  std::map<std::string, std::size_t> intents, slots, domains;
  std::set<std::string> dialogues;
  std::size_t with_dialogue = 0;
  for (const auto& u : c.utterances) {
    (u.speaker == bicf::Speaker::kUser ? user : system) += 1;
    if (u.intents.size() > 1) ++multi_intent;
    for (const auto& i : u.intents) ++intents[i];
    for (const auto& s : bicf::spans_from_bio(u.slot_tags)) {
      ++slots[s.slot_type];
      ++spans;
    }
    ++domains[u.domain];
    if (u.dialogue_id) {
      dialogues.insert(*u.dialogue_id);
      ++with_dialogue;
    }
  }
  ordered_json j;
  j["language"] = c.language_tag;
  j["utterances"] = c.size();
  j["user_turns"] = user;
  j["system_turns"] = system;
  j["tokens"] = c.token_count();
  j["avg_tokens"] = c.empty() ? 0.0 : static_cast<double>(c.token_count()) / c.size();
  j["slot_spans"] = spans;
  j["multi_intent_utterances"] = multi_intent;
  if (dialogues.empty()) {
    j["dialogues"] = nullptr;
    j["avg_turns_per_dialogue"] = nullptr;
  } else {
    j["dialogues"] = dialogues.size();
    j["avg_turns_per_dialogue"] = static_cast<double>(with_dialogue) / dialogues.size();
  }
  j["intent_inventory"] = c.intent_inventory;
  j["slot_inventory"] = c.slot_inventory;
  j["intent_counts"] = intents;
  j["slot_counts"] = slots;
  j["domain_counts"] = domains;
  return j;
}

}  // namespace

extern "C" {

const char* bicf_version(void) { return "1.0.0"; }

const char* bicf_last_error(void) { return g_last_error.c_str(); }

const char* bicf_status_name(int status) {
  if (status == BICF_OK) return "Ok";
  if (status >= BICF_E_IO && status <= BICF_E_INVALID_ARGUMENT) {
    return bicf::error_code_name(static_cast<bicf::ErrorCode>(status));
  }
  return "InternalError";
}

void bicf_string_free(char* s) { std::free(s); }

int bicf_config_new(bicf_config** out) {
  return guard([&] {
    need(out, "out");
    *out = new bicf_config{};
  });
}

int bicf_config_load(const char* path, bicf_config** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new bicf_config{bicf::load_config(path)};
  });
}

int bicf_config_set(bicf_config* cfg, const char* key, const char* value) {
  return guard([&] {
    need(cfg, "config");
    need(key, "key");
    need(value, "value");
    bicf::config_set(cfg->value, key, value);
  });
}

int bicf_config_override(bicf_config* cfg, const char* assignment) {
  return guard([&] {
    need(cfg, "config");
    need(assignment, "assignment");
    bicf::config_apply_override(cfg->value, assignment);
  });
}

int bicf_config_get(const bicf_config* cfg, const char* key, char** value) {
  return guard([&] {
    need(cfg, "config");
    need(key, "key");
    need(value, "value");
    *value = dup(bicf::config_get(cfg->value, key));
  });
}

int bicf_config_hash(const bicf_config* cfg, char** hex) {
  return guard([&] {
    need(cfg, "config");
    need(hex, "hex");
    *hex = dup(bicf::config_hash(cfg->value));
  });
}

int bicf_config_dump(const bicf_config* cfg, char** text) {
  return guard([&] {
    need(cfg, "config");
    need(text, "text");
    *text = dup(bicf::dump_config(cfg->value));
  });
}

void bicf_config_free(bicf_config* cfg) { delete cfg; }

int bicf_corpus_load(const char* path, const char* language, bicf_corpus** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new bicf_corpus{bicf::load_corpus(path, language ? language : "")};
  });
}

int bicf_corpus_save(const bicf_corpus* corpus, const char* path) {
  return guard([&] {
    need(corpus, "corpus");
    need(path, "path");
    bicf::save_corpus(corpus->value, path);
  });
}

size_t bicf_corpus_size(const bicf_corpus* corpus) { return corpus ? corpus->value.size() : 0; }

int bicf_corpus_stats(const bicf_corpus* corpus, char** json) {
  return guard([&] {
    need(corpus, "corpus");
    need(json, "json");
    *json = dup(corpus_stats(corpus->value).dump(2));
  });
}

void bicf_corpus_free(bicf_corpus* corpus) { delete corpus; }

int bicf_synth(const bicf_config* cfg, const char* out_dir, char** summary_json) {
  return guard([&] {
    need(cfg, "config");
    need(out_dir, "out_dir");
    const bicf::RunConfig& c = cfg->value;
    const bicf::SyntheticBundle b = bicf::generate_synthetic_bilingual(c.synth, c.seed);
    const fs::path dir = ensure_dir(out_dir);
    bicf::save_corpus(b.source, dir / "source.jsonl");
    bicf::save_corpus(b.target, dir / "target_train.jsonl");
    bicf::save_corpus(b.target_test, dir / "target_test.jsonl");
    bicf::save_parallel(b.parallel, dir / "parallel.txt");
    const bicf::AnnotatedCorpus gold =
        bicf::translate_corpus(b.source, b.dictionary, c.synth.target_language);
    bicf::save_corpus(gold, dir / "import_gold.jsonl");
    std::string dict;
    for (const auto& [s, t] : b.dictionary) dict += s + "\t" + t + "\n";
    write_text(dir / "dictionary.tsv", dict);

    // Ready-to-run config pointing at the files just written.
    bicf::RunConfig fixture = c;
    const fs::path abs = fs::absolute(dir);
    fixture.data = {};
    fixture.data.source = (abs / "source.jsonl").string();
    fixture.data.target_train = (abs / "target_train.jsonl").string();
    fixture.data.target_test = (abs / "target_test.jsonl").string();
    fixture.data.parallel = (abs / "parallel.txt").string();
    fixture.data.import_corpus = (abs / "import_gold.jsonl").string();
    write_text(dir / "fixture.toml", bicf::dump_config(fixture));

    if (summary_json) {
      ordered_json j;
      j["seed"] = c.seed;
      j["source"] = b.source.size();
      j["target_train"] = b.target.size();
      j["target_test"] = b.target_test.size();
      j["parallel"] = b.parallel.size();
      j["dictionary"] = b.dictionary.size();
      j["intents"] = b.grammar.intent_names;
      j["slot_types"] = b.grammar.slot_names;
      j["templates"] = b.grammar.templates.size();
      *summary_json = dup(j.dump(2));
    }
  });
}

int bicf_freq_build(const bicf_corpus* corpus, const bicf_config* cfg, bicf_freq_lexicon** out) {
  return guard([&] {
    need(corpus, "corpus");
    need(out, "out");
    const auto agg = cfg ? cfg->value.tfidf : bicf::TfidfAggregation::kMax;
    *out = new bicf_freq_lexicon{bicf::build_frequency_lexicon(corpus->value, agg)};
  });
}

int bicf_freq_load(const char* path, bicf_freq_lexicon** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new bicf_freq_lexicon{bicf::load_frequency_lexicon(path)};
  });
}

int bicf_freq_save(const bicf_freq_lexicon* lex, const char* path) {
  return guard([&] {
    need(lex, "lexicon");
    need(path, "path");
    bicf::save_frequency_lexicon(lex->value, path);
  });
}

size_t bicf_freq_size(const bicf_freq_lexicon* lex) { return lex ? lex->value.size() : 0; }

void bicf_freq_free(bicf_freq_lexicon* lex) { delete lex; }

int bicf_conf_train(const char* parallel_path, const bicf_config* cfg, bicf_conf_lexicon** out,
                    char** log_likelihood_json) {
  return guard([&] {
    need(parallel_path, "parallel_path");
    need(out, "out");
    bicf::Model1Options opt;
    if (cfg) {
      opt.iterations = cfg->value.align_iterations;
      opt.random_init = cfg->value.align_random_init;
      opt.seed = cfg->value.seed;
    }
    const auto pairs = bicf::load_parallel(parallel_path);
    const bicf::Model1Fit fit = bicf::train_model1(pairs, opt);
    auto lex = std::make_unique<bicf_conf_lexicon>(
        bicf_conf_lexicon{bicf::build_confidence_lexicon(fit.table)});
    if (log_likelihood_json) {
      ordered_json j;
      j["pairs"] = pairs.size();
      j["iterations"] = opt.iterations;
      j["log_likelihood"] = fit.log_likelihood;
      j["entries"] = lex->value.size();
      *log_likelihood_json = dup(j.dump(2));
    }
    *out = lex.release();
  });
}

int bicf_conf_import_pharaoh(const char* parallel_path, const char* alignment_path,
                             bicf_conf_lexicon** out) {
  return guard([&] {
    need(parallel_path, "parallel_path");
    need(alignment_path, "alignment_path");
    need(out, "out");
    const auto pairs = bicf::load_parallel(parallel_path);
    *out = new bicf_conf_lexicon{bicf::import_pharaoh(fs::path(alignment_path), pairs)};
  });
}

int bicf_conf_load(const char* path, bicf_conf_lexicon** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new bicf_conf_lexicon{bicf::load_confidence_lexicon(path)};
  });
}

int bicf_conf_save(const bicf_conf_lexicon* lex, const char* path) {
  return guard([&] {
    need(lex, "lexicon");
    need(path, "path");
    bicf::save_confidence_lexicon(lex->value, path);
  });
}

size_t bicf_conf_size(const bicf_conf_lexicon* lex) { return lex ? lex->value.size() : 0; }

void bicf_conf_free(bicf_conf_lexicon* lex) { delete lex; }

int bicf_mix(const bicf_corpus* source, const bicf_freq_lexicon* freq,
             const bicf_conf_lexicon* conf, const bicf_config* cfg, bicf_mixed** out) {
  return guard([&] {
    need(source, "source");
    need(freq, "frequency lexicon");
    need(conf, "confidence lexicon");
    need(out, "out");
    const bicf::ThreshParams params = cfg ? cfg->value.thresh : bicf::ThreshParams{};
    *out = new bicf_mixed{bicf::bicf_mix(source->value, freq->value, conf->value, params)};
  });
}

size_t bicf_mixed_table_size(const bicf_mixed* mixed) {
  return mixed ? mixed->value.table.size() : 0;
}

size_t bicf_mixed_substitution_count(const bicf_mixed* mixed) {
  return mixed ? mixed->value.mixed.substitution_count() : 0;
}

int bicf_mixed_verify(const bicf_mixed* mixed, const bicf_corpus* source, char** violation) {
  return guard([&] {
    need(mixed, "mixed");
    need(source, "source");
    need(violation, "violation");
    const std::string v = bicf::check_label_preservation(source->value, mixed->value.mixed);
    *violation = v.empty() ? nullptr : dup(v);
  });
}

int bicf_mixed_save(const bicf_mixed* mixed, const char* corpus_path, const char* log_path,
                    const char* table_path) {
  return guard([&] {
    need(mixed, "mixed");
    need(corpus_path, "corpus_path");
    need(log_path, "log_path");
    bicf::save_mixed_corpus(mixed->value.mixed, corpus_path, log_path);
    if (table_path) bicf::save_substitution_table(mixed->value.table, table_path);
  });
}

void bicf_mixed_free(bicf_mixed* mixed) { delete mixed; }

int bicf_train(const bicf_config* cfg, char** report_json) {
  return guard([&] {
    need(cfg, "config");
    const bicf::RunConfig& c = cfg->value;
    const bicf::PipelineData data = bicf::load_pipeline_data(c);
    const bicf::RunResult r = bicf::run_pipeline(c, data);
    const fs::path dir = ensure_dir(c.out_dir);
    bicf::save_checkpoint(dir / "model.ckpt", r.model, r.report.metadata);
    const std::string report = bicf::report_to_json(r.report) + "\n";
    write_text(dir / "report.json", report);
    write_text(dir / "config.toml", bicf::dump_config(c));
    if (r.mixing) {
      bicf::save_mixed_corpus(r.mixing->mixed, dir / "mixed.jsonl", dir / "mixed.log.jsonl");
      bicf::save_substitution_table(r.mixing->table, dir / "substitutions.tsv");
    }
    if (report_json) *report_json = dup(report);
  });
}

int bicf_sweep(const bicf_config* cfg, const char* sizes, const char* modes, const char* seeds,
               unsigned jobs, char** csv) {
  return guard([&] {
    need(cfg, "config");
    need(sizes, "sizes");
    const bicf::RunConfig& c = cfg->value;
    std::vector<std::size_t> size_list;
    for (const auto& s : split_list(sizes)) size_list.push_back(parse_count(s, "feed size"));
    if (size_list.empty()) {
      throw bicf::Error(bicf::ErrorCode::kInvalidArgument, "no feed sizes given");
    }
    std::vector<bicf::RunMode> mode_list;
    if (modes) {
      for (const auto& m : split_list(modes)) mode_list.push_back(bicf::parse_run_mode(m));
    }
    if (mode_list.empty()) mode_list.push_back(c.mode);
    std::vector<std::uint64_t> seed_list;
    if (seeds) {
      for (const auto& s : split_list(seeds)) seed_list.push_back(parse_count(s, "seed"));
    }
    if (seed_list.empty()) seed_list.push_back(c.seed);

    // Load every input any requested mode needs.
    bicf::PipelineData data;
    bool first = true;
    for (bicf::RunMode m : mode_list) {
      bicf::RunConfig probe = c;
      probe.mode = m;
      probe.target_feed.reset();
      bicf::PipelineData d = bicf::load_pipeline_data(probe);
      if (first) {
        data = std::move(d);
        first = false;
        continue;
      }
      if (data.source.empty() && !d.source.empty()) data.source = std::move(d.source);
      if (data.parallel.empty() && !d.parallel.empty()) data.parallel = std::move(d.parallel);
      if (!data.frequency && d.frequency) data.frequency = std::move(d.frequency);
      if (!data.confidence && d.confidence) data.confidence = std::move(d.confidence);
      if (!data.imported && d.imported) data.imported = std::move(d.imported);
    }

    const auto results = bicf::run_sweep_grid(c, data, size_list, mode_list, seed_list,
                                              jobs == 0 ? 1 : jobs);
    const fs::path dir = ensure_dir(c.out_dir);
    const std::string table = bicf::sweep_csv(results);
    write_text(dir / "sweep.csv", table);
    write_text(dir / "sweep.json", bicf::sweep_json(results));
    write_text(dir / "sweep.svg", bicf::sweep_svg(results));
    if (csv) *csv = dup(table);
  });
}

int bicf_model_load(const char* path, bicf_model** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new bicf_model{bicf::load_checkpoint(path)};
  });
}

int bicf_model_eval(const bicf_model* model, const bicf_corpus* gold, char** report_json) {
  return guard([&] {
    need(model, "model");
    need(gold, "gold");
    need(report_json, "report_json");
    bicf::EvalReport r = bicf::evaluate(model->value.model, gold->value);
    for (const auto& [k, v] : model->value.metadata) r.metadata.insert_or_assign(k, v);
    *report_json = dup(bicf::report_to_json(r) + "\n");
  });
}

int bicf_model_predict(const bicf_model* model, const char* tokens, char** json) {
  return guard([&] {
    need(model, "model");
    need(tokens, "tokens");
    need(json, "json");
    std::istringstream in(tokens);
    std::vector<std::string> words;
    for (std::string w; in >> w;) words.push_back(bicf::normalize(w));
    const bicf::Prediction p = bicf::predict(model->value.model, words);
    ordered_json j;
    j["tokens"] = words;
    j["intents"] = p.intent_set;
    ordered_json scores = ordered_json::object();
    const auto& names = model->value.model.intents();
    for (std::size_t k = 0; k < names.size() && k < p.intent_scores.size(); ++k) {
      scores[names[k]] = p.intent_scores[k];
    }
    j["intent_scores"] = scores;
    j["tags"] = p.slot_tags;
    *json = dup(j.dump());
  });
}

void bicf_model_free(bicf_model* model) { delete model; }

int bicf_bleu_files(const char* hypothesis_path, const char* reference_path, unsigned max_n,
                    double* out) {
  return guard([&] {
    need(hypothesis_path, "hypothesis_path");
    need(reference_path, "reference_path");
    need(out, "out");
    *out = bicf::bleu(read_token_lines(hypothesis_path), read_token_lines(reference_path), max_n);
  });
}

int bicf_fleiss_kappa(const size_t* counts, size_t items, size_t categories, double* kappa,
                      int* degenerate) {
  return guard([&] {
    need(kappa, "kappa");
    if (items > 0) need(counts, "counts");
    bicf::AgreementTable t;
    for (std::size_t i = 0; i < items; ++i) {
      t.counts.emplace_back(counts + i * categories, counts + (i + 1) * categories);
    }
    const bicf::KappaResult r = bicf::fleiss_kappa(t);
    *kappa = r.kappa;
    if (degenerate) *degenerate = r.degenerate ? 1 : 0;
  });
}

}  // extern "C"
