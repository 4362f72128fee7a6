// Command-line front end over the C API.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bicf/bicf.h"

namespace {

// Carries a failed status out of a command.
struct Failure {
  int status;
  std::string message;
};

void check(int status) {
  if (status != BICF_OK) throw Failure{status, bicf_last_error()};
}

std::string take(char* s) {
  std::string out = s ? s : "";
  bicf_string_free(s);
  return out;
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using ConfigPtr = std::unique_ptr<bicf_config, Deleter<bicf_config, bicf_config_free>>;
using CorpusPtr = std::unique_ptr<bicf_corpus, Deleter<bicf_corpus, bicf_corpus_free>>;
using FreqPtr = std::unique_ptr<bicf_freq_lexicon, Deleter<bicf_freq_lexicon, bicf_freq_free>>;
using ConfPtr = std::unique_ptr<bicf_conf_lexicon, Deleter<bicf_conf_lexicon, bicf_conf_free>>;
using MixedPtr = std::unique_ptr<bicf_mixed, Deleter<bicf_mixed, bicf_mixed_free>>;
using ModelPtr = std::unique_ptr<bicf_model, Deleter<bicf_model, bicf_model_free>>;

struct Globals {
  std::string config_path;
  std::optional<unsigned long long> seed;
  std::optional<std::string> out_dir;
  unsigned jobs = 1;
  std::vector<std::string> overrides;
};

// Command-specific settings applied between the config file and --set.
using Settings = std::vector<std::pair<std::string, std::string>>;

ConfigPtr make_config(const Globals& g, const Settings& settings) {
  bicf_config* raw = nullptr;
  check(g.config_path.empty() ? bicf_config_new(&raw)
                              : bicf_config_load(g.config_path.c_str(), &raw));
  ConfigPtr cfg(raw);
  if (g.seed) check(bicf_config_set(cfg.get(), "seed", std::to_string(*g.seed).c_str()));
  if (g.out_dir) check(bicf_config_set(cfg.get(), "out_dir", g.out_dir->c_str()));
  for (const auto& [k, v] : settings) check(bicf_config_set(cfg.get(), k.c_str(), v.c_str()));
  for (const auto& o : g.overrides) check(bicf_config_override(cfg.get(), o.c_str()));
  return cfg;
}

std::string get(const bicf_config* cfg, const char* key) {
  char* v = nullptr;
  check(bicf_config_get(cfg, key, &v));
  return take(v);
}

void header(const char* command, const bicf_config* cfg) {
  char* hash = nullptr;
  check(bicf_config_hash(cfg, &hash));
  std::cerr << "# bicf " << command << " seed=" << get(cfg, "seed")
            << " config_hash=" << take(hash) << "\n";
}

void warn(const std::string& message) { std::cerr << "warning: " << message << "\n"; }

std::filesystem::path out_path(const bicf_config* cfg, const std::string& explicit_path,
                               const char* default_name) {
  if (!explicit_path.empty()) return explicit_path;
  const std::filesystem::path dir = get(cfg, "out_dir");
  std::filesystem::create_directories(dir);
  return dir / default_name;
}

CorpusPtr load_corpus(const std::string& path, const char* language) {
  bicf_corpus* raw = nullptr;
  check(bicf_corpus_load(path.c_str(), language, &raw));
  return CorpusPtr(raw);
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Failure{BICF_E_IO, "cannot write " + path.string()};
}

std::string one_line(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BiCF cross-lingual transfer toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(bicf_version()));

  Globals g;
  app.add_option("--config", g.config_path, "TOML run configuration")->check(CLI::ExistingFile);
  app.add_option_function<unsigned long long>(
      "--seed", [&](unsigned long long s) { g.seed = s; }, "Master seed");
  app.add_option("--jobs", g.jobs, "Worker threads for sweeps")->check(CLI::PositiveNumber);
  app.add_option_function<std::string>(
      "--out-dir", [&](const std::string& d) { g.out_dir = d; }, "Output directory");
  app.add_option("--set", g.overrides, "Config override key=value (repeatable)");

  Settings settings;
  auto setting = [&](CLI::App* cmd, const std::string& flag, const std::string& key,
                     const std::string& help) {
    cmd->add_option_function<std::string>(
        flag, [&settings, key](const std::string& v) { settings.emplace_back(key, v); }, help);
  };

  // stats
  auto* stats = app.add_subcommand("stats", "Corpus statistics and the frequency lexicon");
  std::string stats_corpus, stats_output;
  stats->add_option("corpus", stats_corpus, "Annotated JSONL corpus")->required();
  stats->add_option("--output", stats_output, "Frequency lexicon TSV (default out_dir/frequency.tsv)");
  setting(stats, "--aggregation", "mix.tfidf", "tf-idf aggregation: max or mean");

  // align
  auto* align = app.add_subcommand("align", "Confidence lexicon from a parallel corpus");
  std::string align_parallel, align_pharaoh, align_output;
  align->add_option("parallel", align_parallel, "Parallel file, 'src ||| tgt' per line")->required();
  align->add_option("--import-pharaoh", align_pharaoh, "Use Pharaoh i-j alignments instead of EM")
      ->check(CLI::ExistingFile);
  align->add_option("--output", align_output, "Confidence TSV (default out_dir/confidence.tsv)");
  setting(align, "--iterations", "align.iterations", "EM iterations");
  align->add_flag_callback("--random-init", [&] { settings.emplace_back("align.random_init", "true"); },
                           "Seeded random EM start");

  // mix
  auto* mix = app.add_subcommand("mix", "Build the code-mixed source corpus");
  std::string mix_source, mix_freq, mix_conf;
  mix->add_option("source", mix_source, "Source-language corpus")->required();
  mix->add_option("--frequency", mix_freq, "Frequency lexicon TSV (computed when omitted)");
  mix->add_option("--confidence", mix_conf, "Confidence lexicon TSV")->required();
  setting(mix, "--lambda-freq", "mix.lambda_freq", "Frequency threshold");
  setting(mix, "--lambda-conf", "mix.lambda_conf", "Confidence threshold");
  setting(mix, "--theta", "mix.theta", "Fusion split");
  setting(mix, "--thresh-mode", "mix.thresh_mode", "fraction, count or score");
  setting(mix, "--fusion-mode", "mix.fusion_mode", "intersection or union");

  // train
  auto* train = app.add_subcommand("train", "Train and evaluate one configured run");
  setting(train, "--mode", "mode", "bicf, mlen, mt_import or target_only");
  setting(train, "--feed", "target_feed", "Target feed size or 'all'");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Learning curve over target feed sizes");
  std::string sweep_sizes, sweep_modes, sweep_seeds;
  sweep->add_option("--sizes", sweep_sizes, "Comma-separated feed sizes")->required();
  sweep->add_option("--modes", sweep_modes, "Comma-separated modes (default: config mode)");
  sweep->add_option("--seeds", sweep_seeds, "Comma-separated seeds (default: config seed)");

  // eval
  auto* eval = app.add_subcommand("eval", "Score a checkpoint on an annotated corpus");
  std::string eval_ckpt, eval_corpus, eval_output;
  eval->add_option("checkpoint", eval_ckpt, "Model checkpoint")->required();
  eval->add_option("corpus", eval_corpus, "Gold corpus")->required();
  eval->add_option("--output", eval_output, "Also write the report here");

  // predict
  auto* predict = app.add_subcommand("predict", "Tag one utterance");
  std::string predict_ckpt, predict_text;
  predict->add_option("checkpoint", predict_ckpt, "Model checkpoint")->required();
  predict->add_option("text", predict_text, "Whitespace-separated tokens")->required();

  // synth
  auto* synth = app.add_subcommand("synth", "Write a synthetic bilingual fixture to out_dir");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: UsageError: " << one_line(e.what()) << "\n";
    return 2;
  }

  try {
    ConfigPtr cfg = make_config(g, settings);
    const bicf_config* c = cfg.get();

    if (stats->parsed()) {
      header("stats", c);
      CorpusPtr corpus = load_corpus(stats_corpus, "");
      char* json = nullptr;
      check(bicf_corpus_stats(corpus.get(), &json));
      std::cout << take(json) << "\n";
      if (bicf_corpus_size(corpus.get()) == 0) {
        warn("empty corpus " + stats_corpus + "; no frequency lexicon written");
        return 0;
      }
      bicf_freq_lexicon* raw = nullptr;
      check(bicf_freq_build(corpus.get(), c, &raw));
      FreqPtr lex(raw);
      const auto path = out_path(c, stats_output, "frequency.tsv");
      check(bicf_freq_save(lex.get(), path.c_str()));
      std::cerr << "frequency lexicon: " << bicf_freq_size(lex.get()) << " words -> "
                << path.string() << "\n";
    } else if (align->parsed()) {
      header("align", c);
      bicf_conf_lexicon* raw = nullptr;
      std::string trace;
      if (!align_pharaoh.empty()) {
        check(bicf_conf_import_pharaoh(align_parallel.c_str(), align_pharaoh.c_str(), &raw));
        trace = "{\"source\": \"pharaoh\", \"entries\": " +
                std::to_string(bicf_conf_size(raw)) + "}";
      } else {
        char* ll = nullptr;
        check(bicf_conf_train(align_parallel.c_str(), c, &raw, &ll));
        trace = take(ll);
      }
      ConfPtr lex(raw);
      const auto path = out_path(c, align_output, "confidence.tsv");
      check(bicf_conf_save(lex.get(), path.c_str()));
      std::cout << trace << "\n";
      std::cerr << "confidence lexicon: " << bicf_conf_size(lex.get()) << " entries -> "
                << path.string() << "\n";
    } else if (mix->parsed()) {
      header("mix", c);
      CorpusPtr source = load_corpus(mix_source, "source");
      bicf_freq_lexicon* fraw = nullptr;
      check(mix_freq.empty() ? bicf_freq_build(source.get(), c, &fraw)
                             : bicf_freq_load(mix_freq.c_str(), &fraw));
      FreqPtr freq(fraw);
      bicf_conf_lexicon* craw = nullptr;
      check(bicf_conf_load(mix_conf.c_str(), &craw));
      ConfPtr conf(craw);
      bicf_mixed* mraw = nullptr;
      check(bicf_mix(source.get(), freq.get(), conf.get(), c, &mraw));
      MixedPtr mixed(mraw);
      if (bicf_mixed_table_size(mixed.get()) == 0) {
        warn("empty substitution table; the mixed corpus equals the source");
      }
      char* violation = nullptr;
      check(bicf_mixed_verify(mixed.get(), source.get(), &violation));
      if (violation) throw Failure{BICF_E_VALIDATION, take(violation)};
      const auto corpus_path = out_path(c, "", "mixed.jsonl");
      const auto log_path = out_path(c, "", "mixed.log.jsonl");
      const auto table_path = out_path(c, "", "substitutions.tsv");
      check(bicf_mixed_save(mixed.get(), corpus_path.c_str(), log_path.c_str(),
                            table_path.c_str()));
      std::cout << "{\"utterances\": " << bicf_corpus_size(source.get())
                << ", \"table_size\": " << bicf_mixed_table_size(mixed.get())
                << ", \"substitutions\": " << bicf_mixed_substitution_count(mixed.get())
                << ", \"labels_preserved\": true}\n";
    } else if (train->parsed()) {
      header("train", c);
      char* report = nullptr;
      check(bicf_train(c, &report));
      std::cout << take(report);
    } else if (sweep->parsed()) {
      header("sweep", c);
      char* csv = nullptr;
      check(bicf_sweep(c, sweep_sizes.c_str(), sweep_modes.empty() ? nullptr : sweep_modes.c_str(),
                       sweep_seeds.empty() ? nullptr : sweep_seeds.c_str(), g.jobs, &csv));
      std::cout << take(csv);
    } else if (eval->parsed()) {
      header("eval", c);
      bicf_model* raw = nullptr;
      check(bicf_model_load(eval_ckpt.c_str(), &raw));
      ModelPtr model(raw);
      CorpusPtr gold = load_corpus(eval_corpus, "target");
      char* report = nullptr;
      check(bicf_model_eval(model.get(), gold.get(), &report));
      const std::string text = take(report);
      if (!eval_output.empty()) write_file(eval_output, text);
      std::cout << text;
    } else if (predict->parsed()) {
      bicf_model* raw = nullptr;
      check(bicf_model_load(predict_ckpt.c_str(), &raw));
      ModelPtr model(raw);
      char* json = nullptr;
      check(bicf_model_predict(model.get(), predict_text.c_str(), &json));
      std::cout << take(json) << "\n";
    } else if (synth->parsed()) {
      header("synth", c);
      char* summary = nullptr;
      check(bicf_synth(c, get(c, "out_dir").c_str(), &summary));
      std::cout << take(summary) << "\n";
    }
  } catch (const Failure& f) {
    std::cerr << "error: " << bicf_status_name(f.status) << ": " << one_line(f.message) << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: InternalError: " << one_line(e.what()) << "\n";
    return 1;
  }
  return 0;
}
