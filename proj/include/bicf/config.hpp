#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bicf/lexstats.hpp"
#include "bicf/mixing.hpp"
#include "bicf/neural.hpp"
#include "bicf/synthetic.hpp"

namespace bicf {

enum class RunMode { kBicf, kMlen, kMtImport, kTargetOnly };
const char* run_mode_name(RunMode mode);
RunMode parse_run_mode(const std::string& name);  // throws ConfigError

struct TrainingConfig {
  double eta_top = 1e-3;
  double xi = 1.0;         // layer decay for the refinement stage
  double stage1_xi = 1.0;  // first stage trains from scratch
  std::size_t batch_size = 64;
  std::size_t max_epochs = 30;
  std::size_t patience = 5;
  double dev_fraction = 0.1;
};

struct DataPaths {
  std::string source;
  std::string target_train;
  std::string target_test;
  std::string target_dev;  // optional; otherwise carved from the feed
  std::string parallel;
  std::string pharaoh;      // optional alignment import for the parallel data
  std::string frequency;    // optional precomputed frequency lexicon
  std::string confidence;   // optional precomputed confidence lexicon
  std::string import_corpus;  // pre-translated corpus for mt_import
  std::string label_map;
};

struct RunConfig {
  RunMode mode = RunMode::kBicf;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  std::optional<std::size_t> target_feed;  // nullopt = all
  ThreshParams thresh;
  TfidfAggregation tfidf = TfidfAggregation::kMax;
  std::size_t align_iterations = 10;
  bool align_random_init = false;
  TrainingConfig training;
  Hyperparameters model;
  DataPaths data;
  SyntheticSpec synth;
};

// Keys use dotted names ("train.eta_top", "model.hidden", ...). A
// "[section]" header prefixes the keys below it.
void config_set(RunConfig& config, const std::string& key, const std::string& value);
std::string config_get(const RunConfig& config, const std::string& key);
std::vector<std::string> config_keys();

// "key=value" override syntax used by the command line.
void config_apply_override(RunConfig& config, const std::string& assignment);

// Flat TOML subset: comments, [section] headers, key = value with quoted
// strings, numbers and booleans. Unknown keys are errors.
RunConfig parse_config(std::istream& in, const std::string& source = "");
RunConfig load_config(const std::filesystem::path& path);

// Canonical listing of every key in table order; parse_config reads it back.
std::string dump_config(const RunConfig& config);

// FNV-1a over the canonical listing, output directory excluded. 16 hex digits.
std::string config_hash(const RunConfig& config);

}  // namespace bicf
