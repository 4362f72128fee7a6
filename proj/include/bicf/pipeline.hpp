#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bicf/align.hpp"
#include "bicf/config.hpp"
#include "bicf/corpus.hpp"
#include "bicf/eval.hpp"
#include "bicf/lexstats.hpp"
#include "bicf/mixing.hpp"
#include "bicf/neural.hpp"
#include "bicf/synthetic.hpp"

namespace bicf {

// Source-to-target label renaming. TSV lines: kind <TAB> source <TAB> target
// with kind "intent" or "slot".
struct LabelMap {
  std::map<std::string, std::string> intents;
  std::map<std::string, std::string> slots;
  bool empty() const { return intents.empty() && slots.empty(); }
};
LabelMap read_label_map(std::istream& in);
LabelMap load_label_map(const std::filesystem::path& path);

// Renames labels, then requires every label to exist in the target
// inventories. Throws LabelOutOfInventory naming the first unmapped label.
AnnotatedCorpus apply_label_map(const AnnotatedCorpus& corpus, const LabelMap& map,
                                const std::set<std::string>& target_intents,
                                const std::set<std::string>& target_slots);

struct PipelineData {
  AnnotatedCorpus source;
  AnnotatedCorpus target_train;  // pool the feed is drawn from
  AnnotatedCorpus target_test;
  std::optional<AnnotatedCorpus> target_dev;
  std::optional<AnnotatedCorpus> imported;  // pre-translated corpus (mt_import)
  std::vector<SentencePair> parallel;
  std::optional<FrequencyLexicon> frequency;
  std::optional<ConfidenceLexicon> confidence;
  LabelMap label_map;
};

// Loads the inputs the configured mode needs. A Pharaoh alignment file is
// imported into `confidence` here. Throws ConfigError for a missing required
// path and MissingImport for mt_import without a corpus.
PipelineData load_pipeline_data(const RunConfig& config);
PipelineData pipeline_data_from(const SyntheticBundle& bundle);

struct TrainOptions {
  LrSchedule schedule;
  std::size_t batch_size = 64;
  std::size_t max_epochs = 30;
  std::size_t patience = 5;  // 0 disables early stopping
  std::uint64_t seed = 0;
};

struct EpochRecord {
  double train_loss = 0.0;
  double dev_score = 0.0;
};

struct TrainTrace {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;  // 1-based; 0 when no epoch ran
  double best_dev = 0.0;
  double initial_dev = 0.0;
};

// Mean of dev slot F1 and intent F1.
double dev_score(const JointModel& model, const AnnotatedCorpus& dev);

// Minibatch SGD with summed per-batch gradients and early stopping on
// dev_score. Leaves `model` at the best epoch seen (or untouched if no epoch
// improved on the starting point).
TrainTrace train_model(JointModel& model, const std::vector<Utterance>& train,
                       const AnnotatedCorpus& dev, const TrainOptions& options);

// One fixed seeded shuffle of the pool; a feed of n is its first n
// utterances, so feeds nest. Item i goes to dev when
// floor((i+1)*f) > floor(i*f), f = dev_fraction, which spreads the dev share
// evenly and keeps dev sets nested too.
struct FeedSplit {
  std::vector<Utterance> train;
  std::vector<Utterance> dev;
};
std::vector<std::size_t> feed_order(std::size_t pool_size, std::uint64_t seed);
FeedSplit make_feed(const AnnotatedCorpus& pool, std::size_t size, double dev_fraction,
                    std::uint64_t seed);
// Deterministic train/dev split of a whole corpus by the same rule.
FeedSplit split_dev(const std::vector<Utterance>& items, double dev_fraction);

struct RunResult {
  JointModel model;
  EvalReport report;
  std::vector<TrainTrace> stages;
  std::optional<MixingResult> mixing;
};

RunResult run_bicf(const RunConfig& config, const PipelineData& data);
RunResult run_mlen(const RunConfig& config, const PipelineData& data);
RunResult run_mt_import(const RunConfig& config, const PipelineData& data);
RunResult run_target_only(const RunConfig& config, const PipelineData& data);
RunResult run_pipeline(const RunConfig& config, const PipelineData& data);

// Substitution inputs for bicf: the frequency lexicon and the confidence
// lexicon, computed unless supplied precomputed.
FrequencyLexicon frequency_for(const RunConfig& config, const PipelineData& data);
ConfidenceLexicon confidence_for(const RunConfig& config, const PipelineData& data);

struct SweepPoint {
  std::size_t feed_size = 0;
  EvalReport report;
};

struct SweepResult {
  RunMode mode = RunMode::kBicf;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::vector<SweepPoint> points;
};

// Sizes must be strictly increasing and no larger than the target pool.
// Each point is an independent run; `jobs` bounds the worker threads.
SweepResult run_sweep(const RunConfig& config, const PipelineData& data,
                      const std::vector<std::size_t>& sizes, std::size_t jobs = 1);
// Every (mode, seed) combination, in that nesting order.
std::vector<SweepResult> run_sweep_grid(const RunConfig& config, const PipelineData& data,
                                        const std::vector<std::size_t>& sizes,
                                        const std::vector<RunMode>& modes,
                                        const std::vector<std::uint64_t>& seeds,
                                        std::size_t jobs = 1);

// feed_size,mode,seed,intent_f1,slot_f1
std::string sweep_csv(const std::vector<SweepResult>& sweeps);
std::string sweep_json(const std::vector<SweepResult>& sweeps);
// Line chart of seed-mean slot F1 against feed size, one line per mode.
std::string sweep_svg(const std::vector<SweepResult>& sweeps);

}  // namespace bicf
