#include "bicf/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <span>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "bicf/error.hpp"
#include "bicf/rng.hpp"
#include "tsv.hpp"

namespace bicf {

// Seed streams, one per consumer, so changing one stage never perturbs
// another.
namespace {
constexpr std::uint64_t kStreamFeed = 101;
constexpr std::uint64_t kStreamInit = 201;
constexpr std::uint64_t kStreamStage1 = 202;
constexpr std::uint64_t kStreamStage2 = 203;
constexpr std::uint64_t kStreamAlign = 301;
}  // namespace

LabelMap read_label_map(std::istream& in) {
  LabelMap map;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto f = detail::split_tabs(line);
    if (f.size() != 3 || f[1].empty() || f[2].empty()) {
      throw ParseError(line_no, "expected kind<TAB>source<TAB>target");
    }
    auto* target = f[0] == "intent" ? &map.intents : f[0] == "slot" ? &map.slots : nullptr;
    if (!target) throw ParseError(line_no, "kind must be 'intent' or 'slot'");
    if (!target->emplace(f[1], f[2]).second) {
      throw ParseError(line_no, "duplicate mapping for '" + f[1] + "'");
    }
  }
  return map;
}

LabelMap load_label_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  try {
    return read_label_map(in);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.reason(), path.string());
  }
}

AnnotatedCorpus apply_label_map(const AnnotatedCorpus& corpus, const LabelMap& map,
                                const std::set<std::string>& target_intents,
                                const std::set<std::string>& target_slots) {
  auto rename = [](const std::map<std::string, std::string>& m, const std::string& label) {
    auto it = m.find(label);
    return it == m.end() ? label : it->second;
  };
  AnnotatedCorpus out;
  out.language_tag = corpus.language_tag;
  for (std::size_t i = 0; i < corpus.utterances.size(); ++i) {
    Utterance u = corpus.utterances[i];
    std::set<std::string> intents;
    for (const auto& label : u.intents) {
      const std::string mapped = rename(map.intents, label);
      if (!target_intents.count(mapped)) {
        throw Error(ErrorCode::kLabelOutOfInventory,
                    "utterance " + std::to_string(i) + ": intent '" + label +
                        "' has no counterpart in the target inventory");
      }
      intents.insert(mapped);
    }
    u.intents = std::move(intents);
    for (auto& tag : u.slot_tags) {
      const ParsedTag p = parse_tag(tag);
      if (p.kind == TagKind::kOutside) continue;
      const std::string mapped = rename(map.slots, p.slot_type);
      if (!target_slots.count(mapped)) {
        throw Error(ErrorCode::kLabelOutOfInventory,
                    "utterance " + std::to_string(i) + ": slot '" + p.slot_type +
                        "' has no counterpart in the target inventory");
      }
      tag = (p.kind == TagKind::kBegin ? "B-" : "I-") + mapped;
    }
    out.utterances.push_back(std::move(u));
  }
  out.absorb_labels();
  return out;
}

namespace {

bool has_path(const std::string& p) { return !p.empty(); }

void require(const std::string& path, const char* key, RunMode mode) {
  if (!has_path(path)) {
    throw Error(ErrorCode::kConfig,
                std::string("mode ") + run_mode_name(mode) + " needs " + key);
  }
}

}  // namespace

PipelineData load_pipeline_data(const RunConfig& config) {
  const auto& d = config.data;
  const RunMode mode = config.mode;
  const bool needs_pool = !(config.target_feed && *config.target_feed == 0);
  PipelineData data;
  require(d.target_test, "data.target_test", mode);
  data.target_test = load_corpus(d.target_test, "target");
  if (needs_pool || has_path(d.target_train)) {
    require(d.target_train, "data.target_train", mode);
    data.target_train = load_corpus(d.target_train, "target");
  }
  if (has_path(d.target_dev)) data.target_dev = load_corpus(d.target_dev, "target");
  if (has_path(d.label_map)) data.label_map = load_label_map(d.label_map);

  if (mode == RunMode::kBicf || mode == RunMode::kMlen) {
    require(d.source, "data.source", mode);
    data.source = load_corpus(d.source, "source");
  }
  if (mode == RunMode::kBicf) {
    if (has_path(d.frequency)) data.frequency = load_frequency_lexicon(d.frequency);
    if (has_path(d.confidence)) {
      data.confidence = load_confidence_lexicon(d.confidence);
    } else {
      if (!has_path(d.parallel)) {
        throw Error(ErrorCode::kConfig,
                    "mode bicf needs data.parallel or data.confidence");
      }
      data.parallel = load_parallel(d.parallel);
      if (has_path(d.pharaoh)) data.confidence = import_pharaoh(std::filesystem::path(d.pharaoh), data.parallel);
    }
  }
  if (mode == RunMode::kMtImport) {
    if (!has_path(d.import_corpus)) {
      throw Error(ErrorCode::kMissingImport, "mode mt_import needs data.import");
    }
    if (!std::filesystem::exists(d.import_corpus)) {
      throw Error(ErrorCode::kMissingImport, "import corpus " + d.import_corpus + " not found");
    }
    data.imported = load_corpus(d.import_corpus, "imported");
  }
  return data;
}

PipelineData pipeline_data_from(const SyntheticBundle& bundle) {
  PipelineData data;
  data.source = bundle.source;
  data.target_train = bundle.target;
  data.target_test = bundle.target_test;
  data.parallel = bundle.parallel;
  return data;
}

double dev_score(const JointModel& model, const AnnotatedCorpus& dev) {
  const EvalReport r = evaluate(model, dev);
  return 0.5 * (r.overall.slot.f1 + r.overall.intent.f1);
}

TrainTrace train_model(JointModel& model, const std::vector<Utterance>& train,
                       const AnnotatedCorpus& dev, const TrainOptions& options) {
  TrainTrace trace;
  if (train.empty() || options.max_epochs == 0) return trace;
  if (options.batch_size == 0) throw Error(ErrorCode::kInvalidArgument, "batch_size must be positive");
  std::vector<Example> examples;
  examples.reserve(train.size());
  for (const auto& u : train) examples.push_back(encode_example(model, u));

  const bool use_dev = !dev.empty();
  trace.initial_dev = use_dev ? dev_score(model, dev) : 0.0;
  trace.best_dev = trace.initial_dev;
  JointModel best = model;
  std::size_t stale = 0;
  std::vector<std::size_t> order(examples.size());
  Gradients grads = Gradients::like(model);

  for (std::size_t epoch = 1; epoch <= options.max_epochs; ++epoch) {
    const std::uint64_t epoch_seed = derive_seed(options.seed, epoch);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(epoch_seed);
    rng.shuffle(std::span<std::size_t>(order));
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += options.batch_size) {
      const std::size_t stop = std::min(order.size(), start + options.batch_size);
      grads.zero();
      for (std::size_t k = start; k < stop; ++k) {
        const double loss = accumulate_joint_loss(model, examples[order[k]], true,
                                                  derive_seed(epoch_seed, k + 1), grads);
        if (!std::isfinite(loss)) {
          throw Error(ErrorCode::kDivergence,
                      "non-finite loss in epoch " + std::to_string(epoch));
        }
        epoch_loss += loss;
      }
      sgd_step(model, grads, options.schedule, model.updates());
    }
    EpochRecord rec;
    rec.train_loss = epoch_loss / static_cast<double>(examples.size());
    if (use_dev) {
      rec.dev_score = dev_score(model, dev);
      if (rec.dev_score >= trace.best_dev) {
        stale = rec.dev_score > trace.best_dev ? 0 : stale + 1;
        trace.best_dev = rec.dev_score;
        trace.best_epoch = epoch;
        best = model;
      } else {
        ++stale;
      }
    } else {
      trace.best_epoch = epoch;
    }
    trace.epochs.push_back(rec);
    if (use_dev && options.patience > 0 && stale >= options.patience) break;
  }
  if (use_dev) {
    // Keep the step counter of the last update even when rolling back.
    const std::uint64_t steps = model.updates();
    model = std::move(best);
    model.set_updates(steps);
  }
  return trace;
}

std::vector<std::size_t> feed_order(std::size_t pool_size, std::uint64_t seed) {
  std::vector<std::size_t> order(pool_size);
  for (std::size_t i = 0; i < pool_size; ++i) order[i] = i;
  Rng rng(derive_seed(seed, kStreamFeed));
  rng.shuffle(std::span<std::size_t>(order));
  return order;
}

FeedSplit split_dev(const std::vector<Utterance>& items, double dev_fraction) {
  if (!(dev_fraction >= 0.0 && dev_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "dev_fraction must lie in [0,1)");
  }
  FeedSplit split;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const bool dev = std::floor(static_cast<double>(i + 1) * dev_fraction + 1e-9) >
                     std::floor(static_cast<double>(i) * dev_fraction + 1e-9);
    (dev ? split.dev : split.train).push_back(items[i]);
  }
  return split;
}

FeedSplit make_feed(const AnnotatedCorpus& pool, std::size_t size, double dev_fraction,
                    std::uint64_t seed) {
  if (size > pool.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "feed of " + std::to_string(size) + " exceeds target pool of " +
                    std::to_string(pool.size()));
  }
  const auto order = feed_order(pool.size(), seed);
  std::vector<Utterance> feed;
  feed.reserve(size);
  for (std::size_t i = 0; i < size; ++i) feed.push_back(pool.utterances[order[i]]);
  return split_dev(feed, dev_fraction);
}

namespace {

AnnotatedCorpus as_corpus(const std::vector<Utterance>& items, const std::string& tag) {
  AnnotatedCorpus c;
  c.utterances = items;
  c.language_tag = tag;
  c.absorb_labels();
  return c;
}

void append(std::vector<Utterance>& into, const std::vector<Utterance>& from) {
  into.insert(into.end(), from.begin(), from.end());
}

void collect_words(std::set<std::string>& words, const std::vector<Utterance>& items) {
  for (const auto& u : items) {
    for (const auto& t : u.tokens) words.insert(t.normalized);
  }
}

struct Inventory {
  std::set<std::string> intents, slots;

  void add(const AnnotatedCorpus& c) {
    intents.insert(c.intent_inventory.begin(), c.intent_inventory.end());
    slots.insert(c.slot_inventory.begin(), c.slot_inventory.end());
  }
};

Inventory target_inventory(const PipelineData& data) {
  Inventory inv;
  inv.add(data.target_train);
  inv.add(data.target_test);
  if (data.target_dev) inv.add(*data.target_dev);
  return inv;
}

std::size_t feed_size(const RunConfig& config, const PipelineData& data) {
  return config.target_feed ? *config.target_feed : data.target_train.size();
}

TrainOptions options_for(const RunConfig& config, double xi, std::uint64_t stream) {
  TrainOptions o;
  o.schedule.eta_top = config.training.eta_top;
  o.schedule.xi = xi;
  o.batch_size = config.training.batch_size;
  o.max_epochs = config.training.max_epochs;
  o.patience = config.training.patience;
  o.seed = derive_seed(config.seed, stream);
  return o;
}

JointModel new_model(const RunConfig& config, const Inventory& inv,
                     const std::set<std::string>& words) {
  return JointModel::create(config.model, Vocabulary(words),
                            std::vector<std::string>(inv.intents.begin(), inv.intents.end()),
                            std::vector<std::string>(inv.slots.begin(), inv.slots.end()),
                            derive_seed(config.seed, kStreamInit));
}

void add_trace_metadata(EvalReport& report, const std::string& prefix, const TrainTrace& t) {
  report.metadata[prefix + "_epochs"] = std::to_string(t.epochs.size());
  report.metadata[prefix + "_best_epoch"] = std::to_string(t.best_epoch);
}

RunResult finish(const RunConfig& config, const PipelineData& data, JointModel model,
                 std::vector<TrainTrace> stages, const FeedSplit& feed,
                 std::size_t train_utterances) {
  // Evaluate at checkpoint precision so a reloaded model scores identically.
  model.quantize_to_float();
  EvalReport report = evaluate(model, data.target_test);
  report.metadata["mode"] = run_mode_name(config.mode);
  report.metadata["seed"] = std::to_string(config.seed);
  report.metadata["config_hash"] = config_hash(config);
  report.metadata["feed_size"] = std::to_string(feed.train.size() + feed.dev.size());
  report.metadata["feed_train"] = std::to_string(feed.train.size());
  report.metadata["feed_dev"] = std::to_string(feed.dev.size());
  report.metadata["train_utterances"] = std::to_string(train_utterances);
  report.metadata["vocab_size"] = std::to_string(model.vocab().size());
  report.metadata["parameters"] = std::to_string(model.parameter_count());
  report.metadata["updates"] = std::to_string(model.updates());
  for (std::size_t i = 0; i < stages.size(); ++i) {
    add_trace_metadata(report, "stage" + std::to_string(i + 1), stages[i]);
  }
  return RunResult{std::move(model), std::move(report), std::move(stages), std::nullopt};
}

// Shared single-stage recipe: labelled base corpus (maybe empty) plus the
// target feed, early stopping on target dev when available.
RunResult run_single_stage(const RunConfig& config, const PipelineData& data,
                           const AnnotatedCorpus* base) {
  const Inventory inv = target_inventory(data);
  const FeedSplit feed =
      make_feed(data.target_train, feed_size(config, data), config.training.dev_fraction,
                config.seed);
  FeedSplit base_split;
  if (base) {
    const AnnotatedCorpus mapped = apply_label_map(*base, data.label_map, inv.intents, inv.slots);
    base_split = split_dev(mapped.utterances, config.training.dev_fraction);
  }
  std::vector<Utterance> train = base_split.train;
  append(train, feed.train);
  if (train.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("mode ") + run_mode_name(config.mode) + " has no training data");
  }
  AnnotatedCorpus dev;
  if (data.target_dev) {
    dev = *data.target_dev;
  } else if (!feed.dev.empty()) {
    dev = as_corpus(feed.dev, "target");
  } else if (!base_split.dev.empty()) {
    dev = as_corpus(base_split.dev, "dev");
  } else {
    dev = as_corpus(feed.train, "target");
  }
  std::set<std::string> words;
  collect_words(words, train);
  collect_words(words, base_split.dev);
  collect_words(words, feed.dev);
  JointModel model = new_model(config, inv, words);
  TrainTrace t = train_model(model, train, dev,
                             options_for(config, config.training.stage1_xi, kStreamStage1));
  return finish(config, data, std::move(model), {std::move(t)}, feed, train.size());
}

}  // namespace

FrequencyLexicon frequency_for(const RunConfig& config, const PipelineData& data) {
  if (data.frequency) return *data.frequency;
  return build_frequency_lexicon(data.source, config.tfidf);
}

ConfidenceLexicon confidence_for(const RunConfig& config, const PipelineData& data) {
  if (data.confidence) return *data.confidence;
  Model1Options o;
  o.iterations = config.align_iterations;
  o.random_init = config.align_random_init;
  o.seed = derive_seed(config.seed, kStreamAlign);
  return build_confidence_lexicon(train_model1(data.parallel, o).table);
}

RunResult run_bicf(const RunConfig& config, const PipelineData& data) {
  const Inventory inv = target_inventory(data);
  const AnnotatedCorpus source =
      apply_label_map(data.source, data.label_map, inv.intents, inv.slots);
  PipelineData mapped_view;  // frequency statistics follow the mapped corpus
  mapped_view.source = source;
  mapped_view.frequency = data.frequency;
  MixingResult mixing = bicf_mix(source, frequency_for(config, mapped_view),
                                 confidence_for(config, data), config.thresh);

  const FeedSplit stage1 = split_dev(mixing.mixed.corpus.utterances, config.training.dev_fraction);
  const FeedSplit feed =
      make_feed(data.target_train, feed_size(config, data), config.training.dev_fraction,
                config.seed);
  if (stage1.train.empty()) throw Error(ErrorCode::kEmptyCorpus, "mixed corpus is empty");

  std::set<std::string> words;
  for (const auto* items : {&stage1.train, &stage1.dev, &feed.train, &feed.dev}) {
    collect_words(words, *items);
  }
  JointModel model = new_model(config, inv, words);
  const AnnotatedCorpus dev1 = as_corpus(stage1.dev, "mixed");
  std::vector<TrainTrace> stages;
  stages.push_back(train_model(model, stage1.train, dev1,
                               options_for(config, config.training.stage1_xi, kStreamStage1)));
  if (!feed.train.empty()) {
    AnnotatedCorpus dev2;
    if (data.target_dev) {
      dev2 = *data.target_dev;
    } else if (!feed.dev.empty()) {
      dev2 = as_corpus(feed.dev, "target");
    } else {
      dev2 = dev1;
    }
    stages.push_back(train_model(model, feed.train, dev2,
                                 options_for(config, config.training.xi, kStreamStage2)));
  }
  const std::size_t n_train = stage1.train.size() + feed.train.size();
  RunResult r = finish(config, data, std::move(model), std::move(stages), feed, n_train);
  r.report.metadata["substitution_table_size"] = std::to_string(mixing.table.size());
  r.report.metadata["substitutions"] = std::to_string(mixing.mixed.substitution_count());
  r.mixing = std::move(mixing);
  return r;
}

RunResult run_mlen(const RunConfig& config, const PipelineData& data) {
  return run_single_stage(config, data, &data.source);
}

RunResult run_mt_import(const RunConfig& config, const PipelineData& data) {
  if (!data.imported) throw Error(ErrorCode::kMissingImport, "no imported corpus supplied");
  return run_single_stage(config, data, &*data.imported);
}

RunResult run_target_only(const RunConfig& config, const PipelineData& data) {
  return run_single_stage(config, data, nullptr);
}

RunResult run_pipeline(const RunConfig& config, const PipelineData& data) {
  switch (config.mode) {
    case RunMode::kBicf: return run_bicf(config, data);
    case RunMode::kMlen: return run_mlen(config, data);
    case RunMode::kMtImport: return run_mt_import(config, data);
    case RunMode::kTargetOnly: return run_target_only(config, data);
  }
  throw Error(ErrorCode::kConfig, "unknown mode");
}

namespace {

void check_sizes(const std::vector<std::size_t>& sizes, std::size_t pool) {
  if (sizes.empty()) throw Error(ErrorCode::kInvalidArgument, "sweep needs at least one size");
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (i > 0 && sizes[i] <= sizes[i - 1]) {
      throw Error(ErrorCode::kInvalidArgument, "sweep sizes must be strictly increasing");
    }
    if (sizes[i] > pool) {
      throw Error(ErrorCode::kInvalidArgument,
                  "sweep size " + std::to_string(sizes[i]) + " exceeds target pool of " +
                      std::to_string(pool));
    }
  }
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads; the first exception
// (lowest index) is rethrown after all workers finish.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(jobs, n));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

std::vector<SweepResult> run_sweep_grid(const RunConfig& config, const PipelineData& data,
                                        const std::vector<std::size_t>& sizes,
                                        const std::vector<RunMode>& modes,
                                        const std::vector<std::uint64_t>& seeds,
                                        std::size_t jobs) {
  check_sizes(sizes, data.target_train.size());
  if (modes.empty() || seeds.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "sweep needs at least one mode and one seed");
  }
  std::vector<SweepResult> out;
  for (RunMode m : modes) {
    for (std::uint64_t s : seeds) {
      RunConfig c = config;
      c.mode = m;
      c.seed = s;
      SweepResult r;
      r.mode = m;
      r.seed = s;
      r.config_hash = config_hash(c);
      r.points.resize(sizes.size());
      out.push_back(std::move(r));
    }
  }
  const std::size_t per = sizes.size();
  parallel_for(out.size() * per, jobs, [&](std::size_t task) {
    SweepResult& sweep = out[task / per];
    const std::size_t k = task % per;
    RunConfig c = config;
    c.mode = sweep.mode;
    c.seed = sweep.seed;
    c.target_feed = sizes[k];
    sweep.points[k] = SweepPoint{sizes[k], run_pipeline(c, data).report};
  });
  return out;
}

SweepResult run_sweep(const RunConfig& config, const PipelineData& data,
                      const std::vector<std::size_t>& sizes, std::size_t jobs) {
  return run_sweep_grid(config, data, sizes, {config.mode}, {config.seed}, jobs).front();
}

std::string sweep_csv(const std::vector<SweepResult>& sweeps) {
  std::ostringstream out;
  out << "feed_size,mode,seed,intent_f1,slot_f1\n";
  char buf[64];
  for (const auto& s : sweeps) {
    for (const auto& p : s.points) {
      std::snprintf(buf, sizeof buf, "%.6f,%.6f", p.report.overall.intent.f1,
                    p.report.overall.slot.f1);
      out << p.feed_size << ',' << run_mode_name(s.mode) << ',' << s.seed << ',' << buf << '\n';
    }
  }
  return out.str();
}

std::string sweep_json(const std::vector<SweepResult>& sweeps) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& s : sweeps) {
    nlohmann::ordered_json j;
    j["mode"] = run_mode_name(s.mode);
    j["seed"] = s.seed;
    j["config_hash"] = s.config_hash;
    j["points"] = nlohmann::ordered_json::array();
    for (const auto& p : s.points) {
      j["points"].push_back({{"feed_size", p.feed_size},
                             {"report", nlohmann::ordered_json::parse(report_to_json(p.report))}});
    }
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

std::string sweep_svg(const std::vector<SweepResult>& sweeps) {
  std::vector<std::string> modes;
  std::set<std::size_t> size_set;
  std::map<std::string, std::map<std::size_t, std::pair<double, int>>> mean;
  for (const auto& s : sweeps) {
    const std::string m = run_mode_name(s.mode);
    if (std::find(modes.begin(), modes.end(), m) == modes.end()) modes.push_back(m);
    for (const auto& p : s.points) {
      size_set.insert(p.feed_size);
      auto& cell = mean[m][p.feed_size];
      cell.first += p.report.overall.slot.f1;
      ++cell.second;
    }
  }
  const std::vector<std::size_t> sizes(size_set.begin(), size_set.end());
  constexpr double W = 640, H = 400, L = 60, R = 140, T = 30, B = 50;
  const double pw = W - L - R, ph = H - T - B;
  auto x_of = [&](std::size_t i) {
    return sizes.size() < 2 ? L + pw / 2 : L + pw * static_cast<double>(i) / (sizes.size() - 1);
  };
  auto y_of = [&](double f1) { return T + ph * (1.0 - f1); };
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  std::ostringstream out;
  char buf[160];
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" "
         "font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf,
                "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n", L, T + ph,
                L + pw, T + ph);
  out << buf;
  std::snprintf(buf, sizeof buf,
                "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n", L, T, L,
                T + ph);
  out << buf;
  for (int k = 0; k <= 5; ++k) {
    const double v = k / 5.0;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%g\" y=\"%g\" text-anchor=\"end\">%.1f</text>\n", L - 6,
                  y_of(v) + 4, v);
    out << buf;
  }
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" text-anchor=\"middle\">%zu</text>\n",
                  x_of(i), T + ph + 18, sizes[i]);
    out << buf;
  }
  std::snprintf(buf, sizeof buf,
                "<text x=\"%g\" y=\"%g\" text-anchor=\"middle\">target feed size</text>\n",
                L + pw / 2, H - 10);
  out << buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"14\" y=\"%g\" transform=\"rotate(-90 14 %g)\" "
                "text-anchor=\"middle\">slot F1</text>\n",
                T + ph / 2, T + ph / 2);
  out << buf;
  for (std::size_t m = 0; m < modes.size(); ++m) {
    const char* color = palette[m % 5];
    std::string points;
    const auto& series = mean[modes[m]];
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      auto it = series.find(sizes[i]);
      if (it == series.end()) continue;
      const double f1 = it->second.first / it->second.second;
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", x_of(i), y_of(f1));
      points += buf;
      std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"%s\"/>\n",
                    x_of(i), y_of(f1), color);
      out << buf;
    }
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\""
        << points << "\"/>\n";
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%g\" y=\"%g\" fill=\"%s\">%s</text>\n", L + pw + 12,
                  T + 16 + 18.0 * m, color, modes[m].c_str());
    out << buf;
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace bicf
