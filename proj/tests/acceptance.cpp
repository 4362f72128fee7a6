// Acceptance checks. One PASS/FAIL line per criterion; exit status 1 if any
// criterion fails. Pass criterion numbers to run a subset.
//   usage: bicf_acceptance [--config-dir DIR] [N ...]
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "bicf/align.hpp"
#include "bicf/checkpoint.hpp"
#include "bicf/config.hpp"
#include "bicf/crf.hpp"
#include "bicf/eval.hpp"
#include "bicf/mixing.hpp"
#include "bicf/pipeline.hpp"
#include "bicf/rng.hpp"
#include "bicf/synthetic.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"

using namespace bicf;

namespace {

std::string config_dir = BICF_CONFIG_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

// --- 1: CRF forward and Viterbi against enumeration -------------------------

Outcome crf_exact() {
  Rng rng(11);
  double worst_z = 0.0, worst_v = 0.0;
  std::size_t path_mismatch = 0;
  const std::size_t n = 200;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t T = 1 + rng.below(5);
    const std::size_t L = 1 + rng.below(4);
    const Matrix e = oracle::random_matrix(rng, T, L, 3.0);
    const Matrix a = oracle::random_matrix(rng, L + 2, L + 2, 3.0);
    const auto brute = oracle::crf_brute(e, a);
    worst_z = std::max(worst_z, std::abs(crf_log_partition(e, a) - brute.log_partition));
    const ViterbiResult v = crf_viterbi(e, a);
    worst_v = std::max(worst_v, std::abs(v.score - brute.best_score));
    path_mismatch += v.path != brute.best;
  }
  const double tol = 1e-10;
  return {worst_z <= tol && worst_v <= tol && path_mismatch == 0,
          fmt("%zu instances, max |dlogZ|=%.2e, max |dviterbi|=%.2e, path mismatches=%zu "
              "(tol %.0e)",
              n, worst_z, worst_v, path_mismatch, tol)};
}

// --- 2: finite-difference gradient check -------------------------------------

Outcome gradient_check() {
  double worst = 0.0;
  std::string where;
  std::size_t checked = 0;
  std::set<std::string> blocks;
  for (std::uint64_t s = 1; s <= 20; ++s) {
    const auto inst = gradcheck::random_instance(1000 + s, 4);
    for (const auto& t : inst.model.tensors()) blocks.insert(t.name);
    const auto r = gradcheck::check(inst, 1e-4);
    checked += r.checked;
    if (r.max_rel_error > worst) {
      worst = r.max_rel_error;
      where = r.worst + " (instance " + std::to_string(s) + ")";
    }
  }
  const double tol = 1e-4;
  return {worst < tol, fmt("20 instances, %zu blocks, %zu parameters, max rel error=%.2e at %s "
                           "(tol %.0e, eps 1e-4)",
                           blocks.size(), checked, worst, where.c_str(), tol)};
}

// --- 3: label preservation of code-mixing -----------------------------------

Outcome mixing_preserves_labels() {
  SyntheticSpec spec;
  spec.n_source = 2000;
  const PipelineData data = pipeline_data_from(generate_synthetic_bilingual(spec, 1));
  RunConfig c;
  const MixingResult m =
      bicf_mix(data.source, frequency_for(c, data), confidence_for(c, data), c.thresh);
  const auto& src = data.source.utterances;
  const auto& mix = m.mixed.corpus.utterances;
  std::size_t preserved = 0, changed_tokens = 0, logged = 0, unaccounted = 0;
  if (mix.size() != src.size() || m.mixed.log.size() != src.size()) {
    return {false, "mixed corpus or log has the wrong length"};
  }
  for (std::size_t i = 0; i < src.size(); ++i) {
    const auto& s = src[i];
    const auto& x = mix[i];
    bool ok = s.size() == x.size() && s.slot_tags == x.slot_tags && s.intents == x.intents &&
              s.speaker == x.speaker && s.domain == x.domain;
    std::map<std::size_t, const SubstitutionRecord*> records;
    for (const auto& r : m.mixed.log[i]) records[r.index] = &r;
    logged += m.mixed.log[i].size();
    for (std::size_t t = 0; ok && t < s.size(); ++t) {
      const bool differs = s.tokens[t].surface != x.tokens[t].surface;
      changed_tokens += differs;
      const auto it = records.find(t);
      if (differs != (it != records.end())) {
        ++unaccounted;
        continue;
      }
      if (!differs) continue;
      const SubstitutionRecord& r = *it->second;
      const std::string* expect = m.table.lookup(s.tokens[t].normalized);
      if (r.original != s.tokens[t].surface || r.substituted != x.tokens[t].surface ||
          expect == nullptr || *expect != r.substituted) {
        ++unaccounted;
      }
    }
    preserved += ok;
  }
  const bool pass = preserved == src.size() && unaccounted == 0 && logged == changed_tokens &&
                    changed_tokens > 0 && check_label_preservation(data.source, m.mixed).empty();
  return {pass, fmt("%zu/%zu utterances preserved, %zu table entries, %zu changed tokens, "
                    "%zu logged, %zu unaccounted",
                    preserved, src.size(), m.table.size(), changed_tokens, logged, unaccounted)};
}

// --- 4: Model 1 dictionary recovery -----------------------------------------

Outcome alignment_recovery() {
  bool pass = true;
  std::string detail;
  for (std::uint64_t seed : {1, 2, 3}) {
    SyntheticSpec spec;
    spec.vocab_size = 100;
    spec.n_parallel = 1000;
    spec.n_source = 50;
    spec.n_target = 50;
    spec.n_test = 10;
    const SyntheticBundle b = generate_synthetic_bilingual(spec, seed);
    const Model1Fit fit = train_model1(b.parallel, {10, false, 0});
    const ConfidenceLexicon lex = build_confidence_lexicon(fit.table);
    std::map<std::string, std::string> best;
    for (const auto& e : lex.entries) best[e.source_word] = e.target_word;
    std::set<std::string> attested;
    for (const auto& p : b.parallel) attested.insert(p.source.begin(), p.source.end());
    std::size_t hit = 0, hit_attested = 0;
    for (const auto& [s, t] : b.dictionary) {
      const auto it = best.find(s);
      const bool ok = it != best.end() && it->second == t;
      hit += ok;
      hit_attested += ok && attested.count(s);
    }
    bool monotone = true;
    for (std::size_t k = 1; k < fit.log_likelihood.size(); ++k) {
      monotone &= fit.log_likelihood[k] >= fit.log_likelihood[k - 1];
    }
    const double full = double(hit) / b.dictionary.size();
    pass &= full >= 0.95 && monotone;
    detail += fmt("%sseed %lu: %zu pairs, recovered %.3f of %zu entries (%.3f of %zu attested), "
                  "LL %s",
                  detail.empty() ? "" : "; ", static_cast<unsigned long>(seed), b.parallel.size(),
                  full, b.dictionary.size(), double(hit_attested) / attested.size(),
                  attested.size(), monotone ? "non-decreasing" : "DECREASED");
  }
  return {pass, detail + " (min 0.95)"};
}

// --- 5, 6: learning curves ---------------------------------------------------

const std::vector<std::size_t> kFeeds = {100, 200, 400, 800};
const std::vector<std::uint64_t> kSeeds = {1, 2, 3};

struct Curves {
  std::map<RunMode, std::vector<double>> mean_slot_f1;
  double seconds = 0.0;
};

const Curves& curves() {
  static const Curves c = [] {
    const auto t0 = std::chrono::steady_clock::now();
    const RunConfig cfg = load_config(config_dir + "/trend.toml");
    const PipelineData data = pipeline_data_from(generate_synthetic_bilingual(cfg.synth, 7));
    const std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
    const auto grid =
        run_sweep_grid(cfg, data, kFeeds, {RunMode::kBicf, RunMode::kMlen}, kSeeds, jobs);
    Curves out;
    for (const auto& s : grid) {
      auto& v = out.mean_slot_f1[s.mode];
      v.resize(kFeeds.size(), 0.0);
      for (std::size_t k = 0; k < kFeeds.size(); ++k) {
        v[k] += s.points[k].report.overall.slot.f1 / kSeeds.size();
      }
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
  }();
  return c;
}

std::string curve_text(const std::vector<double>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) {
    s += fmt("%s%zu:%.4f", k ? " " : "", kFeeds[k], v[k]);
  }
  return s;
}

Outcome bicf_dominates() {
  const auto& c = curves();
  const auto& b = c.mean_slot_f1.at(RunMode::kBicf);
  const auto& m = c.mean_slot_f1.at(RunMode::kMlen);
  bool pass = b[0] - m[0] >= 0.02;
  for (std::size_t k = 0; k < kFeeds.size(); ++k) pass &= b[k] >= m[k];
  return {pass, fmt("mean slot F1 over 3 seeds, bicf [%s] mlen [%s]; gap at 100 = %+.4f "
                    "(need >= +0.02 there and >= 0 everywhere; sweep %.0fs)",
                    curve_text(b).c_str(), curve_text(m).c_str(), b[0] - m[0], c.seconds)};
}

Outcome mlen_saturates() {
  const auto& c = curves();
  const auto& b = c.mean_slot_f1.at(RunMode::kBicf);
  const auto& m = c.mean_slot_f1.at(RunMode::kMlen);
  const double gb = b[3] - b[2], gm = m[3] - m[2];
  return {gm < gb, fmt("gain 400->800: mlen %+.4f, bicf %+.4f (need mlen < bicf)", gm, gb)};
}

// --- 7: metric fixtures ------------------------------------------------------

struct CountFixture {
  AnnotatedCorpus gold;
  std::vector<PredictionRecord> pred;
  PrCounts slot, intent;
};

std::vector<CountFixture> f1_fixtures() {
  using oracle::utt;
  std::vector<CountFixture> f(3);
  // One correct span, one missed; one extra intent.
  f[0].gold = oracle::corpus(
      {utt({"fly", "to", "new", "york"}, {"B-act", "O", "B-city", "I-city"}, {"book"})});
  f[0].pred = {{{"book", "greet"}, {"O", "O", "B-city", "I-city"}}};
  f[0].slot = {1, 0, 1};
  f[0].intent = {1, 1, 0};
  // Boundary error and type error each cost one FP and one FN.
  f[1].gold = oracle::corpus({utt({"a", "b", "c", "d"}, {"B-x", "I-x", "O", "B-y"}, {"i"})});
  f[1].pred = {{{"j"}, {"B-x", "O", "O", "B-x"}}};
  f[1].slot = {0, 2, 2};
  f[1].intent = {0, 1, 1};
  // Pooled over utterances; the system turn is scored for slots only.
  auto sys = utt({"ok", "paris"}, {"O", "B-city"}, {}, "d", bicf::Speaker::kSystem);
  f[2].gold = oracle::corpus({utt({"to", "rome"}, {"O", "B-city"}, {"book"}), sys,
                              utt({"hi"}, {"O"}, {"greet", "chat"})});
  f[2].pred = {{{"book"}, {"O", "B-city"}},
               {{"book"}, {"B-city", "O"}},
               {{"greet"}, {"O"}}};
  f[2].slot = {1, 1, 1};
  f[2].intent = {2, 0, 1};
  return f;
}

Outcome metric_fixtures() {
  const auto zero = fleiss_kappa({{{2, 0}, {0, 2}, {1, 1}, {1, 1}}});
  const auto one = fleiss_kappa({{{3, 0}, {0, 3}, {3, 0}}});
  const double b = bleu({{"the", "cat", "sat", "on"}}, {{"the", "cat", "sat", "on", "mat"}}, 4);
  bool pass = zero.kappa == 0.0 && one.kappa == 1.0 && std::abs(b - 0.7788) <= 1e-4;
  std::size_t matched = 0;
  const auto fixtures = f1_fixtures();
  for (const auto& f : fixtures) {
    const EvalReport r = evaluate_predictions(f.gold, f.pred);
    const auto f1 = [](const PrCounts& c) {
      const double d = 2.0 * c.true_positive + c.false_positive + c.false_negative;
      return d == 0 ? 0.0 : 2.0 * c.true_positive / d;
    };
    const bool ok = r.overall.slot.counts == f.slot && r.overall.intent.counts == f.intent &&
                    std::abs(r.overall.slot.f1 - f1(f.slot)) < 1e-12 &&
                    std::abs(r.overall.intent.f1 - f1(f.intent)) < 1e-12;
    matched += ok;
  }
  pass &= matched == fixtures.size();
  return {pass, fmt("kappa(chance)=%.17g kappa(perfect)=%.17g (exact), BLEU=%.6f (0.7788 +- 1e-4), "
                    "F1 fixtures matching hand counts %zu/%zu",
                    zero.kappa, one.kappa, b, matched, fixtures.size())};
}

// --- 8: determinism ----------------------------------------------------------

RunConfig tiny_config() {
  RunConfig c;
  c.synth.vocab_size = 40;
  c.synth.n_source = 240;
  c.synth.n_target = 120;
  c.synth.n_test = 60;
  c.synth.n_parallel = 80;
  c.model.d_emb = c.model.hidden = 8;
  c.training.eta_top = 0.01;
  c.training.batch_size = 16;
  c.training.max_epochs = 4;
  c.training.patience = 2;
  c.target_feed = 40;
  return c;
}

std::string checkpoint_bytes(const RunResult& r) {
  std::ostringstream out;
  write_checkpoint(out, r.model, r.report.metadata);
  return out.str();
}

Outcome determinism() {
  const RunConfig base = tiny_config();
  PipelineData data = pipeline_data_from(generate_synthetic_bilingual(base.synth, 5));
  data.imported = data.source;
  std::size_t same = 0, total = 0;
  for (RunMode mode : {RunMode::kBicf, RunMode::kMlen, RunMode::kMtImport, RunMode::kTargetOnly}) {
    RunConfig c = base;
    c.mode = mode;
    const RunResult a = run_pipeline(c, data);
    const RunResult b = run_pipeline(c, data);
    same += report_to_json(a.report) == report_to_json(b.report);
    same += checkpoint_bytes(a) == checkpoint_bytes(b);
    total += 2;
  }
  const std::vector<RunMode> modes = {RunMode::kBicf, RunMode::kTargetOnly};
  const auto s1 = sweep_csv(run_sweep_grid(base, data, {20, 40}, modes, {1, 2}, 1));
  const auto s2 = sweep_csv(run_sweep_grid(base, data, {20, 40}, modes, {1, 2}, 1));
  const auto s3 = sweep_csv(run_sweep_grid(base, data, {20, 40}, modes, {1, 2}, 4));
  same += (s1 == s2) + (s1 == s3);
  total += 2;
  return {same == total, fmt("%zu/%zu artefacts byte-identical (4 modes x report+checkpoint, "
                             "sweep CSV repeated and with 4 workers)",
                             same, total)};
}

// --- 9: memorisation ---------------------------------------------------------

Outcome memorisation() {
  SyntheticSpec spec;
  spec.n_source = 50;
  spec.n_target = 50;
  spec.n_test = 10;
  spec.n_parallel = 10;
  const SyntheticBundle b = generate_synthetic_bilingual(spec, 3);
  const AnnotatedCorpus& train = b.target;
  std::set<std::string> words;
  for (const auto& u : train.utterances) {
    for (const auto& w : u.normalized_tokens()) words.insert(w);
  }
  Hyperparameters hp;
  JointModel m = JointModel::create(
      hp, Vocabulary(words),
      std::vector<std::string>(train.intent_inventory.begin(), train.intent_inventory.end()),
      std::vector<std::string>(train.slot_inventory.begin(), train.slot_inventory.end()), 201);
  TrainOptions opt;
  opt.schedule = {0.01, 1.0};
  opt.batch_size = 8;
  opt.max_epochs = 200;
  opt.patience = 0;
  opt.seed = 1;
  const TrainTrace t = train_model(m, train.utterances, train, opt);
  const EvalReport r = evaluate(m, train);
  return {r.overall.slot.f1 == 1.0 && r.overall.intent.f1 == 1.0,
          fmt("%zu utterances, %zu epochs, train slot F1=%.4f intent F1=%.4f (need 1.0 both)",
              train.size(), t.epochs.size(), r.overall.slot.f1, r.overall.intent.f1)};
}

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;  // 0 = no limit
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "crf-exact", 10, crf_exact},
      {2, "gradient-check", 60, gradient_check},
      {3, "mixing-labels", 5, mixing_preserves_labels},
      {4, "alignment-recovery", 0, alignment_recovery},
      {5, "bicf-vs-mlen", 900, bicf_dominates},
      {6, "mlen-saturation", 900, mlen_saturates},
      {7, "metric-fixtures", 0, metric_fixtures},
      {8, "determinism", 0, determinism},
      {9, "memorisation", 120, memorisation},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config-dir" && i + 1 < argc) {
      config_dir = argv[++i];
    } else {
      wanted.insert(std::atoi(a.c_str()));
    }
  }
  int failures = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = c.limit_seconds == 0 || secs <= c.limit_seconds;
    const bool pass = o.pass && in_time;
    failures += !pass;
    std::printf("criterion %d %-18s %s  %s; %.2fs%s\n", c.id, c.name, pass ? "PASS" : "FAIL",
                o.detail.c_str(), secs,
                c.limit_seconds > 0 ? fmt(" (limit %.0fs)", c.limit_seconds).c_str() : "");
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
