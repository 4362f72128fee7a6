#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include "bicf/bicf.h"

namespace fs = std::filesystem;

namespace {

std::string take(char* s) {
  std::string out = s ? s : "";
  bicf_string_free(s);
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

fs::path scratch(const char* name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(CApi, StatusNamesAndLastError) {
  EXPECT_STREQ(bicf_status_name(BICF_OK), "Ok");
  EXPECT_STREQ(bicf_status_name(BICF_E_PARSE), "ParseError");
  EXPECT_STREQ(bicf_status_name(BICF_E_CONFIG), "ConfigError");
  EXPECT_STREQ(bicf_status_name(12345), "InternalError");

  bicf_config* cfg = nullptr;
  ASSERT_EQ(bicf_config_new(&cfg), BICF_OK);
  EXPECT_STREQ(bicf_last_error(), "");
  EXPECT_EQ(bicf_config_set(cfg, "no.such.key", "1"), BICF_E_CONFIG);
  EXPECT_NE(std::string(bicf_last_error()).find("no.such.key"), std::string::npos);
  EXPECT_EQ(bicf_config_set(cfg, "seed", "3"), BICF_OK);
  EXPECT_STREQ(bicf_last_error(), "");
  EXPECT_EQ(bicf_config_set(nullptr, "seed", "3"), BICF_E_INVALID_ARGUMENT);
  bicf_config_free(cfg);
  bicf_config_free(nullptr);
}

TEST(CApi, ConfigAccessors) {
  bicf_config* cfg = nullptr;
  ASSERT_EQ(bicf_config_new(&cfg), BICF_OK);
  ASSERT_EQ(bicf_config_override(cfg, "model.hidden=12"), BICF_OK);
  char* v = nullptr;
  ASSERT_EQ(bicf_config_get(cfg, "model.hidden", &v), BICF_OK);
  EXPECT_EQ(take(v), "12");
  char* h1 = nullptr;
  char* h2 = nullptr;
  ASSERT_EQ(bicf_config_hash(cfg, &h1), BICF_OK);
  ASSERT_EQ(bicf_config_set(cfg, "out_dir", "/elsewhere"), BICF_OK);
  ASSERT_EQ(bicf_config_hash(cfg, &h2), BICF_OK);
  EXPECT_EQ(take(h1), take(h2));
  char* dump = nullptr;
  ASSERT_EQ(bicf_config_dump(cfg, &dump), BICF_OK);
  EXPECT_NE(take(dump).find("hidden = \"12\""), std::string::npos);
  const fs::path missing = "/nonexistent/cfg.toml";
  bicf_config* none = nullptr;
  EXPECT_EQ(bicf_config_load(missing.c_str(), &none), BICF_E_IO);
  EXPECT_EQ(none, nullptr);
  bicf_config_free(cfg);
}

TEST(CApi, SynthStatsMixTrainEval) {
  const fs::path dir = scratch("bicf_capi_test");
  bicf_config* cfg = nullptr;
  ASSERT_EQ(bicf_config_new(&cfg), BICF_OK);
  for (const char* kv : {"synth.vocab_size=30", "synth.n_source=150", "synth.n_target=80",
                         "synth.n_test=40", "synth.n_parallel=60", "model.d_emb=6",
                         "model.hidden=6", "train.max_epochs=2", "train.eta_top=0.01",
                         "target_feed=30"}) {
    ASSERT_EQ(bicf_config_override(cfg, kv), BICF_OK) << bicf_last_error();
  }
  char* summary = nullptr;
  ASSERT_EQ(bicf_synth(cfg, (dir / "fx").c_str(), &summary), BICF_OK) << bicf_last_error();
  EXPECT_NE(take(summary).find("\"source\": 150"), std::string::npos);

  bicf_corpus* source = nullptr;
  ASSERT_EQ(bicf_corpus_load((dir / "fx/source.jsonl").c_str(), "en", &source), BICF_OK);
  EXPECT_EQ(bicf_corpus_size(source), 150u);
  char* stats = nullptr;
  ASSERT_EQ(bicf_corpus_stats(source, &stats), BICF_OK);
  const std::string st = take(stats);
  EXPECT_NE(st.find("\"dialogues\": null"), std::string::npos);

  bicf_freq_lexicon* freq = nullptr;
  ASSERT_EQ(bicf_freq_build(source, cfg, &freq), BICF_OK);
  EXPECT_GT(bicf_freq_size(freq), 0u);
  bicf_conf_lexicon* conf = nullptr;
  char* ll = nullptr;
  ASSERT_EQ(bicf_conf_train((dir / "fx/parallel.txt").c_str(), cfg, &conf, &ll), BICF_OK);
  EXPECT_NE(take(ll).find("log_likelihood"), std::string::npos);
  bicf_mixed* mixed = nullptr;
  ASSERT_EQ(bicf_mix(source, freq, conf, cfg, &mixed), BICF_OK);
  char* violation = reinterpret_cast<char*>(1);
  ASSERT_EQ(bicf_mixed_verify(mixed, source, &violation), BICF_OK);
  EXPECT_EQ(violation, nullptr);
  ASSERT_EQ(bicf_mixed_save(mixed, (dir / "m.jsonl").c_str(), (dir / "m.log").c_str(), nullptr),
            BICF_OK);

  bicf_config* fixture = nullptr;
  ASSERT_EQ(bicf_config_load((dir / "fx/fixture.toml").c_str(), &fixture), BICF_OK);
  ASSERT_EQ(bicf_config_set(fixture, "out_dir", (dir / "run").c_str()), BICF_OK);
  char* report = nullptr;
  ASSERT_EQ(bicf_train(fixture, &report), BICF_OK) << bicf_last_error();
  const std::string trained = take(report);
  EXPECT_EQ(slurp(dir / "run/report.json"), trained);
  EXPECT_TRUE(fs::exists(dir / "run/mixed.jsonl"));

  bicf_model* model = nullptr;
  ASSERT_EQ(bicf_model_load((dir / "run/model.ckpt").c_str(), &model), BICF_OK);
  bicf_corpus* test = nullptr;
  ASSERT_EQ(bicf_corpus_load((dir / "fx/target_test.jsonl").c_str(), "target", &test), BICF_OK);
  char* evaluated = nullptr;
  ASSERT_EQ(bicf_model_eval(model, test, &evaluated), BICF_OK);
  EXPECT_EQ(take(evaluated), trained);
  char* pred = nullptr;
  ASSERT_EQ(bicf_model_predict(model, "foo bar", &pred), BICF_OK);
  const std::string p = take(pred);
  EXPECT_NE(p.find("\"tokens\":[\"foo\",\"bar\"]"), std::string::npos) << p;
  EXPECT_NE(p.find("\"tags\":["), std::string::npos) << p;

  bicf_model_free(model);
  bicf_corpus_free(test);
  bicf_config_free(fixture);
  bicf_mixed_free(mixed);
  bicf_conf_free(conf);
  bicf_freq_free(freq);
  bicf_corpus_free(source);
  bicf_config_free(cfg);
  fs::remove_all(dir);
}

TEST(CApi, ErrorsSurfaceAsCodes) {
  const fs::path dir = scratch("bicf_capi_errors");
  {
    std::ofstream out(dir / "bad.jsonl");
    out << "{\"tokens\":[\"a\"],\"tags\":[\"O\"],\"intents\":[],\"speaker\":\"user\",\"domain\":\"d\"}\n"
        << "not json\n";
  }
  bicf_corpus* c = nullptr;
  EXPECT_EQ(bicf_corpus_load((dir / "bad.jsonl").c_str(), "", &c), BICF_E_PARSE);
  EXPECT_NE(std::string(bicf_last_error()).find(":2:"), std::string::npos);
  {
    std::ofstream out(dir / "empty.jsonl");
  }
  ASSERT_EQ(bicf_corpus_load((dir / "empty.jsonl").c_str(), "", &c), BICF_OK);
  bicf_freq_lexicon* f = nullptr;
  EXPECT_EQ(bicf_freq_build(c, nullptr, &f), BICF_E_EMPTY_CORPUS);
  bicf_corpus_free(c);

  bicf_config* cfg = nullptr;
  ASSERT_EQ(bicf_config_new(&cfg), BICF_OK);
  ASSERT_EQ(bicf_config_set(cfg, "mode", "mt_import"), BICF_OK);
  ASSERT_EQ(bicf_config_set(cfg, "data.target_test", (dir / "empty.jsonl").c_str()), BICF_OK);
  ASSERT_EQ(bicf_config_set(cfg, "data.target_train", (dir / "empty.jsonl").c_str()), BICF_OK);
  EXPECT_EQ(bicf_train(cfg, nullptr), BICF_E_MISSING_IMPORT);
  EXPECT_EQ(bicf_sweep(cfg, "10,x", nullptr, nullptr, 1, nullptr), BICF_E_INVALID_ARGUMENT);

  double kappa = 0;
  int degenerate = 0;
  const size_t counts[] = {2, 0, 0, 2, 1, 1, 1, 1};
  ASSERT_EQ(bicf_fleiss_kappa(counts, 4, 2, &kappa, &degenerate), BICF_OK);
  EXPECT_NEAR(kappa, 0.0, 1e-15);
  EXPECT_EQ(degenerate, 0);
  EXPECT_EQ(bicf_fleiss_kappa(counts, 0, 2, &kappa, nullptr), BICF_E_INVALID_ARGUMENT);
  bicf_config_free(cfg);
  fs::remove_all(dir);
}
