#include "bicf/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <sstream>

#include "bicf/error.hpp"

namespace bicf {

const char* run_mode_name(RunMode mode) {
  switch (mode) {
    case RunMode::kBicf: return "bicf";
    case RunMode::kMlen: return "mlen";
    case RunMode::kMtImport: return "mt_import";
    case RunMode::kTargetOnly: return "target_only";
  }
  return "?";
}

RunMode parse_run_mode(const std::string& name) {
  for (RunMode m : {RunMode::kBicf, RunMode::kMlen, RunMode::kMtImport, RunMode::kTargetOnly}) {
    if (name == run_mode_name(m)) return m;
  }
  throw Error(ErrorCode::kConfig, "unknown mode '" + name + "'");
}

namespace {

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const char* expected) {
  throw Error(ErrorCode::kConfig,
              "bad value '" + value + "' for " + key + " (expected " + expected + ")");
}

std::string real_text(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  if (std::strtod(buf, nullptr) != v) std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    bad_value(key, v, "a non-negative integer");
  }
  return out;
}

double to_real(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double out = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size()) bad_value(key, v, "a number");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad_value(key, v, "true or false");
}

struct Key {
  const char* name;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define BICF_SIZE(NAME, FIELD)                                                         \
  Key {                                                                                \
    NAME, [](RunConfig& c, const std::string& k, const std::string& v) {               \
      c.FIELD = static_cast<std::size_t>(to_u64(k, v));                                \
    },                                                                                 \
        [](const RunConfig& c) { return std::to_string(c.FIELD); }                       \
  }
#define BICF_REAL(NAME, FIELD)                                                              \
  Key {                                                                                     \
    NAME, [](RunConfig& c, const std::string& k, const std::string& v) { c.FIELD = to_real(k, v); }, \
        [](const RunConfig& c) { return real_text(c.FIELD); }                                 \
  }
#define BICF_BOOL(NAME, FIELD)                                                              \
  Key {                                                                                     \
    NAME, [](RunConfig& c, const std::string& k, const std::string& v) { c.FIELD = to_bool(k, v); }, \
        [](const RunConfig& c) { return std::string(c.FIELD ? "true" : "false"); }            \
  }
#define BICF_TEXT(NAME, FIELD)                                                      \
  Key {                                                                             \
    NAME, [](RunConfig& c, const std::string&, const std::string& v) { c.FIELD = v; }, \
        [](const RunConfig& c) { return c.FIELD; }                                    \
  }

const std::vector<Key>& key_table() {
  static const std::vector<Key> keys = {
      Key{"mode", [](RunConfig& c, const std::string&, const std::string& v) {
            c.mode = parse_run_mode(v);
          },
          [](const RunConfig& c) { return std::string(run_mode_name(c.mode)); }},
      Key{"seed", [](RunConfig& c, const std::string& k, const std::string& v) {
            c.seed = to_u64(k, v);
          },
          [](const RunConfig& c) { return std::to_string(c.seed); }},
      BICF_TEXT("out_dir", out_dir),
      Key{"target_feed",
          [](RunConfig& c, const std::string& k, const std::string& v) {
            if (v == "all") {
              c.target_feed.reset();
            } else {
              c.target_feed = static_cast<std::size_t>(to_u64(k, v));
            }
          },
          [](const RunConfig& c) {
            return c.target_feed ? std::to_string(*c.target_feed) : std::string("all");
          }},
      BICF_TEXT("data.source", data.source),
      BICF_TEXT("data.target_train", data.target_train),
      BICF_TEXT("data.target_test", data.target_test),
      BICF_TEXT("data.target_dev", data.target_dev),
      BICF_TEXT("data.parallel", data.parallel),
      BICF_TEXT("data.pharaoh", data.pharaoh),
      BICF_TEXT("data.frequency", data.frequency),
      BICF_TEXT("data.confidence", data.confidence),
      BICF_TEXT("data.import", data.import_corpus),
      BICF_TEXT("data.label_map", data.label_map),
      BICF_REAL("mix.lambda_freq", thresh.lambda_freq),
      BICF_REAL("mix.lambda_conf", thresh.lambda_conf),
      BICF_REAL("mix.theta", thresh.theta),
      Key{"mix.thresh_mode",
          [](RunConfig& c, const std::string& k, const std::string& v) {
            if (v == "fraction") c.thresh.thresh_mode = ThreshMode::kFraction;
            else if (v == "count") c.thresh.thresh_mode = ThreshMode::kCount;
            else if (v == "score") c.thresh.thresh_mode = ThreshMode::kScore;
            else bad_value(k, v, "fraction, count or score");
          },
          [](const RunConfig& c) {
            switch (c.thresh.thresh_mode) {
              case ThreshMode::kCount: return std::string("count");
              case ThreshMode::kScore: return std::string("score");
              default: return std::string("fraction");
            }
          }},
      Key{"mix.fusion_mode",
          [](RunConfig& c, const std::string& k, const std::string& v) {
            if (v == "intersection") c.thresh.fusion_mode = FusionMode::kIntersection;
            else if (v == "union") c.thresh.fusion_mode = FusionMode::kUnion;
            else bad_value(k, v, "intersection or union");
          },
          [](const RunConfig& c) {
            return std::string(c.thresh.fusion_mode == FusionMode::kUnion ? "union"
                                                                          : "intersection");
          }},
      Key{"mix.tfidf",
          [](RunConfig& c, const std::string& k, const std::string& v) {
            if (v == "max") c.tfidf = TfidfAggregation::kMax;
            else if (v == "mean") c.tfidf = TfidfAggregation::kMean;
            else bad_value(k, v, "max or mean");
          },
          [](const RunConfig& c) {
            return std::string(c.tfidf == TfidfAggregation::kMean ? "mean" : "max");
          }},
      BICF_SIZE("align.iterations", align_iterations),
      BICF_BOOL("align.random_init", align_random_init),
      BICF_REAL("train.eta_top", training.eta_top),
      BICF_REAL("train.xi", training.xi),
      BICF_REAL("train.stage1_xi", training.stage1_xi),
      BICF_SIZE("train.batch_size", training.batch_size),
      BICF_SIZE("train.max_epochs", training.max_epochs),
      BICF_SIZE("train.patience", training.patience),
      BICF_REAL("train.dev_fraction", training.dev_fraction),
      BICF_SIZE("model.d_emb", model.d_emb),
      BICF_SIZE("model.hidden", model.hidden),
      BICF_SIZE("model.lstm_layers", model.lstm_layers),
      BICF_REAL("model.dropout", model.dropout),
      Key{"model.intent_mode",
          [](RunConfig& c, const std::string& k, const std::string& v) {
            if (v == "multilabel") c.model.intent_mode = IntentMode::kMultiLabel;
            else if (v == "singlelabel") c.model.intent_mode = IntentMode::kSingleLabel;
            else bad_value(k, v, "multilabel or singlelabel");
          },
          [](const RunConfig& c) {
            return std::string(c.model.intent_mode == IntentMode::kSingleLabel ? "singlelabel"
                                                                              : "multilabel");
          }},
      BICF_BOOL("model.hard_bio_mask", model.hard_bio_mask),
      BICF_SIZE("synth.vocab_size", synth.vocab_size),
      BICF_SIZE("synth.n_intents", synth.n_intents),
      BICF_SIZE("synth.n_slots", synth.n_slots),
      BICF_SIZE("synth.n_domains", synth.n_domains),
      BICF_SIZE("synth.n_source", synth.n_source),
      BICF_SIZE("synth.n_target", synth.n_target),
      BICF_SIZE("synth.n_test", synth.n_test),
      BICF_SIZE("synth.n_parallel", synth.n_parallel),
      BICF_SIZE("synth.templates_per_domain", synth.templates_per_domain),
      BICF_SIZE("synth.max_slots_per_template", synth.max_slots_per_template),
      BICF_SIZE("synth.max_fillers_per_template", synth.max_fillers_per_template),
      BICF_REAL("synth.multiword_prob", synth.multiword_prob),
      BICF_REAL("synth.multi_intent_prob", synth.multi_intent_prob),
      BICF_REAL("synth.system_turn_prob", synth.system_turn_prob),
      BICF_TEXT("synth.source_language", synth.source_language),
      BICF_TEXT("synth.target_language", synth.target_language),
  };
  return keys;
}

#undef BICF_SIZE
#undef BICF_REAL
#undef BICF_BOOL
#undef BICF_TEXT

const Key& find_key(const std::string& name) {
  for (const auto& k : key_table()) {
    if (name == k.name) return k;
  }
  throw Error(ErrorCode::kConfig, "unknown config key '" + name + "'");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Strips a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& line) {
  char quote = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quote) {
      if (ch == '\\' && quote == '"') ++i;
      else if (ch == quote) quote = 0;
    } else if (ch == '"' || ch == '\'') {
      quote = ch;
    } else if (ch == '#') {
      return line.substr(0, i);
    }
  }
  return line;
}

std::string unquote(const std::string& raw, std::size_t line, const std::string& source) {
  auto fail = [&](const std::string& why) { throw ParseError(line, why, source); };
  if (raw.empty()) fail("missing value");
  const char q = raw.front();
  if (q != '"' && q != '\'') return raw;
  if (raw.size() < 2 || raw.back() != q) fail("unterminated string");
  const std::string body = raw.substr(1, raw.size() - 2);
  if (q == '\'') return body;
  std::string out;
  for (std::size_t i = 0; i < body.size(); ++i) {
    if (body[i] != '\\') {
      out += body[i];
      continue;
    }
    if (++i == body.size()) fail("dangling escape");
    switch (body[i]) {
      case 'n': out += '\n'; break;
      case 't': out += '\t'; break;
      case '"': out += '"'; break;
      case '\\': out += '\\'; break;
      default: fail(std::string("unsupported escape \\") + body[i]);
    }
  }
  return out;
}

}  // namespace

void config_set(RunConfig& config, const std::string& key, const std::string& value) {
  find_key(key).set(config, key, value);
}

std::string config_get(const RunConfig& config, const std::string& key) {
  return find_key(key).get(config);
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& k : key_table()) out.emplace_back(k.name);
  return out;
}

void config_apply_override(RunConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw Error(ErrorCode::kConfig, "override '" + assignment + "' is not key=value");
  }
  config_set(config, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

RunConfig parse_config(std::istream& in, const std::string& source) {
  RunConfig config;
  std::string section, raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(line_no, "malformed section header", source);
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected key = value", source);
    std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ParseError(line_no, "empty key", source);
    if (!section.empty()) key = section + "." + key;
    const std::string value = unquote(trim(line.substr(eq + 1)), line_no, source);
    try {
      config_set(config, key, value);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kConfig) throw;
      throw Error(ErrorCode::kConfig, (source.empty() ? "line " : source + ":") +
                                          std::to_string(line_no) + ": " + e.what());
    }
  }
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config " + path.string());
  return parse_config(in, path.string());
}

std::string dump_config(const RunConfig& config) {
  std::ostringstream out;
  for (const auto& k : key_table()) {
    out << k.name << " = \"";
    for (char ch : k.get(config)) {
      if (ch == '"' || ch == '\\') out << '\\';
      out << ch;
    }
    out << "\"\n";
  }
  return out.str();
}

std::string config_hash(const RunConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& k : key_table()) {
    if (std::string_view(k.name) == "out_dir") continue;
    const std::string line = std::string(k.name) + "=" + k.get(config) + "\n";
    for (unsigned char ch : line) {
      h ^= ch;
      h *= 0x100000001b3ULL;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace bicf
