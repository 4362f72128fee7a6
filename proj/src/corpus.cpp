#include "bicf/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "bicf/error.hpp"

namespace bicf {

using nlohmann::json;

std::string normalize(std::string_view surface) {
  std::string out(surface);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

Token::Token(std::string s) : surface(std::move(s)) {
  normalized = normalize(surface);
}

const char* speaker_name(Speaker s) {
  return s == Speaker::kSystem ? "system" : "user";
}

std::vector<std::string> Utterance::normalized_tokens() const {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.normalized);
  return out;
}

std::size_t AnnotatedCorpus::token_count() const {
  std::size_t n = 0;
  for (const auto& u : utterances) n += u.size();
  return n;
}

void AnnotatedCorpus::absorb_labels() {
  for (const auto& u : utterances) {
    intent_inventory.insert(u.intents.begin(), u.intents.end());
    for (const auto& tag : u.slot_tags) {
      auto parsed = parse_tag(tag);
      if (parsed.kind != TagKind::kOutside) {
        slot_inventory.insert(parsed.slot_type);
      }
    }
  }
}

ParsedTag parse_tag(std::string_view tag) {
  if (tag == "O") return {TagKind::kOutside, ""};
  if (tag.size() > 2 && tag[1] == '-' && (tag[0] == 'B' || tag[0] == 'I')) {
    return {tag[0] == 'B' ? TagKind::kBegin : TagKind::kInside,
            std::string(tag.substr(2))};
  }
  throw ValidationError("malformed BIO tag '" + std::string(tag) + "'");
}

namespace {

// Position of the first I-X not continuing a span of type X, or npos.
std::size_t first_orphan(const std::vector<std::string>& tags) {
  std::string open;  // type of the span covering the previous token
  for (std::size_t i = 0; i < tags.size(); ++i) {
    auto p = parse_tag(tags[i]);
    switch (p.kind) {
      case TagKind::kOutside: open.clear(); break;
      case TagKind::kBegin: open = p.slot_type; break;
      case TagKind::kInside:
        if (open != p.slot_type) return i;
        break;
    }
  }
  return std::string::npos;
}

}  // namespace

void check_bio(const std::vector<std::string>& tags) {
  auto pos = first_orphan(tags);
  if (pos != std::string::npos) {
    throw BioError("orphan tag '" + tags[pos] + "' at position " +
                   std::to_string(pos));
  }
}

bool is_bio_valid(const std::vector<std::string>& tags) {
  try {
    return first_orphan(tags) == std::string::npos;
  } catch (const ValidationError&) {
    return false;
  }
}

std::vector<std::string> repair_bio(std::vector<std::string> tags) {
  std::string open;
  for (auto& tag : tags) {
    auto p = parse_tag(tag);
    if (p.kind == TagKind::kInside && open != p.slot_type) {
      tag = "B-" + p.slot_type;
    }
    open = p.kind == TagKind::kOutside ? std::string() : p.slot_type;
  }
  return tags;
}

std::vector<SlotSpan> spans_from_bio(const std::vector<std::string>& tags) {
  check_bio(tags);
  std::vector<SlotSpan> spans;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    auto p = parse_tag(tags[i]);
    if (p.kind == TagKind::kBegin) {
      spans.push_back({i, i + 1, p.slot_type});
    } else if (p.kind == TagKind::kInside) {
      spans.back().end = i + 1;
    }
  }
  return spans;
}

std::vector<std::string> bio_from_spans(const std::vector<SlotSpan>& spans,
                                        std::size_t length) {
  std::vector<std::string> tags(length, "O");
  std::size_t cursor = 0;
  for (const auto& s : spans) {
    if (s.start < cursor || s.start >= s.end || s.end > length) {
      throw ValidationError("span list is unsorted, overlapping or out of range");
    }
    tags[s.start] = "B-" + s.slot_type;
    for (std::size_t i = s.start + 1; i < s.end; ++i) tags[i] = "I-" + s.slot_type;
    cursor = s.end;
  }
  return tags;
}

namespace {

void validate_utterance(const Utterance& u, const AnnotatedCorpus& corpus,
                        const std::string& where) {
  if (u.tokens.empty()) throw ValidationError(where + ": utterance has no tokens");
  if (u.tokens.size() != u.slot_tags.size()) {
    throw ValidationError(where + ": " + std::to_string(u.tokens.size()) +
                          " tokens but " + std::to_string(u.slot_tags.size()) +
                          " tags");
  }
  for (const auto& t : u.tokens) {
    if (t.surface.empty() ||
        t.surface.find_first_of(" \t\r\n\v\f") != std::string::npos) {
      throw ValidationError(where + ": empty or whitespace-bearing token");
    }
    if (t.normalized != normalize(t.surface)) {
      throw ValidationError(where + ": token normalisation out of sync");
    }
  }
  try {
    check_bio(u.slot_tags);
  } catch (const BioError& e) {
    throw ValidationError(where + ": " + e.what());
  }
  for (const auto& intent : u.intents) {
    if (!corpus.intent_inventory.contains(intent)) {
      throw ValidationError(where + ": intent '" + intent +
                            "' missing from inventory");
    }
  }
  for (const auto& tag : u.slot_tags) {
    auto p = parse_tag(tag);
    if (p.kind != TagKind::kOutside && !corpus.slot_inventory.contains(p.slot_type)) {
      throw ValidationError(where + ": slot type '" + p.slot_type +
                            "' missing from inventory");
    }
  }
}

std::vector<std::string> string_array(const json& record, const char* key,
                                      std::size_t line) {
  auto it = record.find(key);
  if (it == record.end()) {
    throw ParseError(line, std::string("missing field '") + key + "'");
  }
  if (!it->is_array()) {
    throw ParseError(line, std::string("field '") + key + "' is not an array");
  }
  std::vector<std::string> out;
  for (const auto& v : *it) {
    if (!v.is_string()) {
      throw ParseError(line, std::string("field '") + key +
                                 "' holds a non-string element");
    }
    out.push_back(v.get<std::string>());
  }
  return out;
}

Utterance parse_record(const std::string& text, std::size_t line) {
  json record;
  try {
    record = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(line, std::string("invalid JSON: ") + e.what());
  }
  if (!record.is_object()) throw ParseError(line, "record is not an object");

  Utterance u;
  for (auto& s : string_array(record, "tokens", line)) {
    u.tokens.emplace_back(std::move(s));
  }
  u.slot_tags = string_array(record, "tags", line);
  for (auto& s : string_array(record, "intents", line)) u.intents.insert(std::move(s));

  auto speaker = record.find("speaker");
  if (speaker == record.end() || !speaker->is_string()) {
    throw ParseError(line, "missing or non-string field 'speaker'");
  }
  if (*speaker == "user") {
    u.speaker = Speaker::kUser;
  } else if (*speaker == "system") {
    u.speaker = Speaker::kSystem;
  } else {
    throw ParseError(line, "speaker must be \"user\" or \"system\"");
  }
  auto domain = record.find("domain");
  if (domain == record.end() || !domain->is_string()) {
    throw ParseError(line, "missing or non-string field 'domain'");
  }
  u.domain = domain->get<std::string>();
  if (auto d = record.find("dialogue_id"); d != record.end()) {
    if (!d->is_string()) throw ParseError(line, "dialogue_id must be a string");
    u.dialogue_id = d->get<std::string>();
  }
  for (const auto& tag : u.slot_tags) {
    try {
      parse_tag(tag);
    } catch (const ValidationError& e) {
      throw ParseError(line, e.what());
    }
  }
  return u;
}

}  // namespace

void validate(const AnnotatedCorpus& corpus) {
  for (std::size_t i = 0; i < corpus.utterances.size(); ++i) {
    validate_utterance(corpus.utterances[i], corpus,
                       "utterance " + std::to_string(i));
  }
}

AnnotatedCorpus read_corpus(std::istream& in, std::string language_tag) {
  AnnotatedCorpus corpus;
  corpus.language_tag = std::move(language_tag);
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    Utterance u = parse_record(text, line);
    if (u.tokens.empty()) {
      throw ValidationError("line " + std::to_string(line) + ": utterance has no tokens");
    }
    if (u.tokens.size() != u.slot_tags.size()) {
      throw ValidationError("line " + std::to_string(line) + ": " +
                            std::to_string(u.tokens.size()) + " tokens but " +
                            std::to_string(u.slot_tags.size()) + " tags");
    }
    try {
      check_bio(u.slot_tags);
    } catch (const BioError& e) {
      throw ValidationError("line " + std::to_string(line) + ": " + e.what());
    }
    for (const auto& t : u.tokens) {
      if (t.surface.empty() ||
          t.surface.find_first_of(" \t\r\n\v\f") != std::string::npos) {
        throw ValidationError("line " + std::to_string(line) +
                              ": empty or whitespace-bearing token");
      }
    }
    corpus.utterances.push_back(std::move(u));
  }
  corpus.absorb_labels();
  return corpus;
}

std::string utterance_to_json_line(const Utterance& u) {
  // Field order is fixed so that output bytes are stable.
  json tokens = json::array();
  for (const auto& t : u.tokens) tokens.push_back(t.surface);
  json tags = u.slot_tags;
  json intents = json::array();
  for (const auto& i : u.intents) intents.push_back(i);
  std::string out = "{\"tokens\":" + tokens.dump() + ",\"tags\":" + tags.dump() +
                    ",\"intents\":" + intents.dump() + ",\"speaker\":" +
                    json(speaker_name(u.speaker)).dump() +
                    ",\"domain\":" + json(u.domain).dump();
  if (u.dialogue_id) out += ",\"dialogue_id\":" + json(*u.dialogue_id).dump();
  out += "}";
  return out;
}

void write_corpus(std::ostream& out, const AnnotatedCorpus& corpus) {
  for (const auto& u : corpus.utterances) out << utterance_to_json_line(u) << '\n';
}

AnnotatedCorpus load_corpus(const std::filesystem::path& path,
                            std::string language_tag) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open corpus file " + path.string());
  try {
    return read_corpus(in, std::move(language_tag));
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.reason(), path.string());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void save_corpus(const AnnotatedCorpus& corpus,
                 const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write corpus file " + path.string());
  write_corpus(out, corpus);
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

}  // namespace bicf
