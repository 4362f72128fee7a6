#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace bicf {

// Simple ASCII/byte-wise lowercase; multi-byte UTF-8 sequences pass through.
std::string normalize(std::string_view surface);

struct Token {
  std::string surface;
  std::string normalized;

  Token() = default;
  explicit Token(std::string s);
  bool operator==(const Token&) const = default;
};

enum class Speaker { kUser, kSystem };

const char* speaker_name(Speaker s);

struct Utterance {
  std::vector<Token> tokens;
  std::set<std::string> intents;
  std::vector<std::string> slot_tags;
  Speaker speaker = Speaker::kUser;
  std::string domain;
  std::optional<std::string> dialogue_id;

  std::size_t size() const { return tokens.size(); }
  std::vector<std::string> normalized_tokens() const;
  bool operator==(const Utterance&) const = default;
};

struct SlotSpan {
  std::size_t start = 0;  // inclusive
  std::size_t end = 0;    // exclusive
  std::string slot_type;

  auto operator<=>(const SlotSpan&) const = default;
};

struct AnnotatedCorpus {
  std::vector<Utterance> utterances;
  std::set<std::string> intent_inventory;
  std::set<std::string> slot_inventory;
  std::string language_tag;

  std::size_t size() const { return utterances.size(); }
  bool empty() const { return utterances.empty(); }
  std::size_t token_count() const;

  // Adds every label used by the utterances to the inventories; declared
  // labels already present are kept.
  void absorb_labels();
  bool operator==(const AnnotatedCorpus&) const = default;
};

// Tag helpers. Tags are "O", "B-<type>" or "I-<type>".
enum class TagKind { kOutside, kBegin, kInside };
struct ParsedTag {
  TagKind kind;
  std::string slot_type;
};
ParsedTag parse_tag(std::string_view tag);  // throws ValidationError

// Throws BioError naming the first orphan I-X.
void check_bio(const std::vector<std::string>& tags);
bool is_bio_valid(const std::vector<std::string>& tags);
// Rewrites orphan I-X as B-X.
std::vector<std::string> repair_bio(std::vector<std::string> tags);

std::vector<SlotSpan> spans_from_bio(const std::vector<std::string>& tags);
// Spans must be sorted, non-overlapping and inside [0, length).
std::vector<std::string> bio_from_spans(const std::vector<SlotSpan>& spans,
                                        std::size_t length);

// Checks every utterance invariant; throws ValidationError.
void validate(const AnnotatedCorpus& corpus);

// JSONL: one record per line with tokens, tags, intents, speaker, domain
// and an optional dialogue_id.
AnnotatedCorpus read_corpus(std::istream& in, std::string language_tag = "");
void write_corpus(std::ostream& out, const AnnotatedCorpus& corpus);
AnnotatedCorpus load_corpus(const std::filesystem::path& path,
                            std::string language_tag = "");
void save_corpus(const AnnotatedCorpus& corpus,
                 const std::filesystem::path& path);

std::string utterance_to_json_line(const Utterance& u);

}  // namespace bicf
