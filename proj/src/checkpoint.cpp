#include "bicf/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "bicf/error.hpp"

namespace bicf {

namespace {

constexpr char kMagic[8] = {'B', 'I', 'C', 'F', 'C', 'K', 'P', 'T'};

Error corrupt(const std::string& what) { return Error(ErrorCode::kParse, what); }

template <typename U>
void put_le(std::ostream& out, U value) {
  char bytes[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  }
  out.write(bytes, sizeof(U));
}

template <typename U>
U get_le(std::istream& in, const char* what) {
  unsigned char bytes[sizeof(U)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(U))) {
    throw corrupt(std::string("truncated checkpoint (") + what + ")");
  }
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(bytes[i]) << (8 * i);
  return value;
}

const char* intent_mode_name(IntentMode m) {
  return m == IntentMode::kMultiLabel ? "multilabel" : "singlelabel";
}

IntentMode intent_mode_from(const std::string& s) {
  if (s == "multilabel") return IntentMode::kMultiLabel;
  if (s == "singlelabel") return IntentMode::kSingleLabel;
  throw corrupt("unknown intent mode '" + s + "' in checkpoint");
}

}  // namespace

void write_checkpoint(std::ostream& out, const JointModel& model,
                      const CheckpointMetadata& metadata) {
  using nlohmann::ordered_json;
  const auto& hp = model.hyper();
  ordered_json header;
  header["hyper"] = {{"d_emb", hp.d_emb},
                     {"hidden", hp.hidden},
                     {"lstm_layers", hp.lstm_layers},
                     {"dropout", hp.dropout},
                     {"intent_mode", intent_mode_name(hp.intent_mode)},
                     {"hard_bio_mask", hp.hard_bio_mask}};
  header["intents"] = model.intents();
  header["slot_types"] = model.slot_types();
  header["tags"] = model.tags();
  header["vocab"] = model.vocab().words();
  header["updates"] = model.updates();
  ordered_json tensors = ordered_json::array();
  for (const auto& t : model.tensors()) {
    tensors.push_back({{"name", t.name}, {"rows", t.rows}, {"cols", t.cols}});
  }
  header["tensors"] = std::move(tensors);
  ordered_json meta = ordered_json::object();
  for (const auto& [k, v] : metadata) meta[k] = v;
  header["metadata"] = std::move(meta);
  const std::string text = header.dump();

  out.write(kMagic, sizeof kMagic);
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& t : model.tensors()) {
    for (double v : t.values) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  if (!out) throw Error(ErrorCode::kIo, "failed writing checkpoint");
}

void save_checkpoint(const std::filesystem::path& path, const JointModel& model,
                     const CheckpointMetadata& metadata) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  write_checkpoint(out, model, metadata);
}

Checkpoint read_checkpoint(std::istream& in) {
  char magic[sizeof kMagic];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw corrupt("not a checkpoint (bad magic)");
  }
  const auto version = get_le<std::uint32_t>(in, "version");
  if (version != kCheckpointVersion) {
    throw corrupt("unsupported checkpoint version " + std::to_string(version));
  }
  const auto header_len = get_le<std::uint64_t>(in, "header length");
  if (header_len > (std::uint64_t{1} << 32)) throw corrupt("implausible header length");
  std::string text(header_len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(header_len))) {
    throw corrupt("truncated checkpoint (header)");
  }
  try {
    const auto header = nlohmann::json::parse(text);
    const auto& h = header.at("hyper");
    Hyperparameters hp;
    hp.d_emb = h.at("d_emb").get<std::size_t>();
    hp.hidden = h.at("hidden").get<std::size_t>();
    hp.lstm_layers = h.at("lstm_layers").get<std::size_t>();
    hp.dropout = h.at("dropout").get<double>();
    hp.intent_mode = intent_mode_from(h.at("intent_mode").get<std::string>());
    hp.hard_bio_mask = h.at("hard_bio_mask").get<bool>();
    const auto words = header.at("vocab").get<std::vector<std::string>>();
    if (words.empty() || words.front() != Vocabulary::kUnkWord) {
      throw corrupt("checkpoint vocabulary must start with the unknown-word entry");
    }
    Vocabulary vocab(std::set<std::string>(words.begin() + 1, words.end()));
    if (vocab.words() != words) throw corrupt("checkpoint vocabulary not canonical");
    JointModel model = JointModel::zeros(hp, std::move(vocab),
                                         header.at("intents").get<std::vector<std::string>>(),
                                         header.at("slot_types").get<std::vector<std::string>>());
    if (header.at("tags").get<std::vector<std::string>>() != model.tags()) {
      throw corrupt("checkpoint tag list disagrees with slot types");
    }
    model.set_updates(header.at("updates").get<std::uint64_t>());
    const auto& listed = header.at("tensors");
    auto& tensors = model.tensors();
    if (listed.size() != tensors.size()) throw corrupt("checkpoint tensor count mismatch");
    for (std::size_t i = 0; i < tensors.size(); ++i) {
      if (listed[i].at("name").get<std::string>() != tensors[i].name ||
          listed[i].at("rows").get<std::size_t>() != tensors[i].rows ||
          listed[i].at("cols").get<std::size_t>() != tensors[i].cols) {
        throw corrupt("checkpoint tensor '" + tensors[i].name + "' has unexpected shape");
      }
    }
    for (auto& t : tensors) {
      for (auto& v : t.values) {
        v = static_cast<double>(std::bit_cast<float>(get_le<std::uint32_t>(in, t.name.c_str())));
      }
    }
    in.peek();
    if (!in.eof()) throw corrupt("trailing bytes after checkpoint");
    CheckpointMetadata meta;
    for (const auto& [k, v] : header.at("metadata").items()) meta[k] = v.get<std::string>();
    return Checkpoint{std::move(model), std::move(meta)};
  } catch (const nlohmann::json::exception& e) {
    throw corrupt(std::string("bad checkpoint header: ") + e.what());
  }
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  try {
    return read_checkpoint(in);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kParse) throw;
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
}

}  // namespace bicf
