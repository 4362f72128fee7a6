#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <sstream>

#include "bicf/checkpoint.hpp"
#include "bicf/error.hpp"

using namespace bicf;

namespace {

JointModel sample_model(std::size_t layers = 2) {
  Hyperparameters hp;
  hp.d_emb = 5;
  hp.hidden = 3;
  hp.lstm_layers = layers;
  hp.dropout = 0.25;
  hp.intent_mode = IntentMode::kSingleLabel;
  hp.hard_bio_mask = true;
  auto m = JointModel::create(hp, Vocabulary({"halo", "dunia", "meja"}), {"greet", "book"},
                              {"obj", "time"}, 17);
  m.set_updates(42);
  m.quantize_to_float();
  return m;
}

std::string serialize(const JointModel& m, const CheckpointMetadata& meta = {}) {
  std::ostringstream out;
  write_checkpoint(out, m, meta);
  return out.str();
}

Checkpoint parse(const std::string& bytes) {
  std::istringstream in(bytes);
  return read_checkpoint(in);
}

}  // namespace

TEST(Checkpoint, RoundTripIsExactAfterQuantisation) {
  for (std::size_t layers : {1u, 2u}) {
    const JointModel m = sample_model(layers);
    const CheckpointMetadata meta{{"seed", "3"}, {"mode", "bicf"}};
    const std::string bytes = serialize(m, meta);
    const Checkpoint back = parse(bytes);
    EXPECT_EQ(back.model, m);
    EXPECT_EQ(back.metadata, meta);
    EXPECT_EQ(back.model.updates(), 42u);
    EXPECT_EQ(serialize(back.model, back.metadata), bytes);
  }
}

TEST(Checkpoint, HeaderLayout) {
  const std::string bytes = serialize(sample_model());
  ASSERT_GE(bytes.size(), 20u);
  EXPECT_EQ(bytes.substr(0, 8), "BICFCKPT");
  std::uint32_t version = 0;
  std::memcpy(&version, bytes.data() + 8, 4);
  EXPECT_EQ(version, kCheckpointVersion);
  std::uint64_t header = 0;
  std::memcpy(&header, bytes.data() + 12, 8);
  EXPECT_EQ(bytes[20], '{');
  const std::size_t payload = bytes.size() - 20 - header;
  EXPECT_EQ(payload, sample_model().parameter_count() * 4);
}

TEST(Checkpoint, UnquantisedModelRoundsOnWrite) {
  Hyperparameters hp;
  hp.d_emb = hp.hidden = 2;
  auto m = JointModel::create(hp, Vocabulary({"a"}), {"i"}, {"x"}, 1);
  m.tensors()[0].values[0] = 0.1;
  const Checkpoint back = parse(serialize(m));
  EXPECT_EQ(back.model.tensors()[0].values[0], static_cast<double>(0.1f));
}

TEST(Checkpoint, CorruptionIsDetected) {
  const std::string good = serialize(sample_model());
  auto expect_parse_error = [](const std::string& bytes) {
    try {
      parse(bytes);
      FAIL() << "accepted corrupt checkpoint";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kParse);
    }
  };
  std::string magic = good;
  magic[0] = 'X';
  expect_parse_error(magic);
  std::string version = good;
  version[8] = 9;
  expect_parse_error(version);
  expect_parse_error(good.substr(0, good.size() - 3));
  expect_parse_error(good.substr(0, 15));
  expect_parse_error(good + "x");
  std::string header = good;
  header[21] = '#';
  expect_parse_error(header);
  expect_parse_error("");
}

TEST(Checkpoint, FileRoundTripAndMissingFile) {
  const auto path = std::filesystem::temp_directory_path() / "bicf_test_ckpt.bin";
  const JointModel m = sample_model();
  save_checkpoint(path, m, {{"k", "v"}});
  EXPECT_EQ(load_checkpoint(path).model, m);
  std::filesystem::remove(path);
  try {
    load_checkpoint(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
  }
}
