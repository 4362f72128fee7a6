#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "bicf/corpus.hpp"
#include "bicf/crf.hpp"

namespace bicf {

// Word <-> index bijection; index 0 is reserved for unknown words.
class Vocabulary {
 public:
  static constexpr std::size_t kUnk = 0;
  static constexpr const char* kUnkWord = "<unk>";

  Vocabulary();
  explicit Vocabulary(const std::set<std::string>& words);

  std::size_t size() const { return words_.size(); }
  std::size_t lookup(const std::string& word) const;
  const std::string& word(std::size_t index) const { return words_.at(index); }
  const std::vector<std::string>& words() const { return words_; }
  bool operator==(const Vocabulary& o) const { return words_ == o.words_; }

 private:
  std::vector<std::string> words_;
  std::map<std::string, std::size_t> index_;
};

// Multi-label uses one sigmoid per intent with a 0.5 decision threshold;
// single-label uses a softmax and requires exactly one gold intent.
enum class IntentMode { kMultiLabel, kSingleLabel };

struct Hyperparameters {
  std::size_t d_emb = 64;
  std::size_t hidden = 64;  // per direction
  std::size_t lstm_layers = 1;
  double dropout = 0.1;
  IntentMode intent_mode = IntentMode::kMultiLabel;
  bool hard_bio_mask = false;
  bool operator==(const Hyperparameters&) const = default;
};

// One named parameter block. depth 0 is the top (decoder heads); larger
// depths sit closer to the input.
struct Tensor {
  std::string name;
  std::string layer;
  std::size_t depth = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  bool operator==(const Tensor&) const = default;
};

class JointModel {
 public:
  // Uniform random initialisation in +-1/sqrt(fan_in), forget-gate bias 1.
  static JointModel create(const Hyperparameters& hp, Vocabulary vocab,
                           std::vector<std::string> intents,
                           std::vector<std::string> slot_types, std::uint64_t seed);
  // All parameters zero.
  static JointModel zeros(const Hyperparameters& hp, Vocabulary vocab,
                          std::vector<std::string> intents,
                          std::vector<std::string> slot_types);

  const Hyperparameters& hyper() const { return hyper_; }
  const Vocabulary& vocab() const { return vocab_; }
  const std::vector<std::string>& intents() const { return intents_; }
  const std::vector<std::string>& slot_types() const { return slot_types_; }
  // "O", then B-x, I-x for each slot type in order.
  const std::vector<std::string>& tags() const { return tags_; }
  std::size_t num_tags() const { return tags_.size(); }

  std::vector<Tensor>& tensors() { return tensors_; }
  const std::vector<Tensor>& tensors() const { return tensors_; }
  const Tensor& tensor(const std::string& name) const;
  Tensor& tensor(const std::string& name);
  std::size_t max_depth() const;
  std::size_t parameter_count() const;

  std::uint64_t updates() const { return updates_; }
  void set_updates(std::uint64_t n) { updates_ = n; }

  // Rounds every parameter to the nearest float, the checkpoint precision.
  void quantize_to_float();
  bool all_finite() const;

  bool operator==(const JointModel&) const = default;

 private:
  JointModel(const Hyperparameters& hp, Vocabulary vocab, std::vector<std::string> intents,
             std::vector<std::string> slot_types);

  Hyperparameters hyper_;
  Vocabulary vocab_;
  std::vector<std::string> intents_;
  std::vector<std::string> slot_types_;
  std::vector<std::string> tags_;
  std::vector<Tensor> tensors_;
  std::uint64_t updates_ = 0;
};

// Utterance in index space.
struct Example {
  std::vector<std::size_t> tokens;
  std::vector<std::size_t> intents;  // gold intent indices
  std::vector<std::size_t> tags;     // gold tag indices
  bool supervise_intents = true;     // false for system turns
};

// Throws LabelOutOfInventory when a gold label is unknown to the model.
Example encode_example(const JointModel& model, const Utterance& utterance);
std::vector<std::size_t> encode_tokens(const JointModel& model,
                                       const std::vector<std::string>& normalized);

// Gradient buffers, one per tensor, same shapes.
struct Gradients {
  std::vector<std::vector<double>> blocks;

  static Gradients like(const JointModel& model);
  void zero();
  void add(const Gradients& other);
  void scale(double factor);
  double squared_norm() const;
};

struct ForwardCache;  // activations kept for backpropagation

struct ForwardResult {
  std::vector<double> intent_logits;
  Matrix emissions;  // T x num_tags
  std::shared_ptr<const ForwardCache> cache;
};

// Throws IndexOutOfVocab. Dropout is applied only when train_mode is set,
// with the mask drawn from dropout_seed.
ForwardResult forward(const JointModel& model, const std::vector<std::size_t>& tokens,
                      bool train_mode, std::uint64_t dropout_seed);

// Transition matrix used for scoring: the learned one, plus -1e9 on illegal
// BIO moves when hard masking is enabled.
Matrix effective_transitions(const JointModel& model);

struct LossResult {
  double loss = 0.0;
  double intent_loss = 0.0;
  double slot_loss = 0.0;
  Gradients gradients;
};

LossResult joint_loss(const JointModel& model, const Example& example, bool train_mode,
                      std::uint64_t seed);
// Adds this example's gradients into `into` and returns its loss.
double accumulate_joint_loss(const JointModel& model, const Example& example,
                             bool train_mode, std::uint64_t seed, Gradients& into);

// eta for depth d is eta_top * xi^d.
struct LrSchedule {
  double eta_top = 1e-3;
  double xi = 1.0;

  double rate(std::size_t depth) const;
};

// Throws ShapeMismatch, and DivergenceError if an update becomes non-finite.
void sgd_step(JointModel& model, const Gradients& gradients, const LrSchedule& schedule,
              std::uint64_t step);

struct Prediction {
  std::vector<double> intent_scores;  // sigmoid or softmax probabilities
  std::set<std::string> intent_set;
  std::vector<std::string> slot_tags;
};

Prediction predict(const JointModel& model, const std::vector<std::string>& normalized);
Prediction predict(const JointModel& model, const Utterance& utterance);

}  // namespace bicf
