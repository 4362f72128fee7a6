#include "bicf/neural.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bicf/error.hpp"
#include "bicf/rng.hpp"

namespace bicf {

Vocabulary::Vocabulary() : words_{kUnkWord} { index_.emplace(kUnkWord, kUnk); }

Vocabulary::Vocabulary(const std::set<std::string>& words) : Vocabulary() {
  for (const auto& w : words) {
    if (w == kUnkWord) continue;
    index_.emplace(w, words_.size());
    words_.push_back(w);
  }
}

std::size_t Vocabulary::lookup(const std::string& word) const {
  auto it = index_.find(word);
  return it == index_.end() ? kUnk : it->second;
}

namespace {

// Tensor layout: embedding, then (input, recurrent, bias) for every
// (layer, direction), then the intent head and the CRF block.
constexpr std::size_t kEmbedding = 0;
inline std::size_t lstm_index(std::size_t layer, std::size_t dir, std::size_t part) {
  return 1 + (2 * layer + dir) * 3 + part;
}
struct HeadIndex {
  std::size_t intent_w, intent_b, emit_w, emit_b, trans;
};
inline HeadIndex head_index(std::size_t layers) {
  const std::size_t base = 1 + 6 * layers;
  return {base, base + 1, base + 2, base + 3, base + 4};
}

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

}  // namespace

JointModel::JointModel(const Hyperparameters& hp, Vocabulary vocab,
                       std::vector<std::string> intents, std::vector<std::string> slot_types)
    : hyper_(hp),
      vocab_(std::move(vocab)),
      intents_(std::move(intents)),
      slot_types_(std::move(slot_types)) {
  if (hp.d_emb == 0 || hp.hidden == 0 || hp.lstm_layers == 0) {
    throw Error(ErrorCode::kInvalidArgument, "model dimensions must be positive");
  }
  if (!(hp.dropout >= 0.0 && hp.dropout < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "dropout must lie in [0,1)");
  }
  tags_.emplace_back("O");
  for (const auto& s : slot_types_) {
    tags_.push_back("B-" + s);
    tags_.push_back("I-" + s);
  }
  const std::size_t h = hp.hidden, layers = hp.lstm_layers;
  auto add = [&](std::string name, std::string layer, std::size_t depth, std::size_t rows,
                 std::size_t cols) {
    tensors_.push_back({std::move(name), std::move(layer), depth, rows, cols,
                        std::vector<double>(rows * cols, 0.0)});
  };
  add("embedding", "embedding", layers + 1, vocab_.size(), hp.d_emb);
  for (std::size_t k = 0; k < layers; ++k) {
    const std::size_t in = k == 0 ? hp.d_emb : 2 * h;
    for (const char* dir : {"fwd", "bwd"}) {
      const std::string layer = "lstm" + std::to_string(k) + "." + dir;
      add(layer + ".input", layer, layers - k, 4 * h, in);
      add(layer + ".recurrent", layer, layers - k, 4 * h, h);
      add(layer + ".bias", layer, layers - k, 4 * h, 1);
    }
  }
  add("intent.weight", "intent_head", 0, intents_.size(), 2 * h);
  add("intent.bias", "intent_head", 0, intents_.size(), 1);
  add("crf.emission_weight", "crf", 0, tags_.size(), 2 * h);
  add("crf.emission_bias", "crf", 0, tags_.size(), 1);
  add("crf.transitions", "crf", 0, tags_.size() + 2, tags_.size() + 2);
}

JointModel JointModel::zeros(const Hyperparameters& hp, Vocabulary vocab,
                             std::vector<std::string> intents,
                             std::vector<std::string> slot_types) {
  return JointModel(hp, std::move(vocab), std::move(intents), std::move(slot_types));
}

JointModel JointModel::create(const Hyperparameters& hp, Vocabulary vocab,
                              std::vector<std::string> intents,
                              std::vector<std::string> slot_types, std::uint64_t seed) {
  JointModel m(hp, std::move(vocab), std::move(intents), std::move(slot_types));
  Rng rng(seed);
  for (auto& t : m.tensors_) {
    if (t.name.ends_with(".bias") || t.name == "crf.transitions") continue;
    const double scale = t.name == "embedding" ? 0.5 : 1.0 / std::sqrt(static_cast<double>(t.cols));
    for (auto& v : t.values) v = rng.uniform(-scale, scale);
  }
  // Forget gates (second quarter of each bias) start open.
  for (std::size_t k = 0; k < hp.lstm_layers; ++k) {
    for (std::size_t dir = 0; dir < 2; ++dir) {
      auto& b = m.tensors_[lstm_index(k, dir, 2)].values;
      for (std::size_t j = hp.hidden; j < 2 * hp.hidden; ++j) b[j] = 1.0;
    }
  }
  return m;
}

const Tensor& JointModel::tensor(const std::string& name) const {
  for (const auto& t : tensors_) {
    if (t.name == name) return t;
  }
  throw Error(ErrorCode::kInvalidArgument, "no tensor named '" + name + "'");
}

Tensor& JointModel::tensor(const std::string& name) {
  return const_cast<Tensor&>(std::as_const(*this).tensor(name));
}

std::size_t JointModel::max_depth() const {
  std::size_t d = 0;
  for (const auto& t : tensors_) d = std::max(d, t.depth);
  return d;
}

std::size_t JointModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors_) n += t.size();
  return n;
}

void JointModel::quantize_to_float() {
  for (auto& t : tensors_) {
    for (auto& v : t.values) v = static_cast<double>(static_cast<float>(v));
  }
}

bool JointModel::all_finite() const {
  for (const auto& t : tensors_) {
    for (double v : t.values) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

std::vector<std::size_t> encode_tokens(const JointModel& model,
                                       const std::vector<std::string>& normalized) {
  std::vector<std::size_t> out;
  out.reserve(normalized.size());
  for (const auto& w : normalized) out.push_back(model.vocab().lookup(w));
  return out;
}

Example encode_example(const JointModel& model, const Utterance& utterance) {
  Example ex;
  ex.tokens = encode_tokens(model, utterance.normalized_tokens());
  ex.supervise_intents = utterance.speaker == Speaker::kUser;
  const auto& intents = model.intents();
  for (const auto& label : utterance.intents) {
    auto it = std::find(intents.begin(), intents.end(), label);
    if (it == intents.end()) {
      throw Error(ErrorCode::kLabelOutOfInventory, "intent '" + label + "' unknown to model");
    }
    ex.intents.push_back(static_cast<std::size_t>(it - intents.begin()));
  }
  const auto& tags = model.tags();
  for (const auto& tag : utterance.slot_tags) {
    auto it = std::find(tags.begin(), tags.end(), tag);
    if (it == tags.end()) {
      throw Error(ErrorCode::kLabelOutOfInventory, "tag '" + tag + "' unknown to model");
    }
    ex.tags.push_back(static_cast<std::size_t>(it - tags.begin()));
  }
  if (ex.supervise_intents && model.hyper().intent_mode == IntentMode::kSingleLabel &&
      ex.intents.size() != 1) {
    throw Error(ErrorCode::kLabelOutOfInventory,
                "single-label intent mode needs exactly one intent per user turn");
  }
  return ex;
}

Gradients Gradients::like(const JointModel& model) {
  Gradients g;
  for (const auto& t : model.tensors()) g.blocks.emplace_back(t.size(), 0.0);
  return g;
}

void Gradients::zero() {
  for (auto& b : blocks) std::fill(b.begin(), b.end(), 0.0);
}

void Gradients::add(const Gradients& other) {
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    for (std::size_t j = 0; j < blocks[i].size(); ++j) blocks[i][j] += other.blocks[i][j];
  }
}

void Gradients::scale(double factor) {
  for (auto& b : blocks) {
    for (auto& v : b) v *= factor;
  }
}

double Gradients::squared_norm() const {
  double s = 0.0;
  for (const auto& b : blocks) {
    for (double v : b) s += v * v;
  }
  return s;
}

// Per direction, per time step activations. Gate order is i, f, g, o.
struct DirectionCache {
  std::vector<double> gates;      // T x 4h, post-activation
  std::vector<double> cell;       // T x h
  std::vector<double> cell_tanh;  // T x h
  std::vector<double> hidden;     // T x h
};

struct LayerCache {
  std::vector<double> input;  // T x in
  std::size_t in_dim = 0;
  DirectionCache dir[2];
  std::vector<double> output;  // T x 2h, [fwd, bwd]
};

struct ForwardCache {
  std::vector<std::size_t> tokens;
  std::vector<LayerCache> layers;
  std::vector<double> mask;  // T x 2h dropout scale, empty when off
  std::vector<double> top;   // T x 2h after dropout
  std::vector<double> pooled;
};

namespace {

// y += W x, W is rows x cols.
inline void gemv_add(const double* w, std::size_t rows, std::size_t cols, const double* x,
                     double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* wr = w + r * cols;
    double s = 0.0;
    for (std::size_t c = 0; c < cols; ++c) s += wr[c] * x[c];
    y[r] += s;
  }
}

// x += W^T y.
inline void gemv_t_add(const double* w, std::size_t rows, std::size_t cols, const double* y,
                       double* x) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* wr = w + r * cols;
    const double yr = y[r];
    if (yr == 0.0) continue;
    for (std::size_t c = 0; c < cols; ++c) x[c] += wr[c] * yr;
  }
}

// G += y x^T.
inline void ger_add(double* g, std::size_t rows, std::size_t cols, const double* y,
                    const double* x) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double yr = y[r];
    if (yr == 0.0) continue;
    double* gr = g + r * cols;
    for (std::size_t c = 0; c < cols; ++c) gr[c] += yr * x[c];
  }
}

void run_direction(const JointModel& model, std::size_t layer, std::size_t dir,
                   const std::vector<double>& input, std::size_t in_dim, std::size_t T,
                   DirectionCache& cache) {
  const std::size_t h = model.hyper().hidden;
  const auto& w = model.tensors()[lstm_index(layer, dir, 0)].values;
  const auto& u = model.tensors()[lstm_index(layer, dir, 1)].values;
  const auto& b = model.tensors()[lstm_index(layer, dir, 2)].values;
  cache.gates.assign(T * 4 * h, 0.0);
  cache.cell.assign(T * h, 0.0);
  cache.cell_tanh.assign(T * h, 0.0);
  cache.hidden.assign(T * h, 0.0);
  const std::vector<double> zeros(h, 0.0);
  for (std::size_t step = 0; step < T; ++step) {
    const std::size_t t = dir == 0 ? step : T - 1 - step;
    const bool first = step == 0;
    const std::size_t prev = dir == 0 ? t - 1 : t + 1;
    const double* h_prev = first ? zeros.data() : &cache.hidden[prev * h];
    const double* c_prev = first ? zeros.data() : &cache.cell[prev * h];
    double* z = &cache.gates[t * 4 * h];
    std::copy(b.begin(), b.end(), z);
    gemv_add(w.data(), 4 * h, in_dim, &input[t * in_dim], z);
    gemv_add(u.data(), 4 * h, h, h_prev, z);
    for (std::size_t j = 0; j < h; ++j) {
      const double i = sigmoid(z[j]);
      const double f = sigmoid(z[h + j]);
      const double g = std::tanh(z[2 * h + j]);
      const double o = sigmoid(z[3 * h + j]);
      z[j] = i;
      z[h + j] = f;
      z[2 * h + j] = g;
      z[3 * h + j] = o;
      const double c = f * c_prev[j] + i * g;
      const double tc = std::tanh(c);
      cache.cell[t * h + j] = c;
      cache.cell_tanh[t * h + j] = tc;
      cache.hidden[t * h + j] = o * tc;
    }
  }
}

// Backpropagates d(hidden) of one direction; accumulates parameter
// gradients and adds the input gradient into d_input (T x in_dim).
void backprop_direction(const JointModel& model, std::size_t layer, std::size_t dir,
                        const LayerCache& lc, const std::vector<double>& d_hidden,
                        Gradients& grads, std::vector<double>& d_input) {
  const std::size_t h = model.hyper().hidden;
  const std::size_t in_dim = lc.in_dim;
  const std::size_t T = lc.input.size() / in_dim;
  const DirectionCache& c = lc.dir[dir];
  const auto& w = model.tensors()[lstm_index(layer, dir, 0)].values;
  const auto& u = model.tensors()[lstm_index(layer, dir, 1)].values;
  auto& gw = grads.blocks[lstm_index(layer, dir, 0)];
  auto& gu = grads.blocks[lstm_index(layer, dir, 1)];
  auto& gb = grads.blocks[lstm_index(layer, dir, 2)];
  std::vector<double> dh_next(h, 0.0), dc_next(h, 0.0), dz(4 * h), dh(h);
  const std::vector<double> zeros(h, 0.0);
  for (std::size_t step = T; step-- > 0;) {
    const std::size_t t = dir == 0 ? step : T - 1 - step;
    const bool first = step == 0;
    const std::size_t prev = dir == 0 ? t - 1 : t + 1;
    const double* h_prev = first ? zeros.data() : &c.hidden[prev * h];
    const double* c_prev = first ? zeros.data() : &c.cell[prev * h];
    const double* gates = &c.gates[t * 4 * h];
    for (std::size_t j = 0; j < h; ++j) {
      const double i = gates[j], f = gates[h + j], g = gates[2 * h + j], o = gates[3 * h + j];
      const double tc = c.cell_tanh[t * h + j];
      const double dhj = d_hidden[t * h + j] + dh_next[j];
      const double d_o = dhj * tc;
      const double dc = dhj * o * (1.0 - tc * tc) + dc_next[j];
      dz[j] = dc * g * i * (1.0 - i);
      dz[h + j] = dc * c_prev[j] * f * (1.0 - f);
      dz[2 * h + j] = dc * i * (1.0 - g * g);
      dz[3 * h + j] = d_o * o * (1.0 - o);
      dc_next[j] = dc * f;
    }
    ger_add(gw.data(), 4 * h, in_dim, dz.data(), &lc.input[t * in_dim]);
    ger_add(gu.data(), 4 * h, h, dz.data(), h_prev);
    for (std::size_t j = 0; j < 4 * h; ++j) gb[j] += dz[j];
    gemv_t_add(w.data(), 4 * h, in_dim, dz.data(), &d_input[t * in_dim]);
    std::fill(dh_next.begin(), dh_next.end(), 0.0);
    gemv_t_add(u.data(), 4 * h, h, dz.data(), dh_next.data());
  }
}

}  // namespace

ForwardResult forward(const JointModel& model, const std::vector<std::size_t>& tokens,
                      bool train_mode, std::uint64_t dropout_seed) {
  if (tokens.empty()) throw Error(ErrorCode::kInvalidArgument, "empty token sequence");
  const auto& hp = model.hyper();
  const std::size_t T = tokens.size(), h = hp.hidden, d = hp.d_emb;
  const auto& emb = model.tensors()[kEmbedding];
  auto cache = std::make_shared<ForwardCache>();
  cache->tokens = tokens;

  std::vector<double> input(T * d);
  for (std::size_t t = 0; t < T; ++t) {
    if (tokens[t] >= emb.rows) {
      throw Error(ErrorCode::kIndexOutOfVocab,
                  "token index " + std::to_string(tokens[t]) + " outside vocabulary of " +
                      std::to_string(emb.rows));
    }
    std::copy_n(&emb.values[tokens[t] * d], d, &input[t * d]);
  }
  std::size_t in_dim = d;
  cache->layers.resize(hp.lstm_layers);
  for (std::size_t k = 0; k < hp.lstm_layers; ++k) {
    LayerCache& lc = cache->layers[k];
    lc.input = std::move(input);
    lc.in_dim = in_dim;
    for (std::size_t dir = 0; dir < 2; ++dir) {
      run_direction(model, k, dir, lc.input, in_dim, T, lc.dir[dir]);
    }
    lc.output.assign(T * 2 * h, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
      std::copy_n(&lc.dir[0].hidden[t * h], h, &lc.output[t * 2 * h]);
      std::copy_n(&lc.dir[1].hidden[t * h], h, &lc.output[t * 2 * h + h]);
    }
    input = lc.output;
    in_dim = 2 * h;
  }

  cache->top = std::move(input);
  if (train_mode && hp.dropout > 0.0) {
    Rng rng(dropout_seed);
    const double keep_scale = 1.0 / (1.0 - hp.dropout);
    cache->mask.resize(cache->top.size());
    for (std::size_t i = 0; i < cache->top.size(); ++i) {
      cache->mask[i] = rng.uniform() < hp.dropout ? 0.0 : keep_scale;
      cache->top[i] *= cache->mask[i];
    }
  }

  const std::size_t H = 2 * h;
  cache->pooled.assign(H, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t j = 0; j < H; ++j) cache->pooled[j] += cache->top[t * H + j];
  }
  for (auto& v : cache->pooled) v /= static_cast<double>(T);

  const HeadIndex hi = head_index(hp.lstm_layers);
  const auto& tensors = model.tensors();
  ForwardResult r;
  r.intent_logits = tensors[hi.intent_b].values;
  gemv_add(tensors[hi.intent_w].values.data(), model.intents().size(), H,
           cache->pooled.data(), r.intent_logits.data());
  const std::size_t L = model.num_tags();
  r.emissions = Matrix(T, L);
  for (std::size_t t = 0; t < T; ++t) {
    double* row = r.emissions.row(t);
    std::copy_n(tensors[hi.emit_b].values.data(), L, row);
    gemv_add(tensors[hi.emit_w].values.data(), L, H, &cache->top[t * H], row);
  }
  r.cache = std::move(cache);
  return r;
}

Matrix effective_transitions(const JointModel& model) {
  const std::size_t L = model.num_tags();
  const auto& trans = model.tensors()[head_index(model.hyper().lstm_layers).trans];
  Matrix a(L + 2, L + 2);
  a.data = trans.values;
  if (!model.hyper().hard_bio_mask) return a;
  constexpr double kForbidden = -1e9;
  const auto& tags = model.tags();
  // I-x may only follow B-x or I-x.
  for (std::size_t to = 0; to < L; ++to) {
    const auto p = parse_tag(tags[to]);
    if (p.kind != TagKind::kInside) continue;
    a(crf_bos(L), to) += kForbidden;
    for (std::size_t from = 0; from < L; ++from) {
      const auto q = parse_tag(tags[from]);
      if (q.kind == TagKind::kOutside || q.slot_type != p.slot_type) a(from, to) += kForbidden;
    }
  }
  return a;
}

double accumulate_joint_loss(const JointModel& model, const Example& ex, bool train_mode,
                             std::uint64_t seed, Gradients& grads) {
  const auto& hp = model.hyper();
  const std::size_t T = ex.tokens.size();
  if (ex.tags.size() != T) {
    throw Error(ErrorCode::kShapeMismatch, "tag and token counts differ");
  }
  const std::size_t L = model.num_tags(), K = model.intents().size();
  const std::size_t h = hp.hidden, H = 2 * h;
  for (auto tag : ex.tags) {
    if (tag >= L) throw Error(ErrorCode::kLabelOutOfInventory, "tag index out of range");
  }
  for (auto i : ex.intents) {
    if (i >= K) throw Error(ErrorCode::kLabelOutOfInventory, "intent index out of range");
  }
  ForwardResult fr = forward(model, ex.tokens, train_mode, seed);
  const ForwardCache& cache = *fr.cache;
  const HeadIndex hi = head_index(hp.lstm_layers);
  const auto& tensors = model.tensors();

  // Intent loss and its logit gradient.
  double intent_loss = 0.0;
  std::vector<double> d_logits(K, 0.0);
  if (ex.supervise_intents && K > 0) {
    if (hp.intent_mode == IntentMode::kMultiLabel) {
      std::vector<double> target(K, 0.0);
      for (auto i : ex.intents) target[i] = 1.0;
      for (std::size_t k = 0; k < K; ++k) {
        const double z = fr.intent_logits[k];
        intent_loss += softplus(z) - target[k] * z;
        d_logits[k] = sigmoid(z) - target[k];
      }
    } else {
      const double lse = log_sum_exp(fr.intent_logits.data(), K);
      intent_loss = lse - fr.intent_logits[ex.intents.front()];
      for (std::size_t k = 0; k < K; ++k) d_logits[k] = std::exp(fr.intent_logits[k] - lse);
      d_logits[ex.intents.front()] -= 1.0;
    }
  }

  // CRF negative log-likelihood.
  const Matrix trans = effective_transitions(model);
  const CrfMarginals marg = crf_marginals(fr.emissions, trans);
  const double slot_loss = marg.log_partition - crf_sequence_score(fr.emissions, trans, ex.tags);
  Matrix d_emit = marg.unary;
  for (std::size_t t = 0; t < T; ++t) d_emit(t, ex.tags[t]) -= 1.0;
  auto& g_trans = grads.blocks[hi.trans];
  for (std::size_t i = 0; i < g_trans.size(); ++i) g_trans[i] += marg.pairwise.data[i];
  g_trans[crf_bos(L) * (L + 2) + ex.tags.front()] -= 1.0;
  for (std::size_t t = 1; t < T; ++t) g_trans[ex.tags[t - 1] * (L + 2) + ex.tags[t]] -= 1.0;
  g_trans[ex.tags.back() * (L + 2) + crf_eos(L)] -= 1.0;

  // Heads.
  std::vector<double> d_top(T * H, 0.0);
  {
    auto& gw = grads.blocks[hi.emit_w];
    auto& gb = grads.blocks[hi.emit_b];
    for (std::size_t t = 0; t < T; ++t) {
      const double* de = d_emit.row(t);
      ger_add(gw.data(), L, H, de, &cache.top[t * H]);
      for (std::size_t l = 0; l < L; ++l) gb[l] += de[l];
      gemv_t_add(tensors[hi.emit_w].values.data(), L, H, de, &d_top[t * H]);
    }
  }
  if (K > 0) {
    ger_add(grads.blocks[hi.intent_w].data(), K, H, d_logits.data(), cache.pooled.data());
    for (std::size_t k = 0; k < K; ++k) grads.blocks[hi.intent_b][k] += d_logits[k];
    std::vector<double> d_pooled(H, 0.0);
    gemv_t_add(tensors[hi.intent_w].values.data(), K, H, d_logits.data(), d_pooled.data());
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t j = 0; j < H; ++j) {
        d_top[t * H + j] += d_pooled[j] / static_cast<double>(T);
      }
    }
  }
  if (!cache.mask.empty()) {
    for (std::size_t i = 0; i < d_top.size(); ++i) d_top[i] *= cache.mask[i];
  }

  // Encoder, top layer first.
  std::vector<double> d_out = std::move(d_top);
  for (std::size_t k = hp.lstm_layers; k-- > 0;) {
    const LayerCache& lc = cache.layers[k];
    std::vector<double> d_in(lc.input.size(), 0.0);
    for (std::size_t dir = 0; dir < 2; ++dir) {
      std::vector<double> d_hidden(T * h);
      for (std::size_t t = 0; t < T; ++t) {
        std::copy_n(&d_out[t * H + dir * h], h, &d_hidden[t * h]);
      }
      backprop_direction(model, k, dir, lc, d_hidden, grads, d_in);
    }
    d_out = std::move(d_in);
  }
  auto& g_emb = grads.blocks[kEmbedding];
  const std::size_t d = hp.d_emb;
  for (std::size_t t = 0; t < T; ++t) {
    double* row = &g_emb[ex.tokens[t] * d];
    for (std::size_t j = 0; j < d; ++j) row[j] += d_out[t * d + j];
  }
  return intent_loss + slot_loss;
}

LossResult joint_loss(const JointModel& model, const Example& example, bool train_mode,
                      std::uint64_t seed) {
  LossResult r;
  r.gradients = Gradients::like(model);
  r.loss = accumulate_joint_loss(model, example, train_mode, seed, r.gradients);
  // Recover the split for reporting.
  ForwardResult fr = forward(model, example.tokens, train_mode, seed);
  const Matrix trans = effective_transitions(model);
  r.slot_loss = crf_log_partition(fr.emissions, trans) -
                crf_sequence_score(fr.emissions, trans, example.tags);
  r.intent_loss = r.loss - r.slot_loss;
  return r;
}

double LrSchedule::rate(std::size_t depth) const {
  return eta_top * std::pow(xi, static_cast<double>(depth));
}

void sgd_step(JointModel& model, const Gradients& gradients, const LrSchedule& schedule,
              std::uint64_t step) {
  auto& tensors = model.tensors();
  if (gradients.blocks.size() != tensors.size()) {
    throw Error(ErrorCode::kShapeMismatch, "gradient block count differs from model");
  }
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    if (gradients.blocks[i].size() != tensors[i].size()) {
      throw Error(ErrorCode::kShapeMismatch, "gradient shape differs for " + tensors[i].name);
    }
  }
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const double eta = schedule.rate(tensors[i].depth);
    auto& v = tensors[i].values;
    const auto& g = gradients.blocks[i];
    for (std::size_t j = 0; j < v.size(); ++j) {
      v[j] -= eta * g[j];
      if (!std::isfinite(v[j])) {
        throw Error(ErrorCode::kDivergence,
                    "non-finite parameter in " + tensors[i].name + " at step " +
                        std::to_string(step));
      }
    }
  }
  model.set_updates(step + 1);
}

Prediction predict(const JointModel& model, const std::vector<std::string>& normalized) {
  ForwardResult fr = forward(model, encode_tokens(model, normalized), false, 0);
  Prediction p;
  const auto& intents = model.intents();
  const std::size_t K = intents.size();
  p.intent_scores.resize(K);
  if (model.hyper().intent_mode == IntentMode::kMultiLabel) {
    for (std::size_t k = 0; k < K; ++k) {
      p.intent_scores[k] = sigmoid(fr.intent_logits[k]);
      if (p.intent_scores[k] > 0.5) p.intent_set.insert(intents[k]);
    }
  } else if (K > 0) {
    const double lse = log_sum_exp(fr.intent_logits.data(), K);
    std::size_t best = 0;
    for (std::size_t k = 0; k < K; ++k) {
      p.intent_scores[k] = std::exp(fr.intent_logits[k] - lse);
      if (fr.intent_logits[k] > fr.intent_logits[best]) best = k;
    }
    p.intent_set.insert(intents[best]);
  }
  const ViterbiResult v = crf_viterbi(fr.emissions, effective_transitions(model));
  for (auto l : v.path) p.slot_tags.push_back(model.tags()[l]);
  p.slot_tags = repair_bio(std::move(p.slot_tags));
  return p;
}

Prediction predict(const JointModel& model, const Utterance& utterance) {
  return predict(model, utterance.normalized_tokens());
}

}  // namespace bicf
