#include "tmm/encoder.hpp"

#include <cmath>
#include <random>

#include "tmm/error.hpp"
#include "tmm/ops.hpp"

namespace tmm {

void ModelConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::ConfigError, what); };
  if (heads < 1 || hidden < 1 || ffn < 1 || max_len < 1 || vocab_size < 1) {
    fail("model dimensions must all be >= 1");
  }
  if (hidden % heads != 0) {
    fail("hidden size " + std::to_string(hidden) + " is not divisible by " + std::to_string(heads) + " heads");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) fail("dropout must be in [0, 1)");
  if (classes != 3) fail("class count must be 3");
}

ModelConfig ModelConfig::full_scale_reference(std::size_t vocab_size) {
  ModelConfig c;
  c.layers = 24;
  c.heads = 16;
  c.hidden = 1024;
  c.ffn = 4096;
  c.max_len = 512;
  c.vocab_size = vocab_size;
  c.dropout = 0.1;
  return c;
}

namespace {

Tensor normal_init(Shape shape, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 0.02);
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = dist(rng);
  return t;
}

template <typename Layer, typename Fn>
void for_each_layer_field(Layer& l, Fn&& fn) {
  fn("attn_norm.gain", l.attn_norm_gain);
  fn("attn_norm.bias", l.attn_norm_bias);
  fn("attn.q_weight", l.q_weight);
  fn("attn.q_bias", l.q_bias);
  fn("attn.k_weight", l.k_weight);
  fn("attn.k_bias", l.k_bias);
  fn("attn.v_weight", l.v_weight);
  fn("attn.v_bias", l.v_bias);
  fn("attn.out_weight", l.out_weight);
  fn("attn.out_bias", l.out_bias);
  fn("ffn_norm.gain", l.ffn_norm_gain);
  fn("ffn_norm.bias", l.ffn_norm_bias);
  fn("ffn.in_weight", l.ffn_in_weight);
  fn("ffn.in_bias", l.ffn_in_bias);
  fn("ffn.out_weight", l.ffn_out_weight);
  fn("ffn.out_bias", l.ffn_out_bias);
}

template <typename Layer, typename Bind>
BoundLayer bind_layer(Layer& l, Bind&& bind) {
  BoundLayer b;
  b.attn_norm_gain = bind(l.attn_norm_gain);
  b.attn_norm_bias = bind(l.attn_norm_bias);
  b.q_weight = bind(l.q_weight);
  b.q_bias = bind(l.q_bias);
  b.k_weight = bind(l.k_weight);
  b.k_bias = bind(l.k_bias);
  b.v_weight = bind(l.v_weight);
  b.v_bias = bind(l.v_bias);
  b.out_weight = bind(l.out_weight);
  b.out_bias = bind(l.out_bias);
  b.ffn_norm_gain = bind(l.ffn_norm_gain);
  b.ffn_norm_bias = bind(l.ffn_norm_bias);
  b.ffn_in_weight = bind(l.ffn_in_weight);
  b.ffn_in_bias = bind(l.ffn_in_bias);
  b.ffn_out_weight = bind(l.ffn_out_weight);
  b.ffn_out_bias = bind(l.ffn_out_bias);
  return b;
}

template <typename Params, typename Bind>
BoundParams bind_all(Params& p, Bind&& bind) {
  BoundParams b;
  b.token_embedding = bind(p.token_embedding);
  b.position_embedding = bind(p.position_embedding);
  for (auto& l : p.layers) b.layers.push_back(bind_layer(l, bind));
  b.final_norm_gain = bind(p.final_norm_gain);
  b.final_norm_bias = bind(p.final_norm_bias);
  b.classifier_weight = bind(p.classifier_weight);
  b.classifier_bias = bind(p.classifier_bias);
  return b;
}

Var linear(Var x, Var weight, Var bias) { return ops::add_bias(ops::matmul(x, weight), bias); }

}  // namespace

ModelParams ModelParams::initialize(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  const std::size_t d = config.hidden, f = config.ffn;
  std::mt19937_64 rng(seed);
  ModelParams p;
  p.token_embedding = normal_init({config.vocab_size, d}, rng);
  p.position_embedding = normal_init({config.max_len, d}, rng);
  for (std::size_t i = 0; i < config.layers; ++i) {
    LayerParams l;
    l.attn_norm_gain = Tensor({d}, 1.0);
    l.attn_norm_bias = Tensor({d});
    l.q_weight = normal_init({d, d}, rng);
    l.q_bias = Tensor({d});
    l.k_weight = normal_init({d, d}, rng);
    l.k_bias = Tensor({d});
    l.v_weight = normal_init({d, d}, rng);
    l.v_bias = Tensor({d});
    l.out_weight = normal_init({d, d}, rng);
    l.out_bias = Tensor({d});
    l.ffn_norm_gain = Tensor({d}, 1.0);
    l.ffn_norm_bias = Tensor({d});
    l.ffn_in_weight = normal_init({d, f}, rng);
    l.ffn_in_bias = Tensor({f});
    l.ffn_out_weight = normal_init({f, d}, rng);
    l.ffn_out_bias = Tensor({d});
    p.layers.push_back(std::move(l));
  }
  p.final_norm_gain = Tensor({d}, 1.0);
  p.final_norm_bias = Tensor({d});
  p.classifier_weight = normal_init({d, config.classes}, rng);
  p.classifier_bias = Tensor({config.classes});
  return p;
}

namespace {

template <typename Params, typename Out>
void collect_named(Params& p, Out& out) {
  out.push_back({"token_embedding", &p.token_embedding});
  out.push_back({"position_embedding", &p.position_embedding});
  for (std::size_t i = 0; i < p.layers.size(); ++i) {
    const std::string prefix = "layer" + std::to_string(i) + ".";
    for_each_layer_field(p.layers[i], [&](const char* name, auto& t) { out.push_back({prefix + name, &t}); });
  }
  out.push_back({"final_norm.gain", &p.final_norm_gain});
  out.push_back({"final_norm.bias", &p.final_norm_bias});
  out.push_back({"classifier.weight", &p.classifier_weight});
  out.push_back({"classifier.bias", &p.classifier_bias});
}

}  // namespace

std::vector<NamedTensor> ModelParams::named() {
  std::vector<NamedTensor> out;
  collect_named(*this, out);
  return out;
}

std::vector<ConstNamedTensor> ModelParams::named() const {
  std::vector<ConstNamedTensor> out;
  collect_named(*this, out);
  return out;
}

std::vector<Tensor*> ModelParams::all() {
  std::vector<Tensor*> out;
  for (auto& n : named()) out.push_back(n.tensor);
  return out;
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : named()) n += t.tensor->size();
  return n;
}

void ModelParams::zero_grad() {
  for (Tensor* t : all()) t->zero_grad();
}

void ModelParams::check_shapes(const ModelConfig& config) const {
  const std::size_t d = config.hidden, f = config.ffn;
  auto expect = [](const Tensor& t, const Shape& shape, const std::string& name) {
    if (t.shape() != shape) {
      throw Error(ErrorKind::ShapeMismatch,
                  name + " has shape " + shape_string(t.shape()) + ", expected " + shape_string(shape));
    }
  };
  expect(token_embedding, {config.vocab_size, d}, "token_embedding");
  expect(position_embedding, {config.max_len, d}, "position_embedding");
  if (layers.size() != config.layers) {
    throw Error(ErrorKind::ShapeMismatch, "parameter set has " + std::to_string(layers.size()) +
                                              " layers, config has " + std::to_string(config.layers));
  }
  for (const LayerParams& l : layers) {
    for (const Tensor* t : {&l.attn_norm_gain, &l.attn_norm_bias, &l.q_bias, &l.k_bias, &l.v_bias, &l.out_bias,
                            &l.ffn_norm_gain, &l.ffn_norm_bias, &l.ffn_out_bias}) {
      expect(*t, {d}, "layer vector");
    }
    for (const Tensor* t : {&l.q_weight, &l.k_weight, &l.v_weight, &l.out_weight}) expect(*t, {d, d}, "projection");
    expect(l.ffn_in_weight, {d, f}, "ffn.in_weight");
    expect(l.ffn_in_bias, {f}, "ffn.in_bias");
    expect(l.ffn_out_weight, {f, d}, "ffn.out_weight");
  }
  expect(final_norm_gain, {d}, "final_norm.gain");
  expect(final_norm_bias, {d}, "final_norm.bias");
  expect(classifier_weight, {d, config.classes}, "classifier.weight");
  expect(classifier_bias, {config.classes}, "classifier.bias");
}

BoundParams bind_params(Tape& tape, ModelParams& params) {
  return bind_all(params, [&tape](Tensor& t) { return tape.bind(t, true); });
}

BoundParams bind_params_constant(Tape& tape, const ModelParams& params) {
  return bind_all(params, [&tape](const Tensor& t) { return tape.bind_constant(t); });
}

EncoderOutput encode(const BoundParams& params, std::span<const TokenId> ids, const ModelConfig& config,
                     Mode mode, std::uint64_t seed) {
  const std::size_t length = ids.size();
  if (length == 0) throw Error(ErrorKind::SequenceTooLong, "empty token sequence");
  if (length > config.max_len) {
    throw Error(ErrorKind::SequenceTooLong,
                "sequence of " + std::to_string(length) + " tokens exceeds max length " + std::to_string(config.max_len));
  }
  const bool train = mode == Mode::Train;
  std::mt19937_64 dropout_seeds(seed);
  auto drop = [&](Var x) { return ops::dropout(x, config.dropout, dropout_seeds(), train); };

  const std::size_t heads = config.heads, head_dim = config.head_dim();
  const double attn_scale = 1.0 / std::sqrt(static_cast<double>(head_dim));

  Var x = ops::add(ops::embedding_lookup(params.token_embedding, ids),
                   ops::slice_rows(params.position_embedding, 0, length));
  x = drop(x);

  EncoderOutput out;
  for (const BoundLayer& layer : params.layers) {
    Var h = ops::layer_norm(x, layer.attn_norm_gain, layer.attn_norm_bias);
    Var q = linear(h, layer.q_weight, layer.q_bias);
    Var k = linear(h, layer.k_weight, layer.k_bias);
    Var v = linear(h, layer.v_weight, layer.v_bias);
    std::vector<Var> contexts;
    std::vector<Tensor> maps;
    contexts.reserve(heads);
    for (std::size_t head = 0; head < heads; ++head) {
      const std::size_t lo = head * head_dim, hi = lo + head_dim;
      Var qh = heads == 1 ? q : ops::slice_cols(q, lo, hi);
      Var kh = heads == 1 ? k : ops::slice_cols(k, lo, hi);
      Var vh = heads == 1 ? v : ops::slice_cols(v, lo, hi);
      Var scores = ops::scale(ops::matmul(qh, ops::transpose(kh)), attn_scale);
      Var weights = ops::softmax_rows(scores);
      maps.push_back(weights.value());
      contexts.push_back(ops::matmul(weights, vh));
    }
    out.attention.maps.push_back(std::move(maps));
    Var context = heads == 1 ? contexts.front() : ops::concat_cols(contexts);
    x = ops::add(x, drop(linear(context, layer.out_weight, layer.out_bias)));

    Var h2 = ops::layer_norm(x, layer.ffn_norm_gain, layer.ffn_norm_bias);
    Var f = linear(ops::gelu(linear(h2, layer.ffn_in_weight, layer.ffn_in_bias)), layer.ffn_out_weight,
                   layer.ffn_out_bias);
    x = ops::add(x, drop(f));
  }
  out.hidden = ops::layer_norm(x, params.final_norm_gain, params.final_norm_bias);
  return out;
}

Tensor average_attention(const AttentionRecord& record, std::optional<std::size_t> layer) {
  if (record.maps.empty()) throw Error(ErrorKind::LayerOutOfRange, "attention record has no layers");
  std::size_t first = 0, last = record.maps.size();
  if (layer) {
    if (*layer >= record.maps.size()) {
      throw Error(ErrorKind::LayerOutOfRange, "layer " + std::to_string(*layer) + " of " +
                                                  std::to_string(record.maps.size()));
    }
    first = *layer;
    last = *layer + 1;
  }
  Tensor mean(record.maps[first].front().shape());
  std::size_t count = 0;
  for (std::size_t l = first; l < last; ++l) {
    for (const Tensor& m : record.maps[l]) {
      for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += m[i];
      ++count;
    }
  }
  const double inv = 1.0 / static_cast<double>(count);
  for (double& v : mean.values()) v *= inv;
  return mean;
}

}  // namespace tmm
