#include "tmm/grad_check_suite.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <random>

#include <json.hpp>

#include "tmm/aspect_head.hpp"
#include "tmm/error.hpp"
#include "tmm/ops.hpp"
#include "tmm/sequence.hpp"
#include "tmm/tokenizer.hpp"

namespace tmm {

bool GradCheckReport::passed() const noexcept {
  for (const auto& o : outcomes) {
    if (!o.passed) return false;
  }
  return !outcomes.empty();
}

std::string GradCheckReport::to_json() const {
  nlohmann::ordered_json doc;
  doc["passed"] = passed();
  doc["checks"] = nlohmann::ordered_json::array();
  for (const auto& o : outcomes) {
    nlohmann::ordered_json c;
    c["name"] = o.name;
    // JSON has no infinity; a failed evaluation is reported as null.
    if (std::isfinite(o.result.max_relative_error)) {
      c["max_relative_error"] = o.result.max_relative_error;
    } else {
      c["max_relative_error"] = nullptr;
    }
    c["threshold"] = o.threshold;
    c["coordinates"] = o.result.coordinates;
    c["passed"] = o.passed;
    doc["checks"].push_back(std::move(c));
  }
  return doc.dump(2);
}

namespace {

using ops::sum;

Tensor random_tensor(const Shape& shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  Tensor t(shape);
  for (double& v : t.values()) v = d(rng);
  return t;
}

// Holds the tensors of a case; the objective binds them on every evaluation.
struct Fixture {
  std::vector<Tensor> inputs;
  Tensor weight;

  std::vector<Tensor*> pointers() {
    std::vector<Tensor*> out;
    for (auto& t : inputs) out.push_back(&t);
    return out;
  }
};

// sum(out * W) with a fixed random W makes every output coordinate matter.
Var weighted(Tape& tape, Var out, const Tensor& weight) {
  return sum(ops::mul(out, tape.bind_constant(weight)));
}

GradCheckCase make_case(std::string name, std::vector<Tensor> inputs, Shape out_shape, std::mt19937_64& rng,
                        std::function<Var(Tape&, std::vector<Var>&)> body) {
  auto fx = std::make_shared<Fixture>();
  fx->inputs = std::move(inputs);
  fx->weight = random_tensor(out_shape, rng);
  GradCheckCase c;
  c.name = std::move(name);
  c.threshold = kPrimitiveGradTolerance;
  c.run = [fx, body = std::move(body)] {
    Objective f = [fx, &body](Tape& tape) {
      std::vector<Var> vars;
      for (auto& t : fx->inputs) vars.push_back(tape.bind(t));
      return weighted(tape, body(tape, vars), fx->weight);
    };
    auto ptrs = fx->pointers();
    return grad_check(f, ptrs);
  };
  return c;
}

}  // namespace

std::vector<GradCheckCase> primitive_cases(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<GradCheckCase> cases;
  auto r = [&](const Shape& s) { return random_tensor(s, rng); };

  cases.push_back(make_case("matmul", {r({3, 4}), r({4, 2})}, {3, 2}, rng,
                            [](Tape&, std::vector<Var>& v) { return ops::matmul(v[0], v[1]); }));
  cases.push_back(make_case("add", {r({2, 3}), r({2, 3})}, {2, 3}, rng,
                            [](Tape&, std::vector<Var>& v) { return ops::add(v[0], v[1]); }));
  cases.push_back(make_case("add_bias", {r({3, 4}), r({4})}, {3, 4}, rng,
                            [](Tape&, std::vector<Var>& v) { return ops::add_bias(v[0], v[1]); }));
  cases.push_back(make_case("mul", {r({2, 3}), r({2, 3})}, {2, 3}, rng,
                            [](Tape&, std::vector<Var>& v) { return ops::mul(v[0], v[1]); }));
  cases.push_back(make_case("scale", {r({2, 3})}, {2, 3}, rng,
                            [](Tape&, std::vector<Var>& v) { return ops::scale(v[0], -1.75); }));
  cases.push_back(make_case("gelu", {random_tensor({3, 4}, rng, -3.0, 3.0)}, {3, 4}, rng,
                            [](Tape&, std::vector<Var>& v) { return ops::gelu(v[0]); }));
  cases.push_back(make_case("softmax_rows", {random_tensor({3, 5}, rng, -2.0, 2.0)}, {3, 5}, rng,
                            [](Tape&, std::vector<Var>& v) { return ops::softmax_rows(v[0]); }));
  cases.push_back(make_case("layer_norm", {random_tensor({3, 6}, rng, -2.0, 2.0), r({6}), r({6})}, {3, 6}, rng,
                            [](Tape&, std::vector<Var>& v) { return ops::layer_norm(v[0], v[1], v[2]); }));
  cases.push_back(make_case("embedding_lookup", {r({5, 3})}, {4, 3}, rng, [](Tape&, std::vector<Var>& v) {
    const std::uint32_t ids[] = {4, 1, 4, 0};
    return ops::embedding_lookup(v[0], ids);
  }));
  cases.push_back(make_case("dropout", {r({4, 5})}, {4, 5}, rng,
                            [](Tape&, std::vector<Var>& v) { return ops::dropout(v[0], 0.3, 11, true); }));
  cases.push_back(make_case("concat_rows", {r({2, 3}), r({1, 3})}, {3, 3}, rng, [](Tape&, std::vector<Var>& v) {
    const Var parts[] = {v[0], v[1]};
    return ops::concat_rows(parts);
  }));
  cases.push_back(make_case("slice_rows", {r({4, 3})}, {2, 3}, rng,
                            [](Tape&, std::vector<Var>& v) { return ops::slice_rows(v[0], 1, 3); }));
  cases.push_back(make_case("concat_cols", {r({3, 2}), r({3, 1})}, {3, 3}, rng, [](Tape&, std::vector<Var>& v) {
    const Var parts[] = {v[0], v[1]};
    return ops::concat_cols(parts);
  }));
  cases.push_back(make_case("slice_cols", {r({3, 5})}, {3, 2}, rng,
                            [](Tape&, std::vector<Var>& v) { return ops::slice_cols(v[0], 2, 4); }));
  cases.push_back(make_case("transpose", {r({2, 4})}, {4, 2}, rng,
                            [](Tape&, std::vector<Var>& v) { return ops::transpose(v[0]); }));
  cases.push_back(make_case("gather_rows", {r({4, 3})}, {3, 3}, rng, [](Tape&, std::vector<Var>& v) {
    const std::size_t rows[] = {3, 0, 3};
    return ops::gather_rows(v[0], rows);
  }));
  cases.push_back(make_case("sum", {r({3, 3})}, {1}, rng, [](Tape&, std::vector<Var>& v) { return sum(v[0]); }));
  cases.push_back(make_case("nll_rows", {random_tensor({3, 3}, rng, 0.2, 0.9)}, {1}, rng,
                            [](Tape&, std::vector<Var>& v) {
                              const std::size_t targets[] = {0, 2, 1};
                              return ops::nll_rows(v[0], targets).total;
                            }));
  return cases;
}

ModelConfig grad_check_model_config() {
  ModelConfig c;
  c.layers = 1;
  c.heads = 2;
  c.hidden = 8;
  c.ffn = 16;
  c.max_len = 16;
  c.dropout = 0.1;
  return c;
}

GradCheckCase end_to_end_case(const ModelConfig& config, std::uint64_t seed) {
  struct State {
    ModelConfig config;
    ModelParams params;
    std::vector<EncodedSequence> sequences;
    std::uint64_t seed = 0;
  };
  auto st = std::make_shared<State>();

  AtsaExample a;
  a.text = "the pasta is tasty but the waiter is rude .";
  a.tokens = tokenize(a.text);
  a.aspects = {{1, 2, Polarity::Positive}, {6, 7, Polarity::Negative}};
  AtsaExample b;
  b.text = "the menu is okay while the decor , not awful , is lovely .";
  b.tokens = tokenize(b.text);
  b.aspects = {{1, 2, Polarity::Neutral}, {6, 7, Polarity::Positive}};
  const std::vector<std::vector<std::string>> texts = {a.tokens, b.tokens};
  const Vocab vocab = Vocab::build(texts, 1);

  st->config = config;
  st->config.vocab_size = vocab.size();
  st->config.validate();
  st->sequences = {encode_tmm_atsa(a, vocab, st->config.max_len), encode_tmm_atsa(b, vocab, st->config.max_len)};
  st->params = ModelParams::initialize(st->config, seed);
  // Larger-than-default weights so every path carries a gradient well above
  // finite-difference noise.
  std::mt19937_64 rng(seed ^ 0x5eedu);
  std::normal_distribution<double> n(0.0, 0.3);
  for (Tensor* t : st->params.all()) {
    for (double& v : t->values()) v += n(rng);
  }
  st->seed = seed;

  GradCheckCase c;
  c.name = "end_to_end_loss";
  c.threshold = kEndToEndGradTolerance;
  c.run = [st] {
    Objective f = [st](Tape& tape) {
      const BoundParams bound = bind_params(tape, st->params);
      std::vector<SentimentDistribution> dists;
      std::vector<std::vector<Polarity>> gold;
      for (std::size_t i = 0; i < st->sequences.size(); ++i) {
        const auto& s = st->sequences[i];
        EncoderOutput out = encode(bound, s.ids, st->config, Mode::Train, st->seed + i);
        dists.push_back(classify(gather_anchors(out.hidden, s.anchors), bound.classifier_weight, bound.classifier_bias));
        gold.push_back(s.gold);
      }
      return joint_loss(dists, gold, LossReduction::Sum).loss;
    };
    auto ptrs = st->params.all();
    return grad_check(f, ptrs);
  };
  return c;
}

std::vector<GradCheckCase> default_grad_check_suite(std::uint64_t seed) {
  auto cases = primitive_cases(seed);
  cases.push_back(end_to_end_case(grad_check_model_config(), seed));
  return cases;
}

GradCheckReport run_grad_check_suite(std::span<const GradCheckCase> cases) {
  GradCheckReport report;
  const auto t0 = std::chrono::steady_clock::now();
  for (const auto& c : cases) {
    GradCheckOutcome o;
    o.name = c.name;
    o.threshold = c.threshold;
    try {
      o.result = c.run();
    } catch (const Error&) {
      o.result.max_relative_error = std::numeric_limits<double>::infinity();
    }
    o.passed = o.result.max_relative_error < o.threshold;
    report.outcomes.push_back(std::move(o));
  }
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace tmm
