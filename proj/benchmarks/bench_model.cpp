#include <benchmark/benchmark.h>

#include "tmm/adam.hpp"
#include "tmm/aspect_head.hpp"
#include "tmm/encoder.hpp"
#include "tmm/synthetic.hpp"
#include "tmm/trainer.hpp"

namespace {

struct Fixture {
  tmm::Corpus corpus;
  tmm::Vocab vocab;
  std::vector<tmm::EncodedSequence> sequences;
  tmm::ModelConfig config;
  tmm::ModelParams params;

  Fixture() {
    tmm::SyntheticSpec spec = tmm::SyntheticSpec::defaults();
    spec.train_size = 64;
    spec.dev_size = 0;
    spec.test_size = 0;
    corpus = tmm::generate_synthetic(spec).train.corpus;
    vocab = tmm::build_vocab(corpus, 1);
    sequences = tmm::encode_corpus(corpus, vocab, tmm::TrainScheme::Tmm, config.max_len);
    config.vocab_size = vocab.size();
    params = tmm::ModelParams::initialize(config, 7);
  }
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

void BM_EncodeSentence(benchmark::State& state) {
  Fixture& f = fixture();
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(tmm::encode_tmm_atsa(f.corpus.atsa[i++ % f.corpus.size()], f.vocab));
  }
}
BENCHMARK(BM_EncodeSentence);

void BM_ForwardEval(benchmark::State& state) {
  Fixture& f = fixture();
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& seq = f.sequences[i++ % f.sequences.size()];
    tmm::Tape tape;
    const auto bound = tmm::bind_params_constant(tape, f.params);
    auto out = tmm::encode(bound, seq.ids, f.config, tmm::Mode::Eval, 0);
    auto dist = tmm::classify(tmm::gather_anchors(out.hidden, seq.anchors), bound.classifier_weight,
                              bound.classifier_bias);
    benchmark::DoNotOptimize(dist.probs->value()[0]);
  }
}
BENCHMARK(BM_ForwardEval);

// One optimizer step on a batch of 32 sentences with the default model.
void BM_TrainStep(benchmark::State& state) {
  Fixture& f = fixture();
  auto params = f.params.all();
  tmm::AdamState adam = tmm::AdamState::for_params(params, {});
  std::uint64_t seed = 0;
  for (auto _ : state) {
    f.params.zero_grad();
    tmm::Tape tape;
    const auto bound = tmm::bind_params(tape, f.params);
    std::vector<tmm::SentimentDistribution> dists;
    std::vector<std::vector<tmm::Polarity>> gold;
    for (std::size_t i = 0; i < 32; ++i) {
      const auto& seq = f.sequences[i];
      auto out = tmm::encode(bound, seq.ids, f.config, tmm::Mode::Train, ++seed);
      dists.push_back(tmm::classify(tmm::gather_anchors(out.hidden, seq.anchors), bound.classifier_weight,
                                    bound.classifier_bias));
      gold.push_back(seq.gold);
    }
    auto loss = tmm::joint_loss(dists, gold);
    tape.backward(loss.loss);
    tmm::adam_step(params, adam);
    benchmark::DoNotOptimize(loss.raw);
  }
}
BENCHMARK(BM_TrainStep)->Unit(benchmark::kMillisecond);

}  // namespace
