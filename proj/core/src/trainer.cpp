#include "tmm/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "tmm/aspect_head.hpp"
#include "tmm/error.hpp"

namespace tmm {

Vocab build_vocab(const Corpus& train, std::size_t min_frequency) {
  const auto sequences = train.token_sequences();
  std::vector<std::string> extra;
  if (train.task == Task::Acsa) extra = category_tokens();
  return Vocab::build(sequences, min_frequency, extra);
}

std::vector<EncodedSequence> encode_corpus(const Corpus& corpus, const Vocab& vocab, TrainScheme scheme,
                                           std::size_t max_len) {
  std::vector<EncodedSequence> out;
  out.reserve(scheme == TrainScheme::Tmm ? corpus.size() : corpus.aspect_count());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (corpus.task == Task::Atsa) {
      const AtsaExample& ex = corpus.atsa[i];
      if (scheme == TrainScheme::Tmm) {
        out.push_back(encode_tmm_atsa(ex, vocab, max_len));
      } else {
        for (std::size_t a = 0; a < ex.aspects.size(); ++a) out.push_back(encode_baseline_single(ex, a, vocab, max_len));
      }
    } else {
      const AcsaExample& ex = corpus.acsa[i];
      if (scheme == TrainScheme::Tmm) {
        out.push_back(encode_tmm_acsa(ex, vocab, max_len));
      } else {
        for (std::size_t a = 0; a < ex.aspects.size(); ++a) out.push_back(encode_baseline_single(ex, a, vocab, max_len));
      }
    }
  }
  return out;
}

std::size_t forward_pass_count(const Corpus& corpus, TrainScheme scheme) noexcept {
  if (scheme == TrainScheme::Baseline) return corpus.aspect_count();
  std::size_t n = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const std::size_t m = corpus.task == Task::Atsa ? corpus.atsa[i].aspects.size() : corpus.acsa[i].aspects.size();
    if (m > 0) ++n;
  }
  return n;
}

namespace {

SentimentDistribution forward(const BoundParams& bound, const EncodedSequence& seq, const ModelConfig& config,
                              Mode mode, std::uint64_t seed) {
  EncoderOutput out = encode(bound, seq.ids, config, mode, seed);
  return classify(gather_anchors(out.hidden, seq.anchors), bound.classifier_weight, bound.classifier_bias);
}

void check_task(const Checkpoint& model, const Corpus& corpus) {
  if (model.task != corpus.task) {
    throw Error(ErrorKind::TaskMismatch, "model was trained for " + std::string(to_string(model.task)) +
                                             " but the data is " + std::string(to_string(corpus.task)));
  }
}

std::vector<Polarity> flatten_gold(const Corpus& corpus) {
  std::vector<Polarity> out;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    for (Polarity p : corpus.polarities(i)) out.push_back(p);
  }
  return out;
}

}  // namespace

std::vector<Prediction> predict(const Checkpoint& model, const Corpus& corpus, std::size_t* forward_passes) {
  check_task(model, corpus);
  const auto sequences = encode_corpus(corpus, model.vocab, model.scheme, model.config.max_len);
  std::vector<Prediction> out(corpus.size());
  std::size_t passes = 0;
  std::size_t next = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const std::size_t m = corpus.polarities(i).size();
    const std::size_t instances = model.scheme == TrainScheme::Tmm ? 1 : m;
    for (std::size_t k = 0; k < instances; ++k, ++next) {
      const EncodedSequence& seq = sequences[next];
      if (seq.anchors.empty()) continue;
      Tape tape;
      const BoundParams bound = bind_params_constant(tape, model.params);
      const SentimentDistribution dist = forward(bound, seq, model.config, Mode::Eval, 0);
      ++passes;
      const auto labels = dist.predictions();
      for (std::size_t a = 0; a < dist.count; ++a) {
        const auto probs = dist.probabilities(a);
        out[i].labels.push_back(labels[a]);
        out[i].probabilities.push_back({probs[0], probs[1], probs[2]});
      }
    }
  }
  if (forward_passes) *forward_passes = passes;
  return out;
}

Evaluation evaluate(const Checkpoint& model, const Corpus& corpus) {
  check_task(model, corpus);
  Evaluation ev;
  const auto predictions = predict(model, corpus, &ev.forward_passes);
  std::vector<Polarity> flat;
  for (const auto& p : predictions) flat.insert(flat.end(), p.labels.begin(), p.labels.end());
  ev.report = score(flat, flatten_gold(corpus));
  return ev;
}

RunResult train_run(const RunConfig& config, const Datasets& data, std::size_t run_index,
                    const EpochCallback& on_epoch) {
  config.validate();
  if (data.train.task != config.task || data.dev.task != config.task ||
      (data.test && data.test->task != config.task)) {
    throw Error(ErrorKind::TaskMismatch, "corpus task differs from the configured task");
  }

  RunResult result;
  result.seed = config.seed + run_index;

  Checkpoint model;
  model.task = config.task;
  model.scheme = config.scheme;
  model.vocab = build_vocab(data.train, config.min_frequency);
  model.config = config.model;
  model.config.vocab_size = model.vocab.size();
  model.params = ModelParams::initialize(model.config, result.seed);
  model.metadata.seed = result.seed;
  model.metadata.run = run_index;

  const auto all_sequences = encode_corpus(data.train, model.vocab, config.scheme, model.config.max_len);
  std::vector<const EncodedSequence*> train_set;
  for (const auto& s : all_sequences) {
    if (!s.anchors.empty()) train_set.push_back(&s);
  }
  if (train_set.empty()) throw Error(ErrorKind::EmptyBatch, "training corpus has no aspects");
  result.forward_passes_per_epoch = train_set.size();

  std::vector<Tensor*> params = model.params.all();
  AdamState adam = AdamState::for_params(params, config.adam);

  // Shuffling and dropout draw from one stream seeded by the run seed; the
  // parameter initializer uses its own stream with the same seed.
  std::seed_seq seq{result.seed, std::uint64_t{0x746d6d}};
  std::mt19937_64 rng(seq);

  Checkpoint best = model;
  best.adam = adam;
  double best_f1 = -1.0;
  std::size_t best_epoch = 0;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    std::shuffle(train_set.begin(), train_set.end(), rng);
    double loss_sum = 0.0;
    std::size_t loss_aspects = 0;

    EpochLog log;
    try {
      for (std::size_t begin = 0; begin < train_set.size(); begin += config.batch_size) {
        const std::size_t end = std::min(begin + config.batch_size, train_set.size());
        model.params.zero_grad();
        Tape tape;
        const BoundParams bound = bind_params(tape, model.params);
        std::vector<SentimentDistribution> dists;
        std::vector<std::vector<Polarity>> gold;
        dists.reserve(end - begin);
        gold.reserve(end - begin);
        for (std::size_t i = begin; i < end; ++i) {
          dists.push_back(forward(bound, *train_set[i], model.config, Mode::Train, rng()));
          gold.push_back(train_set[i]->gold);
        }
        JointLoss loss = joint_loss(dists, gold, config.reduction);
        if (!std::isfinite(loss.raw)) {
          throw Error(ErrorKind::DivergenceDetected, "non-finite loss in epoch " + std::to_string(epoch) +
                                                         " (run seed " + std::to_string(result.seed) + ")");
        }
        loss_sum += loss.raw;
        loss_aspects += loss.aspects;
        tape.backward(loss.loss);
        if (config.clip_norm > 0.0) clip_grad_norm(params, config.clip_norm);
        adam_step(params, adam);
      }
      model.metadata.epoch = epoch;
      log.dev = evaluate(model, data.dev).report;
    } catch (const Error& e) {
      // NaN/Inf raised inside an op or by the optimizer
      if (e.kind() != ErrorKind::NonFiniteInput && e.kind() != ErrorKind::NonFiniteGradient) throw;
      throw Error(ErrorKind::DivergenceDetected, "epoch " + std::to_string(epoch) + " (run seed " +
                                                     std::to_string(result.seed) + "): " + e.detail());
    }
    log.run = run_index;
    log.epoch = epoch;
    log.train_loss = loss_sum / static_cast<double>(loss_aspects);
    if (log.dev.macro_f1 > best_f1) {
      best_f1 = log.dev.macro_f1;
      best_epoch = epoch;
      log.improved = true;
      best.params = model.params;
      best.adam = adam;
      best.metadata.epoch = epoch;
      best.metadata.best_dev_macro_f1 = best_f1;
    }
    log.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (on_epoch) on_epoch(log);
    result.epochs.push_back(std::move(log));
    if (config.patience > 0 && epoch - best_epoch >= config.patience) break;
  }

  for (Tensor* t : best.params.all()) t->drop_grad();
  result.best = std::move(best);
  if (data.test) result.test = evaluate(result.best, *data.test);
  return result;
}

TrainResult train(const RunConfig& config, const Datasets& data, const EpochCallback& on_epoch) {
  TrainResult result;
  std::vector<MetricsReport> tests;
  for (std::size_t r = 0; r < config.runs; ++r) {
    result.runs.push_back(train_run(config, data, r, on_epoch));
    if (result.runs.back().test) tests.push_back(result.runs.back().test->report);
  }
  if (!tests.empty()) result.averaged_test = average_reports(tests);
  return result;
}

}  // namespace tmm
