#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "tmm/checkpoint.hpp"
#include "tmm/commands.hpp"
#include "tmm/heatmap.hpp"
#include "tmm/run_config.hpp"
#include "tmm/trainer.hpp"
#include "tmm_testing.hpp"

using namespace tmm;
using tmm::test::kind_of;
namespace fs = std::filesystem;

namespace {

RunConfig small_config() {
  std::istringstream text(
      "# small fast model\n"
      "layers = 1\nheads = 2\nhidden = 16\nffn = 32\nmax_len = 64\n"
      "lr = 0.003\nbatch_size = 16\nepochs = 2\npatience = 0\nruns = 1\nseed = 3\n"
      "synth_train = 150\nsynth_dev = 40\nsynth_test = 40\n");
  return RunConfig::parse(text);
}

const Datasets& small_data() {
  static const Datasets d = synthetic_datasets(small_config());
  return d;
}

const RunResult& small_run() {
  static const RunResult r = train_run(small_config(), small_data(), 0);
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("tmm_test_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Corpus read_text(const std::string& body, Task task = Task::Atsa, bool labeled = true) {
  std::istringstream in(std::string(kRecordFormatHeader) + "\n" + body);
  return read_corpus(in, task, "inline", {labeled, Split::Unspecified});
}

}  // namespace

TEST(RunConfig, DefaultsAndParsing) {
  const RunConfig d;
  EXPECT_EQ(d.model.layers, 2u);
  EXPECT_EQ(d.model.heads, 4u);
  EXPECT_EQ(d.model.hidden, 64u);
  EXPECT_EQ(d.epochs, 50u);
  EXPECT_EQ(d.runs, 3u);
  EXPECT_EQ(d.synthetic.seed, 7u);
  EXPECT_EQ(d.synthetic.train_size, 2000u);
  EXPECT_NO_THROW(d.validate());

  const RunConfig c = small_config();
  EXPECT_EQ(c.model.hidden, 16u);
  EXPECT_EQ(c.adam.learning_rate, 0.003);
  EXPECT_EQ(c.synthetic.train_size, 150u);
  EXPECT_EQ(c.patience, 0u);
}

TEST(RunConfig, TextFormRoundTrips) {
  RunConfig c = small_config();
  c.set("task", "acsa");
  c.set("scheme", "baseline-single");
  c.set("loss", "sum");
  c.set("dropout", "0.15");
  c.set("train", "a/train.jsonl");
  std::istringstream in(c.to_text());
  const RunConfig back = RunConfig::parse(in);
  EXPECT_EQ(back.to_text(), c.to_text());
  EXPECT_EQ(back.task, Task::Acsa);
  EXPECT_EQ(back.synthetic.task, Task::Acsa);
  EXPECT_EQ(back.scheme, TrainScheme::Baseline);
  EXPECT_EQ(back.reduction, LossReduction::Sum);
  EXPECT_EQ(back.model.dropout, 0.15);
}

TEST(RunConfig, Errors) {
  auto parse = [](const std::string& s) {
    std::istringstream in(s);
    return RunConfig::parse(in, "t.cfg");
  };
  EXPECT_EQ(kind_of([&] { parse("nope = 1\n"); }), ErrorKind::ConfigError);
  EXPECT_EQ(kind_of([&] { parse("layers = two\n"); }), ErrorKind::ConfigError);
  EXPECT_EQ(kind_of([&] { parse("layers\n"); }), ErrorKind::ConfigError);
  EXPECT_EQ(kind_of([&] { parse("lr = -1\n"); }), ErrorKind::ConfigError);
  EXPECT_EQ(kind_of([&] { parse("heads = 5\n"); }), ErrorKind::ConfigError);
  EXPECT_EQ(kind_of([&] { parse("loss = max\n"); }), ErrorKind::ConfigError);
  EXPECT_EQ(kind_of([&] { parse("batch_size = 0\n"); }), ErrorKind::ConfigError);
  EXPECT_EQ(kind_of([&] { parse_scheme("pairs"); }), ErrorKind::ConfigError);
  EXPECT_EQ(kind_of([] { RunConfig::load("/nonexistent/x.cfg"); }), ErrorKind::IoError);
  try {
    parse("\n\nbogus = 1\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("t.cfg:3"), std::string::npos) << e.what();
  }
}

TEST(ParseLayer, AllOrIndex) {
  EXPECT_EQ(parse_layer("all"), std::nullopt);
  EXPECT_EQ(parse_layer("1"), 1u);
  EXPECT_EQ(kind_of([] { parse_layer("-1"); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([] { parse_layer("x"); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([] { parse_layer(""); }), ErrorKind::InvalidArgument);
}

TEST(Checkpoint, SerializationIsByteStable) {
  const Checkpoint& ck = small_run().best;
  const std::string bytes = ck.serialize();
  EXPECT_EQ(bytes.substr(0, 8), std::string("TMMCKPT\0", 8));
  const Checkpoint back = Checkpoint::deserialize(bytes);
  EXPECT_TRUE(back == ck);
  EXPECT_EQ(back.serialize(), bytes);
  EXPECT_TRUE(back.adam.has_value());
  EXPECT_EQ(back.metadata, ck.metadata);

  const fs::path dir = scratch("ckpt");
  ck.save(dir / "m.ckpt");
  EXPECT_EQ(slurp(dir / "m.ckpt"), bytes);
  EXPECT_TRUE(Checkpoint::load(dir / "m.ckpt") == ck);
}

TEST(Checkpoint, RejectsCorruptInput) {
  const std::string bytes = small_run().best.serialize();
  EXPECT_EQ(kind_of([&] { Checkpoint::deserialize(""); }), ErrorKind::CheckpointFormat);
  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_EQ(kind_of([&] { Checkpoint::deserialize(bad_magic); }), ErrorKind::CheckpointFormat);
  std::string bad_version = bytes;
  bad_version[8] = 9;
  EXPECT_EQ(kind_of([&] { Checkpoint::deserialize(bad_version); }), ErrorKind::CheckpointFormat);
  EXPECT_EQ(kind_of([&] { Checkpoint::deserialize(bytes.substr(0, bytes.size() - 5)); }),
            ErrorKind::CheckpointFormat);
  EXPECT_EQ(kind_of([&] { Checkpoint::deserialize(bytes + "x"); }), ErrorKind::CheckpointFormat);
  EXPECT_EQ(kind_of([] { Checkpoint::load("/nonexistent/m.ckpt"); }), ErrorKind::IoError);
}

TEST(Training, IdenticalSeedsGiveIdenticalCheckpoints) {
  const RunResult again = train_run(small_config(), small_data(), 0);
  EXPECT_EQ(again.best.serialize(), small_run().best.serialize());
  ASSERT_EQ(again.epochs.size(), small_run().epochs.size());
  for (std::size_t e = 0; e < again.epochs.size(); ++e) {
    EXPECT_EQ(again.epochs[e].train_loss, small_run().epochs[e].train_loss);
    EXPECT_EQ(again.epochs[e].dev, small_run().epochs[e].dev);
  }
  EXPECT_EQ(again.test->report, small_run().test->report);
}

TEST(Training, RunIndexOffsetsSeed) {
  RunConfig c = small_config();
  c.epochs = 1;
  const RunResult r1 = train_run(c, small_data(), 1);
  EXPECT_EQ(r1.seed, 4u);
  EXPECT_EQ(r1.best.metadata.run, 1u);
  EXPECT_NE(r1.best.serialize(), train_run(c, small_data(), 0).best.serialize());
}

TEST(Training, ZeroLearningRateKeepsInitialParameters) {
  RunConfig c = small_config();
  c.adam.learning_rate = 0.0;
  c.epochs = 1;
  const RunResult r = train_run(c, small_data(), 0);
  ModelConfig mc = c.model;
  mc.vocab_size = r.best.vocab.size();
  const ModelParams init = ModelParams::initialize(mc, r.seed);
  const auto a = r.best.params.named();
  const auto b = init.named();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_TRUE(std::equal(a[i].tensor->values().begin(), a[i].tensor->values().end(), b[i].tensor->values().begin()))
        << a[i].name;
  }
}

TEST(Training, ForwardPassesPerEpoch) {
  const Corpus& train = small_data().train;
  EXPECT_EQ(small_run().forward_passes_per_epoch, train.size());
  EXPECT_EQ(forward_pass_count(train, TrainScheme::Tmm), train.size());
  EXPECT_EQ(forward_pass_count(train, TrainScheme::Baseline), train.aspect_count());
}

TEST(Training, TaskMismatchIsRejected) {
  RunConfig c = small_config();
  c.set("task", "acsa");
  EXPECT_EQ(kind_of([&] { train_run(c, small_data(), 0); }), ErrorKind::TaskMismatch);
}

TEST(Training, DivergenceIsDetected) {
  RunConfig c = small_config();
  c.adam.learning_rate = 1e306;
  c.clip_norm = 0.0;
  c.epochs = 3;
  EXPECT_EQ(kind_of([&] { train_run(c, small_data(), 0); }), ErrorKind::DivergenceDetected);
  EXPECT_EQ(exit_code(ErrorKind::DivergenceDetected), 2);
  EXPECT_EQ(exit_code(ErrorKind::ConfigError), 1);
}

TEST(Evaluate, DeterministicAndConsistentWithPredict) {
  const Checkpoint& model = small_run().best;
  const Corpus& test = *small_data().test;
  const Evaluation a = evaluate(model, test);
  const Evaluation b = evaluate(model, test);
  EXPECT_EQ(a.report, b.report);
  EXPECT_EQ(a.forward_passes, test.size());
  const auto preds = predict(model, test);
  std::size_t correct = 0, total = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto gold = test.polarities(i);
    ASSERT_EQ(preds[i].labels.size(), gold.size());
    for (std::size_t k = 0; k < gold.size(); ++k) {
      correct += preds[i].labels[k] == gold[k];
      ++total;
    }
  }
  EXPECT_EQ(a.report.accuracy, static_cast<double>(correct) / static_cast<double>(total));
}

TEST(Predict, ZeroAspectSentenceAndProbabilities) {
  const Checkpoint& model = small_run().best;
  const Corpus c = read_text(
      R"({"text": "the pasta is great but the waiter is rude .", "task": "atsa", "aspects": [{"term": "pasta", "from": 1, "to": 2}, {"term": "waiter", "from": 6, "to": 7}]})"
      "\n"
      R"({"text": "nothing to see here", "task": "atsa", "aspects": []})"
      "\n",
      Task::Atsa, false);
  std::size_t passes = 0;
  const auto preds = predict(model, c, &passes);
  ASSERT_EQ(preds.size(), 2u);
  EXPECT_EQ(passes, 1u);
  EXPECT_TRUE(preds[1].labels.empty());
  ASSERT_EQ(preds[0].labels.size(), 2u);
  for (const auto& p : preds[0].probabilities) {
    EXPECT_NEAR(p[0] + p[1] + p[2], 1.0, 1e-12);
    for (double v : p) EXPECT_TRUE(v >= 0.0 && v <= 1.0);
  }
  EXPECT_EQ(kind_of([&] { evaluate(model, read_text(R"({"text": "a", "task": "acsa", "aspects": []})" "\n", Task::Acsa)); }),
            ErrorKind::TaskMismatch);
}

TEST(Predict, BaselineUsesOnePassPerAspect) {
  RunConfig c = small_config();
  c.scheme = TrainScheme::Baseline;
  c.epochs = 1;
  const RunResult r = train_run(c, small_data(), 0);
  const Corpus& test = *small_data().test;
  EXPECT_EQ(r.test->forward_passes, test.aspect_count());
  EXPECT_EQ(r.forward_passes_per_epoch, small_data().train.aspect_count());
}

TEST(Attention, SingleHeadMatrixFileEqualsRawAttention) {
  RunConfig c = small_config();
  c.model.layers = 1;
  c.model.heads = 1;
  c.epochs = 1;
  const RunResult r = train_run(c, small_data(), 0);
  const Corpus one = read_text(R"({"text": "pasta", "task": "atsa", "aspects": [{"term": "pasta", "from": 0, "to": 1, "polarity": "positive"}]})" "\n");
  const AttentionView view = attention_view(r.best, one, 0, 0);
  ASSERT_EQ(view.matrix.shape(), (Shape{3, 3}));
  EXPECT_EQ(view.tokens, (std::vector<std::string>{"[AS]", "pasta", "[AE]"}));

  Tape tape;
  const EncoderOutput out = encode(bind_params_constant(tape, r.best.params), view.sequence.ids, r.best.config, Mode::Eval, 0);
  const Tensor& raw = out.attention.maps[0][0];

  std::stringstream file;
  write_attention_matrix(file, view.matrix);
  const Tensor back = read_attention_matrix(file);
  ASSERT_EQ(back.shape(), raw.shape());
  for (std::size_t i = 0; i < raw.size(); ++i) EXPECT_EQ(back[i], raw[i]);
  for (std::size_t row = 0; row < 3; ++row) {
    double s = 0.0;
    for (std::size_t col = 0; col < 3; ++col) s += back.at(row, col);
    EXPECT_NEAR(s, 1.0, 1e-9);
  }
  EXPECT_EQ(view.top_content_position(0), 1u);
}

TEST(Attention, ViewOfTrainedModel) {
  const Checkpoint& model = small_run().best;
  const Corpus& test = *small_data().test;
  const AttentionView all = attention_view(model, test, 0, std::nullopt);
  const AttentionView l0 = attention_view(model, test, 0, 0);
  const std::size_t t = all.sequence.ids.size();
  EXPECT_EQ(all.matrix.shape(), (Shape{t, t}));
  for (std::size_t row = 0; row < t; ++row) {
    double s = 0.0;
    for (std::size_t col = 0; col < t; ++col) s += all.matrix.at(row, col);
    EXPECT_NEAR(s, 1.0, 1e-9);
  }
  EXPECT_EQ(all.anchor_labels.size(), test.polarities(0).size());
  EXPECT_EQ(all.prediction.labels.size(), all.anchor_labels.size());
  const std::string html = render_heatmap_html(l0, "t <1>");
  EXPECT_NE(html.find("t &lt;1&gt;"), std::string::npos);
  EXPECT_NE(html.find(all.anchor_labels[0]), std::string::npos);
  EXPECT_EQ(kind_of([&] { attention_view(model, test, 0, 1); }), ErrorKind::LayerOutOfRange);
  EXPECT_EQ(kind_of([&] { attention_view(model, test, test.size(), 0); }), ErrorKind::IndexOutOfRange);
  const Corpus none = read_text(R"({"text": "plain words", "task": "atsa", "aspects": []})" "\n");
  EXPECT_EQ(kind_of([&] { attention_view(model, none, 0, 0); }), ErrorKind::EmptyInput);
}

TEST(Attention, MatrixReaderRejectsRaggedInput) {
  std::stringstream ragged("0.5 0.5\n1\n");
  EXPECT_EQ(kind_of([&] { read_attention_matrix(ragged); }), ErrorKind::ParseError);
  std::stringstream text("0.5 x\n");
  EXPECT_EQ(kind_of([&] { read_attention_matrix(text); }), ErrorKind::ParseError);
  std::stringstream empty("");
  EXPECT_EQ(kind_of([&] { read_attention_matrix(empty); }), ErrorKind::ParseError);
}

TEST(Compare, ForwardCountsMatchSentencesAndAspects) {
  RunConfig c = small_config();
  c.epochs = 1;
  const Comparison cmp = run_comparison(c, small_data());
  const Corpus& test = *small_data().test;
  EXPECT_EQ(cmp.test_sentences, test.size());
  EXPECT_EQ(cmp.test_aspects, test.aspect_count());
  EXPECT_TRUE(cmp.forward_counts_hold());
  EXPECT_LT(cmp.tmm_forward_passes, cmp.baseline_forward_passes);
  const std::string json = cmp.to_json();
  EXPECT_NE(json.find("\"tmm_equals_sentences\": true"), std::string::npos);
  EXPECT_NE(json.find("\"delta_macro_f1\""), std::string::npos);
}

TEST(Commands, TrainWritesArtifactsDeterministically) {
  const fs::path dir = scratch("train");
  const fs::path cfg_path = dir / "small.cfg";
  {
    std::ofstream f(cfg_path);
    f << small_config().to_text();
  }
  CommandOptions gen;
  gen.config = cfg_path;
  gen.out = dir / "data";
  std::ostringstream sink;
  cmd_gen_data(gen, sink);
  EXPECT_NE(sink.str().find("Sen. 150"), std::string::npos) << sink.str();

  auto train_into = [&](const std::string& name) {
    CommandOptions o;
    o.config = cfg_path;
    o.data = dir / "data";
    o.out = dir / name;
    o.quiet = true;
    std::ostringstream out, log;
    cmd_train(o, out, log);
    return dir / name;
  };
  const fs::path a = train_into("a"), b = train_into("b");
  for (const char* f : {"model.ckpt", "run1.ckpt", "report.json", "train_log.jsonl", "config.txt"}) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }

  CommandOptions ev;
  ev.checkpoint = a / "model.ckpt";
  ev.data = dir / "data" / "test.jsonl";
  ev.out = dir / "eval.json";
  std::ostringstream e1, e2;
  const MetricsReport r1 = cmd_evaluate(ev, e1);
  const MetricsReport r2 = cmd_evaluate(ev, e2);
  EXPECT_EQ(r1, r2);
  EXPECT_EQ(e1.str(), e2.str());
  EXPECT_EQ(report_from_json(slurp(dir / "eval.json")).macro_f1, r1.macro_f1);

  CommandOptions pr;
  pr.checkpoint = a / "model.ckpt";
  pr.data = dir / "data" / "test.jsonl";
  pr.out = dir / "pred.jsonl";
  std::ostringstream p;
  cmd_predict(pr, p);
  const Corpus predicted = load_corpus(dir / "pred.jsonl", Task::Atsa);
  EXPECT_EQ(predicted.size(), 40u);

  CommandOptions at;
  at.checkpoint = a / "model.ckpt";
  at.data = dir / "data" / "test.jsonl";
  at.out = dir / "attn" / "s0";
  at.layer = "0";
  std::ostringstream s;
  cmd_attn(at, s);
  EXPECT_TRUE(fs::exists(dir / "attn" / "s0.txt"));
  EXPECT_TRUE(fs::exists(dir / "attn" / "s0.html"));
}

TEST(Commands, RunCommandMapsErrorsToExitCodes) {
  std::ostringstream out, err;
  CommandOptions missing;
  EXPECT_EQ(run_command("evaluate", missing, out, err), 1);
  EXPECT_NE(err.str().find("--checkpoint"), std::string::npos);
  EXPECT_EQ(run_command("frobnicate", missing, out, err), 1);
  CommandOptions bad_layer;
  bad_layer.checkpoint = "/nonexistent.ckpt";
  EXPECT_EQ(run_command("attn", bad_layer, out, err), 1);

  const fs::path dir = scratch("diverge");
  RunConfig c = small_config();
  c.adam.learning_rate = 1e306;
  c.clip_norm = 0.0;
  c.epochs = 3;
  {
    std::ofstream f(dir / "d.cfg");
    f << c.to_text();
  }
  CommandOptions gen;
  gen.config = dir / "d.cfg";
  gen.out = dir / "data";
  ASSERT_EQ(run_command("gen-data", gen, out, err), 0);
  CommandOptions tr;
  tr.config = dir / "d.cfg";
  tr.data = dir / "data";
  tr.out = dir / "run";
  tr.quiet = true;
  EXPECT_EQ(run_command("train", tr, out, err), 2);
}

#ifdef TMM_CLI_PATH
namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(TMM_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(CliBinary, ExitCodes) {
  const fs::path dir = scratch("binary");
  EXPECT_EQ(run_cli("--help"), 0);
  EXPECT_EQ(run_cli(""), 1);
  EXPECT_EQ(run_cli("train --bogus"), 1);
  EXPECT_EQ(run_cli("train --scheme pairs"), 1);
  EXPECT_EQ(run_cli("evaluate --data " + (dir / "none.jsonl").string()), 1);
  EXPECT_EQ(run_cli("attn --layer x --data x"), 1);
  EXPECT_EQ(run_cli("grad-check --out " + (dir / "gc.json").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "gc.json"));
  EXPECT_EQ(run_cli("gen-data --seed 11 --out " + (dir / "data").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "data" / "test.jsonl"));
}
#endif
