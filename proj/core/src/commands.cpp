#include "tmm/commands.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "json_io.hpp"
#include "tmm/error.hpp"
#include "tmm/heatmap.hpp"
#include "tmm/synthetic.hpp"

namespace tmm {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

RunConfig resolve_config(const CommandOptions& options) {
  RunConfig cfg = options.config ? RunConfig::load(*options.config) : RunConfig{};
  if (options.task) {
    cfg.set("task", *options.task);
  }
  if (options.scheme) cfg.scheme = parse_scheme(*options.scheme);
  if (options.seed) cfg.seed = *options.seed;
  cfg.validate();
  return cfg;
}

Datasets load_datasets(const RunConfig& config, const std::optional<fs::path>& data_dir) {
  fs::path train = config.train_path, dev = config.dev_path, test = config.test_path;
  if (data_dir) {
    train = *data_dir / "train.jsonl";
    dev = *data_dir / "dev.jsonl";
    test = *data_dir / "test.jsonl";
  }
  if (train.empty() || dev.empty()) {
    throw Error(ErrorKind::ConfigError, "no training data: pass --data DIR or set train/dev in the config");
  }
  Datasets d;
  d.train = load_corpus(train, config.task, {true, Split::Train});
  d.dev = load_corpus(dev, config.task, {true, Split::Dev});
  if (!test.empty() && (!data_dir || fs::exists(test))) d.test = load_corpus(test, config.task, {true, Split::Test});
  return d;
}

Datasets synthetic_datasets(const RunConfig& config) {
  SyntheticSpec spec = config.synthetic;
  spec.task = config.task;
  SyntheticData data = generate_synthetic(spec);
  Datasets d;
  d.train = std::move(data.train.corpus);
  d.dev = std::move(data.dev.corpus);
  if (data.test.corpus.size() > 0) d.test = std::move(data.test.corpus);
  return d;
}

std::optional<std::size_t> parse_layer(std::string_view text) {
  if (text == "all") return std::nullopt;
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorKind::InvalidArgument, "--layer expects an integer or 'all', got '" + std::string(text) + "'");
  }
  return v;
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  f << text;
  if (!f) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

ordered_json epoch_json(const EpochLog& e, std::uint64_t seed) {
  ordered_json j;
  j["run"] = e.run;
  j["seed"] = seed;
  j["epoch"] = e.epoch;
  j["train_loss"] = e.train_loss;
  j["dev_macro_f1"] = e.dev.macro_f1;
  j["dev_accuracy"] = e.dev.accuracy;
  j["improved"] = e.improved;
  return j;
}

EpochCallback progress(std::ostream& log, bool quiet, std::string prefix) {
  if (quiet) return {};
  return [&log, prefix = std::move(prefix)](const EpochLog& e) {
    char buf[200];
    std::snprintf(buf, sizeof buf, "%srun %zu epoch %2zu  loss %.4f  dev macro_f1 %.4f  acc %.4f%s  (%.1fs)\n",
                  prefix.c_str(), e.run + 1, e.epoch, e.train_loss, e.dev.macro_f1, e.dev.accuracy,
                  e.improved ? " *" : "", e.seconds);
    log << buf << std::flush;
  };
}

const Corpus& require_test(const Datasets& data) {
  if (!data.test) throw Error(ErrorKind::ConfigError, "a test split is required");
  return *data.test;
}

}  // namespace

std::string train_report_json(const RunConfig& config, const TrainResult& result) {
  ordered_json doc;
  doc["task"] = to_string(config.task);
  doc["scheme"] = to_string(config.scheme);
  doc["runs"] = ordered_json::array();
  for (const RunResult& r : result.runs) {
    ordered_json run;
    run["seed"] = r.seed;
    run["epochs_trained"] = r.epochs.size();
    run["best_epoch"] = r.best.metadata.epoch;
    run["best_dev_macro_f1"] = r.best.metadata.best_dev_macro_f1;
    run["forward_passes_per_epoch"] = r.forward_passes_per_epoch;
    if (r.test) {
      run["test"] = detail::report_json(r.test->report);
    } else {
      run["test"] = nullptr;
    }
    doc["runs"].push_back(std::move(run));
  }
  if (result.averaged_test) {
    doc["averaged_test"] = detail::report_json(*result.averaged_test);
  } else {
    doc["averaged_test"] = nullptr;
  }
  return doc.dump(2);
}

double Comparison::delta_macro_f1() const {
  if (!tmm.averaged_test || !baseline.averaged_test) return 0.0;
  return tmm.averaged_test->macro_f1 - baseline.averaged_test->macro_f1;
}

std::string Comparison::to_json() const {
  ordered_json doc;
  auto avg = [](const TrainResult& r) {
    return r.averaged_test ? detail::report_json(*r.averaged_test) : ordered_json(nullptr);
  };
  doc["tmm"] = avg(tmm);
  doc["baseline"] = avg(baseline);
  doc["delta_macro_f1"] = delta_macro_f1();
  doc["delta_accuracy"] = (tmm.averaged_test && baseline.averaged_test)
                              ? tmm.averaged_test->accuracy - baseline.averaged_test->accuracy
                              : 0.0;
  doc["forward_passes"] = {{"test_sentences", test_sentences},
                           {"test_aspects", test_aspects},
                           {"tmm", tmm_forward_passes},
                           {"baseline", baseline_forward_passes},
                           {"tmm_equals_sentences", tmm_forward_passes == test_sentences},
                           {"baseline_equals_aspects", baseline_forward_passes == test_aspects}};
  return doc.dump(2);
}

Comparison run_comparison(const RunConfig& config, const Datasets& data, const EpochCallback& on_epoch) {
  const Corpus& test = require_test(data);
  Comparison c;
  RunConfig tmm_cfg = config;
  tmm_cfg.scheme = TrainScheme::Tmm;
  RunConfig base_cfg = config;
  base_cfg.scheme = TrainScheme::Baseline;
  c.tmm = train(tmm_cfg, data, on_epoch);
  c.baseline = train(base_cfg, data, on_epoch);
  for (std::size_t i = 0; i < test.size(); ++i) {
    if (!test.polarities(i).empty()) ++c.test_sentences;
  }
  c.test_aspects = test.aspect_count();
  c.tmm_forward_passes = c.tmm.runs.front().test->forward_passes;
  c.baseline_forward_passes = c.baseline.runs.front().test->forward_passes;
  return c;
}

void cmd_gen_data(const CommandOptions& options, std::ostream& out) {
  RunConfig cfg = resolve_config(options);
  SyntheticSpec spec = cfg.synthetic;
  spec.task = cfg.task;
  if (options.seed) spec.seed = *options.seed;
  const fs::path dir = options.out.value_or("data");
  const SyntheticData data = generate_synthetic(spec);
  fs::create_directories(dir);
  const std::pair<const char*, const SyntheticSplit*> splits[] = {
      {"train", &data.train}, {"dev", &data.dev}, {"test", &data.test}};
  for (const auto& [name, split] : splits) {
    const fs::path path = dir / (std::string(name) + ".jsonl");
    save_corpus(split->corpus, path);
    out << name << ": " << format_stats(compute_stats(split->corpus)) << "  -> " << path.string() << '\n';
  }
}

TrainResult cmd_train(const CommandOptions& options, std::ostream& out, std::ostream& log) {
  RunConfig cfg = resolve_config(options);
  const Datasets data = load_datasets(cfg, options.data);
  const fs::path dir = options.out ? *options.out : (cfg.out_dir.empty() ? fs::path("runs") : cfg.out_dir);
  fs::create_directories(dir);

  TrainResult result = train(cfg, data, progress(log, options.quiet, ""));

  std::string epochs;
  std::size_t best_run = 0;
  for (std::size_t r = 0; r < result.runs.size(); ++r) {
    const RunResult& run = result.runs[r];
    for (const EpochLog& e : run.epochs) epochs += epoch_json(e, run.seed).dump() + "\n";
    run.best.save(dir / ("run" + std::to_string(r + 1) + ".ckpt"));
    if (run.best.metadata.best_dev_macro_f1 > result.runs[best_run].best.metadata.best_dev_macro_f1) best_run = r;
  }
  result.runs[best_run].best.save(dir / "model.ckpt");
  write_text(dir / "train_log.jsonl", epochs);
  write_text(dir / "config.txt", cfg.to_text());
  const std::string report = train_report_json(cfg, result);
  write_text(dir / "report.json", report + "\n");

  for (const RunResult& run : result.runs) {
    out << "run seed " << run.seed << ": best epoch " << run.best.metadata.epoch << ", dev macro_f1 "
        << run.best.metadata.best_dev_macro_f1;
    if (run.test) out << ", test macro_f1 " << run.test->report.macro_f1 << ", accuracy " << run.test->report.accuracy;
    out << '\n';
  }
  if (result.averaged_test) {
    out << "averaged test over " << result.runs.size() << " runs:\n" << format_report(*result.averaged_test);
  }
  out << "artifacts in " << dir.string() << '\n';
  return result;
}

namespace {

Checkpoint require_checkpoint(const CommandOptions& options) {
  if (!options.checkpoint) throw Error(ErrorKind::InvalidArgument, "--checkpoint is required");
  return Checkpoint::load(*options.checkpoint);
}

const fs::path& require_data(const CommandOptions& options) {
  if (!options.data) throw Error(ErrorKind::InvalidArgument, "--data is required");
  return *options.data;
}

}  // namespace

MetricsReport cmd_evaluate(const CommandOptions& options, std::ostream& out) {
  const Checkpoint model = require_checkpoint(options);
  const Corpus corpus = load_corpus(require_data(options), model.task);
  const Evaluation ev = evaluate(model, corpus);
  if (options.out) write_text(*options.out, to_json(ev.report) + "\n");
  out << to_json(ev.report) << '\n';
  return ev.report;
}

void cmd_predict(const CommandOptions& options, std::ostream& out) {
  const Checkpoint model = require_checkpoint(options);
  const Corpus corpus = load_corpus(require_data(options), model.task, {false, Split::Unspecified});
  const auto predictions = predict(model, corpus);

  std::ostringstream doc;
  doc << kRecordFormatHeader << '\n';
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    ordered_json record;
    ordered_json aspects = ordered_json::array();
    const Prediction& p = predictions[i];
    const std::size_t m = p.labels.size();
    for (std::size_t a = 0; a < m; ++a) {
      ordered_json asp;
      if (corpus.task == Task::Atsa) {
        const AtsaExample& ex = corpus.atsa[i];
        asp["term"] = ex.term(a);
        asp["from"] = ex.aspects[a].start;
        asp["to"] = ex.aspects[a].end;
      } else {
        asp["category"] = to_string(corpus.acsa[i].aspects[a].category);
      }
      asp["polarity"] = to_string(p.labels[a]);
      asp["probabilities"] = {{"positive", p.probabilities[a][0]},
                              {"neutral", p.probabilities[a][1]},
                              {"negative", p.probabilities[a][2]}};
      aspects.push_back(std::move(asp));
    }
    record["text"] = corpus.task == Task::Atsa ? corpus.atsa[i].text : corpus.acsa[i].text;
    record["task"] = to_string(corpus.task);
    record["aspects"] = std::move(aspects);
    doc << record.dump() << '\n';
  }
  if (options.out) {
    write_text(*options.out, doc.str());
    out << "wrote predictions for " << corpus.size() << " sentences to " << options.out->string() << '\n';
  } else {
    out << doc.str();
  }
}

void cmd_attn(const CommandOptions& options, std::ostream& out) {
  const Checkpoint model = require_checkpoint(options);
  const Corpus corpus = load_corpus(require_data(options), model.task, {false, Split::Unspecified});
  const auto layer = parse_layer(options.layer.value_or("all"));
  const std::size_t index = options.index.value_or(0);
  const AttentionView view = attention_view(model, corpus, index, layer);

  const fs::path prefix = options.out.value_or("attention");
  std::ostringstream matrix;
  write_attention_matrix(matrix, view.matrix);
  const fs::path matrix_path = fs::path(prefix.string() + ".txt");
  const fs::path html_path = fs::path(prefix.string() + ".html");
  write_text(matrix_path, matrix.str());
  const std::string title = "Attention, " + (layer ? "layer " + std::to_string(*layer) : std::string("all layers")) +
                            ", head average: " + (corpus.task == Task::Atsa ? corpus.atsa[index].text
                                                                             : corpus.acsa[index].text);
  write_text(html_path, render_heatmap_html(view, title));
  out << "matrix " << view.matrix.rows() << "x" << view.matrix.cols() << " -> " << matrix_path.string() << '\n'
      << "heatmap -> " << html_path.string() << '\n';
}

GradCheckReport cmd_grad_check(const CommandOptions& options, std::ostream& out) {
  const auto cases = default_grad_check_suite(options.seed.value_or(7));
  const GradCheckReport report = run_grad_check_suite(cases);
  char buf[160];
  for (const auto& o : report.outcomes) {
    std::snprintf(buf, sizeof buf, "%-18s max_rel_err %-12.3e threshold %-8.0e %s\n", o.name.c_str(),
                  o.result.max_relative_error, o.threshold, o.passed ? "ok" : "FAIL");
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "%s in %.1fs\n", report.passed() ? "all checks passed" : "gradient check FAILED",
                report.seconds);
  out << buf;
  if (options.out) write_text(*options.out, report.to_json() + "\n");
  return report;
}

Comparison cmd_compare(const CommandOptions& options, std::ostream& out, std::ostream& log) {
  RunConfig cfg = resolve_config(options);
  const bool has_paths = options.data || !cfg.train_path.empty();
  const Datasets data = has_paths ? load_datasets(cfg, options.data) : synthetic_datasets(cfg);
  const Comparison c = run_comparison(cfg, data, progress(log, options.quiet, ""));
  const std::string json = c.to_json();
  if (options.out) write_text(*options.out, json + "\n");
  out << json << '\n';
  return c;
}

int run_command(std::string_view name, const CommandOptions& options, std::ostream& out, std::ostream& err) {
  try {
    if (name == "gen-data") {
      cmd_gen_data(options, out);
    } else if (name == "train") {
      cmd_train(options, out, err);
    } else if (name == "evaluate") {
      cmd_evaluate(options, out);
    } else if (name == "predict") {
      cmd_predict(options, out);
    } else if (name == "attn") {
      cmd_attn(options, out);
    } else if (name == "grad-check") {
      if (!cmd_grad_check(options, out).passed()) return 2;
    } else if (name == "compare") {
      const Comparison c = cmd_compare(options, out, err);
      if (!c.forward_counts_hold()) {
        err << "error: forward-pass counts do not match sentence/aspect counts\n";
        return 1;
      }
    } else {
      err << "error: unknown command '" << name << "'\n";
      return 1;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace tmm
