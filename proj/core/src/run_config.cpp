#include "tmm/run_config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "tmm/error.hpp"

namespace tmm {

std::string_view to_string(TrainScheme s) noexcept {
  switch (s) {
    case TrainScheme::Tmm: return "tmm";
    case TrainScheme::Baseline: return "baseline";
  }
  return "unknown";
}

TrainScheme parse_scheme(std::string_view name) {
  if (name == "tmm") return TrainScheme::Tmm;
  if (name == "baseline" || name == "baseline-single") return TrainScheme::Baseline;
  throw Error(ErrorKind::ConfigError, "unknown scheme '" + std::string(name) + "' (expected tmm or baseline)");
}

namespace {

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
  throw Error(ErrorKind::ConfigError,
              "bad value '" + std::string(value) + "' for " + std::string(key) + ": expected " + std::string(expected));
}

std::uint64_t to_u64(std::string_view key, std::string_view value) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) bad_value(key, value, "a non-negative integer");
  return v;
}

std::size_t to_size(std::string_view key, std::string_view value) {
  return static_cast<std::size_t>(to_u64(key, value));
}

double to_double(std::string_view key, std::string_view value) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) bad_value(key, value, "a number");
  return v;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void RunConfig::set(std::string_view key, std::string_view value) {
  if (key == "task") {
    try {
      task = parse_task(value);
    } catch (const Error&) {
      bad_value(key, value, "atsa or acsa");
    }
    synthetic.task = task;
  } else if (key == "scheme") {
    scheme = parse_scheme(value);
  } else if (key == "layers") {
    model.layers = to_size(key, value);
  } else if (key == "heads") {
    model.heads = to_size(key, value);
  } else if (key == "hidden") {
    model.hidden = to_size(key, value);
  } else if (key == "ffn") {
    model.ffn = to_size(key, value);
  } else if (key == "max_len") {
    model.max_len = to_size(key, value);
  } else if (key == "dropout") {
    model.dropout = to_double(key, value);
  } else if (key == "lr") {
    adam.learning_rate = to_double(key, value);
  } else if (key == "beta1") {
    adam.beta1 = to_double(key, value);
  } else if (key == "beta2") {
    adam.beta2 = to_double(key, value);
  } else if (key == "eps") {
    adam.epsilon = to_double(key, value);
  } else if (key == "clip_norm") {
    clip_norm = to_double(key, value);
  } else if (key == "loss") {
    if (value == "mean") {
      reduction = LossReduction::MeanOverAspects;
    } else if (value == "sum") {
      reduction = LossReduction::Sum;
    } else {
      bad_value(key, value, "mean or sum");
    }
  } else if (key == "batch_size") {
    batch_size = to_size(key, value);
  } else if (key == "epochs") {
    epochs = to_size(key, value);
  } else if (key == "patience") {
    patience = to_size(key, value);
  } else if (key == "seed") {
    seed = to_u64(key, value);
  } else if (key == "runs") {
    runs = to_size(key, value);
  } else if (key == "min_frequency") {
    min_frequency = to_size(key, value);
  } else if (key == "train") {
    train_path = std::string(value);
  } else if (key == "dev") {
    dev_path = std::string(value);
  } else if (key == "test") {
    test_path = std::string(value);
  } else if (key == "out") {
    out_dir = std::string(value);
  } else if (key == "synth_seed") {
    synthetic.seed = to_u64(key, value);
  } else if (key == "synth_train") {
    synthetic.train_size = to_size(key, value);
  } else if (key == "synth_dev") {
    synthetic.dev_size = to_size(key, value);
  } else if (key == "synth_test") {
    synthetic.test_size = to_size(key, value);
  } else if (key == "synth_mean_aspects") {
    synthetic.mean_aspects = to_double(key, value);
  } else if (key == "synth_max_aspects") {
    synthetic.max_aspects = to_size(key, value);
  } else if (key == "synth_cross_cue") {
    synthetic.cross_aspect_cue_probability = to_double(key, value);
  } else if (key == "synth_intensifier") {
    synthetic.intensifier_probability = to_double(key, value);
  } else if (key == "synth_opener") {
    synthetic.opener_probability = to_double(key, value);
  } else {
    throw Error(ErrorKind::ConfigError, "unknown config key '" + std::string(key) + "'");
  }
}

void RunConfig::validate() const {
  ModelConfig probe = model;
  probe.validate();
  if (batch_size < 1) throw Error(ErrorKind::ConfigError, "batch_size must be >= 1");
  if (runs < 1) throw Error(ErrorKind::ConfigError, "runs must be >= 1");
  if (epochs < 1) throw Error(ErrorKind::ConfigError, "epochs must be >= 1");
  if (!(adam.learning_rate >= 0.0)) throw Error(ErrorKind::ConfigError, "lr must be >= 0");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
    throw Error(ErrorKind::ConfigError, "beta1 and beta2 must lie in [0, 1)");
  }
  if (!(adam.epsilon > 0.0)) throw Error(ErrorKind::ConfigError, "eps must be > 0");
  if (!(clip_norm >= 0.0)) throw Error(ErrorKind::ConfigError, "clip_norm must be >= 0");
  if (synthetic.task != task) throw Error(ErrorKind::ConfigError, "synthetic task differs from run task");
}

std::string RunConfig::to_text() const {
  std::ostringstream o;
  o << "task = " << to_string(task) << '\n'
    << "scheme = " << to_string(scheme) << '\n'
    << "layers = " << model.layers << '\n'
    << "heads = " << model.heads << '\n'
    << "hidden = " << model.hidden << '\n'
    << "ffn = " << model.ffn << '\n'
    << "max_len = " << model.max_len << '\n'
    << "dropout = " << fmt_double(model.dropout) << '\n'
    << "lr = " << fmt_double(adam.learning_rate) << '\n'
    << "beta1 = " << fmt_double(adam.beta1) << '\n'
    << "beta2 = " << fmt_double(adam.beta2) << '\n'
    << "eps = " << fmt_double(adam.epsilon) << '\n'
    << "clip_norm = " << fmt_double(clip_norm) << '\n'
    << "loss = " << (reduction == LossReduction::Sum ? "sum" : "mean") << '\n'
    << "batch_size = " << batch_size << '\n'
    << "epochs = " << epochs << '\n'
    << "patience = " << patience << '\n'
    << "seed = " << seed << '\n'
    << "runs = " << runs << '\n'
    << "min_frequency = " << min_frequency << '\n';
  if (!train_path.empty()) o << "train = " << train_path.string() << '\n';
  if (!dev_path.empty()) o << "dev = " << dev_path.string() << '\n';
  if (!test_path.empty()) o << "test = " << test_path.string() << '\n';
  if (!out_dir.empty()) o << "out = " << out_dir.string() << '\n';
  o << "synth_seed = " << synthetic.seed << '\n'
    << "synth_train = " << synthetic.train_size << '\n'
    << "synth_dev = " << synthetic.dev_size << '\n'
    << "synth_test = " << synthetic.test_size << '\n'
    << "synth_mean_aspects = " << fmt_double(synthetic.mean_aspects) << '\n'
    << "synth_max_aspects = " << synthetic.max_aspects << '\n'
    << "synth_cross_cue = " << fmt_double(synthetic.cross_aspect_cue_probability) << '\n'
    << "synth_intensifier = " << fmt_double(synthetic.intensifier_probability) << '\n'
    << "synth_opener = " << fmt_double(synthetic.opener_probability) << '\n';
  return o.str();
}

RunConfig RunConfig::parse(std::istream& in, const std::string& source) {
  RunConfig cfg;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorKind::ConfigError, source + ":" + std::to_string(number) + ": expected 'key = value'");
    }
    const auto key = trim(view.substr(0, eq));
    const auto value = trim(view.substr(eq + 1));
    try {
      cfg.set(key, value);
    } catch (const Error& e) {
      throw Error(ErrorKind::ConfigError, source + ":" + std::to_string(number) + ": " + e.detail());
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open config " + path.string());
  return parse(in, path.string());
}

}  // namespace tmm
