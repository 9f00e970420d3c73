#include "tmm/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>

#include "tmm/error.hpp"

namespace tmm {

namespace {

constexpr char kMagic[8] = {'T', 'M', 'M', 'C', 'K', 'P', 'T', '\0'};

[[noreturn]] void format_error(const std::string& what) { throw Error(ErrorKind::CheckpointFormat, what); }

class Writer {
 public:
  void bytes(const void* p, std::size_t n) { out_.append(static_cast<const char*>(p), n); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void string(std::string_view s) { bytes(s.data(), s.size()); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}

  std::string_view bytes(std::size_t n) {
    if (n > in_.size() - pos_) format_error("truncated checkpoint at byte " + std::to_string(pos_));
    auto s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint64_t uint(int width) {
    auto b = bytes(static_cast<std::size_t>(width));
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[i])) << (8 * i);
    return v;
  }
  std::uint32_t u32() { return static_cast<std::uint32_t>(uint(4)); }
  std::uint64_t u64() { return uint(8); }
  double f64() { return std::bit_cast<double>(u64()); }
  bool done() const noexcept { return pos_ == in_.size(); }

 private:
  std::string_view in_;
  std::size_t pos_ = 0;
};

void write_array(Writer& w, const std::string& name, const Tensor& t) {
  w.u32(static_cast<std::uint32_t>(name.size()));
  w.string(name);
  w.u32(static_cast<std::uint32_t>(t.rank()));
  for (std::size_t d : t.shape()) w.u64(d);
  for (double v : t.values()) w.f64(v);
}

void read_array(Reader& r, const std::string& expected_name, Tensor& into) {
  const std::uint32_t len = r.u32();
  const std::string name(r.bytes(len));
  if (name != expected_name) format_error("expected array '" + expected_name + "', found '" + name + "'");
  const std::uint32_t rank = r.u32();
  if (rank < 1 || rank > 3) format_error("array '" + name + "' has rank " + std::to_string(rank));
  Shape shape(rank);
  for (auto& d : shape) d = r.u64();
  if (shape != into.shape()) {
    format_error("array '" + name + "' has shape " + shape_string(shape) + ", config implies " +
                 shape_string(into.shape()));
  }
  for (double& v : into.values()) v = r.f64();
}

nlohmann::ordered_json header_json(const Checkpoint& c) {
  nlohmann::ordered_json h;
  h["format"] = "tmm-checkpoint";
  h["task"] = to_string(c.task);
  h["scheme"] = to_string(c.scheme);
  h["config"] = {{"layers", c.config.layers},     {"heads", c.config.heads},
                 {"hidden", c.config.hidden},     {"ffn", c.config.ffn},
                 {"max_len", c.config.max_len},   {"vocab_size", c.config.vocab_size},
                 {"dropout", c.config.dropout},   {"classes", c.config.classes}};
  h["vocab"] = {{"min_frequency", c.vocab.min_frequency()}, {"tokens", c.vocab.tokens()}};
  h["metadata"] = {{"seed", c.metadata.seed},
                   {"run", c.metadata.run},
                   {"epoch", c.metadata.epoch},
                   {"best_dev_macro_f1", c.metadata.best_dev_macro_f1}};
  if (c.adam) {
    h["adam"] = {{"step", c.adam->step},
                 {"lr", c.adam->hyper.learning_rate},
                 {"beta1", c.adam->hyper.beta1},
                 {"beta2", c.adam->hyper.beta2},
                 {"eps", c.adam->hyper.epsilon}};
  } else {
    h["adam"] = nullptr;
  }
  return h;
}

}  // namespace

std::string Checkpoint::serialize() const {
  params.check_shapes(config);
  if (vocab.size() != config.vocab_size) format_error("vocab size disagrees with config");
  const auto named = params.named();
  if (adam && (adam->first_moment.size() != named.size() || adam->second_moment.size() != named.size())) {
    format_error("optimizer state does not match the parameter list");
  }

  Writer w;
  w.bytes(kMagic, sizeof kMagic);
  w.u32(kFormatVersion);
  const std::string header = header_json(*this).dump();
  w.u64(header.size());
  w.string(header);
  w.u32(static_cast<std::uint32_t>(named.size() * (adam ? 3 : 1)));
  for (const auto& n : named) write_array(w, n.name, *n.tensor);
  if (adam) {
    for (std::size_t i = 0; i < named.size(); ++i) write_array(w, "adam.m." + named[i].name, adam->first_moment[i]);
    for (std::size_t i = 0; i < named.size(); ++i) write_array(w, "adam.v." + named[i].name, adam->second_moment[i]);
  }
  return w.take();
}

Checkpoint Checkpoint::deserialize(std::string_view bytes) {
  Reader r(bytes);
  if (r.bytes(sizeof kMagic) != std::string_view(kMagic, sizeof kMagic)) format_error("bad magic");
  const std::uint32_t version = r.u32();
  if (version != kFormatVersion) format_error("unsupported checkpoint version " + std::to_string(version));
  const std::uint64_t header_len = r.u64();
  const std::string_view header_text = r.bytes(static_cast<std::size_t>(header_len));

  Checkpoint c;
  try {
    const auto h = nlohmann::json::parse(header_text);
    if (h.at("format").get<std::string>() != "tmm-checkpoint") format_error("not a tmm checkpoint");
    c.task = parse_task(h.at("task").get<std::string>());
    c.scheme = parse_scheme(h.at("scheme").get<std::string>());
    const auto& cfg = h.at("config");
    c.config.layers = cfg.at("layers").get<std::size_t>();
    c.config.heads = cfg.at("heads").get<std::size_t>();
    c.config.hidden = cfg.at("hidden").get<std::size_t>();
    c.config.ffn = cfg.at("ffn").get<std::size_t>();
    c.config.max_len = cfg.at("max_len").get<std::size_t>();
    c.config.vocab_size = cfg.at("vocab_size").get<std::size_t>();
    c.config.dropout = cfg.at("dropout").get<double>();
    c.config.classes = cfg.at("classes").get<std::size_t>();
    c.config.validate();
    c.vocab = Vocab::from_tokens(h.at("vocab").at("tokens").get<std::vector<std::string>>(),
                                 h.at("vocab").at("min_frequency").get<std::size_t>());
    const auto& meta = h.at("metadata");
    c.metadata.seed = meta.at("seed").get<std::uint64_t>();
    c.metadata.run = meta.at("run").get<std::size_t>();
    c.metadata.epoch = meta.at("epoch").get<std::size_t>();
    c.metadata.best_dev_macro_f1 = meta.at("best_dev_macro_f1").get<double>();
    if (!h.at("adam").is_null()) {
      const auto& a = h.at("adam");
      AdamState st;
      st.step = a.at("step").get<std::uint64_t>();
      st.hyper.learning_rate = a.at("lr").get<double>();
      st.hyper.beta1 = a.at("beta1").get<double>();
      st.hyper.beta2 = a.at("beta2").get<double>();
      st.hyper.epsilon = a.at("eps").get<double>();
      c.adam = std::move(st);
    }
  } catch (const nlohmann::json::exception& e) {
    format_error(std::string("bad header: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::CheckpointFormat) throw;
    format_error("bad header: " + e.detail());
  }
  if (c.vocab.size() != c.config.vocab_size) format_error("vocab size disagrees with config");

  // Allocate correctly shaped arrays, then overwrite them from the payload.
  c.params = ModelParams::initialize(c.config, 0);
  auto named = c.params.named();
  const std::uint32_t count = r.u32();
  const std::size_t expected = named.size() * (c.adam ? 3 : 1);
  if (count != expected) {
    format_error("checkpoint holds " + std::to_string(count) + " arrays, expected " + std::to_string(expected));
  }
  for (auto& n : named) read_array(r, n.name, *n.tensor);
  if (c.adam) {
    for (auto& n : named) c.adam->first_moment.emplace_back(n.tensor->shape());
    for (auto& n : named) c.adam->second_moment.emplace_back(n.tensor->shape());
    for (std::size_t i = 0; i < named.size(); ++i) read_array(r, "adam.m." + named[i].name, c.adam->first_moment[i]);
    for (std::size_t i = 0; i < named.size(); ++i) read_array(r, "adam.v." + named[i].name, c.adam->second_moment[i]);
  }
  if (!r.done()) format_error("trailing bytes after the last array");
  return c;
}

void Checkpoint::save(const std::filesystem::path& path) const {
  const std::string bytes = serialize();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

bool Checkpoint::operator==(const Checkpoint& other) const {
  if (!(config == other.config && task == other.task && scheme == other.scheme && vocab == other.vocab &&
        adam == other.adam && metadata == other.metadata)) {
    return false;
  }
  const auto a = params.named();
  const auto b = other.params.named();
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].name != b[i].name || !(*a[i].tensor == *b[i].tensor)) return false;
  }
  return true;
}

}  // namespace tmm
