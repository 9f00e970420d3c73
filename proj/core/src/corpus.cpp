#include "tmm/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tmm/error.hpp"
#include "tmm/tokenizer.hpp"

namespace tmm {

using nlohmann::json;

std::string_view to_string(Split s) noexcept {
  switch (s) {
    case Split::Train: return "train";
    case Split::Dev: return "dev";
    case Split::Test: return "test";
    case Split::Unspecified: return "unspecified";
  }
  return "unknown";
}

std::size_t Corpus::aspect_count() const noexcept {
  std::size_t n = 0;
  for (const auto& e : atsa) n += e.aspects.size();
  for (const auto& e : acsa) n += e.aspects.size();
  return n;
}

const std::vector<std::string>& Corpus::tokens(std::size_t i) const {
  return task == Task::Atsa ? atsa.at(i).tokens : acsa.at(i).tokens;
}

std::vector<Polarity> Corpus::polarities(std::size_t i) const {
  std::vector<Polarity> out;
  if (task == Task::Atsa) {
    for (const auto& a : atsa.at(i).aspects) out.push_back(a.polarity);
  } else {
    for (const auto& a : acsa.at(i).aspects) out.push_back(a.polarity);
  }
  return out;
}

std::vector<std::vector<std::string>> Corpus::token_sequences() const {
  std::vector<std::vector<std::string>> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) out.push_back(tokens(i));
  return out;
}

bool Corpus::same_content(const Corpus& other) const {
  return task == other.task && labeled == other.labeled && atsa == other.atsa && acsa == other.acsa;
}

namespace {

[[noreturn]] void parse_error(std::size_t line, const std::string& what) {
  throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": " + what);
}

template <typename T>
T field(const json& obj, const char* name, std::size_t line) {
  auto it = obj.find(name);
  if (it == obj.end()) parse_error(line, std::string("missing field '") + name + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    parse_error(line, std::string("field '") + name + "' has the wrong type");
  }
}

Polarity read_polarity(const json& obj, bool required, std::size_t line) {
  auto it = obj.find("polarity");
  if (it == obj.end()) {
    if (required) parse_error(line, "missing field 'polarity'");
    return Polarity::Neutral;
  }
  if (!it->is_string()) parse_error(line, "field 'polarity' must be a string");
  auto p = parse_polarity(it->get<std::string>());
  if (!p) parse_error(line, "unknown polarity '" + it->get<std::string>() + "'");
  return *p;
}

// Re-raises validation errors with the line number while keeping their kind.
template <typename Fn>
void with_line(std::size_t line, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ParseError) throw;
    throw Error(e.kind(), "line " + std::to_string(line) + ": " + e.detail());
  }
}

AtsaExample parse_atsa(const json& record, std::size_t line, bool require_polarity) {
  AtsaExample ex;
  ex.text = field<std::string>(record, "text", line);
  ex.tokens = tokenize(ex.text);
  const json aspects = field<json>(record, "aspects", line);
  if (!aspects.is_array()) parse_error(line, "field 'aspects' must be an array");
  std::vector<std::string> terms;
  for (const json& a : aspects) {
    if (!a.is_object()) parse_error(line, "aspect entries must be objects");
    TermAspect t;
    const auto from = field<long long>(a, "from", line);
    const auto to = field<long long>(a, "to", line);
    if (from < 0 || to < 0) parse_error(line, "negative span index");
    t.start = static_cast<std::size_t>(from);
    t.end = static_cast<std::size_t>(to);
    t.polarity = read_polarity(a, require_polarity, line);
    ex.aspects.push_back(t);
    terms.push_back(field<std::string>(a, "term", line));
  }
  std::vector<std::size_t> order(ex.aspects.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return ex.aspects[a].start < ex.aspects[b].start; });
  std::vector<TermAspect> sorted;
  std::vector<std::string> sorted_terms;
  for (std::size_t i : order) {
    sorted.push_back(ex.aspects[i]);
    sorted_terms.push_back(terms[i]);
  }
  ex.aspects = std::move(sorted);
  with_line(line, [&] { ex.validate(); });
  for (std::size_t i = 0; i < ex.aspects.size(); ++i) {
    const auto expected = tokenize(sorted_terms[i]);
    const TermAspect& a = ex.aspects[i];
    if (!std::equal(expected.begin(), expected.end(), ex.tokens.begin() + static_cast<std::ptrdiff_t>(a.start),
                    ex.tokens.begin() + static_cast<std::ptrdiff_t>(a.end))) {
      throw Error(ErrorKind::SpanMismatch, "line " + std::to_string(line) + ": span [" + std::to_string(a.start) +
                                               "," + std::to_string(a.end) + ") reads '" + ex.term(i) +
                                               "' but term is '" + sorted_terms[i] + "'");
    }
  }
  return ex;
}

AcsaExample parse_acsa(const json& record, std::size_t line, bool require_polarity) {
  AcsaExample ex;
  ex.text = field<std::string>(record, "text", line);
  ex.tokens = tokenize(ex.text);
  const json aspects = field<json>(record, "aspects", line);
  if (!aspects.is_array()) parse_error(line, "field 'aspects' must be an array");
  for (const json& a : aspects) {
    if (!a.is_object()) parse_error(line, "aspect entries must be objects");
    CategoryAspect c;
    const auto name = field<std::string>(a, "category", line);
    with_line(line, [&] { c.category = parse_category(name); });
    c.polarity = read_polarity(a, require_polarity, line);
    ex.aspects.push_back(c);
  }
  try {
    ex.validate();
  } catch (const Error& e) {
    parse_error(line, e.detail());
  }
  return ex;
}

}  // namespace

Corpus read_corpus(std::istream& in, Task task, const std::string& source, const LoadOptions& options) {
  Corpus corpus;
  corpus.task = task;
  corpus.split = options.split;
  corpus.source = source;
  corpus.labeled = options.require_polarity;

  std::string line;
  std::size_t number = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!header_seen) {
      if (line.empty()) continue;
      if (line != kRecordFormatHeader) parse_error(number, "expected header '" + std::string(kRecordFormatHeader) + "'");
      header_seen = true;
      continue;
    }
    if (line.empty() || line.front() == '#') continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      parse_error(number, std::string("invalid JSON: ") + e.what());
    }
    if (!record.is_object()) parse_error(number, "record must be a JSON object");
    const auto record_task = field<std::string>(record, "task", number);
    if (record_task != to_string(task)) {
      parse_error(number, "record task '" + record_task + "' in a " + std::string(to_string(task)) + " corpus");
    }
    std::vector<Polarity> polarities;
    if (task == Task::Atsa) {
      corpus.atsa.push_back(parse_atsa(record, number, options.require_polarity));
      for (const auto& a : corpus.atsa.back().aspects) polarities.push_back(a.polarity);
    } else {
      corpus.acsa.push_back(parse_acsa(record, number, options.require_polarity));
      for (const auto& a : corpus.acsa.back().aspects) polarities.push_back(a.polarity);
    }
    if (options.require_polarity ? !has_mams_property(polarities) : polarities.size() < 2) {
      ++corpus.mams_warnings;
    }
  }
  if (corpus.size() == 0) throw Error(ErrorKind::EmptyCorpus, "no records in " + source);
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path, Task task, const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  return read_corpus(in, task, path.string(), options);
}

void write_corpus(const Corpus& corpus, std::ostream& out) {
  out << kRecordFormatHeader << '\n';
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    json record;
    json aspects = json::array();
    if (corpus.task == Task::Atsa) {
      const AtsaExample& ex = corpus.atsa[i];
      record["text"] = ex.text;
      for (std::size_t k = 0; k < ex.aspects.size(); ++k) {
        json a;
        a["term"] = ex.term(k);
        a["from"] = ex.aspects[k].start;
        a["to"] = ex.aspects[k].end;
        if (corpus.labeled) a["polarity"] = to_string(ex.aspects[k].polarity);
        aspects.push_back(std::move(a));
      }
    } else {
      const AcsaExample& ex = corpus.acsa[i];
      record["text"] = ex.text;
      for (const auto& c : ex.aspects) {
        json a;
        a["category"] = to_string(c.category);
        if (corpus.labeled) a["polarity"] = to_string(c.polarity);
        aspects.push_back(std::move(a));
      }
    }
    record["task"] = to_string(corpus.task);
    record["aspects"] = std::move(aspects);
    out << record.dump() << '\n';
  }
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  write_corpus(corpus, out);
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

CorpusStats compute_stats(const Corpus& corpus) {
  CorpusStats s;
  s.sentences = corpus.size();
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    for (Polarity p : corpus.polarities(i)) {
      ++s.aspects;
      switch (p) {
        case Polarity::Positive: ++s.positive; break;
        case Polarity::Neutral: ++s.neutral; break;
        case Polarity::Negative: ++s.negative; break;
      }
    }
  }
  s.average = s.sentences ? static_cast<double>(s.aspects) / static_cast<double>(s.sentences) : 0.0;
  return s;
}

std::string format_stats(const CorpusStats& stats) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "Sen. %zu  Asp. %zu  Ave. %.2f  Pos. %zu  Neu. %zu  Neg. %zu", stats.sentences,
                stats.aspects, stats.average, stats.positive, stats.neutral, stats.negative);
  return buf;
}

}  // namespace tmm
