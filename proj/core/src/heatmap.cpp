#include "tmm/heatmap.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "tmm/error.hpp"

namespace tmm {

std::optional<std::size_t> AttentionView::top_content_position(std::size_t row) const {
  if (row >= matrix.rows()) {
    throw Error(ErrorKind::IndexOutOfRange, "row " + std::to_string(row) + " of " + std::to_string(matrix.rows()));
  }
  std::optional<std::size_t> best;
  for (std::size_t j = 0; j < sequence.ids.size(); ++j) {
    if (is_special(sequence.ids[j])) continue;
    if (!best || matrix.at(row, j) > matrix.at(row, *best)) best = j;
  }
  return best;
}

AttentionView attention_view(const Checkpoint& model, const Corpus& corpus, std::size_t index,
                             std::optional<std::size_t> layer) {
  if (model.task != corpus.task) {
    throw Error(ErrorKind::TaskMismatch, "model task " + std::string(to_string(model.task)) + ", data task " +
                                             std::string(to_string(corpus.task)));
  }
  if (index >= corpus.size()) {
    throw Error(ErrorKind::IndexOutOfRange,
                "record " + std::to_string(index) + " of " + std::to_string(corpus.size()));
  }
  if (layer && *layer >= model.config.layers) {
    throw Error(ErrorKind::LayerOutOfRange,
                "layer " + std::to_string(*layer) + " of " + std::to_string(model.config.layers));
  }

  Corpus one;
  one.task = corpus.task;
  one.labeled = corpus.labeled;
  std::vector<std::string> labels;
  if (corpus.task == Task::Atsa) {
    one.atsa.push_back(corpus.atsa[index]);
    for (std::size_t a = 0; a < one.atsa[0].aspects.size(); ++a) labels.push_back(one.atsa[0].term(a));
  } else {
    one.acsa.push_back(corpus.acsa[index]);
    for (const auto& c : one.acsa[0].aspects) labels.push_back(std::string(to_string(c.category)));
  }

  AttentionView view;
  // The baseline encodes one aspect per sequence; the view shows the first.
  auto sequences = encode_corpus(one, model.vocab, model.scheme, model.config.max_len);
  if (sequences.empty() || sequences.front().anchors.empty()) {
    throw Error(ErrorKind::EmptyInput, "record " + std::to_string(index) + " has no aspects to encode");
  }
  view.sequence = std::move(sequences.front());
  if (model.scheme == TrainScheme::Baseline) labels.resize(1);
  view.anchor_labels = std::move(labels);

  const auto& words = one.tokens(0);
  for (std::size_t j = 0; j < view.sequence.ids.size(); ++j) {
    const TokenId id = view.sequence.ids[j];
    const std::ptrdiff_t origin = view.sequence.origin[j];
    if (id == special::kUnk && origin >= 0) {
      view.tokens.push_back(words[static_cast<std::size_t>(origin)]);
    } else {
      view.tokens.push_back(model.vocab.token(id));
    }
  }

  Tape tape;
  const BoundParams bound = bind_params_constant(tape, model.params);
  EncoderOutput out = encode(bound, view.sequence.ids, model.config, Mode::Eval, 0);
  view.matrix = average_attention(out.attention, layer);
  if (!view.sequence.anchors.empty()) {
    const SentimentDistribution dist =
        classify(gather_anchors(out.hidden, view.sequence.anchors), bound.classifier_weight, bound.classifier_bias);
    view.prediction.labels = dist.predictions();
    for (std::size_t a = 0; a < dist.count; ++a) {
      const auto p = dist.probabilities(a);
      view.prediction.probabilities.push_back({p[0], p[1], p[2]});
    }
  }
  return view;
}

void write_attention_matrix(std::ostream& out, const Tensor& matrix) {
  char buf[32];
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    for (std::size_t c = 0; c < matrix.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", matrix.at(r, c));
      if (c) out << ' ';
      out << buf;
    }
    out << '\n';
  }
}

Tensor read_attention_matrix(std::istream& in) {
  std::vector<double> values;
  std::size_t rows = 0, cols = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::size_t n = 0;
    double v = 0.0;
    while (ls >> v) {
      values.push_back(v);
      ++n;
    }
    if (!ls.eof()) throw Error(ErrorKind::ParseError, "non-numeric entry in matrix row " + std::to_string(rows + 1));
    if (rows == 0) cols = n;
    if (n != cols || n == 0) throw Error(ErrorKind::ParseError, "ragged matrix at row " + std::to_string(rows + 1));
    ++rows;
  }
  if (rows == 0) throw Error(ErrorKind::ParseError, "empty matrix");
  return Tensor({rows, cols}, std::move(values));
}

namespace {

std::string escape_html(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

}  // namespace

std::string render_heatmap_html(const AttentionView& view, const std::string& title) {
  std::ostringstream o;
  o << "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>" << escape_html(title) << "</title>\n"
    << "<style>body{font-family:sans-serif}table{border-collapse:collapse}"
       "td{padding:4px 6px;border:1px solid #ddd;text-align:center}"
       "td.label{font-weight:bold;text-align:right;background:#f4f4f4}</style></head><body>\n"
    << "<h3>" << escape_html(title) << "</h3>\n"
    << "<p>Darker blue marks a larger attention weight (shade relative to each row's maximum).</p>\n<table>\n";
  char buf[160];
  for (std::size_t a = 0; a < view.sequence.anchors.size(); ++a) {
    const std::size_t row = view.sequence.anchors[a];
    double row_max = 0.0;
    for (std::size_t j = 0; j < view.matrix.cols(); ++j) row_max = std::max(row_max, view.matrix.at(row, j));
    std::string label = a < view.anchor_labels.size() ? view.anchor_labels[a] : "aspect " + std::to_string(a);
    if (a < view.prediction.labels.size()) label += " (" + std::string(to_string(view.prediction.labels[a])) + ")";
    o << "<tr><td class=\"label\">" << escape_html(label) << "</td>";
    for (std::size_t j = 0; j < view.matrix.cols(); ++j) {
      const double w = view.matrix.at(row, j);
      const double alpha = row_max > 0.0 ? w / row_max : 0.0;
      std::snprintf(buf, sizeof buf, "<td style=\"background:rgba(30,90,200,%.3f);color:%s\" title=\"%.6f\">", alpha,
                    alpha > 0.55 ? "#fff" : "#000", w);
      o << buf << escape_html(view.tokens[j]) << "</td>";
    }
    o << "</tr>\n";
  }
  o << "</table>\n</body></html>\n";
  return o.str();
}

}  // namespace tmm
