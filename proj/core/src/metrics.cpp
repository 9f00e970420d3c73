#include "tmm/metrics.hpp"

#include <cstdio>

#include "json_io.hpp"
#include "tmm/error.hpp"

namespace tmm {

namespace {

double ratio(std::size_t num, std::size_t den) noexcept {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

ConfusionCounts ConfusionCounts::count(std::span<const Polarity> predictions, std::span<const Polarity> gold) {
  if (predictions.size() != gold.size()) {
    throw Error(ErrorKind::LengthMismatch, std::to_string(predictions.size()) + " predictions for " +
                                               std::to_string(gold.size()) + " gold labels");
  }
  ConfusionCounts c;
  c.total = gold.size();
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const std::size_t p = index_of(predictions[i]);
    const std::size_t g = index_of(gold[i]);
    if (p == g) {
      ++c.per_class[p].tp;
    } else {
      ++c.per_class[p].fp;
      ++c.per_class[g].fn;
    }
  }
  return c;
}

std::size_t ConfusionCounts::correct() const noexcept {
  std::size_t n = 0;
  for (const auto& k : per_class) n += k.tp;
  return n;
}

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& other) noexcept {
  for (std::size_t c = 0; c < kPolarityCount; ++c) {
    per_class[c].tp += other.per_class[c].tp;
    per_class[c].fp += other.per_class[c].fp;
    per_class[c].fn += other.per_class[c].fn;
  }
  total += other.total;
  return *this;
}

MetricsReport report_from_counts(const ConfusionCounts& counts) {
  if (counts.total == 0) throw Error(ErrorKind::EmptyInput, "no aspects to score");
  MetricsReport r;
  r.counts = counts;
  double f1_sum = 0.0;
  for (std::size_t c = 0; c < kPolarityCount; ++c) {
    const ClassCounts& k = counts.per_class[c];
    ClassScores& s = r.per_class[c];
    s.precision = ratio(k.tp, k.tp + k.fp);
    s.recall = ratio(k.tp, k.tp + k.fn);
    // harmonic mean of P and R written over the counts
    s.f1 = ratio(2 * k.tp, 2 * k.tp + k.fp + k.fn);
    f1_sum += s.f1;
  }
  r.macro_f1 = f1_sum / static_cast<double>(kPolarityCount);
  r.accuracy = ratio(counts.correct(), counts.total);
  return r;
}

MetricsReport score(std::span<const Polarity> predictions, std::span<const Polarity> gold) {
  return report_from_counts(ConfusionCounts::count(predictions, gold));
}

double combined_score(const MetricsReport& atsa, const MetricsReport& acsa) noexcept {
  return (atsa.macro_f1 + acsa.macro_f1) / 2.0;
}

MetricsReport average_reports(std::span<const MetricsReport> reports) {
  if (reports.empty()) throw Error(ErrorKind::EmptyInput, "no reports to average");
  MetricsReport out;
  const double n = static_cast<double>(reports.size());
  bool all_combined = true;
  double combined = 0.0;
  for (const MetricsReport& r : reports) {
    for (std::size_t c = 0; c < kPolarityCount; ++c) {
      out.per_class[c].precision += r.per_class[c].precision / n;
      out.per_class[c].recall += r.per_class[c].recall / n;
      out.per_class[c].f1 += r.per_class[c].f1 / n;
    }
    out.macro_f1 += r.macro_f1 / n;
    out.accuracy += r.accuracy / n;
    out.counts += r.counts;
    if (r.combined) {
      combined += *r.combined / n;
    } else {
      all_combined = false;
    }
  }
  if (all_combined) out.combined = combined;
  return out;
}

namespace detail {

nlohmann::ordered_json report_json(const MetricsReport& report) {
  nlohmann::ordered_json doc;
  nlohmann::ordered_json per_class;
  for (Polarity p : kAllPolarities) {
    const ClassScores& s = report.of(p);
    per_class[std::string(to_string(p))] = {{"p", s.precision}, {"r", s.recall}, {"f1", s.f1}};
  }
  doc["per_class"] = std::move(per_class);
  doc["macro_f1"] = report.macro_f1;
  doc["accuracy"] = report.accuracy;
  if (report.combined) {
    doc["combined"] = *report.combined;
  } else {
    doc["combined"] = nullptr;
  }
  return doc;
}

MetricsReport report_from_json(const nlohmann::json& doc) {
  MetricsReport r;
  try {
    for (Polarity p : kAllPolarities) {
      const auto& s = doc.at("per_class").at(std::string(to_string(p)));
      r.per_class[index_of(p)] = {s.at("p").get<double>(), s.at("r").get<double>(), s.at("f1").get<double>()};
    }
    r.macro_f1 = doc.at("macro_f1").get<double>();
    r.accuracy = doc.at("accuracy").get<double>();
    if (doc.contains("combined") && !doc.at("combined").is_null()) r.combined = doc.at("combined").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("metrics report: ") + e.what());
  }
  return r;
}

}  // namespace detail

std::string to_json(const MetricsReport& report) { return detail::report_json(report).dump(2); }

MetricsReport report_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::ParseError, std::string("metrics report: ") + e.what());
  }
  return detail::report_from_json(doc);
}

std::string format_report(const MetricsReport& report) {
  std::string out = "class       P       R       F1\n";
  char buf[128];
  for (Polarity p : kAllPolarities) {
    const ClassScores& s = report.of(p);
    std::snprintf(buf, sizeof buf, "%-9s %.4f  %.4f  %.4f\n", std::string(to_string(p)).c_str(), s.precision,
                  s.recall, s.f1);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "macro_f1  %.4f\naccuracy  %.4f\n", report.macro_f1, report.accuracy);
  out += buf;
  if (report.combined) {
    std::snprintf(buf, sizeof buf, "combined  %.4f\n", *report.combined);
    out += buf;
  }
  return out;
}

}  // namespace tmm
