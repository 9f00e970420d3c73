#include <algorithm>

#include "tmm/error.hpp"
#include "tmm/example.hpp"

namespace tmm {

std::string_view to_string(Polarity p) noexcept {
  switch (p) {
    case Polarity::Positive: return "positive";
    case Polarity::Neutral: return "neutral";
    case Polarity::Negative: return "negative";
  }
  return "unknown";
}

std::optional<Polarity> parse_polarity(std::string_view name) noexcept {
  for (Polarity p : kAllPolarities) {
    if (to_string(p) == name) return p;
  }
  return std::nullopt;
}

std::string_view to_string(Category c) noexcept {
  switch (c) {
    case Category::Food: return "food";
    case Category::Service: return "service";
    case Category::Staff: return "staff";
    case Category::Price: return "price";
    case Category::Ambience: return "ambience";
    case Category::Menu: return "menu";
    case Category::Place: return "place";
    case Category::Miscellaneous: return "miscellaneous";
  }
  return "unknown";
}

Category parse_category(std::string_view name) {
  for (Category c : kAllCategories) {
    if (to_string(c) == name) return c;
  }
  throw Error(ErrorKind::UnknownCategory, "'" + std::string(name) + "' is not an aspect category");
}

std::string_view to_string(Task t) noexcept { return t == Task::Atsa ? "atsa" : "acsa"; }

Task parse_task(std::string_view name) {
  if (name == "atsa") return Task::Atsa;
  if (name == "acsa") return Task::Acsa;
  throw Error(ErrorKind::InvalidArgument, "task must be 'atsa' or 'acsa', got '" + std::string(name) + "'");
}

std::string AtsaExample::term(std::size_t i) const {
  std::string out;
  const TermAspect& a = aspects.at(i);
  for (std::size_t w = a.start; w < a.end && w < tokens.size(); ++w) {
    if (w > a.start) out += ' ';
    out += tokens[w];
  }
  return out;
}

void AtsaExample::validate() const {
  std::size_t previous_end = 0;
  for (std::size_t i = 0; i < aspects.size(); ++i) {
    const TermAspect& a = aspects[i];
    if (!(a.start < a.end) || a.end > tokens.size()) {
      throw Error(ErrorKind::SpanOutOfRange, "aspect " + std::to_string(i) + " span [" +
                                                 std::to_string(a.start) + "," + std::to_string(a.end) +
                                                 ") outside sentence of " + std::to_string(tokens.size()) +
                                                 " words");
    }
    if (i > 0 && a.start < previous_end) {
      throw Error(ErrorKind::OverlappingSpans,
                  "aspect " + std::to_string(i) + " starts before the end of aspect " + std::to_string(i - 1) +
                      " (spans must be sorted and disjoint)");
    }
    previous_end = a.end;
  }
}

void AcsaExample::validate() const {
  for (std::size_t i = 0; i < aspects.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (aspects[i].category == aspects[j].category) {
        throw Error(ErrorKind::InvalidArgument,
                    "category '" + std::string(to_string(aspects[i].category)) + "' repeated in one sentence");
      }
    }
  }
}

bool has_mams_property(std::span<const Polarity> polarities) noexcept {
  if (polarities.size() < 2) return false;
  return std::any_of(polarities.begin(), polarities.end(),
                     [&](Polarity p) { return p != polarities.front(); });
}

}  // namespace tmm
