#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tmm {

/// Sentiment label set. The integer values are the stable class indices used
/// by the classifier and by every serialized artifact.
enum class Polarity : std::uint8_t { Positive = 0, Neutral = 1, Negative = 2 };

inline constexpr std::size_t kPolarityCount = 3;
inline constexpr std::array<Polarity, kPolarityCount> kAllPolarities = {
    Polarity::Positive, Polarity::Neutral, Polarity::Negative};

std::string_view to_string(Polarity p) noexcept;
std::optional<Polarity> parse_polarity(std::string_view name) noexcept;
constexpr std::size_t index_of(Polarity p) noexcept { return static_cast<std::size_t>(p); }

/// The eight predefined aspect categories of the restaurant domain.
enum class Category : std::uint8_t {
  Food,
  Service,
  Staff,
  Price,
  Ambience,
  Menu,
  Place,
  Miscellaneous,
};

inline constexpr std::array<Category, 8> kAllCategories = {
    Category::Food,     Category::Service, Category::Staff, Category::Price,
    Category::Ambience, Category::Menu,    Category::Place, Category::Miscellaneous};

std::string_view to_string(Category c) noexcept;
/// Throws Error(UnknownCategory).
Category parse_category(std::string_view name);

enum class Task : std::uint8_t { Atsa, Acsa };

std::string_view to_string(Task t) noexcept;
/// Throws Error(InvalidArgument).
Task parse_task(std::string_view name);

struct TermAspect {
  std::size_t start = 0;  // word index, inclusive
  std::size_t end = 0;    // word index, exclusive
  Polarity polarity = Polarity::Neutral;

  bool operator==(const TermAspect&) const = default;
};

/// Sentence with aspect-term annotations.
struct AtsaExample {
  std::string text;
  std::vector<std::string> tokens;
  std::vector<TermAspect> aspects;

  /// Words of aspect i joined by single spaces.
  std::string term(std::size_t i) const;
  /// Throws SpanOutOfRange or OverlappingSpans (which also covers spans not
  /// sorted by start).
  void validate() const;

  bool operator==(const AtsaExample&) const = default;
};

struct CategoryAspect {
  Category category = Category::Food;
  Polarity polarity = Polarity::Neutral;

  bool operator==(const CategoryAspect&) const = default;
};

/// Sentence with aspect-category annotations; categories are distinct.
struct AcsaExample {
  std::string text;
  std::vector<std::string> tokens;
  std::vector<CategoryAspect> aspects;

  /// Throws InvalidArgument on a repeated category.
  void validate() const;

  bool operator==(const AcsaExample&) const = default;
};

/// Multi-aspect multi-sentiment property: at least two aspects and at least
/// two distinct polarities among them.
bool has_mams_property(std::span<const Polarity> polarities) noexcept;

}  // namespace tmm
