#include "tmm/synthetic.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <unordered_set>

#include "tmm/error.hpp"

namespace tmm {

SyntheticSpec SyntheticSpec::defaults() {
  SyntheticSpec s;
  s.nouns = {{"pasta", Category::Food},    {"service", Category::Service}, {"waiter", Category::Staff},
             {"prices", Category::Price},  {"decor", Category::Ambience},  {"menu", Category::Menu},
             {"location", Category::Place}, {"parking", Category::Miscellaneous}};
  s.cues[index_of(Polarity::Positive)] = {"tasty", "friendly", "great", "excellent", "lovely", "superb"};
  s.cues[index_of(Polarity::Neutral)] = {"okay", "average", "standard", "ordinary", "acceptable", "typical"};
  s.cues[index_of(Polarity::Negative)] = {"rude", "awful", "bland", "terrible", "slow", "dirty"};
  s.connectors = {"while", "but", "although"};
  s.intensifiers = {"very", "really"};
  s.openers = {"honestly ,", "overall ,", "i think"};
  return s;
}

namespace {

[[noreturn]] void infeasible(const std::string& what) { throw Error(ErrorKind::InfeasibleSpec, what); }

bool valid_probability(double p) { return p >= 0.0 && p <= 1.0; }

std::vector<std::string> split_words(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ' ') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

}  // namespace

void SyntheticSpec::validate() const {
  if (nouns.size() < 2) infeasible("need at least two aspect nouns");
  if (max_aspects < 2) infeasible("max_aspects must be at least 2");
  if (!(mean_aspects >= 2.0)) infeasible("mean aspects per sentence must be at least 2");
  const std::size_t limit = std::min(max_aspects, nouns.size());
  if (mean_aspects > static_cast<double>(limit)) {
    infeasible("mean aspects " + std::to_string(mean_aspects) + " exceeds the " + std::to_string(limit) +
               " aspects a sentence can hold");
  }
  if (sentence_count() == 0) infeasible("sentence count is zero");
  for (Polarity p : kAllPolarities) {
    if (cues[index_of(p)].empty()) infeasible("empty cue lexicon for " + std::string(to_string(p)));
  }
  if (connectors.empty()) infeasible("empty connector lexicon");
  if (!valid_probability(cross_aspect_cue_probability) || !valid_probability(intensifier_probability) ||
      !valid_probability(opener_probability)) {
    infeasible("probabilities must lie in [0, 1]");
  }
  if (intensifier_probability > 0.0 && intensifiers.empty()) infeasible("empty intensifier lexicon");
  if (opener_probability > 0.0 && openers.empty()) infeasible("empty opener lexicon");

  // Every content word must belong to exactly one role, otherwise the gold
  // label is not recoverable from the cue adjacency.
  std::set<std::string> seen;
  auto claim = [&](const std::string& w, const char* role) {
    if (w.empty() || w.find(' ') != std::string::npos) infeasible(std::string(role) + " entries must be single words");
    if (!seen.insert(w).second) infeasible("word '" + w + "' appears in more than one lexicon slot");
  };
  for (const auto& n : nouns) claim(n.word, "noun");
  for (const auto& list : cues)
    for (const auto& w : list) claim(w, "cue");
  for (const auto& w : connectors) claim(w, "connector");
  for (const auto& w : intensifiers) claim(w, "intensifier");
  for (const auto& w : {"the", "is", "not"}) {
    if (seen.contains(w)) infeasible(std::string("reserved word '") + w + "' used in a lexicon");
  }
  for (const auto& o : openers) {
    for (const auto& w : split_words(o)) {
      if (seen.contains(w)) infeasible("opener word '" + w + "' collides with a lexicon word");
    }
  }
  if (task == Task::Acsa) {
    std::set<Category> cats;
    for (const auto& n : nouns) {
      if (!cats.insert(n.category).second) infeasible("ACSA generation needs one noun per category");
    }
  }
}

namespace {

struct Generated {
  std::vector<std::string> tokens;
  std::vector<std::size_t> noun_index;  // into spec.nouns, sentence order
  std::vector<std::size_t> noun_position;
  std::vector<Polarity> polarity;
  CueRegions cues;
};

template <typename T>
const T& pick(const std::vector<T>& v, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> d(0, v.size() - 1);
  return v[d(rng)];
}

Generated generate_one(const SyntheticSpec& spec, std::mt19937_64& rng) {
  const std::size_t extra_max = std::min(spec.max_aspects, spec.nouns.size()) - 2;
  std::size_t m = 2;
  if (extra_max > 0) {
    std::binomial_distribution<std::size_t> extra(extra_max, (spec.mean_aspects - 2.0) / static_cast<double>(extra_max));
    m += extra(rng);
  }

  std::vector<std::size_t> nouns(spec.nouns.size());
  for (std::size_t i = 0; i < nouns.size(); ++i) nouns[i] = i;
  std::shuffle(nouns.begin(), nouns.end(), rng);
  nouns.resize(m);

  std::uniform_int_distribution<std::size_t> polarity_draw(0, kPolarityCount - 1);
  std::vector<Polarity> pol(m);
  do {
    for (auto& p : pol) p = static_cast<Polarity>(polarity_draw(rng));
  } while (!has_mams_property(pol));

  std::bernoulli_distribution use_distractor(spec.cross_aspect_cue_probability);
  std::bernoulli_distribution use_intensifier(spec.intensifier_probability);
  std::bernoulli_distribution use_opener(spec.opener_probability);

  std::ptrdiff_t distractor_aspect = -1;
  std::string distractor_word;
  if (use_distractor(rng)) {
    std::uniform_int_distribution<std::size_t> which(0, m - 1);
    const std::size_t j = which(rng);
    std::vector<Polarity> others;
    for (std::size_t k = 0; k < m; ++k) {
      if (k != j && pol[k] != pol[j]) others.push_back(pol[k]);
    }
    const Polarity dp = pick(others, rng);
    distractor_aspect = static_cast<std::ptrdiff_t>(j);
    distractor_word = pick(spec.cues[index_of(dp)], rng);
  }

  Generated g;
  g.cues.distractor_aspect = distractor_aspect;
  if (use_opener(rng)) {
    for (auto& w : split_words(pick(spec.openers, rng))) g.tokens.push_back(std::move(w));
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (i > 0) g.tokens.push_back(pick(spec.connectors, rng));
    std::vector<std::size_t> region;
    g.tokens.push_back("the");
    g.noun_position.push_back(g.tokens.size());
    region.push_back(g.tokens.size());
    g.tokens.push_back(spec.nouns[nouns[i]].word);
    if (static_cast<std::ptrdiff_t>(i) == distractor_aspect) {
      g.tokens.push_back(",");
      g.tokens.push_back("not");
      g.tokens.push_back(distractor_word);
      g.tokens.push_back(",");
    }
    region.push_back(g.tokens.size());
    g.tokens.push_back("is");
    if (use_intensifier(rng)) {
      region.push_back(g.tokens.size());
      g.tokens.push_back(pick(spec.intensifiers, rng));
    }
    g.cues.cue_position.push_back(g.tokens.size());
    region.push_back(g.tokens.size());
    g.tokens.push_back(pick(spec.cues[index_of(pol[i])], rng));
    g.cues.per_aspect.push_back(std::move(region));
  }
  g.tokens.push_back(".");
  g.noun_index = std::move(nouns);
  g.polarity = std::move(pol);
  return g;
}

std::string join(const std::vector<std::string>& tokens) {
  std::string s;
  for (const auto& t : tokens) {
    if (!s.empty()) s.push_back(' ');
    s += t;
  }
  return s;
}

void append(SyntheticSplit& split, const SyntheticSpec& spec, Generated&& g, std::string text) {
  split.cues.push_back(std::move(g.cues));
  if (spec.task == Task::Atsa) {
    AtsaExample ex;
    ex.text = std::move(text);
    ex.tokens = std::move(g.tokens);
    for (std::size_t i = 0; i < g.polarity.size(); ++i) {
      ex.aspects.push_back({g.noun_position[i], g.noun_position[i] + 1, g.polarity[i]});
    }
    split.corpus.atsa.push_back(std::move(ex));
  } else {
    AcsaExample ex;
    ex.text = std::move(text);
    ex.tokens = std::move(g.tokens);
    for (std::size_t i = 0; i < g.polarity.size(); ++i) {
      ex.aspects.push_back({spec.nouns[g.noun_index[i]].category, g.polarity[i]});
    }
    split.corpus.acsa.push_back(std::move(ex));
  }
}

}  // namespace

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  SyntheticData data;
  SyntheticSplit* splits[] = {&data.train, &data.dev, &data.test};
  const std::size_t sizes[] = {spec.train_size, spec.dev_size, spec.test_size};
  const Split names[] = {Split::Train, Split::Dev, Split::Test};

  std::unordered_set<std::string> used;
  const std::size_t max_attempts = 64 * spec.sentence_count() + 1024;
  std::size_t attempts = 0;
  for (int s = 0; s < 3; ++s) {
    SyntheticSplit& out = *splits[s];
    out.corpus.task = spec.task;
    out.corpus.split = names[s];
    out.corpus.source = "synthetic:seed=" + std::to_string(spec.seed) + ":" + std::string(to_string(names[s]));
    while (out.corpus.size() < sizes[s]) {
      if (++attempts > max_attempts) {
        infeasible("lexicons cannot produce " + std::to_string(spec.sentence_count()) + " distinct sentences");
      }
      Generated g = generate_one(spec, rng);
      std::string text = join(g.tokens);
      if (!used.insert(text).second) continue;
      append(out, spec, std::move(g), std::move(text));
    }
  }
  return data;
}

}  // namespace tmm
