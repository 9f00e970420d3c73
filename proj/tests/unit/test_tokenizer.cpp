#include <sstream>

#include <gtest/gtest.h>

#include "tmm/sequence.hpp"
#include "tmm/synthetic.hpp"
#include "tmm/tokenizer.hpp"
#include "tmm/trainer.hpp"
#include "tmm/vocab.hpp"
#include "tmm_testing.hpp"

using namespace tmm;
using tmm::test::kind_of;

namespace {

std::vector<std::string> render(const EncodedSequence& seq, const Vocab& vocab) {
  std::vector<std::string> out;
  for (TokenId id : seq.ids) out.push_back(vocab.token(id));
  return out;
}

Vocab vocab_for(const AtsaExample& ex) {
  const std::vector<std::vector<std::string>> corpus = {ex.tokens};
  return Vocab::build(corpus, 1);
}

Vocab vocab_for(const AcsaExample& ex) {
  const std::vector<std::vector<std::string>> corpus = {ex.tokens};
  const auto categories = category_tokens();
  return Vocab::build(corpus, 1, categories);
}

SyntheticData thousand(Task task) {
  SyntheticSpec spec = SyntheticSpec::defaults();
  spec.task = task;
  spec.seed = 1234;
  spec.train_size = 1000;
  spec.dev_size = 0;
  spec.test_size = 0;
  return generate_synthetic(spec);
}

}  // namespace

TEST(Tokenize, LowercasesAndSplitsPunctuation) {
  EXPECT_EQ(tokenize("The Salmon, honestly!"),
            (std::vector<std::string>{"the", "salmon", ",", "honestly", "!"}));
  EXPECT_EQ(tokenize("  a\tb\n"), (std::vector<std::string>{"a", "b"}));
  EXPECT_TRUE(tokenize("   ").empty());
  EXPECT_EQ(tokenize("don't"), (std::vector<std::string>{"don", "'", "t"}));
}

TEST(Tokenize, JoinTokensClampsRange) {
  const std::vector<std::string> t = {"a", "b", "c"};
  EXPECT_EQ(join_tokens(t, 0, 2), "a b");
  EXPECT_EQ(join_tokens(t, 1, 10), "b c");
  EXPECT_EQ(join_tokens(t, 2, 2), "");
}

TEST(Vocab, ReservedIdsAreFixed) {
  const Vocab v;
  ASSERT_EQ(v.size(), special::kReservedCount);
  EXPECT_EQ(v.id("[PAD]"), special::kPad);
  EXPECT_EQ(v.id("[UNK]"), special::kUnk);
  EXPECT_EQ(v.id("[AS]"), special::kAspectStart);
  EXPECT_EQ(v.id("[AE]"), special::kAspectEnd);
  EXPECT_EQ(v.id("[CLS]"), special::kCls);
  EXPECT_EQ(v.id("[SEP]"), special::kSep);
  // reserved literals are case sensitive
  EXPECT_EQ(v.id("[as]"), special::kUnk);
}

TEST(Vocab, OrdersByCountThenLexicographically) {
  const std::vector<std::vector<std::string>> corpus = {{"a", "a", "b"}};
  const Vocab v = Vocab::build(corpus, 1);
  EXPECT_EQ(v.id("a"), 6u);
  EXPECT_EQ(v.id("b"), 7u);

  const std::vector<std::vector<std::string>> tie = {{"z", "y", "x", "y"}};
  const Vocab w = Vocab::build(tie, 1);
  EXPECT_EQ(w.token(6), "y");
  EXPECT_EQ(w.token(7), "x");
  EXPECT_EQ(w.token(8), "z");
}

TEST(Vocab, MinFrequencyExcludesRareTokens) {
  const std::vector<std::vector<std::string>> corpus = {{"a", "b"}};
  const Vocab v = Vocab::build(corpus, 2);
  EXPECT_EQ(v.size(), special::kReservedCount);
  EXPECT_EQ(v.id("a"), special::kUnk);
  EXPECT_FALSE(v.contains("a"));
}

TEST(Vocab, AlwaysIncludeAppendsAfterRanked) {
  const std::vector<std::vector<std::string>> corpus = {{"food", "b", "b"}};
  const std::vector<std::string> extra = {"food", "staff"};
  const Vocab v = Vocab::build(corpus, 1, extra);
  EXPECT_EQ(v.id("b"), 6u);
  EXPECT_EQ(v.id("food"), 7u);
  EXPECT_EQ(v.id("staff"), 8u);
}

TEST(Vocab, Errors) {
  const std::vector<std::vector<std::string>> none;
  EXPECT_EQ(kind_of([&] { Vocab::build(none, 1); }), ErrorKind::EmptyCorpus);
  const std::vector<std::vector<std::string>> one = {{"a"}};
  EXPECT_EQ(kind_of([&] { Vocab::build(one, 0); }), ErrorKind::InvalidArgument);
  const Vocab v;
  EXPECT_EQ(kind_of([&] { v.token(99); }), ErrorKind::IdOutOfRange);
}

TEST(Vocab, BijectiveAndSaveLoadRoundTrip) {
  const SyntheticData data = thousand(Task::Atsa);
  const Vocab v = build_vocab(data.train.corpus, 1);
  for (TokenId id = 0; id < v.size(); ++id) EXPECT_EQ(v.id(v.token(id)), id);

  std::stringstream buf;
  v.save(buf);
  const Vocab back = Vocab::load(buf);
  EXPECT_EQ(back, v);

  // rebuild determinism
  EXPECT_EQ(build_vocab(data.train.corpus, 1), v);
}

TEST(Vocab, LoadRejectsMissingReservedBlock) {
  std::stringstream bad("# tmm-vocab v1 min_frequency=1\n[PAD]\nfoo\n");
  EXPECT_THROW(Vocab::load(bad), Error);
  std::stringstream no_header("[PAD]\n");
  EXPECT_THROW(Vocab::load(no_header), Error);
}

TEST(EncodeAtsa, SalmonWaiterExample) {
  const AtsaExample ex = test::salmon_waiter_atsa();
  const Vocab v = vocab_for(ex);
  const EncodedSequence seq = encode_tmm_atsa(ex, v);
  EXPECT_EQ(render(seq, v), (std::vector<std::string>{"the", "[AS]", "salmon", "[AE]", "is", "tasty", "while",
                                                      "the", "[AS]", "waiter", "[AE]", "is", "very", "rude"}));
  EXPECT_EQ(seq.anchors, (std::vector<std::size_t>{1, 8}));
  EXPECT_EQ(seq.gold, (std::vector<Polarity>{Polarity::Positive, Polarity::Negative}));
  EXPECT_EQ(seq.scheme, SequenceScheme::TmmAtsa);
  EXPECT_EQ(seq.origin[0], 0);
  EXPECT_EQ(seq.origin[1], -1);
  EXPECT_EQ(seq.origin[2], 1);
  EXPECT_EQ(seq.origin[3], -1);
}

TEST(EncodeAtsa, ZeroAspectsIsBareSentence) {
  AtsaExample ex = test::salmon_waiter_atsa();
  ex.aspects.clear();
  const Vocab v = vocab_for(ex);
  const EncodedSequence seq = encode_tmm_atsa(ex, v);
  EXPECT_EQ(render(seq, v), ex.tokens);
  EXPECT_TRUE(seq.anchors.empty());
}

TEST(EncodeAtsa, OovWordsBecomeUnk) {
  const AtsaExample ex = test::salmon_waiter_atsa();
  const Vocab empty;
  const EncodedSequence seq = encode_tmm_atsa(ex, empty);
  EXPECT_EQ(seq.ids[2], special::kUnk);
  EXPECT_EQ(seq.ids[1], special::kAspectStart);
}

TEST(EncodeAtsa, MultiWordSpan) {
  AtsaExample ex;
  ex.tokens = tokenize("the fish and chips were cold");
  ex.aspects = {{1, 4, Polarity::Negative}};
  const Vocab v = vocab_for(ex);
  const EncodedSequence seq = encode_tmm_atsa(ex, v);
  EXPECT_EQ(render(seq, v), (std::vector<std::string>{"the", "[AS]", "fish", "and", "chips", "[AE]", "were", "cold"}));
}

TEST(EncodeAtsa, InvalidSpans) {
  AtsaExample ex = test::salmon_waiter_atsa();
  const Vocab v = vocab_for(ex);
  AtsaExample overlap = ex;
  overlap.aspects = {{1, 3, Polarity::Positive}, {2, 4, Polarity::Negative}};
  EXPECT_EQ(kind_of([&] { encode_tmm_atsa(overlap, v); }), ErrorKind::OverlappingSpans);
  AtsaExample unsorted = ex;
  std::swap(unsorted.aspects[0], unsorted.aspects[1]);
  EXPECT_EQ(kind_of([&] { encode_tmm_atsa(unsorted, v); }), ErrorKind::OverlappingSpans);
  AtsaExample beyond = ex;
  beyond.aspects = {{9, 11, Polarity::Positive}};
  EXPECT_EQ(kind_of([&] { encode_tmm_atsa(beyond, v); }), ErrorKind::SpanOutOfRange);
  AtsaExample empty_span = ex;
  empty_span.aspects = {{3, 3, Polarity::Positive}};
  EXPECT_EQ(kind_of([&] { encode_tmm_atsa(empty_span, v); }), ErrorKind::SpanOutOfRange);
}

TEST(EncodeAtsa, TruncatesAfterLastRegionOnly) {
  const AtsaExample ex = test::salmon_waiter_atsa();
  const Vocab v = vocab_for(ex);
  const EncodedSequence cut = encode_tmm_atsa(ex, v, 12);
  EXPECT_EQ(cut.ids.size(), 12u);
  EXPECT_EQ(cut.origin.size(), 12u);
  EXPECT_EQ(cut.anchors, (std::vector<std::size_t>{1, 8}));
  EXPECT_EQ(kind_of([&] { encode_tmm_atsa(ex, v, 10); }), ErrorKind::SequenceTooLong);
}

TEST(EncodeAcsa, SalmonWaiterExample) {
  const AcsaExample ex = test::salmon_waiter_acsa();
  const Vocab v = vocab_for(ex);
  const EncodedSequence seq = encode_tmm_acsa(ex, v);
  const std::size_t n = ex.tokens.size();
  const auto tokens = render(seq, v);
  ASSERT_EQ(tokens.size(), n + 4);
  EXPECT_EQ(std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(n), tokens.end()),
            (std::vector<std::string>{"[AS]", "food", "[AS]", "staff"}));
  EXPECT_EQ(seq.anchors, (std::vector<std::size_t>{n, n + 2}));
}

TEST(EncodeAcsa, ZeroCategoriesIsBareSentence) {
  AcsaExample ex = test::salmon_waiter_acsa();
  ex.aspects.clear();
  const Vocab v = vocab_for(ex);
  const EncodedSequence seq = encode_tmm_acsa(ex, v);
  EXPECT_EQ(render(seq, v), ex.tokens);
  EXPECT_TRUE(seq.anchors.empty());
}

TEST(EncodeAcsa, Errors) {
  const AcsaExample ex = test::salmon_waiter_acsa();
  const Vocab without_categories;
  EXPECT_EQ(kind_of([&] { encode_tmm_acsa(ex, without_categories); }), ErrorKind::UnknownCategory);
  const Vocab v = vocab_for(ex);
  EXPECT_EQ(kind_of([&] { encode_tmm_acsa(ex, v, 12); }), ErrorKind::SequenceTooLong);
  AcsaExample repeated = ex;
  repeated.aspects[1].category = Category::Food;
  EXPECT_EQ(kind_of([&] { encode_tmm_acsa(repeated, v); }), ErrorKind::InvalidArgument);
}

TEST(EncodeBaseline, SegmentPair) {
  const AtsaExample ex = test::salmon_waiter_atsa();
  const Vocab v = vocab_for(ex);
  const EncodedSequence seq = encode_baseline_single(ex, 0, v);
  std::vector<std::string> expected = {"[CLS]", "salmon", "[SEP]"};
  expected.insert(expected.end(), ex.tokens.begin(), ex.tokens.end());
  expected.push_back("[SEP]");
  EXPECT_EQ(render(seq, v), expected);
  EXPECT_EQ(seq.anchors, (std::vector<std::size_t>{0}));
  EXPECT_EQ(seq.gold, (std::vector<Polarity>{Polarity::Positive}));
  EXPECT_EQ(seq.aspect_index, 0u);
  EXPECT_EQ(seq.scheme, SequenceScheme::BaselineSingle);

  const AcsaExample cat = test::salmon_waiter_acsa();
  const Vocab cv = vocab_for(cat);
  const EncodedSequence cseq = encode_baseline_single(cat, 1, cv);
  EXPECT_EQ(render(cseq, cv)[1], "staff");
  EXPECT_EQ(cseq.gold, (std::vector<Polarity>{Polarity::Negative}));
}

TEST(EncodeBaseline, MinimalLengthFive) {
  AtsaExample ex;
  ex.tokens = {"great"};
  ex.aspects = {{0, 1, Polarity::Positive}};
  const Vocab v = vocab_for(ex);
  EXPECT_EQ(encode_baseline_single(ex, 0, v).ids.size(), 5u);
}

TEST(EncodeBaseline, AspectIndexOutOfRange) {
  const AtsaExample ex = test::salmon_waiter_atsa();
  const Vocab v = vocab_for(ex);
  EXPECT_EQ(kind_of([&] { encode_baseline_single(ex, 2, v); }), ErrorKind::AspectIndexOutOfRange);
  const AcsaExample cat = test::salmon_waiter_acsa();
  EXPECT_EQ(kind_of([&] { encode_baseline_single(cat, 5, v); }), ErrorKind::AspectIndexOutOfRange);
}

TEST(EncodeBaseline, InstanceCountEqualsAspectCount) {
  const SyntheticData data = thousand(Task::Atsa);
  const Corpus& c = data.train.corpus;
  const Vocab v = build_vocab(c, 1);
  const auto seqs = encode_corpus(c, v, TrainScheme::Baseline, kDefaultMaxSequenceLength);
  EXPECT_EQ(seqs.size(), c.aspect_count());
  std::size_t anchors = 0;
  for (const auto& s : seqs) anchors += s.anchors.size();
  EXPECT_EQ(anchors, c.aspect_count());
  EXPECT_EQ(encode_corpus(c, v, TrainScheme::Tmm, kDefaultMaxSequenceLength).size(), c.size());
}

TEST(EncodingIdentities, AtsaOnThousandSyntheticExamples) {
  const SyntheticData data = thousand(Task::Atsa);
  const Corpus& c = data.train.corpus;
  ASSERT_EQ(c.size(), 1000u);
  const Vocab v = build_vocab(c, 1);
  for (const AtsaExample& ex : c.atsa) {
    const EncodedSequence seq = encode_tmm_atsa(ex, v);
    const std::size_t n = ex.tokens.size();
    const std::size_t m = ex.aspects.size();
    ASSERT_EQ(seq.ids.size(), n + 2 * m);
    ASSERT_EQ(seq.anchors.size(), m);
    for (std::size_t i = 0; i < m; ++i) {
      ASSERT_EQ(seq.ids[seq.anchors[i]], special::kAspectStart);
      ASSERT_EQ(seq.origin[seq.anchors[i] + 1], static_cast<std::ptrdiff_t>(ex.aspects[i].start));
      if (i > 0) {
        ASSERT_LT(seq.anchors[i - 1], seq.anchors[i]);
      }
    }
    ASSERT_EQ(strip_anchor_tokens(seq, v), ex.tokens);
    ASSERT_EQ(encode_tmm_atsa(ex, v), seq);
  }
}

TEST(EncodingIdentities, AcsaOnThousandSyntheticExamples) {
  const SyntheticData data = thousand(Task::Acsa);
  const Corpus& c = data.train.corpus;
  ASSERT_EQ(c.size(), 1000u);
  const Vocab v = build_vocab(c, 1);
  for (const AcsaExample& ex : c.acsa) {
    const EncodedSequence seq = encode_tmm_acsa(ex, v);
    const std::size_t n = ex.tokens.size();
    const std::size_t m = ex.aspects.size();
    ASSERT_EQ(seq.ids.size(), n + 2 * m);
    ASSERT_EQ(seq.anchors.size(), m);
    for (std::size_t i = 0; i < m; ++i) {
      ASSERT_EQ(seq.anchors[i], n + 2 * i);
      ASSERT_EQ(seq.ids[seq.anchors[i]], special::kAspectStart);
      ASSERT_EQ(v.token(seq.ids[seq.anchors[i] + 1]), to_string(ex.aspects[i].category));
    }
    ASSERT_EQ(strip_anchor_tokens(seq, v), ex.tokens);
  }
}

TEST(StripAnchors, OovSurvivesAsUnk) {
  const AtsaExample ex = test::salmon_waiter_atsa();
  const std::vector<std::vector<std::string>> partial = {{"the", "is"}};
  const Vocab v = Vocab::build(partial, 1);
  const auto stripped = strip_anchor_tokens(encode_tmm_atsa(ex, v), v);
  ASSERT_EQ(stripped.size(), ex.tokens.size());
  EXPECT_EQ(stripped[0], "the");
  EXPECT_EQ(stripped[1], "[UNK]");
}

TEST(BuildVocab, AcsaAlwaysAdmitsCategories) {
  const SyntheticData data = thousand(Task::Acsa);
  const Vocab v = build_vocab(data.train.corpus, 1000000);
  for (const std::string& c : category_tokens()) EXPECT_TRUE(v.contains(c)) << c;
  EXPECT_EQ(category_tokens().size(), 8u);
}
