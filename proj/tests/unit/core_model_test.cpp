#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "elicit/core_model.hpp"
#include "elicit/error.hpp"
#include "elicit/random.hpp"
#include "support.hpp"

namespace elicit {
namespace {

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::ParseError;
}

Session numbered(std::size_t n) {
  Session s("s", DomainRegistry::builtin().find("apartment"));
  for (std::size_t i = 0; i < n; ++i)
    s.append(i % 2 ? Speaker::Interviewee : Speaker::Interviewer, "turn " + std::to_string(i));
  return s;
}

TEST(Session, FirstAppendGetsIndexZero) {
  Session s("s", DomainRegistry::builtin().find("apartment"));
  const auto next = append_turn(s, Speaker::Interviewee, "I use a website");
  ASSERT_EQ(next.size(), 1u);
  EXPECT_EQ(next.turns()[0].index, 0u);
  EXPECT_EQ(next.turns()[0].speaker, Speaker::Interviewee);
  EXPECT_EQ(next.turns()[0].text, "I use a website");
  EXPECT_EQ(s.size(), 0u);  // value semantics
}

TEST(Session, IndicesAreMonotone) {
  auto s = numbered(5);
  EXPECT_EQ(s.append(Speaker::Interviewer, "next").index, 5u);
}

TEST(Session, ClosedRejectsAppend) {
  auto s = numbered(2);
  s.close();
  EXPECT_EQ(code_of([&] { s.append(Speaker::Interviewer, "x"); }), ErrorCode::SessionClosed);
}

TEST(Session, BlankTextRejectedAndTextTrimmed) {
  auto s = numbered(0);
  EXPECT_EQ(code_of([&] { s.append(Speaker::Interviewer, "  \t "); }), ErrorCode::EmptyText);
  EXPECT_EQ(s.append(Speaker::Interviewer, "  hi? \n").text, "hi?");
}

TEST(Session, FromTurnsNeedsContiguousIndices) {
  std::vector<Turn> turns{{0, Speaker::Interviewer, "a", {}, {}}, {2, Speaker::Interviewee, "b", {}, {}}};
  EXPECT_ANY_THROW(Session::from_turns("s", {}, turns));
}

TEST(Window, PrecedingTurnsOnly) {
  const auto s = numbered(10);
  const auto w = window(s, 9, 4);
  ASSERT_EQ(w.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(w[i].index, 5 + i);
}

TEST(Window, EmptyAtStart) {
  const auto s = numbered(10);
  EXPECT_TRUE(window(s, 0, 4).empty());
  EXPECT_TRUE(window(s, 0, 100).empty());
}

TEST(Window, OutOfRange) {
  const auto s = numbered(3);
  EXPECT_EQ(code_of([&] { (void)window(s, 3, 1); }), ErrorCode::IndexOutOfRange);
}

TEST(Window, SuffixPropertyAndNoLookahead) {
  const auto s = numbered(12);
  for (std::size_t end = 0; end < s.size(); ++end) {
    for (std::size_t k1 = 0; k1 <= 12; ++k1) {
      const auto small = window(s, end, k1);
      for (const auto& t : small) EXPECT_LT(t.index, end);
      for (std::size_t k2 = k1; k2 <= 12; ++k2) {
        const auto big = window(s, end, k2);
        ASSERT_LE(small.size(), big.size());
        EXPECT_TRUE(std::equal(small.begin(), small.end(), big.end() - static_cast<long>(small.size())));
      }
    }
  }
}

TEST(Window, TailClamps) {
  const auto s = numbered(2);
  EXPECT_EQ(tail_window(s, 4).size(), 2u);
  EXPECT_EQ(tail_window(numbered(7), 4).front().index, 3u);
}

TEST(Serialization, SessionRoundTrip) {
  Session s("s7", DomainRegistry::builtin().find("trail"));
  s.append(Speaker::Interviewer, "Where do you hike?", "2024-01-01T00:00:00Z");
  s.append(Speaker::Interviewee, "Mostly near the lake.");
  s.append(Speaker::Interviewer, "What do you bring?", std::nullopt,
           Provenance{"s7.1.1", GenerationMode::Guided, "use-jargon", "What gear do you pack?"});
  s.close();
  const auto text = session_to_json(s).dump();
  const auto back = session_from_json(nlohmann::json::parse(text));
  EXPECT_EQ(back, s);
  EXPECT_EQ(session_to_json(back).dump(), text);
}

TEST(Serialization, TranscriptRoundTrip) {
  const auto s = numbered(4);
  const auto text = format_transcript(s.turns());
  EXPECT_EQ(parse_transcript(text), s.turns());
}

TEST(Serialization, SpeakerTokensAreUpperCase) {
  EXPECT_EQ(to_string(Speaker::Interviewer), "INTERVIEWER");
  EXPECT_EQ(parse_speaker("INTERVIEWEE"), Speaker::Interviewee);
  EXPECT_ANY_THROW(parse_speaker("bob"));
}

TEST(Domains, BuiltinSeeds) {
  const auto reg = DomainRegistry::builtin();
  EXPECT_EQ(reg.all().size(), 4u);
  EXPECT_EQ(reg.find("apartment").seed_question, "How do you find an apartment?");
  EXPECT_EQ(code_of([&] { (void)reg.find("moon"); }), ErrorCode::UnknownDomain);
}

TEST(TurnStats, SingleAnnotation) {
  std::vector<ContextAnnotation> a{{"s", 3, 2, QuestionType::QuestionProbing}};
  const auto st = turn_stats(a);
  EXPECT_EQ(st.total, 1u);
  EXPECT_EQ(st.by_required_turns.at(2), 1u);
  EXPECT_EQ(st.by_type.at(QuestionType::QuestionProbing), 1u);
  EXPECT_EQ(st.by_required_turns.size(), 1u);
}

TEST(TurnStats, SameKeyAdds) {
  std::vector<ContextAnnotation> a{{"s", 3, 2, QuestionType::Clarification},
                                   {"t", 5, 2, QuestionType::Clarification}};
  const auto st = turn_stats(a);
  EXPECT_EQ(st.by_required_turns.at(2), 2u);
  EXPECT_EQ(st.by_type.at(QuestionType::Clarification), 2u);
}

TEST(TurnStats, EmptyInput) {
  EXPECT_EQ(code_of([] { (void)turn_stats({}); }), ErrorCode::EmptyInput);
}

TEST(TurnStats, HistogramsSumToTotal) {
  Rng rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<ContextAnnotation> a(1 + rng.below(60));
    for (auto& x : a) {
      x.session_id = "s";
      x.question_turn_index = 10;
      x.required_turns = rng.below(11);
      x.question_type = all_question_types()[rng.below(kQuestionTypeCount)];
    }
    const auto st = turn_stats(a);
    std::size_t sum1 = 0, sum2 = 0;
    for (auto [k, v] : st.by_required_turns) sum1 += v;
    for (auto [k, v] : st.by_type) sum2 += v;
    EXPECT_EQ(sum1, a.size());
    EXPECT_EQ(sum2, a.size());
    EXPECT_EQ(st.at_most(10), a.size());
  }
}

TEST(TurnStats, Fixture) {
  const auto annotations = parse_annotations(testing::read(testing::fixture("context/annotations.tsv")));
  const auto st = turn_stats(annotations);
  EXPECT_EQ(st.total, 146u);
  EXPECT_EQ(st.by_required_turns.at(0), 71u);
  EXPECT_EQ(st.at_most(1), 104u);
  EXPECT_EQ(st.at_most(4), 144u);
}

TEST(Annotation, Validation) {
  const auto s = numbered(6);  // even indices are interviewer turns
  EXPECT_NO_THROW(validate_annotation(s, {"s", 4, 4, QuestionType::AnswerProbing}));
  EXPECT_EQ(code_of([&] { validate_annotation(s, {"s", 4, 5, QuestionType::AnswerProbing}); }),
            ErrorCode::InvalidAnnotation);
  EXPECT_EQ(code_of([&] { validate_annotation(s, {"s", 3, 0, QuestionType::AnswerProbing}); }),
            ErrorCode::InvalidAnnotation);
  EXPECT_EQ(code_of([&] { validate_annotation(s, {"s", 9, 0, QuestionType::AnswerProbing}); }),
            ErrorCode::IndexOutOfRange);
}

TEST(Annotation, TsvRoundTrip) {
  std::vector<ContextAnnotation> a{{"t01", 2, 1, QuestionType::AlternativeSeeking},
                                   {"t02", 0, 0, QuestionType::TopicChange}};
  EXPECT_EQ(parse_annotations(format_annotations(a)), a);
}

}  // namespace
}  // namespace elicit
