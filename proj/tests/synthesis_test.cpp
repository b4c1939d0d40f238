#include <gtest/gtest.h>

#include "forge/synthesis.hpp"

using namespace forge;
using corpus::GuidanceKind;

namespace {

corpus::QAInstance with_subs(std::vector<std::string> subs) {
    corpus::QAInstance inst;
    inst.id = "i1";
    inst.context_text = "| 2008 | 9362 |\n| 2009 | 10498 |";
    inst.question = "what is the change?";
    inst.gold_answer = "1136";
    for (auto& s : subs) inst.guidance.push_back({GuidanceKind::sub_question, std::move(s)});
    return inst;
}

}  // namespace

TEST(SynthesizeCombinedQuestion, TwoSubQuestionsUseTheGenerator) {
    auto gen = backend::make_scripted_backend({"  What is the two-year change and its percentage?\n"});
    auto inst = with_subs({"What is the 2009 value?", "What is the 2008 value?"});
    auto q = synthesis::synthesize_combined_question(inst, *gen);
    EXPECT_EQ(q.text, "What is the two-year change and its percentage?");
    EXPECT_EQ(q.component_ids, (std::vector<std::size_t>{0, 1}));
    EXPECT_EQ(q.generator_id, "scripted");
    ASSERT_EQ(gen->call_count(), 1u);
    const auto& prompt = gen->requests()[0].user_prompt;
    EXPECT_NE(prompt.find("1. What is the 2009 value?"), std::string::npos);
    EXPECT_NE(prompt.find("2. What is the 2008 value?"), std::string::npos);
    EXPECT_NE(prompt.find("| 2009 | 10498 |"), std::string::npos);
}

TEST(SynthesizeCombinedQuestion, SingleSubQuestionPassesThrough) {
    auto gen = backend::make_scripted_backend({});
    auto q = synthesis::synthesize_combined_question(with_subs({"What is the pro forma net income?"}), *gen);
    EXPECT_EQ(q.text, "What is the pro forma net income?");
    EXPECT_EQ(q.component_ids, (std::vector<std::size_t>{0}));
    EXPECT_EQ(gen->call_count(), 0u);
}

TEST(SynthesizeCombinedQuestion, NoGuidanceIsAnArgumentError) {
    auto gen = backend::make_scripted_backend({"x"});
    EXPECT_THROW(synthesis::synthesize_combined_question(with_subs({}), *gen), std::invalid_argument);
}

TEST(SynthesizeCombinedQuestion, ProgramStepsAreNotSubQuestions) {
    auto inst = with_subs({"a?"});
    inst.guidance.insert(inst.guidance.begin(), {GuidanceKind::program_step, "subtract(10498, 9362)"});
    inst.guidance.push_back({GuidanceKind::sub_question, "b?"});
    auto gen = backend::make_scripted_backend({"a and b?"});
    auto q = synthesis::synthesize_combined_question(inst, *gen);
    EXPECT_EQ(q.component_ids, (std::vector<std::size_t>{1, 2}));
}

TEST(SynthesizeCombinedQuestion, BackendFailurePropagates) {
    auto gen = backend::make_scripted_backend({});
    EXPECT_THROW(synthesis::synthesize_combined_question(with_subs({"a?", "b?"}), *gen), backend::BackendError);
    auto blank = backend::make_scripted_backend({"   "});
    EXPECT_THROW(synthesis::synthesize_combined_question(with_subs({"a?", "b?"}), *blank), backend::BackendError);
}

TEST(AttachGuidance, ReplacementSemantics) {
    auto inst = with_subs({"a?"});
    auto two = synthesis::attach_guidance(inst, {{GuidanceKind::program_step, "add(1, 2)"},
                                                 {GuidanceKind::program_step, "divide(#0, 3)"}});
    EXPECT_EQ(two.guidance.size(), 2u);
    EXPECT_EQ(inst.guidance.size(), 1u);
    EXPECT_TRUE(synthesis::attach_guidance(inst, {}).guidance.empty());
    auto again = synthesis::attach_guidance(two, {{GuidanceKind::sub_question, "c?"}});
    ASSERT_EQ(again.guidance.size(), 1u);
    EXPECT_EQ(again.guidance[0].text, "c?");
}

TEST(ApplyCombinedQuestion, AugmentKeepsOriginalQuestion) {
    auto inst = with_subs({"a?", "b?"});
    synthesis::CombinedQuestion q{"a and b?", {0, 1}, "gen"};
    auto kept = synthesis::apply_combined_question(inst, q, false);
    EXPECT_EQ(kept.question, inst.question);
    EXPECT_EQ(kept.meta["combined_question"]["text"], "a and b?");
    EXPECT_FALSE(kept.meta["combined_question"].contains("original_question"));

    auto replaced = synthesis::apply_combined_question(inst, q, true);
    EXPECT_EQ(replaced.question, "a and b?");
    EXPECT_EQ(replaced.meta["combined_question"]["original_question"], inst.question);
}
