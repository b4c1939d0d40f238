#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "forge/answerjudge.hpp"

using namespace forge;
using namespace forge::judge;

namespace {

ExtractedAnswer must_extract(std::string_view text) {
    auto a = extract_final_answer(text);
    EXPECT_TRUE(a.has_value()) << "no answer in: " << text;
    return a.value_or(ExtractedAnswer{});
}

bool equiv_text(std::string_view candidate, std::string_view gold, const TolerancePolicy& p = {}) {
    return numeric_equivalent(must_extract(candidate), must_extract(gold), p);
}

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

// Independent formatter: groups the integer part of |v| in threes.
std::string with_commas(double v, int decimals) {
    std::string s = fixed(std::fabs(v), decimals);
    const auto dot = s.find('.');
    std::string int_part = s.substr(0, dot);
    const std::string frac = dot == std::string::npos ? "" : s.substr(dot);
    std::string grouped;
    for (std::size_t i = 0; i < int_part.size(); ++i) {
        if (i > 0 && (int_part.size() - i) % 3 == 0) grouped += ',';
        grouped += int_part[i];
    }
    return (v < 0 ? "-" : "") + grouped + frac;
}

}  // namespace

TEST(ExtractFinalAnswer, TemplateSentence) {
    auto a = must_extract("Revenue rose in both years. Therefore, the answer is 61.07.");
    EXPECT_DOUBLE_EQ(a.value, 61.07);
    EXPECT_FALSE(a.is_percent);
}

TEST(ExtractFinalAnswer, CurrencyWithScale) {
    auto a = must_extract("Pro forma net income is $1,802 million.");
    EXPECT_DOUBLE_EQ(a.value, 1802);
    EXPECT_EQ(a.scale, Scale::million);
}

TEST(ExtractFinalAnswer, AccountingNegativePercent) {
    auto a = must_extract("The answer is (3.5%)");
    EXPECT_DOUBLE_EQ(a.value, -3.5);
    EXPECT_TRUE(a.is_percent);
}

TEST(ExtractFinalAnswer, NoNumber) {
    EXPECT_FALSE(extract_final_answer("I cannot determine this.").has_value());
    EXPECT_FALSE(extract_final_answer("").has_value());
}

TEST(ExtractFinalAnswer, LastMarkerWins) {
    auto a = must_extract("First guess: the answer is 5. On reflection, the answer is 7.");
    EXPECT_DOUBLE_EQ(a.value, 7);
}

TEST(ExtractFinalAnswer, FallsBackToLastNumberOfFinalSentence) {
    auto a = must_extract("In 2014 the index was 285.37. In 2015 it reached 319.10");
    EXPECT_DOUBLE_EQ(a.value, 319.10);
}

TEST(ExtractFinalAnswer, YearRangeIsNotNegative) {
    auto a = must_extract("The change over 2014-2015 is reported. The answer is 2015-2014 = 1");
    EXPECT_GE(a.value, 0);
}

TEST(ExtractFinalAnswer, SpelledPercentAndUnicodeMinus) {
    auto p = must_extract("the answer is 12.5 percent");
    EXPECT_TRUE(p.is_percent);
    EXPECT_DOUBLE_EQ(p.value, 12.5);
    auto m = must_extract("the answer is −4.2");
    EXPECT_DOUBLE_EQ(m.value, -4.2);
}

TEST(NumericEquivalent, DerivedGrowthCase) {
    // Growth from the 2014 and 2015 index values of the appendix table.
    const double growth = (319.10 - 285.37) / 285.37;
    const std::string gold = fixed(growth * 100, 2) + "%";
    ASSERT_EQ(gold, "11.82%");
    EXPECT_TRUE(equiv_text("0.1182", gold));
    EXPECT_TRUE(equiv_text(gold, "0.1182"));
}

TEST(NumericEquivalent, PaperCases) {
    EXPECT_TRUE(equiv_text("$71 million", "71"));
    EXPECT_FALSE(equiv_text("285.37", "319.10"));
    EXPECT_TRUE(equiv_text("0.118", "0.1182"));
}

TEST(NumericEquivalent, PolicySwitches) {
    TolerancePolicy strict;
    strict.allow_percent_decimal = false;
    strict.allow_scale_units = false;
    EXPECT_FALSE(equiv_text("0.1182", "11.82%", strict));
    EXPECT_FALSE(equiv_text("1.5 million", "1500000", strict));
    EXPECT_TRUE(equiv_text("1.5 million", "1500000"));
}

TEST(NumericEquivalent, PercentShiftNeedsExactlyOneMarker) {
    EXPECT_FALSE(equiv_text("11.82%", "0.1182%"));
    EXPECT_TRUE(equiv_text("11.82%", "11.82%"));
}

TEST(NumericEquivalentProperty, FormattingVariantsOverGeneratedValues) {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> mag(0.0, 7.0);
    const TolerancePolicy policy;
    int checked = 0;
    for (int i = 0; i < 1500; ++i) {
        // Two-decimal values spread over 1 .. 10^7.
        const double v = std::round(std::pow(10.0, mag(rng)) * 100.0) / 100.0;
        if (v < 1.0) continue;
        const std::string plain = fixed(v, 2);
        SCOPED_TRACE("v=" + plain);

        EXPECT_TRUE(equiv_text(with_commas(v, 2), plain));
        EXPECT_TRUE(equiv_text("$" + with_commas(v, 2), plain));
        EXPECT_TRUE(equiv_text("USD " + plain, plain));
        EXPECT_TRUE(equiv_text("€" + plain, plain));
        EXPECT_TRUE(equiv_text("(" + with_commas(v, 2) + ")", "-" + plain));
        EXPECT_TRUE(equiv_text("$(" + plain + ")", fixed(-v, 2)));

        // percent <-> decimal, both directions
        const std::string pct = plain + "%";
        const std::string dec = fixed(v / 100.0, 8);
        EXPECT_TRUE(equiv_text(dec, pct));
        EXPECT_TRUE(equiv_text(pct, dec));

        // million / billion scaling against the fully written-out value
        EXPECT_TRUE(equiv_text(plain + " million", fixed(v * 1e6, 0)));
        EXPECT_TRUE(equiv_text(plain + " billion", fixed(v * 1e9, 0)));
        EXPECT_TRUE(equiv_text(plain + " billion", fixed(v * 1000.0, 2) + " million"));

        // Tolerance edges: 1/5 of rel_tol accepted, 3x rel_tol rejected, both directions.
        const double near = v * (1.0 + policy.rel_tol / 5.0);
        const double far_up = v * (1.0 + 3.0 * policy.rel_tol);
        const double far_down = v * (1.0 - 3.0 * policy.rel_tol);
        EXPECT_TRUE(equiv_text(fixed(near, 6), plain));
        EXPECT_FALSE(equiv_text(fixed(far_up, 6), plain));
        EXPECT_FALSE(equiv_text(fixed(far_down, 6), plain));
        EXPECT_FALSE(equiv_text(fixed(far_up, 6) + " million", fixed(v * 1e6, 0)));
        EXPECT_FALSE(equiv_text(fixed(far_up / 100.0, 8), pct));
        ++checked;
    }
    EXPECT_GE(checked, 1000);
}

TEST(NumericEquivalentProperty, ReflexiveAndSymmetric) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> val(-1e6, 1e6);
    std::uniform_real_distribution<double> jitter(-0.02, 0.02);
    const Scale scales[] = {Scale::unit, Scale::thousand, Scale::million, Scale::billion};
    for (int i = 0; i < 2000; ++i) {
        ExtractedAnswer a{val(rng), rng() % 2 == 0, scales[rng() % 4], "a"};
        ExtractedAnswer b = a;
        switch (rng() % 4) {
            case 0: b.value = a.value * (1 + jitter(rng)); break;
            case 1: b.value = a.value / 100.0; b.is_percent = !a.is_percent; break;
            case 2: b.scale = scales[rng() % 4]; break;
            default: b.value = val(rng); break;
        }
        EXPECT_TRUE(numeric_equivalent(a, a));
        EXPECT_EQ(numeric_equivalent(a, b), numeric_equivalent(b, a)) << a.value << " vs " << b.value;
    }
}

TEST(CanonicalText, ReadsBackToTheSameAnswer) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> val(-1e5, 1e5);
    const Scale scales[] = {Scale::unit, Scale::thousand, Scale::million, Scale::billion};
    for (int i = 0; i < 500; ++i) {
        ExtractedAnswer a{std::round(val(rng) * 1000) / 1000, rng() % 2 == 0, scales[rng() % 4], ""};
        if (a.is_percent) a.scale = Scale::unit;
        auto back = must_extract("Therefore, the answer is " + canonical_text(a) + ".");
        EXPECT_NEAR(back.value, a.value, 1e-9);
        EXPECT_EQ(back.is_percent, a.is_percent);
        EXPECT_EQ(back.scale, a.scale);
    }
}

TEST(JudgeWithLlm, VerdictMapping) {
    auto correct = backend::make_scripted_backend({"CORRECT"});
    auto v = judge_with_llm("prose", "71", "q", *correct);
    EXPECT_EQ(v.outcome, Outcome::pass);
    EXPECT_EQ(v.tier, Tier::llm_judge);

    auto wrong = backend::make_scripted_backend({"INCORRECT: wrong sign"});
    v = judge_with_llm("prose", "71", "q", *wrong);
    EXPECT_EQ(v.outcome, Outcome::fail);
    EXPECT_NE(v.feedback.find("wrong sign"), std::string::npos);

    auto garbled = backend::make_scripted_backend({"maybe?"});
    v = judge_with_llm("prose", "71", "q", *garbled);
    EXPECT_EQ(v.outcome, Outcome::error);
    EXPECT_FALSE(v.feedback.empty());
}

TEST(JudgeWithLlm, BackendDownIsErrorVerdict) {
    auto down = backend::make_scripted_backend({});
    auto v = judge_with_llm("prose", "71", "q", *down);
    EXPECT_EQ(v.outcome, Outcome::error);
    EXPECT_EQ(v.tier, Tier::llm_judge);
    EXPECT_FALSE(v.feedback.empty());
}

TEST(JudgeWithLlm, PromptCarriesQuestionGoldAndResponse) {
    auto j = backend::make_scripted_backend({"CORRECT"});
    judge_with_llm("my response", "42", "my question", *j);
    const auto& p = j->requests().at(0).user_prompt;
    EXPECT_NE(p.find("my response"), std::string::npos);
    EXPECT_NE(p.find("42"), std::string::npos);
    EXPECT_NE(p.find("my question"), std::string::npos);
    EXPECT_EQ(j->requests()[0].temperature, 0.0);
}

TEST(Verify, RuleTierNeedsNoBackend) {
    auto j = backend::make_scripted_backend({"CORRECT"});
    auto v = verify("Step one. Therefore, the answer is 71.", "71", "What is the pro forma net income?", {}, j.get());
    EXPECT_EQ(v.outcome, Outcome::pass);
    EXPECT_EQ(v.tier, Tier::rule);
    EXPECT_TRUE(v.feedback.empty());
    EXPECT_EQ(j->call_count(), 0u);
}

TEST(Verify, RuleTierFailureHasFeedback) {
    auto v = verify("Therefore, the answer is 70.", "71", "q", {}, nullptr);
    EXPECT_EQ(v.outcome, Outcome::fail);
    EXPECT_EQ(v.tier, Tier::rule);
    EXPECT_FALSE(v.feedback.empty());
}

TEST(Verify, ProseFallsBackToJudge) {
    auto j = backend::make_scripted_backend({"CORRECT"});
    auto v = verify("Net income stayed flat.", "flat", "q", {}, j.get());
    EXPECT_EQ(v.outcome, Outcome::pass);
    EXPECT_EQ(v.tier, Tier::llm_judge);
    EXPECT_EQ(j->call_count(), 1u);
}

TEST(Verify, ProseWithoutJudgeFails) {
    auto v = verify("Net income stayed flat.", "71", "q", {}, nullptr);
    EXPECT_EQ(v.outcome, Outcome::fail);
    EXPECT_NE(v.feedback.find("unparseable"), std::string::npos);
}

TEST(Verdict, ErrorsAlwaysCarryFeedback) {
    auto down = backend::make_scripted_backend({});
    auto v = verify("no number here", "71", "q", {}, down.get());
    EXPECT_EQ(v.outcome, Outcome::error);
    EXPECT_FALSE(v.feedback.empty());
}
