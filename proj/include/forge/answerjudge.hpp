#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "forge/backend.hpp"

namespace forge::judge {

enum class Scale { unit, thousand, million, billion };

std::string_view to_string(Scale s);
std::optional<Scale> parse_scale(std::string_view name);
double multiplier(Scale s);

struct ExtractedAnswer {
    double value = 0.0;
    bool is_percent = false;
    Scale scale = Scale::unit;
    std::string raw_span;

    bool operator==(const ExtractedAnswer&) const = default;
};

enum class Outcome { pass, fail, error };
enum class Tier { rule, llm_judge };

std::string_view to_string(Outcome o);
std::string_view to_string(Tier t);
std::optional<Outcome> parse_outcome(std::string_view name);
std::optional<Tier> parse_tier(std::string_view name);

struct Verdict {
    Outcome outcome = Outcome::fail;
    Tier tier = Tier::rule;
    std::string feedback;

    bool passed() const { return outcome == Outcome::pass; }
    bool operator==(const Verdict&) const = default;
};

struct TolerancePolicy {
    double rel_tol = 0.005;
    double abs_tol = 1e-4;
    bool allow_percent_decimal = true;
    bool allow_scale_units = true;

    bool operator==(const TolerancePolicy&) const = default;
};

/// The sentence every answer prompt asks the model to end with.
inline constexpr std::string_view kAnswerMarker = "the answer is";

/// Looks for "the answer is ..." first, otherwise takes the last number of the
/// final sentence. Handles signs, thousands separators, currency symbols,
/// accounting parentheses, percent marks and thousand/million/billion.
std::optional<ExtractedAnswer> extract_final_answer(std::string_view text);

/// Renders a form that extract_final_answer reads back to the same value and flags.
std::string canonical_text(const ExtractedAnswer& answer);

/// Equal within max(abs_tol, rel_tol * max(|a|, |b|)) after an admissible
/// percent or scale transform. Percent and scale transforms apply only when a
/// marker is present on one side.
bool numeric_equivalent(const ExtractedAnswer& candidate, const ExtractedAnswer& gold,
                        const TolerancePolicy& policy = {});

/// Asks the judge for CORRECT / INCORRECT: <reason>. An empty template uses
/// the built-in judging prompt.
Verdict judge_with_llm(std::string_view response, std::string_view gold, std::string_view question,
                       backend::ModelBackend& judge, std::string_view prompt_template = {});

/// Rule tier first; the judge is only consulted when either side has no number.
Verdict verify(std::string_view response, std::string_view gold, std::string_view question,
               const TolerancePolicy& policy, backend::ModelBackend* judge,
               std::string_view judge_template = {});

/// What the pipeline stages hold on to: a policy plus an optional judge.
struct Verifier {
    TolerancePolicy policy;
    backend::ModelBackend* judge = nullptr;
    std::string judge_template;

    Verdict operator()(std::string_view response, std::string_view gold,
                       std::string_view question) const {
        return verify(response, gold, question, policy, judge, judge_template);
    }
};

}  // namespace forge::judge
