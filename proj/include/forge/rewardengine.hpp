#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "forge/answerjudge.hpp"
#include "forge/backend.hpp"

namespace forge::reward {

inline constexpr double kFormatReward = 0.1;
inline constexpr double kLengthReward = 1.0;
inline constexpr std::uint64_t kDefaultLengthThreshold = 8192;

struct RewardWeights {
    double alpha_acc = 1.0;
    double alpha_logic = 1.0;
    double alpha_format = 1.0;
    double alpha_length = 1.0;

    bool operator==(const RewardWeights&) const = default;
};

struct RewardBreakdown {
    int r_acc = 0;
    int r_logic = 0;
    double r_format = 0.0;
    // Effective length reward, already multiplied by r_acc.
    int r_length = 0;
    // Context was long enough for the length reward but r_acc was 0.
    bool gated_length = false;
    // The logic judge failed; r_logic was forced to 0.
    bool logic_flagged = false;
    double total = 0.0;
};

/// Verifier outcome to {0, 1}; errors score 0.
int accuracy_reward(const judge::Verdict& verdict);

/// r - beta * kl. Throws std::invalid_argument for negative beta or kl.
double kl_adjusted_reward(double r, double beta, double kl);

struct LogicResult {
    int reward = 0;
    bool flagged = false;
    std::string feedback;
};

/// Asks the judge whether the reasoning path itself is sound (VALID / INVALID).
/// Judge failures give 0 with `flagged` set.
LogicResult logic_reward(std::string_view reasoning, std::string_view question, std::string_view gold,
                         backend::ModelBackend& judge, std::string_view prompt_template = {});

/// 0.1 when nonempty reasoning is followed by a closing
/// "Therefore, the answer is ..." sentence.
double format_reward(std::string_view response);

/// 1 iff context_tokens exceeds the threshold and the answer was correct.
int length_reward(std::uint64_t context_tokens, int r_acc, std::uint64_t threshold = kDefaultLengthThreshold);

RewardBreakdown grpo_reward(const judge::Verdict& verdict, int logic, std::string_view response,
                            std::uint64_t context_tokens, const RewardWeights& weights = {},
                            std::uint64_t threshold = kDefaultLengthThreshold);

}  // namespace forge::reward
