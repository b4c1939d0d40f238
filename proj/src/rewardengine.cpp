#include "forge/rewardengine.hpp"

#include <cctype>
#include <stdexcept>

#include "forge/prompts.hpp"

namespace forge::reward {

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::size_t find_last_ci(std::string_view text, std::string_view needle) {
    if (needle.size() > text.size()) return std::string_view::npos;
    for (std::size_t pos = text.size() - needle.size() + 1; pos-- > 0;) {
        bool match = true;
        for (std::size_t k = 0; k < needle.size() && match; ++k)
            match = std::tolower(static_cast<unsigned char>(text[pos + k])) ==
                    std::tolower(static_cast<unsigned char>(needle[k]));
        if (match) return pos;
    }
    return std::string_view::npos;
}

}  // namespace

int accuracy_reward(const judge::Verdict& verdict) { return verdict.passed() ? 1 : 0; }

double kl_adjusted_reward(double r, double beta, double kl) {
    if (beta < 0.0) throw std::invalid_argument("beta must be nonnegative");
    if (kl < 0.0) throw std::invalid_argument("kl must be nonnegative");
    return r - beta * kl;
}

LogicResult logic_reward(std::string_view reasoning, std::string_view question, std::string_view gold,
                         backend::ModelBackend& judge, std::string_view prompt_template) {
    backend::GenerationRequest req;
    req.user_prompt = prompts::render(prompt_template.empty() ? prompts::defaults().logic : prompt_template,
                                      {{"question", std::string(question)},
                                       {"gold", std::string(gold)},
                                       {"reasoning", std::string(reasoning)}});
    req.temperature = 0.0;
    req.max_tokens = 256;
    std::string reply;
    try {
        reply = backend::complete(judge, req).text;
    } catch (const std::exception& e) {
        return LogicResult{0, true, std::string("logic judge failed: ") + e.what()};
    }
    auto body = trim(reply);
    while (!body.empty() && (body.front() == '*' || body.front() == '`' || body.front() == '"')) body.remove_prefix(1);
    std::string word;
    for (char c : body) {
        if (!std::isalpha(static_cast<unsigned char>(c))) break;
        word += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    if (word == "VALID") return LogicResult{1, false, ""};
    if (word == "INVALID") return LogicResult{0, false, std::string(trim(body.substr(word.size())))};
    return LogicResult{0, true, "unparseable logic judge output"};
}

double format_reward(std::string_view response) {
    static constexpr std::string_view kMarker = "Therefore, the answer is";
    const auto pos = find_last_ci(response, kMarker);
    if (pos == std::string_view::npos) return 0.0;
    if (trim(response.substr(0, pos)).empty()) return 0.0;
    auto answer = trim(response.substr(pos + kMarker.size()));
    while (!answer.empty() && (answer.back() == '.' || answer.back() == '!')) answer.remove_suffix(1);
    answer = trim(answer);
    // The answer sentence has to close the response.
    if (answer.empty() || answer.find('\n') != std::string_view::npos) return 0.0;
    return kFormatReward;
}

int length_reward(std::uint64_t context_tokens, int r_acc, std::uint64_t threshold) {
    return context_tokens > threshold && r_acc == 1 ? 1 : 0;
}

RewardBreakdown grpo_reward(const judge::Verdict& verdict, int logic, std::string_view response,
                            std::uint64_t context_tokens, const RewardWeights& weights, std::uint64_t threshold) {
    RewardBreakdown b;
    b.r_acc = accuracy_reward(verdict);
    b.r_logic = logic != 0 ? 1 : 0;
    b.r_format = format_reward(response);
    b.r_length = length_reward(context_tokens, b.r_acc, threshold);
    b.gated_length = context_tokens > threshold && b.r_acc == 0;
    b.total = weights.alpha_acc * b.r_acc + weights.alpha_logic * b.r_logic + weights.alpha_format * b.r_format +
              weights.alpha_length * kLengthReward * b.r_length * b.r_acc;
    return b;
}

}  // namespace forge::reward
