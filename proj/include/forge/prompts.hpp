#pragma once

#include <map>
#include <string>
#include <string_view>

namespace forge::prompts {

inline constexpr std::string_view kVersion = "v1";

/// Replaces every `{name}` slot with vars[name]. Unknown slots are left as is,
/// so literal braces such as "{final answer}" survive rendering.
std::string render(std::string_view tmpl, const std::map<std::string, std::string>& vars);

/// Pipeline prompt set. Every field can be overridden from the config file.
struct PromptSet {
    std::string synthesis;
    std::string generation;
    std::string refinement;
    std::string judge;
    std::string logic;
    std::string version{kVersion};

    bool operator==(const PromptSet&) const = default;
};

const PromptSet& defaults();

}  // namespace forge::prompts
