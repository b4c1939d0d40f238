#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "forge/answerjudge.hpp"
#include "forge/backend.hpp"
#include "forge/prompts.hpp"
#include "forge/rewardengine.hpp"

namespace forge::cli {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A canned-reply rule for mock backends: fires when every `match` substring
/// occurs in the prompt.
struct MockRule {
    std::vector<std::string> match;
    std::string reply;
    bool fail = false;

    bool operator==(const MockRule&) const = default;
};

struct BackendConfig {
    std::string type = "openai";  // openai | mock
    std::string base_url;
    std::string model;
    std::optional<double> temperature;
    std::optional<int> max_tokens;
    int max_attempts = 3;
    long long base_backoff_ms = 1000;
    double backoff_factor = 2.0;
    int concurrency = 8;
    long long timeout_ms = 120000;
    // mock only
    std::vector<std::string> script;
    std::vector<MockRule> rules;
    std::optional<std::string> default_reply;

    bool operator==(const BackendConfig&) const = default;
};

struct PipelineConfig {
    std::string synthesizer;
    std::string generator;
    std::string judge;  // empty: rule tier only
    std::string filter_model;
    std::string eval_model;
    int max_iters = 3;
    std::uint64_t seed = 0;
    std::optional<std::size_t> sft_count;
    judge::TolerancePolicy tolerance;
    reward::RewardWeights reward_weights;
    std::uint64_t length_threshold = reward::kDefaultLengthThreshold;
    double kl_beta = 0.0;
    bool replace_question = false;
    std::string filter_task = "finqa";
    int parallelism = 8;
    prompts::PromptSet prompts = prompts::defaults();

    bool operator==(const PipelineConfig&) const = default;
};

struct PathsConfig {
    std::string input;
    std::string output;
    std::string checkpoint_dir;

    bool operator==(const PathsConfig&) const = default;
};

struct Config {
    std::map<std::string, BackendConfig> backends;
    PipelineConfig pipeline;
    PathsConfig paths;

    bool operator==(const Config&) const = default;
};

/// Strict parse: unknown keys and dangling backend references throw ConfigError.
Config parse_config(const std::filesystem::path& path);
Config parse_config_json(const nlohmann::json& j);

/// Full serialization (every default spelled out); parse(to_json(c)) == c.
nlohmann::ordered_json to_json(const Config& config);

/// Hex SHA-256 of the serialized config.
std::string config_digest(const Config& config);
std::string sha256_hex(std::string_view data);

/// Builds the backend named `name`. FORGE_BASE_URL overrides the configured
/// endpoint; the credential always comes from FORGE_API_KEY.
std::unique_ptr<backend::ModelBackend> make_backend(const Config& config, const std::string& name);

}  // namespace forge::cli
