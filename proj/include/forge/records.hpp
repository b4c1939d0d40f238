#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "forge/answerjudge.hpp"

namespace forge::cot {

struct ReasoningAttempt {
    int index = 0;
    std::string reasoning;
    std::optional<judge::ExtractedAnswer> extracted_answer;
    judge::Verdict verdict;
    std::string feedback;

    bool operator==(const ReasoningAttempt&) const = default;
};

enum class Status { verified, exhausted };

std::string_view to_string(Status s);

struct RecordMeta {
    std::string generator;
    std::string judge;
    std::uint64_t seed = 0;
    std::string prompt_version;

    bool operator==(const RecordMeta&) const = default;
};

struct CoTRecord {
    std::string instance_id;
    std::vector<ReasoningAttempt> attempts;
    Status status = Status::exhausted;
    int max_iters = 3;
    RecordMeta meta;

    bool operator==(const CoTRecord&) const = default;
};

struct PreferencePair {
    std::string instance_id;
    std::string prompt;
    std::string chosen;
    std::string rejected;

    bool operator==(const PreferencePair&) const = default;
};

nlohmann::ordered_json to_json(const CoTRecord& record);
CoTRecord record_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json to_json(const PreferencePair& pair);
PreferencePair pair_from_json(const nlohmann::ordered_json& j);

}  // namespace forge::cot

namespace forge::corpus {

/// One JSON object per line. On failure the target does not exist afterwards.
void save_records(std::span<const cot::CoTRecord> records, const std::filesystem::path& path);
std::vector<cot::CoTRecord> load_records(const std::filesystem::path& path);

}  // namespace forge::corpus
