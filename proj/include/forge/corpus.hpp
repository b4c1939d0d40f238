#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace forge::corpus {

enum class Source { finqa, convfinqa, docfinqa, tatqa, econ_logic, docmath, bizbench, synthetic };

std::string_view to_string(Source s);
std::optional<Source> parse_source(std::string_view name);

enum class GuidanceKind { sub_question, program_step };

std::string_view to_string(GuidanceKind k);
std::optional<GuidanceKind> parse_guidance_kind(std::string_view name);

struct GuidanceStep {
    GuidanceKind kind = GuidanceKind::sub_question;
    std::string text;

    bool operator==(const GuidanceStep&) const = default;
};

struct QAInstance {
    std::string id;
    Source source = Source::synthetic;
    std::string context_text;
    std::string question;
    std::string gold_answer;
    std::vector<GuidanceStep> guidance;
    std::uint64_t context_token_count = 0;
    // Free-form annotations carried through the pipeline (e.g. a synthesized
    // combined question). Serialized under "meta" only when non-empty.
    nlohmann::ordered_json meta = nlohmann::ordered_json::object();

    bool operator==(const QAInstance&) const = default;
};

/// Thrown for a malformed input line; `line()` is 1-based.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what);
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class WriteError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SkippedRecord {
    std::size_t line = 0;
    std::string reason;
};

struct LoadReport {
    std::size_t loaded_count = 0;
    std::size_t skipped_count = 0;
    std::vector<SkippedRecord> skipped;
};

struct LoadResult {
    std::vector<QAInstance> instances;
    LoadReport report;
};

using TokenCounter = std::function<std::uint64_t(std::string_view)>;

/// ceil(bytes / 4).
std::uint64_t estimate_tokens(std::string_view text);

/// Reads one record per line in the native layout of `format`. Records
/// without a gold answer are skipped and listed in the report; anything
/// else that cannot be read throws ParseError with the line number.
/// Token counts supplied by the record win over `counter`.
LoadResult load_instances(const std::filesystem::path& path, Source format,
                          const TokenCounter& counter = estimate_tokens);

/// Same as above over an in-memory stream of lines.
LoadResult parse_instances(std::istream& in, Source format,
                           const TokenCounter& counter = estimate_tokens);

nlohmann::ordered_json to_json(const QAInstance& inst);
QAInstance instance_from_json(const nlohmann::ordered_json& j);

void save_instances(std::span<const QAInstance> instances, const std::filesystem::path& path);

/// Writes `lines` as a JSONL file through a temporary sibling that is renamed
/// into place; nothing is left behind on failure.
void write_jsonl_atomic(const std::filesystem::path& path,
                        std::span<const nlohmann::ordered_json> lines);
void write_text_atomic(const std::filesystem::path& path, std::string_view text);

std::vector<nlohmann::ordered_json> read_jsonl(const std::filesystem::path& path);

struct CorpusSplit {
    std::vector<std::string> sft;
    std::vector<std::string> rl;
    std::uint64_t seed = 0;

    bool operator==(const CorpusSplit&) const = default;
};

/// Seeded split that keeps each source's share in both partitions
/// (largest-remainder allocation, so per-source counts are within one of
/// proportional). Output ids keep input order.
CorpusSplit split_corpus(std::span<const QAInstance> records, std::size_t sft_count,
                         std::uint64_t seed);

nlohmann::ordered_json to_json(const CorpusSplit& split);

}  // namespace forge::corpus
