#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "forge/answerjudge.hpp"
#include "forge/backend.hpp"
#include "forge/corpus.hpp"

namespace forge::eval {

enum class Task { finqa, dm_simplong, dm_complong, xbrl_math };

std::string_view to_string(Task t);
std::optional<Task> parse_task(std::string_view name);
/// Column heading used in reports ("DM-Simplong", ...).
std::string_view display_name(Task t);

struct TaskSpec {
    Task name = Task::finqa;
    std::string prompt_template;
    std::optional<std::size_t> expected_size;
    std::optional<std::uint64_t> avg_tokens;
};

/// The four registered benchmark tasks, in report column order.
const std::vector<TaskSpec>& registry();
const TaskSpec& task_spec(Task t);

/// Instantiates the task's zero-shot template. XBRL-Math takes its formula
/// slot from the instance's program steps and its explanation from the context.
std::string build_prompt(const TaskSpec& task, const corpus::QAInstance& instance);
/// Same, looking the task up by name; unknown names throw std::invalid_argument.
std::string build_prompt(std::string_view task_name, const corpus::QAInstance& instance);

/// Decoding used for benchmark inference.
backend::GenerationRequest default_decode();

struct InstanceVerdict {
    Task task = Task::finqa;
    std::string instance_id;
    std::string response;
    judge::Verdict verdict;

    bool errored() const { return verdict.outcome == judge::Outcome::error; }
};

nlohmann::ordered_json to_json(const InstanceVerdict& v);
InstanceVerdict instance_verdict_from_json(const nlohmann::ordered_json& j);

struct EvalResult {
    Task task = Task::finqa;
    std::size_t total = 0;
    std::size_t correct = 0;
    std::size_t errored = 0;
    double accuracy = 0.0;

    bool operator==(const EvalResult&) const = default;
};

struct EvalRun {
    EvalResult result;
    std::vector<InstanceVerdict> verdicts;  // instance order
};

/// One model call plus verification. Model failures become error verdicts.
InstanceVerdict evaluate_instance(const TaskSpec& task, const corpus::QAInstance& instance,
                                  backend::ModelBackend& model, const judge::Verifier& verifier,
                                  const backend::GenerationRequest& decode = default_decode());

EvalResult summarize(Task task, std::span<const InstanceVerdict> verdicts);

/// Throws std::invalid_argument on an empty instance list.
EvalRun run_benchmark(const TaskSpec& task, std::span<const corpus::QAInstance> instances,
                      backend::ModelBackend& model, const judge::Verifier& verifier, std::size_t parallelism,
                      const backend::GenerationRequest& decode = default_decode());

struct ReportRow {
    std::string model_id;
    std::map<Task, double> per_task;
    double average = 0.0;  // unrounded macro mean
};

/// Macro average over the given results. Duplicate tasks throw.
ReportRow aggregate_report(std::string model_id, std::span<const EvalResult> results);

double round_half_up(double value, int decimals = 2);

enum class ReportFormat { markdown, csv };

std::string render_report(std::span<const ReportRow> rows, ReportFormat format);

}  // namespace forge::eval
