#include "forge/evalharness.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <stdexcept>

#include "forge/pool.hpp"
#include "forge/prompts.hpp"

namespace forge::eval {

namespace {

constexpr std::string_view kDocMathPreamble =
    "You are a financial expert, you are supposed to answer the given question based on the provided financial "
    "document context. You need to first think through the problem step by step, documenting each necessary step. "
    "Then you are required to conclude your response with the final answer in your last sentence as 'Therefore, "
    "the answer is {final answer}'. The final answer should be a numeric value.";

std::vector<TaskSpec> make_registry() {
    std::vector<TaskSpec> r;
    r.push_back({Task::finqa,
                 "Please answer the given financial question based on the context.\n"
                 "Context: {context}\n"
                 "Question: {question}\n"
                 "Answer:",
                 1100, 1128});
    r.push_back({Task::dm_simplong,
                 std::string(kDocMathPreamble) +
                     "\n\n###Context\n{context}\n\n### Input\n{question}\n\n"
                     "Let's think step by step to answer the given question.\n\n### Output",
                 100, 4330});
    r.push_back({Task::xbrl_math,
                 "You are a financial expert tasked with carefully reading, analyzing, and answering the following "
                 "eXtensible Business Reporting Language. Please follow the steps below:\n\n"
                 "INPUT: Read the eXtensible Business Reporting Language (XBRL) question: {question}, formula: "
                 "{formula}, and the explanation: {context}. Provide only the final answer which is the numerical "
                 "result of the calculation. For formulas like ROI, provide percentages. Never use the percent "
                 "symbol in percentages.\n\nOUTPUT:",
                 90, 397});
    r.push_back({Task::dm_complong,
                 std::string(kDocMathPreamble) +
                     "\n###Context\n{context}\n\n### Input\n{question}\n\n"
                     "Let's think step by step to answer the given question.\n\n### Output",
                 300, 39983});
    return r;
}

}  // namespace

std::string_view to_string(Task t) {
    switch (t) {
    case Task::finqa: return "finqa";
    case Task::dm_simplong: return "dm_simplong";
    case Task::dm_complong: return "dm_complong";
    case Task::xbrl_math: return "xbrl_math";
    }
    return "finqa";
}

std::optional<Task> parse_task(std::string_view name) {
    for (auto t : {Task::finqa, Task::dm_simplong, Task::dm_complong, Task::xbrl_math})
        if (to_string(t) == name) return t;
    return std::nullopt;
}

std::string_view display_name(Task t) {
    switch (t) {
    case Task::finqa: return "FinQA";
    case Task::dm_simplong: return "DM-Simplong";
    case Task::dm_complong: return "DM-Complong";
    case Task::xbrl_math: return "XBRL-Math";
    }
    return "FinQA";
}

const std::vector<TaskSpec>& registry() {
    static const std::vector<TaskSpec> r = make_registry();
    return r;
}

const TaskSpec& task_spec(Task t) {
    for (const auto& spec : registry())
        if (spec.name == t) return spec;
    throw std::invalid_argument("unregistered task");
}

std::string build_prompt(const TaskSpec& task, const corpus::QAInstance& instance) {
    if (instance.question.empty()) throw std::invalid_argument("instance " + instance.id + " has an empty question");
    std::string formula;
    for (const auto& step : instance.guidance) {
        if (step.kind != corpus::GuidanceKind::program_step) continue;
        if (!formula.empty()) formula += "; ";
        formula += step.text;
    }
    return prompts::render(task.prompt_template, {{"context", instance.context_text},
                                                  {"question", instance.question},
                                                  {"formula", formula}});
}

std::string build_prompt(std::string_view task_name, const corpus::QAInstance& instance) {
    auto t = parse_task(task_name);
    if (!t) throw std::invalid_argument("unknown task '" + std::string(task_name) + "'");
    return build_prompt(task_spec(*t), instance);
}

backend::GenerationRequest default_decode() {
    backend::GenerationRequest req;
    req.temperature = 0.0;
    req.max_tokens = 1024;
    return req;
}

nlohmann::ordered_json to_json(const InstanceVerdict& v) {
    nlohmann::ordered_json j;
    j["task"] = to_string(v.task);
    j["instance_id"] = v.instance_id;
    j["response"] = v.response;
    j["verdict"] = judge::to_string(v.verdict.outcome);
    j["tier"] = judge::to_string(v.verdict.tier);
    if (!v.verdict.feedback.empty()) j["feedback"] = v.verdict.feedback;
    return j;
}

InstanceVerdict instance_verdict_from_json(const nlohmann::ordered_json& j) {
    InstanceVerdict v;
    auto task = parse_task(j.at("task").get<std::string>());
    auto outcome = judge::parse_outcome(j.at("verdict").get<std::string>());
    auto tier = judge::parse_tier(j.at("tier").get<std::string>());
    if (!task || !outcome || !tier) throw std::invalid_argument("malformed verdict log entry");
    v.task = *task;
    v.instance_id = j.at("instance_id").get<std::string>();
    v.response = j.at("response").get<std::string>();
    v.verdict = judge::Verdict{*outcome, *tier, j.value("feedback", std::string{})};
    return v;
}

InstanceVerdict evaluate_instance(const TaskSpec& task, const corpus::QAInstance& instance,
                                  backend::ModelBackend& model, const judge::Verifier& verifier,
                                  const backend::GenerationRequest& decode) {
    InstanceVerdict out;
    out.task = task.name;
    out.instance_id = instance.id;
    backend::GenerationRequest req = decode;
    req.user_prompt = build_prompt(task, instance);
    try {
        out.response = backend::complete(model, req).text;
    } catch (const std::exception& e) {
        out.verdict = judge::Verdict{judge::Outcome::error, judge::Tier::rule, std::string("model call failed: ") + e.what()};
        return out;
    }
    out.verdict = verifier(out.response, instance.gold_answer, instance.question);
    return out;
}

EvalResult summarize(Task task, std::span<const InstanceVerdict> verdicts) {
    EvalResult r;
    r.task = task;
    r.total = verdicts.size();
    for (const auto& v : verdicts) {
        if (v.verdict.passed()) ++r.correct;
        else if (v.errored()) ++r.errored;
    }
    r.accuracy = r.total == 0 ? 0.0 : 100.0 * static_cast<double>(r.correct) / static_cast<double>(r.total);
    return r;
}

EvalRun run_benchmark(const TaskSpec& task, std::span<const corpus::QAInstance> instances,
                      backend::ModelBackend& model, const judge::Verifier& verifier, std::size_t parallelism,
                      const backend::GenerationRequest& decode) {
    if (instances.empty()) throw std::invalid_argument("run_benchmark needs at least one instance");
    EvalRun run;
    run.verdicts.resize(instances.size());
    parallel_for(instances.size(), parallelism, [&](std::size_t i) {
        run.verdicts[i] = evaluate_instance(task, instances[i], model, verifier, decode);
    });
    run.result = summarize(task.name, run.verdicts);
    return run;
}

ReportRow aggregate_report(std::string model_id, std::span<const EvalResult> results) {
    ReportRow row;
    row.model_id = std::move(model_id);
    for (const auto& r : results) {
        if (!row.per_task.emplace(r.task, r.accuracy).second)
            throw std::invalid_argument("duplicate result for task " + std::string(to_string(r.task)));
    }
    if (!row.per_task.empty()) {
        double sum = 0.0;
        for (const auto& [task, acc] : row.per_task) sum += acc;
        row.average = sum / static_cast<double>(row.per_task.size());
    }
    return row;
}

double round_half_up(double value, int decimals) {
    const double scale = std::pow(10.0, decimals);
    const double scaled = std::fabs(value) * scale;
    // Absorb binary representation error so 52.2775 rounds to 52.28.
    const double rounded = std::floor(scaled + 0.5 + 1e-9 * std::max(1.0, scaled)) / scale;
    return value < 0 ? -rounded : rounded;
}

namespace {

std::string fixed2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", round_half_up(v, 2));
    return buf;
}

std::string csv_cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + '"';
}

}  // namespace

std::string render_report(std::span<const ReportRow> rows, ReportFormat format) {
    std::vector<std::string> header{"Model"};
    for (const auto& spec : registry()) header.emplace_back(display_name(spec.name));
    header.emplace_back("Average");

    auto cells = [](const ReportRow& row) {
        std::vector<std::string> c{row.model_id};
        for (const auto& spec : registry()) {
            auto it = row.per_task.find(spec.name);
            c.push_back(it == row.per_task.end() ? "-" : fixed2(it->second));
        }
        c.push_back(fixed2(row.average));
        return c;
    };

    std::string out;
    if (format == ReportFormat::csv) {
        auto line = [&](const std::vector<std::string>& c) {
            for (std::size_t i = 0; i < c.size(); ++i) {
                if (i) out += ',';
                out += csv_cell(c[i]);
            }
            out += '\n';
        };
        line(header);
        for (const auto& row : rows) line(cells(row));
        return out;
    }
    auto line = [&](const std::vector<std::string>& c) {
        out += '|';
        for (const auto& s : c) out += ' ' + s + " |";
        out += '\n';
    };
    line(header);
    out += "|---|";
    for (std::size_t i = 1; i < header.size(); ++i) out += "---:|";
    out += '\n';
    for (const auto& row : rows) line(cells(row));
    return out;
}

}  // namespace forge::eval
