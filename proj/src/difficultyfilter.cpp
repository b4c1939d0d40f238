#include "forge/difficultyfilter.hpp"

#include "forge/pool.hpp"

namespace forge::filter {

std::string_view to_string(Disposition d) {
    switch (d) {
    case Disposition::kept: return "kept";
    case Disposition::dropped: return "dropped";
    case Disposition::errored: return "errored";
    }
    return "kept";
}

FilterOutcome filter_one(const corpus::QAInstance& instance, backend::ModelBackend& filter_model,
                         const judge::Verifier& verifier, const FilterOptions& options) {
    FilterOutcome out;
    out.instance_id = instance.id;
    backend::GenerationRequest req = options.decode;
    try {
        req.user_prompt = eval::build_prompt(eval::task_spec(options.prompt_task), instance);
        out.answer = backend::complete(filter_model, req).text;
    } catch (const std::exception& e) {
        out.disposition = Disposition::errored;
        out.detail = e.what();
        return out;
    }
    const auto verdict = verifier(out.answer, instance.gold_answer, instance.question);
    switch (verdict.outcome) {
    case judge::Outcome::pass: out.disposition = Disposition::dropped; break;
    case judge::Outcome::fail: out.disposition = Disposition::kept; break;
    case judge::Outcome::error:
        out.disposition = Disposition::errored;
        out.detail = verdict.feedback;
        break;
    }
    return out;
}

FilterReport reduce(std::span<const FilterOutcome> outcomes) {
    FilterReport report;
    for (const auto& o : outcomes) {
        switch (o.disposition) {
        case Disposition::dropped: report.dropped.push_back(o.instance_id); break;
        case Disposition::errored:
            report.errored.push_back(o.instance_id);
            report.kept.push_back(o.instance_id);
            break;
        case Disposition::kept: report.kept.push_back(o.instance_id); break;
        }
        if (o.disposition != Disposition::errored || !o.answer.empty()) report.attempts[o.instance_id] = o.answer;
    }
    return report;
}

FilterReport filter_by_difficulty(std::span<const corpus::QAInstance> instances, backend::ModelBackend& filter_model,
                                  const judge::Verifier& verifier, const FilterOptions& options) {
    std::vector<FilterOutcome> outcomes(instances.size());
    parallel_for(instances.size(), std::max<std::size_t>(1, options.parallelism), [&](std::size_t i) {
        outcomes[i] = filter_one(instances[i], filter_model, verifier, options);
    });
    return reduce(outcomes);
}

nlohmann::ordered_json to_json(const FilterReport& report) {
    nlohmann::ordered_json j;
    j["kept"] = report.kept;
    j["dropped"] = report.dropped;
    j["errored"] = report.errored;
    nlohmann::ordered_json attempts = nlohmann::ordered_json::object();
    for (const auto& [id, answer] : report.attempts) attempts[id] = answer;
    j["attempts"] = std::move(attempts);
    return j;
}

}  // namespace forge::filter
