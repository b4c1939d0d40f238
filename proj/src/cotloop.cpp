#include "forge/cotloop.hpp"

#include <stdexcept>

namespace forge::cot {

namespace {

std::string guidance_block(const corpus::QAInstance& instance) {
    std::string out;
    const auto& meta = instance.meta;
    if (meta.contains("combined_question") && !meta["combined_question"].contains("original_question"))
        out += "Combined question: " + meta["combined_question"].value("text", std::string{}) + "\n";
    if (instance.guidance.empty()) return out;
    out += "Guidance from an expert annotator:\n";
    for (const auto& step : instance.guidance) {
        out += step.kind == corpus::GuidanceKind::sub_question ? "- Sub-question: " : "- Program step: ";
        out += step.text;
        out += '\n';
    }
    return out;
}

}  // namespace

std::string generation_prompt(const corpus::QAInstance& instance, const prompts::PromptSet& prompts) {
    return prompts::render(prompts.generation, {{"context", instance.context_text},
                                                {"question", instance.question},
                                                {"guidance", guidance_block(instance)}});
}

std::string refinement_prompt(const corpus::QAInstance& instance, std::string_view previous_reasoning,
                              std::string_view feedback, const prompts::PromptSet& prompts) {
    return prompts::render(prompts.refinement, {{"context", instance.context_text},
                                                {"question", instance.question},
                                                {"guidance", guidance_block(instance)},
                                                {"previous", std::string(previous_reasoning)},
                                                {"feedback", std::string(feedback)}});
}

std::string preference_prompt(const corpus::QAInstance& instance, const prompts::PromptSet& prompts) {
    return prompts::render(prompts.generation, {{"context", instance.context_text},
                                                {"question", instance.question},
                                                {"guidance", ""}});
}

CoTRecord run_generation_loop(const corpus::QAInstance& instance, backend::ModelBackend& generator,
                              const judge::Verifier& verifier, const LoopOptions& options) {
    if (options.max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");

    CoTRecord record;
    record.instance_id = instance.id;
    record.max_iters = options.max_iters;
    record.status = Status::exhausted;
    record.meta.generator = generator.id();
    record.meta.judge = verifier.judge ? verifier.judge->id() : "rule";
    record.meta.seed = options.seed;
    record.meta.prompt_version = options.prompts.version;

    // Reserved so `last_scored` stays valid across push_back.
    record.attempts.reserve(static_cast<std::size_t>(options.max_iters));
    // Last failed attempt, which the next prompt refines.
    const ReasoningAttempt* last_scored = nullptr;
    for (int k = 0; k < options.max_iters; ++k) {
        backend::GenerationRequest req = options.decode;
        req.user_prompt = last_scored ? refinement_prompt(instance, last_scored->reasoning, last_scored->feedback,
                                                          options.prompts)
                                      : generation_prompt(instance, options.prompts);
        ReasoningAttempt attempt;
        attempt.index = k;
        try {
            attempt.reasoning = backend::complete(generator, req).text;
        } catch (const std::exception& e) {
            attempt.verdict = judge::Verdict{judge::Outcome::error, judge::Tier::rule,
                                             std::string("generator call failed: ") + e.what()};
            attempt.feedback = attempt.verdict.feedback;
            record.attempts.push_back(std::move(attempt));
            continue;
        }
        attempt.extracted_answer = judge::extract_final_answer(attempt.reasoning);
        attempt.verdict = verifier(attempt.reasoning, instance.gold_answer, instance.question);
        attempt.feedback = attempt.verdict.passed() ? std::string{} : attempt.verdict.feedback;
        attempt.verdict.feedback = attempt.feedback;
        record.attempts.push_back(std::move(attempt));
        const auto& stored = record.attempts.back();
        if (stored.verdict.passed()) {
            record.status = Status::verified;
            break;
        }
        if (stored.verdict.outcome == judge::Outcome::fail) last_scored = &stored;
    }
    return record;
}

std::optional<PreferencePair> extract_preference_pair(const CoTRecord& record, std::string_view prompt) {
    if (record.status != Status::verified || record.attempts.size() < 2) return std::nullopt;
    const auto& chosen = record.attempts.back();
    const auto& rejected = record.attempts[record.attempts.size() - 2];
    if (!chosen.verdict.passed() || rejected.verdict.outcome != judge::Outcome::fail) return std::nullopt;
    if (chosen.reasoning == rejected.reasoning) return std::nullopt;
    return PreferencePair{record.instance_id, std::string(prompt), chosen.reasoning, rejected.reasoning};
}

}  // namespace forge::cot
