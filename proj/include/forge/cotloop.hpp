#pragma once

#include <optional>
#include <span>
#include <string>

#include "forge/answerjudge.hpp"
#include "forge/backend.hpp"
#include "forge/corpus.hpp"
#include "forge/prompts.hpp"
#include "forge/records.hpp"

namespace forge::cot {

struct LoopOptions {
    int max_iters = 3;
    // Decode defaults for every generation call; user_prompt is filled per attempt.
    backend::GenerationRequest decode{std::nullopt, "", 0.7, 2048, {}};
    std::uint64_t seed = 0;
    prompts::PromptSet prompts = prompts::defaults();
};

/// First-attempt prompt: context, question and any guidance.
std::string generation_prompt(const corpus::QAInstance& instance, const prompts::PromptSet& prompts);

/// Follow-up prompt embedding the previous reasoning and the verifier's feedback.
std::string refinement_prompt(const corpus::QAInstance& instance, std::string_view previous_reasoning,
                              std::string_view feedback, const prompts::PromptSet& prompts);

/// Generate, verify, refine until the verifier passes or max_iters attempts
/// have been made. Generator failures are recorded as error attempts and
/// consume an iteration.
CoTRecord run_generation_loop(const corpus::QAInstance& instance, backend::ModelBackend& generator,
                              const judge::Verifier& verifier, const LoopOptions& options = {});

/// Chosen is the final verified path, rejected the failed attempt right before
/// it. Nothing for single-attempt or exhausted records, or when the preceding
/// attempt is not a plain failure.
std::optional<PreferencePair> extract_preference_pair(const CoTRecord& record, std::string_view prompt = {});

/// The prompt stored with a preference pair: generation prompt without guidance.
std::string preference_prompt(const corpus::QAInstance& instance, const prompts::PromptSet& prompts);

}  // namespace forge::cot
