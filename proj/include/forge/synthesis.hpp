#pragma once

#include <span>
#include <string>
#include <vector>

#include "forge/backend.hpp"
#include "forge/corpus.hpp"

namespace forge::synthesis {

struct CombinedQuestion {
    std::string text;
    // Positions of the merged sub-questions within the instance's guidance.
    std::vector<std::size_t> component_ids;
    std::string generator_id;

    bool operator==(const CombinedQuestion&) const = default;
};

/// Merges the instance's expert sub-questions into one question. A single
/// sub-question is returned unchanged without calling the generator.
/// Throws std::invalid_argument when the instance has no sub-questions.
CombinedQuestion synthesize_combined_question(const corpus::QAInstance& instance,
                                              backend::ModelBackend& generator,
                                              std::string_view prompt_template = {});

corpus::QAInstance attach_guidance(const corpus::QAInstance& instance, std::vector<corpus::GuidanceStep> steps);

/// Returns a copy carrying the combined question. With `replace_question`
/// the instance question is overwritten; otherwise the combined text goes
/// to meta and the original question stays.
corpus::QAInstance apply_combined_question(const corpus::QAInstance& instance, const CombinedQuestion& combined,
                                           bool replace_question);

}  // namespace forge::synthesis
