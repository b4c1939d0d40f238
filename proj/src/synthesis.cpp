#include "forge/synthesis.hpp"

#include <stdexcept>

#include "forge/prompts.hpp"

namespace forge::synthesis {

CombinedQuestion synthesize_combined_question(const corpus::QAInstance& instance, backend::ModelBackend& generator,
                                              std::string_view prompt_template) {
    CombinedQuestion out;
    out.generator_id = generator.id();
    std::string listed;
    for (std::size_t i = 0; i < instance.guidance.size(); ++i) {
        const auto& step = instance.guidance[i];
        if (step.kind != corpus::GuidanceKind::sub_question) continue;
        out.component_ids.push_back(i);
        listed += std::to_string(out.component_ids.size()) + ". " + step.text + "\n";
    }
    if (out.component_ids.empty())
        throw std::invalid_argument("instance " + instance.id + " has no sub-questions to combine");

    if (out.component_ids.size() == 1) {
        out.text = instance.guidance[out.component_ids.front()].text;
        out.generator_id.clear();
        return out;
    }

    backend::GenerationRequest req;
    req.user_prompt = prompts::render(prompt_template.empty() ? prompts::defaults().synthesis : prompt_template,
                                      {{"context", instance.context_text},
                                       {"question", instance.question},
                                       {"sub_questions", listed}});
    req.temperature = 0.0;
    req.max_tokens = 512;
    auto resp = backend::complete(generator, req);

    std::string_view text = resp.text;
    const auto b = text.find_first_not_of(" \t\r\n");
    const auto e = text.find_last_not_of(" \t\r\n");
    if (b == std::string_view::npos)
        throw backend::BackendError(backend::ErrorKind::transport, "generator returned an empty combined question");
    out.text = std::string(text.substr(b, e - b + 1));
    return out;
}

corpus::QAInstance attach_guidance(const corpus::QAInstance& instance, std::vector<corpus::GuidanceStep> steps) {
    corpus::QAInstance copy = instance;
    copy.guidance = std::move(steps);
    return copy;
}

corpus::QAInstance apply_combined_question(const corpus::QAInstance& instance, const CombinedQuestion& combined,
                                           bool replace_question) {
    corpus::QAInstance copy = instance;
    auto& meta = copy.meta["combined_question"];
    meta["text"] = combined.text;
    meta["component_ids"] = combined.component_ids;
    meta["generator"] = combined.generator_id;
    if (replace_question) {
        meta["original_question"] = instance.question;
        copy.question = combined.text;
    }
    return copy;
}

}  // namespace forge::synthesis
