#include "forge/prompts.hpp"

namespace forge::prompts {

std::string render(std::string_view tmpl, const std::map<std::string, std::string>& vars) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{') {
            auto close = tmpl.find('}', i + 1);
            if (close != std::string_view::npos) {
                auto it = vars.find(std::string(tmpl.substr(i + 1, close - i - 1)));
                if (it != vars.end()) {
                    out += it->second;
                    i = close + 1;
                    continue;
                }
            }
        }
        out += tmpl[i++];
    }
    return out;
}

namespace {

PromptSet make_defaults() {
    PromptSet p;
    p.synthesis =
        "You are a financial analyst. The following sub-questions were written by an expert "
        "to break one financial problem into steps.\n"
        "Context:\n{context}\n\n"
        "Sub-questions:\n{sub_questions}\n"
        "Merge these sub-questions into a single combined question that a reader can answer in "
        "one pass. Keep every quantity and computation the sub-questions require, in the same "
        "order. Reply with the combined question only.";
    p.generation =
        "You are a financial expert. Answer the question based on the context. Think through "
        "the problem step by step, documenting each necessary step, then conclude your response "
        "with the final answer in your last sentence as 'Therefore, the answer is {final answer}'.\n"
        "Context:\n{context}\n\n"
        "Question: {question}\n"
        "{guidance}";
    p.refinement =
        "You are a financial expert. Your previous reasoning for the question below was checked "
        "by a verifier and found to be wrong. Revisit the earlier steps, refine your assumptions, "
        "and adjust the reasoning flow based on the feedback. Then conclude with the final answer "
        "in your last sentence as 'Therefore, the answer is {final answer}'.\n"
        "Context:\n{context}\n\n"
        "Question: {question}\n"
        "{guidance}"
        "Previous reasoning:\n{previous}\n\n"
        "Verifier feedback:\n{feedback}\n";
    p.judge =
        "You are grading an answer to a financial question. Decide whether the response's final "
        "answer agrees with the reference answer. Ignore differences in percentage notation, "
        "rounding, units written out, or number formatting.\n"
        "Question: {question}\n"
        "Reference answer: {gold}\n"
        "Response:\n{response}\n\n"
        "Reply with CORRECT, or with INCORRECT: followed by a one-sentence reason.";
    p.logic =
        "You are reviewing the reasoning in a solution to a financial question. Judge whether "
        "every step is logically sound: the right figures are used, formulas are applied "
        "correctly, and each step follows from the previous ones. Judge the reasoning itself, "
        "not only the final number.\n"
        "Question: {question}\n"
        "Reference answer: {gold}\n"
        "Reasoning:\n{reasoning}\n\n"
        "Reply with VALID, or with INVALID: followed by the first faulty step.";
    return p;
}

}  // namespace

const PromptSet& defaults() {
    static const PromptSet set = make_defaults();
    return set;
}

}  // namespace forge::prompts
