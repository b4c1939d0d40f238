#include "forge/answerjudge.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <vector>

#include "forge/prompts.hpp"

namespace forge::judge {

std::string_view to_string(Scale s) {
    switch (s) {
    case Scale::unit: return "unit";
    case Scale::thousand: return "thousand";
    case Scale::million: return "million";
    case Scale::billion: return "billion";
    }
    return "unit";
}

std::optional<Scale> parse_scale(std::string_view name) {
    for (auto s : {Scale::unit, Scale::thousand, Scale::million, Scale::billion})
        if (to_string(s) == name) return s;
    return std::nullopt;
}

double multiplier(Scale s) {
    switch (s) {
    case Scale::unit: return 1.0;
    case Scale::thousand: return 1e3;
    case Scale::million: return 1e6;
    case Scale::billion: return 1e9;
    }
    return 1.0;
}

std::string_view to_string(Outcome o) {
    switch (o) {
    case Outcome::pass: return "pass";
    case Outcome::fail: return "fail";
    case Outcome::error: return "error";
    }
    return "error";
}

std::string_view to_string(Tier t) { return t == Tier::rule ? "rule" : "llm_judge"; }

std::optional<Outcome> parse_outcome(std::string_view name) {
    for (auto o : {Outcome::pass, Outcome::fail, Outcome::error})
        if (to_string(o) == name) return o;
    return std::nullopt;
}

std::optional<Tier> parse_tier(std::string_view name) {
    if (name == "rule") return Tier::rule;
    if (name == "llm_judge") return Tier::llm_judge;
    return std::nullopt;
}

namespace {

struct Located {
    ExtractedAnswer answer;
    std::size_t begin = 0;
    std::size_t end = 0;
};

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

bool ends_with_at(std::string_view text, std::size_t end, std::string_view token) {
    return end >= token.size() && text.substr(end - token.size(), token.size()) == token;
}

// Currency markers that may sit directly before the digits (or the sign).
std::size_t currency_before(std::string_view text, std::size_t pos) {
    static constexpr std::array<std::string_view, 6> kMarks{"US$", "$", "\xE2\x82\xAC", "\xC2\xA3", "\xC2\xA5", "USD "};
    for (auto m : kMarks)
        if (ends_with_at(text, pos, m)) return m.size();
    return 0;
}

// A hyphen between two words or numbers ("2014-2015") is not a sign.
std::size_t sign_before(std::string_view text, std::size_t pos, bool& negative) {
    auto operand_before = [&](std::size_t at) {
        return at >= 1 && (is_alpha(text[at - 1]) || is_digit(text[at - 1]));
    };
    if (pos >= 1 && (text[pos - 1] == '-' || text[pos - 1] == '+') && !operand_before(pos - 1)) {
        negative = text[pos - 1] == '-';
        return 1;
    }
    if (ends_with_at(text, pos, "\xE2\x88\x92")) {  // U+2212 minus sign
        negative = true;
        return 3;
    }
    return 0;
}

bool word_at(std::string_view text, std::size_t pos, std::string_view word) {
    if (pos + word.size() > text.size()) return false;
    for (std::size_t k = 0; k < word.size(); ++k)
        if (std::tolower(static_cast<unsigned char>(text[pos + k])) != word[k]) return false;
    const std::size_t after = pos + word.size();
    return after == text.size() || !is_alpha(text[after]);
}

std::size_t skip_spaces(std::string_view text, std::size_t pos) {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
    return pos;
}

// Parses the number whose first digit (or leading '.') is at `start`.
std::optional<Located> parse_at(std::string_view text, std::size_t start) {
    std::string digits;
    std::size_t i = start;
    while (i < text.size()) {
        if (is_digit(text[i])) {
            digits += text[i++];
        } else if (text[i] == ',' && !digits.empty() && i + 3 < text.size() && is_digit(text[i + 1]) &&
                   is_digit(text[i + 2]) && is_digit(text[i + 3]) &&
                   (i + 4 == text.size() || !is_digit(text[i + 4]))) {
            ++i;  // thousands separator
        } else {
            break;
        }
    }
    if (i < text.size() && text[i] == '.' && i + 1 < text.size() && is_digit(text[i + 1])) {
        digits += text[i++];
        while (i < text.size() && is_digit(text[i])) digits += text[i++];
    }
    if (digits.empty() || digits == ".") return std::nullopt;

    double value = 0.0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (ec != std::errc{} || !std::isfinite(value)) return std::nullopt;

    // Prefix: [ '(' ] [currency] [sign] [currency]
    std::size_t begin = start;
    bool negative = false;
    bool has_currency = false;
    if (auto n = currency_before(text, begin)) {
        begin -= n;
        has_currency = true;
    }
    begin -= sign_before(text, begin, negative);
    if (!has_currency) {
        if (auto n = currency_before(text, begin)) begin -= n;
    }
    const bool open_paren = begin >= 1 && text[begin - 1] == '(';

    Located loc;
    std::size_t end = i;
    std::size_t j = skip_spaces(text, end);
    if (j < text.size() && text[j] == '%') {
        loc.answer.is_percent = true;
        end = j + 1;
    } else if (word_at(text, j, "percent")) {
        loc.answer.is_percent = true;
        end = j + 7;
    }
    if (open_paren) {
        std::size_t k = skip_spaces(text, end);
        if (k < text.size() && text[k] == ')') {
            negative = true;
            --begin;
            end = k + 1;
            std::size_t p = skip_spaces(text, end);
            if (!loc.answer.is_percent && p < text.size() && text[p] == '%') {
                loc.answer.is_percent = true;
                end = p + 1;
            }
        }
    }
    if (!loc.answer.is_percent) {
        std::size_t k = skip_spaces(text, end);
        static constexpr std::array<std::pair<std::string_view, Scale>, 6> kWords{{
            {"thousands", Scale::thousand}, {"thousand", Scale::thousand},
            {"millions", Scale::million},   {"million", Scale::million},
            {"billions", Scale::billion},   {"billion", Scale::billion},
        }};
        for (const auto& [w, s] : kWords) {
            if (word_at(text, k, w)) {
                loc.answer.scale = s;
                end = k + w.size();
                break;
            }
        }
    }
    loc.answer.value = negative ? -value : value;
    loc.answer.raw_span = std::string(text.substr(begin, end - begin));
    loc.begin = begin;
    loc.end = end;
    return loc;
}

std::vector<Located> scan_numbers(std::string_view text) {
    std::vector<Located> out;
    std::size_t i = 0;
    while (i < text.size()) {
        const bool starts = is_digit(text[i]) || (text[i] == '.' && i + 1 < text.size() && is_digit(text[i + 1]));
        const bool glued = i > 0 && (is_alpha(text[i - 1]) || is_digit(text[i - 1]) || text[i - 1] == '_' ||
                                     (text[i] == '.' && text[i - 1] == '.'));
        if (starts && !glued) {
            if (auto loc = parse_at(text, i)) {
                i = std::max(loc->end, i + 1);
                out.push_back(std::move(*loc));
                continue;
            }
        }
        ++i;
    }
    return out;
}

std::size_t find_last_ci(std::string_view text, std::string_view needle) {
    if (needle.size() > text.size()) return std::string_view::npos;
    for (std::size_t pos = text.size() - needle.size() + 1; pos-- > 0;) {
        bool match = true;
        for (std::size_t k = 0; k < needle.size() && match; ++k)
            match = std::tolower(static_cast<unsigned char>(text[pos + k])) == needle[k];
        if (match) return pos;
    }
    return std::string_view::npos;
}

// End of the sentence starting at `from`: a newline, or [.!?] followed by
// whitespace or the end of text.
std::size_t sentence_end(std::string_view text, std::size_t from) {
    for (std::size_t i = from; i < text.size(); ++i) {
        if (text[i] == '\n') return i;
        if ((text[i] == '.' || text[i] == '!' || text[i] == '?') &&
            (i + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[i + 1]))))
            return i + 1;
    }
    return text.size();
}

std::string_view final_sentence(std::string_view text) {
    std::string_view last;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = sentence_end(text, pos);
        auto sentence = text.substr(pos, end - pos);
        if (sentence.find_first_not_of(" \t\r\n.!?") != std::string_view::npos) last = sentence;
        pos = end == pos ? pos + 1 : end;
    }
    return last;
}

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool close_enough(double a, double b, const TolerancePolicy& policy) {
    const double bound = std::max(policy.abs_tol, policy.rel_tol * std::max(std::fabs(a), std::fabs(b)));
    return std::fabs(a - b) <= bound;
}

// Leading word of a judge reply, upper-cased, ignoring markdown emphasis.
std::pair<std::string, std::string_view> leading_word(std::string_view reply) {
    reply = trim(reply);
    while (!reply.empty() && (reply.front() == '*' || reply.front() == '`' || reply.front() == '#' ||
                              reply.front() == '"' || reply.front() == '\''))
        reply.remove_prefix(1);
    std::string word;
    std::size_t i = 0;
    while (i < reply.size() && is_alpha(reply[i]))
        word += static_cast<char>(std::toupper(static_cast<unsigned char>(reply[i++])));
    auto rest = reply.substr(i);
    while (!rest.empty() && (rest.front() == '*' || rest.front() == ':' || rest.front() == '-' ||
                             rest.front() == '.' || std::isspace(static_cast<unsigned char>(rest.front()))))
        rest.remove_prefix(1);
    return {word, trim(rest)};
}

}  // namespace

std::optional<ExtractedAnswer> extract_final_answer(std::string_view text) {
    if (auto marker = find_last_ci(text, kAnswerMarker); marker != std::string_view::npos) {
        const std::size_t from = marker + kAnswerMarker.size();
        const std::size_t to = sentence_end(text, from);
        auto numbers = scan_numbers(text.substr(from, to - from));
        if (!numbers.empty()) return numbers.front().answer;
    }
    auto numbers = scan_numbers(final_sentence(text));
    if (numbers.empty()) return std::nullopt;
    return numbers.back().answer;
}

std::string canonical_text(const ExtractedAnswer& answer) {
    std::array<char, 512> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), answer.value, std::chars_format::fixed);
    std::string out = ec == std::errc{} ? std::string(buf.data(), ptr) : std::to_string(answer.value);
    if (answer.is_percent) out += "%";
    if (answer.scale != Scale::unit) {
        out += " ";
        out += to_string(answer.scale);
    }
    return out;
}

bool numeric_equivalent(const ExtractedAnswer& candidate, const ExtractedAnswer& gold, const TolerancePolicy& policy) {
    auto forms = [&](const ExtractedAnswer& a) {
        std::vector<double> v{a.value};
        if (policy.allow_scale_units && a.scale != Scale::unit) v.push_back(a.value * multiplier(a.scale));
        return v;
    };
    const bool percent_shift = policy.allow_percent_decimal && candidate.is_percent != gold.is_percent;
    for (double c : forms(candidate)) {
        for (double g : forms(gold)) {
            if (close_enough(c, g, policy)) return true;
            if (percent_shift) {
                // The percent-marked side is divided down to a fraction.
                const double cc = candidate.is_percent ? c / 100.0 : c;
                const double gg = gold.is_percent ? g / 100.0 : g;
                if (close_enough(cc, gg, policy)) return true;
            }
        }
    }
    return false;
}

Verdict judge_with_llm(std::string_view response, std::string_view gold, std::string_view question,
                       backend::ModelBackend& judge, std::string_view prompt_template) {
    backend::GenerationRequest req;
    req.user_prompt = prompts::render(prompt_template.empty() ? prompts::defaults().judge : prompt_template,
                                      {{"question", std::string(question)},
                                       {"gold", std::string(gold)},
                                       {"response", std::string(response)}});
    req.temperature = 0.0;
    req.max_tokens = 256;
    std::string reply;
    try {
        reply = backend::complete(judge, req).text;
    } catch (const std::exception& e) {
        return Verdict{Outcome::error, Tier::llm_judge, std::string("judge call failed: ") + e.what()};
    }
    auto [word, rest] = leading_word(reply);
    if (word == "CORRECT") return Verdict{Outcome::pass, Tier::llm_judge, ""};
    if (word == "INCORRECT") {
        std::string feedback = rest.empty() ? std::string("the judge marked the answer incorrect") : std::string(rest);
        return Verdict{Outcome::fail, Tier::llm_judge, std::move(feedback)};
    }
    auto shown = trim(reply).substr(0, 120);
    return Verdict{Outcome::error, Tier::llm_judge, "unparseable judge output: '" + std::string(shown) + "'"};
}

Verdict verify(std::string_view response, std::string_view gold, std::string_view question,
               const TolerancePolicy& policy, backend::ModelBackend* judge, std::string_view judge_template) {
    auto candidate = extract_final_answer(response);
    auto reference = extract_final_answer(gold);
    if (candidate && reference) {
        if (numeric_equivalent(*candidate, *reference, policy)) return Verdict{Outcome::pass, Tier::rule, ""};
        return Verdict{Outcome::fail, Tier::rule,
                       "The final answer " + candidate->raw_span + " is not correct; recheck the figures used and "
                       "each calculation step."};
    }
    if (judge) return judge_with_llm(response, gold, question, *judge, judge_template);
    return Verdict{Outcome::fail, Tier::rule, "unparseable"};
}

}  // namespace forge::judge
