#include "forge/corpus.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <variant>
#include <unistd.h>

namespace forge::corpus {

using json = nlohmann::ordered_json;

namespace {

constexpr std::array<std::pair<Source, std::string_view>, 8> kSourceNames{{
    {Source::finqa, "finqa"},
    {Source::convfinqa, "convfinqa"},
    {Source::docfinqa, "docfinqa"},
    {Source::tatqa, "tatqa"},
    {Source::econ_logic, "econ_logic"},
    {Source::docmath, "docmath"},
    {Source::bizbench, "bizbench"},
    {Source::synthetic, "synthetic"},
}};

// Raised inside a line parser for a record that is well-formed but unusable.
struct SkipRecord {
    std::string reason;
};

struct BadRecord {
    std::string reason;
};

std::string scalar_text(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
    if (v.is_number_float() || v.is_boolean()) return v.dump();
    if (v.is_array()) {
        std::string out;
        for (const auto& e : v) {
            if (!out.empty()) out += ", ";
            out += scalar_text(e);
        }
        return out;
    }
    return {};
}

// First present, non-null key among `keys`.
const json* find_any(const json& obj, std::initializer_list<std::string_view> keys) {
    for (auto k : keys) {
        auto it = obj.find(std::string(k));
        if (it != obj.end() && !it->is_null()) return &*it;
    }
    return nullptr;
}

std::string text_field(const json& obj, std::initializer_list<std::string_view> keys) {
    const json* v = find_any(obj, keys);
    return v ? scalar_text(*v) : std::string{};
}

std::string join_lines(const json* arr) {
    if (!arr) return {};
    if (arr->is_string()) return arr->get<std::string>();
    if (!arr->is_array()) throw BadRecord{"expected an array of strings"};
    std::string out;
    for (const auto& e : *arr) {
        auto s = scalar_text(e);
        if (s.empty()) continue;
        if (!out.empty()) out += '\n';
        out += s;
    }
    return out;
}

std::string render_table(const json* table) {
    if (!table) return {};
    if (table->is_string()) return table->get<std::string>();
    if (!table->is_array()) throw BadRecord{"table must be an array of rows"};
    std::string out;
    for (const auto& row : *table) {
        if (!row.is_array()) throw BadRecord{"table row must be an array"};
        out += '|';
        for (const auto& cell : row) {
            out += scalar_text(cell);
            out += '|';
        }
        out += '\n';
    }
    return out;
}

std::string join_context(std::initializer_list<std::string> parts) {
    std::string out;
    for (const auto& p : parts) {
        if (p.empty()) continue;
        if (!out.empty() && out.back() != '\n') out += '\n';
        out += p;
    }
    while (!out.empty() && out.back() == '\n') out.pop_back();
    return out;
}

// "subtract(319.10, 285.37), divide(#0, 285.37)" -> one step per operation.
std::vector<GuidanceStep> program_steps(std::string_view program) {
    std::vector<GuidanceStep> steps;
    int depth = 0;
    std::string cur;
    for (char c : program) {
        if (c == '(') ++depth;
        if (c == ')') --depth;
        if (c == ',' && depth == 0) {
            auto start = cur.find_first_not_of(" \t\n");
            if (start != std::string::npos) steps.push_back({GuidanceKind::program_step, cur.substr(start)});
            cur.clear();
            continue;
        }
        cur += c;
    }
    auto start = cur.find_first_not_of(" \t\n");
    if (start != std::string::npos) {
        auto end = cur.find_last_not_of(" \t\n");
        steps.push_back({GuidanceKind::program_step, cur.substr(start, end - start + 1)});
    }
    return steps;
}

std::vector<GuidanceStep> code_steps(std::string_view code) {
    std::vector<GuidanceStep> steps;
    std::istringstream in{std::string(code)};
    std::string line;
    while (std::getline(in, line)) {
        auto start = line.find_first_not_of(" \t");
        if (start == std::string::npos) continue;
        auto end = line.find_last_not_of(" \t\r");
        steps.push_back({GuidanceKind::program_step, line.substr(start, end - start + 1)});
    }
    return steps;
}

std::optional<std::uint64_t> metadata_tokens(const json& obj) {
    const json* v = find_any(obj, {"context_tokens", "avg_tokens", "token_count", "num_tokens"});
    if (!v) return std::nullopt;
    if (v->is_number_unsigned()) return v->get<std::uint64_t>();
    if (v->is_number_integer() && v->get<long long>() >= 0) return v->get<std::uint64_t>();
    throw BadRecord{"token count must be a nonnegative integer"};
}

void require_question(const QAInstance& inst) {
    if (inst.question.empty()) throw BadRecord{"missing question"};
}

void require_gold(const QAInstance& inst) {
    if (inst.gold_answer.empty()) throw SkipRecord{"missing gold answer"};
}

std::string assigned_id(Source s, std::size_t line) {
    return std::string(to_string(s)) + "-" + std::to_string(line);
}

QAInstance parse_finqa(const json& j, std::size_t line) {
    QAInstance inst;
    inst.source = Source::finqa;
    inst.id = text_field(j, {"id"});
    if (inst.id.empty()) inst.id = assigned_id(inst.source, line);
    inst.context_text = join_context({join_lines(find_any(j, {"pre_text"})),
                                      render_table(find_any(j, {"table"})),
                                      join_lines(find_any(j, {"post_text"}))});
    const json* qa = find_any(j, {"qa"});
    const json& q = qa ? *qa : j;
    if (!q.is_object()) throw BadRecord{"qa must be an object"};
    inst.question = text_field(q, {"question"});
    inst.gold_answer = text_field(q, {"answer"});
    if (inst.gold_answer.empty()) inst.gold_answer = text_field(q, {"exe_ans"});
    inst.guidance = program_steps(text_field(q, {"program"}));
    return inst;
}

QAInstance parse_convfinqa(const json& j, std::size_t line) {
    QAInstance inst;
    inst.source = Source::convfinqa;
    inst.id = text_field(j, {"id"});
    if (inst.id.empty()) inst.id = assigned_id(inst.source, line);
    inst.context_text = join_context({join_lines(find_any(j, {"pre_text"})),
                                      render_table(find_any(j, {"table"})),
                                      join_lines(find_any(j, {"post_text"}))});
    const json* ann = find_any(j, {"annotation"});
    std::vector<std::string> turns;
    if (ann) {
        if (!ann->is_object()) throw BadRecord{"annotation must be an object"};
        if (const json* d = find_any(*ann, {"dialogue_break"})) {
            if (!d->is_array()) throw BadRecord{"dialogue_break must be an array"};
            for (const auto& t : *d) turns.push_back(scalar_text(t));
        }
    }
    if (const json* qa = find_any(j, {"qa"})) {
        inst.question = text_field(*qa, {"question"});
        inst.gold_answer = text_field(*qa, {"answer"});
        if (inst.gold_answer.empty()) inst.gold_answer = text_field(*qa, {"exe_ans"});
        for (auto& s : program_steps(text_field(*qa, {"program"}))) inst.guidance.push_back(std::move(s));
    }
    if (inst.question.empty() && !turns.empty()) inst.question = turns.back();
    if (inst.gold_answer.empty() && ann) {
        if (const json* ans = find_any(*ann, {"exe_ans_list"}); ans && ans->is_array() && !ans->empty())
            inst.gold_answer = scalar_text(ans->back());
    }
    std::vector<GuidanceStep> subs;
    for (auto& t : turns)
        if (!t.empty()) subs.push_back({GuidanceKind::sub_question, std::move(t)});
    inst.guidance.insert(inst.guidance.begin(), subs.begin(), subs.end());
    return inst;
}

QAInstance parse_docfinqa(const json& j, std::size_t line) {
    QAInstance inst;
    inst.source = Source::docfinqa;
    inst.id = text_field(j, {"id", "Id"});
    if (inst.id.empty()) inst.id = assigned_id(inst.source, line);
    inst.context_text = text_field(j, {"Context", "context"});
    inst.question = text_field(j, {"Question", "question"});
    inst.gold_answer = text_field(j, {"Answer", "answer"});
    inst.guidance = code_steps(text_field(j, {"Program", "program"}));
    return inst;
}

QAInstance parse_econ_logic(const json& j, std::size_t line) {
    QAInstance inst;
    inst.source = Source::econ_logic;
    inst.id = text_field(j, {"id"});
    if (inst.id.empty()) inst.id = assigned_id(inst.source, line);
    inst.question = text_field(j, {"Question", "question"});
    std::string options;
    for (auto key : {"A", "B", "C", "D", "E"}) {
        auto opt = text_field(j, {key});
        if (!opt.empty()) options += std::string(key) + ". " + opt + "\n";
    }
    if (!options.empty()) options.pop_back();
    inst.context_text = options;
    inst.gold_answer = text_field(j, {"Answer", "answer"});
    return inst;
}

QAInstance parse_docmath(const json& j, std::size_t line) {
    QAInstance inst;
    inst.source = Source::docmath;
    inst.id = text_field(j, {"question_id", "id"});
    if (inst.id.empty()) inst.id = assigned_id(inst.source, line);
    inst.context_text = join_context({join_lines(find_any(j, {"paragraphs", "context"})),
                                      join_lines(find_any(j, {"tables"}))});
    inst.question = text_field(j, {"question"});
    inst.gold_answer = text_field(j, {"ground_truth", "answer"});
    inst.guidance = code_steps(text_field(j, {"python_solution"}));
    return inst;
}

QAInstance parse_bizbench(const json& j, std::size_t line) {
    QAInstance inst;
    inst.source = Source::bizbench;
    inst.id = text_field(j, {"id"});
    if (inst.id.empty()) inst.id = assigned_id(inst.source, line);
    inst.context_text = text_field(j, {"context"});
    inst.question = text_field(j, {"question"});
    inst.gold_answer = text_field(j, {"answer"});
    if (auto task = text_field(j, {"task"}); !task.empty()) inst.meta["task"] = task;
    return inst;
}

// A TAT-QA document carries several questions; each becomes one instance.
std::vector<std::variant<QAInstance, SkipRecord>> parse_tatqa(const json& j) {
    std::string table;
    if (const json* t = find_any(j, {"table"})) table = render_table(t->is_object() ? find_any(*t, {"table"}) : t);
    std::string paragraphs;
    if (const json* ps = find_any(j, {"paragraphs"})) {
        if (!ps->is_array()) throw BadRecord{"paragraphs must be an array"};
        for (const auto& p : *ps) {
            auto text = p.is_object() ? text_field(p, {"text"}) : scalar_text(p);
            if (text.empty()) continue;
            if (!paragraphs.empty()) paragraphs += '\n';
            paragraphs += text;
        }
    }
    const json* qs = find_any(j, {"questions"});
    if (!qs || !qs->is_array()) throw BadRecord{"missing questions array"};
    std::vector<std::variant<QAInstance, SkipRecord>> out;
    for (const auto& q : *qs) {
        if (!q.is_object()) throw BadRecord{"question entry must be an object"};
        QAInstance inst;
        inst.source = Source::tatqa;
        inst.id = text_field(q, {"uid", "id"});
        if (inst.id.empty()) throw BadRecord{"question without uid"};
        inst.context_text = join_context({table, paragraphs});
        inst.question = text_field(q, {"question"});
        require_question(inst);
        inst.gold_answer = text_field(q, {"answer"});
        auto scale = text_field(q, {"scale"});
        if (!inst.gold_answer.empty() && !scale.empty() && scale != "percent")
            inst.gold_answer += " " + scale;
        else if (!inst.gold_answer.empty() && scale == "percent")
            inst.gold_answer += "%";
        if (auto d = text_field(q, {"derivation"}); !d.empty())
            inst.guidance.push_back({GuidanceKind::program_step, d});
        if (inst.gold_answer.empty()) {
            out.emplace_back(SkipRecord{"missing gold answer for " + inst.id});
            continue;
        }
        out.emplace_back(std::move(inst));
    }
    return out;
}

}  // namespace

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

std::string_view to_string(Source s) {
    for (const auto& [src, name] : kSourceNames)
        if (src == s) return name;
    return "synthetic";
}

std::optional<Source> parse_source(std::string_view name) {
    for (const auto& [src, n] : kSourceNames)
        if (n == name) return src;
    return std::nullopt;
}

std::string_view to_string(GuidanceKind k) {
    return k == GuidanceKind::sub_question ? "sub_question" : "program_step";
}

std::optional<GuidanceKind> parse_guidance_kind(std::string_view name) {
    if (name == "sub_question") return GuidanceKind::sub_question;
    if (name == "program_step") return GuidanceKind::program_step;
    return std::nullopt;
}

std::uint64_t estimate_tokens(std::string_view text) { return (text.size() + 3) / 4; }

json to_json(const QAInstance& inst) {
    json j;
    j["id"] = inst.id;
    j["source"] = to_string(inst.source);
    j["context"] = inst.context_text;
    j["question"] = inst.question;
    j["gold_answer"] = inst.gold_answer;
    json g = json::array();
    for (const auto& step : inst.guidance) {
        json s;
        s["kind"] = to_string(step.kind);
        s["text"] = step.text;
        g.push_back(std::move(s));
    }
    j["guidance"] = std::move(g);
    j["context_tokens"] = inst.context_token_count;
    if (!inst.meta.empty()) j["meta"] = inst.meta;
    return j;
}

QAInstance instance_from_json(const json& j) {
    if (!j.is_object()) throw std::invalid_argument("instance must be a JSON object");
    QAInstance inst;
    inst.id = j.at("id").get<std::string>();
    auto src = parse_source(j.at("source").get<std::string>());
    if (!src) throw std::invalid_argument("unknown source '" + j.at("source").get<std::string>() + "'");
    inst.source = *src;
    inst.context_text = j.value("context", std::string{});
    inst.question = j.at("question").get<std::string>();
    inst.gold_answer = j.contains("gold_answer") && !j["gold_answer"].is_null() ? scalar_text(j["gold_answer"]) : "";
    if (auto it = j.find("guidance"); it != j.end() && !it->is_null()) {
        for (const auto& s : *it) {
            auto kind = parse_guidance_kind(s.at("kind").get<std::string>());
            if (!kind) throw std::invalid_argument("unknown guidance kind");
            auto text = s.at("text").get<std::string>();
            if (text.empty()) throw std::invalid_argument("guidance text must be nonempty");
            inst.guidance.push_back({*kind, std::move(text)});
        }
    }
    if (auto it = j.find("context_tokens"); it != j.end() && !it->is_null())
        inst.context_token_count = it->get<std::uint64_t>();
    else
        inst.context_token_count = estimate_tokens(inst.context_text);
    if (auto it = j.find("meta"); it != j.end() && it->is_object()) inst.meta = *it;
    return inst;
}

LoadResult parse_instances(std::istream& in, Source format, const TokenCounter& counter) {
    LoadResult result;
    std::set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;

    auto accept = [&](QAInstance inst, const json& raw) {
        if (!seen.insert(inst.id).second) throw ParseError(lineno, "duplicate id '" + inst.id + "'");
        if (auto meta = metadata_tokens(raw)) inst.context_token_count = *meta;
        else inst.context_token_count = counter(inst.context_text);
        result.instances.push_back(std::move(inst));
    };
    auto skip = [&](std::string reason) {
        result.report.skipped.push_back({lineno, std::move(reason)});
    };

    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(lineno, std::string("invalid JSON: ") + e.what());
        }
        if (!j.is_object()) throw ParseError(lineno, "record is not a JSON object");
        try {
            if (format == Source::tatqa) {
                for (auto& entry : parse_tatqa(j)) {
                    if (auto* s = std::get_if<SkipRecord>(&entry)) skip(s->reason);
                    else accept(std::move(std::get<QAInstance>(entry)), j);
                }
                continue;
            }
            QAInstance inst;
            switch (format) {
            case Source::finqa: inst = parse_finqa(j, lineno); break;
            case Source::convfinqa: inst = parse_convfinqa(j, lineno); break;
            case Source::docfinqa: inst = parse_docfinqa(j, lineno); break;
            case Source::econ_logic: inst = parse_econ_logic(j, lineno); break;
            case Source::docmath: inst = parse_docmath(j, lineno); break;
            case Source::bizbench: inst = parse_bizbench(j, lineno); break;
            case Source::synthetic:
            case Source::tatqa:
                try {
                    inst = instance_from_json(j);
                } catch (const std::exception& e) {
                    throw BadRecord{e.what()};
                }
                break;
            }
            require_question(inst);
            require_gold(inst);
            for (const auto& g : inst.guidance)
                if (g.text.empty()) throw BadRecord{"empty guidance step"};
            accept(std::move(inst), j);
        } catch (const SkipRecord& s) {
            skip(s.reason);
        } catch (const BadRecord& b) {
            throw ParseError(lineno, b.reason);
        } catch (const json::exception& e) {
            throw ParseError(lineno, e.what());
        }
    }
    result.report.loaded_count = result.instances.size();
    result.report.skipped_count = result.report.skipped.size();
    return result;
}

LoadResult load_instances(const std::filesystem::path& path, Source format, const TokenCounter& counter) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return parse_instances(in, format, counter);
}

void write_text_atomic(const std::filesystem::path& path, std::string_view text) {
    auto tmp = path;
    tmp += ".tmp-" + std::to_string(::getpid());
    std::error_code ec;
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw WriteError("cannot open " + tmp.string() + " for writing");
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        out.flush();
        if (!out) {
            out.close();
            std::filesystem::remove(tmp, ec);
            throw WriteError("write failed for " + path.string());
        }
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::error_code ignore;
        std::filesystem::remove(tmp, ignore);
        throw WriteError("cannot move output into place at " + path.string() + ": " + ec.message());
    }
}

void write_jsonl_atomic(const std::filesystem::path& path, std::span<const json> lines) {
    std::string text;
    for (const auto& l : lines) {
        text += l.dump();
        text += '\n';
    }
    write_text_atomic(path, text);
}

std::vector<json> read_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::vector<json> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(json::parse(line));
        } catch (const json::parse_error& e) {
            throw ParseError(lineno, std::string("invalid JSON: ") + e.what());
        }
    }
    return out;
}

void save_instances(std::span<const QAInstance> instances, const std::filesystem::path& path) {
    std::vector<json> lines;
    lines.reserve(instances.size());
    for (const auto& i : instances) lines.push_back(to_json(i));
    write_jsonl_atomic(path, lines);
}

namespace {

// Unbiased draw in [0, n) from the raw 64-bit engine output; the standard
// distributions are implementation-defined and would break cross-platform
// reproducibility of the split.
std::uint64_t draw_below(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

}  // namespace

CorpusSplit split_corpus(std::span<const QAInstance> records, std::size_t sft_count, std::uint64_t seed) {
    if (sft_count > records.size())
        throw std::invalid_argument("sft_count " + std::to_string(sft_count) + " exceeds corpus size " +
                                    std::to_string(records.size()));

    std::map<Source, std::vector<std::size_t>> strata;
    for (std::size_t i = 0; i < records.size(); ++i) strata[records[i].source].push_back(i);

    // Largest-remainder quotas: floor(n_s * k / N), then hand out the
    // leftover one at a time by descending remainder (ties by source order).
    const std::size_t total = records.size();
    std::map<Source, std::size_t> quota;
    std::vector<std::pair<std::size_t, Source>> remainders;
    std::size_t assigned = 0;
    for (const auto& [src, idx] : strata) {
        const auto num = static_cast<unsigned __int128>(idx.size()) * sft_count;
        quota[src] = static_cast<std::size_t>(num / total);
        remainders.emplace_back(static_cast<std::size_t>(num % total), src);
        assigned += quota[src];
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t k = 0; assigned < sft_count; ++k, ++assigned) ++quota[remainders[k].second];

    std::mt19937_64 rng(seed);
    std::vector<bool> in_sft(records.size(), false);
    for (auto& [src, idx] : strata) {
        std::sort(idx.begin(), idx.end(),
                  [&](std::size_t a, std::size_t b) { return records[a].id < records[b].id; });
        for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[draw_below(rng, i)]);
        for (std::size_t k = 0; k < quota[src]; ++k) in_sft[idx[k]] = true;
    }

    CorpusSplit split;
    split.seed = seed;
    split.sft.reserve(sft_count);
    split.rl.reserve(records.size() - sft_count);
    for (std::size_t i = 0; i < records.size(); ++i)
        (in_sft[i] ? split.sft : split.rl).push_back(records[i].id);
    return split;
}

json to_json(const CorpusSplit& split) {
    json j;
    j["seed"] = split.seed;
    j["sft"] = split.sft;
    j["rl"] = split.rl;
    return j;
}

}  // namespace forge::corpus
