#include "forge/records.hpp"

#include <fstream>

#include "forge/corpus.hpp"

namespace forge::cot {

using json = nlohmann::ordered_json;

std::string_view to_string(Status s) { return s == Status::verified ? "verified" : "exhausted"; }

namespace {

json answer_json(const judge::ExtractedAnswer& a) {
    json j;
    j["value"] = a.value;
    j["is_percent"] = a.is_percent;
    j["scale"] = judge::to_string(a.scale);
    j["raw_span"] = a.raw_span;
    return j;
}

judge::ExtractedAnswer answer_from_json(const json& j) {
    judge::ExtractedAnswer a;
    a.value = j.at("value").get<double>();
    a.is_percent = j.at("is_percent").get<bool>();
    auto scale = judge::parse_scale(j.at("scale").get<std::string>());
    if (!scale) throw std::invalid_argument("unknown scale");
    a.scale = *scale;
    a.raw_span = j.at("raw_span").get<std::string>();
    return a;
}

}  // namespace

json to_json(const CoTRecord& record) {
    json j;
    j["instance_id"] = record.instance_id;
    j["status"] = to_string(record.status);
    json attempts = json::array();
    for (const auto& a : record.attempts) {
        json aj;
        aj["index"] = a.index;
        aj["reasoning"] = a.reasoning;
        aj["extracted_answer"] = a.extracted_answer ? answer_json(*a.extracted_answer) : json(nullptr);
        aj["verdict"] = {{"outcome", judge::to_string(a.verdict.outcome)}, {"tier", judge::to_string(a.verdict.tier)}};
        aj["feedback"] = a.feedback;
        attempts.push_back(std::move(aj));
    }
    j["attempts"] = std::move(attempts);
    json meta;
    meta["generator"] = record.meta.generator;
    meta["judge"] = record.meta.judge;
    meta["seed"] = record.meta.seed;
    meta["max_iters"] = record.max_iters;
    meta["prompt_version"] = record.meta.prompt_version;
    j["meta"] = std::move(meta);
    return j;
}

CoTRecord record_from_json(const json& j) {
    CoTRecord r;
    r.instance_id = j.at("instance_id").get<std::string>();
    const auto status = j.at("status").get<std::string>();
    if (status == "verified") r.status = Status::verified;
    else if (status == "exhausted") r.status = Status::exhausted;
    else throw std::invalid_argument("unknown status '" + status + "'");
    for (const auto& aj : j.at("attempts")) {
        ReasoningAttempt a;
        a.index = aj.at("index").get<int>();
        a.reasoning = aj.at("reasoning").get<std::string>();
        if (const auto& ea = aj.at("extracted_answer"); !ea.is_null()) a.extracted_answer = answer_from_json(ea);
        const auto& v = aj.at("verdict");
        auto outcome = judge::parse_outcome(v.at("outcome").get<std::string>());
        auto tier = judge::parse_tier(v.at("tier").get<std::string>());
        if (!outcome || !tier) throw std::invalid_argument("bad verdict");
        a.feedback = aj.at("feedback").get<std::string>();
        a.verdict = judge::Verdict{*outcome, *tier, a.feedback};
        r.attempts.push_back(std::move(a));
    }
    const auto& meta = j.at("meta");
    r.meta.generator = meta.at("generator").get<std::string>();
    r.meta.judge = meta.at("judge").get<std::string>();
    r.meta.seed = meta.at("seed").get<std::uint64_t>();
    r.max_iters = meta.at("max_iters").get<int>();
    r.meta.prompt_version = meta.at("prompt_version").get<std::string>();
    return r;
}

json to_json(const PreferencePair& pair) {
    json j;
    j["instance_id"] = pair.instance_id;
    j["prompt"] = pair.prompt;
    j["chosen"] = pair.chosen;
    j["rejected"] = pair.rejected;
    return j;
}

PreferencePair pair_from_json(const json& j) {
    return PreferencePair{j.at("instance_id").get<std::string>(), j.at("prompt").get<std::string>(),
                          j.at("chosen").get<std::string>(), j.at("rejected").get<std::string>()};
}

}  // namespace forge::cot

namespace forge::corpus {

void save_records(std::span<const cot::CoTRecord> records, const std::filesystem::path& path) {
    std::vector<nlohmann::ordered_json> lines;
    lines.reserve(records.size());
    for (const auto& r : records) lines.push_back(cot::to_json(r));
    write_jsonl_atomic(path, lines);
}

std::vector<cot::CoTRecord> load_records(const std::filesystem::path& path) {
    std::vector<cot::CoTRecord> out;
    std::size_t line = 0;
    for (const auto& j : read_jsonl(path)) {
        ++line;
        try {
            out.push_back(cot::record_from_json(j));
        } catch (const std::exception& e) {
            throw ParseError(line, e.what());
        }
    }
    return out;
}

}  // namespace forge::corpus
