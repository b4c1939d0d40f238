#include "forge/config.hpp"

#include <fstream>
#include <set>

#include <openssl/evp.h>

#include "forge/evalharness.hpp"

namespace forge::cli {

using json = nlohmann::json;

namespace {

// Reads fields off one JSON object and rejects whatever was not asked for.
class Fields {
public:
    Fields(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) throw ConfigError("'" + path_ + "' must be an object");
    }

    const json* get(const std::string& key) {
        seen_.insert(key);
        auto it = obj_.find(key);
        return it == obj_.end() || it->is_null() ? nullptr : &*it;
    }

    template <class T>
    void read(const std::string& key, T& out) {
        if (const json* v = get(key)) {
            try {
                out = v->get<T>();
            } catch (const json::exception&) {
                throw ConfigError("'" + where(key) + "' has the wrong type");
            }
        }
    }

    template <class T>
    void read(const std::string& key, std::optional<T>& out) {
        if (get(key)) {
            T value{};
            read(key, value);
            out = value;
        }
    }

    std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void finish() const {
        for (auto it = obj_.begin(); it != obj_.end(); ++it)
            if (!seen_.count(it.key())) throw ConfigError("unknown config key '" + where(it.key()) + "'");
    }

private:
    const json& obj_;
    std::string path_;
    std::set<std::string> seen_;
};

BackendConfig parse_backend(const json& j, const std::string& path) {
    Fields f(j, path);
    BackendConfig b;
    f.read("type", b.type);
    f.read("base_url", b.base_url);
    f.read("model", b.model);
    f.read("temperature", b.temperature);
    f.read("max_tokens", b.max_tokens);
    if (const json* retry = f.get("retry")) {
        Fields r(*retry, f.where("retry"));
        r.read("max_attempts", b.max_attempts);
        r.read("base_backoff_ms", b.base_backoff_ms);
        r.read("backoff_factor", b.backoff_factor);
        r.finish();
    }
    f.read("concurrency", b.concurrency);
    f.read("timeout_ms", b.timeout_ms);
    f.read("script", b.script);
    if (const json* rules = f.get("rules")) {
        if (!rules->is_array()) throw ConfigError("'" + f.where("rules") + "' must be an array");
        for (std::size_t i = 0; i < rules->size(); ++i) {
            Fields rf((*rules)[i], f.where("rules") + "[" + std::to_string(i) + "]");
            MockRule rule;
            if (const json* m = rf.get("match"); m && m->is_string()) rule.match.push_back(m->get<std::string>());
            else rf.read("match", rule.match);
            rf.read("reply", rule.reply);
            rf.read("fail", rule.fail);
            rf.finish();
            b.rules.push_back(std::move(rule));
        }
    }
    f.read("default_reply", b.default_reply);
    f.finish();

    if (b.type != "openai" && b.type != "mock")
        throw ConfigError("'" + f.where("type") + "' must be \"openai\" or \"mock\"");
    if (b.type == "openai" && b.model.empty()) throw ConfigError("'" + f.where("model") + "' is required");
    if (b.max_attempts < 1) throw ConfigError("'" + path + ".retry.max_attempts' must be >= 1");
    if (b.backoff_factor < 1.0) throw ConfigError("'" + path + ".retry.backoff_factor' must be >= 1");
    if (b.base_backoff_ms < 0) throw ConfigError("'" + path + ".retry.base_backoff_ms' must be >= 0");
    if (b.concurrency < 1) throw ConfigError("'" + f.where("concurrency") + "' must be >= 1");
    if (b.temperature && (*b.temperature < 0.0 || *b.temperature > 2.0))
        throw ConfigError("'" + f.where("temperature") + "' must lie in [0, 2]");
    if (b.max_tokens && *b.max_tokens <= 0) throw ConfigError("'" + f.where("max_tokens") + "' must be positive");
    return b;
}

PipelineConfig parse_pipeline(const json& j) {
    Fields f(j, "pipeline");
    PipelineConfig p;
    f.read("synthesizer", p.synthesizer);
    f.read("generator", p.generator);
    f.read("judge", p.judge);
    f.read("filter_model", p.filter_model);
    f.read("eval_model", p.eval_model);
    f.read("max_iters", p.max_iters);
    f.read("seed", p.seed);
    f.read("sft_count", p.sft_count);
    if (const json* t = f.get("tolerance")) {
        Fields tf(*t, "pipeline.tolerance");
        tf.read("rel_tol", p.tolerance.rel_tol);
        tf.read("abs_tol", p.tolerance.abs_tol);
        tf.read("allow_percent_decimal", p.tolerance.allow_percent_decimal);
        tf.read("allow_scale_units", p.tolerance.allow_scale_units);
        tf.finish();
    }
    if (const json* w = f.get("reward_weights")) {
        Fields wf(*w, "pipeline.reward_weights");
        wf.read("alpha_acc", p.reward_weights.alpha_acc);
        wf.read("alpha_logic", p.reward_weights.alpha_logic);
        wf.read("alpha_format", p.reward_weights.alpha_format);
        wf.read("alpha_length", p.reward_weights.alpha_length);
        wf.finish();
    }
    f.read("length_threshold", p.length_threshold);
    f.read("kl_beta", p.kl_beta);
    f.read("replace_question", p.replace_question);
    f.read("filter_task", p.filter_task);
    f.read("parallelism", p.parallelism);
    if (const json* pr = f.get("prompts")) {
        Fields pf(*pr, "pipeline.prompts");
        pf.read("synthesis", p.prompts.synthesis);
        pf.read("generation", p.prompts.generation);
        pf.read("refinement", p.prompts.refinement);
        pf.read("judge", p.prompts.judge);
        pf.read("logic", p.prompts.logic);
        pf.read("version", p.prompts.version);
        pf.finish();
    }
    f.finish();

    if (p.max_iters < 1) throw ConfigError("'pipeline.max_iters' must be >= 1");
    if (p.length_threshold == 0) throw ConfigError("'pipeline.length_threshold' must be positive");
    if (p.parallelism < 1) throw ConfigError("'pipeline.parallelism' must be >= 1");
    if (p.kl_beta < 0) throw ConfigError("'pipeline.kl_beta' must be >= 0");
    if (!eval::parse_task(p.filter_task))
        throw ConfigError("'pipeline.filter_task' must name a benchmark task, not '" + p.filter_task + "'");
    if (p.tolerance.rel_tol < 0 || p.tolerance.abs_tol < 0)
        throw ConfigError("'pipeline.tolerance' values must be >= 0");
    const auto& w = p.reward_weights;
    if (w.alpha_acc < 0 || w.alpha_logic < 0 || w.alpha_format < 0 || w.alpha_length < 0)
        throw ConfigError("'pipeline.reward_weights' values must be >= 0");
    return p;
}

}  // namespace

Config parse_config_json(const json& j) {
    Fields top(j, "");
    Config c;
    if (const json* backends = top.get("backends")) {
        if (!backends->is_object()) throw ConfigError("'backends' must be an object");
        for (auto it = backends->begin(); it != backends->end(); ++it)
            c.backends[it.key()] = parse_backend(it.value(), "backends." + it.key());
    }
    if (const json* p = top.get("pipeline")) c.pipeline = parse_pipeline(*p);
    if (const json* paths = top.get("paths")) {
        Fields pf(*paths, "paths");
        pf.read("input", c.paths.input);
        pf.read("output", c.paths.output);
        pf.read("checkpoint_dir", c.paths.checkpoint_dir);
        pf.finish();
    }
    top.finish();

    // A lone backend serves every model stage that does not name one.
    if (c.backends.size() == 1) {
        const auto& only = c.backends.begin()->first;
        for (auto* ref : {&c.pipeline.synthesizer, &c.pipeline.generator, &c.pipeline.filter_model,
                          &c.pipeline.eval_model})
            if (ref->empty()) *ref = only;
    }
    const std::pair<const char*, const std::string*> refs[] = {
        {"synthesizer", &c.pipeline.synthesizer}, {"generator", &c.pipeline.generator},
        {"judge", &c.pipeline.judge},             {"filter_model", &c.pipeline.filter_model},
        {"eval_model", &c.pipeline.eval_model},
    };
    for (const auto& [key, ref] : refs)
        if (!ref->empty() && !c.backends.count(*ref))
            throw ConfigError("'pipeline." + std::string(key) + "' names unknown backend '" + *ref + "'");
    return c;
}

Config parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_config_json(j);
}

nlohmann::ordered_json to_json(const Config& c) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json backends = nlohmann::ordered_json::object();
    for (const auto& [name, b] : c.backends) {
        nlohmann::ordered_json bj;
        bj["type"] = b.type;
        bj["base_url"] = b.base_url;
        bj["model"] = b.model;
        if (b.temperature) bj["temperature"] = *b.temperature;
        if (b.max_tokens) bj["max_tokens"] = *b.max_tokens;
        bj["retry"] = {{"max_attempts", b.max_attempts},
                       {"base_backoff_ms", b.base_backoff_ms},
                       {"backoff_factor", b.backoff_factor}};
        bj["concurrency"] = b.concurrency;
        bj["timeout_ms"] = b.timeout_ms;
        if (!b.script.empty()) bj["script"] = b.script;
        if (!b.rules.empty()) {
            nlohmann::ordered_json rules = nlohmann::ordered_json::array();
            for (const auto& r : b.rules) rules.push_back({{"match", r.match}, {"reply", r.reply}, {"fail", r.fail}});
            bj["rules"] = std::move(rules);
        }
        if (b.default_reply) bj["default_reply"] = *b.default_reply;
        backends[name] = std::move(bj);
    }
    j["backends"] = std::move(backends);

    const auto& p = c.pipeline;
    nlohmann::ordered_json pj;
    pj["synthesizer"] = p.synthesizer;
    pj["generator"] = p.generator;
    pj["judge"] = p.judge;
    pj["filter_model"] = p.filter_model;
    pj["eval_model"] = p.eval_model;
    pj["max_iters"] = p.max_iters;
    pj["seed"] = p.seed;
    if (p.sft_count) pj["sft_count"] = *p.sft_count;
    pj["tolerance"] = {{"rel_tol", p.tolerance.rel_tol},
                       {"abs_tol", p.tolerance.abs_tol},
                       {"allow_percent_decimal", p.tolerance.allow_percent_decimal},
                       {"allow_scale_units", p.tolerance.allow_scale_units}};
    pj["reward_weights"] = {{"alpha_acc", p.reward_weights.alpha_acc},
                            {"alpha_logic", p.reward_weights.alpha_logic},
                            {"alpha_format", p.reward_weights.alpha_format},
                            {"alpha_length", p.reward_weights.alpha_length}};
    pj["length_threshold"] = p.length_threshold;
    pj["kl_beta"] = p.kl_beta;
    pj["replace_question"] = p.replace_question;
    pj["filter_task"] = p.filter_task;
    pj["parallelism"] = p.parallelism;
    pj["prompts"] = {{"synthesis", p.prompts.synthesis},   {"generation", p.prompts.generation},
                     {"refinement", p.prompts.refinement}, {"judge", p.prompts.judge},
                     {"logic", p.prompts.logic},           {"version", p.prompts.version}};
    j["pipeline"] = std::move(pj);
    j["paths"] = {{"input", c.paths.input}, {"output", c.paths.output}, {"checkpoint_dir", c.paths.checkpoint_dir}};
    return j;
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out += kHex[digest[i] >> 4];
        out += kHex[digest[i] & 0xF];
    }
    return out;
}

std::string config_digest(const Config& config) { return sha256_hex(to_json(config).dump()); }

std::unique_ptr<backend::ModelBackend> make_backend(const Config& config, const std::string& name) {
    auto it = config.backends.find(name);
    if (it == config.backends.end()) throw ConfigError("no backend named '" + name + "'");
    const BackendConfig& b = it->second;

    if (b.type == "mock") {
        if (!b.script.empty()) {
            std::vector<backend::ScriptEntry> entries(b.script.begin(), b.script.end());
            return std::make_unique<backend::ScriptedBackend>(std::move(entries), name);
        }
        auto rules = b.rules;
        auto fallback = b.default_reply;
        return std::make_unique<backend::ResponderBackend>(
            [rules, fallback](const backend::GenerationRequest& req) -> backend::ScriptEntry {
                const std::string prompt = req.system_prompt.value_or("") + "\n" + req.user_prompt;
                for (const auto& r : rules) {
                    bool all = true;
                    for (const auto& m : r.match) all = all && prompt.find(m) != std::string::npos;
                    if (!all) continue;
                    if (r.fail) return backend::ScriptedFailure{backend::ErrorKind::transport, "mock rule failure", std::nullopt};
                    return r.reply;
                }
                if (fallback) return *fallback;
                return backend::ScriptedFailure{backend::ErrorKind::transport, "no mock rule matched the prompt", std::nullopt};
            },
            name);
    }

    backend::HttpBackendConfig hc;
    hc.base_url = backend::base_url_from_env().value_or(b.base_url);
    if (hc.base_url.empty()) throw ConfigError("backend '" + name + "' has no base_url and FORGE_BASE_URL is unset");
    hc.model = b.model;
    hc.api_key = backend::api_key_from_env();
    hc.timeout = backend::Duration(b.timeout_ms);
    hc.retry.max_attempts = b.max_attempts;
    hc.retry.base_backoff = backend::Duration(b.base_backoff_ms);
    hc.retry.backoff_factor = b.backoff_factor;
    hc.concurrency = b.concurrency;
    return std::make_unique<backend::HttpBackend>(std::move(hc));
}

}  // namespace forge::cli
