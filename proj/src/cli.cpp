#include "forge/cli.hpp"

#include <csignal>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "forge/config.hpp"
#include "forge/corpus.hpp"
#include "forge/cotloop.hpp"
#include "forge/difficultyfilter.hpp"
#include "forge/evalharness.hpp"
#include "forge/records.hpp"
#include "forge/rewardengine.hpp"
#include "forge/runner.hpp"
#include "forge/synthesis.hpp"

namespace forge::cli {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::atomic<bool>& interrupt_flag() {
    static std::atomic<bool> flag{false};
    return flag;
}

namespace {

extern "C" void on_signal(int) { interrupt_flag().store(true); }

struct CommonArgs {
    std::string config;
    std::string in;
    std::string out;
    bool resume = false;
    std::optional<std::uint64_t> seed;
    std::optional<int> parallelism;
    std::optional<std::size_t> max_items;
    std::string format = "synthetic";
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void add_common(CLI::App* sub, CommonArgs& c, bool needs_config) {
    auto* cfg = sub->add_option("--config", c.config, "JSON config file");
    if (needs_config) cfg->required();
    sub->add_option("--in", c.in, "input path")->required();
    sub->add_option("--out", c.out, "output path")->required();
    sub->add_flag("--resume", c.resume, "continue from the stage checkpoint");
    sub->add_option("--seed", c.seed, "overrides pipeline.seed");
    sub->add_option("--parallelism", c.parallelism, "worker count (overrides pipeline.parallelism)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--max-items", c.max_items, "stop after N newly processed items")->group("");
}

Config load_config(const CommonArgs& c) {
    Config config = c.config.empty() ? parse_config_json(nlohmann::json::object()) : parse_config(c.config);
    if (c.seed) config.pipeline.seed = *c.seed;
    return config;
}

std::size_t parallelism_of(const CommonArgs& c, const Config& config) {
    return static_cast<std::size_t>(c.parallelism.value_or(config.pipeline.parallelism));
}

std::string file_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<corpus::QAInstance> load_input(const std::string& path, const std::string& format, std::ostream& err) {
    auto source = corpus::parse_source(format);
    if (!source) throw UsageError("unknown --format '" + format + "'");
    auto loaded = corpus::load_instances(path, *source);
    if (loaded.report.skipped_count > 0) {
        err << "skipped " << loaded.report.skipped_count << " record(s) in " << path << ":\n";
        for (const auto& s : loaded.report.skipped) err << "  line " << s.line << ": " << s.reason << "\n";
    }
    return std::move(loaded.instances);
}

RunnerOptions runner_options(const std::string& stage, const CommonArgs& c, const Config& config,
                             const std::string& extra_digest) {
    const fs::path out = fs::absolute(c.out);
    const fs::path dir = config.paths.checkpoint_dir.empty() ? out.parent_path() : fs::path(config.paths.checkpoint_dir);
    RunnerOptions o;
    o.stage = stage;
    o.run_id = stage + "-" + sha256_hex(out.string()).substr(0, 16);
    o.digest = sha256_hex(config_digest(config) + "\n" + stage + "\n" + sha256_hex(file_bytes(c.in)) + "\n" +
                          extra_digest);
    o.checkpoint_path = dir / (out.filename().string() + ".checkpoint.json");
    o.partial_path = dir / (out.filename().string() + ".partial.jsonl");
    o.resume = c.resume;
    o.parallelism = parallelism_of(c, config);
    o.max_items = c.max_items;
    o.interrupt = &interrupt_flag();
    return o;
}

int interrupted(std::ostream& err, const std::string& stage) {
    err << stage << ": interrupted; checkpoint saved, rerun with --resume to continue\n";
    return kExitFailure;
}

std::unique_ptr<backend::ModelBackend> stage_backend(const Config& config, const std::string& name,
                                                     const char* key) {
    if (name.empty()) throw ConfigError(std::string("pipeline.") + key + " is not set");
    return make_backend(config, name);
}

backend::GenerationRequest stage_decode(const Config& config, const std::string& name, double temperature,
                                        int max_tokens) {
    backend::GenerationRequest req;
    const auto& b = config.backends.at(name);
    req.temperature = b.temperature.value_or(temperature);
    req.max_tokens = b.max_tokens.value_or(max_tokens);
    return req;
}

judge::Verifier make_verifier(const Config& config, std::unique_ptr<backend::ModelBackend>& judge_holder) {
    judge::Verifier v;
    v.policy = config.pipeline.tolerance;
    v.judge_template = config.pipeline.prompts.judge;
    if (!config.pipeline.judge.empty()) {
        judge_holder = make_backend(config, config.pipeline.judge);
        v.judge = judge_holder.get();
    }
    return v;
}

std::vector<std::string> ids_of(const std::vector<corpus::QAInstance>& instances) {
    std::vector<std::string> ids;
    ids.reserve(instances.size());
    for (const auto& i : instances) ids.push_back(i.id);
    return ids;
}

// --- synthesize --------------------------------------------------------------

int cmd_synthesize(const CommonArgs& c, bool replace_flag, std::ostream& out, std::ostream& err) {
    Config config = load_config(c);
    const bool replace = replace_flag || config.pipeline.replace_question;
    auto instances = load_input(c.in, c.format, err);
    auto generator = stage_backend(config, config.pipeline.synthesizer, "synthesizer");
    StageRunner runner(runner_options("synthesize", c, config, replace ? "replace" : "keep"));

    std::atomic<std::size_t> combined{0};
    auto results = runner.run(ids_of(instances), [&](std::size_t i) -> json {
        const auto& inst = instances[i];
        const bool has_subs = std::any_of(inst.guidance.begin(), inst.guidance.end(), [](const auto& g) {
            return g.kind == corpus::GuidanceKind::sub_question;
        });
        if (!has_subs) return corpus::to_json(inst);
        auto q = synthesis::synthesize_combined_question(inst, *generator, config.pipeline.prompts.synthesis);
        ++combined;
        return corpus::to_json(synthesis::apply_combined_question(inst, q, replace));
    });
    if (!results) return interrupted(err, "synthesize");
    corpus::write_jsonl_atomic(c.out, *results);
    runner.finish();
    out << "synthesize: " << results->size() << " instance(s) written, " << combined.load()
        << " combined this run\n";
    return kExitOk;
}

// --- generate-cot --------------------------------------------------------------

int cmd_generate_cot(const CommonArgs& c, std::ostream& out, std::ostream& err) {
    Config config = load_config(c);
    auto instances = load_input(c.in, c.format, err);
    auto generator = stage_backend(config, config.pipeline.generator, "generator");
    std::unique_ptr<backend::ModelBackend> judge_holder;
    const judge::Verifier verifier = make_verifier(config, judge_holder);

    cot::LoopOptions opts;
    opts.max_iters = config.pipeline.max_iters;
    opts.seed = config.pipeline.seed;
    opts.prompts = config.pipeline.prompts;
    opts.decode = stage_decode(config, config.pipeline.generator, 0.7, 2048);

    StageRunner runner(runner_options("generate-cot", c, config, ""));
    auto results = runner.run(ids_of(instances), [&](std::size_t i) -> json {
        return cot::to_json(cot::run_generation_loop(instances[i], *generator, verifier, opts));
    });
    if (!results) return interrupted(err, "generate-cot");
    corpus::write_jsonl_atomic(c.out, *results);
    runner.finish();
    std::size_t verified = 0;
    for (const auto& r : *results) verified += r.at("status") == "verified";
    out << "generate-cot: " << verified << " verified, " << results->size() - verified << " exhausted\n";
    return kExitOk;
}

// --- filter -----------------------------------------------------------------

int cmd_filter(const CommonArgs& c, const std::string& kept_path, std::ostream& out, std::ostream& err) {
    Config config = load_config(c);
    auto instances = load_input(c.in, c.format, err);
    auto model = stage_backend(config, config.pipeline.filter_model, "filter_model");
    std::unique_ptr<backend::ModelBackend> judge_holder;
    const judge::Verifier verifier = make_verifier(config, judge_holder);

    filter::FilterOptions opts;
    auto task = eval::parse_task(config.pipeline.filter_task);
    if (!task) throw ConfigError("pipeline.filter_task names unknown task '" + config.pipeline.filter_task + "'");
    opts.prompt_task = *task;
    opts.decode = stage_decode(config, config.pipeline.filter_model, 0.0, 1024);

    StageRunner runner(runner_options("filter", c, config, ""));
    auto results = runner.run(ids_of(instances), [&](std::size_t i) -> json {
        auto o = filter::filter_one(instances[i], *model, verifier, opts);
        return json{{"disposition", filter::to_string(o.disposition)}, {"answer", o.answer}, {"detail", o.detail}};
    });
    if (!results) return interrupted(err, "filter");

    std::vector<filter::FilterOutcome> outcomes;
    for (std::size_t i = 0; i < instances.size(); ++i) {
        const auto& r = (*results)[i];
        const auto d = r.at("disposition").get<std::string>();
        filter::FilterOutcome o;
        o.instance_id = instances[i].id;
        o.disposition = d == "dropped" ? filter::Disposition::dropped
                        : d == "errored" ? filter::Disposition::errored
                                         : filter::Disposition::kept;
        o.answer = r.at("answer").get<std::string>();
        o.detail = r.at("detail").get<std::string>();
        outcomes.push_back(std::move(o));
    }
    const auto report = filter::reduce(outcomes);
    if (!kept_path.empty()) {
        const std::set<std::string> kept(report.kept.begin(), report.kept.end());
        std::vector<json> lines;
        for (const auto& inst : instances)
            if (kept.count(inst.id)) lines.push_back(corpus::to_json(inst));
        corpus::write_jsonl_atomic(kept_path, lines);
    }
    corpus::write_text_atomic(c.out, filter::to_json(report).dump(2) + "\n");
    runner.finish();
    out << "filter: kept " << report.kept.size() << " (" << report.errored.size() << " errored), dropped "
        << report.dropped.size() << "\n";
    return kExitOk;
}

// --- split ------------------------------------------------------------------

int cmd_split(const CommonArgs& c, std::optional<std::size_t> sft_count_arg, const std::string& records_path,
              const std::string& sft_out, std::ostream& out, std::ostream& err) {
    Config config = load_config(c);
    auto instances = load_input(c.in, c.format, err);
    std::map<std::string, cot::CoTRecord> verified;
    if (!records_path.empty()) {
        for (auto& r : corpus::load_records(records_path))
            if (r.status == cot::Status::verified) verified.emplace(r.instance_id, std::move(r));
        std::erase_if(instances, [&](const auto& inst) { return !verified.count(inst.id); });
    } else if (!sft_out.empty()) {
        throw UsageError("--sft-out needs --records");
    }
    const auto sft_count = sft_count_arg ? sft_count_arg : config.pipeline.sft_count;
    if (!sft_count) throw UsageError("split needs --sft-count or pipeline.sft_count");
    const auto split = corpus::split_corpus(instances, *sft_count, config.pipeline.seed);
    corpus::write_text_atomic(c.out, corpus::to_json(split).dump(2) + "\n");

    if (!sft_out.empty()) {
        std::map<std::string, const corpus::QAInstance*> by_id;
        for (const auto& inst : instances) by_id[inst.id] = &inst;
        std::vector<json> rows;
        for (const auto& id : split.sft) {
            const auto& record = verified.at(id);
            json row;
            row["instance_id"] = id;
            row["prompt"] = cot::preference_prompt(*by_id.at(id), config.pipeline.prompts);
            row["response"] = record.attempts.back().reasoning;
            rows.push_back(std::move(row));
        }
        corpus::write_jsonl_atomic(sft_out, rows);
    }
    out << "split: sft " << split.sft.size() << ", rl " << split.rl.size() << " (seed " << split.seed << ")\n";
    return kExitOk;
}

// --- make-dpo-pairs -----------------------------------------------------------

int cmd_make_dpo_pairs(const CommonArgs& c, const std::string& instances_path, std::ostream& out,
                       std::ostream& err) {
    Config config = load_config(c);
    std::map<std::string, corpus::QAInstance> by_id;
    if (!instances_path.empty())
        for (auto& inst : load_input(instances_path, c.format, err)) by_id.emplace(inst.id, std::move(inst));

    std::vector<json> lines;
    std::size_t candidates = 0;
    for (const auto& record : corpus::load_records(c.in)) {
        if (record.status == cot::Status::verified && record.attempts.size() >= 2) ++candidates;
        std::string prompt;
        if (auto it = by_id.find(record.instance_id); it != by_id.end())
            prompt = cot::preference_prompt(it->second, config.pipeline.prompts);
        if (auto pair = cot::extract_preference_pair(record, prompt)) lines.push_back(cot::to_json(*pair));
    }
    corpus::write_jsonl_atomic(c.out, lines);
    out << "make-dpo-pairs: " << lines.size() << " pair(s) from " << candidates << " multi-attempt verified record(s)\n";
    return kExitOk;
}

// --- score ------------------------------------------------------------------

int cmd_score(const CommonArgs& c, std::ostream& out, std::ostream& err) {
    Config config = load_config(c);
    if (config.pipeline.judge.empty()) throw ConfigError("score needs pipeline.judge for the logic reward");
    std::unique_ptr<backend::ModelBackend> judge_holder;
    const judge::Verifier verifier = make_verifier(config, judge_holder);

    const auto rows = corpus::read_jsonl(c.in);
    std::vector<std::string> ids;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (!r.is_object() || !r.contains("id") || !r.contains("response") || !r.contains("gold"))
            throw corpus::ParseError(i + 1, "score rows need id, gold and response");
        auto id = r["id"].is_string() ? r["id"].get<std::string>() : r["id"].dump();
        if (!seen.insert(id).second) throw corpus::ParseError(i + 1, "duplicate id '" + id + "'");
        ids.push_back(std::move(id));
    }

    StageRunner runner(runner_options("score", c, config, ""));
    std::atomic<std::size_t> flagged{0};
    auto results = runner.run(ids, [&](std::size_t i) -> json {
        const auto& r = rows[i];
        const auto question = r.value("question", std::string{});
        const auto gold = r["gold"].is_string() ? r["gold"].get<std::string>() : r["gold"].dump();
        const auto response = r["response"].get<std::string>();
        const auto tokens = r.value("context_tokens", corpus::estimate_tokens(r.value("context", std::string{})));
        const auto verdict = verifier(response, gold, question);
        const auto logic = reward::logic_reward(response, question, gold, *verifier.judge, config.pipeline.prompts.logic);
        const auto b = reward::grpo_reward(verdict, logic.reward, response, tokens, config.pipeline.reward_weights,
                                           config.pipeline.length_threshold);
        json o;
        o["id"] = r["id"];
        o["r_acc"] = b.r_acc;
        o["r_logic"] = b.r_logic;
        o["r_format"] = b.r_format;
        o["r_length"] = b.r_length;
        o["total"] = b.total;
        if (r.contains("kl") && r["kl"].is_number())
            o["kl_adjusted"] = reward::kl_adjusted_reward(b.total, config.pipeline.kl_beta, r["kl"].get<double>());
        if (logic.flagged) {
            o["logic_flagged"] = true;
            ++flagged;
        }
        return o;
    });
    if (!results) return interrupted(err, "score");
    corpus::write_jsonl_atomic(c.out, *results);
    runner.finish();
    out << "score: " << results->size() << " row(s) scored";
    if (flagged) out << ", " << flagged.load() << " with logic-judge errors";
    out << "\n";
    return kExitOk;
}

// --- eval -------------------------------------------------------------------

struct EvalArgs {
    std::vector<std::string> inputs;
    std::vector<std::string> tasks;
    std::string model_id;
    std::string report_format;
    std::string verdicts;
};

int cmd_eval(CommonArgs c, const EvalArgs& e, std::ostream& out, std::ostream& err) {
    Config config = load_config(c);
    std::vector<std::string> inputs = e.inputs;
    if (inputs.empty()) inputs.push_back(c.in);
    if (e.tasks.size() != inputs.size())
        throw UsageError("eval needs one --task per --in (got " + std::to_string(e.tasks.size()) + " task(s) for " +
                         std::to_string(inputs.size()) + " input(s))");

    struct Item {
        eval::Task task;
        const corpus::QAInstance* instance;
    };
    std::vector<std::vector<corpus::QAInstance>> datasets;
    std::vector<eval::Task> tasks;
    std::string input_digest;
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        auto t = eval::parse_task(e.tasks[k]);
        if (!t) throw UsageError("unknown task '" + e.tasks[k] + "'");
        if (std::find(tasks.begin(), tasks.end(), *t) != tasks.end())
            throw UsageError("task '" + e.tasks[k] + "' given twice");
        tasks.push_back(*t);
        datasets.push_back(load_input(inputs[k], c.format, err));
        if (datasets.back().empty()) throw UsageError("dataset " + inputs[k] + " is empty");
        input_digest += e.tasks[k] + ":" + sha256_hex(file_bytes(inputs[k])) + "\n";
    }
    std::vector<Item> items;
    std::vector<std::string> ids;
    for (std::size_t k = 0; k < datasets.size(); ++k)
        for (const auto& inst : datasets[k]) {
            items.push_back({tasks[k], &inst});
            ids.push_back(std::string(eval::to_string(tasks[k])) + ":" + inst.id);
        }

    auto model = stage_backend(config, config.pipeline.eval_model, "eval_model");
    std::unique_ptr<backend::ModelBackend> judge_holder;
    const judge::Verifier verifier = make_verifier(config, judge_holder);
    const auto decode = stage_decode(config, config.pipeline.eval_model, 0.0, 1024);

    c.in = inputs.front();
    StageRunner runner(runner_options("eval", c, config, input_digest));
    auto results = runner.run(ids, [&](std::size_t i) -> json {
        return eval::to_json(eval::evaluate_instance(eval::task_spec(items[i].task), *items[i].instance, *model,
                                                     verifier, decode));
    });
    if (!results) return interrupted(err, "eval");

    std::vector<eval::EvalResult> per_task;
    std::size_t offset = 0;
    for (std::size_t k = 0; k < datasets.size(); ++k) {
        std::vector<eval::InstanceVerdict> verdicts;
        for (std::size_t i = 0; i < datasets[k].size(); ++i)
            verdicts.push_back(eval::instance_verdict_from_json((*results)[offset + i]));
        offset += datasets[k].size();
        per_task.push_back(eval::summarize(tasks[k], verdicts));
    }
    const std::string model_id = e.model_id.empty() ? model->id() : e.model_id;
    const auto row = eval::aggregate_report(model_id, per_task);

    std::string fmt = e.report_format;
    if (fmt.empty()) fmt = fs::path(c.out).extension() == ".csv" ? "csv" : "markdown";
    if (fmt != "csv" && fmt != "markdown") throw UsageError("--report-format must be markdown or csv");
    const std::vector<eval::ReportRow> rows{row};
    const auto text = eval::render_report(rows, fmt == "csv" ? eval::ReportFormat::csv : eval::ReportFormat::markdown);
    if (!e.verdicts.empty()) corpus::write_jsonl_atomic(e.verdicts, *results);
    corpus::write_text_atomic(c.out, text);
    runner.finish();

    for (const auto& r : per_task)
        out << "eval " << eval::to_string(r.task) << ": " << r.correct << "/" << r.total << " correct ("
            << r.errored << " errored), accuracy " << eval::round_half_up(r.accuracy) << "\n";
    out << text;
    return kExitOk;
}

}  // namespace

void install_signal_handlers() {
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
}

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"forge: chain-of-thought corpus construction, reward scoring and benchmark evaluation"};
    app.name(args.empty() ? "forge" : fs::path(args.front()).filename().string());
    app.require_subcommand(1);

    CommonArgs c;
    bool replace = false;
    std::string kept_path;
    std::optional<std::size_t> sft_count;
    std::string records_path;
    std::string sft_out;
    std::string instances_path;
    EvalArgs e;

    auto* synth = app.add_subcommand("synthesize", "merge expert sub-questions into combined questions");
    add_common(synth, c, true);
    synth->add_option("--format", c.format, "input layout (source name; default: synthetic)");
    synth->add_flag("--replace-question", replace, "overwrite the question instead of storing it in meta");

    auto* gen = app.add_subcommand("generate-cot", "generate, verify and refine reasoning paths");
    add_common(gen, c, true);
    gen->add_option("--format", c.format, "input layout");

    auto* filt = app.add_subcommand("filter", "drop instances the filter model already solves");
    add_common(filt, c, true);
    filt->add_option("--format", c.format, "input layout");
    filt->add_option("--kept", kept_path, "write kept instances as JSONL");

    auto* split = app.add_subcommand("split", "seeded, source-stratified SFT/RL split");
    add_common(split, c, false);
    split->add_option("--format", c.format, "input layout");
    split->add_option("--sft-count", sft_count, "size of the SFT partition");
    split->add_option("--records", records_path, "CoT records; only verified instances are split");
    split->add_option("--sft-out", sft_out, "write SFT rows (prompt, verified reasoning) as JSONL");

    auto* dpo = app.add_subcommand("make-dpo-pairs", "extract chosen/rejected pairs from CoT records");
    add_common(dpo, c, false);
    dpo->add_option("--instances", instances_path, "instances used to rebuild prompts");
    dpo->add_option("--format", c.format, "layout of --instances");

    auto* score = app.add_subcommand("score", "GRPO reward breakdown for (question, gold, response) rows");
    add_common(score, c, true);

    auto* ev = app.add_subcommand("eval", "run a benchmark task and write a report");
    ev->add_option("--config", c.config, "JSON config file")->required();
    ev->add_option("--in", e.inputs, "dataset (repeatable, paired with --task)")->required();
    ev->add_option("--out", c.out, "report path")->required();
    ev->add_flag("--resume", c.resume, "continue from the stage checkpoint");
    ev->add_option("--seed", c.seed, "overrides pipeline.seed");
    ev->add_option("--parallelism", c.parallelism, "worker count")->check(CLI::PositiveNumber);
    ev->add_option("--max-items", c.max_items, "stop after N newly processed items")->group("");
    ev->add_option("--format", c.format, "input layout");
    ev->add_option("--task", e.tasks, "finqa | dm_simplong | dm_complong | xbrl_math (repeatable)")->required();
    ev->add_option("--model-id", e.model_id, "row label in the report");
    ev->add_option("--report-format", e.report_format, "markdown | csv");
    ev->add_option("--verdicts", e.verdicts, "per-instance verdict log (JSONL)");

    if (args.size() > 1 && !args[1].starts_with("-") && app.get_subcommand_no_throw(args[1]) == nullptr) {
        err << "error: unknown subcommand '" << args[1] << "'\n\n" << app.help();
        return kExitUsage;
    }

    std::vector<char*> argv;
    std::vector<std::string> storage = args.empty() ? std::vector<std::string>{"forge"} : args;
    for (auto& a : storage) argv.push_back(a.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& pe) {
        err << "error: " << pe.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    try {
        if (*synth) return cmd_synthesize(c, replace, out, err);
        if (*gen) return cmd_generate_cot(c, out, err);
        if (*filt) return cmd_filter(c, kept_path, out, err);
        if (*split) return cmd_split(c, sft_count, records_path, sft_out, out, err);
        if (*dpo) return cmd_make_dpo_pairs(c, instances_path, out, err);
        if (*score) return cmd_score(c, out, err);
        if (*ev) return cmd_eval(c, e, out, err);
    } catch (const UsageError& ue) {
        err << "error: " << ue.what() << "\n";
        return kExitUsage;
    } catch (const ResumeRefused& rr) {
        err << "refusing to resume: " << rr.what() << "\n";
        return kExitFailure;
    } catch (const ConfigError& ce) {
        err << "config error: " << ce.what() << "\n";
        return kExitFailure;
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << "\n";
        return kExitFailure;
    }
    err << app.help();
    return kExitUsage;
}

}  // namespace forge::cli
