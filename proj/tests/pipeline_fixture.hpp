#pragma once

#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "forge/cli.hpp"
#include "testutil.hpp"

namespace forge::testing {

struct CliResult {
    int code = 0;
    std::string out;
    std::string err;
};

inline CliResult forge_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "forge");
    std::ostringstream out, err;
    CliResult r;
    r.code = cli::run_command(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

// Mock backends for a synthetic corpus built by synthetic_corpus(n):
//   generator: i%4==0 right first time, i%4==1 right after one refinement,
//              otherwise always wrong;
//   filter model: solves i%3==0, misses the rest.
inline nlohmann::json pipeline_config(std::size_t n, std::uint64_t seed, std::size_t parallelism) {
    const auto corpus = synthetic_corpus(n);
    nlohmann::json gen_rules = nlohmann::json::array();
    nlohmann::json filter_rules = nlohmann::json::array();
    for (std::size_t i = 0; i < n; ++i) {
        const std::string tag = "item " + std::to_string(i) + ":";
        const std::string right = "Adding the two rows of the table. Therefore, the answer is " + corpus[i].gold_answer + ".";
        const std::string wrong = "Subtracting the rows instead. Therefore, the answer is 1.";
        if (i % 4 == 0) {
            gen_rules.push_back({{"match", {tag}}, {"reply", right}});
        } else if (i % 4 == 1) {
            gen_rules.push_back({{"match", {"Previous reasoning", tag}}, {"reply", right}});
            gen_rules.push_back({{"match", {tag}}, {"reply", wrong}});
        }
        if (i % 3 == 0) filter_rules.push_back({{"match", {tag}}, {"reply", right}});
    }
    nlohmann::json c;
    c["backends"]["synth"] = {{"type", "mock"},
                              {"rules", {{{"match", {"Merge these sub-questions"}},
                                          {"reply", "What are the 2008 and 2009 values and their sum?"}}}}};
    c["backends"]["gen"] = {{"type", "mock"}, {"rules", gen_rules},
                            {"default_reply", "Guessing. Therefore, the answer is 2."}};
    c["backends"]["filter"] = {{"type", "mock"}, {"rules", filter_rules},
                               {"default_reply", "Therefore, the answer is 3."}};
    c["pipeline"] = {{"synthesizer", "synth"}, {"generator", "gen"}, {"filter_model", "filter"},
                     {"eval_model", "gen"},    {"seed", seed},       {"parallelism", parallelism},
                     {"max_iters", 3}};
    return c;
}

inline void save_instances_for(const TempDir& dir, std::size_t n) {
    corpus::save_instances(synthetic_corpus(n), dir / "corpus.jsonl");
}

struct PipelineOutputs {
    std::string synthesized, records, filter_report, kept, split, sft, pairs;
    std::vector<int> codes;
};

// synthesize -> generate-cot -> filter -> split -> make-dpo-pairs inside `dir`.
// With `interrupt_after`, every checkpointed stage is first stopped after that
// many items and then resumed.
inline PipelineOutputs run_pipeline(const TempDir& dir, std::size_t n, std::uint64_t seed, std::size_t parallelism,
                                    std::optional<std::size_t> interrupt_after = std::nullopt) {
    save_instances_for(dir, n);
    spit(dir / "config.json", pipeline_config(n, seed, parallelism).dump(2));
    const std::string cfg = (dir / "config.json").string();
    auto p = [&](const std::string& name) { return (dir / name).string(); };

    PipelineOutputs o;
    auto stage = [&](std::vector<std::string> args) {
        if (interrupt_after) {
            auto first = args;
            first.push_back("--max-items");
            first.push_back(std::to_string(*interrupt_after));
            o.codes.push_back(forge_cli(first).code);
            args.push_back("--resume");
        }
        o.codes.push_back(forge_cli(args).code);
    };
    stage({"synthesize", "--config", cfg, "--in", p("corpus.jsonl"), "--out", p("synth.jsonl")});
    stage({"generate-cot", "--config", cfg, "--in", p("synth.jsonl"), "--out", p("records.jsonl")});
    stage({"filter", "--config", cfg, "--in", p("synth.jsonl"), "--out", p("filter.json"), "--kept", p("kept.jsonl")});
    o.codes.push_back(forge_cli({"split", "--config", cfg, "--in", p("kept.jsonl"), "--out", p("split.json"),
                                 "--records", p("records.jsonl"), "--sft-count", "5", "--sft-out", p("sft.jsonl")})
                          .code);
    o.codes.push_back(forge_cli({"make-dpo-pairs", "--config", cfg, "--in", p("records.jsonl"), "--out",
                                 p("pairs.jsonl"), "--instances", p("synth.jsonl")})
                          .code);
    o.synthesized = slurp(dir / "synth.jsonl");
    o.records = slurp(dir / "records.jsonl");
    o.filter_report = slurp(dir / "filter.json");
    o.kept = slurp(dir / "kept.jsonl");
    o.split = slurp(dir / "split.json");
    o.sft = slurp(dir / "sft.jsonl");
    o.pairs = slurp(dir / "pairs.jsonl");
    return o;
}

inline bool same_outputs(const PipelineOutputs& a, const PipelineOutputs& b) {
    return a.synthesized == b.synthesized && a.records == b.records && a.filter_report == b.filter_report &&
           a.kept == b.kept && a.split == b.split && a.sft == b.sft && a.pairs == b.pairs;
}

}  // namespace forge::testing
