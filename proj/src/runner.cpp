#include "forge/runner.hpp"

#include <fstream>
#include <map>
#include <mutex>

#include "forge/corpus.hpp"
#include "forge/pool.hpp"

namespace forge::cli {

using json = nlohmann::ordered_json;

json to_json(const Checkpoint& c) {
    json j;
    j["run_id"] = c.run_id;
    j["stage"] = c.stage;
    j["config_digest"] = c.config_digest;
    j["completed_ids"] = c.completed_ids;
    return j;
}

Checkpoint checkpoint_from_json(const json& j) {
    Checkpoint c;
    c.run_id = j.at("run_id").get<std::string>();
    c.stage = j.at("stage").get<std::string>();
    c.config_digest = j.at("config_digest").get<std::string>();
    for (const auto& id : j.at("completed_ids")) c.completed_ids.insert(id.get<std::string>());
    return c;
}

StageRunner::StageRunner(RunnerOptions options) : options_(std::move(options)) {}

std::optional<std::vector<json>> StageRunner::run(const std::vector<std::string>& ids, const Work& work) {
    namespace fs = std::filesystem;
    std::map<std::string, json> done;
    Checkpoint ckpt{options_.run_id, options_.stage, options_.digest, {}};

    if (options_.resume && fs::exists(options_.checkpoint_path)) {
        Checkpoint prior;
        try {
            std::ifstream in(options_.checkpoint_path);
            prior = checkpoint_from_json(json::parse(in));
        } catch (const std::exception& e) {
            throw ResumeRefused("checkpoint " + options_.checkpoint_path.string() + " is unreadable: " + e.what());
        }
        if (prior.stage != options_.stage || prior.run_id != options_.run_id)
            throw ResumeRefused("checkpoint belongs to run '" + prior.run_id + "' (stage " + prior.stage +
                                "), not '" + options_.run_id + "'");
        if (prior.config_digest != options_.digest)
            throw ResumeRefused("configuration or input changed since the checkpoint was written (digest " +
                                prior.config_digest.substr(0, 12) + " vs " + options_.digest.substr(0, 12) +
                                "); rerun without --resume to start over");
        // Only ids named by the checkpoint count; later partial lines are redone.
        if (std::ifstream in(options_.partial_path); in) {
            std::string line;
            while (std::getline(in, line)) {
                json entry;
                try {
                    entry = json::parse(line);
                } catch (const json::parse_error&) {
                    break;  // torn final line
                }
                const auto id = entry.at("id").get<std::string>();
                if (prior.completed_ids.count(id)) done[id] = entry.at("result");
            }
        }
        for (const auto& [id, _] : done) ckpt.completed_ids.insert(id);
    } else {
        std::error_code ec;
        fs::remove(options_.checkpoint_path, ec);
        fs::remove(options_.partial_path, ec);
    }
    resumed_ = done.size();

    // Rewrite the partial file so it holds exactly the checkpointed entries.
    if (options_.checkpoint_path.has_parent_path()) fs::create_directories(options_.checkpoint_path.parent_path());
    {
        std::ofstream out(options_.partial_path, std::ios::trunc);
        for (const auto& [id, result] : done) out << json{{"id", id}, {"result", result}}.dump() << '\n';
    }
    auto write_checkpoint = [&] {
        corpus::write_text_atomic(options_.checkpoint_path, to_json(ckpt).dump(2) + "\n");
    };
    write_checkpoint();

    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < ids.size(); ++i)
        if (!done.count(ids[i])) todo.push_back(i);

    std::ofstream partial(options_.partial_path, std::ios::app);
    std::mutex writer;
    std::atomic<bool> stop{false};
    std::size_t finished = 0;
    std::size_t unflushed = 0;

    auto cancelled = [&] {
        return stop.load() || (options_.interrupt && options_.interrupt->load());
    };
    std::atomic<bool> cancel_flag{false};

    auto process = [&](std::size_t k) {
        if (cancelled()) {
            cancel_flag.store(true);
            return;
        }
        const std::size_t i = todo[k];
        json result = work(i);
        std::lock_guard lock(writer);
        partial << json{{"id", ids[i]}, {"result", result}}.dump() << '\n';
        partial.flush();
        done[ids[i]] = std::move(result);
        ckpt.completed_ids.insert(ids[i]);
        ++finished;
        if (++unflushed >= options_.flush_every) {
            write_checkpoint();
            unflushed = 0;
        }
        if (options_.max_items && finished >= *options_.max_items) stop.store(true);
        if (cancelled()) cancel_flag.store(true);
    };
    try {
        parallel_for(todo.size(), std::max<std::size_t>(1, options_.parallelism), process, &cancel_flag);
    } catch (...) {
        partial.close();
        write_checkpoint();
        throw;
    }
    partial.close();
    write_checkpoint();

    if (done.size() < ids.size()) return std::nullopt;
    std::vector<json> results;
    results.reserve(ids.size());
    for (const auto& id : ids) results.push_back(done.at(id));
    return results;
}

void StageRunner::finish() {
    std::error_code ec;
    std::filesystem::remove(options_.checkpoint_path, ec);
    std::filesystem::remove(options_.partial_path, ec);
}

}  // namespace forge::cli
