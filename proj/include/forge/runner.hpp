#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace forge::cli {

struct Checkpoint {
    std::string run_id;
    std::string stage;
    std::string config_digest;
    std::set<std::string> completed_ids;

    bool operator==(const Checkpoint&) const = default;
};

nlohmann::ordered_json to_json(const Checkpoint& c);
Checkpoint checkpoint_from_json(const nlohmann::ordered_json& j);

class ResumeRefused : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunnerOptions {
    std::string run_id;
    std::string stage;
    std::string digest;
    std::filesystem::path checkpoint_path;
    std::filesystem::path partial_path;
    bool resume = false;
    std::size_t parallelism = 1;
    // Stop after this many newly finished items, as if interrupted.
    std::optional<std::size_t> max_items;
    const std::atomic<bool>* interrupt = nullptr;
    std::size_t flush_every = 16;
};

/// Fans per-item work out over a bounded pool and keeps a per-instance
/// checkpoint so an interrupted stage can be resumed. Results come back in
/// input order regardless of completion order.
class StageRunner {
public:
    using Work = std::function<nlohmann::ordered_json(std::size_t index)>;

    explicit StageRunner(RunnerOptions options);

    /// Returns all results, or nullopt when the run stopped early (the
    /// checkpoint is flushed first). Throws ResumeRefused on digest mismatch.
    std::optional<std::vector<nlohmann::ordered_json>> run(const std::vector<std::string>& ids, const Work& work);

    /// Removes checkpoint and partial files once the final output is in place.
    void finish();

    std::size_t resumed_count() const { return resumed_; }

private:
    RunnerOptions options_;
    std::size_t resumed_ = 0;
};

}  // namespace forge::cli
