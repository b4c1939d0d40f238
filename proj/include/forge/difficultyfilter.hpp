#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "forge/answerjudge.hpp"
#include "forge/backend.hpp"
#include "forge/corpus.hpp"
#include "forge/evalharness.hpp"

namespace forge::filter {

enum class Disposition { kept, dropped, errored };

std::string_view to_string(Disposition d);

struct FilterOutcome {
    std::string instance_id;
    Disposition disposition = Disposition::kept;
    std::string answer;  // empty when the filter model never answered
    std::string detail;
};

struct FilterReport {
    std::vector<std::string> kept;     // includes errored ids
    std::vector<std::string> dropped;
    std::vector<std::string> errored;
    std::map<std::string, std::string> attempts;
};

struct FilterOptions {
    eval::Task prompt_task = eval::Task::finqa;
    backend::GenerationRequest decode = eval::default_decode();
    std::size_t parallelism = 1;
};

/// One zero-shot attempt by the filter model. Solved instances are dropped;
/// any backend or judge error keeps the instance and flags it.
FilterOutcome filter_one(const corpus::QAInstance& instance, backend::ModelBackend& filter_model,
                         const judge::Verifier& verifier, const FilterOptions& options = {});

/// Folds per-instance outcomes into a report, in the given order.
FilterReport reduce(std::span<const FilterOutcome> outcomes);

FilterReport filter_by_difficulty(std::span<const corpus::QAInstance> instances, backend::ModelBackend& filter_model,
                                  const judge::Verifier& verifier, const FilterOptions& options = {});

nlohmann::ordered_json to_json(const FilterReport& report);

}  // namespace forge::filter
