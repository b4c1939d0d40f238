#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "forge/difficultyfilter.hpp"
#include "testutil.hpp"

using namespace forge;
using filter::Disposition;

namespace {

enum class Plan { correct, wrong, prose, down };

// Planted filter model: instance i answers according to plans[i].
struct PlantedModel {
    std::vector<corpus::QAInstance> instances;
    std::vector<Plan> plans;

    std::size_t index_of(const std::string& prompt) const {
        const auto at = prompt.find("item ");
        return std::stoul(prompt.substr(at + 5));
    }

    backend::ResponderBackend backend() const {
        return backend::ResponderBackend([this](const backend::GenerationRequest& r) -> backend::ScriptEntry {
            const auto i = index_of(r.user_prompt);
            const auto& gold = instances[i].gold_answer;
            switch (plans[i]) {
            case Plan::correct: return "Adding both rows. Therefore, the answer is " + gold + ".";
            case Plan::wrong: return "Therefore, the answer is " + std::to_string(std::stol(gold) * 2 + 1) + ".";
            case Plan::prose: return "The rows cannot be added.";
            case Plan::down: return backend::ScriptedFailure{backend::ErrorKind::retries_exhausted, "503 x3"};
            }
            return "";
        }, "planted");
    }
};

PlantedModel planted(std::size_t n, std::uint64_t seed) {
    PlantedModel m;
    m.instances = forge::testing::synthetic_corpus(n, seed);
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < n; ++i) m.plans.push_back(static_cast<Plan>(rng() % 4));
    return m;
}

}  // namespace

TEST(FilterOne, SolvedInstanceIsDropped) {
    auto inst = forge::testing::synthetic_corpus(1)[0];
    auto model = backend::make_scripted_backend({"Therefore, the answer is " + inst.gold_answer + "."});
    auto o = filter::filter_one(inst, *model, {});
    EXPECT_EQ(o.disposition, Disposition::dropped);
    EXPECT_EQ(model->requests().at(0).temperature, 0.0);
    EXPECT_EQ(model->requests()[0].user_prompt.rfind("Please answer the given financial question based on the context.", 0), 0u);
}

TEST(FilterOne, WrongNumberIsKept) {
    auto inst = forge::testing::synthetic_corpus(1)[0];
    auto model = backend::make_scripted_backend({"Therefore, the answer is 1."});
    EXPECT_EQ(filter::filter_one(inst, *model, {}).disposition, Disposition::kept);
}

TEST(FilterOne, BackendFailureIsKeptAndFlagged) {
    auto inst = forge::testing::synthetic_corpus(1)[0];
    auto model = backend::make_scripted_backend({});
    auto o = filter::filter_one(inst, *model, {});
    EXPECT_EQ(o.disposition, Disposition::errored);
    auto report = filter::reduce(std::vector<filter::FilterOutcome>{o});
    EXPECT_EQ(report.kept, std::vector<std::string>{inst.id});
    EXPECT_EQ(report.errored, std::vector<std::string>{inst.id});
}

TEST(FilterOne, JudgeErrorIsKeptAndFlagged) {
    auto inst = forge::testing::synthetic_corpus(1)[0];
    auto model = backend::make_scripted_backend({"No idea."});
    auto judge_down = backend::make_scripted_backend({});
    judge::Verifier v;
    v.judge = judge_down.get();
    EXPECT_EQ(filter::filter_one(inst, *model, v).disposition, Disposition::errored);
}

TEST(FilterByDifficulty, OracleEquivalenceOver200Instances) {
    const auto m = planted(200, 11);
    auto model = m.backend();
    const auto report = filter::filter_by_difficulty(m.instances, model, {}, {.parallelism = 4});

    // Independent pass: kept is everything the planted answer does not solve.
    std::set<std::string> want_kept, want_dropped, want_errored;
    for (std::size_t i = 0; i < m.instances.size(); ++i) {
        const auto& id = m.instances[i].id;
        if (m.plans[i] == Plan::correct)
            want_dropped.insert(id);
        else
            want_kept.insert(id);
        if (m.plans[i] == Plan::down) want_errored.insert(id);
    }
    EXPECT_EQ(std::set<std::string>(report.kept.begin(), report.kept.end()), want_kept);
    EXPECT_EQ(std::set<std::string>(report.dropped.begin(), report.dropped.end()), want_dropped);
    EXPECT_EQ(std::set<std::string>(report.errored.begin(), report.errored.end()), want_errored);
    EXPECT_EQ(model.call_count(), 200u);

    // Partition.
    std::set<std::string> all;
    for (const auto& i : m.instances) all.insert(i.id);
    std::set<std::string> u(report.kept.begin(), report.kept.end());
    for (const auto& id : report.dropped) {
        EXPECT_FALSE(u.count(id));
        u.insert(id);
    }
    EXPECT_EQ(u, all);
    EXPECT_EQ(report.kept.size() + report.dropped.size(), 200u);
}

TEST(FilterByDifficulty, IdempotentOnKeptSet) {
    const auto m = planted(120, 5);
    auto model = m.backend();
    const auto first = filter::filter_by_difficulty(m.instances, model, {});
    const std::set<std::string> kept(first.kept.begin(), first.kept.end());
    std::vector<corpus::QAInstance> survivors;
    for (const auto& i : m.instances)
        if (kept.count(i.id)) survivors.push_back(i);
    const auto second = filter::filter_by_difficulty(survivors, model, {});
    EXPECT_EQ(second.kept, first.kept);
    EXPECT_TRUE(second.dropped.empty());
}

TEST(FilterByDifficulty, ParallelismDoesNotChangeReport) {
    const auto m = planted(80, 8);
    auto model = m.backend();
    const auto a = filter::filter_by_difficulty(m.instances, model, {}, {.parallelism = 1});
    const auto b = filter::filter_by_difficulty(m.instances, model, {}, {.parallelism = 4});
    EXPECT_EQ(filter::to_json(a), filter::to_json(b));
}

TEST(FilterReport, JsonKeys) {
    const auto m = planted(6, 2);
    auto model = m.backend();
    const auto j = filter::to_json(filter::filter_by_difficulty(m.instances, model, {}));
    std::vector<std::string> keys;
    for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
    EXPECT_EQ(keys, (std::vector<std::string>{"kept", "dropped", "errored", "attempts"}));
}
