#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>

#include "forge/corpus.hpp"

namespace forge::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("forge-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

// Synthetic instances cycling through the real sources. Every third one
// carries two sub-questions, every third a program step, the rest nothing.
inline std::vector<corpus::QAInstance> synthetic_corpus(std::size_t n, std::uint64_t seed = 1) {
    static const corpus::Source kSources[] = {corpus::Source::finqa, corpus::Source::convfinqa,
                                              corpus::Source::tatqa, corpus::Source::docmath,
                                              corpus::Source::bizbench};
    std::mt19937_64 rng(seed);
    std::vector<corpus::QAInstance> out;
    for (std::size_t i = 0; i < n; ++i) {
        corpus::QAInstance inst;
        inst.id = "syn-" + std::to_string(i);
        inst.source = kSources[i % 5];
        const auto a = 100 + rng() % 900;
        const auto b = 100 + rng() % 900;
        inst.context_text = "| year | value |\n| 2008 | " + std::to_string(a) + " |\n| 2009 | " +
                            std::to_string(b) + " |";
        inst.question = "item " + std::to_string(i) + ": what is the sum of the values?";
        inst.gold_answer = std::to_string(a + b);
        if (i % 3 == 0) {
            inst.guidance = {{corpus::GuidanceKind::sub_question, "What is the 2008 value?"},
                             {corpus::GuidanceKind::sub_question, "What is the 2009 value?"}};
        } else if (i % 3 == 1) {
            inst.guidance = {{corpus::GuidanceKind::program_step,
                              "add(" + std::to_string(a) + ", " + std::to_string(b) + ")"}};
        }
        inst.context_token_count = corpus::estimate_tokens(inst.context_text);
        out.push_back(std::move(inst));
    }
    return out;
}

}  // namespace forge::testing
