#include <gtest/gtest.h>

#include <cstdlib>
#include <random>

#include "forge/config.hpp"
#include "testutil.hpp"

using namespace forge;
using namespace forge::cli;
using json = nlohmann::json;

namespace {

Config parse(const std::string& text) { return parse_config_json(json::parse(text)); }

std::string error_of(const std::string& text) {
    try {
        parse(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST(ParseConfig, MinimalConfigFillsDefaults) {
    auto c = parse(R"({"backends":{"m":{"type":"mock","default_reply":"x"}}})");
    EXPECT_EQ(c.pipeline.length_threshold, 8192u);
    EXPECT_EQ(c.pipeline.max_iters, 3);
    EXPECT_EQ(c.pipeline.generator, "m");
    EXPECT_EQ(c.pipeline.filter_model, "m");
    EXPECT_TRUE(c.pipeline.judge.empty());
    EXPECT_DOUBLE_EQ(c.pipeline.tolerance.rel_tol, 0.005);
    EXPECT_EQ(c.pipeline.reward_weights, reward::RewardWeights{});
    EXPECT_EQ(c.pipeline.prompts, prompts::defaults());
    EXPECT_EQ(c.backends.at("m").concurrency, 8);
}

TEST(ParseConfig, TypoIsNamed) {
    const auto msg = error_of(R"({"pipeline":{"reward_weights":{"alpa_acc":1}}})");
    EXPECT_NE(msg.find("alpa_acc"), std::string::npos) << msg;
}

TEST(ParseConfig, UnknownKeysAtEveryLevel) {
    EXPECT_NE(error_of(R"({"pipline":{}})").find("pipline"), std::string::npos);
    EXPECT_NE(error_of(R"({"backends":{"m":{"type":"mock","retry":{"max_attempt":2}}}})").find("max_attempt"),
              std::string::npos);
    EXPECT_NE(error_of(R"({"paths":{"inptu":"a"}})").find("inptu"), std::string::npos);
}

TEST(ParseConfig, Overrides) {
    auto c = parse(R"({"pipeline":{"max_iters":5,"seed":11,"tolerance":{"rel_tol":0.01}}})");
    EXPECT_EQ(c.pipeline.max_iters, 5);
    EXPECT_EQ(c.pipeline.seed, 11u);
    EXPECT_DOUBLE_EQ(c.pipeline.tolerance.rel_tol, 0.01);
}

TEST(ParseConfig, DanglingBackendReference) {
    const auto msg = error_of(R"({"backends":{"a":{"type":"mock"},"b":{"type":"mock"}},"pipeline":{"judge":"c"}})");
    EXPECT_NE(msg.find("'c'"), std::string::npos) << msg;
}

TEST(ParseConfig, ValueChecks) {
    EXPECT_FALSE(error_of(R"({"pipeline":{"max_iters":0}})").empty());
    EXPECT_FALSE(error_of(R"({"pipeline":{"length_threshold":0}})").empty());
    EXPECT_FALSE(error_of(R"({"pipeline":{"max_iters":"three"}})").empty());
    EXPECT_FALSE(error_of(R"({"pipeline":{"filter_task":"mmlu"}})").empty());
    EXPECT_FALSE(error_of(R"({"backends":{"h":{"type":"openai"}}})").empty());
    EXPECT_FALSE(error_of(R"({"backends":{"h":{"type":"grpc","model":"x"}}})").empty());
    EXPECT_FALSE(error_of(R"({"backends":{"h":{"type":"mock","retry":{"backoff_factor":0.5}}}})").empty());
}

TEST(ParseConfig, FileErrors) {
    forge::testing::TempDir dir;
    EXPECT_THROW(parse_config(dir / "absent.json"), ConfigError);
    forge::testing::spit(dir / "bad.json", "{");
    EXPECT_THROW(parse_config(dir / "bad.json"), ConfigError);
}

TEST(ConfigRoundTrip, FixedPoint) {
    std::mt19937_64 rng(4);
    for (int i = 0; i < 100; ++i) {
        json j;
        j["backends"]["gen"] = {{"type", "openai"}, {"model", "m" + std::to_string(rng() % 100)},
                                {"base_url", "http://localhost:8000/v1"}};
        if (rng() % 2) j["backends"]["gen"]["temperature"] = (rng() % 20) / 10.0;
        j["backends"]["mock"] = {{"type", "mock"}, {"rules", json::array({{{"match", {"a", "b"}}, {"reply", "r"}}})}};
        if (rng() % 2) j["backends"]["mock"]["default_reply"] = "d";
        j["pipeline"] = {{"generator", "gen"}, {"judge", rng() % 2 ? "mock" : ""}, {"max_iters", 1 + rng() % 6},
                         {"seed", rng()}, {"kl_beta", (rng() % 100) / 1000.0},
                         {"reward_weights", {{"alpha_acc", (rng() % 30) / 10.0}}}};
        if (rng() % 2) j["pipeline"]["sft_count"] = rng() % 10000;
        const Config once = parse_config_json(j);
        const auto text = to_json(once).dump();
        const Config twice = parse_config_json(json::parse(text));
        EXPECT_EQ(once, twice);
        EXPECT_EQ(to_json(twice).dump(), text);
        EXPECT_EQ(config_digest(once), config_digest(twice));
    }
}

TEST(ConfigDigest, SensitiveToSettings) {
    auto a = parse(R"({"pipeline":{"seed":1}})");
    auto b = parse(R"({"pipeline":{"seed":2}})");
    EXPECT_NE(config_digest(a), config_digest(b));
    EXPECT_EQ(config_digest(a).size(), 64u);
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(MakeBackend, MockRulesAndScript) {
    auto c = parse(R"({"backends":{
        "r":{"type":"mock","rules":[{"match":["alpha","beta"],"reply":"both"},{"match":"alpha","reply":"one"},
                                    {"match":"down","fail":true}]},
        "s":{"type":"mock","script":["first","second"]}}})");
    auto r = make_backend(c, "r");
    auto ask = [&](const std::string& p) {
        backend::GenerationRequest q;
        q.user_prompt = p;
        return r->complete(q).text;
    };
    EXPECT_EQ(ask("alpha and beta"), "both");
    EXPECT_EQ(ask("alpha only"), "one");
    EXPECT_THROW(ask("down"), backend::BackendError);
    EXPECT_THROW(ask("nothing"), backend::BackendError);

    auto s = make_backend(c, "s");
    backend::GenerationRequest q;
    q.user_prompt = "x";
    EXPECT_EQ(s->complete(q).text, "first");
    EXPECT_EQ(s->complete(q).text, "second");
    EXPECT_THROW(make_backend(c, "missing"), ConfigError);
}

TEST(MakeBackend, CredentialComesFromEnvironment) {
    auto c = parse(R"({"backends":{"h":{"type":"openai","model":"gpt","base_url":"http://example.invalid/v1","retry":{"max_attempts":5}}}})");
    ::setenv("FORGE_API_KEY", "sk-env", 1);
    ::unsetenv("FORGE_BASE_URL");
    auto b = make_backend(c, "h");
    auto* http = dynamic_cast<backend::HttpBackend*>(b.get());
    ASSERT_NE(http, nullptr);
    EXPECT_EQ(http->config().api_key, "sk-env");
    EXPECT_EQ(http->config().retry.max_attempts, 5);
    EXPECT_EQ(http->config().base_url, "http://example.invalid/v1");
    ::setenv("FORGE_BASE_URL", "http://override:1", 1);
    auto o = make_backend(c, "h");
    EXPECT_EQ(dynamic_cast<backend::HttpBackend*>(o.get())->config().base_url, "http://override:1");
    ::unsetenv("FORGE_BASE_URL");
    ::unsetenv("FORGE_API_KEY");
}

TEST(ParseConfig, ApiKeyIsNotAConfigField) {
    EXPECT_NE(error_of(R"({"backends":{"h":{"type":"openai","model":"m","api_key":"sk"}}})").find("api_key"),
              std::string::npos);
}
