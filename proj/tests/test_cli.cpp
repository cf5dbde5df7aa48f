#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "carepipe/cli.hpp"
#include "carepipe/synth.hpp"
#include "carepipe/time_utc.hpp"

using namespace carepipe;
using namespace carepipe::cli;

namespace {

Registries registries_for(const synth::GeneratedCorpus& corpus) {
    return {ResidentRegistry(corpus.residents), CategoryTaxonomy(corpus.categories)};
}

Store fresh_store(const std::string& path) {
    std::remove(path.c_str());
    return Store(path);
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    REQUIRE(out.good());
    out << content;
}

bool has_prefix(const std::string& s, const std::string& prefix) {
    return s.rfind(prefix, 0) == 0;
}

template <class F>
ConfigError::Kind config_error_kind(F&& f) {
    try {
        std::forward<F>(f)();
    } catch (const ConfigError& e) {
        return e.kind;
    }
    REQUIRE_MESSAGE(false, "expected a ConfigError");
    return ConfigError::Kind::BadValue;
}

// The generated 40-transcript corpus holds exactly one ambiguous-name and
// one underspecified-time item; these tests script answers for both.
struct InteractiveEnv {
    synth::GeneratedCorpus generated;
    Registries registries;
    std::vector<const Transcript*> prompters;  // in replay order

    InteractiveEnv()
        : generated(synth::generate_corpus(
              synth::CorpusSpec{40, 0.5, 0.1, 11, make_utc(2025, 3, 1, 9, 0, 0)})),
          registries(registries_for(generated)) {
        for (const Transcript& t : generated.transcripts)
            if (has_prefix(t.id, "t-amb-") || has_prefix(t.id, "t-und-"))
                prompters.push_back(&t);
        REQUIRE(prompters.size() == 2);
        std::sort(prompters.begin(), prompters.end(), [](const Transcript* a, const Transcript* b) {
            if (a->spoken_at != b->spoken_at) return a->spoken_at < b->spoken_at;
            return a->id < b->id;
        });
    }

    std::string answer_for(const Transcript& t) const {
        if (has_prefix(t.id, "t-amb-")) return "resident=" + t.truth->resident_id + "\n";
        return "time=2025-06-01T09:00Z\n";
    }

    std::size_t replay_position(const std::string& id) const {
        std::vector<const Transcript*> sorted;
        for (const Transcript& t : generated.transcripts) sorted.push_back(&t);
        std::sort(sorted.begin(), sorted.end(), [](const Transcript* a, const Transcript* b) {
            if (a->spoken_at != b->spoken_at) return a->spoken_at < b->spoken_at;
            return a->id < b->id;
        });
        for (std::size_t i = 0; i < sorted.size(); ++i)
            if (sorted[i]->id == id) return i;
        REQUIRE(false);
        return 0;
    }
};

}  // namespace

TEST_CASE("config defaults are valid and cover every key") {
    const Config c;
    CHECK(c.store == "carepipe-store.jsonl");
    CHECK(c.corpus.empty());
    CHECK(c.case_definition.empty());
    CHECK(c.fuzzy_threshold == 0.8);
    CHECK(c.tie_tolerance == 0.05);
    CHECK(c.gate_threshold == 0.7);
    CHECK(c.k1 == 1.2);
    CHECK(c.b == 0.75);
    CHECK(c.rrf_k == 60.0);
    CHECK(c.embedding_dim == 256);
    CHECK(c.min_similarity == 0.3);
    CHECK(c.delta == 0.05);
    CHECK(c.tau_ms == 2000.0);
    CHECK(c.seed == 42);
    CHECK_FALSE(c.confirm_on_fire);
    CHECK_NOTHROW(validate(c));
    CHECK(config_keys().size() == 17);
}

TEST_CASE("file, environment, and flag layers merge with flags winning") {
    const std::string path = "/tmp/carepipe-cli-config.json";
    write_file(path, R"({"gate_threshold": 0.8, "store": "file-store.jsonl", "seed": 7})");
    Config c = load_config_file(path);
    CHECK(c.gate_threshold == 0.8);
    CHECK(c.store == "file-store.jsonl");
    CHECK(c.seed == 7);
    CHECK(c.k1 == 1.2);

    const std::map<std::string, std::string> env = {
        {"CAREPIPE_GATE_THRESHOLD", "0.9"},
        {"CAREPIPE_CORPUS", "env-corpus.jsonl"},
        {"CAREPIPE_CONFIRM_ON_FIRE", "true"},
    };
    apply_env(c, [&](const std::string& name) -> const char* {
        const auto it = env.find(name);
        return it == env.end() ? nullptr : it->second.c_str();
    });
    CHECK(c.gate_threshold == 0.9);
    CHECK(c.corpus == "env-corpus.jsonl");
    CHECK(c.confirm_on_fire);
    CHECK(c.store == "file-store.jsonl");

    apply_override(c, "gate_threshold", "0.65");
    apply_override(c, "embedding_dim", "64");
    CHECK(c.gate_threshold == 0.65);
    CHECK(c.embedding_dim == 64);
    CHECK(c.seed == 7);
    CHECK_NOTHROW(validate(c));
}

TEST_CASE("bad configuration is rejected with the offending kind") {
    Config c;

    SUBCASE("unknown keys") {
        CHECK(config_error_kind([&] { apply_override(c, "gaet_threshold", "0.8"); }) ==
              ConfigError::Kind::UnknownKey);
        CHECK(config_error_kind([&] {
                  apply_config_text(c, R"({"gate_treshold": 0.8})", "inline");
              }) == ConfigError::Kind::UnknownKey);
    }
    SUBCASE("malformed files") {
        CHECK(config_error_kind([&] { apply_config_text(c, "{not json", "inline"); }) ==
              ConfigError::Kind::MalformedFile);
        CHECK(config_error_kind([&] { apply_config_text(c, "[1, 2]", "inline"); }) ==
              ConfigError::Kind::MalformedFile);
        CHECK(config_error_kind([] { load_config_file("/nonexistent/carepipe.json"); }) ==
              ConfigError::Kind::FileUnreadable);
    }
    SUBCASE("out-of-range values") {
        for (const auto& [key, value] :
             std::vector<std::pair<std::string, std::string>>{{"gate_threshold", "1.5"},
                                                              {"fuzzy_threshold", "-0.1"},
                                                              {"tie_tolerance", "2"},
                                                              {"k1", "0"},
                                                              {"b", "-0.1"},
                                                              {"rrf_k", "-60"},
                                                              {"embedding_dim", "0"},
                                                              {"min_similarity", "1.01"},
                                                              {"delta", "2"},
                                                              {"tau_ms", "0"}}) {
            CAPTURE(key);
            CHECK(config_error_kind([&] { apply_override(c, key, value); }) ==
                  ConfigError::Kind::BadValue);
        }
    }
    SUBCASE("unparseable values") {
        CHECK(config_error_kind([&] { apply_override(c, "seed", "abc"); }) ==
              ConfigError::Kind::BadValue);
        CHECK(config_error_kind([&] { apply_override(c, "seed", "-3"); }) ==
              ConfigError::Kind::BadValue);
        CHECK(config_error_kind([&] { apply_override(c, "confirm_on_fire", "maybe"); }) ==
              ConfigError::Kind::BadValue);
        CHECK(config_error_kind([&] { apply_override(c, "tau_ms", "1s"); }) ==
              ConfigError::Kind::BadValue);
    }
    SUBCASE("validate re-checks directly assigned fields") {
        Config broken;
        broken.delta = 3.0;
        CHECK(config_error_kind([&] { validate(broken); }) == ConfigError::Kind::BadValue);
    }
    SUBCASE("a bad environment value names its variable's key") {
        const auto kind = config_error_kind([&] {
            apply_env(c, [](const std::string& name) -> const char* {
                return name == "CAREPIPE_SEED" ? "not-a-seed" : nullptr;
            });
        });
        CHECK(kind == ConfigError::Kind::BadValue);
    }
}

TEST_CASE("derived module configs share the merged thresholds") {
    Config c;
    apply_override(c, "gate_threshold", "0.55");
    apply_override(c, "fuzzy_threshold", "0.75");
    apply_override(c, "tie_tolerance", "0.1");
    apply_override(c, "confirm_on_fire", "true");
    apply_override(c, "delta", "0.02");
    apply_override(c, "tau_ms", "500");
    apply_override(c, "k1", "1.6");
    apply_override(c, "b", "0.5");

    const parser::ParserConfig p = parser_config(c);
    CHECK(p.gate_threshold == 0.55);
    CHECK(p.fuzzy_threshold == 0.75);
    CHECK(p.tie_tolerance == 0.1);

    const scheduler::SchedulerConfig s = scheduler_config(c);
    CHECK(s.gate_threshold == 0.55);
    CHECK(s.confirm_on_fire);

    const pipeline::ReplayConfig r = replay_config(c);
    CHECK(r.budget.delta == 0.02);
    CHECK(r.budget.tau_ms == 500.0);
    CHECK(r.scheduler.gate_threshold == 0.55);
    CHECK(r.scheduler.confirm_on_fire);

    const retrieval::Bm25Params bm = bm25_params(c);
    CHECK(bm.k1 == 1.6);
    CHECK(bm.b == 0.5);
}

TEST_CASE("clarification answers follow the documented grammar") {
    CHECK(std::get<ResidentAnswer>(parse_answer("resident=r-amara-okafor")).resident_id ==
          "r-amara-okafor");
    CHECK(std::get<TimeAnswer>(parse_answer("time=2025-03-01T14:00Z")).time ==
          make_utc(2025, 3, 1, 14, 0, 0));
    CHECK(std::get<TimeAnswer>(parse_answer("  time=2025-03-01T14:00:30Z  ")).time ==
          make_utc(2025, 3, 1, 14, 0, 30));
    CHECK(std::holds_alternative<SkipAnswer>(parse_answer("  skip  ")));

    CHECK_THROWS_AS(parse_answer(""), MalformedAnswer);
    CHECK_THROWS_AS(parse_answer("resident="), MalformedAnswer);
    CHECK_THROWS_AS(parse_answer("time=tomorrow"), MalformedAnswer);
    CHECK_THROWS_AS(parse_answer("Skip"), MalformedAnswer);
    CHECK_THROWS_AS(parse_answer("category=c-medication"), MalformedAnswer);
}

TEST_CASE("scripted answers resolve every clarification") {
    const InteractiveEnv env;
    std::string script;
    for (const Transcript* t : env.prompters) script += env.answer_for(*t);

    std::istringstream answers(script);
    std::ostringstream prompts;
    Store store = fresh_store("/tmp/carepipe-cli-interactive.jsonl");
    const pipeline::ReplayReport report = interactive_replay(
        env.generated.transcripts, env.registries, store, answers, prompts, Config{});

    CHECK(report.dispositions.completed == 40);
    CHECK(report.dispositions.clarification_requested == 0);
    CHECK(report.dispositions.rejected == 0);
    CHECK(prompts.str().find("needs resident") != std::string::npos);
    CHECK(prompts.str().find("needs time") != std::string::npos);
    CHECK(prompts.str().find("candidates: ") != std::string::npos);
    for (const Transcript* t : env.prompters)
        CHECK(store.get_record("rec-" + t->id).has_value());

    // the answered underspecified reminder now schedules one event the
    // batch truth did not expect, and nothing else deviates
    CHECK(report.mean_error == doctest::Approx(1.0 / 40).epsilon(1e-12));

    std::istringstream answers_again(script);
    std::ostringstream prompts_again;
    Store store_again = fresh_store("/tmp/carepipe-cli-interactive-2.jsonl");
    const pipeline::ReplayReport report_again = interactive_replay(
        env.generated.transcripts, env.registries, store_again, answers_again, prompts_again,
        Config{});
    CHECK(pipeline::serialize_report(report) == pipeline::serialize_report(report_again));
    CHECK(prompts.str() == prompts_again.str());
}

TEST_CASE("skip leaves the deferral exactly as the batch replay records it") {
    const InteractiveEnv env;
    std::istringstream answers("skip\nskip\n");
    std::ostringstream prompts;
    Store interactive_store = fresh_store("/tmp/carepipe-cli-skip.jsonl");
    const pipeline::ReplayReport skipped = interactive_replay(
        env.generated.transcripts, env.registries, interactive_store, answers, prompts, Config{});
    CHECK(skipped.dispositions.clarification_requested == 2);

    Store batch_store = fresh_store("/tmp/carepipe-cli-skip-batch.jsonl");
    const parser::RuleBasedParser batch;
    const pipeline::ReplayReport plain =
        pipeline::replay(env.generated.transcripts, env.registries, batch, batch_store,
                         replay_config(Config{}));
    CHECK(pipeline::serialize_report(skipped) == pipeline::serialize_report(plain));
}

TEST_CASE("an exhausted answer stream aborts before touching the store") {
    const InteractiveEnv env;

    SUBCASE("immediately") {
        std::istringstream answers("");
        std::ostringstream prompts;
        Store store = fresh_store("/tmp/carepipe-cli-abort-0.jsonl");
        try {
            interactive_replay(env.generated.transcripts, env.registries, store, answers, prompts,
                               Config{});
            REQUIRE(false);
        } catch (const AbortedByUser& aborted) {
            CHECK(aborted.pending_transcript == env.prompters[0]->id);
            CHECK(aborted.completed == env.replay_position(env.prompters[0]->id));
            const auto j = nlohmann::json::parse(aborted.resume_json);
            CHECK(j.at("pending_transcript") == env.prompters[0]->id);
            CHECK(j.at("answered").empty());
        }
        CHECK(store.query_records().empty());
        CHECK(store.outcomes().empty());
        CHECK(store.events().empty());
    }

    SUBCASE("after one pinned answer") {
        std::istringstream answers(env.answer_for(*env.prompters[0]));
        std::ostringstream prompts;
        Store store = fresh_store("/tmp/carepipe-cli-abort-1.jsonl");
        try {
            interactive_replay(env.generated.transcripts, env.registries, store, answers, prompts,
                               Config{});
            REQUIRE(false);
        } catch (const AbortedByUser& aborted) {
            CHECK(aborted.pending_transcript == env.prompters[1]->id);
            CHECK(aborted.completed == env.replay_position(env.prompters[1]->id));
            const auto j = nlohmann::json::parse(aborted.resume_json);
            CHECK(j.at("answered").contains(env.prompters[0]->id));
        }
        CHECK(store.query_records().empty());
        CHECK(store.outcomes().empty());
    }
}

TEST_CASE("malformed answer lines are diagnosed and retried") {
    const InteractiveEnv env;
    std::string script = "what?\n";
    for (const Transcript* t : env.prompters) script += env.answer_for(*t);

    std::istringstream answers(script);
    std::ostringstream prompts;
    Store store = fresh_store("/tmp/carepipe-cli-retry.jsonl");
    const pipeline::ReplayReport report = interactive_replay(
        env.generated.transcripts, env.registries, store, answers, prompts, Config{});

    CHECK(report.dispositions.clarification_requested == 0);
    CHECK(prompts.str().find("expected resident=<id>, time=<iso-utc>, or skip") !=
          std::string::npos);
}
