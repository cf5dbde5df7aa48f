#include <algorithm>
#include <cstdio>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "carepipe/assurance.hpp"
#include "carepipe/pipeline.hpp"
#include "carepipe/synth.hpp"

using namespace carepipe;
using namespace carepipe::assurance;

namespace {

// metric values shaped like a clean full-corpus replay
std::map<std::string, double> passing_metrics() {
    return {
        {"silent_ambiguous_schedule_count", 0.0},
        {"trap_false_positive_count", 0.0},
        {"corpus_malformed_count", 0.0},
        {"error.within_budget", 1.0},
        {"audit_coverage", 1.0},
        {"insertion_accuracy.ci_low", 0.9881},
        {"reminder_count_match.ci_low", 0.9795},
        {"hallucination_count", 0.0},
    };
}

Status node_status(const CaseStatus& s, const std::string& id) {
    const auto it = s.by_node.find(id);
    REQUIRE(it != s.by_node.end());
    return it->second;
}

}  // namespace

TEST_CASE("bundled case loads with the expected structure") {
    const AssuranceCase c = load_case(default_case_text());

    CHECK(c.nodes.size() == 20);
    REQUIRE(c.roots == std::vector<std::string>{"C1"});
    for (const char* id : {"C1", "C1.1", "C1.2", "C1.3", "C1.4", "C1.5", "A1", "A2", "E1.1",
                           "E1.2", "E1.3", "E1.4", "E1.5", "C2.3", "C2.4", "C2.5", "E2.1",
                           "E2.2", "E2.3", "D2.2"})
        CHECK_MESSAGE(c.find(id) != nullptr, "missing node ", id);

    CHECK(c.find("C1")->kind == NodeKind::claim);
    CHECK(c.find("A2")->kind == NodeKind::argument);
    CHECK(c.find("D2.2")->kind == NodeKind::defeater);
    CHECK(c.find("A2")->children ==
          std::vector<std::string>{"C2.3", "C2.4", "C2.5", "D2.2"});

    const AssuranceNode* e21 = c.find("E2.1");
    REQUIRE(e21->binding.has_value());
    CHECK(e21->binding->metric == "insertion_accuracy.ci_low");
    CHECK(e21->binding->comparator == Comparator::ge);
    CHECK(e21->binding->threshold == 0.95);
    CHECK(c.find("E2.2")->binding->metric == "reminder_count_match.ci_low");
    CHECK(c.find("E2.2")->binding->threshold == 0.75);
    CHECK(c.find("E2.3")->binding->metric == "hallucination_count");
    CHECK(c.find("E2.3")->binding->comparator == Comparator::eq);
}

TEST_CASE("load rejects malformed graphs") {
    const auto kind_of = [](const std::string& text) {
        try {
            load_case(text);
        } catch (const AssuranceError& e) {
            return e.kind;
        }
        REQUIRE(false);
        return AssuranceError::Kind::MalformedNode;
    };

    SUBCASE("cycle") {
        CHECK(kind_of(R"({"id":"C","kind":"claim","text":"t","children":["A"]}
{"id":"A","kind":"argument","text":"t","children":["C"]}
)") == AssuranceError::Kind::CycleDetected);
    }
    SUBCASE("self cycle") {
        CHECK(kind_of(R"({"id":"C","kind":"claim","text":"t","children":["C"]}
)") == AssuranceError::Kind::CycleDetected);
    }
    SUBCASE("dangling child") {
        CHECK(kind_of(R"({"id":"C","kind":"claim","text":"t","children":["ghost"]}
)") == AssuranceError::Kind::DanglingChild);
    }
    SUBCASE("unknown metric binding") {
        CHECK(kind_of(
                  R"({"id":"E","kind":"evidence","text":"t","binding":{"metric":"no_such_metric","comparator":">=","threshold":1}}
)") == AssuranceError::Kind::UnknownMetricBinding);
    }
    SUBCASE("duplicate id") {
        CHECK(kind_of(R"({"id":"C","kind":"claim","text":"a"}
{"id":"C","kind":"claim","text":"b"}
)") == AssuranceError::Kind::DuplicateId);
    }
    SUBCASE("unknown kind") {
        CHECK(kind_of(R"({"id":"C","kind":"hope","text":"t"}
)") == AssuranceError::Kind::MalformedNode);
    }
    SUBCASE("unknown key") {
        CHECK(kind_of(R"({"id":"C","kind":"claim","text":"t","color":"red"}
)") == AssuranceError::Kind::MalformedNode);
    }
    SUBCASE("binding on a claim") {
        CHECK(kind_of(
                  R"({"id":"C","kind":"claim","text":"t","binding":{"metric":"hallucination_count","comparator":"==","threshold":0}}
)") == AssuranceError::Kind::MalformedNode);
    }
    SUBCASE("defeater with children") {
        CHECK(kind_of(R"({"id":"E","kind":"evidence","text":"t"}
{"id":"D","kind":"defeater","text":"t","children":["E"]}
)") == AssuranceError::Kind::MalformedNode);
    }
    SUBCASE("defeater attached to evidence") {
        CHECK(kind_of(R"({"id":"D","kind":"defeater","text":"t"}
{"id":"E","kind":"evidence","text":"t","children":["D"]}
)") == AssuranceError::Kind::MalformedNode);
    }
    SUBCASE("unparseable line") {
        CHECK(kind_of("{not json\n") == AssuranceError::Kind::MalformedNode);
    }
    SUBCASE("bad comparator") {
        CHECK(kind_of(
                  R"({"id":"E","kind":"evidence","text":"t","binding":{"metric":"hallucination_count","comparator":"~","threshold":0}}
)") == AssuranceError::Kind::MalformedNode);
    }
}

TEST_CASE("passing metrics support the whole case") {
    const AssuranceCase c = load_case(default_case_text());
    const CaseStatus s = evaluate_case(c, passing_metrics());

    CHECK(s.overall == Status::supported);
    CHECK(s.missing_metrics.empty());
    for (const AssuranceNode& n : c.nodes) {
        if (n.kind == NodeKind::defeater)
            CHECK(node_status(s, n.id) == Status::unsupported);  // inactive
        else
            CHECK_MESSAGE(node_status(s, n.id) == Status::supported, n.id);
    }
}

TEST_CASE("hallucinations break exactly the parsing branch") {
    const AssuranceCase c = load_case(default_case_text());
    auto m = passing_metrics();
    m["hallucination_count"] = 3.0;
    const CaseStatus s = evaluate_case(c, m);

    CHECK(node_status(s, "E2.3") == Status::unsupported);
    CHECK(node_status(s, "C2.5") == Status::unsupported);
    CHECK(node_status(s, "A2") == Status::unsupported);
    CHECK(node_status(s, "C1.5") == Status::unsupported);
    CHECK(node_status(s, "C1") == Status::unsupported);
    CHECK(s.overall == Status::unsupported);
    // siblings keep their own standing
    CHECK(node_status(s, "C2.3") == Status::supported);
    CHECK(node_status(s, "C2.4") == Status::supported);
    CHECK(node_status(s, "C1.1") == Status::supported);
}

TEST_CASE("an active defeater defeats its argument regardless of evidence") {
    const AssuranceCase c = load_case(default_case_text());
    const CaseStatus s = evaluate_case(c, passing_metrics(), {"D2.2"});

    CHECK(node_status(s, "D2.2") == Status::supported);  // the challenge stands
    CHECK(node_status(s, "A2") == Status::defeated);
    CHECK(node_status(s, "C1.5") == Status::defeated);
    CHECK(node_status(s, "C1") == Status::defeated);
    CHECK(s.overall == Status::defeated);
    // evidence under the defeated argument is still reported on its merits
    CHECK(node_status(s, "C2.3") == Status::supported);
    CHECK(node_status(s, "E2.3") == Status::supported);
}

TEST_CASE("missing metrics surface as undetermined and are listed") {
    const AssuranceCase c = load_case(default_case_text());
    auto m = passing_metrics();
    m.erase("insertion_accuracy.ci_low");
    const CaseStatus s = evaluate_case(c, m);

    CHECK(node_status(s, "E2.1") == Status::undetermined);
    CHECK(node_status(s, "C2.3") == Status::undetermined);
    CHECK(node_status(s, "A2") == Status::undetermined);
    CHECK(node_status(s, "C1") == Status::undetermined);
    CHECK(s.overall == Status::undetermined);
    CHECK(s.missing_metrics == std::vector<std::string>{"insertion_accuracy.ci_low"});

    SUBCASE("a failing sibling outweighs the unknown") {
        m["trap_false_positive_count"] = 2.0;
        const CaseStatus worse = evaluate_case(c, m);
        CHECK(node_status(worse, "C1") == Status::unsupported);
        CHECK(worse.overall == Status::unsupported);
    }
    SUBCASE("empty metric map leaves every bound leaf undetermined") {
        const CaseStatus blank = evaluate_case(c, {});
        for (const AssuranceNode& n : c.nodes)
            if (n.binding) CHECK(node_status(blank, n.id) == Status::undetermined);
        CHECK(blank.overall == Status::undetermined);
        CHECK(blank.missing_metrics.size() == 8);
    }
}

TEST_CASE("comparators evaluate boundaries exactly") {
    CHECK(compare(0.95, Comparator::ge, 0.95));
    CHECK_FALSE(compare(0.9499999, Comparator::ge, 0.95));
    CHECK(compare(0.0, Comparator::eq, 0.0));
    CHECK_FALSE(compare(1e-12, Comparator::eq, 0.0));
    CHECK(compare(0.2, Comparator::le, 0.2));
    CHECK(compare(0.3, Comparator::gt, 0.2));
    CHECK_FALSE(compare(0.2, Comparator::gt, 0.2));
    CHECK(compare(0.1, Comparator::lt, 0.2));
    CHECK_FALSE(compare(0.2, Comparator::lt, 0.2));
}

TEST_CASE("evaluation and rendering are pure and deterministic") {
    const AssuranceCase c = load_case(default_case_text());
    const auto m = passing_metrics();
    const CaseStatus s1 = evaluate_case(c, m);
    const CaseStatus s2 = evaluate_case(c, m);
    CHECK(s1.by_node == s2.by_node);
    CHECK(s1.overall == s2.overall);

    const std::string r1 = render_report(c, s1, m);
    const std::string r2 = render_report(c, s2, m);
    CHECK(r1 == r2);
    CHECK(r1.find("C1 [claim] supported") != std::string::npos);
    CHECK(r1.find("D2.2 [defeater] inactive") != std::string::npos);
    CHECK(r1.find("insertion_accuracy.ci_low = 0.9881, requires >= 0.95") !=
          std::string::npos);
    CHECK(r1.find("overall: supported") != std::string::npos);

    auto partial = m;
    partial.erase("audit_coverage");
    const CaseStatus holed = evaluate_case(c, partial);
    const std::string holed_report = render_report(c, holed, partial);
    CHECK(holed_report.find("audit_coverage missing") != std::string::npos);
    CHECK(holed_report.find("missing metrics: audit_coverage") != std::string::npos);
}

TEST_CASE("status serialization is machine readable") {
    const AssuranceCase c = load_case(default_case_text());
    const CaseStatus s = evaluate_case(c, passing_metrics(), {"D2.2"});
    const nlohmann::json j = nlohmann::json::parse(serialize_status(s));
    CHECK(j.at("overall") == "defeated");
    CHECK(j.at("nodes").at("A2") == "defeated");
    CHECK(j.at("nodes").at("C2.3") == "supported");
    CHECK(j.at("missing_metrics").empty());
}

TEST_CASE("adding passing evidence never flips a supported claim") {
    std::mt19937_64 rng(404);
    for (int trial = 0; trial < 50; ++trial) {
        // random two-level case: root claim over arguments over evidence
        std::string text =
            R"({"id":"R","kind":"claim","text":"root","children":["A0","A1","A2"]})" "\n";
        std::map<std::string, double> values;
        for (int a = 0; a < 3; ++a) {
            std::string children;
            for (int e = 0; e < 2; ++e) {
                const std::string id = "E" + std::to_string(a) + std::to_string(e);
                const bool pass = rng() % 2 == 0;
                values["hallucination_count"] = 0.0;
                text += R"({"id":")" + id +
                        R"(","kind":"evidence","text":"e","binding":{"metric":"hallucination_count","comparator":"==","threshold":)" +
                        (pass ? "0" : "1") + "}}\n";
                children += (e ? R"(,")" : R"(")") + id + R"(")";
            }
            text += R"({"id":"A)" + std::to_string(a) +
                    R"(","kind":"argument","text":"a","children":[)" + children + "]}\n";
        }
        const AssuranceCase before = load_case(text);
        const CaseStatus s_before = evaluate_case(before, values);

        // bolt one passing evidence node onto a random argument
        const std::string target = "A" + std::to_string(rng() % 3);
        std::string grown;
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) {
            nlohmann::json j = nlohmann::json::parse(line);
            if (j.at("id") == target) j["children"].push_back("EX");
            grown += j.dump() + "\n";
        }
        grown +=
            R"({"id":"EX","kind":"evidence","text":"extra","binding":{"metric":"hallucination_count","comparator":"==","threshold":0}})" "\n";
        const AssuranceCase after = load_case(grown);
        const CaseStatus s_after = evaluate_case(after, values);

        for (const auto& [id, status] : s_before.by_node)
            if (status == Status::supported)
                CHECK(s_after.by_node.at(id) == Status::supported);
    }
}

TEST_CASE("bindings in the bundled case are produced by a clean replay") {
    synth::GeneratedCorpus corpus =
        synth::generate_corpus({100, 184.0 / 330.0, 0.1, 21, make_utc(2025, 3, 1, 9, 0, 0)});
    const Registries registries{ResidentRegistry(corpus.residents),
                                CategoryTaxonomy(corpus.categories)};
    const parser::RuleBasedParser rule_parser;

    std::remove("/tmp/carepipe-assure-clean.jsonl");
    Store store("/tmp/carepipe-assure-clean.jsonl");
    const pipeline::ReplayReport report =
        pipeline::replay(corpus.transcripts, registries, rule_parser, store);

    const AssuranceCase c = load_case(default_case_text());
    for (const AssuranceNode& n : c.nodes)
        if (n.binding)
            CHECK_MESSAGE(report.metrics.count(n.binding->metric) == 1, n.binding->metric);

    const CaseStatus clean = evaluate_case(c, report.metrics);
    CHECK(clean.overall == Status::supported);

    // a universal wrong-resident fault must break the hallucination claim
    const pipeline::FaultInjectingParser faulty(
        rule_parser, {pipeline::FaultKind::wrong_resident, 1.0, 0, 0});
    std::remove("/tmp/carepipe-assure-fault.jsonl");
    Store faulted_store("/tmp/carepipe-assure-fault.jsonl");
    const pipeline::ReplayReport faulted =
        pipeline::replay(corpus.transcripts, registries, faulty, faulted_store);
    const CaseStatus broken = evaluate_case(c, faulted.metrics);
    CHECK(node_status(broken, "C2.5") == Status::unsupported);
    CHECK(broken.overall == Status::unsupported);

    const CaseStatus defeated = evaluate_case(c, report.metrics, {"D2.2"});
    CHECK(defeated.overall == Status::defeated);
}
