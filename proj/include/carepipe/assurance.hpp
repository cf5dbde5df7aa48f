#pragma once
// Safety argument graph: claims decomposed into arguments and evidence,
// challenged by defeaters. Evidence nodes bind to named metrics from the
// replay harness; evaluation applies each binding, propagates status up
// the graph, and renders a deterministic report.
//
// Status alphabet: supported, unsupported, defeated, undetermined. A
// claim or argument is supported only when every non-defeater child is
// supported and no attached defeater is active; an active defeater
// overrides everything else. A missing metric makes its evidence
// undetermined, which propagates unless something worse does.

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace carepipe::assurance {

class AssuranceError : public std::runtime_error {
public:
    enum class Kind {
        MalformedNode,
        DuplicateId,
        CycleDetected,
        DanglingChild,
        UnknownMetricBinding,
    };

    AssuranceError(Kind kind, const std::string& message)
        : std::runtime_error(message), kind(kind) {}

    Kind kind;
};

enum class NodeKind { claim, argument, evidence, defeater };

std::string to_string(NodeKind k);
std::optional<NodeKind> node_kind_from_string(std::string_view s);

enum class Comparator { ge, le, eq, gt, lt };

std::string to_string(Comparator c);
std::optional<Comparator> comparator_from_string(std::string_view s);

bool compare(double value, Comparator c, double threshold);

struct EvidenceBinding {
    std::string metric;
    Comparator comparator = Comparator::ge;
    double threshold = 0.0;

    bool operator==(const EvidenceBinding&) const = default;
};

struct AssuranceNode {
    std::string id;
    NodeKind kind = NodeKind::claim;
    std::string text;
    std::vector<std::string> children;          // declared order
    std::optional<EvidenceBinding> binding;     // evidence nodes only
};

struct AssuranceCase {
    std::vector<AssuranceNode> nodes;  // file order
    std::vector<std::string> roots;    // nodes no other node references

    const AssuranceNode* find(const std::string& id) const;
};

// Metric names the replay harness can produce; the vocabulary bindings
// are validated against.
const std::set<std::string>& known_replay_metrics();

// Parses line-delimited node objects {id, kind, text, children, binding}
// and validates the graph: unique ids, no dangling children, acyclic,
// bindings only on evidence nodes and only against known metrics,
// defeaters attached only to claims or arguments, leaves childless.
AssuranceCase load_case(const std::string& text,
                        const std::set<std::string>& known_metrics = known_replay_metrics());

AssuranceCase load_case_file(const std::string& path,
                             const std::set<std::string>& known_metrics = known_replay_metrics());

// The bundled default argument, C1 down to the KPI evidence; source text
// for load_case.
std::string default_case_text();

enum class Status { supported, unsupported, defeated, undetermined };

std::string to_string(Status s);

struct CaseStatus {
    std::map<std::string, Status> by_node;
    Status overall = Status::undetermined;           // across roots, worst wins
    std::vector<std::string> missing_metrics;        // unmet bindings, sorted unique
};

// Pure function of (graph, metric values, active defeater ids). Defeater
// nodes report supported when their id is active and unsupported
// otherwise.
CaseStatus evaluate_case(const AssuranceCase& c, const std::map<std::string, double>& metric_values,
                         const std::set<std::string>& active_defeaters = {});

// Indented per-node tree with bound values and an overall verdict line;
// byte-identical for identical inputs.
std::string render_report(const AssuranceCase& c, const CaseStatus& status,
                          const std::map<std::string, double>& metric_values);

// Machine-readable form: {"overall", "nodes": {id: status}, "missing_metrics"}.
std::string serialize_status(const CaseStatus& status);

}  // namespace carepipe::assurance
