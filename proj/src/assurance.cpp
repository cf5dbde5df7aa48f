#include "carepipe/assurance.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

namespace carepipe::assurance {

namespace {

using nlohmann::json;

}  // namespace

std::string to_string(NodeKind k) {
    switch (k) {
        case NodeKind::claim: return "claim";
        case NodeKind::argument: return "argument";
        case NodeKind::evidence: return "evidence";
        case NodeKind::defeater: return "defeater";
    }
    return "claim";
}

std::optional<NodeKind> node_kind_from_string(std::string_view s) {
    if (s == "claim") return NodeKind::claim;
    if (s == "argument") return NodeKind::argument;
    if (s == "evidence") return NodeKind::evidence;
    if (s == "defeater") return NodeKind::defeater;
    return std::nullopt;
}

std::string to_string(Comparator c) {
    switch (c) {
        case Comparator::ge: return ">=";
        case Comparator::le: return "<=";
        case Comparator::eq: return "==";
        case Comparator::gt: return ">";
        case Comparator::lt: return "<";
    }
    return ">=";
}

std::optional<Comparator> comparator_from_string(std::string_view s) {
    if (s == ">=") return Comparator::ge;
    if (s == "<=") return Comparator::le;
    if (s == "==") return Comparator::eq;
    if (s == ">") return Comparator::gt;
    if (s == "<") return Comparator::lt;
    return std::nullopt;
}

bool compare(double value, Comparator c, double threshold) {
    switch (c) {
        case Comparator::ge: return value >= threshold;
        case Comparator::le: return value <= threshold;
        case Comparator::eq: return value == threshold;
        case Comparator::gt: return value > threshold;
        case Comparator::lt: return value < threshold;
    }
    return false;
}

std::string to_string(Status s) {
    switch (s) {
        case Status::supported: return "supported";
        case Status::unsupported: return "unsupported";
        case Status::defeated: return "defeated";
        case Status::undetermined: return "undetermined";
    }
    return "undetermined";
}

const AssuranceNode* AssuranceCase::find(const std::string& id) const {
    for (const AssuranceNode& n : nodes)
        if (n.id == id) return &n;
    return nullptr;
}

const std::set<std::string>& known_replay_metrics() {
    static const std::set<std::string> names = [] {
        std::set<std::string> s{
            "transcripts.total",
            "transcripts.with_truth",
            "dispositions.completed",
            "dispositions.clarification_requested",
            "dispositions.rejected",
            "clarifications.resident",
            "clarifications.category",
            "clarifications.time",
            "clarifications.confirmation",
            "corpus_malformed_count",
            "error.mean",
            "error.sample",
            "error.within_budget",
            "budget.delta",
            "budget.tau_ms",
            "hallucination_count",
            "trap_false_positive_count",
            "silent_ambiguous_schedule_count",
            "reminder_confusion.tp",
            "reminder_confusion.fp",
            "reminder_confusion.fn",
            "reminder_confusion.tn",
            "reminder_accuracy",
            "reminder_precision",
            "reminder_recall",
            "audit_coverage",
        };
        for (const char* family : {"joint_accuracy", "joint_accuracy_with_deferrals",
                                   "insertion_accuracy", "reminder_count_match"})
            for (const char* part : {".successes", ".n", ".p_hat", ".ci_low", ".ci_high"})
                s.insert(std::string(family) + part);
        for (const char* family : {"note_cosine", "note_wmd", "reminder_cosine", "reminder_wmd"})
            for (const char* part : {".n", ".mean", ".p25", ".p75"})
                s.insert(std::string(family) + part);
        return s;
    }();
    return names;
}

// ---------------------------------------------------------------------------
// Loading

namespace {

AssuranceNode node_from_line(const std::string& line, std::size_t line_no) {
    const auto malformed = [&](const std::string& why) {
        return AssuranceError(AssuranceError::Kind::MalformedNode,
                              "node line " + std::to_string(line_no) + ": " + why);
    };

    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw malformed(e.what());
    }
    if (!j.is_object()) throw malformed("not a JSON object");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (key != "id" && key != "kind" && key != "text" && key != "children" &&
            key != "binding")
            throw malformed("unknown key '" + key + "'");
    }

    AssuranceNode n;
    try {
        n.id = j.at("id").get<std::string>();
        const auto kind = node_kind_from_string(j.at("kind").get<std::string>());
        if (!kind) throw malformed("unknown kind");
        n.kind = *kind;
        n.text = j.at("text").get<std::string>();
        if (j.contains("children"))
            n.children = j.at("children").get<std::vector<std::string>>();
        if (j.contains("binding")) {
            const json& b = j.at("binding");
            if (!b.is_object()) throw malformed("binding is not an object");
            for (const auto& [key, value] : b.items()) {
                (void)value;
                if (key != "metric" && key != "comparator" && key != "threshold")
                    throw malformed("unknown binding key '" + key + "'");
            }
            EvidenceBinding binding;
            binding.metric = b.at("metric").get<std::string>();
            const auto cmp = comparator_from_string(b.at("comparator").get<std::string>());
            if (!cmp) throw malformed("unknown comparator");
            binding.comparator = *cmp;
            binding.threshold = b.at("threshold").get<double>();
            n.binding = std::move(binding);
        }
    } catch (const json::exception& e) {
        throw malformed(e.what());
    }
    if (n.id.empty()) throw malformed("empty id");
    return n;
}

}  // namespace

AssuranceCase load_case(const std::string& text, const std::set<std::string>& known_metrics) {
    AssuranceCase c;
    std::map<std::string, std::size_t> index;

    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        AssuranceNode n = node_from_line(line, line_no);
        if (index.count(n.id))
            throw AssuranceError(AssuranceError::Kind::DuplicateId,
                                 "duplicate node id '" + n.id + "'");
        index[n.id] = c.nodes.size();
        c.nodes.push_back(std::move(n));
    }

    for (const AssuranceNode& n : c.nodes) {
        const bool leaf_kind = n.kind == NodeKind::evidence || n.kind == NodeKind::defeater;
        if (leaf_kind && !n.children.empty())
            throw AssuranceError(AssuranceError::Kind::MalformedNode,
                                 "'" + n.id + "': " + to_string(n.kind) +
                                     " nodes cannot have children");
        if (n.binding && n.kind != NodeKind::evidence)
            throw AssuranceError(AssuranceError::Kind::MalformedNode,
                                 "'" + n.id + "': only evidence nodes carry bindings");
        if (n.binding && !known_metrics.count(n.binding->metric))
            throw AssuranceError(AssuranceError::Kind::UnknownMetricBinding,
                                 "'" + n.id + "' binds unknown metric '" + n.binding->metric +
                                     "'");
        for (const std::string& child_id : n.children) {
            const auto it = index.find(child_id);
            if (it == index.end())
                throw AssuranceError(AssuranceError::Kind::DanglingChild,
                                     "'" + n.id + "' references missing node '" + child_id +
                                         "'");
            const AssuranceNode& child = c.nodes[it->second];
            if (child.kind == NodeKind::defeater && n.kind != NodeKind::claim &&
                n.kind != NodeKind::argument)
                throw AssuranceError(AssuranceError::Kind::MalformedNode,
                                     "defeater '" + child.id +
                                         "' may only attach to a claim or argument");
        }
    }

    // three-color depth-first search for cycles
    std::map<std::string, int> color;  // 0 unvisited, 1 in progress, 2 done
    const std::function<void(const AssuranceNode&)> visit = [&](const AssuranceNode& n) {
        color[n.id] = 1;
        for (const std::string& child_id : n.children) {
            const int c_color = color[child_id];
            if (c_color == 1)
                throw AssuranceError(AssuranceError::Kind::CycleDetected,
                                     "cycle through '" + child_id + "'");
            if (c_color == 0) visit(c.nodes[index.at(child_id)]);
        }
        color[n.id] = 2;
    };
    for (const AssuranceNode& n : c.nodes)
        if (color[n.id] == 0) visit(n);

    std::set<std::string> referenced;
    for (const AssuranceNode& n : c.nodes)
        for (const std::string& child_id : n.children) referenced.insert(child_id);
    for (const AssuranceNode& n : c.nodes)
        if (!referenced.count(n.id)) c.roots.push_back(n.id);

    return c;
}

AssuranceCase load_case_file(const std::string& path,
                             const std::set<std::string>& known_metrics) {
    std::ifstream in(path);
    if (!in)
        throw AssuranceError(AssuranceError::Kind::MalformedNode,
                             "cannot read case file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return load_case(buffer.str(), known_metrics);
}

std::string default_case_text() {
    return R"json({"id":"C1","kind":"claim","text":"Care records and reminders produced by the pipeline are safe to act on","children":["C1.1","C1.2","C1.3","C1.4","C1.5"]}
{"id":"C1.1","kind":"claim","text":"Ambiguous or underspecified inputs end in clarification, never in silent execution","children":["A1"]}
{"id":"A1","kind":"argument","text":"Replay deferral counters show uncertain inputs were deferred, not acted on","children":["E1.1","E1.2"]}
{"id":"E1.1","kind":"evidence","text":"No events materialized from reminders with unresolved times","binding":{"metric":"silent_ambiguous_schedule_count","comparator":"==","threshold":0}}
{"id":"E1.2","kind":"evidence","text":"No reminder-like trap phrasing was acted on","binding":{"metric":"trap_false_positive_count","comparator":"==","threshold":0}}
{"id":"C1.2","kind":"claim","text":"Every transcript the pipeline consumed was well formed","children":["E1.3"]}
{"id":"E1.3","kind":"evidence","text":"All corpus lines survive a serialization round trip","binding":{"metric":"corpus_malformed_count","comparator":"==","threshold":0}}
{"id":"C1.3","kind":"claim","text":"Mean cumulative stage error stays within the configured budget","children":["E1.4"]}
{"id":"E1.4","kind":"evidence","text":"Replay error budget check passed","binding":{"metric":"error.within_budget","comparator":"==","threshold":1}}
{"id":"C1.4","kind":"claim","text":"Every stored record, intent and event is traceable in the audit log","children":["E1.5"]}
{"id":"E1.5","kind":"evidence","text":"Audit coverage over stored artifacts is complete","binding":{"metric":"audit_coverage","comparator":">=","threshold":1}}
{"id":"C1.5","kind":"claim","text":"Parsing, insertion and scheduling meet their quantitative targets","children":["A2"]}
{"id":"A2","kind":"argument","text":"Wilson lower bounds from corpus replay clear the target thresholds","children":["C2.3","C2.4","C2.5","D2.2"]}
{"id":"C2.3","kind":"claim","text":"Database insertion accuracy meets its target","children":["E2.1"]}
{"id":"E2.1","kind":"evidence","text":"Insertion accuracy interval lower bound of at least 0.95 (paraphrased)","binding":{"metric":"insertion_accuracy.ci_low","comparator":">=","threshold":0.95}}
{"id":"C2.4","kind":"claim","text":"Reminder scheduling succeeds at its target rate","children":["E2.2"]}
{"id":"E2.2","kind":"evidence","text":"Reminder count match interval lower bound of at least 0.75 (paraphrased)","binding":{"metric":"reminder_count_match.ci_low","comparator":">=","threshold":0.75}}
{"id":"C2.5","kind":"claim","text":"Parsing emits no hallucinated resident or category identifiers","children":["E2.3"]}
{"id":"E2.3","kind":"evidence","text":"Zero identifiers outside the registries across the replay (paraphrased)","binding":{"metric":"hallucination_count","comparator":"==","threshold":0}}
{"id":"D2.2","kind":"defeater","text":"The evaluation corpus may not represent real care-home speech (paraphrased)"}
)json";
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

int severity(Status s) {
    switch (s) {
        case Status::defeated: return 3;
        case Status::unsupported: return 2;
        case Status::undetermined: return 1;
        case Status::supported: return 0;
    }
    return 1;
}

Status worst(Status a, Status b) { return severity(b) > severity(a) ? b : a; }

}  // namespace

CaseStatus evaluate_case(const AssuranceCase& c, const std::map<std::string, double>& metric_values,
                         const std::set<std::string>& active_defeaters) {
    CaseStatus out;
    std::set<std::string> missing;
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < c.nodes.size(); ++i) index[c.nodes[i].id] = i;

    const std::function<Status(const AssuranceNode&)> eval = [&](const AssuranceNode& n) -> Status {
        const auto memo = out.by_node.find(n.id);
        if (memo != out.by_node.end()) return memo->second;

        Status status = Status::undetermined;
        switch (n.kind) {
            case NodeKind::defeater:
                status = active_defeaters.count(n.id) ? Status::supported : Status::unsupported;
                break;
            case NodeKind::evidence:
                if (n.binding) {
                    const auto value = metric_values.find(n.binding->metric);
                    if (value == metric_values.end()) {
                        missing.insert(n.binding->metric);
                        status = Status::undetermined;
                    } else {
                        status = compare(value->second, n.binding->comparator,
                                         n.binding->threshold)
                                     ? Status::supported
                                     : Status::unsupported;
                    }
                }
                break;
            case NodeKind::claim:
            case NodeKind::argument: {
                bool defeated = false;
                Status combined = Status::supported;
                std::size_t scored_children = 0;
                for (const std::string& child_id : n.children) {
                    const AssuranceNode& child = c.nodes[index.at(child_id)];
                    const Status child_status = eval(child);
                    if (child.kind == NodeKind::defeater) {
                        if (child_status == Status::supported) defeated = true;
                        continue;
                    }
                    ++scored_children;
                    combined = worst(combined, child_status);
                }
                if (defeated)
                    status = Status::defeated;
                else if (scored_children == 0)
                    status = Status::undetermined;
                else
                    status = combined;
                break;
            }
        }
        out.by_node[n.id] = status;
        return status;
    };

    for (const AssuranceNode& n : c.nodes) eval(n);

    if (!c.roots.empty()) {
        Status overall = Status::supported;
        for (const std::string& root : c.roots) overall = worst(overall, out.by_node.at(root));
        out.overall = overall;
    }
    out.missing_metrics.assign(missing.begin(), missing.end());
    return out;
}

// ---------------------------------------------------------------------------
// Reporting

namespace {

std::string format_value(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

void render_node(const AssuranceCase& c, const CaseStatus& status,
                 const std::map<std::string, double>& metric_values,
                 const std::map<std::string, std::size_t>& index, const AssuranceNode& n,
                 int depth, std::ostringstream& os) {
    os << std::string(2 + 2 * static_cast<std::size_t>(depth), ' ') << n.id << " ["
       << to_string(n.kind) << "] ";
    if (n.kind == NodeKind::defeater)
        os << (status.by_node.at(n.id) == Status::supported ? "active" : "inactive");
    else
        os << to_string(status.by_node.at(n.id));
    os << ": " << n.text;
    if (n.binding) {
        const auto value = metric_values.find(n.binding->metric);
        os << " [" << n.binding->metric;
        if (value == metric_values.end())
            os << " missing";
        else
            os << " = " << format_value(value->second);
        os << ", requires " << to_string(n.binding->comparator) << " "
           << format_value(n.binding->threshold) << "]";
    }
    os << "\n";
    for (const std::string& child_id : n.children)
        render_node(c, status, metric_values, index, c.nodes[index.at(child_id)], depth + 1, os);
}

}  // namespace

std::string render_report(const AssuranceCase& c, const CaseStatus& status,
                          const std::map<std::string, double>& metric_values) {
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < c.nodes.size(); ++i) index[c.nodes[i].id] = i;

    std::ostringstream os;
    os << "assurance case evaluation\n";
    for (const std::string& root : c.roots)
        render_node(c, status, metric_values, index, c.nodes[index.at(root)], 0, os);
    if (!status.missing_metrics.empty()) {
        os << "missing metrics:";
        for (const std::string& name : status.missing_metrics) os << " " << name;
        os << "\n";
    }
    os << "overall: " << to_string(status.overall) << "\n";
    return os.str();
}

std::string serialize_status(const CaseStatus& status) {
    json j;
    j["overall"] = to_string(status.overall);
    json nodes = json::object();
    for (const auto& [id, s] : status.by_node) nodes[id] = to_string(s);
    j["nodes"] = std::move(nodes);
    j["missing_metrics"] = status.missing_metrics;
    return j.dump(2) + "\n";
}

}  // namespace carepipe::assurance
