#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "phenokg/common.hpp"
#include "phenokg/evidence.hpp"

namespace phenokg {

struct ObjectiveVector {
    double r = 0.0;
    double y = 0.0;
    double nps = 0.0;
};

// c_a dominates c_b: >= on all objectives, > on at least one.
bool dominates(const ObjectiveVector& a, const ObjectiveVector& b);

struct ParetoFront {
    std::vector<int> front;             // indices of non-dominated candidates
    std::vector<int> dominance_count;   // per candidate: how many dominate it
};

// Pairwise non-dominated sort; identical vectors are mutually non-dominated
// and all kept.
ParetoFront pareto_front(const std::vector<ObjectiveVector>& candidates);

// ---------------------------------------------------------------------------
// Knowledge graph: typed nodes/edges with natural keys, line-delimited
// snapshot with checksum, append-only change log.
// ---------------------------------------------------------------------------

enum class NodeType {
    Feature,
    Phenotype,
    StandardPhenotype,
    Hypothesis,
    Document,
    Claim,
    ExternalEntity
};

enum class EdgeType {
    HasPhenotype,
    MapsToSp,
    Hypothesizes,
    SupportedBy,
    Claims,
    SubjectOf,
    ObjectOf,
    CausalEdge
};

std::string to_string(NodeType t);
std::string to_string(EdgeType t);
NodeType node_type_from_string(const std::string& s);
EdgeType edge_type_from_string(const std::string& s);

struct NodeRef {
    NodeType type;
    std::string key;
    auto operator<=>(const NodeRef&) const = default;
};

struct KgNode {
    NodeRef ref;
    json attrs = json::object();
};

struct KgEdge {
    EdgeType type;
    NodeRef src;
    NodeRef dst;
    json attrs = json::object();
};

struct DanglingReference : Error {
    using Error::Error;
};
struct CorruptFile : Error {
    using Error::Error;
};
struct VersionSkew : Error {
    using Error::Error;
};

class KnowledgeGraph {
  public:
    uint64_t version() const { return version_; }
    size_t node_count() const { return nodes_.size(); }
    size_t edge_count() const { return edges_.size(); }

    bool has_node(const NodeRef& ref) const { return nodes_.count(ref) > 0; }
    const KgNode* find_node(const NodeRef& ref) const;

    // Idempotent on natural keys: re-adding an existing node/edge is a no-op
    // and existing attributes win. Returns true when something was added.
    bool add_node(const KgNode& node);
    bool add_edge(const KgEdge& edge);  // throws DanglingReference

    void bump_version() { ++version_; }

    std::vector<KgNode> nodes_sorted() const;
    std::vector<KgEdge> edges_sorted() const;
    std::vector<const KgNode*> nodes_of_type(NodeType t) const;

    bool structurally_equal(const KnowledgeGraph& other) const;

    void persist(const std::string& path) const;
    static KnowledgeGraph load(const std::string& path);

    // GraphML export for visualization tools.
    void export_graphml(const std::string& path) const;

    // One change-log line per applied batch, appended to `log_path`.
    void append_changelog(const std::string& log_path, const json& batch_summary) const;

  private:
    uint64_t version_ = 0;
    std::map<NodeRef, KgNode> nodes_;
    std::map<std::string, KgEdge> edges_;  // keyed by a canonical string

    static std::string edge_key(const KgEdge& e);
};

// One update batch: Pareto-front claims with Y >= tau_c plus the retained
// documents of their hypotheses, with connecting edges. Idempotent; bumps
// the version only when the graph changed. Returns a summary of additions.
struct ExpandStats {
    size_t claims_added = 0;
    size_t documents_added = 0;
    size_t nodes_added = 0;
    size_t edges_added = 0;
    bool changed = false;
};

ExpandStats expand(KnowledgeGraph& g, const std::vector<ScoredClaim>& front_claims,
                   const std::vector<Hypothesis>& hypotheses,
                   const std::map<std::string, std::vector<Document>>& docs_by_hypothesis,
                   const std::vector<std::string>& feature_names, const ScoreWeights& w,
                   bool exploratory = false, WarningLog* warnings = nullptr);

// Natural key for a claim node: subject | relation | object | doc.
std::string claim_natural_key(const Claim& c);

}  // namespace phenokg
