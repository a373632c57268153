#include "phenokg/kgraph.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "phenokg/hash.hpp"

namespace fs = std::filesystem;

namespace phenokg {

bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) {
    bool ge = a.r >= b.r && a.y >= b.y && a.nps >= b.nps;
    bool gt = a.r > b.r || a.y > b.y || a.nps > b.nps;
    return ge && gt;
}

ParetoFront pareto_front(const std::vector<ObjectiveVector>& candidates) {
    const int n = static_cast<int>(candidates.size());
    ParetoFront out;
    out.dominance_count.assign(n, 0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i != j && dominates(candidates[j], candidates[i]))
                ++out.dominance_count[i];
        }
        if (out.dominance_count[i] == 0) out.front.push_back(i);
    }
    return out;
}

std::string to_string(NodeType t) {
    switch (t) {
        case NodeType::Feature: return "Feature";
        case NodeType::Phenotype: return "Phenotype";
        case NodeType::StandardPhenotype: return "StandardPhenotype";
        case NodeType::Hypothesis: return "Hypothesis";
        case NodeType::Document: return "Document";
        case NodeType::Claim: return "Claim";
        case NodeType::ExternalEntity: return "ExternalEntity";
    }
    return "Feature";
}

std::string to_string(EdgeType t) {
    switch (t) {
        case EdgeType::HasPhenotype: return "has-phenotype";
        case EdgeType::MapsToSp: return "maps-to-sp";
        case EdgeType::Hypothesizes: return "hypothesizes";
        case EdgeType::SupportedBy: return "supported-by";
        case EdgeType::Claims: return "claims";
        case EdgeType::SubjectOf: return "subject-of";
        case EdgeType::ObjectOf: return "object-of";
        case EdgeType::CausalEdge: return "causal-edge";
    }
    return "causal-edge";
}

NodeType node_type_from_string(const std::string& s) {
    if (s == "Feature") return NodeType::Feature;
    if (s == "Phenotype") return NodeType::Phenotype;
    if (s == "StandardPhenotype") return NodeType::StandardPhenotype;
    if (s == "Hypothesis") return NodeType::Hypothesis;
    if (s == "Document") return NodeType::Document;
    if (s == "Claim") return NodeType::Claim;
    if (s == "ExternalEntity") return NodeType::ExternalEntity;
    throw CorruptFile("unknown node type: " + s);
}

EdgeType edge_type_from_string(const std::string& s) {
    if (s == "has-phenotype") return EdgeType::HasPhenotype;
    if (s == "maps-to-sp") return EdgeType::MapsToSp;
    if (s == "hypothesizes") return EdgeType::Hypothesizes;
    if (s == "supported-by") return EdgeType::SupportedBy;
    if (s == "claims") return EdgeType::Claims;
    if (s == "subject-of") return EdgeType::SubjectOf;
    if (s == "object-of") return EdgeType::ObjectOf;
    if (s == "causal-edge") return EdgeType::CausalEdge;
    throw CorruptFile("unknown edge type: " + s);
}

const KgNode* KnowledgeGraph::find_node(const NodeRef& ref) const {
    auto it = nodes_.find(ref);
    return it == nodes_.end() ? nullptr : &it->second;
}

bool KnowledgeGraph::add_node(const KgNode& node) {
    auto [it, inserted] = nodes_.emplace(node.ref, node);
    return inserted;
}

std::string KnowledgeGraph::edge_key(const KgEdge& e) {
    return to_string(e.type) + "|" + to_string(e.src.type) + ":" + e.src.key + "|" +
           to_string(e.dst.type) + ":" + e.dst.key;
}

bool KnowledgeGraph::add_edge(const KgEdge& edge) {
    if (!has_node(edge.src))
        throw DanglingReference("edge source missing: " + to_string(edge.src.type) + ":" +
                                edge.src.key);
    if (!has_node(edge.dst))
        throw DanglingReference("edge target missing: " + to_string(edge.dst.type) + ":" +
                                edge.dst.key);
    auto [it, inserted] = edges_.emplace(edge_key(edge), edge);
    return inserted;
}

std::vector<KgNode> KnowledgeGraph::nodes_sorted() const {
    std::vector<KgNode> out;
    out.reserve(nodes_.size());
    for (const auto& [ref, node] : nodes_) out.push_back(node);
    return out;  // map order is already (type, key)
}

std::vector<KgEdge> KnowledgeGraph::edges_sorted() const {
    std::vector<KgEdge> out;
    out.reserve(edges_.size());
    for (const auto& [key, edge] : edges_) out.push_back(edge);
    return out;
}

std::vector<const KgNode*> KnowledgeGraph::nodes_of_type(NodeType t) const {
    std::vector<const KgNode*> out;
    for (const auto& [ref, node] : nodes_)
        if (ref.type == t) out.push_back(&node);
    return out;
}

bool KnowledgeGraph::structurally_equal(const KnowledgeGraph& other) const {
    if (nodes_.size() != other.nodes_.size() || edges_.size() != other.edges_.size() ||
        version_ != other.version_)
        return false;
    for (const auto& [ref, node] : nodes_) {
        const KgNode* o = other.find_node(ref);
        if (!o || o->attrs != node.attrs) return false;
    }
    for (const auto& [key, edge] : edges_) {
        auto it = other.edges_.find(key);
        if (it == other.edges_.end() || it->second.attrs != edge.attrs) return false;
    }
    return true;
}

void KnowledgeGraph::persist(const std::string& path) const {
    std::ostringstream body;
    json header = {{"kind", "header"},
                   {"format", 1},
                   {"version", version_},
                   {"nodes", nodes_.size()},
                   {"edges", edges_.size()}};
    body << header.dump() << "\n";
    for (const auto& [ref, node] : nodes_) {
        json line = {{"kind", "node"},
                     {"type", to_string(ref.type)},
                     {"key", ref.key},
                     {"attrs", node.attrs}};
        body << line.dump() << "\n";
    }
    for (const auto& [key, edge] : edges_) {
        json line = {{"kind", "edge"},
                     {"type", to_string(edge.type)},
                     {"src", {to_string(edge.src.type), edge.src.key}},
                     {"dst", {to_string(edge.dst.type), edge.dst.key}},
                     {"attrs", edge.attrs}};
        body << line.dump() << "\n";
    }
    std::string content = body.str();
    json checksum = {{"kind", "checksum"}, {"sha256", sha256_hex(content)}};

    if (auto dir = fs::path(path).parent_path(); !dir.empty()) fs::create_directories(dir);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write file: " + path);
    out << content << checksum.dump() << "\n";
}

KnowledgeGraph KnowledgeGraph::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file: " + path);

    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) lines.push_back(line);
    }
    if (lines.size() < 2) throw CorruptFile("snapshot too short: " + path);

    json tail;
    try {
        tail = json::parse(lines.back());
    } catch (const json::exception&) {
        throw CorruptFile("unparseable checksum line: " + path);
    }
    if (tail.value("kind", "") != "checksum") throw CorruptFile("missing checksum line: " + path);

    std::string content;
    for (size_t i = 0; i + 1 < lines.size(); ++i) content += lines[i] + "\n";
    if (sha256_hex(content) != tail.value("sha256", ""))
        throw CorruptFile("checksum mismatch: " + path);

    KnowledgeGraph g;
    json header = json::parse(lines.front());
    if (header.value("kind", "") != "header") throw CorruptFile("missing header line: " + path);
    if (header.value("format", 0) != 1)
        throw VersionSkew("unsupported snapshot format " +
                          std::to_string(header.value("format", 0)));
    g.version_ = header.value("version", 0ULL);

    for (size_t i = 1; i + 1 < lines.size(); ++i) {
        json rec;
        try {
            rec = json::parse(lines[i]);
        } catch (const json::exception&) {
            throw CorruptFile("unparseable record at line " + std::to_string(i + 1));
        }
        std::string kind = rec.value("kind", "");
        if (kind == "node") {
            KgNode node;
            node.ref = {node_type_from_string(rec.at("type")), rec.at("key")};
            node.attrs = rec.value("attrs", json::object());
            g.nodes_.emplace(node.ref, node);
        } else if (kind == "edge") {
            KgEdge edge;
            edge.type = edge_type_from_string(rec.at("type"));
            edge.src = {node_type_from_string(rec.at("src")[0]), rec.at("src")[1]};
            edge.dst = {node_type_from_string(rec.at("dst")[0]), rec.at("dst")[1]};
            edge.attrs = rec.value("attrs", json::object());
            g.edges_.emplace(edge_key(edge), edge);
        } else {
            throw CorruptFile("unknown record kind '" + kind + "'");
        }
    }
    if (g.nodes_.size() != header.value("nodes", size_t{0}) ||
        g.edges_.size() != header.value("edges", size_t{0}))
        throw CorruptFile("header counts disagree with records: " + path);
    return g;
}

void KnowledgeGraph::export_graphml(const std::string& path) const {
    auto esc = [](const std::string& s) {
        std::string out;
        for (char c : s) {
            switch (c) {
                case '&': out += "&amp;"; break;
                case '<': out += "&lt;"; break;
                case '>': out += "&gt;"; break;
                case '"': out += "&quot;"; break;
                default: out.push_back(c);
            }
        }
        return out;
    };
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write file: " + path);
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
        << "  <key id=\"ntype\" for=\"node\" attr.name=\"type\" attr.type=\"string\"/>\n"
        << "  <key id=\"nattrs\" for=\"node\" attr.name=\"attrs\" attr.type=\"string\"/>\n"
        << "  <key id=\"etype\" for=\"edge\" attr.name=\"type\" attr.type=\"string\"/>\n"
        << "  <graph id=\"G\" edgedefault=\"directed\">\n";
    for (const auto& [ref, node] : nodes_) {
        out << "    <node id=\"" << esc(to_string(ref.type) + ":" + ref.key) << "\">"
            << "<data key=\"ntype\">" << esc(to_string(ref.type)) << "</data>"
            << "<data key=\"nattrs\">" << esc(node.attrs.dump()) << "</data></node>\n";
    }
    size_t eid = 0;
    for (const auto& [key, edge] : edges_) {
        out << "    <edge id=\"e" << eid++ << "\" source=\""
            << esc(to_string(edge.src.type) + ":" + edge.src.key) << "\" target=\""
            << esc(to_string(edge.dst.type) + ":" + edge.dst.key) << "\">"
            << "<data key=\"etype\">" << esc(to_string(edge.type)) << "</data></edge>\n";
    }
    out << "  </graph>\n</graphml>\n";
}

void KnowledgeGraph::append_changelog(const std::string& log_path,
                                      const json& batch_summary) const {
    if (auto dir = fs::path(log_path).parent_path(); !dir.empty()) fs::create_directories(dir);
    std::ofstream out(log_path, std::ios::binary | std::ios::app);
    if (!out) throw Error("cannot write file: " + log_path);
    out << batch_summary.dump() << "\n";
}

std::string claim_natural_key(const Claim& c) {
    auto part = [](const std::string& text, int feature) {
        return feature >= 0 ? "f" + std::to_string(feature) : "t:" + text;
    };
    return part(c.subject_text, c.subject_feature) + "|" + c.relation + "|" +
           part(c.object_text, c.object_feature) + "|" + c.doc_id;
}

ExpandStats expand(KnowledgeGraph& g, const std::vector<ScoredClaim>& front_claims,
                   const std::vector<Hypothesis>& hypotheses,
                   const std::map<std::string, std::vector<Document>>& docs_by_hypothesis,
                   const std::vector<std::string>& feature_names, const ScoreWeights& w,
                   bool exploratory, WarningLog* warnings) {
    ExpandStats stats;

    std::map<std::string, const Hypothesis*> hyp_by_id;
    for (const auto& h : hypotheses) hyp_by_id[h.id] = &h;

    // claims entering the graph: Y >= tau_c
    std::vector<const ScoredClaim*> selected;
    std::set<std::string> selected_hyps;
    for (const auto& sc : front_claims) {
        if (sc.validation < w.tau_c) continue;
        if (!hyp_by_id.count(sc.claim.hypothesis_id))
            throw DanglingReference("claim references unknown hypothesis " +
                                    sc.claim.hypothesis_id);
        selected.push_back(&sc);
        selected_hyps.insert(sc.claim.hypothesis_id);
    }

    size_t nodes_before = g.node_count();
    size_t edges_before = g.edge_count();

    auto mark = [&](json attrs) {
        if (exploratory) attrs["exploratory"] = true;
        return attrs;
    };

    // hypothesis nodes for hypotheses that produced selected claims
    for (const auto& hid : selected_hyps) {
        const Hypothesis* h = hyp_by_id[hid];
        KgNode node;
        node.ref = {NodeType::Hypothesis, hid};
        node.attrs = mark({{"population", h->population},
                           {"intervention", h->intervention},
                           {"comparison", h->comparison},
                           {"outcome", h->outcome},
                           {"cluster", h->cluster_id},
                           {"provenance", h->provenance}});
        g.add_node(node);
        NodeRef phen{NodeType::Phenotype, std::to_string(h->cluster_id)};
        if (g.has_node(phen))
            g.add_edge({EdgeType::Hypothesizes, phen, node.ref, mark(json::object())});

        // retained documents of this hypothesis
        auto docs_it = docs_by_hypothesis.find(hid);
        if (docs_it == docs_by_hypothesis.end()) continue;
        for (const auto& d : docs_it->second) {
            if (d.match_score < w.tau_d) continue;
            KgNode doc_node;
            doc_node.ref = {NodeType::Document, d.doc_id};
            doc_node.attrs = mark({{"title", d.title},
                                   {"year", d.year},
                                   {"study_type", to_string(d.study_type)},
                                   {"match_score", d.match_score}});
            if (g.add_node(doc_node)) ++stats.documents_added;
            g.add_edge({EdgeType::SupportedBy, node.ref, doc_node.ref, mark(json::object())});
        }
    }

    // claim nodes; duplicates across hypotheses keep the max NPS
    std::map<std::string, const ScoredClaim*> by_key;
    for (const ScoredClaim* sc : selected) {
        std::string key = claim_natural_key(sc->claim);
        auto it = by_key.find(key);
        if (it == by_key.end()) {
            by_key[key] = sc;
        } else if (sc->nps > it->second->nps) {
            if (warnings)
                warnings->warn("claim " + key + " reachable from multiple hypotheses; keeping max NPS");
            it->second = sc;
        }
    }

    for (const auto& [key, sc] : by_key) {
        const Claim& c = sc->claim;
        KgNode node;
        node.ref = {NodeType::Claim, key};
        node.attrs = mark({{"subject", c.subject_text},
                           {"relation", c.relation},
                           {"object", c.object_text},
                           {"doc_id", c.doc_id},
                           {"hypothesis_id", c.hypothesis_id},
                           {"relevance", sc->relevance},
                           {"validation", sc->validation},
                           {"nps", sc->nps},
                           {"confidence", c.meta.confidence},
                           {"evidence_type", c.meta.evidence_type}});
        if (g.add_node(node)) ++stats.claims_added;

        NodeRef hyp{NodeType::Hypothesis, c.hypothesis_id};
        g.add_edge({EdgeType::Claims, hyp, node.ref, mark(json::object())});

        NodeRef doc{NodeType::Document, c.doc_id};
        if (g.has_node(doc))
            g.add_edge({EdgeType::SupportedBy, node.ref, doc, mark(json::object())});

        auto entity_ref = [&](const std::string& text, int feature) -> NodeRef {
            if (feature >= 0 && feature < static_cast<int>(feature_names.size()))
                return {NodeType::Feature, feature_names[feature]};
            return {NodeType::ExternalEntity, text};
        };
        NodeRef subj = entity_ref(c.subject_text, c.subject_feature);
        NodeRef obj = entity_ref(c.object_text, c.object_feature);
        if (!g.has_node(subj))
            g.add_node({subj, mark(subj.type == NodeType::ExternalEntity
                                       ? json{{"text", c.subject_text}}
                                       : json{{"name", subj.key}})});
        if (!g.has_node(obj))
            g.add_node({obj, mark(obj.type == NodeType::ExternalEntity
                                      ? json{{"text", c.object_text}}
                                      : json{{"name", obj.key}})});
        g.add_edge({EdgeType::SubjectOf, node.ref, subj, mark(json::object())});
        g.add_edge({EdgeType::ObjectOf, node.ref, obj, mark(json::object())});
    }

    stats.nodes_added = g.node_count() - nodes_before;
    stats.edges_added = g.edge_count() - edges_before;
    stats.changed = stats.nodes_added > 0 || stats.edges_added > 0;
    if (stats.changed) g.bump_version();
    return stats;
}

}  // namespace phenokg
