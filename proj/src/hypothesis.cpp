#include "phenokg/hypothesis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "phenokg/text.hpp"

namespace phenokg {

std::string Hypothesis::rendered_text() const {
    std::ostringstream s;
    s << "does " << intervention << " versus " << comparison << " change " << outcome
      << " in " << population;
    return s.str();
}

std::string Hypothesis::query_term() const {
    std::ostringstream s;
    s << intervention << " AND " << outcome;
    for (const auto& sp : sp_labels) s << " AND " << sp;
    return s.str();
}

void NPSWeights::validate() const {
    double sum = 0.0;
    for (double t : theta) {
        if (t < 0.0) throw ConfigError("theta: weights must be nonnegative");
        sum += t;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw ConfigError("theta: weights must sum to 1 (got " + std::to_string(sum) + ")");
}

NpsBatchStats NpsBatchStats::from(const std::vector<NPSComponents>& batch) {
    NpsBatchStats s;
    bool first = true;
    for (const auto& c : batch) {
        std::array<double, 4> v{c.s_struct, c.s_path, c.s_prob, c.s_var};
        for (int k = 0; k < 4; ++k) {
            if (first || v[k] < s.lo[k]) s.lo[k] = v[k];
            if (first || v[k] > s.hi[k]) s.hi[k] = v[k];
        }
        first = false;
    }
    return s;
}

NPSComponents raw_nps_components(int source, int target, const CausalGraph& cg,
                                 const BayesNet& bn,
                                 const std::vector<CausalGraph>& all_graphs,
                                 double lit_support) {
    NPSComponents c;
    c.s_struct = std::abs(cg.w(source, target));
    c.s_path = strongest_path(cg, source, target).strength;
    c.s_prob = influence(bn, source, target);
    auto mb = markov_blanket(bn, target);
    bool in_mb = std::find(mb.begin(), mb.end(), source) != mb.end();
    c.s_mb = in_mb ? 0.0 : 1.0;

    // population variance of the (thresholded) weight across all phenotypes;
    // a singleton set has variance 0
    if (!all_graphs.empty()) {
        double mean = 0.0;
        for (const auto& g : all_graphs) mean += g.w(source, target);
        mean /= static_cast<double>(all_graphs.size());
        double var = 0.0;
        for (const auto& g : all_graphs) {
            double d = g.w(source, target) - mean;
            var += d * d;
        }
        c.s_var = var / static_cast<double>(all_graphs.size());
    }
    c.s_lit = 1.0 - std::clamp(lit_support, 0.0, 1.0);
    return c;
}

namespace {

double minmax(double v, double lo, double hi) {
    if (hi <= lo) return 0.0;
    return (v - lo) / (hi - lo);
}

}  // namespace

NPSBreakdown score_nps(const NPSComponents& raw, const NpsBatchStats& stats,
                       const NPSWeights& w) {
    w.validate();
    NPSBreakdown out;
    out.raw = raw;
    out.normalized.s_struct = minmax(raw.s_struct, stats.lo[0], stats.hi[0]);
    out.normalized.s_path = minmax(raw.s_path, stats.lo[1], stats.hi[1]);
    out.normalized.s_prob = minmax(raw.s_prob, stats.lo[2], stats.hi[2]);
    out.normalized.s_mb = raw.s_mb;
    out.normalized.s_var = minmax(raw.s_var, stats.lo[3], stats.hi[3]);
    out.normalized.s_lit = std::clamp(raw.s_lit, 0.0, 1.0);
    auto n = out.normalized.as_array();
    out.nps = 0.0;
    for (int k = 0; k < 6; ++k) out.nps += w.theta[k] * n[k];
    return out;
}

bool reverses_causal_edge(const CausalGraph& cg, int source, int target) {
    return cg.has_edge(target, source) && !cg.has_edge(source, target);
}

json hypothesis_request(const PhenotypeState& ps, const CausalGraph& cg, const BayesNet& bn,
                        int max_hypotheses) {
    json req;
    req["task"] = "hypotheses";
    req["cluster_id"] = ps.cluster_id;
    req["population"] = ps.population_text;
    req["sp_labels"] = ps.context_sp;
    json feats = json::array();
    for (const auto& d : ps.dominant_features)
        feats.push_back({{"name", d.name}, {"direction", d.sign}});
    req["dominant_features"] = feats;
    json edges = json::array();
    for (const auto& e : cg.edges) {
        edges.push_back({{"source", cg.feature_names.at(e.source)},
                         {"target", cg.feature_names.at(e.target)},
                         {"weight", e.weight}});
    }
    req["edges"] = edges;
    json blankets = json::object();
    for (int v = 0; v < bn.f(); ++v) {
        json names = json::array();
        for (int m : markov_blanket(bn, v)) names.push_back(bn.feature_names.at(m));
        blankets[bn.feature_names.at(v)] = names;
    }
    req["markov_blankets"] = blankets;
    req["max_hypotheses"] = max_hypotheses;
    return req;
}

namespace {

Hypothesis render_template_hypothesis(const PhenotypeState& ps, const CausalGraph& cg,
                                      int source, int target) {
    Hypothesis h;
    h.cluster_id = ps.cluster_id;
    h.population = ps.population_text;
    h.sp_labels = ps.context_sp;
    h.intervention = cg.feature_names.at(source);
    h.outcome = cg.feature_names.at(target);
    h.source = source;
    h.target = target;
    h.provenance = "template";
    h.id = "h-c" + std::to_string(ps.cluster_id) + "-" + h.intervention + "-" + h.outcome;
    return h;
}

int link_feature(const std::string& text, const std::vector<std::string>& names) {
    for (size_t i = 0; i < names.size(); ++i)
        if (names[i] == text) return static_cast<int>(i);
    int best = -1;
    double best_sim = 0.0;
    for (size_t i = 0; i < names.size(); ++i) {
        double sim = edit_similarity(text, names[i]);
        if (sim > best_sim) {
            best_sim = sim;
            best = static_cast<int>(i);
        }
    }
    return best_sim >= 0.85 ? best : -1;
}

}  // namespace

std::vector<Hypothesis> generate_hypotheses(const PhenotypeState& ps, const CausalGraph& cg,
                                            const BayesNet& bn,
                                            const std::vector<CausalGraph>& all_graphs,
                                            const HypothesisConfig& cfg,
                                            LlmBackend* backend, WarningLog* warnings) {
    const int f = cg.f();

    if (cfg.provider == "llm" && backend != nullptr) {
        try {
            auto tuples = backend->hypotheses(hypothesis_request(ps, cg, bn, cfg.max_hypotheses));
            std::vector<Hypothesis> out;
            for (const auto& t : tuples) {
                int src = link_feature(t.intervention, cg.feature_names);
                int dst = link_feature(t.outcome, cg.feature_names);
                if (src < 0 || dst < 0 || src == dst) {
                    if (warnings)
                        warnings->warn("llm hypothesis dropped (unlinked entities): " +
                                       t.intervention + " -> " + t.outcome);
                    continue;
                }
                if (reverses_causal_edge(cg, src, dst)) {
                    if (warnings)
                        warnings->warn("llm hypothesis dropped (reverses causal edge): " +
                                       t.intervention + " -> " + t.outcome);
                    continue;
                }
                Hypothesis h = render_template_hypothesis(ps, cg, src, dst);
                if (!t.population.empty()) h.population = t.population;
                if (!t.comparison.empty()) h.comparison = t.comparison;
                h.provenance = "llm";
                out.push_back(std::move(h));
                if (static_cast<int>(out.size()) >= cfg.max_hypotheses) break;
            }
            return out;
        } catch (const BackendUnavailable& e) {
            if (warnings)
                warnings->warn(std::string("llm backend unavailable, using templates: ") +
                               e.what());
        }
    }

    // template path: every directionally admissible pair, ranked by the
    // pre-retrieval score
    struct Candidate {
        int source;
        int target;
        NPSComponents comp;
        double pre_score = 0.0;
    };
    std::vector<Candidate> cands;
    for (int i = 0; i < f; ++i) {
        for (int j = 0; j < f; ++j) {
            if (i == j || reverses_causal_edge(cg, i, j)) continue;
            Candidate c;
            c.source = i;
            c.target = j;
            c.comp = raw_nps_components(i, j, cg, bn, all_graphs, 0.0);
            cands.push_back(std::move(c));
        }
    }
    std::vector<NPSComponents> batch;
    for (const auto& c : cands) batch.push_back(c.comp);
    NpsBatchStats stats = NpsBatchStats::from(batch);
    for (auto& c : cands) {
        NPSComponents n;
        n.s_struct = c.comp.s_struct;
        n.s_path = c.comp.s_path;
        n.s_prob = c.comp.s_prob;
        n.s_var = c.comp.s_var;
        auto lo = stats.lo, hi = stats.hi;
        auto mm = [&](double v, int k) { return hi[k] > lo[k] ? (v - lo[k]) / (hi[k] - lo[k]) : 0.0; };
        c.pre_score = mm(n.s_struct, 0) + mm(n.s_path, 1) + mm(n.s_prob, 2) + c.comp.s_mb +
                      mm(n.s_var, 3);
    }
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        if (a.pre_score != b.pre_score) return a.pre_score > b.pre_score;
        if (a.source != b.source) return a.source < b.source;
        return a.target < b.target;
    });

    std::vector<Hypothesis> out;
    for (const auto& c : cands) {
        if (static_cast<int>(out.size()) >= cfg.max_hypotheses) break;
        out.push_back(render_template_hypothesis(ps, cg, c.source, c.target));
    }
    return out;
}

}  // namespace phenokg
