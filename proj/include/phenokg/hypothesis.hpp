#pragma once

#include <array>
#include <string>
#include <vector>

#include "phenokg/backend.hpp"
#include "phenokg/causal.hpp"
#include "phenokg/common.hpp"
#include "phenokg/phenotype.hpp"
#include "phenokg/probnet.hpp"

namespace phenokg {

// Structured PICO hypothesis tied to a (source, target) feature pair.
struct Hypothesis {
    std::string id;
    int cluster_id = -1;
    std::string population;  // phenotype descriptor text
    std::vector<std::string> sp_labels;
    std::string intervention;  // source feature
    std::string comparison = "no intervention";
    std::string outcome;  // target feature
    int source = -1;
    int target = -1;
    std::string provenance = "template";  // template | llm

    std::string rendered_text() const;
    std::string query_term() const;  // conjunction for literature search
};

struct NPSWeights {
    std::array<double, 6> theta{1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6};
    void validate() const;  // nonnegative, sum 1
};

// Raw component values: struct, path, prob, mb, var, lit.
struct NPSComponents {
    double s_struct = 0.0;
    double s_path = 0.0;
    double s_prob = 0.0;
    double s_mb = 0.0;  // 0 if source in MB(target), else 1
    double s_var = 0.0;
    double s_lit = 0.0;  // 1 - lit_support

    std::array<double, 6> as_array() const {
        return {s_struct, s_path, s_prob, s_mb, s_var, s_lit};
    }
};

struct NPSBreakdown {
    NPSComponents raw;
    NPSComponents normalized;
    double nps = 0.0;
};

// struct/path/prob/var are min-max normalized over the candidate batch;
// mb and lit are already in [0, 1]. A degenerate batch range maps to 0.
struct NpsBatchStats {
    std::array<double, 4> lo{0, 0, 0, 0};
    std::array<double, 4> hi{0, 0, 0, 0};
    static NpsBatchStats from(const std::vector<NPSComponents>& batch);
};

// lit_support in [0, 1]; NaN for "not retrieved yet" is not allowed here,
// callers use raw_nps_components with lit_support = 0 pre-retrieval and
// overwrite s_lit later.
NPSComponents raw_nps_components(int source, int target, const CausalGraph& cg,
                                 const BayesNet& bn,
                                 const std::vector<CausalGraph>& all_graphs,
                                 double lit_support);

NPSBreakdown score_nps(const NPSComponents& raw, const NpsBatchStats& stats,
                       const NPSWeights& w);

struct HypothesisConfig {
    int max_hypotheses = 10;
    std::string provider = "template";  // template | llm
};

json hypothesis_request(const PhenotypeState& ps, const CausalGraph& cg, const BayesNet& bn,
                        int max_hypotheses);

// Candidate pairs ranked by the pre-retrieval score (sum of the five
// normalized non-literature components); direction never reverses a
// thresholded edge. With an LLM backend the returned tuples pass the same
// direction filter; BackendUnavailable falls back to templates.
std::vector<Hypothesis> generate_hypotheses(const PhenotypeState& ps, const CausalGraph& cg,
                                            const BayesNet& bn,
                                            const std::vector<CausalGraph>& all_graphs,
                                            const HypothesisConfig& cfg,
                                            LlmBackend* backend = nullptr,
                                            WarningLog* warnings = nullptr);

// true when (source -> target) contradicts a thresholded edge orientation
bool reverses_causal_edge(const CausalGraph& cg, int source, int target);

}  // namespace phenokg
