#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "phenokg/common.hpp"
#include "phenokg/phenotype.hpp"

namespace phenokg {

struct ZeroVector : Error {
    using Error::Error;
};

struct OnlineConfig {
    double alpha = 0.6;       // structural vs semantic mix
    double tau_match = 0.6;
    double tau_anom = 0.3;    // must stay below tau_match
    int tau_nc = 5;           // promotion support threshold
    double soft_band = 0.8;   // soft set: score_k >= soft_band * score*
    int iforest_trees = 100;
    int iforest_subsample = 256;
    double iforest_cutoff = 0.6;
    double merge_radius = 0.9;  // cosine to join an existing candidate
    int accel_max_hypotheses = 3;
    int accel_doc_limit = 5;

    void validate() const;
};

struct OnlineState {
    int state_id = -1;
    Vector raw;     // encoded feature vector (training encoders)
    Vector z;       // embedding
    Vector pi;      // soft assignment over K phenotypes
    Vector pi_sp;   // fuzzy SP-space vector: sum_k pi_k * Omega_k
};

// pi_sp = sum_k pi_k * Omega_k; both operands of the semantic cosine live in
// SP space.
Vector sp_space_vector(const Vector& pi, const std::vector<SPMixture>& mixtures);

// score_k = alpha * cos01(z, mu_k) + (1 - alpha) * cos01(pi_sp, Omega_k);
// cosines are rescaled from [-1, 1] to [0, 1].
Vector score_state(const OnlineState& s, const ClusterModel& model,
                   const std::vector<SPMixture>& mixtures, const OnlineConfig& cfg);

enum class MatchKind { Match, SoftMatch, Anomaly };

std::string to_string(MatchKind k);

struct MatchDecision {
    MatchKind kind = MatchKind::Anomaly;
    int best_cluster = -1;
    double best_score = 0.0;
    Vector scores;
    // soft set with renormalized weights; singleton {best} for Match
    std::vector<std::pair<int, double>> soft_set;
};

MatchDecision decide(const Vector& scores, const OnlineConfig& cfg);

// Standard isolation forest: random split trees on a subsample, anomaly
// score 2^(-E[path]/c(psi)).
class IsolationForest {
  public:
    static IsolationForest fit(const Matrix& points, int trees, int subsample, uint64_t seed);

    double anomaly_score(const Vector& x) const;
    // -1 anomalous (score > cutoff), +1 inlier
    int indicator(const Vector& x, double cutoff) const;

    // average path-length normalizer c(n)
    static double c_factor(int n);

  private:
    struct Node {
        int feature = -1;     // -1 = leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        int size = 0;  // leaf population
    };
    struct Tree {
        std::vector<Node> nodes;
    };

    double path_length(const Tree& tree, const Vector& x) const;

    std::vector<Tree> trees_;
    int subsample_ = 256;
};

struct CandidatePhenotype {
    Vector centroid;
    Vector sp_vector;
    std::vector<OnlineState> exemplars;
    int support = 0;  // n_c
};

// Single-owner buffer of candidate phenotypes. add() joins the nearest
// candidate within the merge radius or opens a new one; when support
// reaches tau_nc the candidate is removed and returned for promotion.
class CandidateBuffer {
  public:
    std::optional<CandidatePhenotype> add(const OnlineState& s, const OnlineConfig& cfg);

    const std::vector<CandidatePhenotype>& candidates() const { return candidates_; }

  private:
    std::vector<CandidatePhenotype> candidates_;
};

}  // namespace phenokg
