#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "phenokg/causal.hpp"
#include "phenokg/common.hpp"
#include "phenokg/embed.hpp"
#include "phenokg/ingest.hpp"

namespace phenokg {

struct TooFewStates : Error {
    using Error::Error;
};
struct ZeroSignature : Error {
    using Error::Error;
};

struct ClusterConfig {
    int knn = 15;
    int k_min = 2;
    int k_max = 10;
    int k_override = 0;  // 0 = choose by eigengap
    int kmeans_restarts = 10;
    int kmeans_max_iter = 100;
    uint64_t seed = 0;
};

struct ClusterModel {
    int k = 0;
    Matrix centroids;  // K x h, mean of member graph vectors
    std::vector<std::vector<int>> members;
    std::vector<int> labels;  // per training state
    double soft_temperature = 1.0;  // median squared inter-centroid distance
    double silhouette = 0.0;        // reported, never asserted
    std::vector<double> laplacian_eigenvalues;
    bool degenerate = false;

    int nearest_centroid(const Vector& z) const;
};

ClusterModel fit_clusters(const std::vector<GraphEmbedding>& embeddings,
                          const ClusterConfig& cfg, WarningLog* warnings = nullptr);

struct SoftAssignment {
    int state_id = -1;
    Vector pi;  // K, sums to 1
};

// pi_k = softmax(-||z - mu_k||^2 / T_a)
SoftAssignment soft_assign(const Vector& z, const ClusterModel& model);

// Literature-grounded named pattern with a signed feature signature.
struct StandardPhenotypeDef {
    std::string name;
    std::map<std::string, double> signature;  // feature -> weight in [-1, 1]
};

struct SPMixture {
    int cluster_id = -1;
    std::vector<std::string> sp_names;
    Vector omega;   // P(sp_m | P_k), sums to 1, strictly positive
    Vector scores;  // raw cosine similarities s_km
    double temperature = 0.5;
};

// s_km = cosine(cluster mean standardized profile, signature);
// omega = softmax_m(s_km / T).
std::vector<SPMixture> map_to_standard(const ClusterModel& model, const EncodedMatrix& m,
                                       const std::vector<StandardPhenotypeDef>& sps,
                                       double temperature);

struct DominantFeature {
    std::string name;
    double deviation = 0.0;  // standardized cluster-mean deviation
    int sign = 0;
};

struct SalientEdge {
    std::string source;
    std::string target;
    double weight = 0.0;
};

// Structured summary of one phenotype, consumed by hypothesis generation.
struct PhenotypeState {
    int cluster_id = -1;
    std::vector<DominantFeature> dominant_features;  // X~_k
    std::vector<SalientEdge> salient_edges;          // E~_k, top causal edges
    std::vector<std::string> context_sp;             // top-2 SP labels
    std::string population_text;
};

// Dominant features: |deviation| >= 0.5 (cap 8), or top-3 by |deviation| if
// none pass. Salient edges: top-5 by |w| from the thresholded graph.
PhenotypeState phenotype_state(const ClusterModel& model, const EncodedMatrix& m,
                               const SPMixture& sp_mix, const CausalGraph& causal);

// Mean standardized feature profile of a cluster (zero vector when empty).
Vector cluster_profile(const ClusterModel& model, const EncodedMatrix& m, int cluster);

// Mean silhouette coefficient in the embedding space (euclidean).
double silhouette_score(const Matrix& points, const std::vector<int>& labels, int k);

}  // namespace phenokg
