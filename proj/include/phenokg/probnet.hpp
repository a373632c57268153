#pragma once

#include <map>
#include <string>
#include <vector>

#include "phenokg/causal.hpp"
#include "phenokg/common.hpp"
#include "phenokg/ingest.hpp"

namespace phenokg {

struct InconsistentEvidence : Error {
    using Error::Error;
};

// Per-feature binning: quantile bins for numerics, one bin per distinct code
// for categoricals. Values map by "first edge >= value" so the bins
// partition the observed range.
struct Discretization {
    struct FeatureBins {
        std::vector<double> edges;  // ascending inner cut points, size = card - 1
        int cardinality = 1;
        bool categorical = false;
    };
    std::vector<FeatureBins> features;

    static Discretization fit(const Matrix& x, const std::vector<FeatureKind>& kinds,
                              int bins = 3);
    int bin(int feature, double value) const;
    Eigen::MatrixXi apply(const Matrix& x) const;
    int cardinality(int feature) const { return features.at(feature).cardinality; }
};

struct Query {
    int target = -1;
    std::map<int, int> evidence;  // feature -> bin
};

// Discrete Bayesian network on the thresholded causal DAG. CPTs use Laplace
// smoothing (alpha = 1); parents are capped at 4 by |w|.
struct BayesNet {
    int cluster_id = -1;
    std::vector<std::vector<int>> parents;  // per node
    std::vector<int> card;
    // cpt[i]: card[i] x (product of parent cards); column = mixed-radix parent
    // config, parents[0] least significant
    std::vector<Matrix> cpt;
    std::vector<std::string> feature_names;
    Discretization disc;

    int f() const { return static_cast<int>(card.size()); }
    int parent_config_count(int node) const;
    int parent_config_index(int node, const std::vector<int>& assignment) const;
};

BayesNet fit_bn(const Matrix& x, const CausalGraph& dag, const Discretization& disc,
                int parent_cap = 4, double laplace_alpha = 1.0);

// Exact inference by variable elimination with min-fill ordering.
Vector posterior(const BayesNet& bn, const Query& q);

std::vector<int> markov_blanket(const BayesNet& bn, int node);

// Expected conditional KL (mutual information) of (i -> ii), computed from
// posterior calls.
double mutual_information(const BayesNet& bn, int i, int ii);

// mutual_information normalized by log(card(ii)) into [0, 1].
double influence(const BayesNet& bn, int i, int ii);

double kl_divergence(const Vector& p, const Vector& q);

}  // namespace phenokg
