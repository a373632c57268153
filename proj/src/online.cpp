#include "phenokg/online.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "phenokg/rng.hpp"

namespace phenokg {

void OnlineConfig::validate() const {
    if (alpha < 0 || alpha > 1) throw ConfigError("online.alpha must be in [0,1]");
    if (!(tau_anom < tau_match))
        throw ConfigError("online: tau_anom must be strictly below tau_match");
    if (tau_match < 0 || tau_match > 1 || tau_anom < 0)
        throw ConfigError("online: thresholds must be in [0,1]");
    if (tau_nc < 1) throw ConfigError("online.tau_nc must be at least 1");
    if (soft_band <= 0 || soft_band > 1) throw ConfigError("online.soft_band must be in (0,1]");
    if (merge_radius < -1 || merge_radius > 1)
        throw ConfigError("online.merge_radius must be a cosine value");
    if (iforest_trees < 1 || iforest_subsample < 2)
        throw ConfigError("online: isolation forest parameters too small");
}

namespace {

double cosine(const Vector& a, const Vector& b) {
    double na = a.norm(), nb = b.norm();
    if (na < 1e-15 || nb < 1e-15) throw ZeroVector("cosine of a zero vector");
    return a.dot(b) / (na * nb);
}

double cos01(const Vector& a, const Vector& b) { return (cosine(a, b) + 1.0) / 2.0; }

}  // namespace

Vector sp_space_vector(const Vector& pi, const std::vector<SPMixture>& mixtures) {
    if (mixtures.empty()) throw Error("sp_space_vector: no SP mixtures");
    if (pi.size() != static_cast<Eigen::Index>(mixtures.size()))
        throw DimensionMismatch("pi length != number of clusters");
    Vector out = Vector::Zero(mixtures.front().omega.size());
    for (size_t k = 0; k < mixtures.size(); ++k) out += pi[k] * mixtures[k].omega;
    return out;
}

Vector score_state(const OnlineState& s, const ClusterModel& model,
                   const std::vector<SPMixture>& mixtures, const OnlineConfig& cfg) {
    if (static_cast<int>(mixtures.size()) != model.k)
        throw DimensionMismatch("mixtures count != K");
    Vector scores(model.k);
    for (int k = 0; k < model.k; ++k) {
        double structural = cos01(s.z, model.centroids.row(k).transpose());
        double semantic = cos01(s.pi_sp, mixtures[k].omega);
        scores[k] = cfg.alpha * structural + (1.0 - cfg.alpha) * semantic;
    }
    return scores;
}

std::string to_string(MatchKind k) {
    switch (k) {
        case MatchKind::Match: return "match";
        case MatchKind::SoftMatch: return "soft_match";
        case MatchKind::Anomaly: return "anomaly";
    }
    return "anomaly";
}

MatchDecision decide(const Vector& scores, const OnlineConfig& cfg) {
    if (scores.size() == 0) throw Error("decide: empty score vector");
    MatchDecision d;
    d.scores = scores;
    Eigen::Index best;
    d.best_score = scores.maxCoeff(&best);
    d.best_cluster = static_cast<int>(best);

    if (d.best_score >= cfg.tau_match) {
        d.kind = MatchKind::Match;
        d.soft_set = {{d.best_cluster, 1.0}};
    } else if (d.best_score < cfg.tau_anom) {
        d.kind = MatchKind::Anomaly;
    } else {
        d.kind = MatchKind::SoftMatch;
        double total = 0.0;
        for (Eigen::Index k = 0; k < scores.size(); ++k) {
            if (scores[k] >= cfg.soft_band * d.best_score) total += scores[k];
        }
        for (Eigen::Index k = 0; k < scores.size(); ++k) {
            if (scores[k] >= cfg.soft_band * d.best_score)
                d.soft_set.push_back({static_cast<int>(k), scores[k] / total});
        }
    }
    return d;
}

double IsolationForest::c_factor(int n) {
    if (n <= 1) return 0.0;
    double h = std::log(static_cast<double>(n - 1)) + 0.5772156649015329;
    return 2.0 * h - 2.0 * static_cast<double>(n - 1) / static_cast<double>(n);
}

IsolationForest IsolationForest::fit(const Matrix& points, int trees, int subsample,
                                     uint64_t seed) {
    const int n = static_cast<int>(points.rows());
    const int f = static_cast<int>(points.cols());
    if (n < 2) throw Error("isolation forest needs at least 2 points");

    IsolationForest forest;
    forest.subsample_ = std::min(subsample, n);
    int depth_limit = static_cast<int>(
        std::ceil(std::log2(std::max(2, forest.subsample_))));

    Rng rng(derive_seed(seed, "iforest"));
    std::vector<int> all(n);
    std::iota(all.begin(), all.end(), 0);

    for (int t = 0; t < trees; ++t) {
        std::vector<int> sample = all;
        rng.shuffle(sample);
        sample.resize(forest.subsample_);

        Tree tree;
        // iterative construction: stack of (index set, depth, node slot)
        struct Item {
            std::vector<int> idx;
            int depth;
            int slot;
        };
        tree.nodes.push_back({});
        std::vector<Item> stack{{sample, 0, 0}};
        while (!stack.empty()) {
            Item item = std::move(stack.back());
            stack.pop_back();

            bool make_leaf = item.idx.size() <= 1 || item.depth >= depth_limit;
            double lo = 0, hi = 0;
            int feature = -1;
            if (!make_leaf) {
                // pick among features with spread; give up after a few draws
                for (int attempt = 0; attempt < 8 && feature < 0; ++attempt) {
                    int cand = static_cast<int>(rng.uniform_index(f));
                    lo = hi = points(item.idx[0], cand);
                    for (int i : item.idx) {
                        lo = std::min(lo, points(i, cand));
                        hi = std::max(hi, points(i, cand));
                    }
                    if (hi > lo) feature = cand;
                }
                if (feature < 0) make_leaf = true;
            }
            if (make_leaf) {
                tree.nodes[item.slot].feature = -1;
                tree.nodes[item.slot].size = static_cast<int>(item.idx.size());
                continue;
            }
            double threshold = rng.uniform(lo, hi);
            std::vector<int> left, right;
            for (int i : item.idx) {
                (points(i, feature) < threshold ? left : right).push_back(i);
            }
            int left_slot = static_cast<int>(tree.nodes.size());
            int right_slot = left_slot + 1;
            tree.nodes.push_back({});
            tree.nodes.push_back({});
            Node& node = tree.nodes[item.slot];
            node.feature = feature;
            node.threshold = threshold;
            node.left = left_slot;
            node.right = right_slot;
            stack.push_back({std::move(left), item.depth + 1, left_slot});
            stack.push_back({std::move(right), item.depth + 1, right_slot});
        }
        forest.trees_.push_back(std::move(tree));
    }
    return forest;
}

double IsolationForest::path_length(const Tree& tree, const Vector& x) const {
    int node = 0;
    double depth = 0.0;
    while (tree.nodes[node].feature >= 0) {
        const Node& nd = tree.nodes[node];
        node = x[nd.feature] < nd.threshold ? nd.left : nd.right;
        depth += 1.0;
    }
    return depth + c_factor(tree.nodes[node].size);
}

double IsolationForest::anomaly_score(const Vector& x) const {
    double mean_path = 0.0;
    for (const auto& tree : trees_) mean_path += path_length(tree, x);
    mean_path /= static_cast<double>(trees_.size());
    return std::pow(2.0, -mean_path / c_factor(subsample_));
}

int IsolationForest::indicator(const Vector& x, double cutoff) const {
    return anomaly_score(x) > cutoff ? -1 : 1;
}

std::optional<CandidatePhenotype> CandidateBuffer::add(const OnlineState& s,
                                                       const OnlineConfig& cfg) {
    int best = -1;
    double best_cos = -2.0;
    for (size_t i = 0; i < candidates_.size(); ++i) {
        double c = cosine(s.z, candidates_[i].centroid);
        if (c > best_cos) {
            best_cos = c;
            best = static_cast<int>(i);
        }
    }

    if (best >= 0 && best_cos >= cfg.merge_radius) {
        CandidatePhenotype& cand = candidates_[best];
        cand.support += 1;
        double w = 1.0 / static_cast<double>(cand.support);
        cand.centroid = (1.0 - w) * cand.centroid + w * s.z;
        cand.sp_vector = (1.0 - w) * cand.sp_vector + w * s.pi_sp;
        cand.exemplars.push_back(s);
        if (cand.support >= cfg.tau_nc) {
            CandidatePhenotype promoted = std::move(cand);
            candidates_.erase(candidates_.begin() + best);
            return promoted;
        }
        return std::nullopt;
    }

    CandidatePhenotype cand;
    cand.centroid = s.z;
    cand.sp_vector = s.pi_sp;
    cand.exemplars = {s};
    cand.support = 1;
    if (cfg.tau_nc <= 1) {
        return cand;
    }
    candidates_.push_back(std::move(cand));
    return std::nullopt;
}

}  // namespace phenokg
