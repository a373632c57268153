#include "phenokg/phenotype.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "phenokg/rng.hpp"

namespace phenokg {

namespace {

Matrix stack_embeddings(const std::vector<GraphEmbedding>& embeddings) {
    if (embeddings.empty()) throw TooFewStates("no embeddings");
    const auto h = embeddings.front().graph_vector.size();
    Matrix z(embeddings.size(), h);
    for (size_t i = 0; i < embeddings.size(); ++i) {
        if (embeddings[i].graph_vector.size() != h)
            throw DimensionMismatch("mixed embedding widths");
        z.row(i) = embeddings[i].graph_vector.transpose();
    }
    return z;
}

// Self-tuning kNN similarity graph (local sigma = distance to the k-th
// neighbor), union-symmetrized.
Matrix knn_similarity(const Matrix& z, int knn) {
    const int n = static_cast<int>(z.rows());
    Matrix d2(n, n);
    for (int i = 0; i < n; ++i) {
        d2(i, i) = 0.0;
        for (int j = i + 1; j < n; ++j) {
            double d = (z.row(i) - z.row(j)).squaredNorm();
            d2(i, j) = d;
            d2(j, i) = d;
        }
    }
    int k = std::min(knn, n - 1);
    std::vector<double> sigma(n);
    std::vector<std::vector<int>> neigh(n);
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) {
        std::iota(idx.begin(), idx.end(), 0);
        std::nth_element(idx.begin(), idx.begin() + k, idx.end(), [&](int a, int b) {
            if (d2(i, a) != d2(i, b)) return d2(i, a) < d2(i, b);
            return a < b;  // deterministic ties
        });
        neigh[i].assign(idx.begin(), idx.begin() + k + 1);
        sigma[i] = std::max(std::sqrt(d2(i, idx[k])), 1e-12);
    }
    Matrix s = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j : neigh[i]) {
            if (j == i) continue;
            double w = std::exp(-d2(i, j) / (sigma[i] * sigma[j]));
            s(i, j) = std::max(s(i, j), w);
            s(j, i) = s(i, j);
        }
    }
    return s;
}

double kmeans_once(const Matrix& u, int k, Rng& rng, int max_iter, std::vector<int>& labels) {
    const int n = static_cast<int>(u.rows());
    Matrix centers(k, u.cols());

    // k-means++ seeding
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    int first = static_cast<int>(rng.uniform_index(n));
    centers.row(0) = u.row(first);
    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            double d = (u.row(i) - centers.row(c - 1)).squaredNorm();
            dist[i] = std::min(dist[i], d);
            total += dist[i];
        }
        int pick = 0;
        if (total > 0.0) {
            double r = rng.uniform() * total;
            double acc = 0.0;
            for (int i = 0; i < n; ++i) {
                acc += dist[i];
                if (acc >= r) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = static_cast<int>(rng.uniform_index(n));
        }
        centers.row(c) = u.row(pick);
    }

    labels.assign(n, 0);
    double inertia = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        bool changed = false;
        inertia = 0.0;
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double bd = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                double d = (u.row(i) - centers.row(c)).squaredNorm();
                if (d < bd) {
                    bd = d;
                    best = c;
                }
            }
            if (labels[i] != best) {
                labels[i] = best;
                changed = true;
            }
            inertia += bd;
        }
        Matrix sums = Matrix::Zero(k, u.cols());
        std::vector<int> counts(k, 0);
        for (int i = 0; i < n; ++i) {
            sums.row(labels[i]) += u.row(i);
            ++counts[labels[i]];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[c] > 0) {
                centers.row(c) = sums.row(c) / counts[c];
            } else {
                // re-seed an empty cluster on the farthest point
                int far = 0;
                double fd = -1.0;
                for (int i = 0; i < n; ++i) {
                    double d = (u.row(i) - centers.row(labels[i])).squaredNorm();
                    if (d > fd) {
                        fd = d;
                        far = i;
                    }
                }
                centers.row(c) = u.row(far);
                changed = true;
            }
        }
        if (!changed) break;
    }
    return inertia;
}

}  // namespace

double silhouette_score(const Matrix& points, const std::vector<int>& labels, int k) {
    const int n = static_cast<int>(points.rows());
    if (n < 2 || k < 2) return 0.0;
    std::vector<int> counts(k, 0);
    for (int l : labels) ++counts[l];
    double total = 0.0;
    int used = 0;
    for (int i = 0; i < n; ++i) {
        std::vector<double> mean_d(k, 0.0);
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            mean_d[labels[j]] += (points.row(i) - points.row(j)).norm();
        }
        int own = labels[i];
        if (counts[own] <= 1) continue;  // silhouette undefined for singletons
        double a = mean_d[own] / (counts[own] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) {
            if (c == own || counts[c] == 0) continue;
            b = std::min(b, mean_d[c] / counts[c]);
        }
        if (!std::isfinite(b)) continue;
        double denom = std::max(a, b);
        total += denom > 0 ? (b - a) / denom : 0.0;
        ++used;
    }
    return used > 0 ? total / used : 0.0;
}

int ClusterModel::nearest_centroid(const Vector& z) const {
    int best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
        double d = (centroids.row(c).transpose() - z).squaredNorm();
        if (d < bd) {
            bd = d;
            best = c;
        }
    }
    return best;
}

ClusterModel fit_clusters(const std::vector<GraphEmbedding>& embeddings,
                          const ClusterConfig& cfg, WarningLog* warnings) {
    if (cfg.k_min < 2 || cfg.k_max < cfg.k_min) throw ConfigError("bad cluster K range");
    const int n = static_cast<int>(embeddings.size());
    if (n < 2 * cfg.k_min)
        throw TooFewStates("need at least " + std::to_string(2 * cfg.k_min) + " states");

    Matrix z = stack_embeddings(embeddings);

    ClusterModel model;
    double spread = 0.0;
    for (int i = 1; i < n; ++i) spread = std::max(spread, (z.row(i) - z.row(0)).norm());
    if (spread < 1e-12) {
        model.degenerate = true;
        if (warnings) warnings->warn("clustering: all states identical; K forced to lower bound");
    }

    Matrix sim = knn_similarity(z, cfg.knn);
    Vector deg = sim.rowwise().sum();
    for (int i = 0; i < n; ++i) deg[i] = std::max(deg[i], 1e-12);
    Vector dinv = deg.array().sqrt().inverse();
    Matrix lap = Matrix::Identity(n, n) - dinv.asDiagonal() * sim * dinv.asDiagonal();

    Eigen::SelfAdjointEigenSolver<Matrix> eig(lap);
    const Vector& evals = eig.eigenvalues();
    int k_hi = std::min(cfg.k_max, n - 1);
    model.laplacian_eigenvalues.assign(evals.data(),
                                       evals.data() + std::min<int>(n, k_hi + 2));

    int k;
    if (model.degenerate) {
        k = cfg.k_min;
    } else if (cfg.k_override > 0) {
        k = cfg.k_override;
    } else {
        // largest eigengap lambda_{K+1} - lambda_K over the allowed range
        k = cfg.k_min;
        double best_gap = -1.0;
        for (int kk = cfg.k_min; kk <= k_hi; ++kk) {
            double gap = evals[kk] - evals[kk - 1];
            if (gap > best_gap + 1e-15) {
                best_gap = gap;
                k = kk;
            }
        }
    }
    k = std::min(k, n);

    // spectral embedding: first k eigenvectors, row-normalized
    Matrix u = eig.eigenvectors().leftCols(k);
    for (int i = 0; i < n; ++i) {
        double norm = u.row(i).norm();
        if (norm > 1e-12) u.row(i) /= norm;
    }

    Rng rng(derive_seed(cfg.seed, "spectral-kmeans"));
    std::vector<int> best_labels;
    double best_inertia = std::numeric_limits<double>::infinity();
    for (int r = 0; r < cfg.kmeans_restarts; ++r) {
        std::vector<int> labels;
        double inertia = kmeans_once(u, k, rng, cfg.kmeans_max_iter, labels);
        if (inertia < best_inertia) {
            best_inertia = inertia;
            best_labels = std::move(labels);
        }
    }

    model.k = k;
    model.labels = best_labels;
    model.members.assign(k, {});
    for (int i = 0; i < n; ++i) model.members[best_labels[i]].push_back(i);

    const auto h = z.cols();
    model.centroids = Matrix::Zero(k, h);
    Vector global_mean = z.colwise().mean();
    for (int c = 0; c < k; ++c) {
        if (model.members[c].empty()) {
            model.centroids.row(c) = global_mean.transpose();
            if (warnings) warnings->warn("clustering: cluster " + std::to_string(c) + " is empty");
            continue;
        }
        for (int i : model.members[c]) model.centroids.row(c) += z.row(i);
        model.centroids.row(c) /= static_cast<double>(model.members[c].size());
    }

    // soft temperature: median squared inter-centroid distance
    std::vector<double> d2;
    for (int a = 0; a < k; ++a)
        for (int b = a + 1; b < k; ++b)
            d2.push_back((model.centroids.row(a) - model.centroids.row(b)).squaredNorm());
    std::sort(d2.begin(), d2.end());
    double median = d2.empty() ? 1.0 : d2[d2.size() / 2];
    model.soft_temperature = median > 1e-12 ? median : 1.0;

    model.silhouette = silhouette_score(z, best_labels, k);
    return model;
}

SoftAssignment soft_assign(const Vector& z, const ClusterModel& model) {
    if (model.k <= 0) throw Error("soft_assign: model not fitted");
    Vector score(model.k);
    for (int c = 0; c < model.k; ++c)
        score[c] = -(model.centroids.row(c).transpose() - z).squaredNorm() /
                   model.soft_temperature;
    double mx = score.maxCoeff();
    Vector e = (score.array() - mx).exp();
    SoftAssignment out;
    out.pi = e / e.sum();
    return out;
}

Vector cluster_profile(const ClusterModel& model, const EncodedMatrix& m, int cluster) {
    Vector profile = Vector::Zero(m.f());
    const auto& members = model.members.at(cluster);
    for (int i : members) profile += m.values.row(i).transpose();
    if (!members.empty()) profile /= static_cast<double>(members.size());
    return profile;
}

std::vector<SPMixture> map_to_standard(const ClusterModel& model, const EncodedMatrix& m,
                                       const std::vector<StandardPhenotypeDef>& sps,
                                       double temperature) {
    if (sps.empty()) throw ConfigError("need at least one standard phenotype definition");
    if (temperature <= 0) throw ConfigError("SP temperature must be positive");
    const int nf = static_cast<int>(m.f());

    Matrix signatures(sps.size(), nf);
    for (size_t s = 0; s < sps.size(); ++s) {
        double norm2 = 0.0;
        for (int c = 0; c < nf; ++c) {
            auto it = sps[s].signature.find(m.column_names[c]);
            double v = it == sps[s].signature.end() ? 0.0 : it->second;
            signatures(s, c) = v;
            norm2 += v * v;
        }
        if (norm2 <= 0.0) throw ZeroSignature("standard phenotype '" + sps[s].name +
                                              "' has an all-zero signature");
    }

    std::vector<SPMixture> out;
    for (int c = 0; c < model.k; ++c) {
        Vector profile = cluster_profile(model, m, c);
        double pnorm = profile.norm();
        SPMixture mix;
        mix.cluster_id = c;
        mix.temperature = temperature;
        mix.scores.resize(sps.size());
        for (size_t s = 0; s < sps.size(); ++s) {
            mix.sp_names.push_back(sps[s].name);
            double snorm = signatures.row(s).norm();
            mix.scores[s] = pnorm > 1e-12
                                ? profile.dot(signatures.row(s).transpose()) / (pnorm * snorm)
                                : 0.0;
        }
        Vector scaled = mix.scores / temperature;
        double mx = scaled.maxCoeff();
        Vector e = (scaled.array() - mx).exp();
        mix.omega = e / e.sum();
        out.push_back(std::move(mix));
    }
    return out;
}

PhenotypeState phenotype_state(const ClusterModel& model, const EncodedMatrix& m,
                               const SPMixture& sp_mix, const CausalGraph& causal) {
    PhenotypeState ps;
    ps.cluster_id = sp_mix.cluster_id;

    Vector profile = cluster_profile(model, m, sp_mix.cluster_id);
    std::vector<int> order(m.f());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (std::abs(profile[a]) != std::abs(profile[b]))
            return std::abs(profile[a]) > std::abs(profile[b]);
        return a < b;
    });
    for (int c : order) {
        if (std::abs(profile[c]) < 0.5 || ps.dominant_features.size() >= 8) break;
        ps.dominant_features.push_back(
            {m.column_names[c], profile[c], profile[c] >= 0 ? 1 : -1});
    }
    if (ps.dominant_features.empty()) {
        for (int r = 0; r < std::min<int>(3, static_cast<int>(order.size())); ++r) {
            int c = order[r];
            ps.dominant_features.push_back(
                {m.column_names[c], profile[c], profile[c] >= 0 ? 1 : -1});
        }
    }

    auto edges = causal.edges;
    std::sort(edges.begin(), edges.end(), [](const CausalEdge& a, const CausalEdge& b) {
        if (std::abs(a.weight) != std::abs(b.weight))
            return std::abs(a.weight) > std::abs(b.weight);
        if (a.source != b.source) return a.source < b.source;
        return a.target < b.target;
    });
    for (size_t e = 0; e < edges.size() && e < 5; ++e) {
        ps.salient_edges.push_back({m.column_names[edges[e].source],
                                    m.column_names[edges[e].target], edges[e].weight});
    }

    std::vector<int> sp_order(sp_mix.sp_names.size());
    std::iota(sp_order.begin(), sp_order.end(), 0);
    std::sort(sp_order.begin(), sp_order.end(), [&](int a, int b) {
        if (sp_mix.omega[a] != sp_mix.omega[b]) return sp_mix.omega[a] > sp_mix.omega[b];
        return a < b;
    });
    for (size_t s = 0; s < sp_order.size() && s < 2; ++s)
        ps.context_sp.push_back(sp_mix.sp_names[sp_order[s]]);

    std::ostringstream pop;
    pop << "individuals in phenotype " << ps.cluster_id << " characterized by ";
    for (size_t s = 0; s < ps.context_sp.size(); ++s) {
        if (s) pop << ", ";
        pop << ps.context_sp[s];
    }
    pop << " with elevated ";
    for (size_t d = 0; d < ps.dominant_features.size(); ++d) {
        if (d) pop << ", ";
        if (ps.dominant_features[d].sign < 0) pop << "low ";
        pop << ps.dominant_features[d].name;
    }
    ps.population_text = pop.str();
    return ps;
}

}  // namespace phenokg
