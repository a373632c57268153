// Acceptance suite: one pass/fail line per criterion. Exits nonzero when any
// criterion fails. Oracles live in tests/support and recompute expectations
// through independent routes.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <vector>

#include "phenokg/causal.hpp"
#include "phenokg/expm.hpp"
#include "phenokg/kgraph.hpp"
#include "phenokg/online.hpp"
#include "phenokg/pipeline.hpp"
#include "phenokg/probnet.hpp"
#include "phenokg/rng.hpp"
#include "phenokg/synth.hpp"
#include "support/oracles.hpp"

using namespace phenokg;
namespace fs = std::filesystem;

namespace {

struct Check {
    std::vector<std::string> failures;
    void require(bool ok, const std::string& what) {
        if (!ok) failures.push_back(what);
    }
};

struct Criterion {
    int id;
    std::string name;
    std::function<void(Check&)> run;
};

fs::path g_workspace;
PipelineConfig g_config;
double g_run_seconds = 0.0;

// shared golden run used by criteria 6, 8, 10 and 11
void build_golden_workspace() {
    g_workspace = fs::temp_directory_path() / "phenokg-acceptance";
    fs::remove_all(g_workspace);
    g_config = synth::write_golden_workspace(g_workspace.string(), 7);
}

CausalGraph graph_from(const Matrix& w) {
    CausalGraph g;
    g.w = w;
    g.raw_w = w;
    for (int i = 0; i < w.rows(); ++i)
        for (int j = 0; j < w.cols(); ++j)
            if (w(i, j) != 0.0) g.edges.push_back({i, j, w(i, j)});
    for (int i = 0; i < w.rows(); ++i) g.feature_names.push_back("f" + std::to_string(i));
    return g;
}

BayesNet random_small_bn(uint64_t seed, int max_nodes) {
    Rng rng(seed);
    int f = 3 + static_cast<int>(rng.uniform_index(max_nodes - 2));
    Matrix w = Matrix::Zero(f, f);
    int target_edges = f + static_cast<int>(rng.uniform_index(f));
    int added = 0;
    for (int attempt = 0; attempt < 6 * target_edges && added < target_edges; ++attempt) {
        int i = static_cast<int>(rng.uniform_index(f));
        int j = static_cast<int>(rng.uniform_index(f));
        if (i >= j || w(i, j) != 0.0) continue;
        w(i, j) = rng.uniform(0.4, 1.2) * (rng.uniform() < 0.5 ? -1 : 1);
        ++added;
    }
    int n = 150 + static_cast<int>(rng.uniform_index(200));
    Matrix x(n, f);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < f; ++c) x(r, c) = rng.normal();
    for (int r = 0; r < n; ++r)
        for (int i = 0; i < f; ++i)
            for (int j = i + 1; j < f; ++j)
                if (w(i, j) != 0.0) x(r, j) += 0.7 * w(i, j) * x(r, i);
    std::vector<FeatureKind> kinds(f, FeatureKind::Numeric);
    return fit_bn(x, graph_from(w), Discretization::fit(x, kinds, 3));
}

void criterion_notears(Check& c) {
    double total_shd = 0.0;
    for (uint64_t seed = 1; seed <= 10; ++seed) {
        auto sem = oracles::make_sem(seed, 10, 15, 1000);
        auto t0 = std::chrono::steady_clock::now();
        CausalGraph g = fit_notears(sem.x, {});
        double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        total_shd += oracles::shd(sem.w_true, g.w);
        c.require(g.h_final <= 1e-8,
                  "seed " + std::to_string(seed) + ": h=" + std::to_string(g.h_final));
        c.require(secs < 60.0, "seed " + std::to_string(seed) + " took " +
                                   std::to_string(secs) + "s");
    }
    double mean_shd = total_shd / 10.0;
    c.require(mean_shd <= 3.0, "mean SHD " + std::to_string(mean_shd) + " > 3");
}

void criterion_acyclicity(Check& c) {
    auto [h0, g0] = acyclicity(Matrix::Zero(5, 5));
    c.require(h0 == 0.0, "h(0) != 0");

    Matrix two = Matrix::Zero(2, 2);
    two(0, 1) = 1.0;
    two(1, 0) = 1.0;
    double h2 = acyclicity(two).first;
    double series = oracles::trace_expm_series(two.cwiseProduct(two)) - 2.0;
    c.require(std::abs(h2 - (2.0 * std::cosh(1.0) - 2.0)) < 1e-9, "2-cycle analytic value");
    c.require(std::abs(h2 - series) < 1e-9, "2-cycle vs power series");

    double worst = 0.0;
    for (uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(seed * 7 + 1);
        Matrix w(8, 8);
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 8; ++j) w(i, j) = 0.35 * rng.normal();
        auto [h, grad] = acyclicity(w);
        Matrix fd = oracles::fd_gradient(
            [](const Matrix& m) { return acyclicity(m).first; }, w);
        double rel = (grad - fd).cwiseAbs().maxCoeff() /
                     std::max(1.0, grad.cwiseAbs().maxCoeff());
        worst = std::max(worst, rel);
    }
    c.require(worst <= 1e-4, "gradient rel err " + std::to_string(worst));
}

void criterion_bn_exactness(Check& c) {
    double worst = 0.0;
    for (uint64_t seed = 1; seed <= 50; ++seed) {
        BayesNet bn = random_small_bn(seed, 12);
        Rng rng(seed + 5000);
        for (int trial = 0; trial < 4; ++trial) {
            Query q;
            q.target = static_cast<int>(rng.uniform_index(bn.f()));
            for (int v = 0; v < bn.f(); ++v)
                if (v != q.target && rng.uniform() < 0.3)
                    q.evidence[v] = static_cast<int>(rng.uniform_index(bn.card[v]));
            Vector ve = posterior(bn, q);
            Vector en = oracles::posterior_enum(bn, q);
            worst = std::max(worst, (ve - en).cwiseAbs().maxCoeff());
        }
    }
    c.require(worst < 1e-10, "VE vs enumeration " + std::to_string(worst));

    double worst_cmi = 0.0;
    for (uint64_t seed = 1; seed <= 8; ++seed) {
        BayesNet bn = random_small_bn(seed, 7);
        for (int target = 0; target < bn.f(); ++target) {
            auto mb = markov_blanket(bn, target);
            for (int other = 0; other < bn.f(); ++other) {
                if (other == target) continue;
                if (std::find(mb.begin(), mb.end(), other) != mb.end()) continue;
                worst_cmi = std::max(
                    worst_cmi, oracles::conditional_mi_enum(bn, target, other, mb));
            }
        }
    }
    c.require(worst_cmi < 1e-9, "MB conditional MI " + std::to_string(worst_cmi));
}

void criterion_influence(Check& c) {
    Rng rng(404);
    Matrix x(1000, 2);
    for (int i = 0; i < 1000; ++i) {
        x(i, 0) = rng.normal();
        x(i, 1) = rng.normal();
    }
    std::vector<FeatureKind> kinds(2, FeatureKind::Numeric);
    BayesNet indep =
        fit_bn(x, graph_from(Matrix::Zero(2, 2)), Discretization::fit(x, kinds, 3));
    double s = influence(indep, 0, 1);
    c.require(s >= 0.0, "negative influence");
    c.require(s <= 0.02, "independent pair influence " + std::to_string(s));

    Matrix copy(3000, 2);
    for (int i = 0; i < 3000; ++i) {
        double v = static_cast<double>(i % 3);
        copy(i, 0) = v;
        copy(i, 1) = v;
    }
    std::vector<FeatureKind> cat(2, FeatureKind::Categorical);
    Matrix w = Matrix::Zero(2, 2);
    w(0, 1) = 1.0;
    BayesNet det = fit_bn(copy, graph_from(w), Discretization::fit(copy, cat, 3));
    double sd = influence(det, 0, 1);
    c.require(sd >= 0.9, "deterministic copy influence " + std::to_string(sd));

    // S_prob >= 0 over random networks
    for (uint64_t seed = 1; seed <= 10; ++seed) {
        BayesNet bn = random_small_bn(seed, 8);
        for (int i = 0; i < bn.f(); ++i)
            for (int j = 0; j < bn.f(); ++j)
                if (i != j) c.require(influence(bn, i, j) >= 0.0, "negative influence");
    }
}

void criterion_pareto(Check& c) {
    for (int n : {10, 100, 1000}) {
        for (uint64_t seed = 1; seed <= 20; ++seed) {
            Rng rng(seed * 131 + n);
            std::vector<ObjectiveVector> v;
            std::vector<oracles::Obj3> o;
            for (int i = 0; i < n; ++i) {
                double r = rng.uniform(), y = rng.uniform(), s = rng.uniform();
                v.push_back({r, y, s});
                o.push_back({r, y, s});
            }
            if (pareto_front(v).front != oracles::pareto_bruteforce(o)) {
                c.require(false, "front mismatch at n=" + std::to_string(n) + " seed " +
                                     std::to_string(seed));
                return;
            }
        }
    }

    Rng rng(99);
    for (int trial = 0; trial < 10000; ++trial) {
        auto rnd = [&]() {
            return ObjectiveVector{rng.uniform(), rng.uniform(), rng.uniform()};
        };
        ObjectiveVector a = rnd(), b = rnd(), cc = rnd();
        if (dominates(a, a)) c.require(false, "dominance not irreflexive");
        if (dominates(a, b) && dominates(b, a)) c.require(false, "dominance not antisymmetric");
        if (dominates(a, b) && dominates(b, cc) && !dominates(a, cc))
            c.require(false, "dominance not transitive");
    }

    std::vector<ObjectiveVector> v;
    for (int i = 0; i < 300; ++i) v.push_back({rng.uniform(), rng.uniform(), rng.uniform()});
    auto base = pareto_front(v).front;
    auto t = v;
    for (auto& x : t) x.nps = std::exp(2.0 * x.nps);
    c.require(pareto_front(t).front == base, "monotone transform changed the front");
}

void criterion_distributions(Check& c) {
    Pipeline p(g_config);
    p.run(true);
    for (Eigen::Index i = 0; i < p.soft_assignments.rows(); ++i)
        c.require(std::abs(p.soft_assignments.row(i).sum() - 1.0) < 1e-9,
                  "soft assignment row " + std::to_string(i));
    for (const auto& mix : p.sp_mixtures)
        c.require(std::abs(mix.omega.sum() - 1.0) < 1e-9,
                  "SP mixture cluster " + std::to_string(mix.cluster_id));
    Rng rng(7);
    for (const auto& bn : p.bayes_nets) {
        for (int t = 0; t < bn.f(); ++t) {
            Vector marginal = posterior(bn, Query{t, {}});
            c.require(std::abs(marginal.sum() - 1.0) < 1e-9, "BN marginal sum");
        }
        for (int trial = 0; trial < 5; ++trial) {
            Query q;
            q.target = static_cast<int>(rng.uniform_index(bn.f()));
            for (int v = 0; v < bn.f(); ++v)
                if (v != q.target && rng.uniform() < 0.2)
                    q.evidence[v] = static_cast<int>(rng.uniform_index(bn.card[v]));
            c.require(std::abs(posterior(bn, q).sum() - 1.0) < 1e-9, "BN posterior sum");
        }
    }
}

void criterion_clustering(Check& c) {
    int correct_k = 0;
    double worst_ari = 1.0;
    for (uint64_t seed = 1; seed <= 10; ++seed) {
        auto blobs = oracles::planted_gaussians(seed * 17, 400, 4, 8, 6.0);
        std::vector<GraphEmbedding> embs(400);
        for (int i = 0; i < 400; ++i) {
            embs[i].state_id = i;
            embs[i].graph_vector = blobs.points.row(i).transpose();
        }
        ClusterConfig cfg;
        cfg.seed = seed;
        ClusterModel model = fit_clusters(embs, cfg);
        if (model.k == 4) ++correct_k;
        worst_ari = std::min(worst_ari, oracles::ari(model.labels, blobs.labels));
    }
    c.require(correct_k == 10, "eigengap picked K=4 in " + std::to_string(correct_k) +
                                   "/10 seeds");
    c.require(worst_ari >= 0.8, "worst ARI " + std::to_string(worst_ari));

    // golden-run silhouette is reported, never asserted
    Pipeline p(g_config);
    p.set_reuse(true);
    p.ensure_cluster();
    std::cout << "    [report] golden-run silhouette " << p.clusters.silhouette
              << " over K=" << p.clusters.k
              << " (reference value at survey scale: 0.0794 at K=6; not asserted)\n";
}

void criterion_expansion(Check& c) {
    Pipeline p(g_config);
    p.run(true);

    std::ifstream cin(p.artifact_path("score"));
    json claims_artifact = json::parse(cin);
    std::ifstream rin(p.artifact_path("retrieve"));
    json retrieval_artifact = json::parse(rin);

    ExpectedExpansion expected = expected_expansion_from_artifacts(
        claims_artifact, retrieval_artifact, g_config.scores.tau_c, g_config.scores.tau_d);

    KnowledgeGraph g = KnowledgeGraph::load(p.artifact_path("expand"));
    std::set<std::string> got_claims, got_docs;
    for (const KgNode* n : g.nodes_of_type(NodeType::Claim)) got_claims.insert(n->ref.key);
    for (const KgNode* n : g.nodes_of_type(NodeType::Document)) got_docs.insert(n->ref.key);

    c.require(got_claims == expected.claim_keys,
              "claim set mismatch: got " + std::to_string(got_claims.size()) + ", expected " +
                  std::to_string(expected.claim_keys.size()));
    c.require(got_docs == expected.doc_ids,
              "document set mismatch: got " + std::to_string(got_docs.size()) +
                  ", expected " + std::to_string(expected.doc_ids.size()));
    c.require(!expected.claim_keys.empty(), "golden run selected no claims");

    // re-applying the same batch is a no-op
    std::vector<ScoredClaim> front_claims;
    for (int idx : p.front.front) front_claims.push_back(p.scored_claims[idx]);
    uint64_t version = g.version();
    size_t nodes = g.node_count(), edges = g.edge_count();
    ExpandStats stats = expand(g, front_claims, p.hypotheses, p.docs_by_hypothesis,
                               p.encoded.column_names, g_config.scores);
    c.require(!stats.changed, "re-apply changed the graph");
    c.require(g.version() == version && g.node_count() == nodes && g.edge_count() == edges,
              "re-apply bumped version or counts");
}

void criterion_online_rule(Check& c) {
    OnlineConfig cfg;  // defaults: tau_match 0.6, tau_anom 0.3
    Vector a(3), b(3), d(3);
    a << 0.7, 0.3, 0.1;
    b << 0.45, 0.42, 0.1;
    d << 0.2, 0.15, 0.1;
    c.require(decide(a, cfg).kind == MatchKind::Match, "0.7 should match");
    c.require(decide(b, cfg).kind == MatchKind::SoftMatch, "0.45 should soft-match");
    c.require(decide(d, cfg).kind == MatchKind::Anomaly, "0.2 should be an anomaly");

    // structural reproduction of the two-cluster soft match: a state planted
    // midway between two centroids splits its soft weight over exactly them
    ClusterModel model;
    model.k = 3;
    model.centroids = Matrix::Zero(3, 3);
    double ang = 79.0 * 3.14159265358979 / 180.0;
    model.centroids.row(0) << std::cos(ang), std::sin(ang), 0;
    model.centroids.row(1) << std::cos(ang), -std::sin(ang), 0;
    model.centroids.row(2) << -0.5, 0, std::sqrt(3.0) / 2.0;
    std::vector<SPMixture> mixtures(3);
    for (int k = 0; k < 3; ++k) {
        mixtures[k].cluster_id = k;
        mixtures[k].omega = Vector::Constant(2, 0.5);
    }
    OnlineConfig alpha1 = cfg;
    alpha1.alpha = 1.0;
    OnlineState s;
    s.z = Vector::Zero(3);
    s.z << 1, 0, 0;  // midway between centroids 0 and 1
    s.pi_sp = Vector::Constant(2, 0.5);
    Vector scores = score_state(s, model, mixtures, alpha1);
    MatchDecision dec = decide(scores, alpha1);
    c.require(dec.kind == MatchKind::SoftMatch, "midpoint state should soft-match");
    c.require(dec.soft_set.size() == 2, "soft set should cover the two planted clusters");
    if (dec.soft_set.size() == 2) {
        c.require(dec.soft_set[0].first == 0 && dec.soft_set[1].first == 1,
                  "soft set picked the wrong clusters");
        c.require(std::abs(dec.soft_set[0].second - dec.soft_set[1].second) < 1e-9,
                  "midpoint weights should tie");
    }
}

void criterion_candidates(Check& c) {
    // promotion fires exactly once after 5 merged anomalies
    OnlineConfig cfg;
    CandidateBuffer buffer;
    Rng rng(55);
    Vector base = Vector::Constant(6, 4.0);
    int promotions = 0;
    for (int i = 0; i < 5; ++i) {
        OnlineState s;
        s.state_id = i;
        s.z = base + Vector::Random(6) * 0.01;
        s.pi_sp = Vector::Constant(3, 1.0 / 3.0);
        if (buffer.add(s, cfg)) ++promotions;
    }
    c.require(promotions == 1, "promotions = " + std::to_string(promotions));

    // detection of 10-sigma outliers across seeds, and per-seed determinism
    int detected = 0;
    for (uint64_t seed = 1; seed <= 50; ++seed) {
        auto blobs = oracles::planted_gaussians(seed * 31, 256, 3, 6, 6.0);
        IsolationForest forest = IsolationForest::fit(blobs.points, 100, 256, seed);
        IsolationForest again = IsolationForest::fit(blobs.points, 100, 256, seed);
        Vector far = Vector::Constant(6, 10.0 * 6.0);
        if (forest.indicator(far, 0.6) == -1) ++detected;
        c.require(forest.anomaly_score(far) == again.anomaly_score(far),
                  "indicator not deterministic per seed");
    }
    c.require(detected >= 48, "10-sigma detection " + std::to_string(detected) + "/50");

    // exploratory flags through the full online path on the golden workspace
    Pipeline p(g_config);
    p.run(true);
    KnowledgeGraph before = KnowledgeGraph::load(p.artifact_path("expand"));
    auto summary = p.match_states((g_workspace / "data" / "new_states.csv").string());
    c.require(summary.promotions == 1,
              "golden match promotions = " + std::to_string(summary.promotions));
    KnowledgeGraph after = KnowledgeGraph::load(p.artifact_path("expand"));
    size_t exploratory_added = 0;
    for (const auto& node : after.nodes_sorted()) {
        if (before.has_node(node.ref)) continue;
        ++exploratory_added;
        c.require(node.attrs.value("exploratory", false),
                  "new node missing the exploratory flag: " + node.ref.key);
    }
    c.require(exploratory_added > 0, "online path added no nodes");
}

void criterion_end_to_end(Check& c) {
    // two fresh output directories, same seed: byte-identical artifacts
    PipelineConfig cfg_a = g_config;
    cfg_a.output_dir = (g_workspace / "out-a").string();
    PipelineConfig cfg_b = g_config;
    cfg_b.output_dir = (g_workspace / "out-b").string();

    auto t0 = std::chrono::steady_clock::now();
    Pipeline pa(cfg_a);
    RunManifest ma = pa.run(false);
    g_run_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    c.require(g_run_seconds < 300.0,
              "pipeline took " + std::to_string(g_run_seconds) + "s (limit 300)");

    Pipeline pb(cfg_b);
    RunManifest mb = pb.run(false);

    auto checks_a = ma.artifact_checksums();
    auto checks_b = mb.artifact_checksums();
    c.require(checks_a.size() == checks_b.size(), "stage count differs");
    for (const auto& [path_a, sha_a] : checks_a) {
        std::string rel = fs::path(path_a).filename().string();
        std::string path_b = (fs::path(cfg_b.output_dir) / rel).string();
        c.require(checks_b.count(path_b) == 1 && checks_b.at(path_b) == sha_a,
                  "artifact differs across reruns: " + rel);
    }
    c.require(ma.config_hash == mb.config_hash, "config hash differs");

    std::cout << "    [report] golden run completed in " << g_run_seconds << "s\n";
}

}  // namespace

int main() {
    std::cout << "building the golden fixture workspace...\n";
    build_golden_workspace();

    std::vector<Criterion> criteria = {
        {1, "NOTEARS recovery (SHD <= 3, h <= 1e-8, < 60 s/fit, 10 seeds)", criterion_notears},
        {2, "acyclicity oracle (exact zero, power series, FD gradient)", criterion_acyclicity},
        {3, "Bayesian inference exactness (VE vs enumeration, MB independence)",
         criterion_bn_exactness},
        {4, "influence calibration (>= 0, independent <= 0.02, copy >= 0.9)",
         criterion_influence},
        {5, "Pareto correctness (oracle equality, partial order, monotone invariance)",
         criterion_pareto},
        {6, "distribution invariants across the golden run", criterion_distributions},
        {7, "clustering recovery (K = 4, ARI >= 0.8, 10 seeds)", criterion_clustering},
        {8, "graph update conformance (exact claim/document sets, idempotent re-apply)",
         criterion_expansion},
        {9, "online decision rule (match / soft_match / anomaly, two-cluster soft match)",
         criterion_online_rule},
        {10, "candidate lifecycle (single promotion, exploratory flags, 10-sigma detection)",
         criterion_candidates},
        {11, "end-to-end determinism and runtime (< 5 min, byte-identical reruns)",
         criterion_end_to_end},
    };

    int failed = 0;
    for (auto& criterion : criteria) {
        Check check;
        try {
            criterion.run(check);
        } catch (const std::exception& e) {
            check.failures.push_back(std::string("exception: ") + e.what());
        }
        if (check.failures.empty()) {
            std::cout << "[PASS] " << criterion.id << ". " << criterion.name << "\n";
        } else {
            ++failed;
            std::cout << "[FAIL] " << criterion.id << ". " << criterion.name << "\n";
            for (const auto& f : check.failures) std::cout << "       - " << f << "\n";
        }
    }
    fs::remove_all(g_workspace);
    if (failed > 0) {
        std::cout << failed << " criterion(s) failed\n";
        return 1;
    }
    std::cout << "all " << criteria.size() << " criteria passed\n";
    return 0;
}
