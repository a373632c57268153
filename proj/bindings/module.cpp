#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "phenokg/causal.hpp"
#include "phenokg/expm.hpp"
#include "phenokg/kgraph.hpp"
#include "phenokg/online.hpp"
#include "phenokg/phenotype.hpp"
#include "phenokg/pipeline.hpp"
#include "phenokg/probnet.hpp"
#include "phenokg/synth.hpp"
#include "phenokg/text.hpp"

namespace py = pybind11;
using namespace phenokg;

namespace {

std::vector<FeatureKind> kinds_from_strings(const std::vector<std::string>& kinds) {
    std::vector<FeatureKind> out;
    for (const auto& k : kinds) out.push_back(feature_kind_from_string(k));
    return out;
}

CausalGraph graph_from_w(const Matrix& w, std::vector<std::string> names) {
    CausalGraph g;
    g.w = w;
    g.raw_w = w;
    for (int i = 0; i < w.rows(); ++i)
        for (int j = 0; j < w.cols(); ++j)
            if (w(i, j) != 0.0) g.edges.push_back({i, j, w(i, j)});
    if (names.empty())
        for (int i = 0; i < w.rows(); ++i) names.push_back("f" + std::to_string(i));
    g.feature_names = std::move(names);
    return g;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "phenotype-driven knowledge graph expansion: core operations";

    py::register_exception<Error>(m, "PhenokgError");

    // ---- causal ----
    m.def("expm", &expm, py::arg("a"), "matrix exponential (scaling and squaring)");
    m.def(
        "acyclicity",
        [](const Matrix& w) { return acyclicity(w); }, py::arg("w"),
        "tr(e^(W o W)) - f and its gradient");
    m.def(
        "notears",
        [](const Matrix& x, double lambda1, double h_tol, double edge_threshold,
           int inner_max_iter, int max_outer) {
            NotearsConfig cfg;
            cfg.lambda1 = lambda1;
            cfg.h_tol = h_tol;
            cfg.edge_threshold = edge_threshold;
            cfg.inner_max_iter = inner_max_iter;
            cfg.max_outer = max_outer;
            CausalGraph g = fit_notears(x, cfg);
            py::dict out;
            out["W"] = g.w;
            out["raw_W"] = g.raw_w;
            out["h"] = g.h_final;
            out["converged"] = g.converged;
            return out;
        },
        py::arg("x"), py::arg("lambda1") = 0.1, py::arg("h_tol") = 1e-8,
        py::arg("edge_threshold") = 0.3, py::arg("inner_max_iter") = 100,
        py::arg("max_outer") = 100,
        "continuous DAG structure learning on an n x f data matrix");
    m.def(
        "strongest_path",
        [](const Matrix& w, int source, int target) {
            auto res = strongest_path(graph_from_w(w, {}), source, target);
            return py::make_tuple(res.nodes, res.strength);
        },
        py::arg("w"), py::arg("source"), py::arg("target"),
        "max product of |weights| over directed paths in a DAG");

    // ---- clustering ----
    m.def(
        "spectral_cluster",
        [](const Matrix& z, int knn, int k_min, int k_max, int k_override, int restarts,
           uint64_t seed) {
            std::vector<GraphEmbedding> embs(z.rows());
            for (Eigen::Index i = 0; i < z.rows(); ++i) {
                embs[i].state_id = static_cast<int>(i);
                embs[i].graph_vector = z.row(i).transpose();
            }
            ClusterConfig cfg;
            cfg.knn = knn;
            cfg.k_min = k_min;
            cfg.k_max = k_max;
            cfg.k_override = k_override;
            cfg.kmeans_restarts = restarts;
            cfg.seed = seed;
            ClusterModel model = fit_clusters(embs, cfg);
            py::dict out;
            out["k"] = model.k;
            out["labels"] = model.labels;
            out["centroids"] = model.centroids;
            out["silhouette"] = model.silhouette;
            out["soft_temperature"] = model.soft_temperature;
            out["eigenvalues"] = model.laplacian_eigenvalues;
            return out;
        },
        py::arg("z"), py::arg("knn") = 15, py::arg("k_min") = 2, py::arg("k_max") = 10,
        py::arg("k_override") = 0, py::arg("restarts") = 10, py::arg("seed") = 0,
        "eigengap-selected spectral clustering of embedding rows");
    m.def(
        "soft_assign",
        [](const Vector& z, const Matrix& centroids, double temperature) {
            ClusterModel model;
            model.k = static_cast<int>(centroids.rows());
            model.centroids = centroids;
            model.soft_temperature = temperature;
            return soft_assign(z, model).pi;
        },
        py::arg("z"), py::arg("centroids"), py::arg("temperature"),
        "softmax(-||z - mu||^2 / T) over cluster centroids");

    // ---- probabilistic network ----
    py::class_<BayesNet>(m, "BayesNet")
        .def_static(
            "fit",
            [](const Matrix& x, const Matrix& w, const std::vector<std::string>& kinds,
               int bins, int parent_cap) {
                std::vector<FeatureKind> ks =
                    kinds.empty() ? std::vector<FeatureKind>(x.cols(), FeatureKind::Numeric)
                                  : kinds_from_strings(kinds);
                Discretization disc = Discretization::fit(x, ks, bins);
                return fit_bn(x, graph_from_w(w, {}), disc, parent_cap);
            },
            py::arg("x"), py::arg("w"), py::arg("kinds") = std::vector<std::string>{},
            py::arg("bins") = 3, py::arg("parent_cap") = 4,
            "discrete CPT network on the thresholded DAG")
        .def_property_readonly("cardinalities", [](const BayesNet& bn) { return bn.card; })
        .def_property_readonly("parents", [](const BayesNet& bn) { return bn.parents; })
        .def(
            "posterior",
            [](const BayesNet& bn, int target, const std::map<int, int>& evidence) {
                return posterior(bn, Query{target, evidence});
            },
            py::arg("target"), py::arg("evidence") = std::map<int, int>{},
            "exact posterior over target bins by variable elimination")
        .def("markov_blanket",
             [](const BayesNet& bn, int node) { return markov_blanket(bn, node); })
        .def("influence",
             [](const BayesNet& bn, int i, int ii) { return influence(bn, i, ii); },
             "mutual information of (i, ii) normalized by log card(ii)")
        .def("mutual_information", [](const BayesNet& bn, int i, int ii) {
            return mutual_information(bn, i, ii);
        });

    // ---- selection ----
    m.def(
        "pareto_front",
        [](const Matrix& objectives) {
            if (objectives.cols() != 3)
                throw DimensionMismatch("objectives must be n x 3 (R, Y, NPS)");
            std::vector<ObjectiveVector> v;
            for (Eigen::Index i = 0; i < objectives.rows(); ++i)
                v.push_back({objectives(i, 0), objectives(i, 1), objectives(i, 2)});
            auto f = pareto_front(v);
            return py::make_tuple(f.front, f.dominance_count);
        },
        py::arg("objectives"),
        "indices of non-dominated rows and per-row dominance counts");

    // ---- online ----
    py::class_<IsolationForest>(m, "IsolationForest")
        .def_static("fit", &IsolationForest::fit, py::arg("points"), py::arg("trees") = 100,
                    py::arg("subsample") = 256, py::arg("seed") = 0)
        .def("anomaly_score", &IsolationForest::anomaly_score)
        .def("indicator", &IsolationForest::indicator, py::arg("x"),
             py::arg("cutoff") = 0.6, "-1 for anomalous, +1 for inlier");
    m.def(
        "decide",
        [](const Vector& scores, double tau_match, double tau_anom, double soft_band) {
            OnlineConfig cfg;
            cfg.tau_match = tau_match;
            cfg.tau_anom = tau_anom;
            cfg.soft_band = soft_band;
            cfg.validate();
            MatchDecision d = decide(scores, cfg);
            py::dict out;
            out["kind"] = to_string(d.kind);
            out["best_cluster"] = d.best_cluster;
            out["best_score"] = d.best_score;
            out["soft_set"] = d.soft_set;
            return out;
        },
        py::arg("scores"), py::arg("tau_match") = 0.6, py::arg("tau_anom") = 0.3,
        py::arg("soft_band") = 0.8, "match / soft_match / anomaly decision rule");

    // ---- text ----
    m.def(
        "tfidf_cosine",
        [](const std::vector<std::string>& corpus, const std::string& a,
           const std::string& b) { return TfIdf::fit(corpus).cosine(a, b); },
        py::arg("corpus"), py::arg("a"), py::arg("b"));

    // ---- pipeline ----
    m.def(
        "run_pipeline",
        [](const std::string& config_path, bool resume) {
            Pipeline p(PipelineConfig::load(config_path));
            RunManifest manifest = p.run(resume);
            py::dict out;
            out["config_hash"] = manifest.config_hash;
            py::dict stages;
            for (const auto& s : manifest.stages) {
                py::dict rec;
                rec["artifact"] = s.artifact;
                rec["sha256"] = s.sha256;
                rec["seconds"] = s.seconds;
                rec["resumed"] = s.resumed;
                stages[py::str(s.name)] = rec;
            }
            out["stages"] = stages;
            return out;
        },
        py::arg("config_path"), py::arg("resume") = false,
        "run every stage of the pipeline from a config file");
    m.def(
        "make_golden_workspace",
        [](const std::string& dir, uint64_t seed) {
            synth::write_golden_workspace(dir, seed);
            return dir + "/config.json";
        },
        py::arg("dir"), py::arg("seed") = 7,
        "write the bundled synthetic dataset, config and fixtures");
}
