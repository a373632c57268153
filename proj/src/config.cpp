#include "phenokg/config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace phenokg {

namespace {

json read_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("bad JSON in " + path + ": " + e.what());
    }
}

std::string resolve(const std::string& base_dir, const std::string& path) {
    if (path.empty() || base_dir.empty()) return path;
    fs::path p(path);
    if (p.is_absolute()) return path;
    return (fs::path(base_dir) / p).string();
}

}  // namespace

PipelineConfig PipelineConfig::load(const std::string& path) {
    return from_json(read_json(path), fs::path(path).parent_path().string());
}

PipelineConfig PipelineConfig::from_json(const json& j, const std::string& base_dir) {
    PipelineConfig c;
    try {
        c.seed = j.value("seed", uint64_t{0});

        const json& data = j.at("data");
        c.dataset_path = resolve(base_dir, data.at("path").get<std::string>());
        for (const auto& fd : data.at("schema")) {
            FeatureDef def;
            def.name = fd.at("name").get<std::string>();
            def.kind = feature_kind_from_string(fd.value("kind", "numeric"));
            def.unit = fd.value("unit", "");
            c.schema.push_back(std::move(def));
        }

        if (j.contains("ingest"))
            c.corr_threshold = j["ingest"].value("corr_threshold", c.corr_threshold);

        if (j.contains("encoder")) {
            c.encoder_h = j["encoder"].value("h", c.encoder_h);
            c.encoder_rounds = j["encoder"].value("rounds", c.encoder_rounds);
        }

        if (j.contains("cluster")) {
            const json& cl = j["cluster"];
            c.cluster.knn = cl.value("knn", c.cluster.knn);
            c.cluster.k_min = cl.value("k_min", c.cluster.k_min);
            c.cluster.k_max = cl.value("k_max", c.cluster.k_max);
            c.cluster.k_override = cl.value("k_override", c.cluster.k_override);
            c.cluster.kmeans_restarts = cl.value("restarts", c.cluster.kmeans_restarts);
        }

        if (j.contains("sp")) {
            c.sp_definitions_path =
                resolve(base_dir, j["sp"].value("definitions_path", std::string{}));
            c.sp_temperature = j["sp"].value("temperature", c.sp_temperature);
        }

        if (j.contains("notears")) {
            const json& nt = j["notears"];
            c.notears.lambda1 = nt.value("lambda1", c.notears.lambda1);
            c.notears.h_tol = nt.value("h_tol", c.notears.h_tol);
            c.notears.rho_init = nt.value("rho_init", c.notears.rho_init);
            c.notears.rho_mult = nt.value("rho_mult", c.notears.rho_mult);
            c.notears.rho_max = nt.value("rho_max", c.notears.rho_max);
            c.notears.inner_max_iter = nt.value("inner_max_iter", c.notears.inner_max_iter);
            c.notears.edge_threshold = nt.value("edge_threshold", c.notears.edge_threshold);
            c.notears.max_outer = nt.value("max_outer", c.notears.max_outer);
        }

        if (j.contains("bn")) {
            c.bn_bins = j["bn"].value("bins", c.bn_bins);
            c.bn_parent_cap = j["bn"].value("parent_cap", c.bn_parent_cap);
        }

        if (j.contains("hypothesis")) {
            const json& h = j["hypothesis"];
            c.hypothesis.max_hypotheses = h.value("max_hypotheses", c.hypothesis.max_hypotheses);
            c.hypothesis.provider = h.value("provider", c.hypothesis.provider);
            if (h.contains("theta")) {
                const auto& th = h["theta"];
                if (th.size() != 6) throw ConfigError("hypothesis.theta needs 6 entries");
                for (int k = 0; k < 6; ++k) c.nps_weights.theta[k] = th[k].get<double>();
            }
        }

        if (j.contains("evidence")) {
            const json& e = j["evidence"];
            if (e.contains("alpha")) {
                c.scores.alpha1 = e["alpha"][0].get<double>();
                c.scores.alpha2 = e["alpha"][1].get<double>();
            }
            if (e.contains("omega")) {
                c.scores.omega1 = e["omega"][0].get<double>();
                c.scores.omega2 = e["omega"][1].get<double>();
                c.scores.omega3 = e["omega"][2].get<double>();
            }
            if (e.contains("beta")) {
                c.scores.beta1 = e["beta"][0].get<double>();
                c.scores.beta2 = e["beta"][1].get<double>();
            }
            c.scores.tau_d = e.value("tau_d", c.scores.tau_d);
            c.scores.tau_c = e.value("tau_c", c.scores.tau_c);
            c.scores.recency_half_life_years =
                e.value("half_life_years", c.scores.recency_half_life_years);
            c.scores.lit_cap = e.value("lit_cap", c.scores.lit_cap);
            c.scores.now_year = e.value("now_year", c.scores.now_year);
            c.doc_limit = e.value("doc_limit", c.doc_limit);
            c.aliases_path = resolve(base_dir, e.value("aliases_path", std::string{}));
            if (e.contains("evidence_weights")) {
                for (const auto& [name, w] : e["evidence_weights"].items())
                    c.scores.evidence_weight[study_type_from_string(name)] = w.get<double>();
            }
        }

        if (j.contains("backends")) {
            const json& b = j["backends"];
            c.backend_mode = b.value("mode", c.backend_mode);
            c.fixtures_dir = resolve(base_dir, b.value("fixtures_dir", std::string{}));
            c.llm_url = b.value("llm_url", "");
            c.literature_url = b.value("literature_url", "");
            c.cache_dir = resolve(base_dir, b.value("cache_dir", std::string{}));
        }

        if (j.contains("online")) {
            const json& o = j["online"];
            c.online.alpha = o.value("alpha", c.online.alpha);
            c.online.tau_match = o.value("tau_match", c.online.tau_match);
            c.online.tau_anom = o.value("tau_anom", c.online.tau_anom);
            c.online.tau_nc = o.value("tau_nc", c.online.tau_nc);
            c.online.soft_band = o.value("soft_band", c.online.soft_band);
            c.online.iforest_trees = o.value("iforest_trees", c.online.iforest_trees);
            c.online.iforest_subsample = o.value("iforest_subsample", c.online.iforest_subsample);
            c.online.iforest_cutoff = o.value("iforest_cutoff", c.online.iforest_cutoff);
            c.online.merge_radius = o.value("merge_radius", c.online.merge_radius);
            c.online.accel_max_hypotheses =
                o.value("accel_max_hypotheses", c.online.accel_max_hypotheses);
            c.online.accel_doc_limit = o.value("accel_doc_limit", c.online.accel_doc_limit);
        }

        c.output_dir = resolve(base_dir, j.value("output_dir", c.output_dir));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    c.validate();
    return c;
}

void PipelineConfig::validate() const {
    if (schema.empty()) throw ConfigError("data.schema is empty");
    if (encoder_h <= 0 || encoder_rounds < 0) throw ConfigError("encoder: bad h/rounds");
    if (sp_temperature <= 0) throw ConfigError("sp.temperature must be positive");
    if (doc_limit <= 0) throw ConfigError("evidence.doc_limit must be positive");
    if (backend_mode != "fixture" && backend_mode != "http")
        throw ConfigError("backends.mode must be 'fixture' or 'http'");
    if (backend_mode == "fixture" && fixtures_dir.empty())
        throw ConfigError("backends.fixtures_dir required in fixture mode");
    if (hypothesis.provider != "template" && hypothesis.provider != "llm")
        throw ConfigError("hypothesis.provider must be 'template' or 'llm'");
    notears.validate();
    nps_weights.validate();
    scores.validate();
    online.validate();
    if (bn_bins < 2) throw ConfigError("bn.bins must be at least 2");
    if (bn_parent_cap < 1) throw ConfigError("bn.parent_cap must be at least 1");
}

json PipelineConfig::to_json() const {
    json schema_json = json::array();
    for (const auto& fd : schema)
        schema_json.push_back(
            {{"name", fd.name}, {"kind", to_string(fd.kind)}, {"unit", fd.unit}});
    json ev_weights = json::object();
    for (const auto& [t, w] : scores.evidence_weight) ev_weights[to_string(t)] = w;
    return json{
        {"seed", seed},
        {"data", {{"path", dataset_path}, {"schema", schema_json}}},
        {"ingest", {{"corr_threshold", corr_threshold}}},
        {"encoder", {{"h", encoder_h}, {"rounds", encoder_rounds}}},
        {"cluster",
         {{"knn", cluster.knn},
          {"k_min", cluster.k_min},
          {"k_max", cluster.k_max},
          {"k_override", cluster.k_override},
          {"restarts", cluster.kmeans_restarts}}},
        {"sp", {{"definitions_path", sp_definitions_path}, {"temperature", sp_temperature}}},
        {"notears",
         {{"lambda1", notears.lambda1},
          {"h_tol", notears.h_tol},
          {"rho_init", notears.rho_init},
          {"rho_mult", notears.rho_mult},
          {"rho_max", notears.rho_max},
          {"inner_max_iter", notears.inner_max_iter},
          {"edge_threshold", notears.edge_threshold},
          {"max_outer", notears.max_outer}}},
        {"bn", {{"bins", bn_bins}, {"parent_cap", bn_parent_cap}}},
        {"hypothesis",
         {{"max_hypotheses", hypothesis.max_hypotheses},
          {"provider", hypothesis.provider},
          {"theta", nps_weights.theta}}},
        {"evidence",
         {{"alpha", {scores.alpha1, scores.alpha2}},
          {"omega", {scores.omega1, scores.omega2, scores.omega3}},
          {"beta", {scores.beta1, scores.beta2}},
          {"tau_d", scores.tau_d},
          {"tau_c", scores.tau_c},
          {"half_life_years", scores.recency_half_life_years},
          {"lit_cap", scores.lit_cap},
          {"now_year", scores.now_year},
          {"doc_limit", doc_limit},
          {"aliases_path", aliases_path},
          {"evidence_weights", ev_weights}}},
        {"backends",
         {{"mode", backend_mode},
          {"fixtures_dir", fixtures_dir},
          {"llm_url", llm_url},
          {"literature_url", literature_url},
          {"cache_dir", cache_dir}}},
        {"online",
         {{"alpha", online.alpha},
          {"tau_match", online.tau_match},
          {"tau_anom", online.tau_anom},
          {"tau_nc", online.tau_nc},
          {"soft_band", online.soft_band},
          {"iforest_trees", online.iforest_trees},
          {"iforest_subsample", online.iforest_subsample},
          {"iforest_cutoff", online.iforest_cutoff},
          {"merge_radius", online.merge_radius},
          {"accel_max_hypotheses", online.accel_max_hypotheses},
          {"accel_doc_limit", online.accel_doc_limit}}},
        {"output_dir", output_dir}};
}

std::vector<StandardPhenotypeDef> load_sp_definitions(const std::string& path) {
    json j = read_json(path);
    std::vector<StandardPhenotypeDef> out;
    if (!j.contains("standard_phenotypes"))
        throw ConfigError(path + ": missing 'standard_phenotypes'");
    for (const auto& sp : j["standard_phenotypes"]) {
        StandardPhenotypeDef def;
        def.name = sp.at("name").get<std::string>();
        for (const auto& [feature, weight] : sp.at("signature").items()) {
            double w = weight.get<double>();
            if (w < -1.0 || w > 1.0)
                throw ConfigError(path + ": signature weight out of [-1,1] for " + def.name);
            def.signature[feature] = w;
        }
        out.push_back(std::move(def));
    }
    return out;
}

json sp_definitions_to_json(const std::vector<StandardPhenotypeDef>& defs) {
    json arr = json::array();
    for (const auto& d : defs) {
        json sig = json::object();
        for (const auto& [feature, w] : d.signature) sig[feature] = w;
        arr.push_back({{"name", d.name}, {"signature", sig}});
    }
    return json{{"standard_phenotypes", arr}};
}

std::map<std::string, std::string> load_aliases(const std::string& path) {
    json j = read_json(path);
    std::map<std::string, std::string> out;
    if (!j.contains("aliases")) throw ConfigError(path + ": missing 'aliases'");
    for (const auto& [alias, feature] : j["aliases"].items())
        out[alias] = feature.get<std::string>();
    return out;
}

}  // namespace phenokg
