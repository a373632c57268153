#include "phenokg/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>

#include "phenokg/hash.hpp"
#include "phenokg/rng.hpp"

namespace fs = std::filesystem;

namespace phenokg {

// ---------------------------- serialization --------------------------------

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", rows}};
}

Matrix matrix_from_json(const json& j) {
    Matrix m(j.at("rows").get<Eigen::Index>(), j.at("cols").get<Eigen::Index>());
    const auto& data = j.at("data");
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = data[r][c].get<double>();
    return m;
}

json vector_to_json(const Vector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

Vector vector_from_json(const json& j) {
    Vector v(j.size());
    for (size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
    return v;
}

json to_json(const EncodedMatrix& m) {
    json encs = json::array();
    for (const auto& e : m.encoders) {
        json codes = json::object();
        for (const auto& [value, code] : e.codes) codes[value] = code;
        encs.push_back(codes);
    }
    json kinds = json::array();
    for (auto k : m.column_kinds) kinds.push_back(to_string(k));
    return json{{"values", matrix_to_json(m.values)},
                {"column_names", m.column_names},
                {"column_kinds", kinds},
                {"encoders", encs},
                {"means", m.means},
                {"sds", m.sds},
                {"dropped_columns", m.dropped_columns},
                {"rows_dropped_missing", m.rows_dropped_missing}};
}

EncodedMatrix encoded_matrix_from_json(const json& j) {
    EncodedMatrix m;
    m.values = matrix_from_json(j.at("values"));
    m.column_names = j.at("column_names").get<std::vector<std::string>>();
    for (const auto& k : j.at("column_kinds"))
        m.column_kinds.push_back(feature_kind_from_string(k.get<std::string>()));
    for (const auto& enc : j.at("encoders")) {
        LabelEncoder e;
        for (const auto& [value, code] : enc.items()) e.codes[value] = code.get<int>();
        m.encoders.push_back(std::move(e));
    }
    m.means = j.at("means").get<std::vector<double>>();
    m.sds = j.at("sds").get<std::vector<double>>();
    m.dropped_columns = j.at("dropped_columns").get<std::vector<std::string>>();
    m.rows_dropped_missing = j.at("rows_dropped_missing").get<size_t>();
    return m;
}

json to_json(const EdgeTemplate& t) {
    json pairs = json::array();
    for (const auto& p : t.pairs) pairs.push_back({p.i, p.j, p.weight});
    return json{{"pairs", pairs},
                {"corr_threshold", t.corr_threshold},
                {"chain_fallback", t.chain_fallback}};
}

EdgeTemplate edge_template_from_json(const json& j) {
    EdgeTemplate t;
    for (const auto& p : j.at("pairs"))
        t.pairs.push_back({p[0].get<int>(), p[1].get<int>(), p[2].get<double>()});
    t.corr_threshold = j.at("corr_threshold").get<double>();
    t.chain_fallback = j.at("chain_fallback").get<bool>();
    return t;
}

json to_json(const EncoderParams& p) {
    return json{{"h", p.h},
                {"rounds", p.rounds},
                {"seed", p.seed},
                {"projection", matrix_to_json(p.projection)}};
}

EncoderParams encoder_params_from_json(const json& j) {
    EncoderParams p;
    p.h = j.at("h").get<int>();
    p.rounds = j.at("rounds").get<int>();
    p.seed = j.at("seed").get<uint64_t>();
    p.projection = matrix_from_json(j.at("projection"));
    return p;
}

json to_json(const ClusterModel& m) {
    return json{{"k", m.k},
                {"centroids", matrix_to_json(m.centroids)},
                {"members", m.members},
                {"labels", m.labels},
                {"soft_temperature", m.soft_temperature},
                {"silhouette", m.silhouette},
                {"laplacian_eigenvalues", m.laplacian_eigenvalues},
                {"degenerate", m.degenerate}};
}

ClusterModel cluster_model_from_json(const json& j) {
    ClusterModel m;
    m.k = j.at("k").get<int>();
    m.centroids = matrix_from_json(j.at("centroids"));
    m.members = j.at("members").get<std::vector<std::vector<int>>>();
    m.labels = j.at("labels").get<std::vector<int>>();
    m.soft_temperature = j.at("soft_temperature").get<double>();
    m.silhouette = j.at("silhouette").get<double>();
    m.laplacian_eigenvalues = j.at("laplacian_eigenvalues").get<std::vector<double>>();
    m.degenerate = j.at("degenerate").get<bool>();
    return m;
}

json to_json(const SPMixture& m) {
    return json{{"cluster_id", m.cluster_id},
                {"sp_names", m.sp_names},
                {"omega", vector_to_json(m.omega)},
                {"scores", vector_to_json(m.scores)},
                {"temperature", m.temperature}};
}

SPMixture sp_mixture_from_json(const json& j) {
    SPMixture m;
    m.cluster_id = j.at("cluster_id").get<int>();
    m.sp_names = j.at("sp_names").get<std::vector<std::string>>();
    m.omega = vector_from_json(j.at("omega"));
    m.scores = vector_from_json(j.at("scores"));
    m.temperature = j.at("temperature").get<double>();
    return m;
}

json to_json(const CausalGraph& g) {
    json edges = json::array();
    for (const auto& e : g.edges) edges.push_back({e.source, e.target, e.weight});
    return json{{"cluster_id", g.cluster_id},
                {"w", matrix_to_json(g.w)},
                {"raw_w", matrix_to_json(g.raw_w)},
                {"edges", edges},
                {"h_final", g.h_final},
                {"converged", g.converged},
                {"feature_names", g.feature_names}};
}

CausalGraph causal_graph_from_json(const json& j) {
    CausalGraph g;
    g.cluster_id = j.at("cluster_id").get<int>();
    g.w = matrix_from_json(j.at("w"));
    g.raw_w = matrix_from_json(j.at("raw_w"));
    for (const auto& e : j.at("edges"))
        g.edges.push_back({e[0].get<int>(), e[1].get<int>(), e[2].get<double>()});
    g.h_final = j.at("h_final").get<double>();
    g.converged = j.at("converged").get<bool>();
    g.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    return g;
}

json to_json(const BayesNet& bn) {
    json cpts = json::array();
    for (const auto& c : bn.cpt) cpts.push_back(matrix_to_json(c));
    json disc = json::array();
    for (const auto& fb : bn.disc.features)
        disc.push_back({{"edges", fb.edges},
                        {"cardinality", fb.cardinality},
                        {"categorical", fb.categorical}});
    return json{{"cluster_id", bn.cluster_id},
                {"parents", bn.parents},
                {"card", bn.card},
                {"cpt", cpts},
                {"feature_names", bn.feature_names},
                {"discretization", disc}};
}

BayesNet bayes_net_from_json(const json& j) {
    BayesNet bn;
    bn.cluster_id = j.at("cluster_id").get<int>();
    bn.parents = j.at("parents").get<std::vector<std::vector<int>>>();
    bn.card = j.at("card").get<std::vector<int>>();
    for (const auto& c : j.at("cpt")) bn.cpt.push_back(matrix_from_json(c));
    bn.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    for (const auto& fb : j.at("discretization")) {
        Discretization::FeatureBins b;
        b.edges = fb.at("edges").get<std::vector<double>>();
        b.cardinality = fb.at("cardinality").get<int>();
        b.categorical = fb.at("categorical").get<bool>();
        bn.disc.features.push_back(std::move(b));
    }
    return bn;
}

json to_json(const PhenotypeState& ps) {
    json dom = json::array();
    for (const auto& d : ps.dominant_features)
        dom.push_back({{"name", d.name}, {"deviation", d.deviation}, {"sign", d.sign}});
    json sal = json::array();
    for (const auto& e : ps.salient_edges)
        sal.push_back({{"source", e.source}, {"target", e.target}, {"weight", e.weight}});
    return json{{"cluster_id", ps.cluster_id},
                {"dominant_features", dom},
                {"salient_edges", sal},
                {"context_sp", ps.context_sp},
                {"population_text", ps.population_text}};
}

PhenotypeState phenotype_state_from_json(const json& j) {
    PhenotypeState ps;
    ps.cluster_id = j.at("cluster_id").get<int>();
    for (const auto& d : j.at("dominant_features"))
        ps.dominant_features.push_back({d.at("name").get<std::string>(),
                                        d.at("deviation").get<double>(),
                                        d.at("sign").get<int>()});
    for (const auto& e : j.at("salient_edges"))
        ps.salient_edges.push_back({e.at("source").get<std::string>(),
                                    e.at("target").get<std::string>(),
                                    e.at("weight").get<double>()});
    ps.context_sp = j.at("context_sp").get<std::vector<std::string>>();
    ps.population_text = j.at("population_text").get<std::string>();
    return ps;
}

json to_json(const Hypothesis& h) {
    return json{{"id", h.id},
                {"cluster_id", h.cluster_id},
                {"population", h.population},
                {"sp_labels", h.sp_labels},
                {"intervention", h.intervention},
                {"comparison", h.comparison},
                {"outcome", h.outcome},
                {"source", h.source},
                {"target", h.target},
                {"provenance", h.provenance}};
}

Hypothesis hypothesis_from_json(const json& j) {
    Hypothesis h;
    h.id = j.at("id").get<std::string>();
    h.cluster_id = j.at("cluster_id").get<int>();
    h.population = j.at("population").get<std::string>();
    h.sp_labels = j.at("sp_labels").get<std::vector<std::string>>();
    h.intervention = j.at("intervention").get<std::string>();
    h.comparison = j.at("comparison").get<std::string>();
    h.outcome = j.at("outcome").get<std::string>();
    h.source = j.at("source").get<int>();
    h.target = j.at("target").get<int>();
    h.provenance = j.at("provenance").get<std::string>();
    return h;
}

json to_json(const Document& d) {
    return json{{"doc_id", d.doc_id},
                {"title", d.title},
                {"abstract", d.abstract_text},
                {"year", d.year},
                {"study_type", to_string(d.study_type)},
                {"match_score", d.match_score},
                {"retained", d.retained}};
}

Document document_from_json(const json& j) {
    Document d;
    d.doc_id = j.at("doc_id").get<std::string>();
    d.title = j.at("title").get<std::string>();
    d.abstract_text = j.at("abstract").get<std::string>();
    d.year = j.at("year").get<int>();
    d.study_type = study_type_from_string(j.at("study_type").get<std::string>());
    d.match_score = j.at("match_score").get<double>();
    d.retained = j.at("retained").get<bool>();
    return d;
}

json to_json(const Claim& c) {
    return json{{"claim_id", c.claim_id},
                {"hypothesis_id", c.hypothesis_id},
                {"doc_id", c.doc_id},
                {"subject_text", c.subject_text},
                {"subject_feature", c.subject_feature},
                {"relation", c.relation},
                {"object_text", c.object_text},
                {"object_feature", c.object_feature},
                {"meta",
                 {{"evidence_type", c.meta.evidence_type},
                  {"confidence", c.meta.confidence},
                  {"context", c.meta.context},
                  {"recommendation", c.meta.recommendation}}}};
}

Claim claim_from_json(const json& j) {
    Claim c;
    c.claim_id = j.at("claim_id").get<std::string>();
    c.hypothesis_id = j.at("hypothesis_id").get<std::string>();
    c.doc_id = j.at("doc_id").get<std::string>();
    c.subject_text = j.at("subject_text").get<std::string>();
    c.subject_feature = j.at("subject_feature").get<int>();
    c.relation = j.at("relation").get<std::string>();
    c.object_text = j.at("object_text").get<std::string>();
    c.object_feature = j.at("object_feature").get<int>();
    const json& m = j.at("meta");
    c.meta.evidence_type = m.at("evidence_type").get<std::string>();
    c.meta.confidence = m.at("confidence").get<double>();
    c.meta.context = m.at("context").get<std::string>();
    c.meta.recommendation = m.at("recommendation").get<std::string>();
    return c;
}

json to_json(const ScoredClaim& c) {
    return json{{"claim", to_json(c.claim)},
                {"relevance", c.relevance},
                {"validation", c.validation},
                {"nps", c.nps}};
}

ScoredClaim scored_claim_from_json(const json& j) {
    ScoredClaim c;
    c.claim = claim_from_json(j.at("claim"));
    c.relevance = j.at("relevance").get<double>();
    c.validation = j.at("validation").get<double>();
    c.nps = j.at("nps").get<double>();
    return c;
}

namespace {

json components_to_json(const NPSComponents& c) {
    return json{{"struct", c.s_struct}, {"path", c.s_path}, {"prob", c.s_prob},
                {"mb", c.s_mb},         {"var", c.s_var},   {"lit", c.s_lit}};
}

NPSComponents components_from_json(const json& j) {
    NPSComponents c;
    c.s_struct = j.at("struct").get<double>();
    c.s_path = j.at("path").get<double>();
    c.s_prob = j.at("prob").get<double>();
    c.s_mb = j.at("mb").get<double>();
    c.s_var = j.at("var").get<double>();
    c.s_lit = j.at("lit").get<double>();
    return c;
}

}  // namespace

json to_json(const NPSBreakdown& b) {
    return json{{"raw", components_to_json(b.raw)},
                {"normalized", components_to_json(b.normalized)},
                {"nps", b.nps}};
}

NPSBreakdown nps_breakdown_from_json(const json& j) {
    NPSBreakdown b;
    b.raw = components_from_json(j.at("raw"));
    b.normalized = components_from_json(j.at("normalized"));
    b.nps = j.at("nps").get<double>();
    return b;
}

// ------------------------------- manifest ----------------------------------

json RunManifest::to_json() const {
    json stages_json = json::array();
    for (const auto& s : stages)
        stages_json.push_back({{"name", s.name},
                               {"artifact", s.artifact},
                               {"sha256", s.sha256},
                               {"seconds", s.seconds},
                               {"resumed", s.resumed}});
    return json{{"config_hash", config_hash},
                {"input_hashes", input_hashes},
                {"format_version", format_version},
                {"stages", stages_json}};
}

std::map<std::string, std::string> RunManifest::artifact_checksums() const {
    std::map<std::string, std::string> out;
    for (const auto& s : stages) out[s.artifact] = s.sha256;
    return out;
}

std::string sha256_of_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file: " + path);
    Sha256 h;
    char buf[65536];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        h.update(buf, static_cast<size_t>(in.gcount()));
        if (!in) break;
    }
    return h.hex();
}

// ------------------------------- pipeline ----------------------------------

namespace {

const std::vector<std::string> kStageOrder = {"ingest",     "cluster",  "causal",
                                              "bn",         "hypothesize", "retrieve",
                                              "score",      "expand"};

}  // namespace

Pipeline::Pipeline(PipelineConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    // where outputs land has no bearing on what they contain
    json hashable = cfg_.to_json();
    hashable.erase("output_dir");
    config_hash_ = sha256_hex(hashable.dump());
    fs::create_directories(cfg_.output_dir);
}

std::string Pipeline::artifact_path(const std::string& name) const {
    std::string file = name == "expand" ? "kg.jsonl" : name + ".json";
    return (fs::path(cfg_.output_dir) / file).string();
}

std::unique_ptr<LlmBackend> Pipeline::make_llm_backend() const {
    if (cfg_.backend_mode == "fixture") {
        auto backend = std::make_unique<FixtureLlmBackend>(cfg_.fixtures_dir);
        backend->on_miss = on_llm_miss;
        return backend;
    }
    if (cfg_.llm_url.empty())
        throw ConfigError("backends.llm_url required in http mode");
    return std::make_unique<HttpLlmBackend>(cfg_.llm_url);
}

std::unique_ptr<LiteratureClient> Pipeline::make_literature_client() const {
    if (cfg_.backend_mode == "fixture") {
        auto client = std::make_unique<LiteratureClient>(cfg_.fixtures_dir, nullptr);
        client->on_search_miss = on_search_miss;
        return client;
    }
    if (cfg_.literature_url.empty())
        throw ConfigError("backends.literature_url required in http mode");
    std::string cache = cfg_.cache_dir.empty()
                            ? (fs::path(cfg_.output_dir) / "cache").string()
                            : cfg_.cache_dir;
    return std::make_unique<LiteratureClient>(
        cache, std::make_unique<HttpLitTransport>(cfg_.literature_url));
}

std::string Pipeline::stage_inputs_hash(const std::string& stage) const {
    Sha256 h;
    h.update(config_hash_);
    h.update("|" + stage + "|");
    if (stage == "ingest") {
        h.update(sha256_of_file(cfg_.dataset_path));
    } else {
        // chain on the upstream artifact
        auto it = std::find(kStageOrder.begin(), kStageOrder.end(), stage);
        std::string parent = *(it - 1);
        h.update(sha256_of_file(artifact_path(parent)));
    }
    if (stage == "cluster" && !cfg_.sp_definitions_path.empty())
        h.update(sha256_of_file(cfg_.sp_definitions_path));
    if (stage == "score" && !cfg_.aliases_path.empty())
        h.update(sha256_of_file(cfg_.aliases_path));
    return h.hex();
}

void Pipeline::save_stage(const std::string& stage, const json& payload) {
    json wrapped = payload;
    wrapped["meta"] = {{"stage", stage}, {"inputs_hash", stage_inputs_hash(stage)}};
    std::string path = artifact_path(stage);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw StageFailure(stage, "cannot write " + path);
    out << wrapped.dump(1) << "\n";
}

json Pipeline::load_stage_payload(const std::string& stage) const {
    std::ifstream in(artifact_path(stage), std::ios::binary);
    if (!in) throw StageFailure(stage, "missing artifact " + artifact_path(stage));
    return json::parse(in);
}

bool Pipeline::try_load_stage(const std::string& stage) {
    std::string path = artifact_path(stage);
    if (!fs::exists(path)) return false;
    json payload;
    if (stage == "expand") {
        // kg.jsonl is line-delimited; its inputs hash lives in a sidecar
        std::string meta_path = (fs::path(cfg_.output_dir) / "expand.meta.json").string();
        std::ifstream min(meta_path, std::ios::binary);
        if (!min) return false;
        try {
            json meta = json::parse(min);
            if (meta.value("inputs_hash", "") != stage_inputs_hash(stage)) return false;
        } catch (const json::exception&) {
            return false;
        }
    } else {
        try {
            payload = load_stage_payload(stage);
        } catch (const json::exception&) {
            return false;
        }
        if (!payload.contains("meta") ||
            payload["meta"].value("inputs_hash", "") != stage_inputs_hash(stage))
            return false;
    }

    try {
        if (stage == "ingest") {
            encoded = encoded_matrix_from_json(payload.at("encoded"));
            edge_template = edge_template_from_json(payload.at("edge_template"));
            encoder = encoder_params_from_json(payload.at("encoder"));
            graph_vectors = matrix_from_json(payload.at("graph_vectors"));
        } else if (stage == "cluster") {
            clusters = cluster_model_from_json(payload.at("clusters"));
            soft_assignments = matrix_from_json(payload.at("soft_assignments"));
            sp_mixtures.clear();
            for (const auto& m : payload.at("sp_mixtures"))
                sp_mixtures.push_back(sp_mixture_from_json(m));
            sp_defs = load_sp_definitions(cfg_.sp_definitions_path);
        } else if (stage == "causal") {
            causal_graphs.clear();
            for (const auto& g : payload.at("graphs"))
                causal_graphs.push_back(causal_graph_from_json(g));
        } else if (stage == "bn") {
            bayes_nets.clear();
            for (const auto& b : payload.at("networks"))
                bayes_nets.push_back(bayes_net_from_json(b));
        } else if (stage == "hypothesize") {
            phenotype_states.clear();
            for (const auto& ps : payload.at("phenotype_states"))
                phenotype_states.push_back(phenotype_state_from_json(ps));
            hypotheses.clear();
            for (const auto& h : payload.at("hypotheses"))
                hypotheses.push_back(hypothesis_from_json(h));
        } else if (stage == "retrieve") {
            docs_by_hypothesis.clear();
            lit_support.clear();
            for (const auto& [hid, entry] : payload.at("by_hypothesis").items()) {
                std::vector<Document> docs;
                for (const auto& d : entry.at("documents"))
                    docs.push_back(document_from_json(d));
                docs_by_hypothesis[hid] = std::move(docs);
                lit_support[hid] = entry.at("lit_support").get<double>();
            }
        } else if (stage == "score") {
            scored_claims.clear();
            for (const auto& c : payload.at("claims"))
                scored_claims.push_back(scored_claim_from_json(c));
            nps_by_hypothesis.clear();
            for (const auto& [hid, b] : payload.at("nps_by_hypothesis").items())
                nps_by_hypothesis[hid] = nps_breakdown_from_json(b);
        } else if (stage == "expand") {
            kg = KnowledgeGraph::load(path);
            std::string front_path = (fs::path(cfg_.output_dir) / "front.json").string();
            std::ifstream fin(front_path, std::ios::binary);
            if (!fin) return false;
            json fj = json::parse(fin);
            front.front = fj.at("front").get<std::vector<int>>();
            front.dominance_count = fj.at("dominance_count").get<std::vector<int>>();
        }
    } catch (const std::exception&) {
        return false;
    }
    return true;
}

void Pipeline::run_stage(const std::string& name, bool resume, void (Pipeline::*compute)()) {
    if (done_.count(name)) return;
    auto t0 = std::chrono::steady_clock::now();
    bool resumed = false;
    if (resume && try_load_stage(name)) {
        resumed = true;
    } else {
        try {
            (this->*compute)();
        } catch (const StageFailure&) {
            throw;
        } catch (const std::exception& e) {
            throw StageFailure(name, e.what());
        }
    }
    auto t1 = std::chrono::steady_clock::now();
    StageRecord rec;
    rec.name = name;
    rec.artifact = artifact_path(name);
    rec.sha256 = sha256_of_file(rec.artifact);
    rec.seconds = std::chrono::duration<double>(t1 - t0).count();
    rec.resumed = resumed;
    records_.push_back(rec);
    done_[name] = true;
}

void Pipeline::ensure_ingest() { run_stage("ingest", reuse_, &Pipeline::compute_ingest); }
void Pipeline::ensure_cluster() {
    ensure_ingest();
    run_stage("cluster", reuse_, &Pipeline::compute_cluster);
}
void Pipeline::ensure_causal() {
    ensure_cluster();
    run_stage("causal", reuse_, &Pipeline::compute_causal);
}
void Pipeline::ensure_bn() {
    ensure_causal();
    run_stage("bn", reuse_, &Pipeline::compute_bn);
}
void Pipeline::ensure_hypothesize() {
    ensure_bn();
    run_stage("hypothesize", reuse_, &Pipeline::compute_hypothesize);
}
void Pipeline::ensure_retrieve() {
    ensure_hypothesize();
    run_stage("retrieve", reuse_, &Pipeline::compute_retrieve);
}
void Pipeline::ensure_score() {
    ensure_retrieve();
    run_stage("score", reuse_, &Pipeline::compute_score);
}
void Pipeline::ensure_expand() {
    ensure_score();
    run_stage("expand", reuse_, &Pipeline::compute_expand);
}

RunManifest Pipeline::run(bool resume) {
    reuse_ = resume;
    ensure_expand();

    RunManifest m;
    m.config_hash = config_hash_;
    m.input_hashes["dataset"] = sha256_of_file(cfg_.dataset_path);
    if (!cfg_.sp_definitions_path.empty())
        m.input_hashes["sp_definitions"] = sha256_of_file(cfg_.sp_definitions_path);
    if (!cfg_.aliases_path.empty())
        m.input_hashes["aliases"] = sha256_of_file(cfg_.aliases_path);
    m.stages = records_;

    std::string path = (fs::path(cfg_.output_dir) / "manifest.json").string();
    std::ofstream out(path, std::ios::binary);
    out << m.to_json().dump(1) << "\n";
    return m;
}

// ------------------------------- stages ------------------------------------

void Pipeline::compute_ingest() {
    Dataset ds = load_dataset(cfg_.dataset_path, cfg_.schema);
    encoded = encode(ds, &warnings_);
    edge_template = build_edge_template(encoded, cfg_.corr_threshold);
    encoder = EncoderParams::make(1 + static_cast<int>(encoded.f()), cfg_.encoder_h,
                                  cfg_.encoder_rounds, derive_seed(cfg_.seed, "encoder"));
    auto graphs = build_state_graphs(encoded, edge_template);
    auto embeddings = encode_corpus(graphs, encoder);
    graph_vectors.resize(embeddings.size(), cfg_.encoder_h);
    for (size_t i = 0; i < embeddings.size(); ++i)
        graph_vectors.row(i) = embeddings[i].graph_vector.transpose();

    save_stage("ingest", json{{"encoded", to_json(encoded)},
                              {"edge_template", to_json(edge_template)},
                              {"encoder", to_json(encoder)},
                              {"graph_vectors", matrix_to_json(graph_vectors)},
                              {"warnings", warnings_.messages}});
}

void Pipeline::compute_cluster() {
    std::vector<GraphEmbedding> embeddings(graph_vectors.rows());
    for (Eigen::Index i = 0; i < graph_vectors.rows(); ++i) {
        embeddings[i].state_id = static_cast<int>(i);
        embeddings[i].graph_vector = graph_vectors.row(i).transpose();
    }
    ClusterConfig cl = cfg_.cluster;
    cl.seed = derive_seed(cfg_.seed, "cluster");
    clusters = fit_clusters(embeddings, cl, &warnings_);

    soft_assignments.resize(graph_vectors.rows(), clusters.k);
    for (Eigen::Index i = 0; i < graph_vectors.rows(); ++i)
        soft_assignments.row(i) =
            soft_assign(graph_vectors.row(i).transpose(), clusters).pi.transpose();

    if (cfg_.sp_definitions_path.empty())
        throw ConfigError("sp.definitions_path is required");
    sp_defs = load_sp_definitions(cfg_.sp_definitions_path);
    sp_mixtures = map_to_standard(clusters, encoded, sp_defs, cfg_.sp_temperature);

    json mixtures = json::array();
    for (const auto& m : sp_mixtures) mixtures.push_back(to_json(m));
    save_stage("cluster", json{{"clusters", to_json(clusters)},
                               {"soft_assignments", matrix_to_json(soft_assignments)},
                               {"sp_mixtures", mixtures}});
}

CausalGraph Pipeline::fit_cluster_graph(int cluster_id, const Matrix& rows,
                                        WarningLog& log) {
    const int f = static_cast<int>(rows.cols());

    // columns constant within this phenotype would be degenerate inputs; fit
    // on the active set and re-expand with zero rows/cols
    std::vector<int> active;
    for (int c = 0; c < f; ++c) {
        double mean = rows.col(c).mean();
        double var = (rows.col(c).array() - mean).square().sum() /
                     static_cast<double>(rows.rows());
        if (var > 1e-24) active.push_back(c);
        else
            log.warn("cluster " + std::to_string(cluster_id) + ": column " +
                     encoded.column_names[c] + " constant within phenotype");
    }

    CausalGraph g;
    g.cluster_id = cluster_id;
    g.feature_names = encoded.column_names;
    g.w = Matrix::Zero(f, f);
    g.raw_w = Matrix::Zero(f, f);
    g.h_final = 0.0;
    if (static_cast<int>(active.size()) < 2 || rows.rows() < 3) {
        log.warn("cluster " + std::to_string(cluster_id) +
                 ": too few usable columns/rows, empty causal graph");
        return g;
    }

    Matrix sub(rows.rows(), active.size());
    for (size_t k = 0; k < active.size(); ++k) sub.col(k) = rows.col(active[k]);
    CausalGraph fitted = fit_notears(standardize_columns(sub), cfg_.notears, &log);

    for (size_t a = 0; a < active.size(); ++a) {
        for (size_t b = 0; b < active.size(); ++b) {
            g.w(active[a], active[b]) = fitted.w(a, b);
            g.raw_w(active[a], active[b]) = fitted.raw_w(a, b);
        }
    }
    g.h_final = fitted.h_final;
    g.converged = fitted.converged;
    for (int i = 0; i < f; ++i)
        for (int j = 0; j < f; ++j)
            if (g.w(i, j) != 0.0) g.edges.push_back({i, j, g.w(i, j)});
    return g;
}

void Pipeline::compute_causal() {
    causal_graphs.assign(clusters.k, {});
    // per-fit warning logs keep the parallel fits race-free and the merged
    // message order stable
    std::vector<WarningLog> logs(clusters.k);
    std::vector<std::future<CausalGraph>> futures;
    for (int k = 0; k < clusters.k; ++k) {
        futures.push_back(std::async(std::launch::async, [this, k, &logs]() {
            const auto& members = clusters.members[k];
            Matrix rows(members.size(), encoded.f());
            for (size_t i = 0; i < members.size(); ++i)
                rows.row(i) = encoded.values.row(members[i]);
            return fit_cluster_graph(k, rows, logs[k]);
        }));
    }
    for (int k = 0; k < clusters.k; ++k) {
        causal_graphs[k] = futures[k].get();
        for (auto& msg : logs[k].messages) warnings_.warn(std::move(msg));
    }

    json graphs = json::array();
    for (const auto& g : causal_graphs) graphs.push_back(to_json(g));
    save_stage("causal", json{{"graphs", graphs}});
}

void Pipeline::compute_bn() {
    bayes_nets.clear();
    std::vector<FeatureKind> kinds = encoded.column_kinds;
    for (int k = 0; k < clusters.k; ++k) {
        const auto& members = clusters.members[k];
        Matrix rows(members.size(), encoded.f());
        for (size_t i = 0; i < members.size(); ++i)
            rows.row(i) = encoded.values.row(members[i]);
        Discretization disc = Discretization::fit(rows, kinds, cfg_.bn_bins);
        bayes_nets.push_back(fit_bn(rows, causal_graphs[k], disc, cfg_.bn_parent_cap));
    }
    json nets = json::array();
    for (const auto& b : bayes_nets) nets.push_back(to_json(b));
    save_stage("bn", json{{"networks", nets}});
}

void Pipeline::compute_hypothesize() {
    phenotype_states.clear();
    hypotheses.clear();
    std::unique_ptr<LlmBackend> backend;
    if (cfg_.hypothesis.provider == "llm") backend = make_llm_backend();

    for (int k = 0; k < clusters.k; ++k) {
        PhenotypeState ps = phenotype_state(clusters, encoded, sp_mixtures[k],
                                            causal_graphs[k]);
        auto hyps = generate_hypotheses(ps, causal_graphs[k], bayes_nets[k], causal_graphs,
                                        cfg_.hypothesis, backend.get(), &warnings_);
        phenotype_states.push_back(std::move(ps));
        for (auto& h : hyps) hypotheses.push_back(std::move(h));
    }

    json states = json::array();
    for (const auto& ps : phenotype_states) states.push_back(to_json(ps));
    json hyps = json::array();
    for (const auto& h : hypotheses) hyps.push_back(to_json(h));
    save_stage("hypothesize", json{{"phenotype_states", states}, {"hypotheses", hyps}});
}

void Pipeline::compute_retrieve() {
    docs_by_hypothesis.clear();
    lit_support.clear();
    auto client = make_literature_client();
    for (const auto& h : hypotheses) {
        RetrievalResult res = retrieve(h, *client, cfg_.doc_limit, cfg_.scores);
        if (res.parse_skipped > 0)
            warnings_.warn("retrieve " + h.id + ": skipped " +
                           std::to_string(res.parse_skipped) + " malformed records");
        score_documents(res.docs, h, cfg_.scores);
        docs_by_hypothesis[h.id] = std::move(res.docs);
        lit_support[h.id] = res.lit_support;
    }

    json by_hyp = json::object();
    for (const auto& h : hypotheses) {
        json docs = json::array();
        for (const auto& d : docs_by_hypothesis[h.id]) docs.push_back(to_json(d));
        by_hyp[h.id] = {{"documents", docs}, {"lit_support", lit_support[h.id]}};
    }
    save_stage("retrieve", json{{"by_hypothesis", by_hyp}});
}

void Pipeline::compute_score() {
    scored_claims.clear();
    nps_by_hypothesis.clear();
    auto backend = make_llm_backend();

    std::map<std::string, std::string> aliases;
    if (!cfg_.aliases_path.empty()) aliases = load_aliases(cfg_.aliases_path);
    EntityLinker linker(encoded.column_names, aliases);

    // final NPS per hypothesis, with per-cluster batch normalization
    std::map<std::string, const Hypothesis*> hyp_by_id;
    for (const auto& h : hypotheses) hyp_by_id[h.id] = &h;
    for (int k = 0; k < clusters.k; ++k) {
        std::vector<const Hypothesis*> batch;
        for (const auto& h : hypotheses)
            if (h.cluster_id == k) batch.push_back(&h);
        if (batch.empty()) continue;
        std::vector<NPSComponents> raws;
        for (const Hypothesis* h : batch) {
            double ls = lit_support.count(h->id) ? lit_support.at(h->id) : 0.0;
            raws.push_back(raw_nps_components(h->source, h->target, causal_graphs[k],
                                              bayes_nets[k], causal_graphs, ls));
        }
        NpsBatchStats stats = NpsBatchStats::from(raws);
        for (size_t i = 0; i < batch.size(); ++i)
            nps_by_hypothesis[batch[i]->id] = score_nps(raws[i], stats, cfg_.nps_weights);
    }

    ExtractionStats ex_stats;
    for (const auto& h : hypotheses) {
        const PhenotypeState& ps = phenotype_states.at(h.cluster_id);
        auto docs_it = docs_by_hypothesis.find(h.id);
        if (docs_it == docs_by_hypothesis.end()) continue;
        for (const auto& d : docs_it->second) {
            if (!d.retained) continue;
            auto claims = extract_claims(d, h, ps, *backend, linker, &ex_stats, &warnings_);
            for (auto& c : claims) {
                ScoredClaim sc;
                sc.claim = std::move(c);
                sc.relevance = relevance(sc.claim, d, ps, cfg_.scores);
                sc.validation = validation(sc.claim, causal_graphs[h.cluster_id],
                                           bayes_nets[h.cluster_id], cfg_.scores);
                sc.nps = nps_by_hypothesis.at(h.id).nps;
                scored_claims.push_back(std::move(sc));
            }
        }
    }
    if (ex_stats.dropped_schema > 0)
        warnings_.warn("score: dropped " + std::to_string(ex_stats.dropped_schema) +
                       " claims with schema violations");

    json claims = json::array();
    for (const auto& c : scored_claims) claims.push_back(to_json(c));
    json nps = json::object();
    for (const auto& [hid, b] : nps_by_hypothesis) nps[hid] = to_json(b);
    save_stage("score", json{{"claims", claims}, {"nps_by_hypothesis", nps}});
}

void Pipeline::seed_graph_structure() {
    for (const auto& name : encoded.column_names)
        kg.add_node({{NodeType::Feature, name}, {{"name", name}}});
    for (const auto& sp : sp_defs)
        kg.add_node({{NodeType::StandardPhenotype, sp.name}, {{"name", sp.name}}});

    for (int k = 0; k < clusters.k; ++k) {
        const PhenotypeState& ps = phenotype_states.at(k);
        kg.add_node({{NodeType::Phenotype, std::to_string(k)},
                     {{"size", clusters.members[k].size()},
                      {"population", ps.population_text}}});
        NodeRef phen{NodeType::Phenotype, std::to_string(k)};
        for (const auto& d : ps.dominant_features) {
            kg.add_edge({EdgeType::HasPhenotype,
                         {NodeType::Feature, d.name},
                         phen,
                         {{"deviation", d.deviation}}});
        }
        const SPMixture& mix = sp_mixtures[k];
        for (size_t m = 0; m < mix.sp_names.size(); ++m) {
            kg.add_edge({EdgeType::MapsToSp,
                         phen,
                         {NodeType::StandardPhenotype, mix.sp_names[m]},
                         {{"omega", mix.omega[m]}}});
        }
        for (const auto& e : ps.salient_edges) {
            kg.add_edge({EdgeType::CausalEdge,
                         {NodeType::Feature, e.source},
                         {NodeType::Feature, e.target},
                         {{"weight", e.weight}, {"cluster", k}}});
        }
    }
}

void Pipeline::compute_expand() {
    std::vector<ObjectiveVector> objectives;
    for (const auto& sc : scored_claims)
        objectives.push_back({sc.relevance, sc.validation, sc.nps});
    front = pareto_front(objectives);

    kg = KnowledgeGraph();
    seed_graph_structure();

    std::vector<ScoredClaim> front_claims;
    for (int idx : front.front) front_claims.push_back(scored_claims[idx]);
    ExpandStats stats = expand(kg, front_claims, hypotheses, docs_by_hypothesis,
                               encoded.column_names, cfg_.scores, false, &warnings_);

    std::string kg_path = artifact_path("expand");
    kg.persist(kg_path);
    kg.export_graphml((fs::path(cfg_.output_dir) / "kg.graphml").string());
    kg.append_changelog((fs::path(cfg_.output_dir) / "kg.log.jsonl").string(),
                        json{{"kind", "batch"},
                             {"version", kg.version()},
                             {"claims_added", stats.claims_added},
                             {"documents_added", stats.documents_added},
                             {"nodes_added", stats.nodes_added},
                             {"edges_added", stats.edges_added}});

    json front_json = {{"front", front.front},
                       {"dominance_count", front.dominance_count},
                       {"meta", {{"stage", "front"}}}};
    std::ofstream fout((fs::path(cfg_.output_dir) / "front.json").string(),
                       std::ios::binary);
    fout << front_json.dump(1) << "\n";

    json meta = {{"stage", "expand"}, {"inputs_hash", stage_inputs_hash("expand")}};
    std::ofstream mout((fs::path(cfg_.output_dir) / "expand.meta.json").string(),
                       std::ios::binary);
    mout << meta.dump(1) << "\n";
}

// ------------------------------ online path --------------------------------

PhenotypeState Pipeline::state_from_profile(int cluster_id, const Vector& profile,
                                            const std::vector<std::string>& names,
                                            const std::vector<std::string>& sp_names,
                                            const Vector& omega, const CausalGraph& causal) {
    PhenotypeState ps;
    ps.cluster_id = cluster_id;
    std::vector<int> order(profile.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (std::abs(profile[a]) != std::abs(profile[b]))
            return std::abs(profile[a]) > std::abs(profile[b]);
        return a < b;
    });
    for (int c : order) {
        if (std::abs(profile[c]) < 0.5 || ps.dominant_features.size() >= 8) break;
        ps.dominant_features.push_back({names[c], profile[c], profile[c] >= 0 ? 1 : -1});
    }
    if (ps.dominant_features.empty()) {
        for (int r = 0; r < std::min<int>(3, static_cast<int>(order.size())); ++r)
            ps.dominant_features.push_back(
                {names[order[r]], profile[order[r]], profile[order[r]] >= 0 ? 1 : -1});
    }
    auto edges = causal.edges;
    std::sort(edges.begin(), edges.end(), [](const CausalEdge& a, const CausalEdge& b) {
        if (std::abs(a.weight) != std::abs(b.weight)) return std::abs(a.weight) > std::abs(b.weight);
        if (a.source != b.source) return a.source < b.source;
        return a.target < b.target;
    });
    for (size_t e = 0; e < edges.size() && e < 5; ++e)
        ps.salient_edges.push_back({names[edges[e].source], names[edges[e].target],
                                    edges[e].weight});
    std::vector<int> sp_order(sp_names.size());
    std::iota(sp_order.begin(), sp_order.end(), 0);
    std::sort(sp_order.begin(), sp_order.end(), [&](int a, int b) {
        if (omega[a] != omega[b]) return omega[a] > omega[b];
        return a < b;
    });
    for (size_t s = 0; s < sp_order.size() && s < 2; ++s)
        ps.context_sp.push_back(sp_names[sp_order[s]]);

    std::ostringstream pop;
    pop << "individuals in phenotype " << cluster_id << " characterized by ";
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

void Pipeline::accelerated_expand(int new_cluster_id, const CandidatePhenotype& cand) {
    const int n = static_cast<int>(cand.exemplars.size());
    Matrix rows(n, encoded.f());
    for (int i = 0; i < n; ++i) rows.row(i) = cand.exemplars[i].raw.transpose();

    CausalGraph cg = fit_cluster_graph(new_cluster_id, rows, warnings_);
    Discretization disc = Discretization::fit(rows, encoded.column_kinds, cfg_.bn_bins);
    BayesNet bn = fit_bn(rows, cg, disc, cfg_.bn_parent_cap);

    Vector profile = rows.colwise().mean().transpose();
    PhenotypeState ps = state_from_profile(new_cluster_id, profile, encoded.column_names,
                                           sp_mixtures.empty() ? std::vector<std::string>{}
                                                               : sp_mixtures.front().sp_names,
                                           cand.sp_vector, cg);

    HypothesisConfig hcfg = cfg_.hypothesis;
    hcfg.max_hypotheses = cfg_.online.accel_max_hypotheses;
    std::unique_ptr<LlmBackend> hyp_backend;
    if (hcfg.provider == "llm") hyp_backend = make_llm_backend();
    auto all = causal_graphs;
    all.push_back(cg);
    auto hyps = generate_hypotheses(ps, cg, bn, all, hcfg, hyp_backend.get(), &warnings_);

    auto client = make_literature_client();
    auto backend = make_llm_backend();
    std::map<std::string, std::string> aliases;
    if (!cfg_.aliases_path.empty()) aliases = load_aliases(cfg_.aliases_path);
    EntityLinker linker(encoded.column_names, aliases);

    std::map<std::string, std::vector<Document>> docs_by_hyp;
    std::vector<ScoredClaim> claims;
    std::vector<NPSComponents> raws;
    for (const auto& h : hyps) {
        RetrievalResult res = retrieve(h, *client, cfg_.online.accel_doc_limit, cfg_.scores);
        score_documents(res.docs, h, cfg_.scores);
        raws.push_back(raw_nps_components(h.source, h.target, cg, bn, all, res.lit_support));
        docs_by_hyp[h.id] = std::move(res.docs);
    }
    NpsBatchStats stats = NpsBatchStats::from(raws);
    for (size_t i = 0; i < hyps.size(); ++i) {
        const auto& h = hyps[i];
        double nps = score_nps(raws[i], stats, cfg_.nps_weights).nps;
        for (const auto& d : docs_by_hyp[h.id]) {
            if (!d.retained) continue;
            ExtractionStats ex;
            for (auto& c : extract_claims(d, h, ps, *backend, linker, &ex, &warnings_)) {
                ScoredClaim sc;
                sc.claim = std::move(c);
                sc.relevance = relevance(sc.claim, d, ps, cfg_.scores);
                sc.validation = validation(sc.claim, cg, bn, cfg_.scores);
                sc.nps = nps;
                claims.push_back(std::move(sc));
            }
        }
    }

    std::vector<ObjectiveVector> objectives;
    for (const auto& sc : claims) objectives.push_back({sc.relevance, sc.validation, sc.nps});
    ParetoFront pf = pareto_front(objectives);
    std::vector<ScoredClaim> front_claims;
    for (int idx : pf.front) front_claims.push_back(claims[idx]);

    kg.add_node({{NodeType::Phenotype, std::to_string(new_cluster_id)},
                 {{"population", ps.population_text},
                  {"exploratory", true},
                  {"support", cand.support}}});
    ExpandStats est = expand(kg, front_claims, hyps, docs_by_hyp, encoded.column_names,
                             cfg_.scores, /*exploratory=*/true, &warnings_);

    std::string kg_path = artifact_path("expand");
    kg.persist(kg_path);
    kg.append_changelog((fs::path(cfg_.output_dir) / "kg.log.jsonl").string(),
                        json{{"kind", "exploratory-batch"},
                             {"phenotype", new_cluster_id},
                             {"version", kg.version()},
                             {"claims_added", est.claims_added},
                             {"documents_added", est.documents_added}});
}

Pipeline::MatchSummary Pipeline::match_states(const std::string& input_csv) {
    reuse_ = true;
    ensure_expand();

    Dataset ds = load_dataset(input_csv, cfg_.schema);

    IsolationForest forest = IsolationForest::fit(
        graph_vectors, cfg_.online.iforest_trees, cfg_.online.iforest_subsample,
        derive_seed(cfg_.seed, "iforest"));

    // reuse the training graph construction so a replayed training state
    // reproduces its training embedding exactly
    EncodedMatrix one_row = encoded;
    auto template_graph_for = [&](const Vector& row) {
        one_row.values = row.transpose();
        return build_state_graph(one_row, edge_template, 0);
    };

    MatchSummary summary;
    summary.decisions_path = (fs::path(cfg_.output_dir) / "decisions.jsonl").string();
    std::ofstream out(summary.decisions_path, std::ios::binary);
    if (!out) throw Error("cannot write " + summary.decisions_path);

    CandidateBuffer buffer;
    int promoted_clusters = 0;

    for (size_t r = 0; r < ds.records.size(); ++r) {
        json rec;
        rec["state_id"] = r;
        try {
            OnlineState s;
            s.state_id = static_cast<int>(r);
            s.raw = encoded.encode_row(cfg_.schema, ds.records[r]);
            s.z = encode_state(template_graph_for(s.raw), encoder).graph_vector;
            s.pi = soft_assign(s.z, clusters).pi;
            s.pi_sp = sp_space_vector(s.pi, sp_mixtures);

            Vector scores = score_state(s, clusters, sp_mixtures, cfg_.online);
            MatchDecision d = decide(scores, cfg_.online);
            int indicator = forest.indicator(s.z, cfg_.online.iforest_cutoff);

            rec["kind"] = to_string(d.kind);
            rec["best_cluster"] = d.best_cluster;
            rec["best_score"] = d.best_score;
            rec["scores"] = vector_to_json(scores);
            rec["anomaly_indicator"] = indicator;
            json soft = json::array();
            for (const auto& [k, w] : d.soft_set) soft.push_back({k, w});
            rec["soft_set"] = soft;

            switch (d.kind) {
                case MatchKind::Match: ++summary.matches; break;
                case MatchKind::SoftMatch: ++summary.soft_matches; break;
                case MatchKind::Anomaly: ++summary.anomalies; break;
            }

            // combined criterion: isolation forest AND low similarity
            if (d.kind == MatchKind::Anomaly && indicator == -1) {
                auto promoted = buffer.add(s, cfg_.online);
                rec["buffered"] = true;
                if (promoted) {
                    int new_id = clusters.k + promoted_clusters++;
                    rec["promoted_phenotype"] = new_id;
                    ++summary.promotions;
                    accelerated_expand(new_id, *promoted);
                }
            }
        } catch (const std::exception& e) {
            rec["error"] = e.what();
        }
        out << rec.dump() << "\n";
        ++summary.states;
    }
    summary.states = ds.records.size();
    return summary;
}

ExpectedExpansion expected_expansion_from_artifacts(const json& claims_artifact,
                                                    const json& retrieval_artifact,
                                                    double tau_c, double tau_d) {
    ExpectedExpansion out;

    // independent re-computation: brute-force dominance over (R, Y, NPS)
    std::vector<json> claims(claims_artifact.at("claims").begin(),
                             claims_artifact.at("claims").end());
    const size_t n = claims.size();
    auto obj = [&](size_t i) {
        return std::array<double, 3>{claims[i].at("relevance").get<double>(),
                                     claims[i].at("validation").get<double>(),
                                     claims[i].at("nps").get<double>()};
    };
    std::set<std::string> selected_hyps;
    for (size_t i = 0; i < n; ++i) {
        auto a = obj(i);
        bool dominated = false;
        for (size_t j = 0; j < n && !dominated; ++j) {
            if (i == j) continue;
            auto b = obj(j);
            bool ge = b[0] >= a[0] && b[1] >= a[1] && b[2] >= a[2];
            bool gt = b[0] > a[0] || b[1] > a[1] || b[2] > a[2];
            dominated = ge && gt;
        }
        if (dominated) continue;
        if (claims[i].at("validation").get<double>() < tau_c) continue;
        const json& c = claims[i].at("claim");
        auto part = [&](const char* text_key, const char* feat_key) {
            int f = c.at(feat_key).get<int>();
            return f >= 0 ? "f" + std::to_string(f)
                          : "t:" + c.at(text_key).get<std::string>();
        };
        out.claim_keys.insert(part("subject_text", "subject_feature") + "|" +
                              c.at("relation").get<std::string>() + "|" +
                              part("object_text", "object_feature") + "|" +
                              c.at("doc_id").get<std::string>());
        selected_hyps.insert(c.at("hypothesis_id").get<std::string>());
    }
    for (const auto& hid : selected_hyps) {
        const json& entry = retrieval_artifact.at("by_hypothesis").at(hid);
        for (const auto& d : entry.at("documents")) {
            if (d.at("match_score").get<double>() >= tau_d)
                out.doc_ids.insert(d.at("doc_id").get<std::string>());
        }
    }
    return out;
}

}  // namespace phenokg
