#include <doctest.h>

#include "phenokg/pipeline.hpp"
#include "phenokg/rng.hpp"
#include "phenokg/synth.hpp"

// httplib drags in <resolv.h>, whose `res` macro breaks Eigen headers; keep
// it after anything that includes Eigen
#include <httplib.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

using namespace phenokg;
namespace fs = std::filesystem;

namespace {

json minimal_config_json(const fs::path& dir) {
    json schema = json::array();
    schema.push_back({{"name", "a"}, {"kind", "numeric"}});
    schema.push_back({{"name", "b"}, {"kind", "numeric"}});
    return json{{"seed", 1},
                {"data", {{"path", (dir / "d.csv").string()}, {"schema", schema}}},
                {"sp", {{"definitions_path", (dir / "sp.json").string()}}},
                {"backends", {{"mode", "fixture"}, {"fixtures_dir", (dir / "fx").string()}}},
                {"output_dir", (dir / "out").string()}};
}

}  // namespace

TEST_CASE("config validation rejects bad weight groups") {
    fs::path dir = fs::temp_directory_path() / "phenokg-cfg";
    fs::create_directories(dir);
    json base = minimal_config_json(dir);

    SUBCASE("valid config loads") { CHECK_NOTHROW(PipelineConfig::from_json(base)); }
    SUBCASE("omega summing to 0.9 is rejected naming omega") {
        json bad = base;
        bad["evidence"]["omega"] = {0.4, 0.3, 0.2};
        CHECK_THROWS_WITH_AS(PipelineConfig::from_json(bad), doctest::Contains("omega"),
                             ConfigError);
    }
    SUBCASE("theta needs six entries summing to one") {
        json bad = base;
        bad["hypothesis"]["theta"] = {0.5, 0.5};
        CHECK_THROWS_AS(PipelineConfig::from_json(bad), ConfigError);
        bad["hypothesis"]["theta"] = {0.5, 0.5, 0.5, 0.5, 0.5, 0.5};
        CHECK_THROWS_WITH_AS(PipelineConfig::from_json(bad), doctest::Contains("theta"),
                             ConfigError);
    }
    SUBCASE("tau ordering is enforced") {
        json bad = base;
        bad["online"]["tau_anom"] = 0.9;
        CHECK_THROWS_AS(PipelineConfig::from_json(bad), ConfigError);
    }
    SUBCASE("beta group") {
        json bad = base;
        bad["evidence"]["beta"] = {0.7, 0.4};
        CHECK_THROWS_WITH_AS(PipelineConfig::from_json(bad), doctest::Contains("beta"),
                             ConfigError);
    }
    fs::remove_all(dir);
}

TEST_CASE("config serialization is a fixed point") {
    // resume validity hashes cfg.to_json(); loading a dumped config and
    // dumping it again must be byte-stable
    const PipelineConfig& cfg = golden().cfg;
    json first = cfg.to_json();
    PipelineConfig reloaded = PipelineConfig::from_json(first);
    CHECK(reloaded.to_json().dump() == first.dump());
    CHECK(reloaded.seed == cfg.seed);
    CHECK(reloaded.scores.tau_d == cfg.scores.tau_d);
    CHECK(reloaded.online.tau_match == cfg.online.tau_match);
    CHECK(reloaded.schema.size() == cfg.schema.size());
}

TEST_CASE("artifact serialization round trips") {
    Rng rng(6);
    SUBCASE("matrices keep exact doubles") {
        Matrix m(3, 4);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 4; ++j) m(i, j) = rng.normal() * 1e-7;
        json j = matrix_to_json(m);
        // through text, as the artifacts do
        json back = json::parse(j.dump());
        CHECK(matrix_from_json(back).cwiseEqual(m).all());
    }
    SUBCASE("cluster model") {
        ClusterModel m;
        m.k = 2;
        m.centroids = Matrix::Random(2, 5);
        m.members = {{0, 2}, {1}};
        m.labels = {0, 1, 0};
        m.soft_temperature = 0.37;
        m.silhouette = 0.12;
        m.laplacian_eigenvalues = {0.0, 0.01, 0.5};
        json j = json::parse(to_json(m).dump());
        ClusterModel back = cluster_model_from_json(j);
        CHECK(back.centroids.cwiseEqual(m.centroids).all());
        CHECK(back.members == m.members);
        CHECK(back.soft_temperature == m.soft_temperature);
    }
    SUBCASE("causal graph and bayes net") {
        auto sem_x = Matrix::Random(40, 4).eval();
        CausalGraph g = fit_notears(sem_x, {});
        g.cluster_id = 3;
        g.feature_names = {"a", "b", "c", "d"};
        CausalGraph back = causal_graph_from_json(json::parse(to_json(g).dump()));
        CHECK(back.w.cwiseEqual(g.w).all());
        CHECK(back.raw_w.cwiseEqual(g.raw_w).all());
        CHECK(back.edges.size() == g.edges.size());

        std::vector<FeatureKind> kinds(4, FeatureKind::Numeric);
        BayesNet bn = fit_bn(sem_x, g, Discretization::fit(sem_x, kinds, 3));
        BayesNet bback = bayes_net_from_json(json::parse(to_json(bn).dump()));
        CHECK(bback.parents == bn.parents);
        CHECK(bback.card == bn.card);
        for (int i = 0; i < bn.f(); ++i) CHECK(bback.cpt[i].cwiseEqual(bn.cpt[i]).all());
        Query q{0, {}};
        CHECK((posterior(bback, q) - posterior(bn, q)).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("scored claims") {
        ScoredClaim sc;
        sc.claim.claim_id = "c";
        sc.claim.hypothesis_id = "h";
        sc.claim.doc_id = "d";
        sc.claim.subject_text = "stress";
        sc.claim.subject_feature = 2;
        sc.claim.relation = "worsens";
        sc.claim.object_text = "sleep";
        sc.claim.object_feature = -1;
        sc.claim.meta = {"rct", 0.75, "ctx", "rec"};
        sc.relevance = 0.5;
        sc.validation = 0.25;
        sc.nps = 0.8125;
        ScoredClaim back = scored_claim_from_json(json::parse(to_json(sc).dump()));
        CHECK(back.claim.subject_feature == 2);
        CHECK(back.claim.object_feature == -1);
        CHECK(back.nps == sc.nps);
        CHECK(back.claim.meta.confidence == 0.75);
    }
}

namespace {

// built once; doctest re-enters the test case body for every subcase
struct GoldenFixture {
    fs::path dir;
    PipelineConfig cfg;
    GoldenFixture() {
        dir = fs::temp_directory_path() / "phenokg-golden-unit";
        fs::remove_all(dir);
        cfg = synth::write_golden_workspace(dir.string(), 7);
    }
};

const GoldenFixture& golden() {
    static GoldenFixture fixture;
    return fixture;
}

}  // namespace

TEST_CASE("golden workspace end to end" * doctest::timeout(280)) {
    const fs::path& dir = golden().dir;
    const PipelineConfig& cfg = golden().cfg;

    SUBCASE("run, resume, and stage reuse") {
        Pipeline p(cfg);
        RunManifest m = p.run(false);
        CHECK(m.stages.size() == 8);
        for (const auto& s : m.stages) {
            CHECK_FALSE(s.resumed);
            CHECK(fs::exists(s.artifact));
            CHECK(s.sha256 == sha256_of_file(s.artifact));
        }

        // resumed run loads every stage and leaves artifacts untouched
        Pipeline p2(cfg);
        RunManifest m2 = p2.run(true);
        for (const auto& s : m2.stages) CHECK(s.resumed);
        CHECK(m2.artifact_checksums() == m.artifact_checksums());

        // resumed products equal recomputed products
        CHECK(p2.clusters.labels == p.clusters.labels);
        CHECK(p2.scored_claims.size() == p.scored_claims.size());
        CHECK(p2.kg.structurally_equal(p.kg));

        // a changed config invalidates the chain and recomputes
        PipelineConfig cfg2 = cfg;
        cfg2.seed = 8;
        Pipeline p3(cfg2);
        p3.set_reuse(true);
        p3.ensure_ingest();
        CHECK(p3.graph_vectors.rows() == p.graph_vectors.rows());
        CHECK_FALSE(p3.graph_vectors.cwiseEqual(p.graph_vectors).all());
    }
    SUBCASE("distribution invariants across the run") {
        Pipeline p(cfg);
        p.run(true);
        for (Eigen::Index i = 0; i < p.soft_assignments.rows(); ++i)
            CHECK(std::abs(p.soft_assignments.row(i).sum() - 1.0) < 1e-9);
        for (const auto& mix : p.sp_mixtures) {
            CHECK(std::abs(mix.omega.sum() - 1.0) < 1e-9);
            CHECK(mix.omega.minCoeff() > 0.0);
        }
    }
    SUBCASE("match writes one decision per state") {
        Pipeline p(cfg);
        p.run(true);
        auto summary = p.match_states((dir / "data" / "new_states.csv").string());
        CHECK(summary.states == 100);
        CHECK(summary.matches + summary.soft_matches + summary.anomalies == 100);
        CHECK(summary.promotions == 1);
        std::ifstream in(summary.decisions_path);
        int lines = 0;
        std::string line;
        while (std::getline(in, line))
            if (!line.empty()) ++lines;
        CHECK(lines == 100);
    }
    SUBCASE("report tables agree with the run") {
        Pipeline p(cfg);
        p.run(true);
        p.write_report();
        fs::path rep = fs::path(cfg.output_dir) / "report";
        for (const char* f : {"clusters.csv", "nps.csv", "nps_histogram.csv", "pareto.csv",
                              "pareto_front.csv", "pareto_scatter.svg", "nps_components.svg"})
            CHECK(fs::exists(rep / f));

        auto count_rows = [](const fs::path& path) {
            std::ifstream in(path);
            std::string line;
            int rows = -1;  // skip the header
            while (std::getline(in, line))
                if (!line.empty()) ++rows;
            return rows;
        };
        CHECK(count_rows(rep / "pareto_front.csv") == int(p.front.front.size()));
        CHECK(count_rows(rep / "pareto.csv") == int(p.scored_claims.size()));
        CHECK(count_rows(rep / "clusters.csv") == p.clusters.k);

        // histogram bins sum to the number of scored hypotheses
        std::ifstream in(rep / "nps_histogram.csv");
        std::string line;
        std::getline(in, line);  // header
        int total_from_bins = 0, declared_total = -1;
        while (std::getline(in, line)) {
            auto last_comma = line.rfind(',');
            int count = std::stoi(line.substr(last_comma + 1));
            if (line.rfind("total", 0) == 0) declared_total = count;
            else total_from_bins += count;
        }
        CHECK(total_from_bins == declared_total);
        CHECK(declared_total == int(p.nps_by_hypothesis.size()));
    }
    SUBCASE("missing dataset aborts with the stage name") {
        PipelineConfig broken = cfg;
        broken.dataset_path = (dir / "nope.csv").string();
        broken.output_dir = (dir / "out2").string();
        Pipeline p(broken);
        CHECK_THROWS_AS(p.run(false), StageFailure);
        try {
            Pipeline(broken).run(false);
        } catch (const StageFailure& e) {
            CHECK(e.stage == "ingest");
        }
    }
}

TEST_CASE("http mode reproduces the fixture-mode run" * doctest::timeout(280)) {
    const PipelineConfig& cfg = golden().cfg;

    // one local server speaking both wire protocols, backed by the same
    // deterministic responders that generated the fixtures
    httplib::Server server;
    std::mutex mu;
    std::map<std::string, LitRecord> records_by_id;

    server.Get("/esearch.fcgi", [&](const httplib::Request& req, httplib::Response& res) {
        std::string term = req.get_param_value("term");
        int retmax = std::stoi(req.get_param_value("retmax"));
        auto records = synth::synth_documents(term, retmax);
        json idlist = json::array();
        {
            std::lock_guard<std::mutex> lock(mu);
            for (const auto& r : records) {
                idlist.push_back(r.doc_id);
                records_by_id[r.doc_id] = r;
            }
        }
        json body = {{"esearchresult",
                      {{"count", std::to_string(records.size())}, {"idlist", idlist}}}};
        res.set_content(body.dump(), "application/json");
    });
    server.Get("/efetch.fcgi", [&](const httplib::Request& req, httplib::Response& res) {
        std::vector<LitRecord> records;
        std::string ids = req.get_param_value("id");
        std::lock_guard<std::mutex> lock(mu);
        size_t from = 0;
        while (from <= ids.size()) {
            size_t comma = ids.find(',', from);
            std::string id = ids.substr(from, comma - from);
            auto it = records_by_id.find(id);
            if (it != records_by_id.end()) records.push_back(it->second);
            if (comma == std::string::npos) break;
            from = comma + 1;
        }
        res.set_content(LiteratureClient::render_efetch_xml(records), "application/xml");
    });
    server.Post("/claims", [&](const httplib::Request& req, httplib::Response& res) {
        res.set_content(synth::synth_claims_response(json::parse(req.body)).dump(),
                        "application/json");
    });

    int port = server.bind_to_any_port("127.0.0.1");
    std::thread worker([&] { server.listen_after_bind(); });
    server.wait_until_ready();
    std::string base = "http://127.0.0.1:" + std::to_string(port);

    PipelineConfig http_cfg = cfg;
    http_cfg.backend_mode = "http";
    http_cfg.llm_url = base;
    http_cfg.literature_url = base;
    http_cfg.cache_dir = (golden().dir / "http-cache").string();
    http_cfg.output_dir = (golden().dir / "out-http").string();

    // fresh output directories on both sides: the shared golden one may have
    // grown exploratory nodes from earlier online-path cases
    PipelineConfig fixture_cfg = cfg;
    fixture_cfg.output_dir = (golden().dir / "out-fixture").string();
    Pipeline fixture_run(fixture_cfg);
    fixture_run.run(false);
    Pipeline http_run(http_cfg);
    http_run.run(false);

    REQUIRE(http_run.scored_claims.size() == fixture_run.scored_claims.size());
    for (size_t i = 0; i < http_run.scored_claims.size(); ++i) {
        const auto& a = http_run.scored_claims[i];
        const auto& b = fixture_run.scored_claims[i];
        CHECK(a.claim.claim_id == b.claim.claim_id);
        CHECK(a.relevance == b.relevance);
        CHECK(a.validation == b.validation);
        CHECK(a.nps == b.nps);
    }
    CHECK(http_run.kg.structurally_equal(fixture_run.kg));

    // responses were cached on disk keyed by query
    bool any_cache = false;
    for (const auto& entry : fs::directory_iterator(http_cfg.cache_dir))
        any_cache |= entry.path().filename().string().rfind("es-", 0) == 0;
    CHECK(any_cache);

    server.stop();
    worker.join();

    SUBCASE("an unreachable literature endpoint fails the retrieve stage") {
        PipelineConfig dead = http_cfg;
        dead.literature_url = "http://127.0.0.1:1";  // nothing listens here
        dead.cache_dir = (golden().dir / "dead-cache").string();
        dead.output_dir = (golden().dir / "out-dead").string();
        Pipeline p(dead);
        try {
            p.run(false);
            FAIL("expected a stage failure");
        } catch (const StageFailure& e) {
            CHECK(e.stage == "retrieve");
        }
    }
}

TEST_CASE("unseen categorical values surface as per-state errors") {
    const PipelineConfig& cfg = golden().cfg;
    fs::path input = golden().dir / "bad_states.csv";
    {
        csv::Table t = synth::generate_new_states(synth::GeneratorSpec{});
        t.rows.resize(2);
        t.rows[1][14] = "catastrophic";  // mental_health_risk outside training
        csv::write_file(input.string(), t);
    }
    Pipeline p(cfg);
    p.run(true);
    auto summary = p.match_states(input.string());
    CHECK(summary.states == 2);
    std::ifstream in(summary.decisions_path);
    std::string line;
    int errors = 0, decided = 0;
    while (std::getline(in, line)) {
        json rec = json::parse(line);
        if (rec.contains("error")) ++errors;
        if (rec.contains("kind")) ++decided;
    }
    CHECK(errors == 1);
    CHECK(decided == 1);
}

TEST_CASE("training states replayed online reproduce their embeddings") {
    fs::path dir = fs::temp_directory_path() / "phenokg-replay-unit";
    fs::remove_all(dir);
    synth::GeneratorSpec spec;
    spec.n_states = 60;
    fs::create_directories(dir);
    csv::write_file((dir / "d.csv").string(), synth::generate_dataset(spec));

    Dataset ds = load_dataset((dir / "d.csv").string(), synth::dataset_schema());
    EncodedMatrix m = encode(ds);
    EdgeTemplate t = build_edge_template(m, 0.2);
    EncoderParams enc = EncoderParams::make(1 + int(m.f()), 16, 2, 99);
    auto graphs = build_state_graphs(m, t);
    auto embs = encode_corpus(graphs, enc);

    // re-encode row 5 through the online path
    Vector raw = m.encode_row(synth::dataset_schema(), ds.records[5]);
    CHECK((raw - m.values.row(5).transpose()).cwiseAbs().maxCoeff() == 0.0);
    EncodedMatrix one = m;
    one.values = raw.transpose();
    auto emb = encode_state(build_state_graph(one, t, 0), enc);
    CHECK(emb.graph_vector.cwiseEqual(embs[5].graph_vector).all());

    fs::remove_all(dir);
}
