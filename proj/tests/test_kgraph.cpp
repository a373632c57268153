#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "phenokg/hash.hpp"
#include "phenokg/kgraph.hpp"
#include "phenokg/rng.hpp"
#include "support/oracles.hpp"

using namespace phenokg;
namespace fs = std::filesystem;

TEST_CASE("pareto front") {
    SUBCASE("pairwise incomparable vectors all survive") {
        std::vector<ObjectiveVector> v = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
        auto f = pareto_front(v);
        CHECK(f.front == std::vector<int>{0, 1, 2});
    }
    SUBCASE("strict dominance removes the dominated") {
        std::vector<ObjectiveVector> v = {{0.9, 0.9, 0.9}, {0.5, 0.5, 0.5}};
        auto f = pareto_front(v);
        CHECK(f.front == std::vector<int>{0});
        CHECK(f.dominance_count[1] == 1);
    }
    SUBCASE("identical vectors are mutually non-dominated") {
        std::vector<ObjectiveVector> v = {{0.5, 0.5, 0.5}, {0.5, 0.5, 0.5}};
        auto f = pareto_front(v);
        CHECK(f.front == std::vector<int>{0, 1});
    }
    SUBCASE("agrees with the brute-force oracle on random instances") {
        Rng rng(2);
        for (int n : {10, 100, 1000}) {
            std::vector<ObjectiveVector> v;
            std::vector<oracles::Obj3> o;
            for (int i = 0; i < n; ++i) {
                double r = rng.uniform(), y = rng.uniform(), s = rng.uniform();
                v.push_back({r, y, s});
                o.push_back({r, y, s});
            }
            CHECK(pareto_front(v).front == oracles::pareto_bruteforce(o));
        }
    }
    SUBCASE("dominance is a strict partial order") {
        Rng rng(3);
        for (int trial = 0; trial < 2000; ++trial) {
            auto rnd = [&]() {
                return ObjectiveVector{rng.uniform(), rng.uniform(), rng.uniform()};
            };
            ObjectiveVector a = rnd(), b = rnd(), c = rnd();
            CHECK_FALSE(dominates(a, a));                       // irreflexive
            if (dominates(a, b)) CHECK_FALSE(dominates(b, a));  // antisymmetric
            if (dominates(a, b) && dominates(b, c)) CHECK(dominates(a, c));  // transitive
        }
    }
    SUBCASE("front membership survives monotone transforms of one objective") {
        Rng rng(5);
        std::vector<ObjectiveVector> v;
        for (int i = 0; i < 200; ++i)
            v.push_back({rng.uniform(), rng.uniform(), rng.uniform()});
        auto base = pareto_front(v).front;
        auto transformed = v;
        for (auto& x : transformed) x.y = std::exp(3.0 * x.y);  // strictly increasing
        CHECK(pareto_front(transformed).front == base);
        for (auto& x : transformed) x.r = std::atan(5.0 * x.r);
        CHECK(pareto_front(transformed).front == base);
    }
    SUBCASE("well-established knowledge is dominated by a more novel equal") {
        // Table-2 semantics: high R, high Y, strictly lower NPS loses to a
        // claim with >= R, >= Y and higher NPS
        std::vector<ObjectiveVector> v = {{0.9, 0.9, 0.1}, {0.9, 0.9, 0.7}, {0.2, 0.3, 0.9}};
        auto f = pareto_front(v);
        CHECK(std::find(f.front.begin(), f.front.end(), 0) == f.front.end());
        CHECK(std::find(f.front.begin(), f.front.end(), 1) != f.front.end());
        CHECK(std::find(f.front.begin(), f.front.end(), 2) != f.front.end());
    }
}

namespace {

struct ExpandWorld {
    std::vector<Hypothesis> hyps;
    std::vector<ScoredClaim> claims;
    std::map<std::string, std::vector<Document>> docs;
    std::vector<std::string> features = {"stress", "sleep"};
    ScoreWeights w;

    ExpandWorld() {
        Hypothesis h;
        h.id = "h-c0-stress-sleep";
        h.cluster_id = 0;
        h.population = "pop";
        h.intervention = "stress";
        h.outcome = "sleep";
        h.source = 0;
        h.target = 1;
        hyps.push_back(h);

        Document d1;
        d1.doc_id = "D1";
        d1.title = "doc one";
        d1.year = 2024;
        d1.study_type = StudyType::Rct;
        d1.match_score = 0.8;
        d1.retained = true;
        Document d2;  // below tau_d, never enters the graph
        d2.doc_id = "D2";
        d2.title = "doc two";
        d2.year = 2001;
        d2.study_type = StudyType::Unknown;
        d2.match_score = 0.1;
        d2.retained = false;
        docs[h.id] = {d1, d2};

        auto mk = [&](const char* id, double r, double y, double nps, int subj = 0,
                      int obj = 1) {
            ScoredClaim sc;
            sc.claim.claim_id = id;
            sc.claim.hypothesis_id = h.id;
            sc.claim.doc_id = "D1";
            sc.claim.subject_text = "stress";
            sc.claim.subject_feature = subj;
            sc.claim.relation = "worsens";
            sc.claim.object_text = "sleep";
            sc.claim.object_feature = obj;
            sc.claim.meta.confidence = 0.8;
            sc.relevance = r;
            sc.validation = y;
            sc.nps = nps;
            return sc;
        };
        claims.push_back(mk("c1", 0.8, 0.9, 0.5));
        claims.push_back(mk("c2", 0.7, 0.39, 0.9));  // Y below tau_c = 0.4
    }
};

}  // namespace

TEST_CASE("expand applies the update rule") {
    ExpandWorld w;
    KnowledgeGraph g;
    g.add_node({{NodeType::Phenotype, "0"}, {{"size", 10}}});

    ExpandStats stats = expand(g, w.claims, w.hyps, w.docs, w.features, w.w);
    CHECK(stats.changed);
    CHECK(stats.claims_added == 1);     // c2 fails the tau_c gate
    CHECK(stats.documents_added == 1);  // D2 fails the tau_d gate
    CHECK(g.version() == 1);

    CHECK(g.has_node({NodeType::Claim, "f0|worsens|f1|D1"}));
    CHECK(g.has_node({NodeType::Document, "D1"}));
    CHECK_FALSE(g.has_node({NodeType::Document, "D2"}));
    CHECK(g.has_node({NodeType::Hypothesis, "h-c0-stress-sleep"}));
    CHECK(g.has_node({NodeType::Feature, "stress"}));

    SUBCASE("re-applying the same batch is a no-op") {
        size_t nodes = g.node_count(), edges = g.edge_count();
        ExpandStats again = expand(g, w.claims, w.hyps, w.docs, w.features, w.w);
        CHECK_FALSE(again.changed);
        CHECK(g.version() == 1);  // single version bump on first apply only
        CHECK(g.node_count() == nodes);
        CHECK(g.edge_count() == edges);
    }
    SUBCASE("growth is monotone") {
        size_t nodes = g.node_count(), edges = g.edge_count();
        ExpandWorld w2;
        w2.claims[0].claim.relation = "decreases";  // a genuinely new claim
        expand(g, w2.claims, w2.hyps, w2.docs, w2.features, w2.w);
        CHECK(g.node_count() >= nodes);
        CHECK(g.edge_count() >= edges);
    }
    SUBCASE("unknown hypothesis rejects the batch") {
        ExpandWorld w3;
        w3.claims[0].claim.hypothesis_id = "h-missing";
        KnowledgeGraph g2;
        CHECK_THROWS_AS(expand(g2, w3.claims, w.hyps, w.docs, w.features, w.w),
                        DanglingReference);
    }
    SUBCASE("duplicate natural keys keep the max NPS") {
        KnowledgeGraph g2;
        ExpandWorld w4;
        ScoredClaim dup = w4.claims[0];
        dup.claim.claim_id = "c1b";
        dup.nps = 0.95;
        w4.claims.push_back(dup);
        WarningLog log;
        expand(g2, w4.claims, w4.hyps, w4.docs, w4.features, w4.w, false, &log);
        const KgNode* node = g2.find_node({NodeType::Claim, "f0|worsens|f1|D1"});
        REQUIRE(node != nullptr);
        CHECK(node->attrs.at("nps").get<double>() == doctest::Approx(0.95));
        CHECK_FALSE(log.empty());
    }
    SUBCASE("exploratory batches flag every node they add") {
        KnowledgeGraph g2;
        ExpandWorld w5;
        expand(g2, w5.claims, w5.hyps, w5.docs, w5.features, w5.w, /*exploratory=*/true);
        for (const auto& node : g2.nodes_sorted())
            CHECK(node.attrs.value("exploratory", false));
    }
}

TEST_CASE("persistence round trip") {
    fs::path dir = fs::temp_directory_path() / "phenokg-kg-test";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::string path = (dir / "kg.jsonl").string();

    SUBCASE("empty graph") {
        KnowledgeGraph g;
        g.persist(path);
        CHECK(KnowledgeGraph::load(path).structurally_equal(g));
    }
    SUBCASE("populated graph with checksum") {
        ExpandWorld w;
        KnowledgeGraph g;
        g.add_node({{NodeType::Phenotype, "0"}, {{"size", 10}}});
        expand(g, w.claims, w.hyps, w.docs, w.features, w.w);
        g.persist(path);
        KnowledgeGraph loaded = KnowledgeGraph::load(path);
        CHECK(loaded.structurally_equal(g));
        CHECK(loaded.version() == g.version());

        // persisting the loaded graph reproduces the bytes
        std::string path2 = (dir / "kg2.jsonl").string();
        loaded.persist(path2);
        std::ifstream a(path), b(path2);
        std::string sa((std::istreambuf_iterator<char>(a)), {});
        std::string sb((std::istreambuf_iterator<char>(b)), {});
        CHECK(sa == sb);
    }
    SUBCASE("truncation is detected") {
        KnowledgeGraph g;
        g.add_node({{NodeType::Feature, "x"}, {}});
        g.add_node({{NodeType::Feature, "y"}, {}});
        g.persist(path);
        std::ifstream in(path);
        std::string all((std::istreambuf_iterator<char>(in)), {});
        in.close();
        std::ofstream out(path, std::ios::binary);
        out << all.substr(0, all.size() / 2);
        out.close();
        CHECK_THROWS_AS(KnowledgeGraph::load(path), CorruptFile);
    }
    SUBCASE("a tampered record is detected") {
        KnowledgeGraph g;
        g.add_node({{NodeType::Feature, "x"}, {}});
        g.persist(path);
        std::ifstream in(path);
        std::string all((std::istreambuf_iterator<char>(in)), {});
        in.close();
        auto pos = all.find("\"x\"");
        all.replace(pos, 3, "\"y\"");
        std::ofstream out(path, std::ios::binary);
        out << all;
        out.close();
        CHECK_THROWS_AS(KnowledgeGraph::load(path), CorruptFile);
    }
    SUBCASE("future format versions are refused") {
        KnowledgeGraph g;
        g.persist(path);
        std::ifstream in(path);
        std::string all((std::istreambuf_iterator<char>(in)), {});
        in.close();
        auto pos = all.find("\"format\":1");
        REQUIRE(pos != std::string::npos);
        all.replace(pos, 10, "\"format\":2");
        // checksum covers the header, so recompute it for the tampered body
        std::string body = all.substr(0, all.rfind("{\"kind\":\"checksum\""));
        json checksum = {{"kind", "checksum"}, {"sha256", sha256_hex(body)}};
        std::ofstream out(path, std::ios::binary);
        out << body << checksum.dump() << "\n";
        out.close();
        CHECK_THROWS_AS(KnowledgeGraph::load(path), VersionSkew);
    }
    SUBCASE("dangling edges are rejected at insert") {
        KnowledgeGraph g;
        g.add_node({{NodeType::Feature, "x"}, {}});
        CHECK_THROWS_AS(
            g.add_edge({EdgeType::CausalEdge, {NodeType::Feature, "x"},
                        {NodeType::Feature, "missing"}, {}}),
            DanglingReference);
    }
    SUBCASE("graphml export is well formed enough to reload textually") {
        ExpandWorld w;
        KnowledgeGraph g;
        g.add_node({{NodeType::Phenotype, "0"}, {}});
        expand(g, w.claims, w.hyps, w.docs, w.features, w.w);
        std::string gpath = (dir / "kg.graphml").string();
        g.export_graphml(gpath);
        std::ifstream in(gpath);
        std::string all((std::istreambuf_iterator<char>(in)), {});
        CHECK(all.find("<graphml") != std::string::npos);
        CHECK(all.find("Claim:") != std::string::npos);
        CHECK(all.find("</graphml>") != std::string::npos);
    }
    fs::remove_all(dir);
}

TEST_CASE("hash utility") {
    // block-boundary and known-answer checks
    CHECK(sha256_hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    std::string long_input(200, 'a');
    Sha256 h;
    h.update(long_input.substr(0, 63));
    h.update(long_input.substr(63));
    CHECK(h.hex() == sha256_hex(long_input));
}
