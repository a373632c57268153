#include <doctest.h>

#include <cmath>

#include "phenokg/online.hpp"
#include "phenokg/rng.hpp"
#include "support/oracles.hpp"

using namespace phenokg;

namespace {

OnlineState state_with(const Vector& z, const Vector& pi_sp) {
    OnlineState s;
    s.z = z;
    s.pi_sp = pi_sp;
    return s;
}

}  // namespace

TEST_CASE("online config ordering") {
    OnlineConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.tau_anom = 0.7;  // above tau_match
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("score_state blends structural and semantic similarity") {
    ClusterModel model;
    model.k = 2;
    model.centroids = Matrix::Zero(2, 3);
    model.centroids << 1, 0, 0, 0, 1, 0;
    std::vector<SPMixture> mixtures(2);
    for (int k = 0; k < 2; ++k) {
        mixtures[k].cluster_id = k;
        mixtures[k].sp_names = {"a", "b"};
        mixtures[k].omega = Vector(2);
    }
    mixtures[0].omega << 0.9, 0.1;
    mixtures[1].omega << 0.1, 0.9;
    OnlineConfig cfg;

    SUBCASE("matching both terms scores exactly one") {
        auto s = state_with(model.centroids.row(1).transpose(), mixtures[1].omega);
        Vector scores = score_state(s, model, mixtures, cfg);
        CHECK(scores[1] == doctest::Approx(1.0));
        CHECK(scores[0] < scores[1]);
    }
    SUBCASE("alpha = 1 reduces to the embedding cosine") {
        OnlineConfig pure = cfg;
        pure.alpha = 1.0;
        Vector z(3);
        z << 1, 1, 0;
        auto s = state_with(z, mixtures[0].omega);
        Vector scores = score_state(s, model, mixtures, pure);
        double expected = (1.0 / std::sqrt(2.0) + 1.0) / 2.0;
        CHECK(scores[0] == doctest::Approx(expected));
        CHECK(scores[1] == doctest::Approx(expected));
    }
    SUBCASE("zero embeddings are rejected") {
        auto s = state_with(Vector::Zero(3), mixtures[0].omega);
        CHECK_THROWS_AS(score_state(s, model, mixtures, cfg), ZeroVector);
    }
}

TEST_CASE("sp-space vector is a convex mixture") {
    std::vector<SPMixture> mixtures(2);
    for (int k = 0; k < 2; ++k) {
        mixtures[k].omega = Vector(3);
    }
    mixtures[0].omega << 0.7, 0.2, 0.1;
    mixtures[1].omega << 0.1, 0.1, 0.8;
    Vector pi(2);
    pi << 0.25, 0.75;
    Vector sp = sp_space_vector(pi, mixtures);
    CHECK(std::abs(sp.sum() - 1.0) < 1e-9);
    CHECK(sp[2] == doctest::Approx(0.25 * 0.1 + 0.75 * 0.8));
}

TEST_CASE("eq-28 decision rule") {
    OnlineConfig cfg;  // tau_match 0.6, tau_anom 0.3, band 0.8

    SUBCASE("clear winner above tau_match") {
        Vector s(2);
        s << 0.7, 0.2;
        auto d = decide(s, cfg);
        CHECK(d.kind == MatchKind::Match);
        CHECK(d.best_cluster == 0);
        CHECK(d.soft_set.size() == 1);
    }
    SUBCASE("everything below tau_anom is an anomaly") {
        Vector s(2);
        s << 0.25, 0.2;
        CHECK(decide(s, cfg).kind == MatchKind::Anomaly);
    }
    SUBCASE("the soft band keeps near-ties and renormalizes") {
        Vector s(3);
        s << 0.45, 0.42, 0.1;
        auto d = decide(s, cfg);
        CHECK(d.kind == MatchKind::SoftMatch);
        REQUIRE(d.soft_set.size() == 2);
        CHECK(d.soft_set[0].first == 0);
        CHECK(d.soft_set[1].first == 1);
        CHECK(d.soft_set[0].second == doctest::Approx(0.45 / 0.87));
        CHECK(d.soft_set[1].second == doctest::Approx(0.42 / 0.87));
    }
    SUBCASE("exactly one branch fires for any score vector") {
        Rng rng(31);
        for (int trial = 0; trial < 500; ++trial) {
            Vector s(3);
            for (int i = 0; i < 3; ++i) s[i] = rng.uniform();
            auto d = decide(s, cfg);
            double best = s.maxCoeff();
            if (best >= cfg.tau_match) CHECK(d.kind == MatchKind::Match);
            else if (best < cfg.tau_anom) CHECK(d.kind == MatchKind::Anomaly);
            else CHECK(d.kind == MatchKind::SoftMatch);
            if (d.kind != MatchKind::Anomaly) {
                double total = 0;
                for (auto& [k, w] : d.soft_set) total += w;
                CHECK(total == doctest::Approx(1.0));
            }
        }
    }
    SUBCASE("raising tau_match never converts an anomaly into a match") {
        Rng rng(32);
        for (int trial = 0; trial < 300; ++trial) {
            Vector s(4);
            for (int i = 0; i < 4; ++i) s[i] = rng.uniform();
            OnlineConfig lo = cfg;
            OnlineConfig hi = cfg;
            hi.tau_match = std::min(1.0, cfg.tau_match + 0.2);
            auto dlo = decide(s, lo);
            auto dhi = decide(s, hi);
            if (dlo.kind == MatchKind::Anomaly) CHECK(dhi.kind == MatchKind::Anomaly);
            if (dhi.kind == MatchKind::Match) CHECK(dlo.kind == MatchKind::Match);
        }
    }
}

TEST_CASE("isolation forest flags far-out points") {
    auto blobs = oracles::planted_gaussians(88, 300, 3, 6, 8.0);
    OnlineConfig cfg;

    SUBCASE("training centroid is an inlier, 10-sigma point is not") {
        IsolationForest forest = IsolationForest::fit(blobs.points, cfg.iforest_trees,
                                                      cfg.iforest_subsample, 4242);
        Vector centroid = Vector::Zero(6);
        int count = 0;
        for (int i = 0; i < 300; ++i)
            if (blobs.labels[i] == 0) {
                centroid += blobs.points.row(i).transpose();
                ++count;
            }
        centroid /= count;
        CHECK(forest.indicator(centroid, cfg.iforest_cutoff) == 1);

        Vector far = Vector::Constant(6, 10.0 * 8.0);
        CHECK(forest.indicator(far, cfg.iforest_cutoff) == -1);
    }
    SUBCASE("same seed gives identical indicators") {
        IsolationForest a = IsolationForest::fit(blobs.points, 50, 128, 7);
        IsolationForest b = IsolationForest::fit(blobs.points, 50, 128, 7);
        Rng rng(9);
        for (int t = 0; t < 50; ++t) {
            Vector x(6);
            for (int i = 0; i < 6; ++i) x[i] = rng.normal() * 5.0;
            CHECK(a.anomaly_score(x) == b.anomaly_score(x));
        }
    }
}

TEST_CASE("candidate buffer merges, promotes once, and separates strangers") {
    OnlineConfig cfg;  // tau_nc 5, merge radius 0.9
    CandidateBuffer buffer;

    Vector base(4);
    base << 10, 1, 0, 0;
    Rng rng(3);
    auto near_state = [&](int id) {
        OnlineState s;
        s.state_id = id;
        s.z = base + Vector::Random(4) * 0.01;
        s.pi_sp = Vector::Constant(3, 1.0 / 3.0);
        return s;
    };

    SUBCASE("first anomaly opens a candidate with support one") {
        auto p = buffer.add(near_state(0), cfg);
        CHECK_FALSE(p.has_value());
        REQUIRE(buffer.candidates().size() == 1);
        CHECK(buffer.candidates()[0].support == 1);
    }
    SUBCASE("five similar anomalies promote exactly once") {
        int promotions = 0;
        for (int i = 0; i < 5; ++i) {
            auto p = buffer.add(near_state(i), cfg);
            if (p) {
                ++promotions;
                CHECK(p->support == 5);
                CHECK(p->exemplars.size() == 5);
            }
        }
        CHECK(promotions == 1);
        CHECK(buffer.candidates().empty());  // promoted out of the buffer

        // a sixth similar anomaly starts a fresh candidate, no promotion
        auto again = buffer.add(near_state(6), cfg);
        CHECK_FALSE(again.has_value());
        CHECK(buffer.candidates().size() == 1);
    }
    SUBCASE("a far-away anomaly opens its own candidate") {
        buffer.add(near_state(0), cfg);
        OnlineState far;
        far.state_id = 99;
        Vector fz(4);
        fz << -3, 8, -5, 1;  // cosine to base well under the merge radius
        far.z = fz;
        far.pi_sp = Vector::Constant(3, 1.0 / 3.0);
        buffer.add(far, cfg);
        REQUIRE(buffer.candidates().size() == 2);
        CHECK(buffer.candidates()[0].support == 1);
        CHECK(buffer.candidates()[1].support == 1);
    }
    SUBCASE("running centroid tracks the mean of merged states") {
        buffer.add(near_state(0), cfg);
        buffer.add(near_state(1), cfg);
        buffer.add(near_state(2), cfg);
        REQUIRE(buffer.candidates().size() == 1);
        const auto& cand = buffer.candidates()[0];
        Vector mean = Vector::Zero(4);
        for (const auto& e : cand.exemplars) mean += e.z;
        mean /= double(cand.exemplars.size());
        CHECK((cand.centroid - mean).norm() < 1e-12);
    }
}
