#include <doctest.h>

#include <cmath>

#include "phenokg/csv.hpp"
#include "phenokg/ingest.hpp"
#include "phenokg/rng.hpp"
#include "phenokg/synth.hpp"

using namespace phenokg;

namespace {

std::vector<FeatureDef> small_schema() {
    return {{"a", FeatureKind::Numeric, ""},
            {"b", FeatureKind::Numeric, ""},
            {"level", FeatureKind::Categorical, ""},
            {"note", FeatureKind::TextIgnored, ""}};
}

std::string table_to_text(const csv::Table& t) {
    std::string out;
    auto row_to_line = [](const std::vector<std::string>& row) {
        std::string line;
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) line += ',';
            line += csv::escape_field(row[i]);
        }
        return line + "\n";
    };
    out += row_to_line(t.header);
    for (const auto& r : t.rows) out += row_to_line(r);
    return out;
}

}  // namespace

TEST_CASE("csv parse handles quoting") {
    auto t = csv::parse("a,b\n\"x, y\",\"he said \"\"hi\"\"\"\n");
    CHECK(t.rows.size() == 1);
    CHECK(t.rows[0][0] == "x, y");
    CHECK(t.rows[0][1] == "he said \"hi\"");
}

TEST_CASE("load_dataset validates the schema") {
    SUBCASE("bundled-scale file loads") {
        synth::GeneratorSpec spec;
        auto table = synth::generate_dataset(spec);
        Dataset ds = parse_dataset(table_to_text(table), synth::dataset_schema());
        CHECK(ds.n() == 1000);
        CHECK(ds.schema.size() == 16);
    }
    SUBCASE("header-only file is an EmptyDataset") {
        CHECK_THROWS_AS(parse_dataset("a,b,level,note\n", small_schema()), EmptyDataset);
    }
    SUBCASE("non-numeric value in a numeric column") {
        CHECK_THROWS_AS(parse_dataset("a,b,level,note\n1,oops,low,hi\n", small_schema()),
                        TypeMismatch);
    }
    SUBCASE("missing schema column") {
        CHECK_THROWS_AS(parse_dataset("a,level,note\n1,low,hi\n", small_schema()),
                        MissingColumn);
    }
}

TEST_CASE("encode maps categoricals lexicographically then standardizes") {
    std::string text =
        "a,b,level,note\n"
        "1,4,low,x\n"
        "2,5,medium,y\n"
        "3,6,high,z\n";
    Dataset ds = parse_dataset(text, small_schema());
    EncodedMatrix m = encode(ds);

    // high < low < medium lexicographically
    int lvl = m.column_index("level");
    REQUIRE(lvl >= 0);
    CHECK(m.encoders[lvl].encode("high") == 0);
    CHECK(m.encoders[lvl].encode("low") == 1);
    CHECK(m.encoders[lvl].encode("medium") == 2);

    // [1,2,3] standardizes with the population sd
    int a = m.column_index("a");
    CHECK(m.values(0, a) == doctest::Approx(-1.2247448714).epsilon(1e-9));
    CHECK(m.values(1, a) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(m.values(2, a) == doctest::Approx(1.2247448714).epsilon(1e-9));

    SUBCASE("encoding round-trips for every seen categorical value") {
        for (const auto& value : {"low", "medium", "high"})
            CHECK(m.encoders[lvl].decode(m.encoders[lvl].encode(value)) == value);
    }
    SUBCASE("standardization invariant") {
        for (size_t c = 0; c < m.f(); ++c) {
            double mean = m.values.col(c).mean();
            double sd = std::sqrt((m.values.col(c).array() - mean).square().sum() /
                                  double(m.n()));
            CHECK(std::abs(mean) < 1e-9);
            CHECK(std::abs(sd - 1.0) < 1e-9);
        }
    }
}

TEST_CASE("encode drops constant columns and rows with missing values") {
    std::string text =
        "a,b,level,note\n"
        "1,7,low,\n"
        "2,7,low,\n"
        ",7,low,\n"
        "3,7,high,\n";
    Dataset ds = parse_dataset(text, small_schema());
    WarningLog log;
    EncodedMatrix m = encode(ds, &log);
    CHECK(m.rows_dropped_missing == 1);  // the row with empty 'a'
    CHECK(m.column_index("b") == -1);    // constant -> dropped
    REQUIRE(m.dropped_columns.size() == 1);
    CHECK(m.dropped_columns[0] == "b");
    CHECK(m.f() == 2);
    CHECK_FALSE(log.empty());
}

TEST_CASE("spearman correlation") {
    Vector a(5), b(5), c(5);
    a << 1, 2, 3, 4, 5;
    b << 2, 4, 9, 16, 30;  // monotone in a
    c << 3, 1, 4, 1, 5;
    CHECK(spearman(a, b) == doctest::Approx(1.0));
    CHECK(spearman(a, a.reverse()) == doctest::Approx(-1.0));
    CHECK(std::abs(spearman(a, c)) < 1.0);
}

TEST_CASE("edge template thresholds and falls back to a chain") {
    Rng rng(11);
    const int n = 1000;
    Matrix values(n, 3);
    for (int i = 0; i < n; ++i) {
        double x = rng.normal();
        values(i, 0) = x;
        values(i, 1) = std::exp(x);  // monotone map of column 0
        values(i, 2) = rng.normal(); // independent
    }
    EncodedMatrix m;
    m.values = values;
    m.column_names = {"x", "y", "z"};
    m.column_kinds = {FeatureKind::Numeric, FeatureKind::Numeric, FeatureKind::Numeric};

    SUBCASE("perfectly rank-correlated pair is included") {
        auto t = build_edge_template(m, 0.2);
        bool found = false;
        for (const auto& p : t.pairs)
            if (p.i == 0 && p.j == 1) {
                found = true;
                CHECK(p.weight == doctest::Approx(1.0));
            }
        CHECK(found);
    }
    SUBCASE("independent pair is excluded across seeds") {
        // |rho| under the null has sd ~ 1/sqrt(n); 0.2 is ~6 sigma out
        int excluded = 0;
        const int trials = 50;
        for (int s = 0; s < trials; ++s) {
            Rng r2(100 + s);
            Matrix v(n, 2);
            for (int i = 0; i < n; ++i) {
                v(i, 0) = r2.normal();
                v(i, 1) = r2.normal();
            }
            EncodedMatrix m2;
            m2.values = v;
            m2.column_names = {"u", "v"};
            m2.column_kinds = {FeatureKind::Numeric, FeatureKind::Numeric};
            auto t = build_edge_template(m2, 0.2);
            if (t.chain_fallback) ++excluded;  // no pair passed
        }
        CHECK(excluded >= 49);
    }
    SUBCASE("impossible threshold forces the chain fallback") {
        auto t = build_edge_template(m, 1.1);
        CHECK(t.chain_fallback);
        CHECK(t.pairs.size() == 2);  // f - 1
        CHECK(t.pairs[0].i == 0);
        CHECK(t.pairs[1].j == 2);
    }
}

TEST_CASE("state graphs share structure across states") {
    Rng rng(3);
    Matrix values(50, 4);
    for (int i = 0; i < 50; ++i)
        for (int j = 0; j < 4; ++j) values(i, j) = rng.normal();
    EncodedMatrix m;
    m.values = values;
    m.column_names = {"a", "b", "c", "d"};
    m.column_kinds.assign(4, FeatureKind::Numeric);
    auto t = build_edge_template(m, 0.2);
    auto graphs = build_state_graphs(m, t);
    REQUIRE(graphs.size() == 50);
    for (const auto& g : graphs) {
        CHECK(g.nodes.size() == 4);
        CHECK(g.edges.size() == graphs[0].edges.size());
        CHECK(g.node_features.rows() == 4);
        CHECK(g.node_features.cols() == 5);
    }
    // value column mirrors the encoded matrix row
    CHECK(graphs[7].node_features(2, 0) == values(7, 2));
}
