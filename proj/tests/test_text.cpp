#include <doctest.h>

#include "phenokg/text.hpp"

using namespace phenokg;

TEST_CASE("tokenizer lowercases and splits on non-alphanumerics") {
    auto toks = tokenize("Sleep-duration, and STRESS!  (n=42)");
    CHECK(toks == std::vector<std::string>{"sleep", "duration", "and", "stress", "n", "42"});
    CHECK(tokenize("").empty());
}

TEST_CASE("jaccard") {
    CHECK(jaccard(token_set("a b c"), token_set("a b d")) == doctest::Approx(0.5));
    CHECK(jaccard(token_set("x"), token_set("x")) == doctest::Approx(1.0));
    CHECK(jaccard({}, {}) == 0.0);
    CHECK(jaccard(token_set("x"), token_set("y")) == 0.0);
}

TEST_CASE("edit similarity") {
    CHECK(edit_similarity("stress", "stress") == doctest::Approx(1.0));
    CHECK(edit_similarity("Stress", "stress") == doctest::Approx(1.0));
    CHECK(edit_similarity("", "") == doctest::Approx(1.0));
    CHECK(edit_similarity("abcd", "wxyz") == doctest::Approx(0.0));
    CHECK(edit_similarity("stress level", "stress lever") ==
          doctest::Approx(1.0 - 1.0 / 12.0));
}

TEST_CASE("tf-idf cosine") {
    std::vector<std::string> corpus = {"stress impairs sleep", "exercise improves sleep",
                                       "coffee delays sleep"};
    TfIdf sim = TfIdf::fit(corpus);
    SUBCASE("identical text scores one") {
        CHECK(sim.cosine("stress impairs sleep", "stress impairs sleep") ==
              doctest::Approx(1.0));
    }
    SUBCASE("disjoint text scores zero") {
        CHECK(sim.cosine("alpha beta", "gamma delta") == 0.0);
        CHECK(sim.cosine("", "anything") == 0.0);
    }
    SUBCASE("scores live in the unit interval and reward overlap") {
        double near = sim.cosine("stress impairs sleep badly", "stress impairs sleep");
        double far = sim.cosine("exercise improves mood", "stress impairs sleep");
        CHECK(near > far);
        CHECK(near <= 1.0);
        CHECK(far >= 0.0);
    }
    SUBCASE("rarer terms weigh more") {
        // 'sleep' appears in all three docs, 'stress' in one
        auto v = sim.vectorize("stress sleep");
        CHECK(v.at("stress") > v.at("sleep"));
    }
}
