#include "phenokg/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "phenokg/hash.hpp"
#include "phenokg/pipeline.hpp"
#include "phenokg/rng.hpp"

namespace fs = std::filesystem;

namespace phenokg::synth {

namespace {

// numeric feature order used by the archetype tables
const std::vector<std::string> kNumeric = {
    "age",           "stress_level",     "anxiety_level",        "depression_level",
    "heart_rate_variability", "sleep_duration", "attendance_rate", "study_hours",
    "lms_engagement", "academic_performance", "social_interaction", "exercise_minutes",
    "mindfulness_minutes"};

// per-archetype mean offsets in z units, loosely themed on student wellbeing
// profiles (row = archetype, col = kNumeric order)
const double kArchetype[6][13] = {
    // calm high-performers
    {0.0, -2.2, -2.0, -1.8, 2.0, 1.8, 2.0, 1.4, 1.6, 2.4, 1.4, 1.6, 1.4},
    // anxious strivers
    {-0.5, 2.0, 2.8, 1.0, -1.8, -1.4, 1.0, 2.4, 1.8, -1.0, -0.8, -0.5, -0.4},
    // burned out
    {0.8, 2.8, 1.5, 2.2, -2.0, -2.4, -2.0, -1.4, -1.8, -2.2, -1.0, -1.6, -1.0},
    // socially carried
    {-0.4, -0.8, -0.5, -2.0, 0.8, 0.5, 0.8, -0.8, 0.4, 0.5, 2.8, 1.0, 0.2},
    // disengaged low-mood
    {0.4, 0.8, 0.4, 2.6, -0.8, 1.0, -2.6, -2.4, -2.6, -2.0, -2.4, -2.0, -1.4},
    // training-first athletes
    {0.2, -1.0, -0.8, -0.8, 1.5, 1.2, -1.2, -1.8, -0.8, -1.0, 0.8, 2.8, 2.6}};

// raw-unit scales and offsets per numeric feature
const double kScale[13] = {2.5, 1.8, 1.9, 1.7, 12.0, 1.1, 9.0, 1.6, 1.8, 11.0, 1.7, 25.0, 14.0};
const double kOffset[13] = {21.0, 5.0, 5.0, 4.5, 55.0, 6.8, 78.0, 4.5, 5.5, 62.0, 5.0, 90.0, 35.0};

std::string fmt_num(double v) {
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(3);
    s << v;
    return s.str();
}

// one generated row in raw units; `group` < 0 draws a mixture of g1/g2
std::vector<std::string> make_row(Rng& rng, int group, int group2 = -1, double mix = 0.0) {
    std::array<double, 13> z{};
    for (int c = 0; c < 13; ++c) {
        double mean = group2 < 0 ? kArchetype[group][c]
                                 : (1.0 - mix) * kArchetype[group][c] +
                                       mix * kArchetype[group2][c];
        z[c] = mean + 0.5 * rng.normal();
    }
    // light causal couplings inside the psychological block
    z[2] += 0.5 * (z[1] - kArchetype[group][1]);   // stress -> anxiety
    z[5] -= 0.4 * (z[1] - kArchetype[group][1]);   // stress -> sleep
    z[4] -= 0.5 * (z[1] - kArchetype[group][1]);   // stress -> hrv
    z[9] += 0.45 * (z[7] - kArchetype[group][7]);  // study hours -> performance
    z[9] -= 0.55 * (z[2] - kArchetype[group][2]);  // anxiety -> performance
    z[3] -= 0.4 * (z[10] - kArchetype[group][10]); // social -> depression

    std::vector<std::string> row;
    for (int c = 0; c < 13; ++c) row.push_back(fmt_num(kOffset[c] + kScale[c] * z[c]));

    // risk skewed by the archetype's psychological burden, not by a hard
    // per-row threshold; strategy follows risk. Minority draws stay rare so
    // the categorical columns do not open sub-modes inside a group.
    double group_burden = kArchetype[group][1] + kArchetype[group][2] + kArchetype[group][3];
    double u = rng.uniform();
    std::string risk;
    if (group_burden > 2.0) {
        risk = u < 0.97 ? "high" : (u < 0.997 ? "medium" : "low");
    } else if (group_burden < -2.0) {
        risk = u < 0.97 ? "low" : (u < 0.997 ? "medium" : "high");
    } else {
        risk = u < 0.03 ? "low" : (u < 0.97 ? "medium" : "high");
    }
    std::string strategy = risk == "high" ? "counseling"
                           : risk == "medium" ? "peer-support"
                                              : "none";
    if (rng.uniform() < 0.02) strategy = "exercise-program";
    static const char* moods[] = {"calm", "tense", "hopeful", "tired", "focused", "restless"};
    static const char* topics[] = {"exams", "friends", "sleep", "training", "family", "projects"};
    std::string journal = std::string("feeling ") + moods[rng.uniform_index(6)] + " about " +
                          topics[rng.uniform_index(6)];
    row.push_back(journal);
    row.push_back(risk);
    row.push_back(strategy);
    return row;
}

csv::Table empty_table() {
    csv::Table t;
    for (const auto& n : kNumeric) t.header.push_back(n);
    t.header.push_back("emotional_journal");
    t.header.push_back("mental_health_risk");
    t.header.push_back("intervention_strategy");
    return t;
}

}  // namespace

std::vector<FeatureDef> dataset_schema() {
    std::vector<FeatureDef> schema;
    for (const auto& n : kNumeric) schema.push_back({n, FeatureKind::Numeric, ""});
    schema.push_back({"emotional_journal", FeatureKind::TextIgnored, ""});
    schema.push_back({"mental_health_risk", FeatureKind::Categorical, ""});
    schema.push_back({"intervention_strategy", FeatureKind::Categorical, ""});
    return schema;
}

csv::Table generate_dataset(const GeneratorSpec& spec) {
    Rng rng(derive_seed(spec.data_seed, "population"));
    csv::Table t = empty_table();
    for (int i = 0; i < spec.n_states; ++i) {
        int group = i % 6;
        t.rows.push_back(make_row(rng, group));
    }
    return t;
}

csv::Table generate_new_states(const GeneratorSpec& spec) {
    Rng rng(derive_seed(spec.data_seed, "new-states"));
    csv::Table t = empty_table();
    const int n = spec.n_new_states;
    const int n_between = 10;
    const int n_anom_tight = 5;
    const int n_anom_far = 1;
    const int n_plain = n - n_between - n_anom_tight - n_anom_far;

    for (int i = 0; i < n_plain; ++i) t.rows.push_back(make_row(rng, i % 6));
    for (int i = 0; i < n_between; ++i)
        t.rows.push_back(make_row(rng, i % 6, (i + 1) % 6, 0.5));

    // far-out states: one tight bundle (promotion material) + one stray
    auto anomaly_row = [&](double direction_sign, double magnitude) {
        std::vector<std::string> row;
        for (int c = 0; c < 13; ++c) {
            double z = direction_sign * magnitude * ((c % 2 == 0) ? 1.0 : -1.0) +
                       0.3 * rng.normal();
            row.push_back(fmt_num(kOffset[c] + kScale[c] * z));
        }
        row.push_back("feeling strange about everything");
        row.push_back("high");
        row.push_back("counseling");
        return row;
    };
    for (int i = 0; i < n_anom_tight; ++i) t.rows.push_back(anomaly_row(1.0, 10.0));
    for (int i = 0; i < n_anom_far; ++i) t.rows.push_back(anomaly_row(-1.0, 10.0));
    return t;
}

std::vector<StandardPhenotypeDef> sp_definitions() {
    // illustrative signatures; real deployments supply their own
    return {
        {"anxiety",
         {{"anxiety_level", 1.0}, {"stress_level", 0.7}, {"heart_rate_variability", -0.6},
          {"sleep_duration", -0.4}}},
        {"depression",
         {{"depression_level", 1.0}, {"social_interaction", -0.7}, {"lms_engagement", -0.5},
          {"academic_performance", -0.4}}},
        {"stress",
         {{"stress_level", 1.0}, {"study_hours", 0.6}, {"sleep_duration", -0.6},
          {"heart_rate_variability", -0.5}}},
        {"sleep-disturbance",
         {{"sleep_duration", -1.0}, {"stress_level", 0.5}, {"heart_rate_variability", -0.4},
          {"attendance_rate", -0.3}}},
        {"burnout",
         {{"stress_level", 0.9}, {"depression_level", 0.7}, {"attendance_rate", -0.8},
          {"lms_engagement", -0.7}, {"academic_performance", -0.6}}},
        {"social-withdrawal",
         {{"social_interaction", -1.0}, {"depression_level", 0.6}, {"exercise_minutes", -0.4},
          {"attendance_rate", -0.3}}}};
}

json aliases_json() {
    return json{{"aliases",
                 {{"stress", "stress_level"},
                  {"perceived stress", "stress_level"},
                  {"anxiety", "anxiety_level"},
                  {"anxiety symptoms", "anxiety_level"},
                  {"depression", "depression_level"},
                  {"depressive symptoms", "depression_level"},
                  {"sleep", "sleep_duration"},
                  {"sleep quality", "sleep_duration"},
                  {"hrv", "heart_rate_variability"},
                  {"academic performance", "academic_performance"},
                  {"grades", "academic_performance"},
                  {"attendance", "attendance_rate"},
                  {"study time", "study_hours"},
                  {"online engagement", "lms_engagement"},
                  {"social support", "social_interaction"},
                  {"social engagement", "social_interaction"},
                  {"peer engagement", "social_interaction"},
                  {"physical activity", "exercise_minutes"},
                  {"exercise", "exercise_minutes"},
                  {"mindfulness", "mindfulness_minutes"},
                  {"mindfulness practice", "mindfulness_minutes"},
                  {"age", "age"}}}};
}

std::vector<LitRecord> synth_documents(const std::string& term, int retmax) {
    // deterministic in the query: every caller reproduces the same corpus
    Rng rng(derive_seed(0xd0c5, term));
    std::vector<std::string> words;
    {
        std::istringstream in(term);
        std::string tok;
        while (in >> tok)
            if (tok != "AND") words.push_back(tok);
    }
    std::string intervention = words.size() > 0 ? words[0] : "intervention";
    std::string outcome = words.size() > 1 ? words[1] : "outcome";
    std::vector<std::string> context(words.begin() + std::min<size_t>(2, words.size()),
                                     words.end());

    static const char* kinds[] = {"Journal Article",          "Meta-Analysis",
                                  "Randomized Controlled Trial", "Systematic Review",
                                  "Cohort Studies",           "Cross-Sectional Studies",
                                  "Case Reports"};
    static const char* fillers[] = {"college students", "young adults", "undergraduates",
                                    "a university cohort", "first-year students"};

    int count = 5 + static_cast<int>(rng.uniform_index(7));  // 5..11
    count = std::min(count, retmax);
    std::vector<LitRecord> out;
    for (int i = 0; i < count; ++i) {
        LitRecord r;
        r.doc_id = "PM" + short_hash(term + "#" + std::to_string(i)).substr(0, 8);
        const char* pop = fillers[rng.uniform_index(5)];
        std::ostringstream title;
        switch (rng.uniform_index(3)) {
            case 0: title << "Effects of " << intervention << " on " << outcome << " among " << pop; break;
            case 1: title << intervention << " and " << outcome << ": evidence from " << pop; break;
            default: title << "Association between " << intervention << " and " << outcome; break;
        }
        r.title = title.str();
        std::ostringstream abs;
        abs << "We examined whether " << intervention << " changes " << outcome << " in "
            << pop << ".";
        for (const auto& c : context)
            if (rng.uniform() < 0.6) abs << " Participants reported " << c << ".";
        abs << " Results suggest " << intervention
            << (rng.uniform() < 0.7 ? " is linked to " : " has limited impact on ") << outcome
            << ".";
        r.abstract_text = abs.str();
        r.year = 2026 - static_cast<int>(rng.uniform_index(16));
        r.publication_types = {"Journal Article"};
        if (rng.uniform() < 0.75)
            r.publication_types.push_back(kinds[1 + rng.uniform_index(6)]);
        out.push_back(std::move(r));
    }
    return out;
}

json synth_claims_response(const json& claim_request) {
    Rng rng(derive_seed(0xc1a1, claim_request.dump()));
    std::string intervention = claim_request.at("hypothesis").at("intervention");
    std::string outcome = claim_request.at("hypothesis").at("outcome");

    static const char* relations[] = {"improves", "increases", "decreases", "associates",
                                      "worsens", "mediates", "no-effect"};
    static const char* evidence[] = {"rct", "cohort", "meta-analysis", "cross-sectional",
                                     "unknown"};
    static const char* externals[] = {"peer mentoring program", "campus green space",
                                      "robotic tutoring", "gut microbiome"};

    json claims = json::array();
    int count = 1 + static_cast<int>(rng.uniform_index(3));  // 1..3
    for (int i = 0; i < count; ++i) {
        std::string subject = intervention;
        std::string object = outcome;
        double roll = rng.uniform();
        if (roll < 0.12) subject = externals[rng.uniform_index(4)];
        else if (roll < 0.2) object = externals[rng.uniform_index(4)];
        std::string relation = relations[rng.uniform_index(7)];
        double confidence = 0.35 + 0.6 * rng.uniform();
        claims.push_back({{"subject", subject},
                          {"relation", relation},
                          {"object", object},
                          {"evidence_type", evidence[rng.uniform_index(5)]},
                          {"confidence", confidence},
                          {"context", "reported in " + claim_request.at("doc_id").get<std::string>()},
                          {"recommendation", "consider " + subject + " support"}});
    }
    if (rng.uniform() < 0.1) {
        // schema violation (subject == object); the extractor must drop it
        claims.push_back({{"subject", outcome},
                          {"relation", "associates"},
                          {"object", outcome},
                          {"evidence_type", "unknown"},
                          {"confidence", 0.5},
                          {"context", ""},
                          {"recommendation", ""}});
    }
    return json{{"claims", claims}};
}

PipelineConfig write_golden_workspace(const std::string& dir, uint64_t pipeline_seed) {
    GeneratorSpec spec;
    fs::create_directories(fs::path(dir) / "data");
    fs::create_directories(fs::path(dir) / "config");
    fs::create_directories(fs::path(dir) / "fixtures");

    csv::write_file((fs::path(dir) / "data" / "population.csv").string(),
                    generate_dataset(spec));
    csv::write_file((fs::path(dir) / "data" / "new_states.csv").string(),
                    generate_new_states(spec));
    {
        std::ofstream out((fs::path(dir) / "config" / "sp_defs.json").string(),
                          std::ios::binary);
        out << sp_definitions_to_json(sp_definitions()).dump(2) << "\n";
    }
    {
        std::ofstream out((fs::path(dir) / "config" / "aliases.json").string(),
                          std::ios::binary);
        out << aliases_json().dump(2) << "\n";
    }

    // config.json carries workspace-relative paths; loading resolves them
    // against the config file's directory
    PipelineConfig rel;
    rel.seed = pipeline_seed;
    rel.dataset_path = "data/population.csv";
    rel.schema = dataset_schema();
    rel.sp_definitions_path = "config/sp_defs.json";
    rel.aliases_path = "config/aliases.json";
    rel.fixtures_dir = "fixtures";
    rel.backend_mode = "fixture";
    rel.output_dir = "out";
    rel.doc_limit = 8;
    rel.hypothesis.max_hypotheses = 6;
    rel.notears.inner_max_iter = 250;
    // thresholds tuned to this corpus's embedding geometry (rescaled cosines
    // concentrate above 0.5)
    rel.online.tau_match = 0.93;
    rel.online.tau_anom = 0.88;

    {
        std::ofstream out((fs::path(dir) / "config.json").string(), std::ios::binary);
        out << rel.to_json().dump(2) << "\n";
    }
    PipelineConfig cfg = PipelineConfig::from_json(rel.to_json(), dir);

    // fixture fixpoint: scratch runs record backend misses; respond to them
    // until a run completes with no miss
    std::string fixtures = cfg.fixtures_dir;
    for (int round = 0; round < 4; ++round) {
        PipelineConfig scratch_cfg = cfg;
        scratch_cfg.output_dir = (fs::path(dir) / ("genwork" + std::to_string(round))).string();
        Pipeline p(scratch_cfg);
        std::vector<std::pair<std::string, int>> searches;
        std::vector<json> claim_reqs;
        p.on_search_miss = [&](const std::string& term, int retmax) {
            searches.push_back({term, retmax});
        };
        p.on_llm_miss = [&](const json& req) { claim_reqs.push_back(req); };
        p.run(false);
        p.match_states((fs::path(dir) / "data" / "new_states.csv").string());

        fs::remove_all(scratch_cfg.output_dir);
        if (searches.empty() && claim_reqs.empty()) break;

        for (const auto& [term, retmax] : searches) {
            auto records = synth_documents(term, retmax);
            std::vector<std::string> ids;
            for (const auto& r : records) ids.push_back(r.doc_id);
            LiteratureClient::write_esearch_fixture(fixtures, term, retmax, ids);
            LiteratureClient::write_efetch_fixture(fixtures, ids, records);
        }
        for (const auto& req : claim_reqs)
            FixtureLlmBackend::write_fixture(fixtures, req, synth_claims_response(req));
    }
    return cfg;
}

}  // namespace phenokg::synth
