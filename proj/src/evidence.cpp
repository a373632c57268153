#include "phenokg/evidence.hpp"

#include <algorithm>
#include <cmath>

namespace phenokg {

std::string to_string(StudyType t) {
    switch (t) {
        case StudyType::MetaAnalysis: return "meta-analysis";
        case StudyType::SystematicReview: return "systematic-review";
        case StudyType::Rct: return "rct";
        case StudyType::Cohort: return "cohort";
        case StudyType::CrossSectional: return "cross-sectional";
        case StudyType::CaseReport: return "case-report";
        case StudyType::Unknown: return "unknown";
    }
    return "unknown";
}

StudyType study_type_from_string(const std::string& s) {
    if (s == "meta-analysis") return StudyType::MetaAnalysis;
    if (s == "systematic-review") return StudyType::SystematicReview;
    if (s == "rct") return StudyType::Rct;
    if (s == "cohort") return StudyType::Cohort;
    if (s == "cross-sectional") return StudyType::CrossSectional;
    if (s == "case-report") return StudyType::CaseReport;
    return StudyType::Unknown;
}

StudyType study_type_from_publication_types(const std::vector<std::string>& types) {
    auto contains = [&](const char* needle) {
        for (const auto& t : types) {
            std::string low;
            for (char c : t) low.push_back(static_cast<char>(std::tolower((unsigned char)c)));
            if (low.find(needle) != std::string::npos) return true;
        }
        return false;
    };
    if (contains("meta-analysis")) return StudyType::MetaAnalysis;
    if (contains("systematic review")) return StudyType::SystematicReview;
    if (contains("randomized controlled trial")) return StudyType::Rct;
    if (contains("cohort") || contains("prospective") || contains("longitudinal") ||
        contains("observational"))
        return StudyType::Cohort;
    if (contains("cross-sectional")) return StudyType::CrossSectional;
    if (contains("case report")) return StudyType::CaseReport;
    return StudyType::Unknown;
}

bool is_valid_relation(const std::string& relation) {
    static const char* vocab[] = {"increases", "decreases", "improves", "worsens",
                                  "associates", "mediates", "no-effect"};
    for (const char* r : vocab)
        if (relation == r) return true;
    return false;
}

void ScoreWeights::validate() const {
    auto check_group = [](std::initializer_list<double> ws, const char* name) {
        double sum = 0.0;
        for (double w : ws) {
            if (w < 0) throw ConfigError(std::string(name) + ": weights must be nonnegative");
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw ConfigError(std::string(name) + ": weights must sum to 1 (got " +
                              std::to_string(sum) + ")");
    };
    check_group({alpha1, alpha2}, "alpha");
    check_group({omega1, omega2, omega3}, "omega");
    check_group({beta1, beta2}, "beta");
    if (tau_d < 0 || tau_d > 1) throw ConfigError("tau_d must be in [0,1]");
    if (tau_c < 0 || tau_c > 1) throw ConfigError("tau_c must be in [0,1]");
    if (recency_half_life_years <= 0) throw ConfigError("recency half-life must be positive");
    if (lit_cap <= 0) throw ConfigError("lit_cap must be positive");
    for (const auto& [type, w] : evidence_weight)
        if (w < 0 || w > 1) throw ConfigError("evidence weight out of [0,1]");
}

RetrievalResult retrieve(const Hypothesis& h, LiteratureClient& client, int limit,
                         const ScoreWeights& w) {
    RetrievalResult out;
    auto ids = client.search(h.query_term(), limit);
    EfetchStats stats;
    auto records = client.fetch(ids, &stats);
    out.parse_skipped = stats.skipped;
    for (const auto& r : records) {
        Document d;
        d.doc_id = r.doc_id;
        d.title = r.title;
        d.abstract_text = r.abstract_text;
        d.year = r.year;
        d.study_type = study_type_from_publication_types(r.publication_types);
        out.docs.push_back(std::move(d));
        if (static_cast<int>(out.docs.size()) >= limit) break;
    }
    out.lit_support =
        std::min(1.0, static_cast<double>(out.docs.size()) / static_cast<double>(w.lit_cap));
    return out;
}

double match_score(const Document& d, const Hypothesis& h, const ScoreWeights& w,
                   const TfIdf& sim) {
    if (d.title.empty() && d.abstract_text.empty())
        throw Error("match_score: document has neither title nor abstract");
    double f_rel = sim.cosine(d.title + " " + d.abstract_text, h.rendered_text());
    double age = std::max(0.0, static_cast<double>(w.now_year - d.year));
    double f_rec = std::exp(-age / w.recency_half_life_years);
    return w.alpha1 * f_rel + w.alpha2 * f_rec;
}

TfIdf score_documents(std::vector<Document>& docs, const Hypothesis& h,
                      const ScoreWeights& w) {
    std::vector<std::string> corpus;
    for (const auto& d : docs) corpus.push_back(d.title + " " + d.abstract_text);
    corpus.push_back(h.rendered_text());
    TfIdf sim = TfIdf::fit(corpus);
    for (auto& d : docs) {
        d.match_score = match_score(d, h, w, sim);
        d.retained = d.match_score >= w.tau_d;
    }
    return sim;
}

namespace {

std::string normalize_entity(const std::string& s) {
    std::string out;
    for (const auto& tok : tokenize(s)) {
        if (!out.empty()) out.push_back(' ');
        out += tok;
    }
    return out;
}

}  // namespace

EntityLinker::EntityLinker(std::vector<std::string> feature_names,
                           std::map<std::string, std::string> aliases)
    : feature_names_(std::move(feature_names)) {
    for (const auto& [alias, feature] : aliases)
        aliases_[normalize_entity(alias)] = feature;
}

int EntityLinker::link(const std::string& text) const {
    std::string norm = normalize_entity(text);
    if (norm.empty()) return -1;

    auto index_of = [&](const std::string& name) {
        for (size_t i = 0; i < feature_names_.size(); ++i)
            if (feature_names_[i] == name) return static_cast<int>(i);
        return -1;
    };

    if (auto it = aliases_.find(norm); it != aliases_.end()) return index_of(it->second);
    for (size_t i = 0; i < feature_names_.size(); ++i)
        if (normalize_entity(feature_names_[i]) == norm) return static_cast<int>(i);

    int best = -1;
    double best_sim = 0.0;
    for (size_t i = 0; i < feature_names_.size(); ++i) {
        double sim = edit_similarity(norm, normalize_entity(feature_names_[i]));
        if (sim > best_sim) {
            best_sim = sim;
            best = static_cast<int>(i);
        }
    }
    for (const auto& [alias, feature] : aliases_) {
        double sim = edit_similarity(norm, alias);
        if (sim > best_sim) {
            best_sim = sim;
            best = index_of(feature);
        }
    }
    return best_sim >= 0.85 ? best : -1;
}

json claim_request(const Document& d, const Hypothesis& h, const PhenotypeState& ps) {
    json req;
    req["task"] = "claims";
    req["doc_id"] = d.doc_id;
    req["title"] = d.title;
    req["abstract"] = d.abstract_text;
    req["hypothesis"] = {{"id", h.id},
                         {"population", h.population},
                         {"intervention", h.intervention},
                         {"comparison", h.comparison},
                         {"outcome", h.outcome}};
    req["population_context"] = ps.population_text;
    req["relations"] = {"increases", "decreases", "improves", "worsens",
                        "associates", "mediates", "no-effect"};
    return req;
}

std::vector<Claim> extract_claims(const Document& d, const Hypothesis& h,
                                  const PhenotypeState& ps, LlmBackend& backend,
                                  const EntityLinker& linker, ExtractionStats* stats,
                                  WarningLog* warnings) {
    std::vector<RawClaim> raw;
    try {
        raw = backend.claims(claim_request(d, h, ps));
    } catch (const BackendUnavailable& e) {
        if (stats) ++stats->backend_misses;
        if (warnings)
            warnings->warn("claim backend unavailable for doc " + d.doc_id + ": " + e.what());
        return {};
    }

    std::vector<Claim> out;
    int seq = 0;
    for (const auto& rc : raw) {
        bool bad = rc.subject.empty() || rc.object.empty() ||
                   normalize_entity(rc.subject) == normalize_entity(rc.object) ||
                   !is_valid_relation(rc.relation) || rc.confidence < 0.0 ||
                   rc.confidence > 1.0;
        if (bad) {
            if (stats) ++stats->dropped_schema;
            if (warnings)
                warnings->warn("claim dropped (schema violation) in doc " + d.doc_id + ": '" +
                               rc.subject + " " + rc.relation + " " + rc.object + "'");
            continue;
        }
        Claim c;
        c.claim_id = d.doc_id + "#" + std::to_string(seq++);
        c.hypothesis_id = h.id;
        c.doc_id = d.doc_id;
        c.subject_text = rc.subject;
        c.object_text = rc.object;
        c.relation = rc.relation;
        c.subject_feature = linker.link(rc.subject);
        c.object_feature = linker.link(rc.object);
        c.meta.evidence_type = rc.evidence_type;
        c.meta.confidence = rc.confidence;
        c.meta.context = rc.context;
        c.meta.recommendation = rc.recommendation;
        out.push_back(std::move(c));
    }
    return out;
}

double relevance(const Claim& c, const Document& d, const PhenotypeState& ps,
                 const ScoreWeights& w) {
    double f_llm = std::clamp(c.meta.confidence, 0.0, 1.0);
    std::set<std::string> ctx = token_set(ps.population_text);
    double f_pop = jaccard(token_set(d.title + " " + d.abstract_text), ctx);
    auto it = w.evidence_weight.find(d.study_type);
    double f_ev = it == w.evidence_weight.end() ? 0.4 : it->second;
    return w.omega1 * f_llm + w.omega2 * f_pop + w.omega3 * f_ev;
}

double validation(const Claim& c, const CausalGraph& cg, const BayesNet& bn,
                  const ScoreWeights& w) {
    if (c.subject_feature < 0 || c.object_feature < 0) return 0.0;
    // distinct entity texts can link to one feature; a self-relation has no
    // structural support
    if (c.subject_feature == c.object_feature) return 0.0;
    const int s = c.subject_feature;
    const int o = c.object_feature;

    double f_causal = 0.0;
    double w_max = cg.max_abs_weight();
    if (cg.has_edge(s, o)) {
        f_causal = w_max > 0 ? std::min(1.0, std::abs(cg.w(s, o)) / w_max) : 0.0;
    } else if (reverses_causal_edge(cg, s, o)) {
        f_causal = 0.0;
    } else if (w_max > 0) {
        f_causal = std::min(1.0, strongest_path(cg, s, o).strength / w_max);
    }

    auto mb = markov_blanket(bn, o);
    double f_bn;
    if (std::find(mb.begin(), mb.end(), s) != mb.end()) {
        f_bn = 1.0;
    } else {
        f_bn = influence(bn, s, o);
    }
    return w.beta1 * f_causal + w.beta2 * f_bn;
}

}  // namespace phenokg
