#pragma once

#include <map>
#include <string>
#include <vector>

#include "phenokg/backend.hpp"
#include "phenokg/causal.hpp"
#include "phenokg/common.hpp"
#include "phenokg/hypothesis.hpp"
#include "phenokg/phenotype.hpp"
#include "phenokg/probnet.hpp"
#include "phenokg/text.hpp"

namespace phenokg {

enum class StudyType {
    MetaAnalysis,
    SystematicReview,
    Rct,
    Cohort,
    CrossSectional,
    CaseReport,
    Unknown
};

std::string to_string(StudyType t);
StudyType study_type_from_string(const std::string& s);
StudyType study_type_from_publication_types(const std::vector<std::string>& types);

struct Document {
    std::string doc_id;
    std::string title;
    std::string abstract_text;
    int year = 0;
    StudyType study_type = StudyType::Unknown;
    double match_score = 0.0;
    bool retained = false;  // match_score >= tau_d
};

// controlled relation vocabulary
bool is_valid_relation(const std::string& relation);

struct ClaimMeta {
    std::string evidence_type;
    double confidence = 0.0;
    std::string context;
    std::string recommendation;
};

struct Claim {
    std::string claim_id;
    std::string hypothesis_id;
    std::string doc_id;
    std::string subject_text;
    int subject_feature = -1;  // -1 = unlinked (external entity)
    std::string relation;
    std::string object_text;
    int object_feature = -1;
    ClaimMeta meta;
};

struct ScoredClaim {
    Claim claim;
    double relevance = 0.0;   // R
    double validation = 0.0;  // Y
    double nps = 0.0;         // NPS of the parent hypothesis
};

struct ScoreWeights {
    double alpha1 = 0.7, alpha2 = 0.3;              // document match
    double omega1 = 0.4, omega2 = 0.3, omega3 = 0.3;  // relevance
    double beta1 = 0.6, beta2 = 0.4;                // validation
    double tau_d = 0.35;
    double tau_c = 0.4;
    double recency_half_life_years = 5.0;
    int lit_cap = 50;    // N_cap
    int now_year = 2026; // pinned for deterministic recency
    std::map<StudyType, double> evidence_weight = {
        {StudyType::MetaAnalysis, 1.0}, {StudyType::SystematicReview, 0.9},
        {StudyType::Rct, 0.85},         {StudyType::Cohort, 0.6},
        {StudyType::CrossSectional, 0.5}, {StudyType::CaseReport, 0.3},
        {StudyType::Unknown, 0.4}};

    void validate() const;
};

struct RetrievalResult {
    std::vector<Document> docs;   // in retrieval order, match scores unset
    double lit_support = 0.0;     // min(1, |D| / N_cap)
    size_t parse_skipped = 0;
};

// esearch + efetch through the client; EmptyResult is a valid outcome with
// lit_support 0.
RetrievalResult retrieve(const Hypothesis& h, LiteratureClient& client, int limit,
                         const ScoreWeights& w);

// M = alpha1 * f_rel + alpha2 * f_rec; f_rel is TF-IDF cosine of the
// document text vs the rendered hypothesis, f_rec = exp(-age / half_life).
double match_score(const Document& d, const Hypothesis& h, const ScoreWeights& w,
                   const TfIdf& sim);

// Builds the per-hypothesis TF-IDF space (documents + hypothesis text),
// fills match scores and retained flags in place.
TfIdf score_documents(std::vector<Document>& docs, const Hypothesis& h,
                      const ScoreWeights& w);

// Alias dictionary then fuzzy token match (edit similarity >= 0.85).
class EntityLinker {
  public:
    EntityLinker(std::vector<std::string> feature_names,
                 std::map<std::string, std::string> aliases);

    // feature index or -1
    int link(const std::string& text) const;
    const std::vector<std::string>& feature_names() const { return feature_names_; }

  private:
    std::vector<std::string> feature_names_;
    std::map<std::string, std::string> aliases_;  // normalized alias -> feature name
};

json claim_request(const Document& d, const Hypothesis& h, const PhenotypeState& ps);

struct ExtractionStats {
    size_t dropped_schema = 0;
    size_t backend_misses = 0;
};

std::vector<Claim> extract_claims(const Document& d, const Hypothesis& h,
                                  const PhenotypeState& ps, LlmBackend& backend,
                                  const EntityLinker& linker, ExtractionStats* stats = nullptr,
                                  WarningLog* warnings = nullptr);

// R = omega1 * f_LLM + omega2 * f_pop + omega3 * f_ev
double relevance(const Claim& c, const Document& d, const PhenotypeState& ps,
                 const ScoreWeights& w);

// Y = beta1 * f_causal + beta2 * f_BN; unlinked entities and
// direction-reversed claims score 0 on f_causal.
double validation(const Claim& c, const CausalGraph& cg, const BayesNet& bn,
                  const ScoreWeights& w);

}  // namespace phenokg
