#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "phenokg/backend.hpp"
#include "phenokg/causal.hpp"
#include "phenokg/common.hpp"
#include "phenokg/evidence.hpp"
#include "phenokg/hypothesis.hpp"
#include "phenokg/ingest.hpp"
#include "phenokg/online.hpp"
#include "phenokg/phenotype.hpp"

namespace phenokg {

// Everything a run needs, loaded from one JSON file. Weight-group sums and
// threshold ordering are validated up front; a violation rejects the run
// naming the offending key.
struct PipelineConfig {
    uint64_t seed = 0;

    std::string dataset_path;
    std::vector<FeatureDef> schema;
    double corr_threshold = 0.2;

    int encoder_h = 32;
    int encoder_rounds = 2;

    ClusterConfig cluster;

    std::string sp_definitions_path;
    double sp_temperature = 0.5;

    NotearsConfig notears;
    int bn_bins = 3;
    int bn_parent_cap = 4;

    HypothesisConfig hypothesis;
    NPSWeights nps_weights;

    ScoreWeights scores;
    int doc_limit = 10;
    std::string aliases_path;

    // backends: "fixture" replays canned wire-format files from fixtures_dir;
    // "http" talks to llm_url / literature_url with an on-disk cache
    std::string backend_mode = "fixture";
    std::string fixtures_dir;
    std::string llm_url;
    std::string literature_url;
    std::string cache_dir;

    OnlineConfig online;

    std::string output_dir = "out";

    static PipelineConfig load(const std::string& path);
    static PipelineConfig from_json(const json& j, const std::string& base_dir = "");
    json to_json() const;
    void validate() const;
};

std::vector<StandardPhenotypeDef> load_sp_definitions(const std::string& path);
std::map<std::string, std::string> load_aliases(const std::string& path);

json sp_definitions_to_json(const std::vector<StandardPhenotypeDef>& defs);

}  // namespace phenokg
