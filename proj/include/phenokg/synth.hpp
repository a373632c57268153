#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "phenokg/backend.hpp"
#include "phenokg/config.hpp"
#include "phenokg/csv.hpp"

namespace phenokg::synth {

// Bundled synthetic population: 6 planted archetypes over a 16-feature
// student-wellbeing schema (one free-text column, two categoricals).
struct GeneratorSpec {
    int n_states = 1000;
    int n_new_states = 100;
    uint64_t data_seed = 0x5eed;
};

std::vector<FeatureDef> dataset_schema();
csv::Table generate_dataset(const GeneratorSpec& spec);
csv::Table generate_new_states(const GeneratorSpec& spec);

std::vector<StandardPhenotypeDef> sp_definitions();
json aliases_json();

// Deterministic canned backends: responses are pure functions of the
// request, so fixtures can be produced for any request a run makes.
std::vector<LitRecord> synth_documents(const std::string& term, int retmax);
json synth_claims_response(const json& claim_request);

// Writes a complete runnable workspace under `dir`:
//   data/population.csv, data/new_states.csv, config/{sp_defs,aliases}.json,
//   config.json, fixtures/ (all literature + claim fixtures a run needs).
// Fixture generation iterates scratch runs until no backend misses remain.
PipelineConfig write_golden_workspace(const std::string& dir, uint64_t pipeline_seed);

}  // namespace phenokg::synth
