#pragma once

#include <cstdint>
#include <vector>

#include "phenokg/common.hpp"
#include "phenokg/ingest.hpp"

namespace phenokg {

// Deterministic SGC-style encoder: symmetric-normalized propagation followed
// by a seeded semi-orthogonal projection. No trained weights; a trained
// encoder can be swapped in behind encode_state.
struct EncoderParams {
    int h = 32;       // embedding dimension
    int rounds = 2;   // aggregation rounds
    uint64_t seed = 0;
    Matrix projection;  // (1 + f) x h

    // Draws a Gaussian matrix and orthonormalizes via QR. Columns are
    // orthonormal when h <= input_width, rows otherwise (h directions cannot
    // exceed the input width).
    static EncoderParams make(int input_width, int h, int rounds, uint64_t seed);
};

struct GraphEmbedding {
    int state_id = 0;
    Matrix node_embeddings;  // |X_t| x h
    Vector graph_vector;     // h, column mean of node_embeddings
};

// Z_t = A_hat^rounds * V_t * projection with A_hat = D^{-1/2}(A + I)D^{-1/2};
// graph vector is the mean-pooled readout.
GraphEmbedding encode_state(const StateGraph& g, const EncoderParams& p);
std::vector<GraphEmbedding> encode_corpus(const std::vector<StateGraph>& graphs,
                                          const EncoderParams& p);

// Normalized adjacency for a template graph on f nodes (shared across states).
Matrix normalized_adjacency(const std::vector<EdgePair>& edges, int f);

}  // namespace phenokg
