#include "phenokg/embed.hpp"

#include <Eigen/QR>
#include <cmath>

#include "phenokg/rng.hpp"

namespace phenokg {

EncoderParams EncoderParams::make(int input_width, int h, int rounds, uint64_t seed) {
    if (input_width <= 0 || h <= 0) throw ConfigError("encoder dimensions must be positive");
    EncoderParams p;
    p.h = h;
    p.rounds = rounds;
    p.seed = seed;
    Rng rng(derive_seed(seed, "encoder-projection"));
    // QR of the taller orientation gives the achievable semi-orthogonality
    if (h <= input_width) {
        Matrix g(input_width, h);
        for (int i = 0; i < input_width; ++i)
            for (int j = 0; j < h; ++j) g(i, j) = rng.normal();
        Eigen::HouseholderQR<Matrix> qr(g);
        Matrix q = qr.householderQ() * Matrix::Identity(input_width, h);
        p.projection = q;
    } else {
        Matrix g(h, input_width);
        for (int i = 0; i < h; ++i)
            for (int j = 0; j < input_width; ++j) g(i, j) = rng.normal();
        Eigen::HouseholderQR<Matrix> qr(g);
        Matrix q = qr.householderQ() * Matrix::Identity(h, input_width);
        p.projection = q.transpose();
    }
    return p;
}

Matrix normalized_adjacency(const std::vector<EdgePair>& edges, int f) {
    Matrix a = Matrix::Identity(f, f);  // self-loops
    for (const auto& e : edges) {
        a(e.i, e.j) += e.weight;
        a(e.j, e.i) += e.weight;
    }
    Vector deg = a.rowwise().sum();
    Vector dinv = deg.array().sqrt().inverse();
    return dinv.asDiagonal() * a * dinv.asDiagonal();
}

GraphEmbedding encode_state(const StateGraph& g, const EncoderParams& p) {
    const int f = static_cast<int>(g.nodes.size());
    if (g.node_features.cols() != p.projection.rows())
        throw DimensionMismatch("node feature width " + std::to_string(g.node_features.cols()) +
                                " != projection input width " +
                                std::to_string(p.projection.rows()));
    Matrix a_hat = normalized_adjacency(g.edges, f);
    Matrix v = g.node_features;
    for (int r = 0; r < p.rounds; ++r) v = a_hat * v;
    GraphEmbedding out;
    out.state_id = g.state_id;
    out.node_embeddings = v * p.projection;
    out.graph_vector = out.node_embeddings.colwise().mean();
    if (!out.graph_vector.allFinite()) throw NonFinite("non-finite embedding");
    return out;
}

std::vector<GraphEmbedding> encode_corpus(const std::vector<StateGraph>& graphs,
                                          const EncoderParams& p) {
    std::vector<GraphEmbedding> out;
    out.reserve(graphs.size());
    for (const auto& g : graphs) out.push_back(encode_state(g, p));
    return out;
}

}  // namespace phenokg
