#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "phenokg/common.hpp"

namespace phenokg {

enum class FeatureKind { Numeric, Categorical, TextIgnored };

std::string to_string(FeatureKind kind);
FeatureKind feature_kind_from_string(const std::string& s);

struct FeatureDef {
    std::string name;
    FeatureKind kind = FeatureKind::Numeric;
    std::string unit;  // optional
};

struct RawRecord {
    // one cell per schema entry, in schema order; empty string = missing
    std::vector<std::string> cells;
};

// Tabular population data validated against a schema.
struct Dataset {
    std::vector<FeatureDef> schema;
    std::vector<RawRecord> records;

    size_t n() const { return records.size(); }
};

struct MissingColumn : Error {
    using Error::Error;
};
struct TypeMismatch : Error {
    TypeMismatch(size_t row, const std::string& col, const std::string& value)
        : Error("type mismatch at row " + std::to_string(row) + ", column '" + col +
                "': '" + value + "' is not numeric"),
          row(row),
          column(col) {}
    size_t row;
    std::string column;
};
struct EmptyDataset : Error {
    using Error::Error;
};

Dataset load_dataset(const std::string& path, const std::vector<FeatureDef>& schema);
Dataset parse_dataset(const std::string& csv_text, const std::vector<FeatureDef>& schema);

// Categorical label map: value -> code, codes assigned in lexicographic
// order of the distinct training values.
struct LabelEncoder {
    std::map<std::string, int> codes;

    int encode(const std::string& value) const;  // -1 if unseen
    std::string decode(int code) const;
};

// Standardized n x f matrix plus everything needed to replay the encoding
// on new rows (online path).
struct EncodedMatrix {
    Matrix values;                          // n x f, per-column mean 0 / sd 1
    std::vector<std::string> column_names;  // retained columns, schema order
    std::vector<FeatureKind> column_kinds;
    std::vector<LabelEncoder> encoders;     // one per retained column (empty for numeric)
    std::vector<double> means;              // training mean per retained column
    std::vector<double> sds;                // training sd (population) per column
    std::vector<std::string> dropped_columns;  // constant columns removed
    size_t rows_dropped_missing = 0;

    size_t n() const { return static_cast<size_t>(values.rows()); }
    size_t f() const { return static_cast<size_t>(values.cols()); }
    int column_index(const std::string& name) const;

    // Encode one raw record with the stored encoders (no refitting).
    // Throws TypeMismatch / Error on unseen categorical or missing cell.
    Vector encode_row(const std::vector<FeatureDef>& schema, const RawRecord& rec) const;
};

EncodedMatrix encode(const Dataset& ds, WarningLog* warnings = nullptr);

// Spearman rank correlation (average ranks for ties).
double spearman(const Vector& a, const Vector& b);

struct EdgePair {
    int i = 0;
    int j = 0;          // i < j
    double weight = 0;  // |rho| in [0,1]
};

// Global feature-feature edge set shared by all state graphs.
struct EdgeTemplate {
    std::vector<EdgePair> pairs;
    double corr_threshold = 0.2;
    bool chain_fallback = false;  // true when no pair passed the threshold
};

EdgeTemplate build_edge_template(const EncodedMatrix& m, double corr_threshold);

// Per-state feature-node graph. Nodes are the retained features; the edge
// set comes from the shared template; node features are
// [standardized value | value-modulated feature identity], so width is
// 1 + f. The diagonal block is (1 + x_i) rather than a plain one-hot so a
// linear encoder's mean-pooled readout keeps full rank in x.
struct StateGraph {
    int state_id = 0;
    std::vector<std::string> nodes;  // feature names, |X_t| = f
    std::vector<EdgePair> edges;
    Matrix node_features;  // f x (1 + f)
};

StateGraph build_state_graph(const EncodedMatrix& m, const EdgeTemplate& t, int state_id);
std::vector<StateGraph> build_state_graphs(const EncodedMatrix& m, const EdgeTemplate& t);

}  // namespace phenokg
