#include "phenokg/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "phenokg/csv.hpp"

namespace phenokg {

std::string to_string(FeatureKind kind) {
    switch (kind) {
        case FeatureKind::Numeric: return "numeric";
        case FeatureKind::Categorical: return "categorical";
        case FeatureKind::TextIgnored: return "text-ignored";
    }
    return "numeric";
}

FeatureKind feature_kind_from_string(const std::string& s) {
    if (s == "numeric") return FeatureKind::Numeric;
    if (s == "categorical") return FeatureKind::Categorical;
    if (s == "text-ignored" || s == "text") return FeatureKind::TextIgnored;
    throw ConfigError("unknown feature kind: " + s);
}

namespace {

bool parse_numeric(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    if (end == s.c_str()) return false;
    while (*end == ' ' || *end == '\t') ++end;
    return *end == '\0' && std::isfinite(out);
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

}  // namespace

Dataset parse_dataset(const std::string& csv_text, const std::vector<FeatureDef>& schema) {
    if (schema.empty()) throw ConfigError("empty schema");
    {
        std::set<std::string> names;
        size_t usable = 0;
        for (const auto& fd : schema) {
            if (!names.insert(fd.name).second)
                throw ConfigError("duplicate feature name in schema: " + fd.name);
            if (fd.kind != FeatureKind::TextIgnored) ++usable;
        }
        if (usable < 2)
            throw ConfigError("schema needs at least 2 numeric/categorical features");
    }

    csv::Table table = csv::parse(csv_text);
    std::vector<int> col_of_feature(schema.size());
    for (size_t i = 0; i < schema.size(); ++i) {
        int idx = table.column_index(schema[i].name);
        if (idx < 0) throw MissingColumn("column not in file: " + schema[i].name);
        col_of_feature[i] = idx;
    }
    if (table.rows.empty()) throw EmptyDataset("no data rows");

    Dataset ds;
    ds.schema = schema;
    ds.records.reserve(table.rows.size());
    for (size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        RawRecord rec;
        rec.cells.resize(schema.size());
        for (size_t i = 0; i < schema.size(); ++i) {
            size_t c = static_cast<size_t>(col_of_feature[i]);
            std::string cell = c < row.size() ? trim(row[c]) : "";
            if (schema[i].kind == FeatureKind::Numeric && !cell.empty()) {
                double v;
                if (!parse_numeric(cell, v)) throw TypeMismatch(r, schema[i].name, cell);
            }
            rec.cells[i] = std::move(cell);
        }
        ds.records.push_back(std::move(rec));
    }
    return ds;
}

Dataset load_dataset(const std::string& path, const std::vector<FeatureDef>& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_dataset(buf.str(), schema);
}

int LabelEncoder::encode(const std::string& value) const {
    auto it = codes.find(value);
    return it == codes.end() ? -1 : it->second;
}

std::string LabelEncoder::decode(int code) const {
    for (const auto& [value, c] : codes) {
        if (c == code) return value;
    }
    throw Error("label code out of range: " + std::to_string(code));
}

int EncodedMatrix::column_index(const std::string& name) const {
    for (size_t i = 0; i < column_names.size(); ++i) {
        if (column_names[i] == name) return static_cast<int>(i);
    }
    return -1;
}

EncodedMatrix encode(const Dataset& ds, WarningLog* warnings) {
    if (ds.records.empty()) throw EmptyDataset("cannot encode an empty dataset");

    // columns that participate in the numeric pipeline
    std::vector<size_t> active;
    for (size_t i = 0; i < ds.schema.size(); ++i) {
        if (ds.schema[i].kind != FeatureKind::TextIgnored) active.push_back(i);
    }

    // drop rows with a missing value in any retained (non-text) feature
    std::vector<size_t> kept_rows;
    for (size_t r = 0; r < ds.records.size(); ++r) {
        bool complete = true;
        for (size_t i : active) {
            if (ds.records[r].cells[i].empty()) {
                complete = false;
                break;
            }
        }
        if (complete) kept_rows.push_back(r);
    }
    size_t dropped = ds.records.size() - kept_rows.size();
    if (warnings && dropped > 0)
        warnings->warn("dropped " + std::to_string(dropped) + " rows with missing values");
    if (kept_rows.empty()) throw EmptyDataset("all rows have missing values");

    EncodedMatrix out;
    out.rows_dropped_missing = dropped;
    size_t n = kept_rows.size();

    // first pass: raw numeric values (categoricals -> lexicographic codes)
    std::vector<Vector> raw_cols;
    std::vector<size_t> raw_schema_idx;
    for (size_t i : active) {
        const FeatureDef& fd = ds.schema[i];
        Vector col(n);
        LabelEncoder enc;
        if (fd.kind == FeatureKind::Categorical) {
            std::set<std::string> distinct;
            for (size_t r : kept_rows) distinct.insert(ds.records[r].cells[i]);
            int code = 0;
            for (const auto& v : distinct) enc.codes[v] = code++;
            for (size_t k = 0; k < n; ++k)
                col[k] = enc.codes.at(ds.records[kept_rows[k]].cells[i]);
        } else {
            for (size_t k = 0; k < n; ++k) {
                double v;
                const std::string& cell = ds.records[kept_rows[k]].cells[i];
                if (!parse_numeric(cell, v)) throw TypeMismatch(kept_rows[k], fd.name, cell);
                col[k] = v;
            }
        }

        double mean = col.mean();
        double var = (col.array() - mean).square().sum() / static_cast<double>(n);
        double sd = std::sqrt(var);
        if (sd <= 0.0) {
            out.dropped_columns.push_back(fd.name);
            if (warnings)
                warnings->warn("dropped constant column '" + fd.name + "'");
            continue;
        }
        out.column_names.push_back(fd.name);
        out.column_kinds.push_back(fd.kind);
        out.encoders.push_back(std::move(enc));
        out.means.push_back(mean);
        out.sds.push_back(sd);
        raw_cols.push_back((col.array() - mean) / sd);
        raw_schema_idx.push_back(i);
    }

    if (out.column_names.size() < 2)
        throw EmptyDataset("fewer than 2 usable columns after dropping constants");

    out.values.resize(n, raw_cols.size());
    for (size_t c = 0; c < raw_cols.size(); ++c) out.values.col(c) = raw_cols[c];
    return out;
}

Vector EncodedMatrix::encode_row(const std::vector<FeatureDef>& schema,
                                 const RawRecord& rec) const {
    Vector out(column_names.size());
    for (size_t c = 0; c < column_names.size(); ++c) {
        int si = -1;
        for (size_t i = 0; i < schema.size(); ++i) {
            if (schema[i].name == column_names[c]) {
                si = static_cast<int>(i);
                break;
            }
        }
        if (si < 0) throw MissingColumn("feature missing from schema: " + column_names[c]);
        const std::string& cell = rec.cells[static_cast<size_t>(si)];
        if (cell.empty()) throw Error("missing value for feature: " + column_names[c]);
        double v;
        if (column_kinds[c] == FeatureKind::Categorical) {
            int code = encoders[c].encode(cell);
            if (code < 0) throw Error("unseen categorical value '" + cell + "' for " + column_names[c]);
            v = code;
        } else {
            if (!parse_numeric(cell, v)) throw TypeMismatch(0, column_names[c], cell);
        }
        out[c] = (v - means[c]) / sds[c];
    }
    return out;
}

double spearman(const Vector& a, const Vector& b) {
    const auto n = a.size();
    if (n != b.size() || n < 2) throw DimensionMismatch("spearman needs equal-length vectors");
    auto ranks = [n](const Vector& v) {
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int x, int y) { return v[x] < v[y]; });
        Vector r(n);
        Eigen::Index i = 0;
        while (i < n) {
            Eigen::Index j = i;
            while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
            double avg = 0.5 * static_cast<double>(i + j) + 1.0;  // average rank, 1-based
            for (Eigen::Index k = i; k <= j; ++k) r[order[k]] = avg;
            i = j + 1;
        }
        return r;
    };
    Vector ra = ranks(a), rb = ranks(b);
    double ma = ra.mean(), mb = rb.mean();
    Vector da = ra.array() - ma, db = rb.array() - mb;
    double denom = std::sqrt(da.squaredNorm() * db.squaredNorm());
    if (denom == 0.0) return 0.0;
    return da.dot(db) / denom;
}

EdgeTemplate build_edge_template(const EncodedMatrix& m, double corr_threshold) {
    if (m.n() < 3) throw Error("edge template needs at least 3 rows");
    EdgeTemplate t;
    t.corr_threshold = corr_threshold;
    int f = static_cast<int>(m.f());
    for (int i = 0; i < f; ++i) {
        for (int j = i + 1; j < f; ++j) {
            double rho = spearman(m.values.col(i), m.values.col(j));
            if (std::abs(rho) >= corr_threshold)
                t.pairs.push_back({i, j, std::abs(rho)});
        }
    }
    if (t.pairs.empty()) {
        // chain over column order keeps every state graph connected
        t.chain_fallback = true;
        for (int i = 0; i + 1 < f; ++i) t.pairs.push_back({i, i + 1, 1.0});
    }
    return t;
}

StateGraph build_state_graph(const EncodedMatrix& m, const EdgeTemplate& t, int state_id) {
    const int f = static_cast<int>(m.f());
    StateGraph g;
    g.state_id = state_id;
    g.nodes = m.column_names;
    g.edges = t.pairs;
    // column 0: standardized value; diagonal block: feature identity
    // modulated by the value (1 + x_i). A plain one-hot block would make the
    // mean-pooled readout of a linear encoder depend on x only through a
    // single weighted average; the modulation keeps the readout full-rank
    // in the feature vector.
    g.node_features = Matrix::Zero(f, 1 + f);
    for (int i = 0; i < f; ++i) {
        g.node_features(i, 0) = m.values(state_id, i);
        g.node_features(i, 1 + i) = 1.0 + m.values(state_id, i);
    }
    return g;
}

std::vector<StateGraph> build_state_graphs(const EncodedMatrix& m, const EdgeTemplate& t) {
    std::vector<StateGraph> out;
    out.reserve(m.n());
    for (size_t r = 0; r < m.n(); ++r)
        out.push_back(build_state_graph(m, t, static_cast<int>(r)));
    return out;
}

}  // namespace phenokg
