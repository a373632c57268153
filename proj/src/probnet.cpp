#include "phenokg/probnet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace phenokg {

Discretization Discretization::fit(const Matrix& x, const std::vector<FeatureKind>& kinds,
                                   int bins) {
    if (bins < 2) throw ConfigError("discretization needs at least 2 bins");
    const auto n = x.rows();
    const auto f = x.cols();
    if (static_cast<Eigen::Index>(kinds.size()) != f)
        throw DimensionMismatch("kinds size != columns");

    Discretization d;
    d.features.resize(f);
    for (Eigen::Index c = 0; c < f; ++c) {
        std::vector<double> vals(x.col(c).data(), x.col(c).data() + n);
        std::sort(vals.begin(), vals.end());
        FeatureBins fb;
        fb.categorical = kinds[c] == FeatureKind::Categorical;
        if (fb.categorical) {
            // one bin per distinct (standardized) code; cut midway between
            vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
            for (size_t k = 0; k + 1 < vals.size(); ++k)
                fb.edges.push_back(0.5 * (vals[k] + vals[k + 1]));
        } else {
            for (int b = 1; b < bins; ++b) {
                size_t idx = static_cast<size_t>(
                    std::floor(static_cast<double>(b) / bins * (n - 1)));
                fb.edges.push_back(vals[idx]);
            }
            fb.edges.erase(std::unique(fb.edges.begin(), fb.edges.end()), fb.edges.end());
            // a quantile edge equal to the max would leave an empty top bin
            while (!fb.edges.empty() && fb.edges.back() >= vals.back())
                fb.edges.pop_back();
        }
        fb.cardinality = static_cast<int>(fb.edges.size()) + 1;
        d.features[c] = std::move(fb);
    }
    return d;
}

int Discretization::bin(int feature, double value) const {
    const auto& fb = features.at(feature);
    int b = 0;
    while (b < static_cast<int>(fb.edges.size()) && value > fb.edges[b]) ++b;
    return b;
}

Eigen::MatrixXi Discretization::apply(const Matrix& x) const {
    Eigen::MatrixXi out(x.rows(), x.cols());
    for (Eigen::Index r = 0; r < x.rows(); ++r)
        for (Eigen::Index c = 0; c < x.cols(); ++c)
            out(r, c) = bin(static_cast<int>(c), x(r, c));
    return out;
}

int BayesNet::parent_config_count(int node) const {
    int count = 1;
    for (int p : parents[node]) count *= card[p];
    return count;
}

int BayesNet::parent_config_index(int node, const std::vector<int>& assignment) const {
    int idx = 0;
    int stride = 1;
    for (int p : parents[node]) {
        idx += assignment[p] * stride;
        stride *= card[p];
    }
    return idx;
}

BayesNet fit_bn(const Matrix& x, const CausalGraph& dag, const Discretization& disc,
                int parent_cap, double laplace_alpha) {
    const int f = static_cast<int>(x.cols());
    if (dag.f() != f) throw DimensionMismatch("dag size != columns");
    if (topological_order(dag.w).empty()) throw Error("fit_bn requires an acyclic graph");

    BayesNet bn;
    bn.cluster_id = dag.cluster_id;
    bn.feature_names = dag.feature_names;
    bn.disc = disc;
    bn.card.resize(f);
    bn.parents.resize(f);
    for (int j = 0; j < f; ++j) {
        bn.card[j] = disc.cardinality(j);
        std::vector<int> pa;
        for (int i = 0; i < f; ++i)
            if (dag.w(i, j) != 0.0) pa.push_back(i);
        if (static_cast<int>(pa.size()) > parent_cap) {
            std::sort(pa.begin(), pa.end(), [&](int a, int b) {
                double wa = std::abs(dag.w(a, j)), wb = std::abs(dag.w(b, j));
                if (wa != wb) return wa > wb;
                return a < b;
            });
            pa.resize(parent_cap);
        }
        std::sort(pa.begin(), pa.end());
        bn.parents[j] = std::move(pa);
    }

    Eigen::MatrixXi bins = disc.apply(x);
    const auto n = x.rows();
    bn.cpt.resize(f);
    for (int j = 0; j < f; ++j) {
        int configs = bn.parent_config_count(j);
        Matrix counts = Matrix::Constant(bn.card[j], configs, laplace_alpha);
        std::vector<int> assignment(f, 0);
        for (Eigen::Index r = 0; r < n; ++r) {
            for (int p : bn.parents[j]) assignment[p] = bins(r, p);
            counts(bins(r, j), bn.parent_config_index(j, assignment)) += 1.0;
        }
        for (int cfg = 0; cfg < configs; ++cfg) counts.col(cfg) /= counts.col(cfg).sum();
        bn.cpt[j] = std::move(counts);
    }
    return bn;
}

namespace {

// Dense factor over a variable scope; table in mixed radix with vars[0]
// least significant.
struct Factor {
    std::vector<int> vars;
    std::vector<int> cards;
    Vector table;

    int index_of(const std::vector<int>& full_assignment) const {
        int idx = 0, stride = 1;
        for (size_t k = 0; k < vars.size(); ++k) {
            idx += full_assignment[vars[k]] * stride;
            stride *= cards[k];
        }
        return idx;
    }
};

Factor multiply(const Factor& a, const Factor& b, int n_vars) {
    Factor out;
    out.vars = a.vars;
    out.cards = a.cards;
    for (size_t k = 0; k < b.vars.size(); ++k) {
        if (std::find(out.vars.begin(), out.vars.end(), b.vars[k]) == out.vars.end()) {
            out.vars.push_back(b.vars[k]);
            out.cards.push_back(b.cards[k]);
        }
    }
    size_t total = 1;
    for (int c : out.cards) total *= static_cast<size_t>(c);
    out.table.resize(total);

    std::vector<int> assign(out.vars.size(), 0);
    std::vector<int> full(n_vars, 0);
    for (size_t idx = 0; idx < total; ++idx) {
        for (size_t k = 0; k < out.vars.size(); ++k) full[out.vars[k]] = assign[k];
        out.table[idx] = a.table[a.index_of(full)] * b.table[b.index_of(full)];
        for (size_t k = 0; k < assign.size(); ++k) {
            if (++assign[k] < out.cards[k]) break;
            assign[k] = 0;
        }
    }
    return out;
}

Factor sum_out(const Factor& f, int var) {
    auto pos = std::find(f.vars.begin(), f.vars.end(), var);
    if (pos == f.vars.end()) return f;
    size_t vi = static_cast<size_t>(pos - f.vars.begin());

    Factor out;
    for (size_t k = 0; k < f.vars.size(); ++k) {
        if (k == vi) continue;
        out.vars.push_back(f.vars[k]);
        out.cards.push_back(f.cards[k]);
    }
    size_t total = 1;
    for (int c : out.cards) total *= static_cast<size_t>(c);
    out.table = Vector::Zero(total);

    std::vector<int> assign(f.vars.size(), 0);
    for (Eigen::Index idx = 0; idx < f.table.size(); ++idx) {
        size_t oidx = 0, stride = 1;
        for (size_t k = 0; k < f.vars.size(); ++k) {
            if (k == vi) continue;
            oidx += static_cast<size_t>(assign[k]) * stride;
            stride *= static_cast<size_t>(f.cards[k]);
        }
        out.table[oidx] += f.table[idx];
        for (size_t k = 0; k < assign.size(); ++k) {
            if (++assign[k] < f.cards[k]) break;
            assign[k] = 0;
        }
    }
    return out;
}

// Restrict a factor to evidence values (drops the evidence vars).
Factor reduce(const Factor& f, const std::map<int, int>& evidence, int n_vars) {
    bool any = false;
    for (int v : f.vars)
        if (evidence.count(v)) any = true;
    if (!any) return f;

    Factor out;
    for (size_t k = 0; k < f.vars.size(); ++k) {
        if (evidence.count(f.vars[k])) continue;
        out.vars.push_back(f.vars[k]);
        out.cards.push_back(f.cards[k]);
    }
    size_t total = 1;
    for (int c : out.cards) total *= static_cast<size_t>(c);
    out.table.resize(total);

    std::vector<int> assign(out.vars.size(), 0);
    std::vector<int> full(n_vars, 0);
    for (auto& [v, b] : evidence) full[v] = b;
    for (size_t idx = 0; idx < total; ++idx) {
        for (size_t k = 0; k < out.vars.size(); ++k) full[out.vars[k]] = assign[k];
        out.table[idx] = f.table[f.index_of(full)];
        for (size_t k = 0; k < assign.size(); ++k) {
            if (++assign[k] < out.cards[k]) break;
            assign[k] = 0;
        }
    }
    return out;
}

}  // namespace

Vector posterior(const BayesNet& bn, const Query& q) {
    const int f = bn.f();
    if (q.target < 0 || q.target >= f) throw DimensionMismatch("posterior: bad target");
    if (q.evidence.count(q.target)) throw Error("posterior: target cannot be evidence");
    for (auto& [v, b] : q.evidence) {
        if (v < 0 || v >= f || b < 0 || b >= bn.card[v])
            throw DimensionMismatch("posterior: bad evidence");
    }

    std::vector<Factor> factors;
    for (int j = 0; j < f; ++j) {
        Factor fac;
        fac.vars.push_back(j);
        fac.cards.push_back(bn.card[j]);
        for (int p : bn.parents[j]) {
            fac.vars.push_back(p);
            fac.cards.push_back(bn.card[p]);
        }
        size_t total = 1;
        for (int c : fac.cards) total *= static_cast<size_t>(c);
        fac.table.resize(total);
        // node value is the least significant digit, then parents in order,
        // matching the CPT column layout
        for (size_t idx = 0; idx < total; ++idx) {
            int node_val = static_cast<int>(idx % bn.card[j]);
            int cfg = static_cast<int>(idx / bn.card[j]);
            fac.table[idx] = bn.cpt[j](node_val, cfg);
        }
        factors.push_back(reduce(fac, q.evidence, f));
    }

    // min-fill elimination order over non-target, non-evidence vars
    std::set<int> remaining;
    for (int v = 0; v < f; ++v)
        if (v != q.target && !q.evidence.count(v)) remaining.insert(v);

    while (!remaining.empty()) {
        std::map<int, std::set<int>> adj;
        for (const auto& fac : factors)
            for (int a : fac.vars)
                for (int b : fac.vars)
                    if (a != b) adj[a].insert(b);

        int best_var = -1;
        long best_fill = -1;
        for (int v : remaining) {
            const auto& nb = adj[v];
            long fill = 0;
            for (auto it1 = nb.begin(); it1 != nb.end(); ++it1)
                for (auto it2 = std::next(it1); it2 != nb.end(); ++it2)
                    if (!adj[*it1].count(*it2)) ++fill;
            if (best_var < 0 || fill < best_fill) {
                best_var = v;
                best_fill = fill;
            }
        }

        Factor product;
        product.table = Vector::Ones(1);
        std::vector<Factor> next;
        for (auto& fac : factors) {
            if (std::find(fac.vars.begin(), fac.vars.end(), best_var) != fac.vars.end())
                product = multiply(product, fac, f);
            else
                next.push_back(std::move(fac));
        }
        next.push_back(sum_out(product, best_var));
        factors = std::move(next);
        remaining.erase(best_var);
    }

    Factor result;
    result.table = Vector::Ones(1);
    for (auto& fac : factors) result = multiply(result, fac, f);

    if (result.vars != std::vector<int>{q.target})
        throw InconsistentEvidence("posterior did not reduce to the target scope");
    Vector dist = result.table;
    double z = dist.sum();
    if (z <= 0.0) throw InconsistentEvidence("zero-probability evidence");
    return dist / z;
}

std::vector<int> markov_blanket(const BayesNet& bn, int node) {
    std::set<int> mb;
    for (int p : bn.parents[node]) mb.insert(p);
    for (int j = 0; j < bn.f(); ++j) {
        const auto& pa = bn.parents[j];
        if (std::find(pa.begin(), pa.end(), node) != pa.end()) {
            mb.insert(j);  // child
            for (int cop : pa)
                if (cop != node) mb.insert(cop);  // co-parent
        }
    }
    mb.erase(node);
    return {mb.begin(), mb.end()};
}

double kl_divergence(const Vector& p, const Vector& q) {
    if (p.size() != q.size()) throw DimensionMismatch("kl: size mismatch");
    double kl = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        if (q[i] <= 0.0) throw InconsistentEvidence("kl: q has a zero where p > 0");
        kl += p[i] * std::log(p[i] / q[i]);
    }
    return std::max(kl, 0.0);
}

double mutual_information(const BayesNet& bn, int i, int ii) {
    if (i == ii) throw Error("influence requires distinct features");
    Vector pi = posterior(bn, Query{i, {}});
    Vector pii = posterior(bn, Query{ii, {}});
    double mi = 0.0;
    for (int x = 0; x < bn.card[i]; ++x) {
        Query q;
        q.target = ii;
        q.evidence[i] = x;
        Vector cond = posterior(bn, q);
        mi += pi[x] * kl_divergence(cond, pii);
    }
    return std::max(mi, 0.0);
}

double influence(const BayesNet& bn, int i, int ii) {
    if (bn.card[ii] < 2) return 0.0;  // nothing to explain
    double mi = mutual_information(bn, i, ii);
    double norm = std::log(static_cast<double>(bn.card[ii]));
    return std::min(1.0, mi / norm);
}

}  // namespace phenokg
