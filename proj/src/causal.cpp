#include "phenokg/causal.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <tuple>
#include <limits>

#include "phenokg/expm.hpp"

namespace phenokg {

void NotearsConfig::validate() const {
    if (lambda1 < 0 || h_tol <= 0 || rho_init <= 0 || rho_max <= 0 || edge_threshold < 0)
        throw ConfigError("notears: parameters must be positive");
    if (rho_mult <= 1.0) throw ConfigError("notears: rho_mult must exceed 1");
    if (inner_max_iter <= 0 || max_outer <= 0)
        throw ConfigError("notears: iteration caps must be positive");
}

double CausalGraph::max_abs_weight() const {
    double m = 0.0;
    for (const auto& e : edges) m = std::max(m, std::abs(e.weight));
    return m;
}

std::pair<double, Matrix> acyclicity(const Matrix& w) {
    if (w.rows() != w.cols()) throw DimensionMismatch("acyclicity requires a square matrix");
    const auto f = w.rows();
    Matrix e = expm(w.cwiseProduct(w));
    double value = e.trace() - static_cast<double>(f);
    Matrix grad = e.transpose().cwiseProduct(2.0 * w);
    return {value, grad};
}

Matrix standardize_columns(const Matrix& x) {
    Matrix out = x;
    const auto n = x.rows();
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        double mean = x.col(c).mean();
        double var = (x.col(c).array() - mean).square().sum() / static_cast<double>(n);
        if (var <= 1e-24)
            throw DegenerateInput("constant column " + std::to_string(c));
        out.col(c) = (x.col(c).array() - mean) / std::sqrt(var);
    }
    return out;
}

namespace {

// Smooth part of the augmented-Lagrangian subproblem on the (w+, w-) split.
// W = wp - wm with zero diagonal; the L1 term lambda * sum(wp + wm) is
// linear on the nonnegative orthant and folded into the gradient.
struct Subproblem {
    const Matrix& gram;  // X^T X / n
    double lambda1;
    double rho;
    double alpha;
    int f;

    // Returns +inf when the matrix exponential overflows so the line search
    // backs off instead of aborting.
    double value_grad(const Matrix& wp, const Matrix& wm, Matrix& gp, Matrix& gm) const {
        Matrix w = wp - wm;
        Matrix diff = w - Matrix::Identity(f, f);
        // 0.5/n ||X - XW||_F^2 = 0.5 tr((W-I)^T C (W-I)) with C = X^T X / n
        Matrix cd = gram * diff;
        double loss = 0.5 * (diff.transpose() * cd).trace();
        Matrix gloss = cd;  // C (W - I)

        double h;
        Matrix gh;
        try {
            std::tie(h, gh) = acyclicity(w);
        } catch (const NonFinite&) {
            return std::numeric_limits<double>::infinity();
        }
        double obj = loss + 0.5 * rho * h * h + alpha * h +
                     lambda1 * (wp.sum() + wm.sum());
        Matrix gw = gloss + (rho * h + alpha) * gh;
        gp = gw.array() + lambda1;
        gm = -gw.array() + lambda1;
        gp.diagonal().setZero();
        gm.diagonal().setZero();
        return obj;
    }
};

struct Flat {
    // (wp, wm) flattened into one vector for the L-BFGS recursion
    static Vector pack(const Matrix& wp, const Matrix& wm) {
        Vector v(2 * wp.size());
        v.head(wp.size()) = Eigen::Map<const Vector>(wp.data(), wp.size());
        v.tail(wm.size()) = Eigen::Map<const Vector>(wm.data(), wm.size());
        return v;
    }
    static void unpack(const Vector& v, Matrix& wp, Matrix& wm) {
        const auto m = wp.size();
        wp = Eigen::Map<const Matrix>(v.data(), wp.rows(), wp.cols());
        wm = Eigen::Map<const Matrix>(v.data() + m, wm.rows(), wm.cols());
    }
};

// Projected L-BFGS with Armijo backtracking on max(0, x + t d).
// Falls back to projected steepest descent when the quasi-Newton direction
// fails to produce decrease.
void minimize_subproblem(const Subproblem& sub, Matrix& wp, Matrix& wm, int max_iter) {
    const int mem = 10;
    std::deque<Vector> s_hist, y_hist;
    std::deque<double> rho_hist;

    Matrix gp(sub.f, sub.f), gm(sub.f, sub.f);
    double fx = sub.value_grad(wp, wm, gp, gm);
    Vector x = Flat::pack(wp, wm);
    Vector g = Flat::pack(gp, gm);

    const double grad_tol = 1e-7;

    for (int it = 0; it < max_iter; ++it) {
        // projected gradient stationarity
        Vector pg = (x - g).cwiseMax(0.0) - x;
        if (pg.lpNorm<Eigen::Infinity>() <= grad_tol) break;

        // two-loop recursion
        Vector d = -g;
        std::vector<double> a(s_hist.size());
        for (int k = static_cast<int>(s_hist.size()) - 1; k >= 0; --k) {
            a[k] = rho_hist[k] * s_hist[k].dot(d);
            d -= a[k] * y_hist[k];
        }
        if (!s_hist.empty()) {
            double gamma = s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
            d *= gamma;
        }
        for (size_t k = 0; k < s_hist.size(); ++k) {
            double b = rho_hist[k] * y_hist[k].dot(d);
            d += (a[k] - b) * s_hist[k];
        }

        auto try_direction = [&](const Vector& dir, double& fn, Vector& xn, Vector& gn) {
            double t = 1.0;
            for (int ls = 0; ls < 40; ++ls) {
                xn = (x + t * dir).cwiseMax(0.0);
                Vector step = xn - x;
                if (step.lpNorm<Eigen::Infinity>() == 0.0) return false;
                Matrix twp = wp, twm = wm;
                Flat::unpack(xn, twp, twm);
                Matrix tgp(sub.f, sub.f), tgm(sub.f, sub.f);
                fn = sub.value_grad(twp, twm, tgp, tgm);
                if (std::isfinite(fn) && fn <= fx + 1e-4 * g.dot(step)) {
                    gn = Flat::pack(tgp, tgm);
                    return true;
                }
                t *= 0.5;
            }
            return false;
        };

        double fn;
        Vector xn, gn;
        bool ok = try_direction(d, fn, xn, gn);
        if (!ok) {
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            ok = try_direction(-g, fn, xn, gn);
            if (!ok) break;  // stationary within line-search resolution
        }

        Vector s = xn - x;
        Vector y = gn - g;
        double sy = s.dot(y);
        if (sy > 1e-10) {
            s_hist.push_back(s);
            y_hist.push_back(y);
            rho_hist.push_back(1.0 / sy);
            if (s_hist.size() > mem) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }
        x = xn;
        g = gn;
        fx = fn;
    }
    Flat::unpack(x, wp, wm);
}

// Locate one directed cycle in the nonzero pattern of w; empty if acyclic.
std::vector<int> find_cycle(const Matrix& w) {
    const int f = static_cast<int>(w.rows());
    std::vector<int> color(f, 0);  // 0 white, 1 gray, 2 black
    std::vector<int> parent(f, -1);
    std::vector<int> cycle;

    std::function<bool(int)> dfs = [&](int u) -> bool {
        color[u] = 1;
        for (int v = 0; v < f; ++v) {
            if (w(u, v) == 0.0) continue;
            if (color[v] == 1) {
                // unwind u -> ... -> v
                cycle.push_back(v);
                for (int t = u; t != v; t = parent[t]) cycle.push_back(t);
                std::reverse(cycle.begin(), cycle.end());
                return true;
            }
            if (color[v] == 0) {
                parent[v] = u;
                if (dfs(v)) return true;
            }
        }
        color[u] = 2;
        return false;
    };
    for (int u = 0; u < f; ++u) {
        if (color[u] == 0 && dfs(u)) return cycle;
    }
    return {};
}

}  // namespace

std::vector<int> topological_order(const Matrix& w) {
    const int f = static_cast<int>(w.rows());
    std::vector<int> indeg(f, 0);
    for (int i = 0; i < f; ++i)
        for (int j = 0; j < f; ++j)
            if (w(i, j) != 0.0) ++indeg[j];
    std::vector<int> order;
    std::deque<int> q;
    for (int i = 0; i < f; ++i)
        if (indeg[i] == 0) q.push_back(i);
    while (!q.empty()) {
        int u = q.front();
        q.pop_front();
        order.push_back(u);
        for (int v = 0; v < f; ++v) {
            if (w(u, v) != 0.0 && --indeg[v] == 0) q.push_back(v);
        }
    }
    if (static_cast<int>(order.size()) != f) return {};
    return order;
}

CausalGraph fit_notears(const Matrix& x, const NotearsConfig& cfg, WarningLog* warnings) {
    cfg.validate();
    const int f = static_cast<int>(x.cols());
    const auto n = x.rows();
    if (n < 2 || f < 2) throw DegenerateInput("notears needs at least 2 rows and 2 columns");
    for (int c = 0; c < f; ++c) {
        double mean = x.col(c).mean();
        double var = (x.col(c).array() - mean).square().sum() / static_cast<double>(n);
        if (var <= 1e-24) throw DegenerateInput("constant column " + std::to_string(c));
    }
    if (n < f && warnings)
        warnings->warn("notears: n=" + std::to_string(n) + " < f=" + std::to_string(f) +
                       "; estimates may be unstable");

    Matrix gram = (x.transpose() * x) / static_cast<double>(n);

    Matrix wp = Matrix::Zero(f, f);
    Matrix wm = Matrix::Zero(f, f);
    double rho = cfg.rho_init;
    double alpha = 0.0;
    double h_prev = std::numeric_limits<double>::infinity();
    double h_cur = std::numeric_limits<double>::infinity();

    for (int outer = 0; outer < cfg.max_outer && rho < cfg.rho_max; ++outer) {
        Matrix wp_try, wm_try;
        while (rho < cfg.rho_max) {
            wp_try = wp;
            wm_try = wm;
            Subproblem sub{gram, cfg.lambda1, rho, alpha, f};
            minimize_subproblem(sub, wp_try, wm_try, cfg.inner_max_iter);
            h_cur = acyclicity(wp_try - wm_try).first;
            if (h_cur > 0.25 * h_prev) {
                rho *= cfg.rho_mult;  // h failed to drop 4x; escalate
            } else {
                break;
            }
        }
        wp = wp_try;
        wm = wm_try;
        h_prev = h_cur;
        alpha += rho * h_cur;
        if (h_cur <= cfg.h_tol) break;
    }

    CausalGraph g;
    g.raw_w = wp - wm;
    g.h_final = h_cur;
    g.converged = h_cur <= cfg.h_tol;
    if (!g.converged && warnings)
        warnings->warn("notears: no convergence, h=" + std::to_string(h_cur) +
                       " (best-so-far returned)");

    g.w = g.raw_w;
    g.w.diagonal().setZero();
    for (int i = 0; i < f; ++i)
        for (int j = 0; j < f; ++j)
            if (std::abs(g.w(i, j)) < cfg.edge_threshold) g.w(i, j) = 0.0;

    // cycle repair: drop the weakest edge on each detected cycle
    while (true) {
        auto cyc = find_cycle(g.w);
        if (cyc.empty()) break;
        int bi = -1, bj = -1;
        double best = std::numeric_limits<double>::infinity();
        for (size_t k = 0; k < cyc.size(); ++k) {
            int u = cyc[k];
            int v = cyc[(k + 1) % cyc.size()];
            if (std::abs(g.w(u, v)) < best) {
                best = std::abs(g.w(u, v));
                bi = u;
                bj = v;
            }
        }
        g.w(bi, bj) = 0.0;
        if (warnings)
            warnings->warn("notears: removed cycle edge " + std::to_string(bi) + "->" +
                           std::to_string(bj) + " (|w|=" + std::to_string(best) + ")");
    }

    for (int i = 0; i < f; ++i)
        for (int j = 0; j < f; ++j)
            if (g.w(i, j) != 0.0) g.edges.push_back({i, j, g.w(i, j)});
    return g;
}

PathResult strongest_path(const CausalGraph& g, int i, int j) {
    const int f = g.f();
    if (i < 0 || j < 0 || i >= f || j >= f) throw DimensionMismatch("strongest_path: node out of range");
    PathResult res;
    if (i == j) return res;
    auto order = topological_order(g.w);
    if (order.empty()) throw Error("strongest_path requires an acyclic graph");

    const double neg_inf = -std::numeric_limits<double>::infinity();
    std::vector<double> best(f, neg_inf);
    std::vector<int> pred(f, -1);
    best[i] = 0.0;  // log(1)
    for (int u : order) {
        if (best[u] == neg_inf) continue;
        for (int v = 0; v < f; ++v) {
            if (g.w(u, v) == 0.0) continue;
            double cand = best[u] + std::log(std::abs(g.w(u, v)));
            if (cand > best[v]) {
                best[v] = cand;
                pred[v] = u;
            }
        }
    }
    if (best[j] == neg_inf) return res;  // unreachable -> strength 0
    res.strength = std::exp(best[j]);
    for (int t = j; t != -1; t = pred[t]) res.nodes.push_back(t);
    std::reverse(res.nodes.begin(), res.nodes.end());
    return res;
}

}  // namespace phenokg
