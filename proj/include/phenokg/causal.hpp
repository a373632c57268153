#pragma once

#include <string>
#include <utility>
#include <vector>

#include "phenokg/common.hpp"

namespace phenokg {

struct NotearsConfig {
    double lambda1 = 0.1;        // L1 weight
    double h_tol = 1e-8;         // acyclicity tolerance
    double rho_init = 1.0;
    double rho_mult = 10.0;
    double rho_max = 1e16;
    int inner_max_iter = 100;    // quasi-Newton iterations per subproblem
    double edge_threshold = 0.3; // w_min: |w| below this is zeroed
    int max_outer = 100;

    void validate() const;
};

struct CausalEdge {
    int source = 0;
    int target = 0;
    double weight = 0.0;
};

struct DegenerateInput : Error {
    using Error::Error;
};

// Weighted DAG learned per phenotype. `w` is the post-threshold matrix and
// is always acyclic; `raw_w` is the optimizer output at convergence.
struct CausalGraph {
    int cluster_id = -1;
    Matrix w;
    Matrix raw_w;
    std::vector<CausalEdge> edges;
    double h_final = 0.0;
    bool converged = true;
    std::vector<std::string> feature_names;

    int f() const { return static_cast<int>(w.rows()); }
    bool has_edge(int i, int j) const { return w(i, j) != 0.0; }
    double max_abs_weight() const;
};

// h(W) = tr(e^{W o W}) - f and its gradient (e^{W o W})^T o 2W.
std::pair<double, Matrix> acyclicity(const Matrix& w);

// Augmented-Lagrangian NOTEARS on standardized data. The L1 term is handled
// through the nonnegative (w+, w-) split; the subproblems are solved with a
// projected L-BFGS. Non-convergence is reported through the flag, not thrown.
CausalGraph fit_notears(const Matrix& x, const NotearsConfig& cfg,
                        WarningLog* warnings = nullptr);

// Standardize columns in place semantics; throws DegenerateInput on a
// constant column. The pipeline uses this before per-phenotype fits.
Matrix standardize_columns(const Matrix& x);

// Kahn topological order of the thresholded graph; empty if cyclic.
std::vector<int> topological_order(const Matrix& w);

struct PathResult {
    std::vector<int> nodes;  // i ... j inclusive; empty if unreachable
    double strength = 0.0;   // max over paths of the product of |w|
};

// Log-space longest path on the DAG.
PathResult strongest_path(const CausalGraph& g, int i, int j);

}  // namespace phenokg
