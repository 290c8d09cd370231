#pragma once

#include "cvp/action.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace cvp {

enum class OptMethod { ProjectedGradient, FrankWolfe, Annealing };

// Which degrees of freedom of a causal fermion system the solver moves.
// Scale restricts each atom to t_i * Psi_i; Frozen optimizes weights only.
enum class PointMode { Full, Scale, Frozen };

struct OptimizerConfig {
    OptMethod method = OptMethod::ProjectedGradient;
    PointMode point_mode = PointMode::Full;
    int max_iters = 10000;
    double step0 = 0.5;
    double h_fd = 1e-5;                 // central-difference step
    double penalty_trace = 100.0;
    double penalty_bound = 100.0;
    std::uint64_t seed = 0;
    double stop_tol = 1e-10;            // on the EL residual
    int el_check_every = 20;
    double anneal_t0 = 0.05;
    double anneal_decay = 0.995;
    int anneal_draws = 40;              // fallback kicks when a step stalls
    std::vector<double> init_weights;   // optional starting simplex point

    void check() const {
        if (h_fd <= 0.0) throw std::invalid_argument("h_fd must be positive");
        if (penalty_trace < 0.0 || penalty_bound < 0.0)
            throw std::invalid_argument("penalties must be nonnegative");
    }
};

// Euclidean projection onto the scaled simplex {w >= 0, sum w = volume}.
std::vector<double> project_simplex(std::vector<double> w, double volume);

struct CompactSolveResult {
    CompactMeasure measure;
    std::vector<double> action_trace; // S per accepted iterate
    ElReport report;
    bool converged = false;           // false: iteration budget exhausted
    int iterations = 0;
};

// Minimize S(rho) = rho^T K rho over the probability simplex on a fixed
// point list.  The objective is a smooth quadratic in the weights, so the
// gradient 2 K rho is analytic here; finite differences are reserved for the
// point degrees of freedom of the causal fermion solver.
CompactSolveResult minimize_compact(const CompactKernel &kernel,
                                    const std::vector<int> &points,
                                    const OptimizerConfig &cfg);

struct CfsIterRow {
    int iter;
    double action;
    double boundedness;
    double trace;
    double residual_constancy;
    double residual_minimality;
};

struct CfsSolveResult {
    CfsMeasure measure;
    std::vector<CfsIterRow> trace;
    ElReport report;
    bool improved = false;  // final EL residual <= initial
    bool converged = false; // stop_tol reached within budget
    int iterations = 0;
    double objective = 0.0; // penalized objective at the final iterate
};

// Joint weight/point minimization under the volume constraint (projection,
// exact) with trace and boundedness handled by quadratic penalties.
// Deterministic for a fixed seed and config.
CfsSolveResult minimize_cfs(const CfsMeasure &initial, const ActionParams &p,
                            const OptimizerConfig &cfg);

// Penalized objective used by minimize_cfs; exposed for oracle tests.
double cfs_objective(const CfsMeasure &m, const ActionParams &p,
                     const OptimizerConfig &cfg, double trace_target);

} // namespace cvp
