#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gt/correspond.hpp"
#include "gt/tensor.hpp"

namespace gt {

// Witness of projective equivalence: cameras of b are the cameras of a
// composed with h, up to the per-camera scales lambda (a_i * h = lambda_i * b_i).
struct PglWitness {
    Mat h;
    std::vector<double> lambdas;
    double residual = 0.0;
};

// Solves the homogeneous system a_i * K = mu_i * b_i over (K, mu) and accepts
// only a one-dimensional solution space with invertible K and nonzero scales.
std::optional<PglWitness> pgl_equivalent(const CameraConfig& a, const CameraConfig& b,
                                         double tol = 1e-6);

// Canonical orbit representative: right-multiplies by the inverse of the
// first independent (n+1)-row selection of the stacked matrix (greedy scan in
// row order), making those rows the identity. Idempotent; configs in one
// orbit map to equal results up to per-camera scale.
CameraConfig gauge_fix(const CameraConfig& cfg);

// Free parameters of a gauge-fixed config: the stacked matrix is [I; Theta]
// with Theta the trailing (sum(m_i+1) - (n+1)) x (n+1) block, row-major.
Vec config_to_theta(const CameraConfig& cfg);
CameraConfig theta_to_config(int n, const std::vector<int>& m, const Vec& theta);

// Unit-normalized tensor of the gauge-fixed parametrization and its analytic
// Jacobian (via minor cofactors), exposed for cross-checking.
Vec tensor_at_theta(const Profile& p, const Vec& theta);
Mat tensor_jacobian_at_theta(const Profile& p, const Vec& theta);

struct LmOptions {
    double lambda0 = 1e-3;
    double lambda_up = 10.0;
    double lambda_down = 0.5;
    int max_iters = 200;
    double step_tol = 1e-12;
    double residual_tol = 1e-10;
};

struct LmRun {
    Vec theta;
    double residual = 0.0; // projective distance of the tensor at theta to the target
    int iters = 0;
    bool evaluable = false;
};

// Damped least squares on the free entries, minimizing the sign-aligned
// distance between the candidate's unit tensor and the target.
LmRun lm_refine(const GrassmannTensor& target, const Vec& theta0, const LmOptions& opts = {});

struct ReconstructionResult {
    CameraConfig config;
    double residual = 0.0;
    int restarts_used = 0;
    std::string orbit_label; // "primary"/"twisted" in the square case, else empty
};

struct ReconstructionOutcome {
    std::vector<ReconstructionResult> orbits; // distinct orbits, best residual first
    double best_residual = 0.0;               // best over all restarts, converged or not
    int restarts = 0;
    bool converged = false;
};

// Multi-start recovery of the camera configuration from its tensor, up to
// PGL: random gauge-fixed initializations, LM refinement, genericity filter,
// orbit deduplication by pgl_equivalent.
ReconstructionOutcome reconstruct_from_tensor(const GrassmannTensor& a, int restarts,
                                              std::uint64_t seed, const LmOptions& opts = {});

struct FactorizationResult {
    CameraConfig config;
    std::vector<Vec> points;
    double residual = 0.0; // mean projective reprojection error
    bool degenerate = false;
    bool converged = false; // residual reached its fixed point within the budget
    int iters_used = 0;
};

// Alternating projective factorization of point tuples: scale-balance the
// depth-weighted measurement stack, factor to rank n+1, update depths. The
// alternation converges linearly, hence the generous default budget.
FactorizationResult reconstruct_from_points(const std::vector<std::vector<Vec>>& tuples, int n,
                                            const std::vector<int>& m, int iters = 5000);

// Numerical rank of the map (all camera entries) -> (normalized tensor),
// by central finite differences with step h.
int tensor_map_jacobian_rank(const CameraConfig& cfg, const Profile& p, double h = 1e-5);

} // namespace gt
