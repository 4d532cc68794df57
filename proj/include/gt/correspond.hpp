#pragma once

#include <cstdint>
#include <vector>

#include "gt/tensor.hpp"

namespace gt {

// Subspace correspondences, optionally tagged with the scene points they were
// sampled through (synthetic data only).
struct CorrespondenceSet {
    Profile profile;
    std::vector<CodimSubspaceTuple> tuples;
    std::vector<Vec> provenance;
};

void validate(const CorrespondenceSet& cs);

// One tuple of subspaces through the projections of a random scene point:
// each F_i has alpha_i random rows annihilating x_i. Resamples on focal-locus
// hits or rank-deficient forms (cap 1000). If z_out is given it receives the
// scene point.
CodimSubspaceTuple sample_correspondence(const CameraConfig& cfg, const Profile& p, Rng& rng,
                                         Vec* z_out = nullptr);
CodimSubspaceTuple sample_correspondence(const CameraConfig& cfg, const Profile& p,
                                         std::uint64_t seed);

// count tuples with per-tuple streams derived from (seed, index), so the
// result does not depend on construction order.
CorrespondenceSet make_correspondence_set(const CameraConfig& cfg, const Profile& p, int count,
                                          std::uint64_t seed);

// Adds i.i.d. Gaussian noise of standard deviation sigma * ||F_i|| / sqrt(#entries)
// to every entry of every form. sigma = 0 returns the input unchanged.
CodimSubspaceTuple add_noise(const CodimSubspaceTuple& t, double sigma, std::uint64_t seed);
CorrespondenceSet add_noise(const CorrespondenceSet& cs, double sigma, std::uint64_t seed);

struct EstimateDiagnostics {
    // Effective singular values of the coefficient matrix, smallest last;
    // rows shorter than the column count pad with implicit zeros.
    double sigma_last = 0.0;
    double sigma_second_last = 0.0;
    int corank = 0;
    std::vector<double> row_residuals;
};

struct EstimateResult {
    GrassmannTensor tensor;
    EstimateDiagnostics diagnostics;
};

// Homogeneous least squares for the tensor: unit-normalized coefficient rows
// of Plücker products, solution the right singular vector of least singular
// value. Throws numeric_error when the numerical nullspace has dimension >= 2
// (ambiguous system).
EstimateResult estimate_tensor(const CorrespondenceSet& cs, double tol = kRankTol);

// Point correspondences impose several linear conditions each; expand every
// image point tuple into k random subspace tuples through it.
CorrespondenceSet expand_point_tuples(const Profile& p,
                                      const std::vector<std::vector<Vec>>& points, int k,
                                      std::uint64_t seed);

} // namespace gt
