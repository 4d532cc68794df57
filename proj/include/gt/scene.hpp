#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gt/numeric.hpp"
#include "gt/rng.hpp"

namespace gt {

using ScenePoint = Vec;

// A configuration of r projections out of P^n: camera i is an (m_i+1)x(n+1)
// matrix acting on homogeneous coordinates, defined up to scale. Matrices are
// stored unnormalized; comparisons go through proj_equal.
struct CameraConfig {
    int n = 0;
    std::vector<int> m;
    std::vector<Mat> cameras;

    int r() const { return static_cast<int>(m.size()); }
    int stacked_rows() const;
    Mat stacked() const;
};

// Shape, range and finiteness of a config; throws validation_error.
void validate_shape(const CameraConfig& cfg);

struct GenericityCheck {
    std::string name;
    bool pass = false;
    // Ratio of the decisive singular value to the largest one; rank checks
    // pass when this clears the tolerance.
    double margin = 0.0;
};

struct GenericityReport {
    std::vector<GenericityCheck> checks;
    bool pass = true;
};

// Rank certificates behind the usual "general position" assumptions: every
// camera surjective, the stack injective when wide enough, and each camera
// pair jointly of maximal rank.
GenericityReport validate_genericity(const CameraConfig& cfg, double tol = kRankTol);

// Gaussian configs, resampled until validate_genericity passes (cap 1000).
CameraConfig random_config(int n, const std::vector<int>& m, Rng& rng);
CameraConfig random_config(int n, const std::vector<int>& m, std::uint64_t seed);

// Orthonormal basis of ker(camera), dimension n - m_i: the focal locus.
std::vector<Vec> focal_basis(const Mat& camera, double tol = kRankTol);

// Relative threshold below which a projected point counts as indeterminate.
inline constexpr double kIndeterminacyTol = 1e-8;

// Images x_i = s_i z; throws numeric_error naming the camera whose focal
// locus contains z.
std::vector<Vec> project(const CameraConfig& cfg, const ScenePoint& z,
                         double tol = kIndeterminacyTol);

// Right action of PGL(n+1): every camera becomes s_i * h.
CameraConfig apply_homography(const CameraConfig& cfg, const Mat& h);

ScenePoint random_point(int n, Rng& rng);

} // namespace gt
