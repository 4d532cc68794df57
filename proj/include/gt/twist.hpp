#pragma once

#include <cstdint>
#include <vector>

#include "gt/tensor.hpp"

namespace gt {

// The constructions below live in the square case: n+1 cameras onto P^1,
// m = (1,...,1), where the stacked matrix is 2(n+1) x (n+1).
void require_twist_shape(const CameraConfig& cfg);
Profile twist_profile(const CameraConfig& cfg);

// Companion configuration on the dual targets: columns of an orthonormal
// basis of ker(stacked^T), sliced into consecutive 2-row cameras. Satisfies
// stacked(cfg)^T * stacked(dual) = 0.
CameraConfig dual_config(const CameraConfig& cfg);

// Canonical identification P(W^v) = P(W) for dim W = 2: a functional maps to
// its kernel line, [f0:f1] -> [f1:-f0]. Projectively involutive.
Vec identify(const Vec& f);

// Dual cameras pushed back into the original image coordinates through
// identify; this is the twisted companion of cfg inside the same space.
CameraConfig identified_dual(const CameraConfig& cfg);

// Tensor of the identified dual, computed from the dual tensor alone: flip
// every index and attach the parity sign.
GrassmannTensor transport_tensor(const GrassmannTensor& dual_tensor);

// Multiview hypersurface equation of the dual config evaluated at a tuple of
// image points of the original one (coordinates unit-normalized inside).
double hypersurface_value(const GrassmannTensor& dual_tensor, const std::vector<Vec>& x);

struct HypersurfaceReport {
    double max_abs = 0.0;
    int samples = 0;
    bool pass = false;
};

// Samples scene points, projects through cfg, and evaluates the dual
// hypersurface equation there; the two multiview hypersurfaces coincide iff
// the values vanish.
HypersurfaceReport verify_same_hypersurface(const CameraConfig& cfg, const CameraConfig& dual,
                                            int samples, std::uint64_t seed, double tol = 1e-8);

// Exponent vectors of all degree-d monomials in `vars` variables, graded
// lexicographic (first variable strongest).
std::vector<std::vector<int>> monomials_of_degree(int vars, int degree);

// Basis of a space of degree-d forms on P^n, rows of coeffs against the
// graded-lex monomial list.
struct PolyBasis {
    int degree = 0;
    int vars = 0;
    std::vector<std::vector<int>> monomials;
    Mat coeffs;

    int dimension() const { return static_cast<int>(coeffs.rows()); }
};

double evaluate_form(const PolyBasis& b, int row, const Vec& x);

// Forms of the given degree vanishing on the focal points Z_i for i in loci
// (1-based camera indices). Conditions are exact coefficient conditions from
// substituting a parametrization of each Z_i.
PolyBasis vanishing_system(const CameraConfig& cfg, int degree, const std::vector<int>& loci);

// Point w in the dual source space whose dual images match the given image
// tuple: nullspace vector of the rows x_i^T s'_i. Throws numeric_error when
// the nullspace is not one-dimensional.
Vec triangulate_dual(const CameraConfig& dual, const std::vector<Vec>& x);

// Degree-n map realizing dual projection after the original one: evaluate the
// full vanishing system, then correct the basis of the dual source space by a
// projective frame fit over n+2 sampled points.
struct CremonaMap {
    PolyBasis basis;
    Mat h;
};

CremonaMap make_cremona(const CameraConfig& cfg, const CameraConfig& dual, std::uint64_t seed);

Vec eval_system(const PolyBasis& basis, const Vec& z);
// Throws numeric_error when z lies on the base locus (all forms vanish).
Vec cremona_apply(const CremonaMap& map, const Vec& z);

// Random real point on the zero set of one basis form: intersect with random
// lines and take real roots via the companion matrix.
Vec sample_on_form(const PolyBasis& basis, int row, Rng& rng, int max_tries = 1000);

} // namespace gt
