#pragma once

#include <vector>

#include <Eigen/Core>

#include "gt/errors.hpp"

namespace gt {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Relative singular-value threshold used everywhere a "generic" assumption
// becomes an explicit numerical rank check.
inline constexpr double kRankTol = 1e-9;

// Strictly increasing 1-based index sequence into {1, ..., universe}.
struct IndexSeq {
    std::vector<int> idx;
    int universe = 0;

    int size() const { return static_cast<int>(idx.size()); }
    bool operator==(const IndexSeq& o) const = default;
};

// Throws validation_error if the sequence is not strictly increasing in range.
void validate(const IndexSeq& s);

// Throws validation_error on non-finite entries or empty shapes.
void require_finite(const Mat& m, const char* what = "matrix");

// Numerical rank: singular values above tol * sigma_max; 0 for the zero matrix.
int rank(const Mat& m, double tol = kRankTol);

// Orthonormal basis of the numerical kernel; size == cols - rank(m, tol).
std::vector<Vec> nullspace(const Mat& m, double tol = kRankTol);

// Determinant of the square submatrix m(rows, cols), both taken in increasing
// order; no permutation sign beyond the submatrix determinant itself.
double minor_det(const Mat& m, const IndexSeq& rows, const IndexSeq& cols);

// All k-subsets of {1..universe} in lexicographic order. This order is the
// canonical flattening order used by every tensor layout downstream.
std::vector<IndexSeq> combinations(int universe, int k);

// Maximal minors of a full-row-rank wide matrix in canonical combination
// order; left GL action scales the whole vector by the factor's determinant.
Vec plucker(const Mat& f, double tol = kRankTol);

// Distance between projective classes: min over sign of the unit-normalized
// difference. Throws validation_error on zero or mismatched vectors.
double proj_distance(const Vec& u, const Vec& v);
bool proj_equal(const Vec& u, const Vec& v, double tol);

// Determinant of a small square matrix (hardcoded up to 4x4, LU beyond).
double det_small(const Mat& m);

// Matrix of signed cofactors C(i,j) = (-1)^{i+j} * det(m with row i, col j
// removed), so det(m) = sum_j m(i,j) C(i,j) for any row i.
Mat cofactor_matrix(const Mat& m);

inline long long binomial(int n, int k) {
    if (k < 0 || k > n)
        return 0;
    long long r = 1;
    for (int i = 0; i < k; ++i)
        r = r * (n - i) / (i + 1);
    return r;
}

} // namespace gt
