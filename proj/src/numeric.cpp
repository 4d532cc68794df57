#include "gt/numeric.hpp"

#include <cmath>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SVD>

namespace gt {

void validate(const IndexSeq& s) {
    if (s.universe <= 0)
        throw validation_error("index sequence over empty universe");
    int prev = 0;
    for (int v : s.idx) {
        if (v <= prev || v > s.universe)
            throw validation_error("index sequence must be strictly increasing in 1.." +
                                   std::to_string(s.universe));
        prev = v;
    }
}

void require_finite(const Mat& m, const char* what) {
    if (m.rows() == 0 || m.cols() == 0)
        throw validation_error(std::string(what) + " is empty");
    if (!m.allFinite())
        throw validation_error(std::string(what) + " has non-finite entries");
}

int rank(const Mat& m, double tol) {
    if (m.rows() == 0 || m.cols() == 0)
        return 0;
    Eigen::BDCSVD<Mat> svd(m);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) <= 0.0)
        return 0;
    int r = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > tol * sv(0))
            ++r;
    return r;
}

std::vector<Vec> nullspace(const Mat& m, double tol) {
    require_finite(m, "nullspace input");
    Eigen::BDCSVD<Mat> svd(m, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv(0) : 0.0;
    std::vector<Vec> basis;
    for (int i = 0; i < m.cols(); ++i) {
        const double s = i < sv.size() ? sv(i) : 0.0;
        if (smax <= 0.0 || s <= tol * smax)
            basis.push_back(svd.matrixV().col(i));
    }
    return basis;
}

double minor_det(const Mat& m, const IndexSeq& rows, const IndexSeq& cols) {
    validate(rows);
    validate(cols);
    if (rows.universe != m.rows() || cols.universe != m.cols())
        throw validation_error("minor index universe does not match matrix shape");
    if (rows.size() != cols.size())
        throw validation_error("minor needs equally many rows and columns");
    const int k = rows.size();
    Mat sub(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            sub(i, j) = m(rows.idx[i] - 1, cols.idx[j] - 1);
    return det_small(sub);
}

std::vector<IndexSeq> combinations(int universe, int k) {
    if (k < 0 || universe < 0)
        throw validation_error("combinations over negative sizes");
    std::vector<IndexSeq> out;
    if (k > universe)
        return out;
    std::vector<int> cur(k);
    for (int i = 0; i < k; ++i)
        cur[i] = i + 1;
    while (true) {
        out.push_back(IndexSeq{cur, universe});
        int i = k - 1;
        while (i >= 0 && cur[i] == universe - (k - 1 - i))
            --i;
        if (i < 0)
            break;
        ++cur[i];
        for (int j = i + 1; j < k; ++j)
            cur[j] = cur[j - 1] + 1;
    }
    return out;
}

Vec plucker(const Mat& f, double tol) {
    require_finite(f, "plucker input");
    const int k = static_cast<int>(f.rows());
    const int n = static_cast<int>(f.cols());
    if (k > n)
        throw validation_error("plucker input has more rows than columns");
    if (rank(f, tol) < k)
        throw numeric_error("plucker input is row rank deficient");
    const auto cols = combinations(n, k);
    Vec p(cols.size());
    IndexSeq all_rows;
    all_rows.universe = k;
    all_rows.idx.resize(k);
    for (int i = 0; i < k; ++i)
        all_rows.idx[i] = i + 1;
    for (std::size_t c = 0; c < cols.size(); ++c)
        p(static_cast<int>(c)) = minor_det(f, all_rows, cols[c]);
    return p;
}

double proj_distance(const Vec& u, const Vec& v) {
    if (u.size() != v.size() || u.size() == 0)
        throw validation_error("projective distance needs equal nonzero sizes");
    const double nu = u.norm();
    const double nv = v.norm();
    if (nu <= 0.0 || nv <= 0.0)
        throw validation_error("projective distance of the zero vector");
    // Direct difference of the normalized representatives; the equivalent
    // sqrt(2 - 2|cos|) formula cannot resolve distances below sqrt(eps).
    const Vec uh = u / nu;
    const Vec vh = v / nv;
    return std::min((uh - vh).norm(), (uh + vh).norm());
}

bool proj_equal(const Vec& u, const Vec& v, double tol) {
    return proj_distance(u, v) <= tol;
}

double det_small(const Mat& m) {
    if (m.rows() != m.cols())
        throw validation_error("determinant of a non-square matrix");
    switch (m.rows()) {
    case 0:
        return 1.0;
    case 1:
        return m(0, 0);
    case 2:
        return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    case 3:
        return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
               m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
               m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
    case 4: {
        const double s0 = m(2, 2) * m(3, 3) - m(2, 3) * m(3, 2);
        const double s1 = m(2, 1) * m(3, 3) - m(2, 3) * m(3, 1);
        const double s2 = m(2, 1) * m(3, 2) - m(2, 2) * m(3, 1);
        const double s3 = m(2, 0) * m(3, 3) - m(2, 3) * m(3, 0);
        const double s4 = m(2, 0) * m(3, 2) - m(2, 2) * m(3, 0);
        const double s5 = m(2, 0) * m(3, 1) - m(2, 1) * m(3, 0);
        return m(0, 0) * (m(1, 1) * s0 - m(1, 2) * s1 + m(1, 3) * s2) -
               m(0, 1) * (m(1, 0) * s0 - m(1, 2) * s3 + m(1, 3) * s4) +
               m(0, 2) * (m(1, 0) * s1 - m(1, 1) * s3 + m(1, 3) * s5) -
               m(0, 3) * (m(1, 0) * s2 - m(1, 1) * s4 + m(1, 2) * s5);
    }
    default:
        return Eigen::PartialPivLU<Mat>(m).determinant();
    }
}

Mat cofactor_matrix(const Mat& m) {
    if (m.rows() != m.cols())
        throw validation_error("cofactors of a non-square matrix");
    const int n = static_cast<int>(m.rows());
    Mat c(n, n);
    if (n == 1) {
        c(0, 0) = 1.0;
        return c;
    }
    Mat sub(n - 1, n - 1);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            for (int r = 0, rr = 0; r < n; ++r) {
                if (r == i)
                    continue;
                for (int s = 0, ss = 0; s < n; ++s) {
                    if (s == j)
                        continue;
                    sub(rr, ss) = m(r, s);
                    ++ss;
                }
                ++rr;
            }
            c(i, j) = (((i + j) & 1) ? -1.0 : 1.0) * det_small(sub);
        }
    }
    return c;
}

} // namespace gt
