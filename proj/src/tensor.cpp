#include "gt/tensor.hpp"

#include <string>

#include <Eigen/Dense>

#include "gt/kernels.hpp"

namespace gt {

void validate(const Profile& p) {
    if (p.m.empty() || p.m.size() != p.alpha.size())
        throw validation_error("profile needs matching m and alpha lists");
    int sum = 0;
    for (int i = 0; i < p.r(); ++i) {
        if (p.m[i] < 1)
            throw validation_error("profile needs m_i >= 1");
        if (p.alpha[i] < 1 || p.alpha[i] > p.m[i])
            throw validation_error("profile needs 1 <= alpha_i <= m_i at position " +
                                   std::to_string(i + 1));
        sum += p.alpha[i];
    }
    if (sum != p.n + 1)
        throw validation_error("profile alphas sum to " + std::to_string(sum) + ", need n+1 = " +
                               std::to_string(p.n + 1));
}

void require_match(const Profile& p, const CameraConfig& cfg) {
    if (p.n != cfg.n || p.m != cfg.m)
        throw validation_error("profile shape does not match camera config");
}

namespace {

void enumerate_rec(const std::vector<int>& lo, const std::vector<int>& hi, int remaining,
                   std::size_t i, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
    if (i == lo.size()) {
        if (remaining == 0)
            out.push_back(cur);
        return;
    }
    for (int v = lo[i]; v <= hi[i]; ++v) {
        if (v > remaining)
            break;
        cur.push_back(v);
        enumerate_rec(lo, hi, remaining - v, i + 1, cur, out);
        cur.pop_back();
    }
}

std::vector<std::vector<int>> enumerate_box(const std::vector<int>& lo, const std::vector<int>& hi,
                                            int total) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    if (total >= 0)
        enumerate_rec(lo, hi, total, 0, cur, out);
    return out;
}

} // namespace

std::vector<std::vector<int>> enumerate_B(const std::vector<int>& m, int n) {
    std::vector<int> lo(m.size(), 0), hi(m.size());
    for (std::size_t i = 0; i < m.size(); ++i)
        hi[i] = m[i] + 1;
    return enumerate_box(lo, hi, n + 1);
}

std::vector<Profile> enumerate_B_interior(const std::vector<int>& m, int n) {
    std::vector<int> lo(m.size(), 1), hi(m.size());
    for (std::size_t i = 0; i < m.size(); ++i)
        hi[i] = m[i];
    std::vector<Profile> out;
    for (auto& a : enumerate_box(lo, hi, n + 1))
        out.push_back(Profile{n, m, a});
    return out;
}

long long TensorLayout::size() const {
    return strides.empty() ? 0 : strides[0] * static_cast<long long>(row_sets[0].size());
}

long long TensorLayout::flat_index(const std::vector<int>& pos) const {
    long long flat = 0;
    for (std::size_t i = 0; i < pos.size(); ++i)
        flat += strides[i] * pos[i];
    return flat;
}

std::vector<int> TensorLayout::decode(long long flat) const {
    std::vector<int> pos(row_sets.size());
    for (std::size_t i = 0; i < row_sets.size(); ++i) {
        pos[i] = static_cast<int>(flat / strides[i]);
        flat %= strides[i];
    }
    return pos;
}

bool TensorLayout::next(std::vector<int>& pos) const {
    for (int i = static_cast<int>(pos.size()) - 1; i >= 0; --i) {
        if (++pos[i] < static_cast<int>(row_sets[i].size()))
            return true;
        pos[i] = 0;
    }
    return false;
}

TensorLayout make_layout(const Profile& p) {
    validate(p);
    TensorLayout lay;
    lay.profile = p;
    lay.row_sets.resize(p.r());
    lay.strides.resize(p.r());
    lay.block_offsets.resize(p.r());
    int offset = 0;
    for (int i = 0; i < p.r(); ++i) {
        lay.row_sets[i] = combinations(p.m[i] + 1, p.alpha[i]);
        lay.block_offsets[i] = offset;
        offset += p.m[i] + 1;
    }
    long long stride = 1;
    for (int i = p.r() - 1; i >= 0; --i) {
        lay.strides[i] = stride;
        stride *= static_cast<long long>(lay.row_sets[i].size());
    }
    return lay;
}

Vec canonicalize(Vec entries) {
    const double norm = entries.norm();
    if (!(norm > 0.0) || !entries.allFinite())
        throw numeric_error("tensor has zero or non-finite entries");
    entries /= norm;
    const double cutoff = 1e-12 * entries.cwiseAbs().maxCoeff();
    for (int i = 0; i < entries.size(); ++i) {
        if (std::abs(entries(i)) > cutoff) {
            if (entries(i) < 0.0)
                entries = -entries;
            break;
        }
    }
    return entries;
}

Vec compute_tensor_raw(const CameraConfig& cfg, const Profile& p) {
    validate_shape(cfg);
    require_match(p, cfg);
    const Mat s = cfg.stacked();
    if (rank(s) < cfg.n + 1)
        throw numeric_error("stacked camera matrix is rank deficient");
    const TensorLayout lay = make_layout(p);
    Vec out(lay.size());
    Mat sub(cfg.n + 1, cfg.n + 1);
    std::vector<int> pos(p.r(), 0);
    long long flat = 0;
    do {
        int row = 0;
        for (int i = 0; i < p.r(); ++i)
            for (int idx : lay.row_sets[i][pos[i]].idx)
                sub.row(row++) = s.row(lay.block_offsets[i] + idx - 1);
        out(flat++) = det_small(sub);
    } while (lay.next(pos));
    return out;
}

GrassmannTensor compute_tensor(const CameraConfig& cfg, const Profile& p) {
    return GrassmannTensor{p, canonicalize(compute_tensor_raw(cfg, p))};
}

void validate_tuple(const Profile& p, const CodimSubspaceTuple& u) {
    if (static_cast<int>(u.forms.size()) != p.r())
        throw validation_error("subspace tuple has wrong camera count");
    for (int i = 0; i < p.r(); ++i) {
        const Mat& f = u.forms[i];
        if (f.rows() != p.alpha[i] || f.cols() != p.m[i] + 1)
            throw validation_error("form matrix " + std::to_string(i + 1) + " must be " +
                                   std::to_string(p.alpha[i]) + "x" + std::to_string(p.m[i] + 1));
        require_finite(f, "form matrix");
    }
}

Vec incidence_row(const TensorLayout& lay, const CodimSubspaceTuple& u) {
    const Profile& p = lay.profile;
    validate_tuple(p, u);
    std::vector<Vec> pl(p.r());
    std::vector<const double*> parts(p.r());
    std::vector<int> lens(p.r());
    for (int i = 0; i < p.r(); ++i) {
        pl[i] = plucker(u.forms[i]);
        parts[i] = pl[i].data();
        lens[i] = static_cast<int>(pl[i].size());
    }
    Vec row(lay.size());
    kernels::tensor_product_row(parts.data(), lens.data(), p.r(), row.data());
    return row;
}

Vec incidence_row(const Profile& p, const CodimSubspaceTuple& u) {
    return incidence_row(make_layout(p), u);
}

double incidence_value(const GrassmannTensor& a, const CodimSubspaceTuple& u) {
    const Vec row = incidence_row(a.profile, u);
    if (row.size() != a.entries.size())
        throw validation_error("tensor and subspace tuple sizes disagree");
    return kernels::dot(a.entries.data(), row.data(), static_cast<std::size_t>(row.size()));
}

double incidence_oracle(const CameraConfig& cfg, const CodimSubspaceTuple& u) {
    validate_shape(cfg);
    int rows = 0;
    for (const Mat& f : u.forms)
        rows += static_cast<int>(f.rows());
    if (rows != cfg.n + 1)
        throw validation_error("form codimensions must sum to n+1");
    Mat stack(cfg.n + 1, cfg.n + 1);
    int at = 0;
    for (int i = 0; i < cfg.r(); ++i) {
        const Mat& f = u.forms[i];
        if (f.cols() != cfg.cameras[i].rows())
            throw validation_error("form matrix " + std::to_string(i + 1) +
                                   " does not match camera target dimension");
        stack.middleRows(at, f.rows()) = f * cfg.cameras[i];
        at += static_cast<int>(f.rows());
    }
    return det_small(stack);
}

int rank_profile_at(const CameraConfig& cfg, const std::vector<Vec>& x, double tol) {
    validate_shape(cfg);
    if (static_cast<int>(x.size()) != cfg.r())
        throw validation_error("need one image point per camera");
    int total = 0;
    for (int mi : cfg.m)
        total += mi;
    Mat stack(total, cfg.n + 1);
    int at = 0;
    for (int i = 0; i < cfg.r(); ++i) {
        const int mi = cfg.m[i];
        if (x[i].size() != mi + 1 || x[i].norm() <= 0.0)
            throw validation_error("image point " + std::to_string(i + 1) +
                                   " must be a nonzero (m_i+1)-vector");
        // Orthonormal completion of x_i; rows beyond the first span the
        // quotient by the line through x_i.
        Eigen::HouseholderQR<Mat> qr(x[i]);
        Mat q = qr.householderQ();
        stack.middleRows(at, mi) = q.rightCols(mi).transpose() * cfg.cameras[i];
        at += mi;
    }
    return rank(stack, tol);
}

} // namespace gt
