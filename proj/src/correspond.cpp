#include "gt/correspond.hpp"

#include <string>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "gt/kernels.hpp"
#include "gt/parallel.hpp"

namespace gt {

void validate(const CorrespondenceSet& cs) {
    validate(cs.profile);
    for (const auto& t : cs.tuples)
        validate_tuple(cs.profile, t);
    if (!cs.provenance.empty() && cs.provenance.size() != cs.tuples.size())
        throw validation_error("provenance must be empty or match the tuple count");
}

namespace {

// Forms through one image point: random rows projected off the x direction.
bool forms_through(const Vec& x, int alpha, Rng& rng, Mat& out) {
    const Vec xh = x.normalized();
    out = rng.gaussian_matrix(alpha, static_cast<int>(x.size()));
    out -= (out * xh) * xh.transpose();
    return rank(out) == alpha;
}

} // namespace

CodimSubspaceTuple sample_correspondence(const CameraConfig& cfg, const Profile& p, Rng& rng,
                                         Vec* z_out) {
    require_match(p, cfg);
    for (int attempt = 0; attempt < 1000; ++attempt) {
        const Vec z = random_point(cfg.n, rng);
        std::vector<Vec> x;
        try {
            x = project(cfg, z);
        } catch (const numeric_error&) {
            continue;
        }
        CodimSubspaceTuple u;
        u.forms.resize(p.r());
        bool ok = true;
        for (int i = 0; i < p.r() && ok; ++i)
            ok = forms_through(x[i], p.alpha[i], rng, u.forms[i]);
        if (!ok)
            continue;
        if (z_out)
            *z_out = z;
        return u;
    }
    throw numeric_error("sample_correspondence failed 1000 times in a row");
}

CodimSubspaceTuple sample_correspondence(const CameraConfig& cfg, const Profile& p,
                                         std::uint64_t seed) {
    Rng rng(seed);
    return sample_correspondence(cfg, p, rng);
}

CorrespondenceSet make_correspondence_set(const CameraConfig& cfg, const Profile& p, int count,
                                          std::uint64_t seed) {
    if (count < 0)
        throw validation_error("correspondence count must be nonnegative");
    CorrespondenceSet cs;
    cs.profile = p;
    cs.tuples.resize(count);
    cs.provenance.resize(count);
    parallel_for(static_cast<std::size_t>(count), [&](std::size_t i) {
        Rng rng(seed, i);
        cs.tuples[i] = sample_correspondence(cfg, p, rng, &cs.provenance[i]);
    });
    return cs;
}

CodimSubspaceTuple add_noise(const CodimSubspaceTuple& t, double sigma, std::uint64_t seed) {
    if (sigma < 0.0)
        throw validation_error("noise sigma must be nonnegative");
    if (sigma == 0.0)
        return t;
    Rng rng(seed);
    CodimSubspaceTuple out = t;
    for (Mat& f : out.forms) {
        const double scale = sigma * f.norm() / std::sqrt(static_cast<double>(f.size()));
        f += scale * rng.gaussian_matrix(static_cast<int>(f.rows()), static_cast<int>(f.cols()));
    }
    return out;
}

CorrespondenceSet add_noise(const CorrespondenceSet& cs, double sigma, std::uint64_t seed) {
    if (sigma < 0.0)
        throw validation_error("noise sigma must be nonnegative");
    if (sigma == 0.0)
        return cs;
    CorrespondenceSet out = cs;
    for (std::size_t i = 0; i < out.tuples.size(); ++i) {
        Rng rng(seed, i);
        for (Mat& f : out.tuples[i].forms) {
            const double scale = sigma * f.norm() / std::sqrt(static_cast<double>(f.size()));
            f += scale * rng.gaussian_matrix(static_cast<int>(f.rows()), static_cast<int>(f.cols()));
        }
    }
    return out;
}

namespace {

// Replaces each form matrix by an orthonormal basis of its row space. The
// subspaces (and the system's nullspace) are unchanged, but Plücker vectors
// of orthonormal rows have exact unit norm, so near-parallel form rows no
// longer amplify roundoff after row normalization.
CodimSubspaceTuple orthonormalize_forms(const CodimSubspaceTuple& t) {
    CodimSubspaceTuple out;
    out.forms.reserve(t.forms.size());
    for (const Mat& f : t.forms) {
        Eigen::HouseholderQR<Mat> qr(f.transpose());
        Mat q = qr.householderQ();
        out.forms.push_back(q.leftCols(f.rows()).transpose());
    }
    return out;
}

} // namespace

EstimateResult estimate_tensor(const CorrespondenceSet& cs, double tol) {
    validate(cs);
    const TensorLayout lay = make_layout(cs.profile);
    const long long d = lay.size();
    const long long rows = static_cast<long long>(cs.tuples.size());
    if (rows < d - 1)
        throw validation_error("need at least " + std::to_string(d - 1) + " tuples, got " +
                               std::to_string(rows));

    Mat coeff(rows, d);
    parallel_for(static_cast<std::size_t>(rows), [&](std::size_t i) {
        Vec row = incidence_row(lay, orthonormalize_forms(cs.tuples[i]));
        const double norm = row.norm();
        if (norm > 0.0)
            row /= norm;
        coeff.row(static_cast<long long>(i)) = row.transpose();
    });

    Eigen::BDCSVD<Mat> svd(coeff, Eigen::ComputeFullV);
    const Vec& sv = svd.singularValues();
    // Effective spectrum padded with implicit zeros up to the column count.
    Vec eff = Vec::Zero(d);
    eff.head(sv.size()) = sv;
    const double smax = eff(0);
    if (smax <= 0.0)
        throw numeric_error("estimation system is identically zero");

    EstimateDiagnostics diag;
    diag.sigma_last = eff(d - 1);
    diag.sigma_second_last = eff(d - 2);
    for (long long j = 0; j < d; ++j)
        if (eff(j) <= tol * smax)
            ++diag.corank;
    if (diag.corank >= 2)
        throw numeric_error("estimation system has a nullspace of dimension " +
                            std::to_string(diag.corank) +
                            ": correspondences are insufficient or degenerate");

    GrassmannTensor t{cs.profile, canonicalize(svd.matrixV().col(d - 1))};
    diag.row_residuals.resize(rows);
    for (long long i = 0; i < rows; ++i)
        diag.row_residuals[i] = std::abs(coeff.row(i).dot(t.entries));
    return EstimateResult{std::move(t), std::move(diag)};
}

CorrespondenceSet expand_point_tuples(const Profile& p,
                                      const std::vector<std::vector<Vec>>& points, int k,
                                      std::uint64_t seed) {
    validate(p);
    if (k < 1)
        throw validation_error("expansion factor must be at least 1");
    CorrespondenceSet cs;
    cs.profile = p;
    cs.tuples.resize(points.size() * static_cast<std::size_t>(k));
    for (std::size_t idx = 0; idx < points.size(); ++idx) {
        const auto& x = points[idx];
        if (static_cast<int>(x.size()) != p.r())
            throw validation_error("point tuple " + std::to_string(idx + 1) +
                                   " has wrong camera count");
        for (int i = 0; i < p.r(); ++i)
            if (x[i].size() != p.m[i] + 1 || x[i].norm() <= 0.0)
                throw validation_error("point tuple " + std::to_string(idx + 1) +
                                       " has a bad image point");
        for (int j = 0; j < k; ++j) {
            Rng rng(seed, idx * static_cast<std::size_t>(k) + j);
            CodimSubspaceTuple& u = cs.tuples[idx * static_cast<std::size_t>(k) + j];
            u.forms.resize(p.r());
            for (int i = 0; i < p.r(); ++i) {
                for (int attempt = 0;; ++attempt) {
                    if (forms_through(x[i], p.alpha[i], rng, u.forms[i]))
                        break;
                    if (attempt >= 1000)
                        throw numeric_error("failed to draw forms through an image point");
                }
            }
        }
    }
    return cs;
}

} // namespace gt
