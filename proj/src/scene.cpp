#include "gt/scene.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

namespace gt {

namespace {

Vec singular_values(const Mat& m) {
    return Eigen::BDCSVD<Mat>(m).singularValues();
}

// Margin for "rank(m) >= expected": ratio of the expected-th singular value
// to the largest.
GenericityCheck rank_check(std::string name, const Mat& m, int expected, double tol) {
    GenericityCheck c;
    c.name = std::move(name);
    const Vec sv = singular_values(m);
    if (sv.size() < expected || sv(0) <= 0.0) {
        c.margin = 0.0;
        c.pass = false;
        return c;
    }
    c.margin = sv(expected - 1) / sv(0);
    c.pass = c.margin > tol;
    return c;
}

} // namespace

int CameraConfig::stacked_rows() const {
    int rows = 0;
    for (int mi : m)
        rows += mi + 1;
    return rows;
}

Mat CameraConfig::stacked() const {
    Mat s(stacked_rows(), n + 1);
    int row = 0;
    for (const Mat& c : cameras) {
        s.middleRows(row, c.rows()) = c;
        row += static_cast<int>(c.rows());
    }
    return s;
}

void validate_shape(const CameraConfig& cfg) {
    if (cfg.n < 1)
        throw validation_error("config needs n >= 1");
    if (cfg.m.empty())
        throw validation_error("config needs at least one camera");
    if (cfg.m.size() != cfg.cameras.size())
        throw validation_error("config has " + std::to_string(cfg.m.size()) + " target dims but " +
                               std::to_string(cfg.cameras.size()) + " cameras");
    for (int i = 0; i < cfg.r(); ++i) {
        const int mi = cfg.m[i];
        if (mi < 1 || mi >= cfg.n)
            throw validation_error("camera " + std::to_string(i + 1) + " needs 1 <= m_i < n, got m_i=" +
                                   std::to_string(mi) + " with n=" + std::to_string(cfg.n));
        const Mat& c = cfg.cameras[i];
        if (c.rows() != mi + 1 || c.cols() != cfg.n + 1)
            throw validation_error("camera " + std::to_string(i + 1) + " must be " +
                                   std::to_string(mi + 1) + "x" + std::to_string(cfg.n + 1));
        require_finite(c, "camera");
    }
}

GenericityReport validate_genericity(const CameraConfig& cfg, double tol) {
    validate_shape(cfg);
    GenericityReport rep;
    for (int i = 0; i < cfg.r(); ++i)
        rep.checks.push_back(rank_check("camera_" + std::to_string(i + 1) + "_surjective",
                                        cfg.cameras[i], cfg.m[i] + 1, tol));
    if (cfg.stacked_rows() >= cfg.n + 1)
        rep.checks.push_back(rank_check("stacked_injective", cfg.stacked(), cfg.n + 1, tol));
    for (int i = 0; i < cfg.r(); ++i) {
        for (int j = i + 1; j < cfg.r(); ++j) {
            Mat pair(cfg.m[i] + cfg.m[j] + 2, cfg.n + 1);
            pair.topRows(cfg.m[i] + 1) = cfg.cameras[i];
            pair.bottomRows(cfg.m[j] + 1) = cfg.cameras[j];
            const int expected = std::min(cfg.m[i] + cfg.m[j] + 2, cfg.n + 1);
            rep.checks.push_back(rank_check("pair_" + std::to_string(i + 1) + "_" +
                                                std::to_string(j + 1) + "_position",
                                            pair, expected, tol));
        }
    }
    for (const auto& c : rep.checks)
        rep.pass = rep.pass && c.pass;
    return rep;
}

CameraConfig random_config(int n, const std::vector<int>& m, Rng& rng) {
    CameraConfig cfg;
    cfg.n = n;
    cfg.m = m;
    cfg.cameras.resize(m.size());
    if (n < 1 || m.empty())
        throw validation_error("random_config needs n >= 1 and at least one camera");
    for (int mi : m)
        if (mi < 1 || mi >= n)
            throw validation_error("random_config needs 1 <= m_i < n, got m_i=" +
                                   std::to_string(mi) + " with n=" + std::to_string(n));
    for (int attempt = 0; attempt < 1000; ++attempt) {
        for (std::size_t i = 0; i < m.size(); ++i)
            cfg.cameras[i] = rng.gaussian_matrix(m[i] + 1, n + 1);
        if (validate_genericity(cfg).pass)
            return cfg;
    }
    throw numeric_error("random_config failed genericity 1000 times in a row");
}

CameraConfig random_config(int n, const std::vector<int>& m, std::uint64_t seed) {
    Rng rng(seed);
    return random_config(n, m, rng);
}

std::vector<Vec> focal_basis(const Mat& camera, double tol) {
    require_finite(camera, "camera");
    return nullspace(camera, tol);
}

std::vector<Vec> project(const CameraConfig& cfg, const ScenePoint& z, double tol) {
    validate_shape(cfg);
    if (z.size() != cfg.n + 1 || z.norm() <= 0.0)
        throw validation_error("scene point must be a nonzero (n+1)-vector");
    std::vector<Vec> images;
    images.reserve(cfg.cameras.size());
    for (int i = 0; i < cfg.r(); ++i) {
        Vec x = cfg.cameras[i] * z;
        if (x.norm() <= tol * cfg.cameras[i].norm() * z.norm())
            throw numeric_error("point lies on the focal locus of camera " + std::to_string(i + 1));
        images.push_back(std::move(x));
    }
    return images;
}

CameraConfig apply_homography(const CameraConfig& cfg, const Mat& h) {
    validate_shape(cfg);
    if (h.rows() != cfg.n + 1 || h.cols() != cfg.n + 1)
        throw validation_error("homography must be (n+1)x(n+1)");
    require_finite(h, "homography");
    if (rank(h) < cfg.n + 1)
        throw validation_error("homography is singular");
    CameraConfig out = cfg;
    for (auto& c : out.cameras)
        c = c * h;
    return out;
}

ScenePoint random_point(int n, Rng& rng) {
    while (true) {
        Vec z = rng.gaussian_vector(n + 1);
        if (z.norm() > 1e-6)
            return z;
    }
}

} // namespace gt
