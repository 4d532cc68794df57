#include "gt/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "gt/twist.hpp"

namespace gt {

std::optional<PglWitness> pgl_equivalent(const CameraConfig& a, const CameraConfig& b, double tol) {
    validate_shape(a);
    validate_shape(b);
    if (a.n != b.n || a.m != b.m)
        throw validation_error("configs must share (n, m) to be comparable");
    const int n1 = a.n + 1;
    const int r = a.r();

    std::vector<Mat> an(r), bn(r);
    for (int i = 0; i < r; ++i) {
        an[i] = a.cameras[i] / a.cameras[i].norm();
        bn[i] = b.cameras[i] / b.cameras[i].norm();
    }

    int rows = 0;
    for (int mi : a.m)
        rows += (mi + 1) * n1;
    const int cols = n1 * n1 + r;
    Mat sys = Mat::Zero(rows, cols);
    int at = 0;
    for (int i = 0; i < r; ++i) {
        for (int u = 0; u <= a.m[i]; ++u) {
            for (int v = 0; v < n1; ++v) {
                // Equation (a_i K)(u,v) - mu_i b_i(u,v) = 0; K is vectorized
                // column-major.
                for (int w = 0; w < n1; ++w)
                    sys(at, w + v * n1) = an[i](u, w);
                sys(at, n1 * n1 + i) = -bn[i](u, v);
                ++at;
            }
        }
    }

    Eigen::BDCSVD<Mat> svd(sys, Eigen::ComputeFullV);
    const Vec& sv = svd.singularValues();
    const double smax = sv(0);
    if (smax <= 0.0 || sv(sv.size() - 1) > tol * smax)
        return std::nullopt;
    if (sv(sv.size() - 2) <= tol * smax)
        return std::nullopt;

    const Vec sol = svd.matrixV().col(cols - 1);
    Mat k(n1, n1);
    for (int v = 0; v < n1; ++v)
        k.col(v) = sol.segment(v * n1, n1);
    if (rank(k) < n1)
        return std::nullopt;
    for (int i = 0; i < r; ++i)
        if (std::abs(sol(n1 * n1 + i)) <= tol * k.norm())
            return std::nullopt;

    PglWitness w;
    w.h = k;
    double worst = 0.0;
    for (int i = 0; i < r; ++i) {
        const Mat lhs = an[i] * k;
        Eigen::Map<const Vec> lv(lhs.data(), lhs.size());
        Eigen::Map<const Vec> rv(bn[i].data(), bn[i].size());
        worst = std::max(worst, proj_distance(lv, rv));
    }
    if (worst > 10.0 * tol)
        return std::nullopt;
    w.residual = worst;
    for (int i = 0; i < r; ++i) {
        const Mat lhs = a.cameras[i] * k;
        Eigen::Map<const Vec> lv(lhs.data(), lhs.size());
        Eigen::Map<const Vec> rv(b.cameras[i].data(), b.cameras[i].size());
        w.lambdas.push_back(lv.dot(rv) / rv.squaredNorm());
    }
    return w;
}

CameraConfig gauge_fix(const CameraConfig& cfg) {
    validate_shape(cfg);
    const Mat s = cfg.stacked();
    const int n1 = cfg.n + 1;

    // Greedy deterministic pivot: scan stacked rows in order, keep a row when
    // its component orthogonal to the kept span is non-negligible.
    std::vector<int> kept;
    std::vector<Vec> basis;
    for (int g = 0; g < s.rows() && static_cast<int>(kept.size()) < n1; ++g) {
        Vec v = s.row(g).transpose();
        const double norm = v.norm();
        if (norm <= 0.0)
            continue;
        for (const Vec& q : basis)
            v -= q.dot(v) * q;
        if (v.norm() > 1e-9 * norm) {
            kept.push_back(g);
            basis.push_back(v / v.norm());
        }
    }
    if (static_cast<int>(kept.size()) < n1)
        throw numeric_error("stacked matrix has no invertible row selection");

    Mat block(n1, n1);
    for (int i = 0; i < n1; ++i)
        block.row(i) = s.row(kept[i]);
    const Mat inv = block.partialPivLu().inverse();
    CameraConfig out = cfg;
    for (Mat& c : out.cameras)
        c = c * inv;
    return out;
}

Vec config_to_theta(const CameraConfig& cfg) {
    const CameraConfig fixed = gauge_fix(cfg);
    const Mat s = fixed.stacked();
    const int n1 = cfg.n + 1;
    const int free_rows = static_cast<int>(s.rows()) - n1;
    if (free_rows < 0)
        throw validation_error("config has fewer stacked rows than n+1");
    Vec theta(free_rows * n1);
    for (int i = 0; i < free_rows; ++i)
        theta.segment(i * n1, n1) = s.row(n1 + i).transpose();
    return theta;
}

CameraConfig theta_to_config(int n, const std::vector<int>& m, const Vec& theta) {
    CameraConfig cfg;
    cfg.n = n;
    cfg.m = m;
    int total = 0;
    for (int mi : m)
        total += mi + 1;
    const int n1 = n + 1;
    if (theta.size() != (total - n1) * n1)
        throw validation_error("theta has wrong length for this shape");
    Mat s(total, n1);
    s.topRows(n1) = Mat::Identity(n1, n1);
    for (int i = 0; i < total - n1; ++i)
        s.row(n1 + i) = theta.segment(i * n1, n1).transpose();
    int at = 0;
    for (int mi : m) {
        cfg.cameras.push_back(s.middleRows(at, mi + 1));
        at += mi + 1;
    }
    return cfg;
}

namespace {

// Minor evaluation over the gauge-fixed stack, with the analytic Jacobian in
// the free entries: the derivative of a minor with respect to one of its
// entries is the corresponding cofactor.
struct ThetaEvaluator {
    TensorLayout lay;
    int n1;
    int total_rows;

    explicit ThetaEvaluator(const Profile& p) : lay(make_layout(p)), n1(p.n + 1) {
        total_rows = 0;
        for (int mi : p.m)
            total_rows += mi + 1;
    }

    int param_count() const { return (total_rows - n1) * n1; }

    Mat stack(const Vec& theta) const {
        Mat s(total_rows, n1);
        s.topRows(n1) = Mat::Identity(n1, n1);
        for (int i = 0; i < total_rows - n1; ++i)
            s.row(n1 + i) = theta.segment(i * n1, n1).transpose();
        return s;
    }

    // Returns false when the tensor vanishes (degenerate stack). that gets
    // the unit tensor; jac, when requested, its Jacobian on the unit sphere.
    bool eval(const Vec& theta, Vec& that, Mat* jac) const {
        const Mat s = stack(theta);
        const long long d = lay.size();
        Vec raw(d);
        Mat jraw;
        if (jac)
            jraw = Mat::Zero(d, param_count());

        Mat sub(n1, n1);
        std::vector<int> global(n1);
        std::vector<int> pos(lay.row_sets.size(), 0);
        long long flat = 0;
        do {
            int row = 0;
            for (std::size_t i = 0; i < pos.size(); ++i) {
                for (int idx : lay.row_sets[i][pos[i]].idx) {
                    global[row] = lay.block_offsets[i] + idx - 1;
                    sub.row(row) = s.row(global[row]);
                    ++row;
                }
            }
            raw(flat) = det_small(sub);
            if (jac) {
                const Mat cof = cofactor_matrix(sub);
                for (int rr = 0; rr < n1; ++rr) {
                    const int free_row = global[rr] - n1;
                    if (free_row < 0)
                        continue;
                    for (int v = 0; v < n1; ++v)
                        jraw(flat, free_row * n1 + v) = cof(rr, v);
                }
            }
            ++flat;
        } while (lay.next(pos));

        const double norm = raw.norm();
        if (!(norm > 0.0) || !raw.allFinite())
            return false;
        that = raw / norm;
        if (jac)
            *jac = (jraw - that * (that.transpose() * jraw)) / norm;
        return true;
    }
};

double sign_of(double x) {
    return x < 0.0 ? -1.0 : 1.0;
}

} // namespace

Vec tensor_at_theta(const Profile& p, const Vec& theta) {
    const ThetaEvaluator ev(p);
    if (theta.size() != ev.param_count())
        throw validation_error("theta has wrong length for this profile");
    Vec that;
    if (!ev.eval(theta, that, nullptr))
        throw numeric_error("tensor vanishes at this parameter point");
    return that;
}

Mat tensor_jacobian_at_theta(const Profile& p, const Vec& theta) {
    const ThetaEvaluator ev(p);
    if (theta.size() != ev.param_count())
        throw validation_error("theta has wrong length for this profile");
    Vec that;
    Mat jac;
    if (!ev.eval(theta, that, &jac))
        throw numeric_error("tensor vanishes at this parameter point");
    return jac;
}

LmRun lm_refine(const GrassmannTensor& target, const Vec& theta0, const LmOptions& opts) {
    validate(target.profile);
    const ThetaEvaluator ev(target.profile);
    if (theta0.size() != ev.param_count())
        throw validation_error("theta has wrong length for this profile");
    if (target.entries.size() != ev.lay.size())
        throw validation_error("tensor entry count does not match its profile");
    const Vec goal = target.entries / target.entries.norm();

    LmRun run;
    run.theta = theta0;
    run.residual = std::numeric_limits<double>::infinity();

    Vec that;
    Mat jac;
    if (!ev.eval(run.theta, that, &jac))
        return run;
    run.evaluable = true;

    double lambda = opts.lambda0;
    Vec residual = that - sign_of(that.dot(goal)) * goal;
    run.residual = residual.norm();

    const int pcount = ev.param_count();
    for (int iter = 0; iter < opts.max_iters; ++iter) {
        if (run.residual < opts.residual_tol)
            break;
        const Mat jtj = jac.transpose() * jac;
        const Vec grad = jac.transpose() * residual;
        bool accepted = false;
        Vec step;
        while (lambda < 1e12) {
            step = (jtj + lambda * Mat::Identity(pcount, pcount)).ldlt().solve(-grad);
            const Vec trial = run.theta + step;
            Vec that_trial;
            if (ev.eval(trial, that_trial, nullptr)) {
                const Vec res_trial = that_trial - sign_of(that_trial.dot(goal)) * goal;
                if (res_trial.norm() < run.residual) {
                    run.theta = trial;
                    run.residual = res_trial.norm();
                    lambda = std::max(lambda * opts.lambda_down, 1e-12);
                    accepted = true;
                    break;
                }
            }
            lambda *= opts.lambda_up;
        }
        if (!accepted)
            break;
        run.iters = iter + 1;
        if (step.norm() < opts.step_tol)
            break;
        if (!ev.eval(run.theta, that, &jac))
            break;
        residual = that - sign_of(that.dot(goal)) * goal;
    }
    return run;
}

ReconstructionOutcome reconstruct_from_tensor(const GrassmannTensor& a, int restarts,
                                              std::uint64_t seed, const LmOptions& opts) {
    validate(a.profile);
    if (restarts < 1)
        throw validation_error("need at least one restart");
    const ThetaEvaluator ev(a.profile);
    if (a.entries.size() != ev.lay.size())
        throw validation_error("tensor entry count does not match its profile");

    ReconstructionOutcome out;
    out.restarts = restarts;
    out.best_residual = std::numeric_limits<double>::infinity();

    struct Candidate {
        CameraConfig config;
        double residual;
        int restart;
    };
    std::vector<Candidate> candidates;
    for (int k = 0; k < restarts; ++k) {
        Rng rng(seed, static_cast<std::uint64_t>(k));
        const Vec theta0 = rng.gaussian_vector(ev.param_count());
        const LmRun run = lm_refine(a, theta0, opts);
        if (!run.evaluable)
            continue;
        out.best_residual = std::min(out.best_residual, run.residual);
        if (run.residual > 1e-6)
            continue;
        CameraConfig config = theta_to_config(a.profile.n, a.profile.m, run.theta);
        if (!validate_genericity(config).pass)
            continue;
        candidates.push_back(Candidate{std::move(config), run.residual, k});
    }

    std::sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
        return x.residual != y.residual ? x.residual < y.residual : x.restart < y.restart;
    });
    for (auto& c : candidates) {
        bool fresh = true;
        for (const auto& rep : out.orbits) {
            if (pgl_equivalent(rep.config, c.config, 1e-6)) {
                fresh = false;
                break;
            }
        }
        if (fresh)
            out.orbits.push_back(
                ReconstructionResult{std::move(c.config), c.residual, c.restart, ""});
    }
    out.converged = !out.orbits.empty();

    // In the square case the fiber has a twisted companion; label orbits
    // relative to the best one.
    const bool square = a.profile.r() == a.profile.n + 1 &&
                        *std::max_element(a.profile.m.begin(), a.profile.m.end()) == 1;
    if (square && !out.orbits.empty()) {
        out.orbits[0].orbit_label = "primary";
        CameraConfig twin;
        bool have_twin = false;
        try {
            twin = identified_dual(out.orbits[0].config);
            have_twin = true;
        } catch (const numeric_error&) {
        }
        for (std::size_t j = 1; j < out.orbits.size(); ++j)
            if (have_twin && pgl_equivalent(out.orbits[j].config, twin, 1e-6))
                out.orbits[j].orbit_label = "twisted";
    }
    return out;
}

FactorizationResult reconstruct_from_points(const std::vector<std::vector<Vec>>& tuples, int n,
                                            const std::vector<int>& m, int iters) {
    const int r = static_cast<int>(m.size());
    const int count = static_cast<int>(tuples.size());
    if (n < 1 || r < 1 || iters < 1)
        throw validation_error("need n >= 1, cameras and iterations");
    if (count < n + 2)
        throw validation_error("need at least n+2 point tuples");
    int total = 0;
    for (int mi : m)
        total += mi + 1;
    std::vector<int> offsets(r);
    for (int i = 0, at = 0; i < r; ++i) {
        offsets[i] = at;
        at += m[i] + 1;
    }

    Mat images(total, count);
    for (int k = 0; k < count; ++k) {
        if (static_cast<int>(tuples[k].size()) != r)
            throw validation_error("point tuple " + std::to_string(k + 1) +
                                   " has wrong camera count");
        for (int i = 0; i < r; ++i) {
            const Vec& x = tuples[k][i];
            if (x.size() != m[i] + 1 || x.norm() <= 0.0)
                throw validation_error("point tuple " + std::to_string(k + 1) +
                                       " has a bad image point");
            images.block(offsets[i], k, m[i] + 1, 1) = x / x.norm();
        }
    }

    const int n1 = n + 1;
    Mat depths = Mat::Ones(r, count);
    Mat cams, points;
    FactorizationResult result;
    for (int it = 0; it < iters; ++it) {
        // Scale balancing keeps the homogeneous depths from drifting.
        for (int k = 0; k < count; ++k) {
            const double norm = depths.col(k).norm();
            if (norm > 0.0)
                depths.col(k) /= norm;
        }
        for (int i = 0; i < r; ++i) {
            const double norm = depths.row(i).norm();
            if (norm > 0.0)
                depths.row(i) /= norm;
        }

        Mat w(total, count);
        for (int i = 0; i < r; ++i)
            for (int k = 0; k < count; ++k)
                w.block(offsets[i], k, m[i] + 1, 1) =
                    depths(i, k) * images.block(offsets[i], k, m[i] + 1, 1);

        Eigen::BDCSVD<Mat> svd(w, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const Vec& sv = svd.singularValues();
        result.degenerate = sv.size() < n1 || sv(n1 - 1) <= 1e-9 * sv(0);
        const Vec scale = sv.head(n1).cwiseSqrt();
        cams = svd.matrixU().leftCols(n1) * scale.asDiagonal();
        points = scale.asDiagonal() * svd.matrixV().leftCols(n1).transpose();
        result.iters_used = it + 1;

        double err = 0.0;
        for (int i = 0; i < r; ++i) {
            for (int k = 0; k < count; ++k) {
                const Vec proj = cams.middleRows(offsets[i], m[i] + 1) * points.col(k);
                const Vec x = images.block(offsets[i], k, m[i] + 1, 1);
                depths(i, k) = x.dot(proj);
                err += proj.norm() > 0.0 ? proj_distance(x, proj) : std::sqrt(2.0);
            }
        }
        const double prev = result.residual;
        result.residual = err / (r * count);
        if (result.degenerate)
            break;
        // Fixed point: either the residual bottomed out or it stalled (noisy
        // data plateaus at the noise level).
        if (result.residual < 1e-14 ||
            (it > 0 && std::abs(prev - result.residual) <= 1e-14 + 1e-9 * result.residual)) {
            result.converged = true;
            break;
        }
    }

    result.config.n = n;
    result.config.m = m;
    for (int i = 0; i < r; ++i)
        result.config.cameras.push_back(cams.middleRows(offsets[i], m[i] + 1));
    for (int k = 0; k < count; ++k)
        result.points.push_back(points.col(k));
    return result;
}

int tensor_map_jacobian_rank(const CameraConfig& cfg, const Profile& p, double h) {
    if (h <= 0.0)
        throw validation_error("finite-difference step must be positive");
    require_match(p, cfg);
    CameraConfig base = cfg;
    for (Mat& c : base.cameras)
        c /= c.norm();

    const Vec t0 = canonicalize(compute_tensor_raw(base, p));
    const TensorLayout lay = make_layout(p);
    int params = 0;
    for (int mi : p.m)
        params += (mi + 1) * (p.n + 1);

    Mat jac(lay.size(), params);
    int col = 0;
    for (int i = 0; i < base.r(); ++i) {
        for (int u = 0; u <= p.m[i]; ++u) {
            for (int v = 0; v <= p.n; ++v, ++col) {
                auto shifted = [&](double delta) {
                    CameraConfig c = base;
                    c.cameras[i](u, v) += delta;
                    Vec t = compute_tensor_raw(c, p);
                    t /= t.norm();
                    // Align the sign to the base tensor; the canonical
                    // first-entry rule can flip under perturbation.
                    if (t.dot(t0) < 0.0)
                        t = -t;
                    return t;
                };
                jac.col(col) = (shifted(h) - shifted(-h)) / (2.0 * h);
            }
        }
    }
    return rank(jac, 1e-6);
}

} // namespace gt
