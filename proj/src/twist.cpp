#include "gt/twist.hpp"

#include <algorithm>
#include <map>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace gt {

void require_twist_shape(const CameraConfig& cfg) {
    validate_shape(cfg);
    if (cfg.r() != cfg.n + 1)
        throw validation_error("need n+1 cameras, got " + std::to_string(cfg.r()));
    for (int mi : cfg.m)
        if (mi != 1)
            throw validation_error("need every target one-dimensional (m = (1,...,1))");
}

Profile twist_profile(const CameraConfig& cfg) {
    require_twist_shape(cfg);
    return Profile{cfg.n, cfg.m, std::vector<int>(cfg.m.size(), 1)};
}

CameraConfig dual_config(const CameraConfig& cfg) {
    require_twist_shape(cfg);
    const Mat s = cfg.stacked();
    if (rank(s) < cfg.n + 1)
        throw numeric_error("stacked camera matrix is rank deficient");
    const auto kernel = nullspace(s.transpose());
    if (static_cast<int>(kernel.size()) != cfg.n + 1)
        throw numeric_error("dual construction expects a kernel of dimension n+1");
    Mat dual_stack(2 * (cfg.n + 1), cfg.n + 1);
    for (int j = 0; j < cfg.n + 1; ++j)
        dual_stack.col(j) = kernel[j];
    CameraConfig dual;
    dual.n = cfg.n;
    dual.m = cfg.m;
    for (int i = 0; i < cfg.n + 1; ++i)
        dual.cameras.push_back(dual_stack.middleRows(2 * i, 2));
    return dual;
}

Vec identify(const Vec& f) {
    if (f.size() != 2 || f.norm() <= 0.0)
        throw validation_error("identify needs a nonzero 2-vector");
    Vec out(2);
    out << f(1), -f(0);
    return out;
}

CameraConfig identified_dual(const CameraConfig& cfg) {
    CameraConfig dual = dual_config(cfg);
    Mat j(2, 2);
    j << 0, 1, -1, 0;
    for (Mat& c : dual.cameras)
        c = j * c;
    return dual;
}

GrassmannTensor transport_tensor(const GrassmannTensor& dual_tensor) {
    const Profile& p = dual_tensor.profile;
    validate(p);
    if (p.r() != p.n + 1 || *std::max_element(p.m.begin(), p.m.end()) != 1)
        throw validation_error("transport needs the square shape m = (1,...,1)");
    const long long d = dual_tensor.entries.size();
    Vec out(d);
    for (long long flat = 0; flat < d; ++flat) {
        // Position bits: last camera fastest; flipping every index is the
        // bitwise complement. Sign is the parity of the original second rows.
        const int ones = __builtin_popcountll(static_cast<unsigned long long>(flat));
        out(d - 1 - flat) = ((ones & 1) ? -1.0 : 1.0) * dual_tensor.entries(flat);
    }
    return GrassmannTensor{p, canonicalize(out)};
}

double hypersurface_value(const GrassmannTensor& dual_tensor, const std::vector<Vec>& x) {
    CodimSubspaceTuple u;
    for (const Vec& xi : x) {
        if (xi.size() != 2 || xi.norm() <= 0.0)
            throw validation_error("hypersurface evaluation needs nonzero 2-vectors");
        u.forms.push_back(xi.normalized().transpose());
    }
    // Plücker coordinates of a single row are the row itself, so this is the
    // plain contraction of the tensor against the point coordinates.
    return incidence_value(dual_tensor, u);
}

HypersurfaceReport verify_same_hypersurface(const CameraConfig& cfg, const CameraConfig& dual,
                                            int samples, std::uint64_t seed, double tol) {
    require_twist_shape(cfg);
    require_twist_shape(dual);
    if (cfg.n != dual.n || samples < 1)
        throw validation_error("hypersurface check needs matching n and samples >= 1");
    const GrassmannTensor dual_tensor = compute_tensor(dual, twist_profile(dual));
    Rng rng(seed);
    HypersurfaceReport rep;
    rep.samples = samples;
    for (int k = 0; k < samples; ++k) {
        for (int attempt = 0;; ++attempt) {
            const Vec z = random_point(cfg.n, rng);
            try {
                const double v = std::abs(hypersurface_value(dual_tensor, project(cfg, z)));
                rep.max_abs = std::max(rep.max_abs, v);
                break;
            } catch (const numeric_error&) {
                if (attempt >= 1000)
                    throw;
            }
        }
    }
    rep.pass = rep.max_abs <= tol;
    return rep;
}

std::vector<std::vector<int>> monomials_of_degree(int vars, int degree) {
    if (vars < 1 || degree < 0)
        throw validation_error("monomials need vars >= 1 and degree >= 0");
    std::vector<std::vector<int>> out;
    std::vector<int> cur(vars, 0);
    auto rec = [&](auto&& self, int pos, int left) -> void {
        if (pos == vars - 1) {
            cur[pos] = left;
            out.push_back(cur);
            return;
        }
        for (int e = left; e >= 0; --e) {
            cur[pos] = e;
            self(self, pos + 1, left - e);
        }
    };
    rec(rec, 0, degree);
    return out;
}

double evaluate_form(const PolyBasis& b, int row, const Vec& x) {
    if (row < 0 || row >= b.dimension())
        throw validation_error("form row out of range");
    if (x.size() != b.vars)
        throw validation_error("form evaluation needs " + std::to_string(b.vars) + " coordinates");
    double acc = 0.0;
    for (std::size_t c = 0; c < b.monomials.size(); ++c) {
        double term = b.coeffs(row, static_cast<int>(c));
        for (int j = 0; j < b.vars; ++j)
            for (int e = 0; e < b.monomials[c][j]; ++e)
                term *= x(j);
        acc += term;
    }
    return acc;
}

namespace {

// Dense polynomial arithmetic over the monomial lists of fixed degrees.
struct MonoTable {
    std::vector<std::vector<std::vector<int>>> monos; // per degree
    std::vector<std::map<std::vector<int>, int>> index;

    MonoTable(int vars, int max_degree) {
        for (int d = 0; d <= max_degree; ++d) {
            monos.push_back(monomials_of_degree(vars, d));
            index.emplace_back();
            for (std::size_t i = 0; i < monos[d].size(); ++i)
                index[d][monos[d][i]] = static_cast<int>(i);
        }
    }
};

// Multiply a degree-g coefficient vector by the linear form with the given
// coefficients.
std::vector<double> multiply_linear(const MonoTable& table, int g, const std::vector<double>& poly,
                                    const Vec& linear) {
    const auto& src = table.monos[g];
    std::vector<double> out(table.monos[g + 1].size(), 0.0);
    std::vector<int> e;
    for (std::size_t i = 0; i < src.size(); ++i) {
        if (poly[i] == 0.0)
            continue;
        for (int k = 0; k < linear.size(); ++k) {
            if (linear(k) == 0.0)
                continue;
            e = src[i];
            ++e[k];
            out[static_cast<std::size_t>(table.index[g + 1].at(e))] += poly[i] * linear(k);
        }
    }
    return out;
}

} // namespace

PolyBasis vanishing_system(const CameraConfig& cfg, int degree, const std::vector<int>& loci) {
    require_twist_shape(cfg);
    if (degree < 1)
        throw validation_error("vanishing system needs degree >= 1");
    for (int i : loci)
        if (i < 1 || i > cfg.r())
            throw validation_error("locus index out of range");

    PolyBasis basis;
    basis.degree = degree;
    basis.vars = cfg.n + 1;
    basis.monomials = monomials_of_degree(cfg.n + 1, degree);
    const int n_monos = static_cast<int>(basis.monomials.size());

    // Z_i has dimension n-2 in P^n, parametrized by ker(s_i) with n-1
    // homogeneous coordinates t.
    const int t_vars = cfg.n - 1;
    if (t_vars < 1)
        throw validation_error("vanishing system needs n >= 2");
    const MonoTable table(t_vars, degree);
    const int rows_per_locus = static_cast<int>(table.monos[degree].size());

    Mat conditions(static_cast<int>(loci.size()) * rows_per_locus, n_monos);
    int block = 0;
    for (int locus : loci) {
        const auto kernel = focal_basis(cfg.cameras[locus - 1]);
        if (static_cast<int>(kernel.size()) != t_vars)
            throw numeric_error("focal locus of camera " + std::to_string(locus) +
                                " has unexpected dimension");
        Mat k(cfg.n + 1, t_vars);
        for (int j = 0; j < t_vars; ++j)
            k.col(j) = kernel[j];
        // Substitute x = K t into each monomial and record the coefficients
        // of the restricted degree-d polynomial in t.
        for (int c = 0; c < n_monos; ++c) {
            std::vector<double> poly{1.0};
            int g = 0;
            for (int j = 0; j <= cfg.n; ++j) {
                for (int e = 0; e < basis.monomials[c][j]; ++e) {
                    poly = multiply_linear(table, g, poly, k.row(j).transpose());
                    ++g;
                }
            }
            for (int t = 0; t < rows_per_locus; ++t)
                conditions(block + t, c) = poly[t];
        }
        block += rows_per_locus;
    }

    std::vector<Vec> kernel_basis;
    if (loci.empty()) {
        for (int c = 0; c < n_monos; ++c) {
            Vec e = Vec::Zero(n_monos);
            e(c) = 1.0;
            kernel_basis.push_back(e);
        }
    } else {
        kernel_basis = nullspace(conditions, 1e-8);
    }
    basis.coeffs.resize(static_cast<int>(kernel_basis.size()), n_monos);
    for (std::size_t i = 0; i < kernel_basis.size(); ++i)
        basis.coeffs.row(static_cast<int>(i)) = kernel_basis[i].transpose();
    return basis;
}

Vec triangulate_dual(const CameraConfig& dual, const std::vector<Vec>& x) {
    require_twist_shape(dual);
    if (static_cast<int>(x.size()) != dual.r())
        throw validation_error("need one image point per camera");
    Mat rows(dual.r(), dual.n + 1);
    for (int i = 0; i < dual.r(); ++i) {
        if (x[i].size() != 2 || x[i].norm() <= 0.0)
            throw validation_error("image points must be nonzero 2-vectors");
        rows.row(i) = x[i].normalized().transpose() * dual.cameras[i];
    }
    Eigen::BDCSVD<Mat> svd(rows, Eigen::ComputeFullV);
    const Vec& sv = svd.singularValues();
    if (sv(sv.size() - 1) > 1e-8 * sv(0) || sv(sv.size() - 2) <= 1e-8 * sv(0))
        throw numeric_error("dual triangulation system does not have a one-dimensional kernel");
    return svd.matrixV().col(dual.n);
}

Vec eval_system(const PolyBasis& basis, const Vec& z) {
    Vec out(basis.dimension());
    for (int i = 0; i < basis.dimension(); ++i)
        out(i) = evaluate_form(basis, i, z);
    return out;
}

CremonaMap make_cremona(const CameraConfig& cfg, const CameraConfig& dual, std::uint64_t seed) {
    require_twist_shape(cfg);
    std::vector<int> all;
    for (int i = 1; i <= cfg.r(); ++i)
        all.push_back(i);
    CremonaMap map;
    map.basis = vanishing_system(cfg, cfg.n, all);
    if (map.basis.dimension() != cfg.n + 1)
        throw numeric_error("vanishing system has dimension " +
                            std::to_string(map.basis.dimension()) + ", expected n+1");

    const int count = cfg.n + 2;
    Rng rng(seed);
    Mat a(cfg.n + 1, count), b(cfg.n + 1, count);
    for (int attempt = 0; attempt < 1000; ++attempt) {
        bool ok = true;
        for (int k = 0; k < count && ok; ++k) {
            Vec z, e, w;
            int tries = 0;
            while (true) {
                if (++tries > 1000)
                    throw numeric_error("could not sample frame points in general position");
                z = random_point(cfg.n, rng);
                try {
                    const auto x = project(cfg, z);
                    e = eval_system(map.basis, z.normalized());
                    if (e.norm() <= 1e-10)
                        continue;
                    w = triangulate_dual(dual, x);
                    break;
                } catch (const numeric_error&) {
                    continue;
                }
            }
            a.col(k) = e / e.norm();
            b.col(k) = w;
        }
        // Frame fit: scale the first n+1 columns so the last point has
        // all-ones coordinates in both frames.
        const Mat ma = a.leftCols(cfg.n + 1), mb = b.leftCols(cfg.n + 1);
        if (rank(ma, 1e-8) < cfg.n + 1 || rank(mb, 1e-8) < cfg.n + 1)
            continue;
        const Vec lam = ma.fullPivLu().solve(a.col(cfg.n + 1));
        const Vec beta = mb.fullPivLu().solve(b.col(cfg.n + 1));
        if (lam.cwiseAbs().minCoeff() < 1e-6 * lam.norm() ||
            beta.cwiseAbs().minCoeff() < 1e-6 * beta.norm()) {
            ok = false;
        }
        if (!ok)
            continue;
        const Mat a_frame = ma * lam.asDiagonal();
        const Mat b_frame = mb * beta.asDiagonal();
        map.h = b_frame * a_frame.inverse();
        return map;
    }
    throw numeric_error("projective frame fit failed repeatedly");
}

Vec cremona_apply(const CremonaMap& map, const Vec& z) {
    if (z.size() != map.basis.vars || z.norm() <= 0.0)
        throw validation_error("cremona_apply needs a nonzero point of P^n");
    const Vec e = eval_system(map.basis, z.normalized());
    if (e.norm() <= 1e-10)
        throw numeric_error("point lies on the base locus of the system");
    return map.h * e;
}

Vec sample_on_form(const PolyBasis& basis, int row, Rng& rng, int max_tries) {
    const int d = basis.degree;
    for (int attempt = 0; attempt < max_tries; ++attempt) {
        const Vec a = rng.gaussian_vector(basis.vars);
        const Vec b = rng.gaussian_vector(basis.vars);
        // Restrict to the line a + t b by interpolation at d+1 nodes.
        Mat vander(d + 1, d + 1);
        Vec vals(d + 1);
        for (int j = 0; j <= d; ++j) {
            const double t = d == 0 ? 0.0 : -1.0 + 2.0 * j / d;
            double power = 1.0;
            for (int c = 0; c <= d; ++c) {
                vander(j, c) = power;
                power *= t;
            }
            vals(j) = evaluate_form(basis, row, a + t * b);
        }
        const Vec coeff = vander.fullPivLu().solve(vals);
        if (std::abs(coeff(d)) <= 1e-10 * coeff.norm())
            continue;
        if (d == 0)
            continue;
        // Companion matrix of the monic polynomial.
        Mat comp = Mat::Zero(d, d);
        for (int i = 1; i < d; ++i)
            comp(i, i - 1) = 1.0;
        for (int i = 0; i < d; ++i)
            comp(i, d - 1) = -coeff(i) / coeff(d);
        Eigen::EigenSolver<Mat> eig(comp);
        for (int i = 0; i < d; ++i) {
            const auto root = eig.eigenvalues()(i);
            if (std::abs(root.imag()) > 1e-8 * (1.0 + std::abs(root.real())))
                continue;
            const Vec p = a + root.real() * b;
            if (p.norm() <= 1e-8)
                continue;
            const double scale = std::pow(p.norm(), d);
            if (std::abs(evaluate_form(basis, row, p)) <= 1e-7 * scale)
                return p;
        }
    }
    throw numeric_error("failed to sample a real point on the form");
}

} // namespace gt
