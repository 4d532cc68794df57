#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <vector>

#include "gt/kernels.hpp"
#include "gt/rng.hpp"

namespace gk = gt::kernels;

namespace {

// Sizes chosen to hit every SIMD remainder path (0..vector width and beyond).
const std::vector<std::size_t> kSizes = {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 31, 33, 100, 1000};

std::vector<double> random_buf(gt::Rng& rng, std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v)
        x = rng.normal();
    return v;
}

double dot_loop(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        s += a[i] * b[i];
    return s;
}

} // namespace

TEST_CASE("scalar backend matches straightforward loops") {
    gt::Rng rng(7);
    const auto& sb = gk::scalar_backend();
    for (std::size_t n : kSizes) {
        auto a = random_buf(rng, n);
        auto b = random_buf(rng, n);
        CHECK(sb.dot(a.data(), b.data(), n) == doctest::Approx(dot_loop(a.data(), b.data(), n)).epsilon(1e-14));
        CHECK(sb.sumsq(a.data(), n) == doctest::Approx(dot_loop(a.data(), a.data(), n)).epsilon(1e-14));

        auto y = random_buf(rng, n);
        auto y_ref = y;
        sb.axpy(0.75, a.data(), y.data(), n);
        for (std::size_t i = 0; i < n; ++i)
            y_ref[i] += 0.75 * a[i];
        for (std::size_t i = 0; i < n; ++i)
            CHECK(y[i] == y_ref[i]);

        std::vector<double> dst(n, -1.0);
        sb.scale_copy(dst.data(), a.data(), -2.5, n);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(dst[i] == -2.5 * a[i]);
    }
}

TEST_CASE("active backend agrees with scalar reference") {
    // FMA and reassociation change rounding, so compare at a tight relative
    // tolerance rather than bitwise.
    gt::Rng rng(11);
    const auto& sb = gk::scalar_backend();
    const auto& ab = gk::active();
    INFO("active backend: ", ab.name);
    for (std::size_t n : kSizes) {
        auto a = random_buf(rng, n);
        auto b = random_buf(rng, n);
        const double scale = std::sqrt(sb.sumsq(a.data(), n) * sb.sumsq(b.data(), n)) + 1.0;

        CHECK(std::abs(ab.dot(a.data(), b.data(), n) - sb.dot(a.data(), b.data(), n)) <= 1e-13 * scale);
        CHECK(std::abs(ab.sumsq(a.data(), n) - sb.sumsq(a.data(), n)) <= 1e-13 * scale);

        auto y1 = random_buf(rng, n);
        auto y2 = y1;
        ab.axpy(1.25, a.data(), y1.data(), n);
        sb.axpy(1.25, a.data(), y2.data(), n);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(std::abs(y1[i] - y2[i]) <= 1e-13 * (std::abs(y2[i]) + 1.0));

        std::vector<double> d1(n), d2(n);
        ab.scale_copy(d1.data(), a.data(), 3.5, n);
        sb.scale_copy(d2.data(), a.data(), 3.5, n);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(d1[i] == d2[i]);
    }
}

#if defined(__x86_64__) || defined(_M_X64)
TEST_CASE("avx2 backend agrees with scalar when the cpu has it") {
    if (!__builtin_cpu_supports("avx2") || !__builtin_cpu_supports("fma"))
        return;
    gt::Rng rng(13);
    const auto& sb = gk::scalar_backend();
    const auto& vb = gk::avx2_backend();
    for (std::size_t n : kSizes) {
        auto a = random_buf(rng, n);
        auto b = random_buf(rng, n);
        const double scale = std::sqrt(sb.sumsq(a.data(), n) * sb.sumsq(b.data(), n)) + 1.0;
        CHECK(std::abs(vb.dot(a.data(), b.data(), n) - sb.dot(a.data(), b.data(), n)) <= 1e-13 * scale);
        CHECK(std::abs(vb.sumsq(a.data(), n) - sb.sumsq(a.data(), n)) <= 1e-13 * scale);
    }
}
#endif

TEST_CASE("backend override by name") {
    CHECK(gk::set_backend("scalar"));
    CHECK(std::string(gk::active().name) == "scalar");
    CHECK_FALSE(gk::set_backend("no-such-backend"));
    CHECK(std::string(gk::active().name) == "scalar");
    CHECK(gk::set_backend("auto"));
}

TEST_CASE("tensor_product_row flattens with the last factor fastest") {
    const double a[] = {2.0, -3.0};
    const double b[] = {1.0, 4.0, 5.0};
    const double c[] = {-1.0, 7.0};

    SUBCASE("one factor") {
        const double* parts[] = {b};
        const int lens[] = {3};
        double out[3];
        gk::tensor_product_row(parts, lens, 1, out);
        for (int i = 0; i < 3; ++i)
            CHECK(out[i] == b[i]);
    }
    SUBCASE("two factors") {
        const double* parts[] = {a, b};
        const int lens[] = {2, 3};
        double out[6];
        gk::tensor_product_row(parts, lens, 2, out);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 3; ++j)
                CHECK(out[i * 3 + j] == a[i] * b[j]);
    }
    SUBCASE("three factors") {
        const double* parts[] = {a, b, c};
        const int lens[] = {2, 3, 2};
        double out[12];
        gk::tensor_product_row(parts, lens, 3, out);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 3; ++j)
                for (int k = 0; k < 2; ++k)
                    CHECK(out[(i * 3 + j) * 2 + k] == doctest::Approx(a[i] * b[j] * c[k]).epsilon(1e-15));
    }
    SUBCASE("four factors against a nested-loop oracle") {
        gt::Rng rng(21);
        std::vector<std::vector<double>> f;
        const int lens[] = {3, 2, 4, 3};
        for (int len : lens)
            f.push_back(random_buf(rng, static_cast<std::size_t>(len)));
        const double* parts[] = {f[0].data(), f[1].data(), f[2].data(), f[3].data()};
        std::vector<double> out(3 * 2 * 4 * 3);
        gk::tensor_product_row(parts, lens, 4, out.data());
        std::size_t flat = 0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 2; ++j)
                for (int k = 0; k < 4; ++k)
                    for (int l = 0; l < 3; ++l, ++flat)
                        CHECK(out[flat] ==
                              doctest::Approx(f[0][i] * f[1][j] * f[2][k] * f[3][l]).epsilon(1e-14));
        CHECK(flat == out.size());
    }
}
