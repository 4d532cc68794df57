#include "gt/kernels.hpp"

#include <cstdlib>
#include <mutex>

namespace gt::kernels {

// ---------------------------------------------------------------------------
// Scalar reference kernels. These define the semantics; SIMD variants must
// agree with them up to floating-point reassociation.
// ---------------------------------------------------------------------------

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        acc += a[i] * b[i];
    return acc;
}

double sumsq_scalar(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        acc += x[i] * x[i];
    return acc;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        y[i] += a * x[i];
}

void scale_copy_scalar(double* dst, const double* x, double s, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        dst[i] = s * x[i];
}

const Backend* g_active = nullptr;
std::once_flag g_once;

const Backend* detect() {
#if defined(__x86_64__) || defined(_M_X64)
#if defined(GT_HAVE_AVX2_BACKEND)
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
        return &avx2_backend();
#endif
#elif defined(__aarch64__)
#if defined(GT_HAVE_NEON_BACKEND)
    return &neon_backend();
#endif
#endif
    return &scalar_backend();
}

void resolve() {
    const Backend* picked = detect();
    if (const char* env = std::getenv("GTENSOR_KERNELS")) {
        const std::string want(env);
        if (want == "scalar")
            picked = &scalar_backend();
#if defined(__x86_64__) && defined(GT_HAVE_AVX2_BACKEND)
        else if (want == "avx2" && __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
            picked = &avx2_backend();
#endif
#if defined(__aarch64__) && defined(GT_HAVE_NEON_BACKEND)
        else if (want == "neon")
            picked = &neon_backend();
#endif
        // unknown / unsupported values fall back to detection
    }
    g_active = picked;
}

} // namespace

const Backend& scalar_backend() {
    static const Backend b{"scalar", dot_scalar, sumsq_scalar, axpy_scalar, scale_copy_scalar};
    return b;
}

const Backend& active() {
    std::call_once(g_once, resolve);
    return *g_active;
}

bool set_backend(const std::string& name) {
    active(); // make sure detection ran first
    if (name == "auto") {
        g_active = detect();
        return true;
    }
    if (name == "scalar") {
        g_active = &scalar_backend();
        return true;
    }
#if defined(__x86_64__) && defined(GT_HAVE_AVX2_BACKEND)
    if (name == "avx2" && __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
        g_active = &avx2_backend();
        return true;
    }
#endif
#if defined(__aarch64__) && defined(GT_HAVE_NEON_BACKEND)
    if (name == "neon") {
        g_active = &neon_backend();
        return true;
    }
#endif
    return false;
}

void tensor_product_row(const double* const* parts, const int* lens, int count, double* out) {
    if (count == 0) {
        out[0] = 1.0;
        return;
    }
    thread_local std::vector<double> scratch;
    std::size_t total = 1;
    for (int i = 0; i < count; ++i)
        total *= static_cast<std::size_t>(lens[i]);
    scratch.resize(total);

    // Ping-pong expansion; the final pass lands in out.
    double* cur = out;
    double* nxt = scratch.data();
    if (count % 2 == 0)
        std::swap(cur, nxt);

    for (int k = 0; k < lens[0]; ++k)
        cur[static_cast<std::size_t>(k)] = parts[0][k];
    std::size_t len = static_cast<std::size_t>(lens[0]);
    for (int i = 1; i < count; ++i) {
        const std::size_t ci = static_cast<std::size_t>(lens[i]);
        for (std::size_t j = 0; j < len; ++j)
            scale_copy(nxt + j * ci, parts[i], cur[j], ci);
        len *= ci;
        std::swap(cur, nxt);
    }
    // cur == out here by construction of the initial swap parity
}

} // namespace gt::kernels
