#pragma once

#include <cstddef>
#include <string>
#include <vector>

// Runtime-dispatched arithmetic kernels for the hot inner loops: tensor
// contraction (dot), row normalization (sumsq), Jacobian accumulation (axpy)
// and Kronecker row expansion (scale_copy). A scalar reference implementation
// always exists; AVX2/NEON variants are selected at startup when the CPU
// supports them. GTENSOR_KERNELS=scalar|avx2|neon|auto overrides detection.
// SIMD variants are equivalence-tested against the scalar reference.

namespace gt::kernels {

struct Backend {
    const char* name;
    double (*dot)(const double* a, const double* b, std::size_t n);
    double (*sumsq)(const double* x, std::size_t n);
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    void (*scale_copy)(double* dst, const double* x, double s, std::size_t n);
};

const Backend& scalar_backend();
#if defined(__x86_64__) || defined(_M_X64)
const Backend& avx2_backend();
#endif
#if defined(__aarch64__)
const Backend& neon_backend();
#endif

// Active backend (detection + env override, resolved once).
const Backend& active();

// Force a backend by name; returns false if unknown or unsupported here.
bool set_backend(const std::string& name);

inline double dot(const double* a, const double* b, std::size_t n) { return active().dot(a, b, n); }
inline double sumsq(const double* x, std::size_t n) { return active().sumsq(x, n); }
inline void axpy(double a, const double* x, double* y, std::size_t n) { active().axpy(a, x, y, n); }
inline void scale_copy(double* dst, const double* x, double s, std::size_t n) {
    active().scale_copy(dst, x, s, n);
}

// Flattened tensor product of small vectors: out has length prod(lens), with
// the last factor fastest. This is the row layout shared by tensor entries
// and incidence rows.
void tensor_product_row(const double* const* parts, const int* lens, int count, double* out);

} // namespace gt::kernels
