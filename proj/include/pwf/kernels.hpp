#pragma once
// Data-parallel inner-loop kernels with a scalar reference path and an AVX2
// path selected at runtime.  Both paths perform the arithmetic in the same
// order (no FMA contraction), so results are bit-identical across paths.

#include <cstddef>
#include <string>

namespace pwf::kern {

enum class Isa { scalar, avx2 };

bool avx2_supported();
Isa active();
// Force a path (tests, PWF_SIMD=scalar env override). Requesting avx2 on a
// machine without it falls back to scalar.
void force(Isa isa);
std::string isa_name(Isa isa);

// y[i] = a[i] + b[i]
void add(const float* a, const float* b, float* y, std::size_t n);
void add(const double* a, const double* b, double* y, std::size_t n);
// y[i] = a[i] - b[i]
void sub(const float* a, const float* b, float* y, std::size_t n);
void sub(const double* a, const double* b, double* y, std::size_t n);
// y[i] = a[i] * b[i]
void mul(const float* a, const float* b, float* y, std::size_t n);
void mul(const double* a, const double* b, double* y, std::size_t n);
// y[i] = s * a[i]
void scale(const float* a, float s, float* y, std::size_t n);
void scale(const double* a, double s, double* y, std::size_t n);
// y[i] += s * x[i], rounded as round(round(s*x)+y) on every path
void axpy(float* y, float s, const float* x, std::size_t n);
void axpy(double* y, double s, const double* x, std::size_t n);

} // namespace pwf::kern
