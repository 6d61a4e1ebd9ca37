#pragma once
// Mixed-radix complex FFT. Power-of-two sizes take an iterative radix-2 fast
// path; other sizes use recursive Cooley-Tukey with an O(n*p) combine per
// prime factor p (a length-23 factor costs O(23^2), which is fine at the
// image sizes this project handles). Twiddles are computed in double and
// cached per length.

#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <utility>
#include <vector>

namespace pwf::fft {

using cd = std::complex<double>;

namespace detail {

struct Plan {
    int n = 0;
    std::vector<cd> w; // w[t] = exp(-2*pi*i*t/n)
    std::vector<int> bitrev; // only for powers of two
};

inline bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

inline const Plan& plan_for(int n) {
    thread_local std::map<int, Plan> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    Plan p;
    p.n = n;
    p.w.resize(n);
    const double step = -2.0 * 3.14159265358979323846 / n;
    for (int t = 0; t < n; ++t) p.w[t] = cd(std::cos(step * t), std::sin(step * t));
    if (is_pow2(n)) {
        p.bitrev.resize(n);
        int lg = 0;
        while ((1 << lg) < n) ++lg;
        for (int i = 0; i < n; ++i) {
            int r = 0;
            for (int b = 0; b < lg; ++b)
                if (i & (1 << b)) r |= 1 << (lg - 1 - b);
            p.bitrev[i] = r;
        }
    }
    return cache.emplace(n, std::move(p)).first->second;
}

inline void fft_pow2(cd* x, int n, bool inverse, const Plan& plan) {
    for (int i = 0; i < n; ++i) {
        int j = plan.bitrev[i];
        if (i < j) std::swap(x[i], x[j]);
    }
    for (int len = 2; len <= n; len <<= 1) {
        const int stride = n / len;
        for (int base = 0; base < n; base += len) {
            for (int k = 0; k < len / 2; ++k) {
                cd w = plan.w[static_cast<std::size_t>(k) * stride];
                if (inverse) w = std::conj(w);
                cd u = x[base + k];
                cd v = x[base + k + len / 2] * w;
                x[base + k] = u + v;
                x[base + k + len / 2] = u - v;
            }
        }
    }
}

inline int smallest_factor(int n) {
    for (int p = 2; p * p <= n; ++p)
        if (n % p == 0) return p;
    return n;
}

inline void fft_general(cd* x, int n, bool inverse, const Plan& plan) {
    if (n == 1) return;
    const int p = smallest_factor(n);
    const int m = n / p;
    // decimate in time by residue mod p
    std::vector<cd> sub(static_cast<std::size_t>(n));
    for (int j = 0; j < p; ++j)
        for (int t = 0; t < m; ++t) sub[static_cast<std::size_t>(j) * m + t] = x[t * p + j];
    for (int j = 0; j < p; ++j) {
        cd* s = sub.data() + static_cast<std::size_t>(j) * m;
        if (is_pow2(m))
            fft_pow2(s, m, inverse, plan_for(m));
        else
            fft_general(s, m, inverse, plan_for(m));
    }
    for (int k = 0; k < n; ++k) {
        cd acc(0.0, 0.0);
        for (int j = 0; j < p; ++j) {
            cd w = plan.w[static_cast<std::size_t>(j) * k % n];
            if (inverse) w = std::conj(w);
            acc += w * sub[static_cast<std::size_t>(j) * m + (k % m)];
        }
        x[k] = acc;
    }
}

} // namespace detail

// In-place unnormalized transform; inverse uses conjugated twiddles and no
// scaling (callers apply unitary 1/sqrt(n) per pass).
inline void transform(cd* x, int n, bool inverse) {
    const auto& plan = detail::plan_for(n);
    if (detail::is_pow2(n))
        detail::fft_pow2(x, n, inverse, plan);
    else
        detail::fft_general(x, n, inverse, plan);
}

// In-place unitary 2-D transform of a row-major H x W complex field.
inline void transform2d(cd* x, int h, int w, bool inverse) {
    std::vector<cd> col(static_cast<std::size_t>(h));
    for (int r = 0; r < h; ++r) transform(x + static_cast<std::size_t>(r) * w, w, inverse);
    for (int c = 0; c < w; ++c) {
        for (int r = 0; r < h; ++r) col[r] = x[static_cast<std::size_t>(r) * w + c];
        transform(col.data(), h, inverse);
        for (int r = 0; r < h; ++r) x[static_cast<std::size_t>(r) * w + c] = col[r];
    }
    const double s = 1.0 / std::sqrt(static_cast<double>(h) * w);
    for (std::size_t i = 0; i < static_cast<std::size_t>(h) * w; ++i) x[i] *= s;
}

} // namespace pwf::fft
