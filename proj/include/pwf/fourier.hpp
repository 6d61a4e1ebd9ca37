#pragma once
// Orthonormal 2-D FFT of real fields with Hermitian half-plane storage,
// tiled (windowed) transforms, and radial frequency masks.

#include "pwf/fft.hpp"
#include "pwf/tensor.hpp"

#include <complex>
#include <cstdint>
#include <vector>

namespace pwf::fourier {

using cd = std::complex<double>;

// Half-plane spectrum of one real H x W field under unitary normalization.
struct Spectrum {
    int h = 0, w = 0;                 // spatial shape
    std::vector<cd> bins;             // h x (w/2+1), row-major

    int wh() const { return w / 2 + 1; }
    cd& at(int v, int u) { return bins[static_cast<std::size_t>(v) * wh() + u]; }
    const cd& at(int v, int u) const { return bins[static_cast<std::size_t>(v) * wh() + u]; }

    // Value of the implied full-plane spectrum at (v,u), u in [0,w).
    cd full(int v, int u) const {
        if (u < wh()) return at(v, u);
        return std::conj(at((h - v) % h, (w - u) % w));
    }
    // Multiplicity of a stored bin when summing over the implied full plane.
    int fold_weight(int u) const {
        if (u == 0) return 1;
        if (w % 2 == 0 && u == w / 2) return 1;
        return 2;
    }
};

// ---- full-plane complex helpers ----

inline std::vector<cd> to_complex(const double* x, int h, int w) {
    std::vector<cd> buf(static_cast<std::size_t>(h) * w);
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = cd(x[i], 0.0);
    return buf;
}

// ---- half-plane transforms of a single channel plane ----

inline Spectrum rfft2_plane(const double* x, int h, int w) {
    auto buf = to_complex(x, h, w);
    fft::transform2d(buf.data(), h, w, false);
    Spectrum s;
    s.h = h;
    s.w = w;
    s.bins.resize(static_cast<std::size_t>(h) * s.wh());
    for (int v = 0; v < h; ++v)
        for (int u = 0; u < s.wh(); ++u) s.at(v, u) = buf[static_cast<std::size_t>(v) * w + u];
    return s;
}

// Hermitian-expand, inverse transform, return the real part. If tol >= 0 the
// imaginary residue is checked against it.
inline void irfft2_plane(const Spectrum& s, double* out, double tol = -1.0) {
    const int h = s.h, w = s.w;
    std::vector<cd> buf(static_cast<std::size_t>(h) * w);
    for (int v = 0; v < h; ++v)
        for (int u = 0; u < w; ++u) buf[static_cast<std::size_t>(v) * w + u] = s.full(v, u);
    fft::transform2d(buf.data(), h, w, true);
    double residue = 0.0;
    for (std::size_t i = 0; i < buf.size(); ++i) {
        residue = std::max(residue, std::abs(buf[i].imag()));
        out[i] = buf[i].real();
    }
    if (tol >= 0.0 && residue > tol)
        throw ContractError("irfft2: imaginary residue " + std::to_string(residue) +
                            " exceeds tolerance");
}

// ---- per-channel API on (C,H,W) tensors ----

inline std::vector<Spectrum> fft2(const Tensor<double>& x) {
    if (x.ndim() != 3) throw ShapeError("fft2: expected (C,H,W)");
    std::vector<Spectrum> out;
    out.reserve(static_cast<std::size_t>(x.dim(0)));
    for (int c = 0; c < x.dim(0); ++c)
        out.push_back(rfft2_plane(x.ptr() + x.plane(c), x.dim(1), x.dim(2)));
    return out;
}

inline Tensor<double> ifft2(const std::vector<Spectrum>& spec, double tol = 1e-10) {
    if (spec.empty()) throw ShapeError("ifft2: empty spectrum list");
    Tensor<double> out({static_cast<int>(spec.size()), spec[0].h, spec[0].w});
    for (std::size_t c = 0; c < spec.size(); ++c)
        irfft2_plane(spec[c], out.ptr() + out.plane(static_cast<int>(c)), tol);
    return out;
}

// ---- windowed (tiled) transform ----

struct TiledSpectrum {
    int h = 0, w = 0;       // original spatial shape
    int hp = 0, wp = 0;     // reflect-padded shape (multiples of k)
    int k = 0;
    std::vector<Spectrum> tiles; // row-major tile grid, (hp/k) x (wp/k)
};

inline int reflect_index(int i, int n) {
    // reflect without repeating the edge sample: n=5 -> 0 1 2 3 4 3 2 1 0 1 ...
    if (n == 1) return 0;
    const int period = 2 * n - 2;
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - i;
}

inline std::vector<double> reflect_pad_plane(const double* x, int h, int w, int hp, int wp) {
    std::vector<double> p(static_cast<std::size_t>(hp) * wp);
    for (int r = 0; r < hp; ++r)
        for (int c = 0; c < wp; ++c)
            p[static_cast<std::size_t>(r) * wp + c] =
                x[static_cast<std::size_t>(reflect_index(r, h)) * w + reflect_index(c, w)];
    return p;
}

inline TiledSpectrum window_fft2_plane(const double* x, int h, int w, int k) {
    if (k <= 0) throw ContractError("window_fft2: k must be positive");
    TiledSpectrum ts;
    ts.h = h;
    ts.w = w;
    ts.k = k;
    ts.hp = (h + k - 1) / k * k;
    ts.wp = (w + k - 1) / k * k;
    auto padded = reflect_pad_plane(x, h, w, ts.hp, ts.wp);
    std::vector<double> tile(static_cast<std::size_t>(k) * k);
    for (int tr = 0; tr < ts.hp / k; ++tr)
        for (int tc = 0; tc < ts.wp / k; ++tc) {
            for (int r = 0; r < k; ++r)
                for (int c = 0; c < k; ++c)
                    tile[static_cast<std::size_t>(r) * k + c] =
                        padded[(static_cast<std::size_t>(tr) * k + r) * ts.wp + tc * k + c];
            ts.tiles.push_back(rfft2_plane(tile.data(), k, k));
        }
    return ts;
}

inline void window_ifft2_plane(const TiledSpectrum& ts, double* out, double tol = 1e-10) {
    const int k = ts.k;
    std::vector<double> padded(static_cast<std::size_t>(ts.hp) * ts.wp);
    std::vector<double> tile(static_cast<std::size_t>(k) * k);
    int idx = 0;
    for (int tr = 0; tr < ts.hp / k; ++tr)
        for (int tc = 0; tc < ts.wp / k; ++tc) {
            irfft2_plane(ts.tiles[idx++], tile.data(), tol);
            for (int r = 0; r < k; ++r)
                for (int c = 0; c < k; ++c)
                    padded[(static_cast<std::size_t>(tr) * k + r) * ts.wp + tc * k + c] =
                        tile[static_cast<std::size_t>(r) * k + c];
        }
    for (int r = 0; r < ts.h; ++r)
        for (int c = 0; c < ts.w; ++c)
            out[static_cast<std::size_t>(r) * ts.w + c] = padded[static_cast<std::size_t>(r) * ts.wp + c];
}

// ---- radial mask over the half plane ----

struct RadialMask {
    int h = 0, wh = 0;
    double cutoff = 0.0;
    std::vector<std::uint8_t> on; // h x wh, 1 = "high frequency" bin

    bool at(int v, int u) const { return on[static_cast<std::size_t>(v) * wh + u] != 0; }
    std::size_t count() const {
        std::size_t n = 0;
        for (auto b : on) n += b;
        return n;
    }
};

// Normalized radial frequency with proper folding of the row index; the
// Nyquist radius is the spectral corner, so cutoff=1 leaves the mask empty
// and cutoff=0 selects everything except DC.
inline double radial_fraction(int v, int u, int h, int w) {
    const int ky = (v <= h / 2) ? v : v - h;
    const double fy = (h > 1) ? static_cast<double>(ky) / (h / 2.0) : 0.0;
    const double fx = (w > 1) ? static_cast<double>(u) / (w / 2.0) : 0.0;
    return std::sqrt(fx * fx + fy * fy) / std::sqrt(2.0);
}

inline RadialMask radial_mask(int h, int w, double cutoff) {
    if (cutoff < 0.0 || cutoff > 1.0) throw ContractError("radial_mask: cutoff outside [0,1]");
    RadialMask m;
    m.h = h;
    m.wh = w / 2 + 1;
    m.cutoff = cutoff;
    m.on.resize(static_cast<std::size_t>(h) * m.wh);
    for (int v = 0; v < h; ++v)
        for (int u = 0; u < m.wh; ++u)
            m.on[static_cast<std::size_t>(v) * m.wh + u] =
                radial_fraction(v, u, h, w) > cutoff ? 1 : 0;
    return m;
}

} // namespace pwf::fourier
