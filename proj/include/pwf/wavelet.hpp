#pragma once
// 1-D periodized filter banks and separable 2-D DWT/IDWT for five wavelet
// families, plus iterated-LL pyramid decomposition.
//
// Conventions (normative for this project):
//  - periodic boundary extension, analysis a[k] = sum_m f[m] x[(2k+m-s) mod n]
//  - synthesis is the matching transpose scatter, so perfect reconstruction
//    is exact for orthogonal banks and holds for bior2.2 with the shift pair
//    (0,1) baked into the family table
//  - HL = high-pass along width, low-pass along height (near-vertical
//    structures, e.g. rain streaks, land in HL)

#include "pwf/tensor.hpp"

#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace pwf::wavelet {

struct Family {
    std::string name;
    std::vector<double> dec_lo, dec_hi;   // analysis (gather)
    std::vector<double> scat_lo, scat_hi; // synthesis (transpose scatter)
    int s_lo = 0, s_hi = 0;               // phase shifts used by both directions
    bool orthogonal = true;

    // Conventional synthesis filters (time-reversed analysis for orthogonal
    // banks; the scatter filters themselves for biorthogonal ones).
    std::vector<double> synthesis_lo() const {
        if (!orthogonal) return scat_lo;
        return {dec_lo.rbegin(), dec_lo.rend()};
    }
    std::vector<double> synthesis_hi() const {
        if (!orthogonal) return scat_hi;
        return {dec_hi.rbegin(), dec_hi.rend()};
    }
};

namespace detail {

inline std::vector<double> qmf_high(const std::vector<double>& lo) {
    const std::size_t n = lo.size();
    std::vector<double> hi(n);
    for (std::size_t i = 0; i < n; ++i)
        hi[i] = ((i % 2) ? -1.0 : 1.0) * lo[n - 1 - i];
    return hi;
}

inline Family orthogonal_family(std::string name, std::vector<double> lo) {
    Family f;
    f.name = std::move(name);
    f.dec_lo = lo;
    f.dec_hi = qmf_high(lo);
    f.scat_lo = f.dec_lo;
    f.scat_hi = f.dec_hi;
    f.orthogonal = true;
    return f;
}

} // namespace detail

inline const std::vector<std::string>& family_names() {
    static const std::vector<std::string> n = {"haar", "db2", "sym4", "coif1", "bior2.2"};
    return n;
}

inline Family filter_bank(const std::string& tag) {
    const double r2 = std::sqrt(2.0);
    if (tag == "haar") return detail::orthogonal_family("haar", {1.0 / r2, 1.0 / r2});
    if (tag == "db2") {
        const double s3 = std::sqrt(3.0);
        return detail::orthogonal_family(
            "db2", {(1 + s3) / (4 * r2), (3 + s3) / (4 * r2), (3 - s3) / (4 * r2), (1 - s3) / (4 * r2)});
    }
    if (tag == "sym4")
        return detail::orthogonal_family(
            "sym4", {-0.07576571478927333, -0.02963552764599851, 0.49761866763201545,
                     0.8037387518059161, 0.29785779560527736, -0.09921954357684722,
                     -0.012603967262037833, 0.0322231006040427});
    if (tag == "coif1") {
        const double s7 = std::sqrt(7.0);
        return detail::orthogonal_family(
            "coif1", {(s7 - 3) / (16 * r2), (1 - s7) / (16 * r2), (14 - 2 * s7) / (16 * r2),
                      (14 + 2 * s7) / (16 * r2), (5 + s7) / (16 * r2), (1 - s7) / (16 * r2)});
    }
    if (tag == "bior2.2") {
        Family f;
        f.name = "bior2.2";
        f.dec_lo = {0.0, -r2 / 8, r2 / 4, 3 * r2 / 4, r2 / 4, -r2 / 8};
        f.scat_lo = {0.0, 0.0, r2 / 4, r2 / 2, r2 / 4, 0.0};
        f.dec_hi.resize(6);
        f.scat_hi.resize(6);
        for (int n = 0; n < 6; ++n) {
            const double sgn = (n % 2) ? -1.0 : 1.0;
            f.dec_hi[n] = sgn * f.scat_lo[n];
            f.scat_hi[n] = sgn * f.dec_lo[n];
        }
        f.s_lo = 0;
        f.s_hi = 1;
        f.orthogonal = false;
        return f;
    }
    throw ContractError("unknown wavelet family: " + tag);
}

// ---- 1-D periodized passes over strided lines ----

// out[k] = sum_m f[m] * x[(2k+m-s) mod n], k in [0, n/2)
template <class T>
void analyze_line(const T* x, int n, int xstride, const T* f, int len, int s, T* out, int ostride) {
    for (int k = 0; k < n / 2; ++k) {
        T acc = 0;
        for (int m = 0; m < len; ++m) {
            int i = (2 * k + m - s) % n;
            if (i < 0) i += n;
            acc += f[m] * x[static_cast<std::size_t>(i) * xstride];
        }
        out[static_cast<std::size_t>(k) * ostride] = acc;
    }
}

// accumulating variant: out[k] += sum_m f[m] * x[(2k+m-s) mod n]
template <class T>
void analyze_line_accum(const T* x, int n, int xstride, const T* f, int len, int s, T* out,
                        int ostride) {
    for (int k = 0; k < n / 2; ++k) {
        T acc = 0;
        for (int m = 0; m < len; ++m) {
            int i = (2 * k + m - s) % n;
            if (i < 0) i += n;
            acc += f[m] * x[static_cast<std::size_t>(i) * xstride];
        }
        out[static_cast<std::size_t>(k) * ostride] += acc;
    }
}

// y[(2k+m-s) mod n] += f[m] * a[k] (transpose of analyze_line)
template <class T>
void scatter_line(const T* a, int n, int astride, const T* f, int len, int s, T* y, int ystride) {
    for (int k = 0; k < n / 2; ++k) {
        const T av = a[static_cast<std::size_t>(k) * astride];
        for (int m = 0; m < len; ++m) {
            int i = (2 * k + m - s) % n;
            if (i < 0) i += n;
            y[static_cast<std::size_t>(i) * ystride] += f[m] * av;
        }
    }
}

// ---- separable 2-D transform of one channel plane ----

// Analysis of an h x w plane (h, w even) into four h/2 x w/2 bands.
// Filters given as contiguous arrays; shifts per the family convention.
template <class T>
void dwt2_plane(const T* x, int h, int w, const T* lo, const T* hi, int len, int s_lo, int s_hi,
                T* ll, T* lh, T* hl, T* hh) {
    const int w2 = w / 2, h2 = h / 2;
    std::vector<T> lw(static_cast<std::size_t>(h) * w2), hw(static_cast<std::size_t>(h) * w2);
    for (int r = 0; r < h; ++r) {
        analyze_line(x + static_cast<std::size_t>(r) * w, w, 1, lo, len, s_lo, lw.data() + static_cast<std::size_t>(r) * w2, 1);
        analyze_line(x + static_cast<std::size_t>(r) * w, w, 1, hi, len, s_hi, hw.data() + static_cast<std::size_t>(r) * w2, 1);
    }
    // columns: low along height -> LL/HL, high along height -> LH/HH
    for (int c = 0; c < w2; ++c) {
        analyze_line(lw.data() + c, h, w2, lo, len, s_lo, ll + c, w2);
        analyze_line(lw.data() + c, h, w2, hi, len, s_hi, lh + c, w2);
        analyze_line(hw.data() + c, h, w2, lo, len, s_lo, hl + c, w2);
        analyze_line(hw.data() + c, h, w2, hi, len, s_hi, hh + c, w2);
    }
}

template <class T>
void idwt2_plane(const T* ll, const T* lh, const T* hl, const T* hh, int h, int w, const T* lo,
                 const T* hi, int len, int s_lo, int s_hi, T* x) {
    const int w2 = w / 2, h2 = h / 2;
    std::vector<T> lw(static_cast<std::size_t>(h) * w2, T(0)), hw(static_cast<std::size_t>(h) * w2, T(0));
    for (int c = 0; c < w2; ++c) {
        scatter_line(ll + c, h, w2, lo, len, s_lo, lw.data() + c, w2);
        scatter_line(lh + c, h, w2, hi, len, s_hi, lw.data() + c, w2);
        scatter_line(hl + c, h, w2, lo, len, s_lo, hw.data() + c, w2);
        scatter_line(hh + c, h, w2, hi, len, s_hi, hw.data() + c, w2);
    }
    std::fill(x, x + static_cast<std::size_t>(h) * w, T(0));
    for (int r = 0; r < h; ++r) {
        scatter_line(lw.data() + static_cast<std::size_t>(r) * w2, w, 1, lo, len, s_lo, x + static_cast<std::size_t>(r) * w, 1);
        scatter_line(hw.data() + static_cast<std::size_t>(r) * w2, w, 1, hi, len, s_hi, x + static_cast<std::size_t>(r) * w, 1);
    }
    (void)h2;
}

// ---- (C,H,W) tensor API (double) ----

struct SubBands {
    Tensor<double> ll, lh, hl, hh;
    int orig_h = 0, orig_w = 0; // pre-padding size (equals 2*band size when even)
};

namespace detail {

inline Tensor<double> reflect_pad_even(const Tensor<double>& x) {
    const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
    const int hp = h + (h % 2), wp = w + (w % 2);
    if (hp == h && wp == w) return x;
    Tensor<double> p({c, hp, wp});
    for (int ch = 0; ch < c; ++ch)
        for (int r = 0; r < hp; ++r)
            for (int cc = 0; cc < wp; ++cc)
                p.at(ch, r, cc) = x.at(ch, r < h ? r : 2 * h - 2 - r, cc < w ? cc : 2 * w - 2 - cc);
    return p;
}

} // namespace detail

inline SubBands dwt2(const Tensor<double>& x0, const Family& fam) {
    if (x0.ndim() != 3) throw ShapeError("dwt2: expected (C,H,W)");
    SubBands sb;
    sb.orig_h = x0.dim(1);
    sb.orig_w = x0.dim(2);
    Tensor<double> x = detail::reflect_pad_even(x0);
    const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
    const Shape bs = {c, h / 2, w / 2};
    sb.ll = Tensor<double>(bs);
    sb.lh = Tensor<double>(bs);
    sb.hl = Tensor<double>(bs);
    sb.hh = Tensor<double>(bs);
    const int len = static_cast<int>(fam.dec_lo.size());
    for (int ch = 0; ch < c; ++ch)
        dwt2_plane(x.ptr() + x.plane(ch), h, w, fam.dec_lo.data(), fam.dec_hi.data(), len, fam.s_lo,
                   fam.s_hi, sb.ll.ptr() + sb.ll.plane(ch), sb.lh.ptr() + sb.lh.plane(ch),
                   sb.hl.ptr() + sb.hl.plane(ch), sb.hh.ptr() + sb.hh.plane(ch));
    return sb;
}

inline Tensor<double> idwt2(const SubBands& sb, const Family& fam) {
    require_same_shape(sb.ll, sb.lh, "idwt2");
    require_same_shape(sb.ll, sb.hl, "idwt2");
    require_same_shape(sb.ll, sb.hh, "idwt2");
    const int c = sb.ll.dim(0), h = sb.ll.dim(1) * 2, w = sb.ll.dim(2) * 2;
    Tensor<double> x({c, h, w});
    const int len = static_cast<int>(fam.scat_lo.size());
    for (int ch = 0; ch < c; ++ch)
        idwt2_plane(sb.ll.ptr() + sb.ll.plane(ch), sb.lh.ptr() + sb.lh.plane(ch),
                    sb.hl.ptr() + sb.hl.plane(ch), sb.hh.ptr() + sb.hh.plane(ch), h, w,
                    fam.scat_lo.data(), fam.scat_hi.data(), len, fam.s_lo, fam.s_hi,
                    x.ptr() + x.plane(ch));
    if (sb.orig_h && (sb.orig_h != h || sb.orig_w != w)) {
        Tensor<double> crop({c, sb.orig_h, sb.orig_w});
        for (int ch = 0; ch < c; ++ch)
            for (int r = 0; r < sb.orig_h; ++r)
                for (int cc = 0; cc < sb.orig_w; ++cc) crop.at(ch, r, cc) = x.at(ch, r, cc);
        return crop;
    }
    return x;
}

struct Pyramid {
    struct Level {
        Tensor<double> lh, hl, hh;
        int orig_h = 0, orig_w = 0;
    };
    std::vector<Level> levels; // index 0 = finest
    Tensor<double> ll;         // deepest approximation
};

inline Pyramid pyramid(const Tensor<double>& x, const Family& fam, int nlevels) {
    if (nlevels < 1) throw ContractError("pyramid: levels must be >= 1");
    if (x.dim(1) < (1 << nlevels) || x.dim(2) < (1 << nlevels))
        throw ContractError("pyramid: image too small for " + std::to_string(nlevels) + " levels");
    Pyramid p;
    Tensor<double> cur = x;
    for (int l = 0; l < nlevels; ++l) {
        SubBands sb = dwt2(cur, fam);
        p.levels.push_back({std::move(sb.lh), std::move(sb.hl), std::move(sb.hh), sb.orig_h, sb.orig_w});
        cur = std::move(sb.ll);
    }
    p.ll = std::move(cur);
    return p;
}

inline Tensor<double> reconstruct(const Pyramid& p, const Family& fam) {
    Tensor<double> cur = p.ll;
    for (int l = static_cast<int>(p.levels.size()) - 1; l >= 0; --l) {
        SubBands sb;
        sb.ll = std::move(cur);
        sb.lh = p.levels[l].lh;
        sb.hl = p.levels[l].hl;
        sb.hh = p.levels[l].hh;
        sb.orig_h = p.levels[l].orig_h;
        sb.orig_w = p.levels[l].orig_w;
        cur = idwt2(sb, fam);
    }
    return cur;
}

} // namespace pwf::wavelet
