#pragma once
// Non-learned sub-band-swap analysis: pyramid-decompose a degraded/clean
// pair, exchange selected sub-bands (whole bands or Fourier-masked regions),
// reconstruct, and tabulate PSNR/SSIM over all uniform band subsets.

#include "pwf/fourier.hpp"
#include "pwf/imaging.hpp"
#include "pwf/wavelet.hpp"

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace pwf::swap {

enum Band : unsigned { LL = 1u, LH = 2u, HL = 4u, HH = 8u };

enum class Mode { Whole, Masked };

struct SwapSpec {
    int levels = 3;
    unsigned bands = 0;       // Band bitmask, uniform per level; LL acts at the deepest level only
    Mode mode = Mode::Whole;
    double cutoff = 0.0;      // radial fraction, fourier-masked mode only

    void validate() const {
        if (levels < 1) throw ContractError("SwapSpec: levels must be >= 1");
        if (bands > 15u) throw ContractError("SwapSpec: unknown band bits");
        if (cutoff < 0.0 || cutoff > 1.0) throw ContractError("SwapSpec: cutoff outside [0,1]");
    }
};

inline std::string bands_str(unsigned mask) {
    if (!mask) return "none";
    std::string s;
    auto app = [&](const char* n) { s += (s.empty() ? "" : "+") + std::string(n); };
    if (mask & LL) app("LL");
    if (mask & LH) app("LH");
    if (mask & HL) app("HL");
    if (mask & HH) app("HH");
    return s;
}

inline unsigned parse_bands(const std::string& s) {
    if (s.empty() || s == "none") return 0;
    unsigned mask = 0;
    std::size_t start = 0;
    while (start <= s.size()) {
        std::size_t end = s.find_first_of("+,", start);
        if (end == std::string::npos) end = s.size();
        const std::string tok = s.substr(start, end - start);
        if (tok == "LL" || tok == "ll") mask |= LL;
        else if (tok == "LH" || tok == "lh") mask |= LH;
        else if (tok == "HL" || tok == "hl") mask |= HL;
        else if (tok == "HH" || tok == "hh") mask |= HH;
        else throw ContractError("unknown band name: " + tok);
        if (end == s.size()) break;
        start = end + 1;
    }
    return mask;
}

namespace detail {

// exchange band content between the two pyramids (whole or masked bins)
inline void exchange(Tensor<double>& a, Tensor<double>& b, Mode mode, double cutoff) {
    if (mode == Mode::Whole) {
        std::swap(a.data, b.data);
        return;
    }
    const fourier::RadialMask m = fourier::radial_mask(a.dim(1), a.dim(2), cutoff);
    for (int c = 0; c < a.dim(0); ++c) {
        fourier::Spectrum sa = fourier::rfft2_plane(a.ptr() + a.plane(c), a.dim(1), a.dim(2));
        fourier::Spectrum sb = fourier::rfft2_plane(b.ptr() + b.plane(c), b.dim(1), b.dim(2));
        for (int v = 0; v < sa.h; ++v)
            for (int u = 0; u < sa.wh(); ++u)
                if (m.at(v, u)) std::swap(sa.at(v, u), sb.at(v, u));
        fourier::irfft2_plane(sa, a.ptr() + a.plane(c));
        fourier::irfft2_plane(sb, b.ptr() + b.plane(c));
    }
}

} // namespace detail

// Swapped pair before clamping: first = degraded with clean's selected bands,
// second = clean with degraded's. Exchanging the same spec twice is exact.
inline std::pair<imaging::Image, imaging::Image> subband_swap_pair(const imaging::Image& degraded,
                                                                   const imaging::Image& clean,
                                                                   const SwapSpec& spec,
                                                                   const wavelet::Family& fam) {
    spec.validate();
    require_same_shape(degraded, clean, "subband_swap");
    wavelet::Pyramid pd = wavelet::pyramid(degraded, fam, spec.levels);
    wavelet::Pyramid pc = wavelet::pyramid(clean, fam, spec.levels);
    for (int l = 0; l < spec.levels; ++l) {
        if (spec.bands & LH) detail::exchange(pd.levels[l].lh, pc.levels[l].lh, spec.mode, spec.cutoff);
        if (spec.bands & HL) detail::exchange(pd.levels[l].hl, pc.levels[l].hl, spec.mode, spec.cutoff);
        if (spec.bands & HH) detail::exchange(pd.levels[l].hh, pc.levels[l].hh, spec.mode, spec.cutoff);
    }
    if (spec.bands & LL) detail::exchange(pd.ll, pc.ll, spec.mode, spec.cutoff);
    return {wavelet::reconstruct(pd, fam), wavelet::reconstruct(pc, fam)};
}

inline imaging::Image subband_swap(const imaging::Image& degraded, const imaging::Image& clean,
                                   const SwapSpec& spec, const wavelet::Family& fam) {
    return imaging::clamp01(subband_swap_pair(degraded, clean, spec, fam).first);
}

struct SwapRow {
    SwapSpec spec;
    double psnr_db = 0.0;
    double ssim = 0.0;
};

struct SwapReport {
    std::vector<SwapRow> rows; // ordered by band bitmask 0..15
};

inline SwapReport swap_table(const imaging::Image& degraded, const imaging::Image& clean, int levels,
                             const wavelet::Family& fam, Mode mode, double cutoff) {
    SwapReport rep;
    for (unsigned mask = 0; mask < 16u; ++mask) {
        SwapSpec spec{levels, mask, mode, cutoff};
        imaging::Image out = subband_swap(degraded, clean, spec, fam);
        rep.rows.push_back({spec, imaging::psnr(out, clean), imaging::ssim(out, clean)});
    }
    return rep;
}

inline void write_csv(std::ostream& os, const SwapReport& rep) {
    os << "bands,mode,cutoff,psnr_db,ssim\n";
    char buf[128];
    for (const auto& r : rep.rows) {
        std::snprintf(buf, sizeof(buf), "%s,%s,%.4f,%.4f,%.6f\n", bands_str(r.spec.bands).c_str(),
                      r.spec.mode == Mode::Whole ? "whole" : "masked", r.spec.cutoff, r.psnr_db,
                      r.ssim);
        os << buf;
    }
}

inline void write_text(std::ostream& os, const SwapReport& rep) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%-14s %-8s %8s %10s %10s\n", "bands", "mode", "cutoff",
                  "psnr_db", "ssim");
    os << buf;
    for (const auto& r : rep.rows) {
        std::snprintf(buf, sizeof(buf), "%-14s %-8s %8.4f %10.4f %10.6f\n",
                      bands_str(r.spec.bands).c_str(),
                      r.spec.mode == Mode::Whole ? "whole" : "masked", r.spec.cutoff, r.psnr_db,
                      r.ssim);
        os << buf;
    }
}

} // namespace pwf::swap
