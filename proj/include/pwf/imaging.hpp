#pragma once
// Image containers, quality metrics, synthetic degradation, and file I/O.
// Images are (C,H,W) float tensors in [0,1]; files are 8-bit RGB.

#include "pwf/tensor.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace pwf::imaging {

using Image = Tensor<double>;

inline Image clamp01(Image x) {
    for (auto& v : x.data) v = std::min(1.0, std::max(0.0, v));
    return x;
}

inline Image quantize8(const Image& x) {
    Image q(x.shape);
    for (std::size_t i = 0; i < x.data.size(); ++i) {
        double v = std::min(1.0, std::max(0.0, x.data[i]));
        q.data[i] = std::round(v * 255.0) / 255.0;
    }
    return q;
}

// ---- metrics ----

// Peak signal-to-noise ratio against peak 1.0, averaged over all channels.
// Identical inputs report the 100 dB cap instead of infinity.
inline double psnr(const Image& a, const Image& b) {
    if (a.shape != b.shape) throw ShapeError("psnr: shape mismatch");
    double se = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        se += d * d;
    }
    const double mse = se / static_cast<double>(a.data.size());
    if (mse <= 0.0) return 100.0;
    return std::min(100.0, 10.0 * std::log10(1.0 / mse));
}

// Mean SSIM with the standard 11x11 Gaussian window (sigma=1.5), K1=0.01,
// K2=0.03, L=1, computed per channel on valid positions and averaged.
double ssim(const Image& a, const Image& b);

// ---- synthetic rain ----

struct RainParams {
    int streaks = 120;         // streak count per megapixel-normalized frame
    double length_mean = 18.0; // pixels
    double length_jitter = 8.0;
    double width = 1.2;        // gaussian cross-section sigma, pixels
    double angle_deg = 4.0;    // mean tilt from vertical
    double angle_jitter = 3.0;
    double intensity = 0.25;   // peak additive brightness per streak
};

// Additive near-vertical anti-aliased streaks; deterministic in (seed, shape).
Image synth_rain(const Image& clean, std::uint64_t seed, const RainParams& p = {});

// ---- file I/O ----

Image load_image(const std::string& path);       // .png or .ppm by extension
void save_image(const std::string& path, const Image& img);

Image load_ppm(const std::string& path);
void save_ppm(const std::string& path, const Image& img);
Image load_png(const std::string& path);
void save_png(const std::string& path, const Image& img);

} // namespace pwf::imaging
