#include "pwf/imaging.hpp"

#include <zlib.h>

#include <array>
#include <cstring>
#include <fstream>
#include <sstream>

namespace pwf::imaging {

// ---- SSIM ----

double ssim(const Image& a, const Image& b) {
    if (a.shape != b.shape) throw ShapeError("ssim: shape mismatch");
    if (a.ndim() != 3) throw ShapeError("ssim: expected (C,H,W)");
    const int C = a.dim(0), H = a.dim(1), W = a.dim(2);
    constexpr int R = 5; // 11x11 window
    if (H < 2 * R + 1 || W < 2 * R + 1) throw ShapeError("ssim: image smaller than 11x11 window");
    std::array<double, 2 * R + 1> g{};
    double gsum = 0.0;
    for (int i = -R; i <= R; ++i) {
        g[i + R] = std::exp(-(i * i) / (2.0 * 1.5 * 1.5));
        gsum += g[i + R];
    }
    for (auto& v : g) v /= gsum;
    const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;

    auto blur = [&](const std::vector<double>& src, std::vector<double>& dst) {
        std::vector<double> tmp(static_cast<std::size_t>(H) * W, 0.0);
        for (int r = 0; r < H; ++r)
            for (int c = R; c < W - R; ++c) {
                double s = 0.0;
                for (int k = -R; k <= R; ++k) s += g[k + R] * src[static_cast<std::size_t>(r) * W + c + k];
                tmp[static_cast<std::size_t>(r) * W + c] = s;
            }
        for (int r = R; r < H - R; ++r)
            for (int c = R; c < W - R; ++c) {
                double s = 0.0;
                for (int k = -R; k <= R; ++k) s += g[k + R] * tmp[static_cast<std::size_t>(r + k) * W + c];
                dst[static_cast<std::size_t>(r) * W + c] = s;
            }
    };

    double total = 0.0;
    for (int ch = 0; ch < C; ++ch) {
        const double* pa = a.ptr() + a.plane(ch);
        const double* pb = b.ptr() + b.plane(ch);
        const std::size_t n = static_cast<std::size_t>(H) * W;
        std::vector<double> xa(pa, pa + n), xb(pb, pb + n);
        std::vector<double> xaa(n), xbb(n), xab(n);
        for (std::size_t i = 0; i < n; ++i) {
            xaa[i] = xa[i] * xa[i];
            xbb[i] = xb[i] * xb[i];
            xab[i] = xa[i] * xb[i];
        }
        std::vector<double> mu_a(n), mu_b(n), m_aa(n), m_bb(n), m_ab(n);
        blur(xa, mu_a);
        blur(xb, mu_b);
        blur(xaa, m_aa);
        blur(xbb, m_bb);
        blur(xab, m_ab);
        double acc = 0.0;
        std::size_t cnt = 0;
        for (int r = R; r < H - R; ++r)
            for (int c = R; c < W - R; ++c) {
                const std::size_t i = static_cast<std::size_t>(r) * W + c;
                const double ma = mu_a[i], mb = mu_b[i];
                const double va = m_aa[i] - ma * ma;
                const double vb = m_bb[i] - mb * mb;
                const double cov = m_ab[i] - ma * mb;
                acc += ((2 * ma * mb + c1) * (2 * cov + c2)) /
                       ((ma * ma + mb * mb + c1) * (va + vb + c2));
                ++cnt;
            }
        total += acc / static_cast<double>(cnt);
    }
    return total / C;
}

// ---- rain synthesis ----

Image synth_rain(const Image& clean, std::uint64_t seed, const RainParams& p) {
    if (clean.ndim() != 3) throw ShapeError("synth_rain: expected (C,H,W)");
    const int C = clean.dim(0), H = clean.dim(1), W = clean.dim(2);
    Rng rng(seed ^ 0x7261696e00000000ull); // domain-separate from other seed uses
    std::vector<double> layer(static_cast<std::size_t>(H) * W, 0.0);
    const int count = std::max(1, static_cast<int>(p.streaks * (static_cast<double>(H) * W) / (256.0 * 256.0)));
    const double pi = 3.14159265358979323846;
    for (int s = 0; s < count; ++s) {
        const double x0 = rng.uniform() * W;
        const double y0 = rng.uniform() * H;
        const double len = std::max(2.0, p.length_mean + (2.0 * rng.uniform() - 1.0) * p.length_jitter);
        const double ang = (p.angle_deg + (2.0 * rng.uniform() - 1.0) * p.angle_jitter) * pi / 180.0;
        const double dx = std::sin(ang), dy = std::cos(ang); // near-vertical
        const double amp = p.intensity * (0.5 + 0.5 * rng.uniform());
        const double sig = p.width;
        const int r0 = std::max(0, static_cast<int>(std::floor(y0 - 3 * sig)));
        const int r1 = std::min(H - 1, static_cast<int>(std::ceil(y0 + len * dy + 3 * sig)));
        for (int r = r0; r <= r1; ++r)
            for (int c = std::max(0, static_cast<int>(std::floor(x0 - len * dx - 3 * sig - 1)));
                 c <= std::min(W - 1, static_cast<int>(std::ceil(x0 + len * dx + 3 * sig + 1))); ++c) {
                // distance from pixel center to the streak segment
                const double px = c + 0.5 - x0, py = r + 0.5 - y0;
                double t = px * dx + py * dy;
                t = std::min(len, std::max(0.0, t));
                const double ex = px - t * dx, ey = py - t * dy;
                const double d2 = ex * ex + ey * ey;
                // smooth longitudinal fade toward both streak ends
                const double fade = std::min(1.0, std::min(t, len - t) / 3.0 + 0.25);
                layer[static_cast<std::size_t>(r) * W + c] +=
                    amp * fade * std::exp(-d2 / (2.0 * sig * sig));
            }
    }
    Image out = clean;
    for (int ch = 0; ch < C; ++ch) {
        double* pc = out.ptr() + out.plane(ch);
        for (std::size_t i = 0; i < layer.size(); ++i) pc[i] = std::min(1.0, pc[i] + layer[i]);
    }
    return out;
}

// ---- 8-bit conversions ----

namespace {

std::vector<unsigned char> to_rgb8(const Image& img) {
    if (img.ndim() != 3 || img.dim(0) != 3) throw ShapeError("image I/O: expected (3,H,W)");
    const int H = img.dim(1), W = img.dim(2);
    std::vector<unsigned char> out(static_cast<std::size_t>(H) * W * 3);
    for (int c = 0; c < 3; ++c) {
        const double* p = img.ptr() + img.plane(c);
        for (std::size_t i = 0; i < static_cast<std::size_t>(H) * W; ++i) {
            double v = std::min(1.0, std::max(0.0, p[i]));
            out[i * 3 + c] = static_cast<unsigned char>(std::lround(v * 255.0));
        }
    }
    return out;
}

Image from_rgb8(const unsigned char* rgb, int H, int W) {
    Image img({3, H, W});
    for (int c = 0; c < 3; ++c) {
        double* p = img.ptr() + img.plane(c);
        for (std::size_t i = 0; i < static_cast<std::size_t>(H) * W; ++i)
            p[i] = rgb[i * 3 + c] / 255.0;
    }
    return img;
}

bool ends_with(const std::string& s, const std::string& sfx) {
    return s.size() >= sfx.size() && s.compare(s.size() - sfx.size(), sfx.size(), sfx) == 0;
}

std::vector<unsigned char> read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ContractError("cannot open file: " + path);
    return std::vector<unsigned char>(std::istreambuf_iterator<char>(f), {});
}

// big-endian helpers for PNG
std::uint32_t be32(const unsigned char* p) {
    return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) | (std::uint32_t(p[2]) << 8) | p[3];
}
void put_be32(std::vector<unsigned char>& v, std::uint32_t x) {
    v.push_back(static_cast<unsigned char>(x >> 24));
    v.push_back(static_cast<unsigned char>(x >> 16));
    v.push_back(static_cast<unsigned char>(x >> 8));
    v.push_back(static_cast<unsigned char>(x));
}

void write_chunk(std::ofstream& f, const char type[4], const std::vector<unsigned char>& data) {
    std::vector<unsigned char> head;
    put_be32(head, static_cast<std::uint32_t>(data.size()));
    f.write(reinterpret_cast<const char*>(head.data()), 4);
    f.write(type, 4);
    if (!data.empty()) f.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    std::uint32_t crc = crc32(0L, Z_NULL, 0);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(type), 4);
    if (!data.empty()) crc = crc32(crc, data.data(), static_cast<uInt>(data.size()));
    std::vector<unsigned char> tail;
    put_be32(tail, crc);
    f.write(reinterpret_cast<const char*>(tail.data()), 4);
}

int paeth(int a, int b, int c) {
    const int p = a + b - c;
    const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return a;
    if (pb <= pc) return b;
    return c;
}

} // namespace

// ---- PPM (binary P6, maxval 255) ----

void save_ppm(const std::string& path, const Image& img) {
    const auto rgb = to_rgb8(img);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ContractError("cannot write file: " + path);
    f << "P6\n" << img.dim(2) << " " << img.dim(1) << "\n255\n";
    f.write(reinterpret_cast<const char*>(rgb.data()), static_cast<std::streamsize>(rgb.size()));
}

Image load_ppm(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ContractError("cannot open file: " + path);
    std::string magic;
    f >> magic;
    if (magic != "P6") throw ContractError("not a binary PPM (P6): " + path);
    auto next_int = [&]() {
        // skip whitespace and '#' comments between header fields
        int ch;
        while ((ch = f.get()) != EOF) {
            if (ch == '#') {
                while ((ch = f.get()) != EOF && ch != '\n') {}
            } else if (!std::isspace(ch)) {
                f.unget();
                break;
            }
        }
        int v;
        f >> v;
        return v;
    };
    const int W = next_int(), H = next_int(), maxv = next_int();
    if (maxv != 255) throw ContractError("PPM maxval must be 255: " + path);
    f.get(); // single whitespace after maxval
    std::vector<unsigned char> rgb(static_cast<std::size_t>(H) * W * 3);
    f.read(reinterpret_cast<char*>(rgb.data()), static_cast<std::streamsize>(rgb.size()));
    if (!f) throw ContractError("truncated PPM payload: " + path);
    return from_rgb8(rgb.data(), H, W);
}

// ---- PNG (8-bit, non-interlaced; decodes gray/RGB/RGBA, encodes RGB) ----

void save_png(const std::string& path, const Image& img) {
    const int H = img.dim(1), W = img.dim(2);
    const auto rgb = to_rgb8(img);
    // raw scanlines with filter byte 0
    std::vector<unsigned char> raw;
    raw.reserve(static_cast<std::size_t>(H) * (static_cast<std::size_t>(W) * 3 + 1));
    for (int r = 0; r < H; ++r) {
        raw.push_back(0);
        const unsigned char* row = rgb.data() + static_cast<std::size_t>(r) * W * 3;
        raw.insert(raw.end(), row, row + static_cast<std::size_t>(W) * 3);
    }
    uLongf zlen = compressBound(static_cast<uLong>(raw.size()));
    std::vector<unsigned char> z(zlen);
    if (compress2(z.data(), &zlen, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
        throw ContractError("PNG deflate failed");
    z.resize(zlen);

    std::ofstream f(path, std::ios::binary);
    if (!f) throw ContractError("cannot write file: " + path);
    static const unsigned char sig[8] = {137, 80, 78, 71, 13, 10, 26, 10};
    f.write(reinterpret_cast<const char*>(sig), 8);
    std::vector<unsigned char> ihdr;
    put_be32(ihdr, static_cast<std::uint32_t>(W));
    put_be32(ihdr, static_cast<std::uint32_t>(H));
    ihdr.push_back(8); // bit depth
    ihdr.push_back(2); // color type RGB
    ihdr.push_back(0); // compression
    ihdr.push_back(0); // filter method
    ihdr.push_back(0); // no interlace
    write_chunk(f, "IHDR", ihdr);
    write_chunk(f, "IDAT", z);
    write_chunk(f, "IEND", {});
}

Image load_png(const std::string& path) {
    const auto buf = read_file(path);
    static const unsigned char sig[8] = {137, 80, 78, 71, 13, 10, 26, 10};
    if (buf.size() < 8 || std::memcmp(buf.data(), sig, 8) != 0)
        throw ContractError("not a PNG file: " + path);
    int W = 0, H = 0, depth = 0, color = 0;
    std::vector<unsigned char> idat;
    std::size_t off = 8;
    while (off + 8 <= buf.size()) {
        const std::uint32_t len = be32(buf.data() + off);
        const char* type = reinterpret_cast<const char*>(buf.data() + off + 4);
        if (off + 12 + len > buf.size()) throw ContractError("truncated PNG chunk: " + path);
        const unsigned char* data = buf.data() + off + 8;
        if (std::memcmp(type, "IHDR", 4) == 0) {
            W = static_cast<int>(be32(data));
            H = static_cast<int>(be32(data + 4));
            depth = data[8];
            color = data[9];
            if (data[12] != 0) throw ContractError("interlaced PNG not supported: " + path);
        } else if (std::memcmp(type, "IDAT", 4) == 0) {
            idat.insert(idat.end(), data, data + len);
        } else if (std::memcmp(type, "IEND", 4) == 0) {
            break;
        }
        off += 12 + len;
    }
    if (W <= 0 || H <= 0 || depth != 8) throw ContractError("unsupported PNG format: " + path);
    int nch;
    switch (color) {
        case 0: nch = 1; break;
        case 2: nch = 3; break;
        case 6: nch = 4; break;
        default: throw ContractError("unsupported PNG color type: " + path);
    }
    const std::size_t stride = static_cast<std::size_t>(W) * nch;
    std::vector<unsigned char> raw(static_cast<std::size_t>(H) * (stride + 1));
    uLongf rlen = static_cast<uLongf>(raw.size());
    if (uncompress(raw.data(), &rlen, idat.data(), static_cast<uLong>(idat.size())) != Z_OK ||
        rlen != raw.size())
        throw ContractError("PNG inflate failed: " + path);
    // undo per-scanline filters in place
    std::vector<unsigned char> img(static_cast<std::size_t>(H) * stride);
    for (int r = 0; r < H; ++r) {
        const unsigned char ft = raw[static_cast<std::size_t>(r) * (stride + 1)];
        const unsigned char* src = raw.data() + static_cast<std::size_t>(r) * (stride + 1) + 1;
        unsigned char* dst = img.data() + static_cast<std::size_t>(r) * stride;
        const unsigned char* up = r > 0 ? dst - stride : nullptr;
        for (std::size_t i = 0; i < stride; ++i) {
            const int a = i >= static_cast<std::size_t>(nch) ? dst[i - nch] : 0;
            const int b = up ? up[i] : 0;
            const int c = (up && i >= static_cast<std::size_t>(nch)) ? up[i - nch] : 0;
            int v = src[i];
            switch (ft) {
                case 0: break;
                case 1: v += a; break;
                case 2: v += b; break;
                case 3: v += (a + b) / 2; break;
                case 4: v += paeth(a, b, c); break;
                default: throw ContractError("unsupported PNG filter type: " + path);
            }
            dst[i] = static_cast<unsigned char>(v & 0xff);
        }
    }
    std::vector<unsigned char> rgb(static_cast<std::size_t>(H) * W * 3);
    for (std::size_t i = 0; i < static_cast<std::size_t>(H) * W; ++i) {
        const unsigned char* px = img.data() + i * nch;
        if (nch == 1) {
            rgb[i * 3] = rgb[i * 3 + 1] = rgb[i * 3 + 2] = px[0];
        } else {
            rgb[i * 3] = px[0];
            rgb[i * 3 + 1] = px[1];
            rgb[i * 3 + 2] = px[2];
        }
    }
    return from_rgb8(rgb.data(), H, W);
}

Image load_image(const std::string& path) {
    if (ends_with(path, ".ppm")) return load_ppm(path);
    if (ends_with(path, ".png")) return load_png(path);
    throw ContractError("unsupported image extension (use .png or .ppm): " + path);
}

void save_image(const std::string& path, const Image& img) {
    if (ends_with(path, ".ppm")) return save_ppm(path, img);
    if (ends_with(path, ".png")) return save_png(path, img);
    throw ContractError("unsupported image extension (use .png or .ppm): " + path);
}

} // namespace pwf::imaging
