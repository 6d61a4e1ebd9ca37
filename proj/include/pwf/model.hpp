#pragma once
// PW-FNet: wavelet multi-input construction, 3-level encoder-decoder with
// trainable wavelet down/up-sampling, frequency-domain token-mixer blocks,
// and inverse-wavelet multi-output heads with S/M/L truncated inference.

#include "pwf/autodiff.hpp"
#include "pwf/wavelet.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace pwf::model {

struct ModelConfig {
    int base_channels = 16;
    std::array<int, 3> blocks_per_level = {2, 2, 2};
    std::string family = "db2";
    int mixer_kernel = 0; // 0 = global FFT, else square window size
    std::uint64_t seed = 1;
    int io_channels = 3;

    void validate() const {
        if (base_channels < 1 || io_channels < 1) throw ContractError("ModelConfig: counts must be >= 1");
        for (int n : blocks_per_level)
            if (n < 1) throw ContractError("ModelConfig: blocks_per_level must be >= 1");
        if (mixer_kernel != 0 && mixer_kernel != 8 && mixer_kernel != 16 && mixer_kernel != 32 &&
            mixer_kernel != 64)
            throw ContractError("ModelConfig: mixer_kernel must be one of {0,8,16,32,64}");
        wavelet::filter_bank(family); // throws on unknown tag
    }

    bool operator==(const ModelConfig&) const = default;
};

enum class Variant { S, M, L };

inline Variant variant_from_string(const std::string& s) {
    if (s == "s" || s == "S") return Variant::S;
    if (s == "m" || s == "M") return Variant::M;
    if (s == "l" || s == "L") return Variant::L;
    throw ContractError("unknown variant: " + s);
}

template <class T>
class Model {
  public:
    ModelConfig cfg;
    wavelet::Family fam;

    explicit Model(ModelConfig c) : cfg(std::move(c)), fam(wavelet::filter_bank(cfg.family)) {
        cfg.validate();
        build();
    }

    ad::ParamTensor<T>& p(const std::string& name) {
        auto it = by_name_.find(name);
        if (it == by_name_.end()) throw ContractError("unknown parameter: " + name);
        return *it->second;
    }
    const std::vector<std::unique_ptr<ad::ParamTensor<T>>>& params() const { return params_; }

    void zero_grads() {
        for (auto& p : params_) p->zero_grad();
    }

    long long param_count() const {
        long long n = 0;
        for (const auto& p : params_) n += static_cast<long long>(p->value.numel());
        return n;
    }

    // Parameters actually used by a truncated forward pass.
    long long param_count(Variant v) const {
        long long n = 0;
        for (const auto& p : params_)
            if (param_in_variant(p->name, v)) n += static_cast<long long>(p->value.numel());
        return n;
    }

    struct MultiInput {
        Tensor<T> i1, highs1, i2, highs2, i4;
    };

    // I1 = x; level-1 DWT -> {LL1, highs1}; level-2 DWT of LL1 -> {LL2, highs2};
    // I2 = LL1/2, I4 = LL2/4 so every scale lives in image range.
    MultiInput multi_input(const Tensor<T>& x) const {
        if (x.ndim() != 3 || x.dim(1) % 4 || x.dim(2) % 4)
            throw ShapeError("multi_input: H and W must be divisible by 4");
        MultiInput mi;
        mi.i1 = x;
        Tensor<T> ll1 = dwt_bands(x, mi.highs1);
        mi.i2 = ll1 * T(0.5);
        Tensor<T> ll2 = dwt_bands(ll1, mi.highs2);
        mi.i4 = ll2 * T(0.25);
        return mi;
    }

    struct Forward {
        ad::Var o1, o2, o4;
        std::vector<std::pair<std::string, ad::Var>> activations; // shared-prefix capture points
    };

    Forward forward(ad::Tape<T>& t, const Tensor<T>& x, Variant variant,
                    bool record_activations = false) {
        const MultiInput mi = multi_input(x);
        return forward(t, mi, variant, record_activations);
    }

    Forward forward(ad::Tape<T>& t, const MultiInput& mi, Variant variant,
                    bool record_activations = false) {
        const int io = cfg.io_channels, C = cfg.base_channels;
        Forward fw;
        auto act = [&](const char* name, ad::Var v) {
            if (record_activations) fw.activations.emplace_back(name, v);
        };

        ad::Var I1 = t.constant(mi.i1);
        ad::Var I2 = t.constant(mi.i2);
        ad::Var I4 = t.constant(mi.i4);
        ad::Var H1 = t.constant(mi.highs1);
        ad::Var H2 = t.constant(mi.highs2);

        ad::Var s1 = t.conv3x3(I1, t.param(p("stem1.w")), t.param(p("stem1.b")));
        ad::Var s2 = t.conv3x3(t.concat_channels({I2, H1}), t.param(p("stem2.w")), t.param(p("stem2.b")));
        ad::Var s3 = t.conv3x3(t.concat_channels({I4, H2}), t.param(p("stem3.w")), t.param(p("stem3.b")));

        ad::Var e1 = run_blocks(t, "enc1", cfg.blocks_per_level[0], s1);
        act("enc1", e1);
        ad::Var d1 = t.conv_pointwise(wav_down(t, "down1", e1), t.param(p("down1.proj.w")),
                                      t.param(p("down1.proj.b")));
        ad::Var f2 = t.conv_pointwise(t.concat_channels({d1, s2}), t.param(p("fuse2.w")),
                                      t.param(p("fuse2.b")));
        ad::Var e2 = run_blocks(t, "enc2", cfg.blocks_per_level[1], f2);
        act("enc2", e2);
        ad::Var d2 = t.conv_pointwise(wav_down(t, "down2", e2), t.param(p("down2.proj.w")),
                                      t.param(p("down2.proj.b")));
        ad::Var f3 = t.conv_pointwise(t.concat_channels({d2, s3}), t.param(p("fuse3.w")),
                                      t.param(p("fuse3.b")));
        ad::Var b4 = run_blocks(t, "dec4", cfg.blocks_per_level[2], f3);
        act("dec4", b4);

        ad::Var r4 = t.conv3x3(b4, t.param(p("head4.w")), t.param(p("head4.b")));
        act("r4", r4);
        fw.o4 = t.add(I4, r4);

        // high-band residuals; truncated variants keep the input's high bands
        ad::Var dh2, dh1;
        if (variant != Variant::S) {
            ad::Var u2 = wav_up(t, "up2",
                                t.conv_pointwise(b4, t.param(p("up2.pre.w")), t.param(p("up2.pre.b"))));
            ad::Var g2 = t.conv_pointwise(t.concat_channels({u2, e2}), t.param(p("skip2.w")),
                                          t.param(p("skip2.b")));
            ad::Var b2 = run_blocks(t, "dec2", cfg.blocks_per_level[1], g2);
            // heads predict high-band corrections one scale down, so features
            // pass through a fixed analysis step first
            dh2 = t.conv3x3(wav_down_fixed(t, b2), t.param(p("head2.w")), t.param(p("head2.b")));
            if (variant == Variant::L) {
                ad::Var u1 = wav_up(t, "up1", t.conv_pointwise(b2, t.param(p("up1.pre.w")),
                                                               t.param(p("up1.pre.b"))));
                ad::Var g1 = t.conv_pointwise(t.concat_channels({u1, e1}), t.param(p("skip1.w")),
                                              t.param(p("skip1.b")));
                ad::Var b1 = run_blocks(t, "dec1", cfg.blocks_per_level[0], g1);
                dh1 = t.conv3x3(wav_down_fixed(t, b1), t.param(p("head1.w")), t.param(p("head1.b")));
            }
        }
        if (!dh2.valid()) dh2 = t.constant(Tensor<T>({3 * io, mi.i4.dim(1), mi.i4.dim(2)}));
        if (!dh1.valid()) dh1 = t.constant(Tensor<T>({3 * io, mi.i2.dim(1), mi.i2.dim(2)}));

        // o2 = I2 + idwt(4*r4, dh2)/2 ; o1 = I1 + idwt(2*c2, dh1)
        // (residual form keeps o_i == I_i bit-exact at zero init)
        ad::Var c2 = t.mul_scalar(
            wav_up_fixed(t, t.concat_channels({t.mul_scalar(r4, T(4)), dh2})), T(0.5));
        fw.o2 = t.add(I2, c2);
        ad::Var c1 = wav_up_fixed(t, t.concat_channels({t.mul_scalar(c2, T(2)), dh1}));
        fw.o1 = t.add(I1, c1);
        return fw;
    }

    static bool param_in_variant(const std::string& name, Variant v) {
        auto has = [&](const char* pfx) { return name.rfind(pfx, 0) == 0; };
        const bool m_only = has("up2.") || has("skip2.") || has("dec2.") || has("head2.");
        const bool l_only = has("up1.") || has("skip1.") || has("dec1.") || has("head1.");
        if (v == Variant::S) return !m_only && !l_only;
        if (v == Variant::M) return !l_only;
        return true;
    }

  private:
    std::vector<std::unique_ptr<ad::ParamTensor<T>>> params_;
    std::map<std::string, ad::ParamTensor<T>*> by_name_;

    ad::ParamTensor<T>& add_param(const std::string& name, Tensor<T> v) {
        if (by_name_.count(name)) throw ContractError("duplicate parameter: " + name);
        params_.push_back(std::make_unique<ad::ParamTensor<T>>(name, std::move(v)));
        by_name_[name] = params_.back().get();
        return *params_.back();
    }

    Tensor<T> init_conv(Shape s, int fan_in, Rng& rng) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        return random_tensor<T>(std::move(s), rng, -bound, bound);
    }

    void add_pw(const std::string& name, int cin, int cout, Rng& rng) {
        add_param(name + ".w", init_conv({cout, cin}, cin, rng));
        add_param(name + ".b", Tensor<T>({cout}));
    }
    void add_c3(const std::string& name, int cin, int cout, Rng& rng, bool zero = false) {
        add_param(name + ".w", zero ? Tensor<T>({cout, cin, 3, 3}) : init_conv({cout, cin, 3, 3}, cin * 9, rng));
        add_param(name + ".b", Tensor<T>({cout}));
    }
    void add_block(const std::string& pfx, int ch, Rng& rng) {
        add_pw(pfx + ".mix.in", ch, 2 * ch, rng);
        add_pw(pfx + ".mix.freq", 4 * ch, 4 * ch, rng);
        add_pw(pfx + ".mix.out", 2 * ch, ch, rng);
        add_pw(pfx + ".ffn.in", ch, 2 * ch, rng);
        add_param(pfx + ".ffn.dw.w", init_conv({2 * ch, 3, 3}, 9, rng));
        add_param(pfx + ".ffn.dw.b", Tensor<T>({2 * ch}));
        add_pw(pfx + ".ffn.out", 2 * ch, ch, rng);
    }
    void add_filters(const std::string& pfx, bool synthesis) {
        const auto& lo = synthesis ? fam.scat_lo : fam.dec_lo;
        const auto& hi = synthesis ? fam.scat_hi : fam.dec_hi;
        Tensor<T> tl({static_cast<int>(lo.size())}), th({static_cast<int>(hi.size())});
        for (std::size_t i = 0; i < lo.size(); ++i) tl.data[i] = static_cast<T>(lo[i]);
        for (std::size_t i = 0; i < hi.size(); ++i) th.data[i] = static_cast<T>(hi[i]);
        add_param(pfx + ".lo", std::move(tl));
        add_param(pfx + ".hi", std::move(th));
    }

    void build() {
        Rng rng(cfg.seed);
        const int io = cfg.io_channels, C = cfg.base_channels;
        add_c3("stem1", io, C, rng);
        add_c3("stem2", 4 * io, 2 * C, rng);
        add_c3("stem3", 4 * io, 4 * C, rng);
        for (int i = 0; i < cfg.blocks_per_level[0]; ++i) add_block("enc1.b" + std::to_string(i), C, rng);
        add_filters("down1", false);
        add_pw("down1.proj", 4 * C, 2 * C, rng);
        add_pw("fuse2", 4 * C, 2 * C, rng);
        for (int i = 0; i < cfg.blocks_per_level[1]; ++i) add_block("enc2.b" + std::to_string(i), 2 * C, rng);
        add_filters("down2", false);
        add_pw("down2.proj", 8 * C, 4 * C, rng);
        add_pw("fuse3", 8 * C, 4 * C, rng);
        for (int i = 0; i < cfg.blocks_per_level[2]; ++i) add_block("dec4.b" + std::to_string(i), 4 * C, rng);
        add_c3("head4", 4 * C, io, rng, /*zero=*/true);
        add_pw("up2.pre", 4 * C, 8 * C, rng);
        add_filters("up2", true);
        add_pw("skip2", 4 * C, 2 * C, rng);
        for (int i = 0; i < cfg.blocks_per_level[1]; ++i) add_block("dec2.b" + std::to_string(i), 2 * C, rng);
        add_c3("head2", 8 * C, 3 * io, rng, /*zero=*/true);
        add_pw("up1.pre", 2 * C, 4 * C, rng);
        add_filters("up1", true);
        add_pw("skip1", 2 * C, C, rng);
        for (int i = 0; i < cfg.blocks_per_level[0]; ++i) add_block("dec1.b" + std::to_string(i), C, rng);
        add_c3("head1", 4 * C, 3 * io, rng, /*zero=*/true);
    }

    // one analysis level on T data with the family's filters; highs out as 3C stack
    Tensor<T> dwt_bands(const Tensor<T>& x, Tensor<T>& highs) const {
        const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
        const int len = static_cast<int>(fam.dec_lo.size());
        std::vector<T> lo(fam.dec_lo.begin(), fam.dec_lo.end());
        std::vector<T> hi(fam.dec_hi.begin(), fam.dec_hi.end());
        Tensor<T> ll({c, h / 2, w / 2});
        highs = Tensor<T>({3 * c, h / 2, w / 2});
        for (int ch = 0; ch < c; ++ch)
            wavelet::dwt2_plane(x.ptr() + x.plane(ch), h, w, lo.data(), hi.data(), len, fam.s_lo,
                                fam.s_hi, ll.ptr() + ll.plane(ch), highs.ptr() + highs.plane(ch),
                                highs.ptr() + highs.plane(c + ch), highs.ptr() + highs.plane(2 * c + ch));
        return ll;
    }

    ad::Var run_blocks(ad::Tape<T>& t, const std::string& stage, int n, ad::Var x) {
        for (int i = 0; i < n; ++i) x = block(t, stage + ".b" + std::to_string(i), x);
        return x;
    }

    ad::Var block(ad::Tape<T>& t, const std::string& pfx, ad::Var x) {
        x = t.add(x, mixer(t, pfx, x));
        x = t.add(x, ffn(t, pfx, x));
        return x;
    }

    ad::Var mixer(ad::Tape<T>& t, const std::string& pfx, ad::Var x) {
        const int h = t.value(x).dim(1), w = t.value(x).dim(2);
        int kh = h, kw = w;
        if (cfg.mixer_kernel > 0) kh = kw = cfg.mixer_kernel;
        ad::Var z = t.conv_pointwise(x, t.param(p(pfx + ".mix.in.w")), t.param(p(pfx + ".mix.in.b")));
        const bool pad = (h % kh) || (w % kw);
        int hp = (h + kh - 1) / kh * kh, wp = (w + kw - 1) / kw * kw;
        if (kh > h || kw > w) { // window larger than the feature map: one padded tile
            hp = std::max(hp, kh);
            wp = std::max(wp, kw);
        }
        if (pad || hp != h || wp != w) z = t.reflect_pad2d(z, hp, wp);
        ad::Var f = t.rfft2c(z, kh, kw);
        f = t.gelu(t.conv_pointwise(f, t.param(p(pfx + ".mix.freq.w")), t.param(p(pfx + ".mix.freq.b"))));
        ad::Var s = t.irfft2c(f, kh, kw);
        if (pad || hp != h || wp != w) s = t.crop2d(s, h, w);
        return t.conv_pointwise(s, t.param(p(pfx + ".mix.out.w")), t.param(p(pfx + ".mix.out.b")));
    }

    ad::Var ffn(ad::Tape<T>& t, const std::string& pfx, ad::Var x) {
        ad::Var z = t.conv_pointwise(x, t.param(p(pfx + ".ffn.in.w")), t.param(p(pfx + ".ffn.in.b")));
        z = t.conv_depthwise3x3(z, t.param(p(pfx + ".ffn.dw.w")), t.param(p(pfx + ".ffn.dw.b")));
        z = t.gelu(z);
        return t.conv_pointwise(z, t.param(p(pfx + ".ffn.out.w")), t.param(p(pfx + ".ffn.out.b")));
    }

    ad::Var wav_down(ad::Tape<T>& t, const std::string& pfx, ad::Var x) {
        return t.wavelet_down(x, t.param(p(pfx + ".lo")), t.param(p(pfx + ".hi")), fam.s_lo, fam.s_hi);
    }
    ad::Var wav_up(ad::Tape<T>& t, const std::string& pfx, ad::Var z) {
        return t.wavelet_up(z, t.param(p(pfx + ".lo")), t.param(p(pfx + ".hi")), fam.s_lo, fam.s_hi);
    }
    // fixed (non-trainable) analysis bank feeding the scale-2/1 heads
    ad::Var wav_down_fixed(ad::Tape<T>& t, ad::Var x) {
        Tensor<T> lo({static_cast<int>(fam.dec_lo.size())}), hi({static_cast<int>(fam.dec_hi.size())});
        for (std::size_t i = 0; i < fam.dec_lo.size(); ++i) lo.data[i] = static_cast<T>(fam.dec_lo[i]);
        for (std::size_t i = 0; i < fam.dec_hi.size(); ++i) hi.data[i] = static_cast<T>(fam.dec_hi[i]);
        return t.wavelet_down(x, t.constant(std::move(lo)), t.constant(std::move(hi)), fam.s_lo, fam.s_hi);
    }
    // fixed (non-trainable) synthesis bank for output chaining
    ad::Var wav_up_fixed(ad::Tape<T>& t, ad::Var z) {
        Tensor<T> lo({static_cast<int>(fam.scat_lo.size())}), hi({static_cast<int>(fam.scat_hi.size())});
        for (std::size_t i = 0; i < fam.scat_lo.size(); ++i) lo.data[i] = static_cast<T>(fam.scat_lo[i]);
        for (std::size_t i = 0; i < fam.scat_hi.size(); ++i) hi.data[i] = static_cast<T>(fam.scat_hi[i]);
        return t.wavelet_up(z, t.constant(std::move(lo)), t.constant(std::move(hi)), fam.s_lo, fam.s_hi);
    }
};

// ---- analytic cost accounting ----

struct CostBreakdown {
    long long macs = 0;
    void conv_pw(int cin, int cout, long long hw) { macs += 1LL * cin * cout * hw; }
    void conv3x3(int cin, int cout, long long hw) { macs += 9LL * cin * cout * hw; }
    void conv_dw3x3(int c, long long hw) { macs += 9LL * c * hw; }
    void fft(int channels, long long hw, int tile_n) {
        const double per = 2.5 * static_cast<double>(hw) * std::log2(static_cast<double>(tile_n));
        macs += static_cast<long long>(per) * channels;
    }
    void wavelet_pass(int c, long long hw, int len) { macs += 2LL * c * hw * len; }
};

// MAC estimate matching the architecture walk in Model<T>::forward.
inline long long flops_estimate(const ModelConfig& cfg, int H, int W, Variant variant) {
    cfg.validate();
    const int io = cfg.io_channels, C = cfg.base_channels;
    const auto fam = wavelet::filter_bank(cfg.family);
    const int len = static_cast<int>(fam.dec_lo.size());
    CostBreakdown cb;
    auto block_cost = [&](int ch, int h, int w) {
        const long long hw = 1LL * h * w;
        int kh = (cfg.mixer_kernel > 0) ? cfg.mixer_kernel : h;
        int kw = (cfg.mixer_kernel > 0) ? cfg.mixer_kernel : w;
        const int hp = std::max((h + kh - 1) / kh * kh, kh);
        const int wp = std::max((w + kw - 1) / kw * kw, kw);
        const long long hwp = 1LL * hp * wp;
        cb.conv_pw(ch, 2 * ch, hw);
        cb.fft(2 * ch, hwp, kh * kw);
        const long long hwf = 1LL * hp * ((wp / kw) * (kw / 2 + 1));
        cb.conv_pw(4 * ch, 4 * ch, hwf);
        cb.fft(2 * ch, hwp, kh * kw);
        cb.conv_pw(2 * ch, ch, hw);
        cb.conv_pw(ch, 2 * ch, hw);
        cb.conv_dw3x3(2 * ch, hw);
        cb.conv_pw(2 * ch, ch, hw);
    };
    const int H2 = H / 2, W2 = W / 2, H4 = H / 4, W4 = W / 4;
    cb.conv3x3(io, C, 1LL * H * W);
    cb.conv3x3(4 * io, 2 * C, 1LL * H2 * W2);
    cb.conv3x3(4 * io, 4 * C, 1LL * H4 * W4);
    for (int i = 0; i < cfg.blocks_per_level[0]; ++i) block_cost(C, H, W);
    cb.wavelet_pass(C, 1LL * H * W, len);
    cb.conv_pw(4 * C, 2 * C, 1LL * H2 * W2);
    cb.conv_pw(4 * C, 2 * C, 1LL * H2 * W2);
    for (int i = 0; i < cfg.blocks_per_level[1]; ++i) block_cost(2 * C, H2, W2);
    cb.wavelet_pass(2 * C, 1LL * H2 * W2, len);
    cb.conv_pw(8 * C, 4 * C, 1LL * H4 * W4);
    cb.conv_pw(8 * C, 4 * C, 1LL * H4 * W4);
    for (int i = 0; i < cfg.blocks_per_level[2]; ++i) block_cost(4 * C, H4, W4);
    cb.conv3x3(4 * C, io, 1LL * H4 * W4);
    // output chaining (both idwt stages run for every variant)
    cb.wavelet_pass(io, 1LL * H2 * W2, len);
    cb.wavelet_pass(io, 1LL * H * W, len);
    if (variant != Variant::S) {
        cb.conv_pw(4 * C, 8 * C, 1LL * H4 * W4);
        cb.wavelet_pass(2 * C, 1LL * H2 * W2, len);
        cb.conv_pw(4 * C, 2 * C, 1LL * H2 * W2);
        for (int i = 0; i < cfg.blocks_per_level[1]; ++i) block_cost(2 * C, H2, W2);
        cb.wavelet_pass(2 * C, 1LL * H2 * W2, len); // fixed analysis feeding head2
        cb.conv3x3(8 * C, 3 * io, 1LL * H4 * W4);
        if (variant == Variant::L) {
            cb.conv_pw(2 * C, 4 * C, 1LL * H2 * W2);
            cb.wavelet_pass(C, 1LL * H * W, len);
            cb.conv_pw(2 * C, C, 1LL * H * W);
            for (int i = 0; i < cfg.blocks_per_level[0]; ++i) block_cost(C, H, W);
            cb.wavelet_pass(C, 1LL * H * W, len); // fixed analysis feeding head1
            cb.conv3x3(4 * C, 3 * io, 1LL * H2 * W2);
        }
    }
    return cb.macs;
}

} // namespace pwf::model
