#pragma once
// Loss functions, AdamW with decoupled weight decay, cosine learning-rate
// schedule, patch augmentation, and the deterministic training loop.

#include "pwf/imaging.hpp"
#include "pwf/model.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace pwf::train {

// ---- loss configuration ----

enum class LossTerm { Spatial, Wavelet, Fourier };

inline std::vector<LossTerm> parse_loss(const std::string& s) {
    std::vector<LossTerm> terms;
    std::size_t start = 0;
    while (start <= s.size()) {
        std::size_t end = s.find('+', start);
        if (end == std::string::npos) end = s.size();
        const std::string tok = s.substr(start, end - start);
        if (tok == "spatial") terms.push_back(LossTerm::Spatial);
        else if (tok == "wavelet") terms.push_back(LossTerm::Wavelet);
        else if (tok == "fourier") terms.push_back(LossTerm::Fourier);
        else throw ContractError("unknown loss term: " + tok);
        start = end + 1;
        if (end == s.size()) break;
    }
    if (terms.empty()) throw ContractError("empty loss specification");
    return terms;
}

struct TrainConfig {
    long long iterations = 1000;
    int batch = 8;
    int patch = 64;
    double lr0 = 1e-3;
    double lr_min = 1e-6;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 1e-4;
    std::uint64_t seed = 1;
    long long eval_period = 100;
    std::string loss = "fourier";
    bool fourier_modulus = false; // |.| of complex bins instead of L1 on re/im

    void validate() const {
        if (iterations < 0 || batch < 1 || patch < 8 || patch % 4)
            throw ContractError("TrainConfig: bad iterations/batch/patch");
        if (lr0 <= 0 || lr_min < 0 || lr_min > lr0) throw ContractError("TrainConfig: bad lr range");
        parse_loss(loss);
    }
};

// Cosine decay: lr = lr_min + (lr0 - lr_min) * (1 + cos(pi*step/total)) / 2.
inline double cosine_lr(long long step, long long total, double lr0, double lr_min) {
    if (step < 0 || step > total || total < 1) throw ContractError("cosine_lr: step outside [0,total]");
    const double t = static_cast<double>(step) / static_cast<double>(total);
    return lr_min + (lr0 - lr_min) * 0.5 * (1.0 + std::cos(3.14159265358979323846 * t));
}

// ---- per-scale losses on tape variables ----

// Half-plane weights replicating the full-plane spectral L1: off-axis columns
// count twice (they stand for their conjugate mirrors).
template <class T>
std::shared_ptr<const Tensor<T>> halfplane_weights(int c2, int h, int kh, int kw, int wcols) {
    const int kwh = kw / 2 + 1;
    auto w = std::make_shared<Tensor<T>>(Shape{c2, h, wcols});
    for (int ch = 0; ch < c2; ++ch)
        for (int r = 0; r < h; ++r)
            for (int q = 0; q < wcols; ++q) {
                const int u = q % kwh;
                const bool edge = (u == 0) || (kw % 2 == 0 && u == kw / 2);
                w->at(ch, r, q) = edge ? T(1) : T(2);
            }
    return w;
}

// modulus variant: sum_i w_i * sqrt(re_i^2 + im_i^2) over half-plane pairs
template <class T>
ad::Var modulus_l1(ad::Tape<T>& t, ad::Var zv, std::shared_ptr<const Tensor<T>> w) {
    return t.complex_modulus_l1(zv, std::move(w));
}

// Spectral L1 of (out - target) under the orthonormal global FFT.
template <class T>
ad::Var fourier_l1(ad::Tape<T>& t, ad::Var out, const Tensor<T>& target, bool modulus = false) {
    ad::Var d = t.sub(out, t.constant(target));
    const int h = target.dim(1), w = target.dim(2);
    ad::Var z = t.rfft2c(d, h, w);
    auto wt = halfplane_weights<T>(t.value(z).dim(0), t.value(z).dim(1), h, w, t.value(z).dim(2));
    if (modulus) return modulus_l1(t, z, wt);
    return t.weighted_l1(z, wt);
}

// Spatial L1 of (out - target).
template <class T>
ad::Var spatial_l1(ad::Tape<T>& t, ad::Var out, const Tensor<T>& target) {
    return t.l1(t.sub(out, t.constant(target)));
}

// Wavelet-domain L1: one analysis level of the difference with the model's
// family, all four bands weighted equally.
template <class T>
ad::Var wavelet_l1(ad::Tape<T>& t, ad::Var out, const Tensor<T>& target, const wavelet::Family& fam) {
    ad::Var d = t.sub(out, t.constant(target));
    Tensor<T> lo({static_cast<int>(fam.dec_lo.size())}), hi({static_cast<int>(fam.dec_hi.size())});
    for (std::size_t i = 0; i < fam.dec_lo.size(); ++i) lo.data[i] = static_cast<T>(fam.dec_lo[i]);
    for (std::size_t i = 0; i < fam.dec_hi.size(); ++i) hi.data[i] = static_cast<T>(fam.dec_hi[i]);
    ad::Var bands = t.wavelet_down(d, t.constant(std::move(lo)), t.constant(std::move(hi)), fam.s_lo, fam.s_hi);
    return t.l1(bands);
}

// Full multi-scale objective: selected terms, each applied at all three output
// scales against the matching wavelet-projected targets, summed unweighted.
template <class T>
ad::Var total_loss(ad::Tape<T>& t, model::Model<T>& m, const typename model::Model<T>::Forward& fw,
                   const typename model::Model<T>::MultiInput& target, const TrainConfig& cfg) {
    const auto terms = parse_loss(cfg.loss);
    ad::Var acc;
    auto add_term = [&](ad::Var v) { acc = acc.valid() ? t.add(acc, v) : v; };
    const std::pair<ad::Var, const Tensor<T>*> scales[3] = {
        {fw.o1, &target.i1}, {fw.o2, &target.i2}, {fw.o4, &target.i4}};
    for (LossTerm term : terms)
        for (const auto& [o, g] : scales) {
            if (term == LossTerm::Spatial) add_term(spatial_l1(t, o, *g));
            else if (term == LossTerm::Wavelet) add_term(wavelet_l1(t, o, *g, m.fam));
            else add_term(fourier_l1(t, o, *g, cfg.fourier_modulus));
        }
    return acc;
}

// ---- AdamW ----

template <class T>
struct OptState {
    std::map<std::string, Tensor<T>> m, v;
    long long step = 0;
};

template <class T>
void adamw_step(model::Model<T>& model, OptState<T>& st, double lr, const TrainConfig& cfg) {
    ++st.step;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(st.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(st.step));
    for (const auto& p : model.params()) {
        if (!p->grad.all_finite())
            throw ContractError("non-finite gradient in parameter " + p->name + " at step " +
                                std::to_string(st.step));
        auto& m = st.m.try_emplace(p->name, Tensor<T>(p->value.shape)).first->second;
        auto& v = st.v.try_emplace(p->name, Tensor<T>(p->value.shape)).first->second;
        for (std::size_t i = 0; i < p->value.numel(); ++i) {
            const double g = static_cast<double>(p->grad.data[i]);
            const double mi = cfg.beta1 * static_cast<double>(m.data[i]) + (1.0 - cfg.beta1) * g;
            const double vi = cfg.beta2 * static_cast<double>(v.data[i]) + (1.0 - cfg.beta2) * g * g;
            m.data[i] = static_cast<T>(mi);
            v.data[i] = static_cast<T>(vi);
            const double upd = (mi / bc1) / (std::sqrt(vi / bc2) + cfg.eps);
            const double w = static_cast<double>(p->value.data[i]);
            p->value.data[i] = static_cast<T>(w - lr * (upd + cfg.weight_decay * w));
        }
    }
}

// ---- data pipeline ----

template <class T>
struct Pair {
    Tensor<T> input, target;
};

// random crop + one of four rotations + optional flips, same transform on both
template <class T>
Pair<T> augment(const Pair<T>& p, Rng& rng, int patch) {
    const int H = p.input.dim(1), W = p.input.dim(2);
    if (H < patch || W < patch) throw ShapeError("augment: image smaller than patch");
    const int r0 = static_cast<int>(rng.below(static_cast<std::uint32_t>(H - patch + 1)));
    const int c0 = static_cast<int>(rng.below(static_cast<std::uint32_t>(W - patch + 1)));
    const int rot = static_cast<int>(rng.below(4));
    const bool fh = rng.below(2) != 0;
    const bool fv = rng.below(2) != 0;
    auto xf = [&](const Tensor<T>& x) {
        const int C = x.dim(0);
        Tensor<T> out({C, patch, patch});
        for (int c = 0; c < C; ++c)
            for (int r = 0; r < patch; ++r)
                for (int q = 0; q < patch; ++q) {
                    int rr = r, qq = q;
                    if (fv) rr = patch - 1 - rr;
                    if (fh) qq = patch - 1 - qq;
                    int sr = rr, sq = qq;
                    switch (rot) { // inverse rotation into source coordinates
                        case 1: sr = qq; sq = patch - 1 - rr; break;
                        case 2: sr = patch - 1 - rr; sq = patch - 1 - qq; break;
                        case 3: sr = patch - 1 - qq; sq = rr; break;
                        default: break;
                    }
                    out.at(c, r, q) = x.at(c, r0 + sr, c0 + sq);
                }
        return out;
    };
    return {xf(p.input), xf(p.target)};
}

// ---- training loop ----

struct TrainReport {
    long long iterations = 0;
    double final_loss = 0.0;
    double best_eval_psnr = 0.0;
    double final_eval_psnr = 0.0;
};

// Runs `cfg.iterations` single-image steps (batch = gradient accumulation over
// `cfg.batch` sampled patches). Writes `iter,lr,loss,eval_psnr` rows to the
// CSV stream (eval_psnr blank on non-eval iterations) and invokes
// `on_checkpoint(tag)` for "best" and "final".
template <class T>
TrainReport train_loop(model::Model<T>& m, model::Variant variant, const std::vector<Pair<T>>& data,
                       const std::vector<Pair<T>>& eval_data, const TrainConfig& cfg,
                       std::ostream* csv = nullptr,
                       const std::function<void(const std::string&, long long)>& on_checkpoint = {}) {
    cfg.validate();
    if (data.empty()) throw ContractError("train_loop: empty dataset");
    Rng rng(cfg.seed ^ 0x747261696e000000ull);
    OptState<T> st;
    TrainReport rep;
    rep.best_eval_psnr = -1.0;
    if (csv) *csv << "iter,lr,loss,eval_psnr\n";

    auto eval_psnr = [&]() {
        if (eval_data.empty()) return 0.0;
        double acc = 0.0;
        for (const auto& pr : eval_data) {
            ad::Tape<T> t;
            auto fw = m.forward(t, pr.input, variant);
            acc += imaging::psnr(t.value(fw.o1).template cast<double>(),
                                 pr.target.template cast<double>());
        }
        return acc / static_cast<double>(eval_data.size());
    };

    for (long long it = 0; it < cfg.iterations; ++it) {
        const double lr = cosine_lr(it, cfg.iterations, cfg.lr0, cfg.lr_min);
        m.zero_grads();
        double loss_acc = 0.0;
        for (int b = 0; b < cfg.batch; ++b) {
            const auto& sample = data[rng.below(static_cast<std::uint32_t>(data.size()))];
            Pair<T> pr = augment(sample, rng, cfg.patch);
            ad::Tape<T> t;
            auto fw = m.forward(t, pr.input, variant);
            auto tgt = m.multi_input(pr.target);
            ad::Var loss = total_loss(t, m, fw, tgt, cfg);
            loss_acc += static_cast<double>(t.value(loss).data[0]);
            t.backward(loss);
        }
        const double inv = 1.0 / cfg.batch;
        for (const auto& p : m.params())
            for (auto& g : p->grad.data) g = static_cast<T>(static_cast<double>(g) * inv);
        adamw_step(m, st, lr, cfg);
        rep.final_loss = loss_acc * inv;

        const bool do_eval = ((it + 1) % cfg.eval_period == 0) || (it + 1 == cfg.iterations);
        double ep = 0.0;
        if (do_eval) {
            ep = eval_psnr();
            rep.final_eval_psnr = ep;
            if (ep > rep.best_eval_psnr) {
                rep.best_eval_psnr = ep;
                if (on_checkpoint) on_checkpoint("best", it + 1);
            }
        }
        if (csv) {
            char buf[160];
            if (do_eval)
                std::snprintf(buf, sizeof(buf), "%lld,%.8g,%.8g,%.4f\n", it + 1, lr, rep.final_loss, ep);
            else
                std::snprintf(buf, sizeof(buf), "%lld,%.8g,%.8g,\n", it + 1, lr, rep.final_loss);
            *csv << buf;
        }
    }
    if (on_checkpoint) on_checkpoint("final", cfg.iterations);
    rep.iterations = cfg.iterations;
    return rep;
}

} // namespace pwf::train
