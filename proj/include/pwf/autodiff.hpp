#pragma once
// Reverse-mode gradient engine over a dynamically recorded tape, with the
// operator set the restoration model needs: pointwise / 3x3 / depthwise
// convolutions, GELU, elementwise plumbing, unitary (tiled) 2-D FFT pairs,
// and separable wavelet analysis / synthesis with learnable filters.

#include "pwf/fourier.hpp"
#include "pwf/tensor.hpp"
#include "pwf/wavelet.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace pwf::ad {

template <class T>
struct ParamTensor {
    Tensor<T> value;
    Tensor<T> grad;
    std::string name;

    ParamTensor() = default;
    ParamTensor(std::string n, Tensor<T> v) : value(std::move(v)), grad(Tensor<T>(value.shape)), name(std::move(n)) {}

    void zero_grad() { std::fill(grad.data.begin(), grad.data.end(), T(0)); }
};

struct Var {
    int idx = -1;
    bool valid() const { return idx >= 0; }
};

template <class T>
class Tape {
  public:
    struct Node {
        Tensor<T> value;
        Tensor<T> grad;
        bool needs_grad = false;
        ParamTensor<T>* param = nullptr;
        std::function<void(Tape&)> backward; // accumulates into input grads
    };

    const Tensor<T>& value(Var v) const { return nodes_[v.idx].value; }
    Tensor<T>& grad(Var v) { return nodes_[v.idx].grad; }
    bool needs_grad(Var v) const { return nodes_[v.idx].needs_grad; }
    std::size_t size() const { return nodes_.size(); }

    Var constant(Tensor<T> t) { return push(std::move(t), false, nullptr, {}); }
    Var input(Tensor<T> t, bool requires_grad = false) { return push(std::move(t), requires_grad, nullptr, {}); }
    Var param(ParamTensor<T>& p) { return push(p.value, true, &p, {}); }

    // ---- elementwise / reduction ----

    Var add(Var a, Var b) {
        require_same_shape(value(a), value(b), "add");
        Tensor<T> y(value(a).shape);
        kern::add(value(a).ptr(), value(b).ptr(), y.ptr(), y.numel());
        return push(std::move(y), needs_grad(a) || needs_grad(b), nullptr, [a, b, out = next()](Tape& t) {
            const Tensor<T>& g = t.nodes_[out].grad;
            if (t.needs_grad(a)) kern::add(t.grad(a).ptr(), g.ptr(), t.grad(a).ptr(), g.numel());
            if (t.needs_grad(b)) kern::add(t.grad(b).ptr(), g.ptr(), t.grad(b).ptr(), g.numel());
        });
    }

    Var sub(Var a, Var b) {
        require_same_shape(value(a), value(b), "sub");
        Tensor<T> y(value(a).shape);
        kern::sub(value(a).ptr(), value(b).ptr(), y.ptr(), y.numel());
        return push(std::move(y), needs_grad(a) || needs_grad(b), nullptr, [a, b, out = next()](Tape& t) {
            const Tensor<T>& g = t.nodes_[out].grad;
            if (t.needs_grad(a)) kern::add(t.grad(a).ptr(), g.ptr(), t.grad(a).ptr(), g.numel());
            if (t.needs_grad(b)) kern::axpy(t.grad(b).ptr(), T(-1), g.ptr(), g.numel());
        });
    }

    Var mul_scalar(Var a, T s) {
        Tensor<T> y(value(a).shape);
        kern::scale(value(a).ptr(), s, y.ptr(), y.numel());
        return push(std::move(y), needs_grad(a), nullptr, [a, s, out = next()](Tape& t) {
            if (t.needs_grad(a))
                kern::axpy(t.grad(a).ptr(), s, t.nodes_[out].grad.ptr(), t.nodes_[out].grad.numel());
        });
    }

    Var gelu(Var a) {
        const Tensor<T>& x = value(a);
        Tensor<T> y(x.shape);
        for (std::size_t i = 0; i < x.numel(); ++i) {
            const double xv = static_cast<double>(x.data[i]);
            y.data[i] = static_cast<T>(xv * phi(xv));
        }
        return push(std::move(y), needs_grad(a), nullptr, [a, out = next()](Tape& t) {
            if (!t.needs_grad(a)) return;
            const Tensor<T>& x = t.value(a);
            const Tensor<T>& g = t.nodes_[out].grad;
            Tensor<T>& gx = t.grad(a);
            for (std::size_t i = 0; i < x.numel(); ++i) {
                const double xv = static_cast<double>(x.data[i]);
                const double d = phi(xv) + xv * dphi(xv);
                gx.data[i] += static_cast<T>(d * static_cast<double>(g.data[i]));
            }
        });
    }

    // sum of absolute values -> scalar tensor [1]
    Var l1(Var a) {
        const Tensor<T>& x = value(a);
        double s = 0;
        for (auto v : x.data) s += std::abs(static_cast<double>(v));
        Tensor<T> y({1});
        y.data[0] = static_cast<T>(s);
        return push(std::move(y), needs_grad(a), nullptr, [a, out = next()](Tape& t) {
            if (!t.needs_grad(a)) return;
            const T g = t.nodes_[out].grad.data[0];
            const Tensor<T>& x = t.value(a);
            Tensor<T>& gx = t.grad(a);
            for (std::size_t i = 0; i < x.numel(); ++i)
                gx.data[i] += g * static_cast<T>((x.data[i] > T(0)) - (x.data[i] < T(0)));
        });
    }

    // sum_i w_i * |x_i| with constant weights
    Var weighted_l1(Var a, std::shared_ptr<const Tensor<T>> w) {
        const Tensor<T>& x = value(a);
        require_same_shape(x, *w, "weighted_l1");
        double s = 0;
        for (std::size_t i = 0; i < x.numel(); ++i)
            s += static_cast<double>(w->data[i]) * std::abs(static_cast<double>(x.data[i]));
        Tensor<T> y({1});
        y.data[0] = static_cast<T>(s);
        return push(std::move(y), needs_grad(a), nullptr, [a, w, out = next()](Tape& t) {
            if (!t.needs_grad(a)) return;
            const T g = t.nodes_[out].grad.data[0];
            const Tensor<T>& x = t.value(a);
            Tensor<T>& gx = t.grad(a);
            for (std::size_t i = 0; i < x.numel(); ++i)
                gx.data[i] += g * w->data[i] * static_cast<T>((x.data[i] > T(0)) - (x.data[i] < T(0)));
        });
    }

    // sum over complex bins of w * sqrt(re^2 + im^2); channels [0,C) hold the
    // real parts and [C,2C) the imaginary parts, weights indexed per-bin by
    // the real-part position
    Var complex_modulus_l1(Var a, std::shared_ptr<const Tensor<T>> w) {
        const Tensor<T>& x = value(a);
        if (x.ndim() != 3 || x.dim(0) % 2) throw ShapeError("complex_modulus_l1: channels must be 2C");
        const std::size_t half = x.numel() / 2;
        double s = 0;
        for (std::size_t i = 0; i < half; ++i) {
            const double re = static_cast<double>(x.data[i]);
            const double im = static_cast<double>(x.data[half + i]);
            s += static_cast<double>(w->data[i]) * std::sqrt(re * re + im * im);
        }
        Tensor<T> y({1});
        y.data[0] = static_cast<T>(s);
        return push(std::move(y), needs_grad(a), nullptr, [a, w, out = next()](Tape& t) {
            if (!t.needs_grad(a)) return;
            const T g = t.nodes_[out].grad.data[0];
            const Tensor<T>& x = t.value(a);
            Tensor<T>& gx = t.grad(a);
            const std::size_t half = x.numel() / 2;
            for (std::size_t i = 0; i < half; ++i) {
                const double re = static_cast<double>(x.data[i]);
                const double im = static_cast<double>(x.data[half + i]);
                const double mod = std::sqrt(re * re + im * im);
                if (mod == 0.0) continue;
                const double k = static_cast<double>(g) * static_cast<double>(w->data[i]) / mod;
                gx.data[i] += static_cast<T>(k * re);
                gx.data[half + i] += static_cast<T>(k * im);
            }
        });
    }

    // ---- channel shuffling ----

    Var concat_channels(const std::vector<Var>& parts) {
        if (parts.empty()) throw ContractError("concat_channels: no inputs");
        const int h = value(parts[0]).dim(1), w = value(parts[0]).dim(2);
        int ctot = 0;
        bool ng = false;
        for (Var p : parts) {
            if (value(p).dim(1) != h || value(p).dim(2) != w)
                throw ShapeError("concat_channels: spatial mismatch");
            ctot += value(p).dim(0);
            ng = ng || needs_grad(p);
        }
        Tensor<T> y({ctot, h, w});
        std::size_t off = 0;
        for (Var p : parts) {
            std::copy(value(p).data.begin(), value(p).data.end(), y.data.begin() + off);
            off += value(p).numel();
        }
        return push(std::move(y), ng, nullptr, [parts, out = next()](Tape& t) {
            const Tensor<T>& g = t.nodes_[out].grad;
            std::size_t off = 0;
            for (Var p : parts) {
                const std::size_t n = t.value(p).numel();
                if (t.needs_grad(p))
                    kern::add(t.grad(p).ptr(), g.ptr() + off, t.grad(p).ptr(), n);
                off += n;
            }
        });
    }

    Var slice_channels(Var a, int c0, int count) {
        const Tensor<T>& x = value(a);
        if (c0 < 0 || c0 + count > x.dim(0)) throw ShapeError("slice_channels: out of range");
        Tensor<T> y({count, x.dim(1), x.dim(2)});
        std::copy(x.data.begin() + x.plane(c0), x.data.begin() + x.plane(c0 + count), y.data.begin());
        return push(std::move(y), needs_grad(a), nullptr, [a, c0, out = next()](Tape& t) {
            if (!t.needs_grad(a)) return;
            const Tensor<T>& g = t.nodes_[out].grad;
            kern::add(t.grad(a).ptr() + t.value(a).plane(c0), g.ptr(),
                      t.grad(a).ptr() + t.value(a).plane(c0), g.numel());
        });
    }

    // ---- convolutions ----

    // y[c] = b[c] + sum_k w[c,k] * x[k], w shape (Cout,Cin), b shape (Cout)
    Var conv_pointwise(Var xv, Var wv, Var bv) {
        const Tensor<T>& x = value(xv);
        const Tensor<T>& w = value(wv);
        const Tensor<T>& b = value(bv);
        if (x.ndim() != 3 || w.ndim() != 2 || w.dim(1) != x.dim(0) || b.dim(0) != w.dim(0))
            throw ShapeError("conv_pointwise: bad shapes");
        const int ci = x.dim(0), co = w.dim(0), h = x.dim(1), wd = x.dim(2);
        const std::size_t hw = static_cast<std::size_t>(h) * wd;
        Tensor<T> y({co, h, wd});
        for (int c = 0; c < co; ++c) {
            T* yc = y.ptr() + y.plane(c);
            std::fill(yc, yc + hw, b.data[c]);
            for (int k = 0; k < ci; ++k)
                kern::axpy(yc, w.data[static_cast<std::size_t>(c) * ci + k], x.ptr() + x.plane(k), hw);
        }
        bool ng = needs_grad(xv) || needs_grad(wv) || needs_grad(bv);
        return push(std::move(y), ng, nullptr, [xv, wv, bv, out = next()](Tape& t) {
            const Tensor<T>& g = t.nodes_[out].grad;
            const Tensor<T>& x = t.value(xv);
            const Tensor<T>& w = t.value(wv);
            const int ci = x.dim(0), co = w.dim(0);
            const std::size_t hw = static_cast<std::size_t>(x.dim(1)) * x.dim(2);
            if (t.needs_grad(xv)) {
                Tensor<T>& gx = t.grad(xv);
                for (int c = 0; c < co; ++c)
                    for (int k = 0; k < ci; ++k)
                        kern::axpy(gx.ptr() + gx.plane(k), w.data[static_cast<std::size_t>(c) * ci + k],
                                   g.ptr() + g.plane(c), hw);
            }
            if (t.needs_grad(wv)) {
                Tensor<T>& gw = t.grad(wv);
                for (int c = 0; c < co; ++c)
                    for (int k = 0; k < ci; ++k) {
                        const T* gc = g.ptr() + g.plane(c);
                        const T* xk = x.ptr() + x.plane(k);
                        T acc = 0;
                        for (std::size_t i = 0; i < hw; ++i) acc += gc[i] * xk[i];
                        gw.data[static_cast<std::size_t>(c) * ci + k] += acc;
                    }
            }
            if (t.needs_grad(bv)) {
                Tensor<T>& gb = t.grad(bv);
                for (int c = 0; c < co; ++c) {
                    const T* gc = g.ptr() + g.plane(c);
                    T acc = 0;
                    for (std::size_t i = 0; i < hw; ++i) acc += gc[i];
                    gb.data[c] += acc;
                }
            }
        });
    }

    // full 3x3 convolution with zero padding 1, w shape (Cout,Cin,3,3)
    Var conv3x3(Var xv, Var wv, Var bv) {
        const Tensor<T>& x = value(xv);
        const Tensor<T>& w = value(wv);
        const Tensor<T>& b = value(bv);
        if (x.ndim() != 3 || w.ndim() != 4 || w.dim(1) != x.dim(0) || w.dim(2) != 3 || w.dim(3) != 3 ||
            b.dim(0) != w.dim(0))
            throw ShapeError("conv3x3: bad shapes");
        const int ci = x.dim(0), co = w.dim(0), h = x.dim(1), wd = x.dim(2);
        Tensor<T> y({co, h, wd});
        for (int c = 0; c < co; ++c) {
            T* yp = y.ptr() + y.plane(c);
            std::fill(yp, yp + static_cast<std::size_t>(h) * wd, b.data[c]);
            for (int k = 0; k < ci; ++k)
                conv3x3_accum(x.ptr() + x.plane(k), h, wd,
                              w.ptr() + ((static_cast<std::size_t>(c) * ci + k) * 9), yp);
        }
        bool ng = needs_grad(xv) || needs_grad(wv) || needs_grad(bv);
        return push(std::move(y), ng, nullptr, [xv, wv, bv, out = next()](Tape& t) {
            t.conv3x3_backward(xv, wv, bv, out);
        });
    }

    // depthwise 3x3 with zero padding 1, w shape (C,3,3)
    Var conv_depthwise3x3(Var xv, Var wv, Var bv) {
        const Tensor<T>& x = value(xv);
        const Tensor<T>& w = value(wv);
        const Tensor<T>& b = value(bv);
        if (x.ndim() != 3 || w.ndim() != 3 || w.dim(0) != x.dim(0) || w.dim(1) != 3 || w.dim(2) != 3 ||
            b.dim(0) != x.dim(0))
            throw ShapeError("conv_depthwise3x3: bad shapes");
        const int c = x.dim(0), h = x.dim(1), wd = x.dim(2);
        Tensor<T> y({c, h, wd});
        for (int k = 0; k < c; ++k) {
            T* yp = y.ptr() + y.plane(k);
            std::fill(yp, yp + static_cast<std::size_t>(h) * wd, b.data[k]);
            conv3x3_accum(x.ptr() + x.plane(k), h, wd, w.ptr() + static_cast<std::size_t>(k) * 9, yp);
        }
        bool ng = needs_grad(xv) || needs_grad(wv) || needs_grad(bv);
        return push(std::move(y), ng, nullptr, [xv, wv, bv, out = next()](Tape& t) {
            const Tensor<T>& g = t.nodes_[out].grad;
            const Tensor<T>& x = t.value(xv);
            const Tensor<T>& w = t.value(wv);
            const int c = x.dim(0), h = x.dim(1), wd = x.dim(2);
            for (int k = 0; k < c; ++k) {
                if (t.needs_grad(xv))
                    conv3x3_input_grad(g.ptr() + g.plane(k), h, wd,
                                       w.ptr() + static_cast<std::size_t>(k) * 9,
                                       t.grad(xv).ptr() + x.plane(k));
                if (t.needs_grad(wv))
                    conv3x3_weight_grad(x.ptr() + x.plane(k), g.ptr() + g.plane(k), h, wd,
                                        t.grad(wv).ptr() + static_cast<std::size_t>(k) * 9);
                if (t.needs_grad(bv)) {
                    const T* gp = g.ptr() + g.plane(k);
                    T acc = 0;
                    for (std::size_t i = 0; i < static_cast<std::size_t>(h) * wd; ++i) acc += gp[i];
                    t.grad(bv).data[k] += acc;
                }
            }
        });
    }

    // ---- unitary FFT pairs (tiled; kh=H, kw=W gives the global transform) ----

    // (C,H,W) -> (2C, H', W') with real parts in channels [0,C) and imaginary
    // parts in [C,2C); tiles of kh x kw map to kh x (kw/2+1) frequency tiles
    // laid out in the same grid. H,W must be divisible by kh,kw.
    Var rfft2c(Var xv, int kh, int kw) {
        const Tensor<T>& x = value(xv);
        check_tiles(x, kh, kw, "rfft2c");
        const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
        const int kwh = kw / 2 + 1;
        const int oh = h, ow = (w / kw) * kwh;
        Tensor<T> y({2 * c, oh, ow});
        std::vector<fft::cd> buf;
        for (int ch = 0; ch < c; ++ch)
            for (int tr = 0; tr < h / kh; ++tr)
                for (int tc = 0; tc < w / kw; ++tc) {
                    load_tile(x, ch, tr * kh, tc * kw, kh, kw, buf);
                    fft::transform2d(buf.data(), kh, kw, false);
                    for (int r = 0; r < kh; ++r)
                        for (int q = 0; q < kwh; ++q) {
                            const fft::cd v = buf[static_cast<std::size_t>(r) * kw + q];
                            y.at(ch, tr * kh + r, tc * kwh + q) = static_cast<T>(v.real());
                            y.at(c + ch, tr * kh + r, tc * kwh + q) = static_cast<T>(v.imag());
                        }
                }
        return push(std::move(y), needs_grad(xv), nullptr, [xv, kh, kw, out = next()](Tape& t) {
            if (!t.needs_grad(xv)) return;
            const Tensor<T>& g = t.nodes_[out].grad;
            const Tensor<T>& x = t.value(xv);
            Tensor<T>& gx = t.grad(xv);
            const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
            const int kwh = kw / 2 + 1;
            std::vector<fft::cd> buf(static_cast<std::size_t>(kh) * kw);
            for (int ch = 0; ch < c; ++ch)
                for (int tr = 0; tr < h / kh; ++tr)
                    for (int tc = 0; tc < w / kw; ++tc) {
                        std::fill(buf.begin(), buf.end(), fft::cd(0, 0));
                        for (int r = 0; r < kh; ++r)
                            for (int q = 0; q < kwh; ++q)
                                buf[static_cast<std::size_t>(r) * kw + q] =
                                    fft::cd(g.at(ch, tr * kh + r, tc * kwh + q),
                                            g.at(c + ch, tr * kh + r, tc * kwh + q));
                        fft::transform2d(buf.data(), kh, kw, true);
                        for (int r = 0; r < kh; ++r)
                            for (int q = 0; q < kw; ++q)
                                gx.at(ch, tr * kh + r, tc * kw + q) +=
                                    static_cast<T>(buf[static_cast<std::size_t>(r) * kw + q].real());
                    }
        });
    }

    // Inverse of rfft2c: (2C,H',W') frequency tiles back to (C,H,W). Mirrors
    // are Hermitian-completed from the stored half plane; the output is the
    // real part of the inverse transform.
    Var irfft2c(Var zv, int kh, int kw) {
        const Tensor<T>& z = value(zv);
        const int kwh = kw / 2 + 1;
        if (z.ndim() != 3 || z.dim(0) % 2 != 0 || z.dim(1) % kh != 0 || z.dim(2) % kwh != 0)
            throw ShapeError("irfft2c: bad shapes");
        const int c = z.dim(0) / 2, oh = z.dim(1), tcols = z.dim(2) / kwh;
        const int h = oh, w = tcols * kw;
        Tensor<T> y({c, h, w});
        std::vector<fft::cd> buf(static_cast<std::size_t>(kh) * kw);
        for (int ch = 0; ch < c; ++ch)
            for (int tr = 0; tr < h / kh; ++tr)
                for (int tc = 0; tc < tcols; ++tc) {
                    for (int r = 0; r < kh; ++r)
                        for (int q = 0; q < kw; ++q) {
                            if (q < kwh)
                                buf[static_cast<std::size_t>(r) * kw + q] =
                                    fft::cd(z.at(ch, tr * kh + r, tc * kwh + q),
                                            z.at(c + ch, tr * kh + r, tc * kwh + q));
                            else {
                                const int rm = (kh - r) % kh, qm = kw - q;
                                buf[static_cast<std::size_t>(r) * kw + q] =
                                    std::conj(fft::cd(z.at(ch, tr * kh + rm, tc * kwh + qm),
                                                      z.at(c + ch, tr * kh + rm, tc * kwh + qm)));
                            }
                        }
                    fft::transform2d(buf.data(), kh, kw, true);
                    for (int r = 0; r < kh; ++r)
                        for (int q = 0; q < kw; ++q)
                            y.at(ch, tr * kh + r, tc * kw + q) =
                                static_cast<T>(buf[static_cast<std::size_t>(r) * kw + q].real());
                }
        return push(std::move(y), needs_grad(zv), nullptr, [zv, kh, kw, out = next()](Tape& t) {
            if (!t.needs_grad(zv)) return;
            const Tensor<T>& g = t.nodes_[out].grad;
            const Tensor<T>& z = t.value(zv);
            Tensor<T>& gz = t.grad(zv);
            const int kwh = kw / 2 + 1;
            const int c = z.dim(0) / 2, h = g.dim(1), w = g.dim(2);
            std::vector<fft::cd> buf;
            for (int ch = 0; ch < c; ++ch)
                for (int tr = 0; tr < h / kh; ++tr)
                    for (int tc = 0; tc < w / kw; ++tc) {
                        load_tile(g, ch, tr * kh, tc * kw, kh, kw, buf);
                        fft::transform2d(buf.data(), kh, kw, false);
                        for (int r = 0; r < kh; ++r)
                            for (int q = 0; q < kwh; ++q) {
                                fft::cd u = buf[static_cast<std::size_t>(r) * kw + q];
                                // fold in the one full-plane position (if any) that the
                                // forward filled with conj of this stored bin
                                if (q > 0 && kw - q >= kwh) {
                                    const int rm = (kh - r) % kh;
                                    u += std::conj(buf[static_cast<std::size_t>(rm) * kw + (kw - q)]);
                                }
                                gz.at(ch, tr * kh + r, tc * kwh + q) += static_cast<T>(u.real());
                                gz.at(c + ch, tr * kh + r, tc * kwh + q) += static_cast<T>(u.imag());
                            }
                    }
        });
    }

    // ---- reflect pad / crop (for windowed mixers on indivisible sizes) ----

    Var reflect_pad2d(Var xv, int hp, int wp) {
        const Tensor<T>& x = value(xv);
        const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
        if (hp < h || wp < w) throw ShapeError("reflect_pad2d: target smaller than input");
        Tensor<T> y({c, hp, wp});
        for (int ch = 0; ch < c; ++ch)
            for (int r = 0; r < hp; ++r)
                for (int q = 0; q < wp; ++q)
                    y.at(ch, r, q) = x.at(ch, fourier::reflect_index(r, h), fourier::reflect_index(q, w));
        return push(std::move(y), needs_grad(xv), nullptr, [xv, hp, wp, out = next()](Tape& t) {
            if (!t.needs_grad(xv)) return;
            const Tensor<T>& g = t.nodes_[out].grad;
            const Tensor<T>& x = t.value(xv);
            Tensor<T>& gx = t.grad(xv);
            const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
            for (int ch = 0; ch < c; ++ch)
                for (int r = 0; r < hp; ++r)
                    for (int q = 0; q < wp; ++q)
                        gx.at(ch, fourier::reflect_index(r, h), fourier::reflect_index(q, w)) +=
                            g.at(ch, r, q);
        });
    }

    Var crop2d(Var xv, int h, int w) {
        const Tensor<T>& x = value(xv);
        const int c = x.dim(0);
        if (h > x.dim(1) || w > x.dim(2)) throw ShapeError("crop2d: target larger than input");
        Tensor<T> y({c, h, w});
        for (int ch = 0; ch < c; ++ch)
            for (int r = 0; r < h; ++r)
                for (int q = 0; q < w; ++q) y.at(ch, r, q) = x.at(ch, r, q);
        return push(std::move(y), needs_grad(xv), nullptr, [xv, h, w, out = next()](Tape& t) {
            if (!t.needs_grad(xv)) return;
            const Tensor<T>& g = t.nodes_[out].grad;
            Tensor<T>& gx = t.grad(xv);
            const int c = gx.dim(0);
            for (int ch = 0; ch < c; ++ch)
                for (int r = 0; r < h; ++r)
                    for (int q = 0; q < w; ++q) gx.at(ch, r, q) += g.at(ch, r, q);
        });
    }

    // ---- separable wavelet analysis / synthesis with (learnable) filters ----

    // (C,H,W) -> (4C,H/2,W/2), band blocks ordered [ll, lh, hl, hh]
    Var wavelet_down(Var xv, Var lov, Var hiv, int s_lo, int s_hi) {
        const Tensor<T>& x = value(xv);
        const Tensor<T>& lo = value(lov);
        const Tensor<T>& hi = value(hiv);
        if (x.ndim() != 3 || x.dim(1) % 2 || x.dim(2) % 2)
            throw ShapeError("wavelet_down: H,W must be even");
        const int c = x.dim(0), h = x.dim(1), w = x.dim(2), len = lo.dim(0);
        const int h2 = h / 2, w2 = w / 2;
        Tensor<T> y({4 * c, h2, w2});
        // saved row-pass intermediates for the filter gradients
        auto lw = std::make_shared<Tensor<T>>(Shape{c, h, w2});
        auto hw = std::make_shared<Tensor<T>>(Shape{c, h, w2});
        for (int ch = 0; ch < c; ++ch) {
            const T* xp = x.ptr() + x.plane(ch);
            T* lwp = lw->ptr() + lw->plane(ch);
            T* hwp = hw->ptr() + hw->plane(ch);
            for (int r = 0; r < h; ++r) {
                wavelet::analyze_line(xp + static_cast<std::size_t>(r) * w, w, 1, lo.ptr(), len, s_lo,
                                      lwp + static_cast<std::size_t>(r) * w2, 1);
                wavelet::analyze_line(xp + static_cast<std::size_t>(r) * w, w, 1, hi.ptr(), len, s_hi,
                                      hwp + static_cast<std::size_t>(r) * w2, 1);
            }
            for (int q = 0; q < w2; ++q) {
                wavelet::analyze_line(lwp + q, h, w2, lo.ptr(), len, s_lo, y.ptr() + y.plane(ch) + q, w2);
                wavelet::analyze_line(lwp + q, h, w2, hi.ptr(), len, s_hi, y.ptr() + y.plane(c + ch) + q, w2);
                wavelet::analyze_line(hwp + q, h, w2, lo.ptr(), len, s_lo, y.ptr() + y.plane(2 * c + ch) + q, w2);
                wavelet::analyze_line(hwp + q, h, w2, hi.ptr(), len, s_hi, y.ptr() + y.plane(3 * c + ch) + q, w2);
            }
        }
        bool ng = needs_grad(xv) || needs_grad(lov) || needs_grad(hiv);
        return push(std::move(y), ng, nullptr, [xv, lov, hiv, s_lo, s_hi, lw, hw, out = next()](Tape& t) {
            t.wavelet_down_backward(xv, lov, hiv, s_lo, s_hi, *lw, *hw, out);
        });
    }

    // (4C,H2,W2) -> (C,2*H2,2*W2); exact inverse of wavelet_down when given a
    // matching synthesis bank
    Var wavelet_up(Var zv, Var lov, Var hiv, int s_lo, int s_hi) {
        const Tensor<T>& z = value(zv);
        const Tensor<T>& lo = value(lov);
        const Tensor<T>& hi = value(hiv);
        if (z.ndim() != 3 || z.dim(0) % 4) throw ShapeError("wavelet_up: channels must be 4C");
        const int c = z.dim(0) / 4, h2 = z.dim(1), w2 = z.dim(2), len = lo.dim(0);
        const int h = 2 * h2, w = 2 * w2;
        Tensor<T> y({c, h, w});
        auto lw = std::make_shared<Tensor<T>>(Shape{c, h, w2});
        auto hw = std::make_shared<Tensor<T>>(Shape{c, h, w2});
        std::fill(lw->data.begin(), lw->data.end(), T(0));
        std::fill(hw->data.begin(), hw->data.end(), T(0));
        for (int ch = 0; ch < c; ++ch) {
            T* lwp = lw->ptr() + lw->plane(ch);
            T* hwp = hw->ptr() + hw->plane(ch);
            for (int q = 0; q < w2; ++q) {
                wavelet::scatter_line(z.ptr() + z.plane(ch) + q, h, w2, lo.ptr(), len, s_lo, lwp + q, w2);
                wavelet::scatter_line(z.ptr() + z.plane(c + ch) + q, h, w2, hi.ptr(), len, s_hi, lwp + q, w2);
                wavelet::scatter_line(z.ptr() + z.plane(2 * c + ch) + q, h, w2, lo.ptr(), len, s_lo, hwp + q, w2);
                wavelet::scatter_line(z.ptr() + z.plane(3 * c + ch) + q, h, w2, hi.ptr(), len, s_hi, hwp + q, w2);
            }
            T* yp = y.ptr() + y.plane(ch);
            for (int r = 0; r < h; ++r) {
                wavelet::scatter_line(lwp + static_cast<std::size_t>(r) * w2, w, 1, lo.ptr(), len, s_lo,
                                      yp + static_cast<std::size_t>(r) * w, 1);
                wavelet::scatter_line(hwp + static_cast<std::size_t>(r) * w2, w, 1, hi.ptr(), len, s_hi,
                                      yp + static_cast<std::size_t>(r) * w, 1);
            }
        }
        bool ng = needs_grad(zv) || needs_grad(lov) || needs_grad(hiv);
        return push(std::move(y), ng, nullptr, [zv, lov, hiv, s_lo, s_hi, lw, hw, out = next()](Tape& t) {
            t.wavelet_up_backward(zv, lov, hiv, s_lo, s_hi, *lw, *hw, out);
        });
    }

    // ---- reverse pass ----

    void backward(Var loss) {
        if (value(loss).numel() != 1) throw ContractError("backward: loss must be scalar");
        for (auto& n : nodes_) {
            n.grad = Tensor<T>(n.value.shape);
        }
        nodes_[loss.idx].grad.data[0] = T(1);
        for (int i = loss.idx; i >= 0; --i) {
            Node& n = nodes_[i];
            if (n.needs_grad && n.backward) n.backward(*this);
        }
        for (auto& n : nodes_)
            if (n.param)
                kern::add(n.param->grad.ptr(), n.grad.ptr(), n.param->grad.ptr(), n.grad.numel());
    }

  private:
    std::vector<Node> nodes_;

    int next() const { return static_cast<int>(nodes_.size()); }

    Var push(Tensor<T> value, bool needs_grad, ParamTensor<T>* p, std::function<void(Tape&)> bw) {
        Node n;
        n.value = std::move(value);
        n.needs_grad = needs_grad;
        n.param = p;
        if (needs_grad) n.backward = std::move(bw);
        nodes_.push_back(std::move(n));
        return Var{static_cast<int>(nodes_.size()) - 1};
    }

    static double phi(double x) { return 0.5 * (1.0 + std::erf(x / 1.4142135623730951)); }
    static double dphi(double x) { return std::exp(-0.5 * x * x) / 2.5066282746310002; }

    static void check_tiles(const Tensor<T>& x, int kh, int kw, const char* what) {
        if (x.ndim() != 3) throw ShapeError(std::string(what) + ": expected (C,H,W)");
        if (kh <= 0 || kw <= 0) throw ContractError(std::string(what) + ": window must be positive");
        if (x.dim(1) % kh || x.dim(2) % kw)
            throw ShapeError(std::string(what) + ": spatial size not divisible by window");
    }

    static void load_tile(const Tensor<T>& x, int ch, int r0, int c0, int kh, int kw,
                          std::vector<fft::cd>& buf) {
        buf.assign(static_cast<std::size_t>(kh) * kw, fft::cd(0, 0));
        for (int r = 0; r < kh; ++r)
            for (int q = 0; q < kw; ++q)
                buf[static_cast<std::size_t>(r) * kw + q] =
                    fft::cd(static_cast<double>(x.at(ch, r0 + r, c0 + q)), 0.0);
    }

    // y += conv3x3(x, w) for one (in,out) channel pair, zero padding 1
    static void conv3x3_accum(const T* x, int h, int w, const T* k9, T* y) {
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                const T wv = k9[(dy + 1) * 3 + (dx + 1)];
                if (wv == T(0)) continue;
                const int r0 = std::max(0, -dy), r1 = std::min(h, h - dy);
                const int c0 = std::max(0, -dx), c1 = std::min(w, w - dx);
                for (int r = r0; r < r1; ++r)
                    kern::axpy(y + static_cast<std::size_t>(r) * w + c0, wv,
                               x + static_cast<std::size_t>(r + dy) * w + c0 + dx,
                               static_cast<std::size_t>(c1 - c0));
            }
    }

    // gx += corr(g, flipped w): transpose of conv3x3_accum
    static void conv3x3_input_grad(const T* g, int h, int w, const T* k9, T* gx) {
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                const T wv = k9[(dy + 1) * 3 + (dx + 1)];
                if (wv == T(0)) continue;
                const int r0 = std::max(0, -dy), r1 = std::min(h, h - dy);
                const int c0 = std::max(0, -dx), c1 = std::min(w, w - dx);
                for (int r = r0; r < r1; ++r)
                    kern::axpy(gx + static_cast<std::size_t>(r + dy) * w + c0 + dx, wv,
                               g + static_cast<std::size_t>(r) * w + c0,
                               static_cast<std::size_t>(c1 - c0));
            }
    }

    static void conv3x3_weight_grad(const T* x, const T* g, int h, int w, T* gk9) {
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                const int r0 = std::max(0, -dy), r1 = std::min(h, h - dy);
                const int c0 = std::max(0, -dx), c1 = std::min(w, w - dx);
                T acc = 0;
                for (int r = r0; r < r1; ++r) {
                    const T* gr = g + static_cast<std::size_t>(r) * w;
                    const T* xr = x + static_cast<std::size_t>(r + dy) * w + dx;
                    for (int q = c0; q < c1; ++q) acc += gr[q] * xr[q];
                }
                gk9[(dy + 1) * 3 + (dx + 1)] += acc;
            }
    }

    void conv3x3_backward(Var xv, Var wv, Var bv, int out) {
        const Tensor<T>& g = nodes_[out].grad;
        const Tensor<T>& x = value(xv);
        const Tensor<T>& w = value(wv);
        const int ci = x.dim(0), co = w.dim(0), h = x.dim(1), wd = x.dim(2);
        for (int c = 0; c < co; ++c) {
            const T* gp = g.ptr() + g.plane(c);
            for (int k = 0; k < ci; ++k) {
                const std::size_t woff = (static_cast<std::size_t>(c) * ci + k) * 9;
                if (needs_grad(xv))
                    conv3x3_input_grad(gp, h, wd, w.ptr() + woff, grad(xv).ptr() + x.plane(k));
                if (needs_grad(wv))
                    conv3x3_weight_grad(x.ptr() + x.plane(k), gp, h, wd, grad(wv).ptr() + woff);
            }
            if (needs_grad(bv)) {
                T acc = 0;
                for (std::size_t i = 0; i < static_cast<std::size_t>(h) * wd; ++i) acc += gp[i];
                grad(bv).data[c] += acc;
            }
        }
    }

    // gf[m] += sum_k gout[k] * x[(2k+m-s) mod n], one strided line
    static void filter_grad_line(const T* x, int n, int xs, int s, const T* gout, int gs, T* gf, int len) {
        for (int k = 0; k < n / 2; ++k) {
            const T gv = gout[static_cast<std::size_t>(k) * gs];
            if (gv == T(0)) continue;
            for (int m = 0; m < len; ++m) {
                int i = (2 * k + m - s) % n;
                if (i < 0) i += n;
                gf[m] += gv * x[static_cast<std::size_t>(i) * xs];
            }
        }
    }

    void wavelet_down_backward(Var xv, Var lov, Var hiv, int s_lo, int s_hi, const Tensor<T>& lw,
                               const Tensor<T>& hw, int out) {
        const Tensor<T>& g = nodes_[out].grad;
        const Tensor<T>& x = value(xv);
        const Tensor<T>& lo = value(lov);
        const Tensor<T>& hi = value(hiv);
        const int c = x.dim(0), h = x.dim(1), w = x.dim(2), len = lo.dim(0);
        const int w2 = w / 2;
        const bool g_lo = needs_grad(lov), g_hi = needs_grad(hiv), g_x = needs_grad(xv);
        Tensor<T> glw({h, w2}), ghw({h, w2});
        for (int ch = 0; ch < c; ++ch) {
            const T* gll = g.ptr() + g.plane(ch);
            const T* glh = g.ptr() + g.plane(c + ch);
            const T* ghl = g.ptr() + g.plane(2 * c + ch);
            const T* ghh = g.ptr() + g.plane(3 * c + ch);
            const T* lwp = lw.ptr() + lw.plane(ch);
            const T* hwp = hw.ptr() + hw.plane(ch);
            // column-pass filter grads
            if (g_lo || g_hi)
                for (int q = 0; q < w2; ++q) {
                    if (g_lo) {
                        filter_grad_line(lwp + q, h, w2, s_lo, gll + q, w2, grad(lov).ptr(), len);
                        filter_grad_line(hwp + q, h, w2, s_lo, ghl + q, w2, grad(lov).ptr(), len);
                    }
                    if (g_hi) {
                        filter_grad_line(lwp + q, h, w2, s_hi, glh + q, w2, grad(hiv).ptr(), len);
                        filter_grad_line(hwp + q, h, w2, s_hi, ghh + q, w2, grad(hiv).ptr(), len);
                    }
                }
            // grads of the row-pass intermediates (transpose of column analysis)
            std::fill(glw.data.begin(), glw.data.end(), T(0));
            std::fill(ghw.data.begin(), ghw.data.end(), T(0));
            for (int q = 0; q < w2; ++q) {
                wavelet::scatter_line(gll + q, h, w2, lo.ptr(), len, s_lo, glw.ptr() + q, w2);
                wavelet::scatter_line(glh + q, h, w2, hi.ptr(), len, s_hi, glw.ptr() + q, w2);
                wavelet::scatter_line(ghl + q, h, w2, lo.ptr(), len, s_lo, ghw.ptr() + q, w2);
                wavelet::scatter_line(ghh + q, h, w2, hi.ptr(), len, s_hi, ghw.ptr() + q, w2);
            }
            const T* xp = x.ptr() + x.plane(ch);
            for (int r = 0; r < h; ++r) {
                const T* xr = xp + static_cast<std::size_t>(r) * w;
                if (g_lo) filter_grad_line(xr, w, 1, s_lo, glw.ptr() + static_cast<std::size_t>(r) * w2, 1, grad(lov).ptr(), len);
                if (g_hi) filter_grad_line(xr, w, 1, s_hi, ghw.ptr() + static_cast<std::size_t>(r) * w2, 1, grad(hiv).ptr(), len);
                if (g_x) {
                    T* gxr = grad(xv).ptr() + x.plane(ch) + static_cast<std::size_t>(r) * w;
                    wavelet::scatter_line(glw.ptr() + static_cast<std::size_t>(r) * w2, w, 1, lo.ptr(), len, s_lo, gxr, 1);
                    wavelet::scatter_line(ghw.ptr() + static_cast<std::size_t>(r) * w2, w, 1, hi.ptr(), len, s_hi, gxr, 1);
                }
            }
        }
    }

    void wavelet_up_backward(Var zv, Var lov, Var hiv, int s_lo, int s_hi, const Tensor<T>& lw,
                             const Tensor<T>& hw, int out) {
        const Tensor<T>& gy = nodes_[out].grad;
        const Tensor<T>& z = value(zv);
        const Tensor<T>& lo = value(lov);
        const Tensor<T>& hi = value(hiv);
        const int c = z.dim(0) / 4, h2 = z.dim(1), w2 = z.dim(2), len = lo.dim(0);
        const int h = 2 * h2, w = 2 * w2;
        const bool g_lo = needs_grad(lov), g_hi = needs_grad(hiv), g_z = needs_grad(zv);
        Tensor<T> glw({h, w2}), ghw({h, w2});
        for (int ch = 0; ch < c; ++ch) {
            const T* gyp = gy.ptr() + gy.plane(ch);
            const T* lwp = lw.ptr() + lw.plane(ch);
            const T* hwp = hw.ptr() + hw.plane(ch);
            // row pass: y = S_lo(lw) + S_hi(hw)
            for (int r = 0; r < h; ++r) {
                const T* gyr = gyp + static_cast<std::size_t>(r) * w;
                if (g_lo) filter_grad_line(gyr, w, 1, s_lo, lwp + static_cast<std::size_t>(r) * w2, 1, grad(lov).ptr(), len);
                if (g_hi) filter_grad_line(gyr, w, 1, s_hi, hwp + static_cast<std::size_t>(r) * w2, 1, grad(hiv).ptr(), len);
                wavelet::analyze_line(gyr, w, 1, lo.ptr(), len, s_lo, glw.ptr() + static_cast<std::size_t>(r) * w2, 1);
                wavelet::analyze_line(gyr, w, 1, hi.ptr(), len, s_hi, ghw.ptr() + static_cast<std::size_t>(r) * w2, 1);
            }
            // column pass: lw = S_lo(ll) + S_hi(lh); hw = S_lo(hl) + S_hi(hh)
            const T* zll = z.ptr() + z.plane(ch);
            const T* zlh = z.ptr() + z.plane(c + ch);
            const T* zhl = z.ptr() + z.plane(2 * c + ch);
            const T* zhh = z.ptr() + z.plane(3 * c + ch);
            for (int q = 0; q < w2; ++q) {
                if (g_lo) {
                    filter_grad_line(glw.ptr() + q, h, w2, s_lo, zll + q, w2, grad(lov).ptr(), len);
                    filter_grad_line(ghw.ptr() + q, h, w2, s_lo, zhl + q, w2, grad(lov).ptr(), len);
                }
                if (g_hi) {
                    filter_grad_line(glw.ptr() + q, h, w2, s_hi, zlh + q, w2, grad(hiv).ptr(), len);
                    filter_grad_line(ghw.ptr() + q, h, w2, s_hi, zhh + q, w2, grad(hiv).ptr(), len);
                }
                if (g_z) {
                    Tensor<T>& gz = grad(zv);
                    wavelet::analyze_line_accum(glw.ptr() + q, h, w2, lo.ptr(), len, s_lo, gz.ptr() + gz.plane(ch) + q, w2);
                    wavelet::analyze_line_accum(glw.ptr() + q, h, w2, hi.ptr(), len, s_hi, gz.ptr() + gz.plane(c + ch) + q, w2);
                    wavelet::analyze_line_accum(ghw.ptr() + q, h, w2, lo.ptr(), len, s_lo, gz.ptr() + gz.plane(2 * c + ch) + q, w2);
                    wavelet::analyze_line_accum(ghw.ptr() + q, h, w2, hi.ptr(), len, s_hi, gz.ptr() + gz.plane(3 * c + ch) + q, w2);
                }
            }
        }
    }
};

} // namespace pwf::ad
