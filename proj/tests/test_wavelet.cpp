#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pwf/wavelet.hpp"

#include <cmath>
#include <numeric>

using namespace pwf;

namespace {

// independent naive periodized DWT oracle (direct modular convolution on a
// full h x w plane, no separable-pass reuse)
void naive_dwt2(const Tensor<double>& x, const wavelet::Family& f, Tensor<double>& ll,
                Tensor<double>& lh, Tensor<double>& hl, Tensor<double>& hh) {
    const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
    const int h2 = h / 2, w2 = w / 2;
    const int len = static_cast<int>(f.dec_lo.size());
    ll = Tensor<double>({c, h2, w2});
    lh = Tensor<double>({c, h2, w2});
    hl = Tensor<double>({c, h2, w2});
    hh = Tensor<double>({c, h2, w2});
    auto md = [](int i, int n) { i %= n; return i < 0 ? i + n : i; };
    for (int ch = 0; ch < c; ++ch)
        for (int kr = 0; kr < h2; ++kr)
            for (int kc = 0; kc < w2; ++kc) {
                double a_ll = 0, a_lh = 0, a_hl = 0, a_hh = 0;
                for (int mr = 0; mr < len; ++mr)
                    for (int mc = 0; mc < len; ++mc) {
                        const double v = x.at(ch, md(2 * kr + mr - f.s_lo, h), md(2 * kc + mc - f.s_lo, w));
                        a_ll += f.dec_lo[mr] * f.dec_lo[mc] * v;
                        const double vl = x.at(ch, md(2 * kr + mr - f.s_hi, h), md(2 * kc + mc - f.s_lo, w));
                        a_lh += f.dec_hi[mr] * f.dec_lo[mc] * vl;
                        const double vh = x.at(ch, md(2 * kr + mr - f.s_lo, h), md(2 * kc + mc - f.s_hi, w));
                        a_hl += f.dec_lo[mr] * f.dec_hi[mc] * vh;
                        const double vhh = x.at(ch, md(2 * kr + mr - f.s_hi, h), md(2 * kc + mc - f.s_hi, w));
                        a_hh += f.dec_hi[mr] * f.dec_hi[mc] * vhh;
                    }
                ll.at(ch, kr, kc) = a_ll;
                lh.at(ch, kr, kc) = a_lh;
                hl.at(ch, kr, kc) = a_hl;
                hh.at(ch, kr, kc) = a_hh;
            }
}

double energy(const Tensor<double>& t) {
    double e = 0;
    for (auto v : t.data) e += v * v;
    return e;
}

} // namespace

TEST_CASE("perfect reconstruction for all five families, levels 1-4") {
    Rng rng(100);
    Tensor<double> x = random_tensor<double>({3, 64, 64}, rng);
    for (const auto& name : wavelet::family_names()) {
        const auto fam = wavelet::filter_bank(name);
        for (int levels = 1; levels <= 4; ++levels) {
            const auto p = wavelet::pyramid(x, fam, levels);
            INFO("family=", name, " levels=", levels);
            CHECK(max_abs_diff(wavelet::reconstruct(p, fam), x) <= 1e-8);
        }
    }
}

TEST_CASE("separable transform matches the naive convolution oracle") {
    Rng rng(101);
    Tensor<double> x = random_tensor<double>({2, 16, 12}, rng);
    for (const auto& name : wavelet::family_names()) {
        const auto fam = wavelet::filter_bank(name);
        const auto sb = wavelet::dwt2(x, fam);
        Tensor<double> ll, lh, hl, hh;
        naive_dwt2(x, fam, ll, lh, hl, hh);
        INFO("family=", name);
        CHECK(max_abs_diff(sb.ll, ll) < 1e-12);
        CHECK(max_abs_diff(sb.lh, lh) < 1e-12);
        CHECK(max_abs_diff(sb.hl, hl) < 1e-12);
        CHECK(max_abs_diff(sb.hh, hh) < 1e-12);
    }
}

TEST_CASE("haar closed-form values on a 2x2 block") {
    const auto fam = wavelet::filter_bank("haar");
    Tensor<double> x({1, 2, 2});
    x.at(0, 0, 0) = 1.0;
    x.at(0, 0, 1) = 2.0;
    x.at(0, 1, 0) = 3.0;
    x.at(0, 1, 1) = 4.0;
    const auto sb = wavelet::dwt2(x, fam);
    CHECK(sb.ll.at(0, 0, 0) == doctest::Approx(5.0).epsilon(1e-12));   // (1+2+3+4)/2
    CHECK(sb.lh.at(0, 0, 0) == doctest::Approx(-2.0).epsilon(1e-12));  // height difference
    CHECK(sb.hl.at(0, 0, 0) == doctest::Approx(-1.0).epsilon(1e-12));  // width difference
    CHECK(std::abs(sb.hh.at(0, 0, 0)) < 1e-12);
}

TEST_CASE("orthogonal families preserve energy; bior2.2 only reconstructs") {
    Rng rng(102);
    Tensor<double> x = random_tensor<double>({1, 32, 32}, rng);
    const double ex = energy(x);
    for (const auto& name : wavelet::family_names()) {
        const auto fam = wavelet::filter_bank(name);
        const auto sb = wavelet::dwt2(x, fam);
        const double eb = energy(sb.ll) + energy(sb.lh) + energy(sb.hl) + energy(sb.hh);
        if (fam.orthogonal) {
            INFO("family=", name);
            CHECK(eb == doctest::Approx(ex).epsilon(1e-10));
        }
        CHECK(max_abs_diff(wavelet::idwt2(sb, fam), x) < 1e-10);
    }
}

TEST_CASE("filters are normalized lowpass / zero-mean highpass") {
    const double r2 = std::sqrt(2.0);
    for (const auto& name : wavelet::family_names()) {
        const auto fam = wavelet::filter_bank(name);
        const double slo = std::accumulate(fam.dec_lo.begin(), fam.dec_lo.end(), 0.0);
        const double shi = std::accumulate(fam.dec_hi.begin(), fam.dec_hi.end(), 0.0);
        INFO("family=", name);
        // sym4 ships as finite decimals, so allow a slightly wider tolerance
        CHECK(slo == doctest::Approx(r2).epsilon(1e-10));
        CHECK(std::abs(shi) < 1e-10);
    }
}

TEST_CASE("HL band carries vertical structures") {
    // a vertical stripe varies along width only: high-pass along width picks
    // it up (HL), high-pass along height sees nothing (LH)
    Tensor<double> x({1, 16, 16});
    for (int r = 0; r < 16; ++r) x.at(0, r, 7) = 1.0;
    for (const auto& name : wavelet::family_names()) {
        const auto fam = wavelet::filter_bank(name);
        const auto sb = wavelet::dwt2(x, fam);
        INFO("family=", name);
        CHECK(energy(sb.hl) > 1e-3);
        CHECK(energy(sb.lh) < 1e-20);
        CHECK(energy(sb.hh) < 1e-20);
    }
}

TEST_CASE("odd sizes reflect-pad and crop back exactly") {
    Rng rng(103);
    Tensor<double> x = random_tensor<double>({3, 15, 17}, rng);
    for (const auto& name : wavelet::family_names()) {
        const auto fam = wavelet::filter_bank(name);
        const auto sb = wavelet::dwt2(x, fam);
        CHECK(sb.ll.dim(1) == 8);
        CHECK(sb.ll.dim(2) == 9);
        CHECK(max_abs_diff(wavelet::idwt2(sb, fam), x) < 1e-10);
    }
}

TEST_CASE("pyramid shape bookkeeping") {
    Rng rng(104);
    Tensor<double> x = random_tensor<double>({3, 64, 48}, rng);
    const auto fam = wavelet::filter_bank("db2");
    const auto p = wavelet::pyramid(x, fam, 3);
    REQUIRE(p.levels.size() == 3);
    CHECK(p.levels[0].lh.dim(1) == 32);
    CHECK(p.levels[1].lh.dim(1) == 16);
    CHECK(p.levels[2].lh.dim(1) == 8);
    CHECK(p.ll.dim(1) == 8);
    CHECK(p.ll.dim(2) == 6);
    CHECK_THROWS_AS(wavelet::pyramid(x, fam, 0), ContractError);
}

TEST_CASE("unknown family tag is rejected") {
    CHECK_THROWS_AS(wavelet::filter_bank("db9"), ContractError);
}

TEST_CASE("synthesis filter reporting") {
    const auto db2 = wavelet::filter_bank("db2");
    const auto syn = db2.synthesis_lo();
    for (std::size_t i = 0; i < syn.size(); ++i)
        CHECK(syn[i] == db2.dec_lo[db2.dec_lo.size() - 1 - i]);
    const auto bior = wavelet::filter_bank("bior2.2");
    CHECK(bior.synthesis_lo() == bior.scat_lo);
}
