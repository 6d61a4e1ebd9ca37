#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pwf/kernels.hpp"
#include "pwf/tensor.hpp"

#include <vector>

using namespace pwf;

namespace {

template <class T>
std::vector<T> rand_vec(std::size_t n, Rng& rng, double lo = -2.0, double hi = 2.0) {
    std::vector<T> v(n);
    for (auto& x : v) x = static_cast<T>(rng.uniform(lo, hi));
    return v;
}

// run `op` under both ISAs and require bit-identical outputs
template <class T, class Op>
void check_bit_equal(Op op, std::size_t n) {
    Rng rng(99 + n);
    const auto a = rand_vec<T>(n, rng);
    const auto b = rand_vec<T>(n, rng);
    const auto y0 = rand_vec<T>(n, rng);
    std::vector<T> ys = y0, yv = y0;
    kern::force(kern::Isa::scalar);
    op(a, b, ys);
    kern::force(kern::Isa::avx2); // falls back to scalar when unsupported
    op(a, b, yv);
    kern::force(kern::Isa::scalar);
    for (std::size_t i = 0; i < n; ++i) {
        INFO("n=", n, " i=", i);
        REQUIRE(ys[i] == yv[i]); // bitwise (no tolerance)
    }
}

template <class T>
void check_all_ops() {
    // sizes around vector-width boundaries to exercise tails
    for (std::size_t n : {1, 3, 7, 8, 9, 15, 16, 17, 33, 1000, 1023}) {
        check_bit_equal<T>([](const auto& a, const auto& b, auto& y) {
            kern::add(a.data(), b.data(), y.data(), y.size());
        }, n);
        check_bit_equal<T>([](const auto& a, const auto& b, auto& y) {
            kern::sub(a.data(), b.data(), y.data(), y.size());
        }, n);
        check_bit_equal<T>([](const auto& a, const auto& b, auto& y) {
            kern::mul(a.data(), b.data(), y.data(), y.size());
        }, n);
        check_bit_equal<T>([](const auto& a, const auto& b, auto& y) {
            kern::scale(a.data(), b[0], y.data(), y.size());
        }, n);
        check_bit_equal<T>([](const auto& a, const auto& b, auto& y) {
            kern::axpy(y.data(), b[0], a.data(), y.size());
        }, n);
    }
}

} // namespace

TEST_CASE("scalar and AVX2 paths are bit-identical (float)") { check_all_ops<float>(); }
TEST_CASE("scalar and AVX2 paths are bit-identical (double)") { check_all_ops<double>(); }

TEST_CASE("scalar reference semantics") {
    std::vector<double> a = {1.0, 2.0, -3.0};
    std::vector<double> b = {0.5, -1.0, 2.0};
    std::vector<double> y(3);
    kern::force(kern::Isa::scalar);
    kern::add(a.data(), b.data(), y.data(), 3);
    CHECK(y == std::vector<double>{1.5, 1.0, -1.0});
    kern::sub(a.data(), b.data(), y.data(), 3);
    CHECK(y == std::vector<double>{0.5, 3.0, -5.0});
    kern::mul(a.data(), b.data(), y.data(), 3);
    CHECK(y == std::vector<double>{0.5, -2.0, -6.0});
    kern::scale(a.data(), 2.0, y.data(), 3);
    CHECK(y == std::vector<double>{2.0, 4.0, -6.0});
    y = {1.0, 1.0, 1.0};
    kern::axpy(y.data(), 3.0, a.data(), 3);
    CHECK(y == std::vector<double>{4.0, 7.0, -8.0});
}

TEST_CASE("forcing avx2 without support falls back to scalar") {
    kern::force(kern::Isa::avx2);
    if (!kern::avx2_supported()) CHECK(kern::active() == kern::Isa::scalar);
    else CHECK(kern::active() == kern::Isa::avx2);
    kern::force(kern::Isa::scalar);
    CHECK(kern::active() == kern::Isa::scalar);
}

TEST_CASE("isa names") {
    CHECK(kern::isa_name(kern::Isa::scalar) == "scalar");
    CHECK(kern::isa_name(kern::Isa::avx2) == "avx2");
}
