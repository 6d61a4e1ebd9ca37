#include "kernels_detail.hpp"

namespace pwf::kern::detail {
namespace {

template <class T>
void add_impl(const T* a, const T* b, T* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = a[i] + b[i];
}
template <class T>
void sub_impl(const T* a, const T* b, T* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = a[i] - b[i];
}
template <class T>
void mul_impl(const T* a, const T* b, T* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = a[i] * b[i];
}
template <class T>
void scale_impl(const T* a, T s, T* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = s * a[i];
}
template <class T>
void axpy_impl(T* y, T s, const T* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        T p = s * x[i]; // keep the intermediate rounding; no FMA contraction
        y[i] = y[i] + p;
    }
}

} // namespace

const Table& scalar_table() {
    static const Table t = {
        add_impl<float>,   add_impl<double>,  sub_impl<float>,  sub_impl<double>,
        mul_impl<float>,   mul_impl<double>,  scale_impl<float>, scale_impl<double>,
        axpy_impl<float>,  axpy_impl<double>,
    };
    return t;
}

} // namespace pwf::kern::detail
