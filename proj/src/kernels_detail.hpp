#pragma once
#include <cstddef>

namespace pwf::kern::detail {

struct Table {
    void (*add_f)(const float*, const float*, float*, std::size_t);
    void (*add_d)(const double*, const double*, double*, std::size_t);
    void (*sub_f)(const float*, const float*, float*, std::size_t);
    void (*sub_d)(const double*, const double*, double*, std::size_t);
    void (*mul_f)(const float*, const float*, float*, std::size_t);
    void (*mul_d)(const double*, const double*, double*, std::size_t);
    void (*scale_f)(const float*, float, float*, std::size_t);
    void (*scale_d)(const double*, double, double*, std::size_t);
    void (*axpy_f)(float*, float, const float*, std::size_t);
    void (*axpy_d)(double*, double, const double*, std::size_t);
};

const Table& scalar_table();
const Table& avx2_table();

} // namespace pwf::kern::detail
