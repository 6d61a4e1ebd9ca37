#include "pwf/kernels.hpp"
#include "kernels_detail.hpp"

#include <cstdlib>
#include <cstring>

namespace pwf::kern {

namespace {

Isa detect_initial() {
    const char* env = std::getenv("PWF_SIMD");
    if (env && std::strcmp(env, "scalar") == 0) return Isa::scalar;
    return avx2_supported() ? Isa::avx2 : Isa::scalar;
}

struct State {
    Isa isa;
    const detail::Table* table;
    State() { set(detect_initial()); }
    void set(Isa i) {
        if (i == Isa::avx2 && !avx2_supported()) i = Isa::scalar;
        isa = i;
        table = (i == Isa::avx2) ? &detail::avx2_table() : &detail::scalar_table();
    }
};

State& state() {
    static State s;
    return s;
}

} // namespace

bool avx2_supported() {
#if defined(__x86_64__) || defined(__i386__)
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

Isa active() { return state().isa; }
void force(Isa isa) { state().set(isa); }
std::string isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

void add(const float* a, const float* b, float* y, std::size_t n) { state().table->add_f(a, b, y, n); }
void add(const double* a, const double* b, double* y, std::size_t n) { state().table->add_d(a, b, y, n); }
void sub(const float* a, const float* b, float* y, std::size_t n) { state().table->sub_f(a, b, y, n); }
void sub(const double* a, const double* b, double* y, std::size_t n) { state().table->sub_d(a, b, y, n); }
void mul(const float* a, const float* b, float* y, std::size_t n) { state().table->mul_f(a, b, y, n); }
void mul(const double* a, const double* b, double* y, std::size_t n) { state().table->mul_d(a, b, y, n); }
void scale(const float* a, float s, float* y, std::size_t n) { state().table->scale_f(a, s, y, n); }
void scale(const double* a, double s, double* y, std::size_t n) { state().table->scale_d(a, s, y, n); }
void axpy(float* y, float s, const float* x, std::size_t n) { state().table->axpy_f(y, s, x, n); }
void axpy(double* y, double s, const double* x, std::size_t n) { state().table->axpy_d(y, s, x, n); }

} // namespace pwf::kern
