#pragma once
// Finite-difference gradient verification for tape programs (64-bit only).

#include "pwf/autodiff.hpp"

#include <functional>
#include <string>
#include <vector>

namespace pwf::ad {

struct GradCheckResult {
    double max_rel_err = 0.0;
    std::string worst; // "param[index]" of the worst entry
    bool ok(double tol = 1e-4) const { return max_rel_err <= tol; }
};

// `program` rebuilds the graph from current parameter values and returns the
// scalar loss Var. Analytic grads are compared against central differences.
inline GradCheckResult grad_check(std::vector<ParamTensor<double>*> params,
                                  const std::function<Var(Tape<double>&)>& program,
                                  double h = 1e-5) {
    auto eval = [&]() {
        Tape<double> t;
        Var loss = program(t);
        return t.value(loss).data[0];
    };
    for (auto* p : params) p->zero_grad();
    {
        Tape<double> t;
        Var loss = program(t);
        t.backward(loss);
    }
    GradCheckResult res;
    for (auto* p : params) {
        for (std::size_t i = 0; i < p->value.numel(); ++i) {
            const double keep = p->value.data[i];
            p->value.data[i] = keep + h;
            const double fp = eval();
            p->value.data[i] = keep - h;
            const double fm = eval();
            p->value.data[i] = keep;
            const double fd = (fp - fm) / (2.0 * h);
            const double an = p->grad.data[i];
            const double rel = std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-6});
            if (rel > res.max_rel_err) {
                res.max_rel_err = rel;
                res.worst = p->name + "[" + std::to_string(i) + "]";
            }
        }
    }
    return res;
}

} // namespace pwf::ad
