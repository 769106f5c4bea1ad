#pragma once

#include <cmath>
#include <string>

#include "dccs/data_model.hpp"

namespace dccs {

struct CgOutcome {
    int iterations = 0;
    double initial_residual = 0.0;
    double final_residual = 0.0;
};

// Conjugate gradient for a Hermitian positive (semi-)definite operator on
// datasets. Stops when ||r|| <= tol * ||r0|| or after max_iters.
template <class Op>
CgOutcome conjugate_gradient(Op &&apply, const DynamicDataset &rhs, DynamicDataset &x, double tol, int max_iters) {
    CgOutcome out;
    DynamicDataset r = rhs - apply(x);
    double rr = squared_norm(r);
    out.initial_residual = out.final_residual = std::sqrt(rr);
    if (rr == 0.0) return out;
    DynamicDataset p = r;
    const double target = tol * out.initial_residual;
    for (int k = 0; k < max_iters; ++k) {
        const DynamicDataset ap = apply(p);
        const double pap = inner(p, ap).real();
        if (!(pap > 0.0)) {
            if (!std::isfinite(pap)) throw NonFiniteIterate("CG curvature became non-finite at iteration " + std::to_string(k));
            break;
        }
        const double a = rr / pap;
        axpy(a, p, x);
        axpy(-a, ap, r);
        const double rr_new = squared_norm(r);
        ++out.iterations;
        if (!std::isfinite(rr_new) || !x.all_finite()) {
            throw NonFiniteIterate("CG iterate became non-finite at iteration " + std::to_string(k));
        }
        out.final_residual = std::sqrt(rr_new);
        if (out.final_residual <= target) break;
        const double b = rr_new / rr;
        rr = rr_new;
        auto pv = p.values();
        const auto rv = r.values();
        for (std::size_t i = 0; i < pv.size(); ++i) pv[i] = rv[i] + b * pv[i];
    }
    return out;
}

} // namespace dccs
