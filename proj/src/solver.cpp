#include "dccs/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>

#include "dccs/cg.hpp"
#include "dccs/encoding.hpp"

namespace dccs {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Forward differences with a zero difference across the last row/column.
void grad_xy(std::span<const cplx> f, int nx, int ny, std::vector<cplx> &gx, std::vector<cplx> &gy) {
    gx.assign(f.size(), cplx{});
    gy.assign(f.size(), cplx{});
    for (int y = 0; y < ny; ++y) {
        for (int x = 0; x < nx; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * nx + x;
            if (x + 1 < nx) gx[i] = f[i + 1] - f[i];
            if (y + 1 < ny) gy[i] = f[i + nx] - f[i];
        }
    }
}

void grad_xy_adjoint(const std::vector<cplx> &gx, const std::vector<cplx> &gy, int nx, int ny, std::span<cplx> out) {
    std::fill(out.begin(), out.end(), cplx{});
    for (int y = 0; y < ny; ++y) {
        for (int x = 0; x < nx; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * nx + x;
            if (x + 1 < nx) {
                out[i + 1] += gx[i];
                out[i] -= gx[i];
            }
            if (y + 1 < ny) {
                out[i + nx] += gy[i];
                out[i] -= gy[i];
            }
        }
    }
}

std::shared_ptr<const SamplingPattern> frame_pattern(const SamplingPattern &p, int t) {
    const Shape s{p.shape().nx, p.shape().ny, 1};
    const auto fs = s.frame_size();
    std::vector<std::uint8_t> m(p.mask().begin() + static_cast<std::ptrdiff_t>(t * fs),
                                p.mask().begin() + static_cast<std::ptrdiff_t>((t + 1) * fs));
    return std::make_shared<const SamplingPattern>(s, std::move(m), p.params());
}

DynamicDataset spatial_tv_frame(const KSpaceData &b, double lambda_s) {
    const auto &pat = *b.pattern;
    const int nx = pat.shape().nx;
    const int ny = pat.shape().ny;
    const DynamicDataset atb = adjoint(b);

    std::vector<cplx> gx, gy;
    grad_xy(atb.values(), nx, ny, gx, gy);
    double gmax = 0.0;
    for (std::size_t i = 0; i < gx.size(); ++i) gmax = std::max(gmax, std::hypot(std::abs(gx[i]), std::abs(gy[i])));
    if (gmax == 0.0) return atb;

    constexpr int kSweeps = 30;
    // Final shrinkage threshold 1/rho is 1e-4 of the largest zero-filled gradient.
    double rho = 1e4 / gmax / std::ldexp(1.0, kSweeps - 1);

    DynamicDataset f = atb;
    std::vector<cplx> dx(gx.size()), dy(gy.size());
    DynamicDataset rhs(atb.shape());
    for (int sweep = 0; sweep < kSweeps; ++sweep) {
        grad_xy(f.values(), nx, ny, gx, gy);
        const double thr = 1.0 / rho;
        for (std::size_t i = 0; i < gx.size(); ++i) {
            const double mag = std::sqrt(std::norm(gx[i]) + std::norm(gy[i]));
            const double s = mag > thr ? (mag - thr) / mag : 0.0;
            dx[i] = s * gx[i];
            dy[i] = s * gy[i];
        }
        const double mu = 0.5 * lambda_s * rho;
        grad_xy_adjoint(dx, dy, nx, ny, rhs.values());
        {
            auto rv = rhs.values();
            const auto av = atb.values();
            for (std::size_t i = 0; i < rv.size(); ++i) rv[i] = av[i] + mu * rv[i];
        }
        std::vector<cplx> tx, ty;
        auto op = [&](const DynamicDataset &v) {
            DynamicDataset out = normal(v, pat);
            grad_xy(v.values(), nx, ny, tx, ty);
            DynamicDataset reg(v.shape());
            grad_xy_adjoint(tx, ty, nx, ny, reg.values());
            axpy(mu, reg, out);
            return out;
        };
        conjugate_gradient(op, rhs, f, 1e-6, 30);
        rho *= 2.0;
    }
    return f;
}

} // namespace

void ReconConfig::validate() const {
    prior.validate();
    demons.validate();
    if (!(lambda > 0.0)) throw InvalidConfig("lambda must be > 0");
    if (beta0 && !(*beta0 > 0.0)) throw InvalidConfig("beta0 must be > 0");
    if (!(beta_factor > 1.0)) throw InvalidConfig("beta_factor must be > 1");
    if (!(alpha0 > 0.0)) throw InvalidConfig("alpha0 must be > 0");
    if (!(alpha_factor > 1.0)) throw InvalidConfig("alpha_factor must be > 1");
    if (max_outer < 1 || max_inner < 1 || max_theta_loops < 1) throw InvalidConfig("loop counts must be >= 1");
    if (!(inner_cost_tol > 0.0) || !(theta_tol > 0.0) || !(cg_tol > 0.0)) throw InvalidConfig("tolerances must be > 0");
    if (cg_max_iters < 1) throw InvalidConfig("cg_max_iters must be >= 1");
    if (init.kind == InitKind::SpatialTV && !(init.lambda_s > 0.0)) throw InvalidConfig("init lambda_s must be > 0");
    if (init.kind == InitKind::Provided && !init.provided) throw InvalidConfig("provided initialisation has no dataset");
}

int ReconLog::total_cg_iters() const {
    int n = 0;
    for (const auto &r : inner) n += r.cg_iters;
    return n;
}

void ReconLog::write_csv(std::ostream &os) const {
    os << "outer_idx,inner_idx,beta,alpha,cost,data_term,phi_term,gap,cg_iters,elapsed_s\n";
    const auto old = os.precision(17);
    for (const auto &r : inner) {
        os << r.outer << ',' << r.inner << ',' << r.beta << ',' << r.alpha << ',' << r.cost << ',' << r.data_term << ','
           << r.phi_term << ',' << r.gap << ',' << r.cg_iters << ',' << r.elapsed_s << '\n';
    }
    os.precision(old);
}

DynamicDataset solve_f(const KSpaceData &b, const DeformationField &theta, const DynamicDataset &g, double lambda,
                       double beta, const ReconConfig &cfg, const DynamicDataset &f_init, CgReport *report) {
    const auto &pattern = *b.pattern;
    require_same_shape(pattern.shape(), theta.shape(), "solve_f theta");
    require_same_shape(pattern.shape(), g.shape(), "solve_f g");
    require_same_shape(pattern.shape(), f_init.shape(), "solve_f f_init");
    if (!(lambda > 0.0) || !(beta > 0.0)) throw InvalidValue("solve_f requires lambda, beta > 0");

    const double mu = 0.5 * lambda * beta;
    const bool identity = theta.is_zero();
    DynamicDataset rhs = adjoint(b);
    axpy(mu, identity ? g : warp_adjoint(g, theta), rhs);

    auto op = [&](const DynamicDataset &v) {
        DynamicDataset out = normal(v, pattern);
        axpy(mu, identity ? v : warp_adjoint(warp(v, theta), theta), out);
        return out;
    };
    DynamicDataset f = f_init;
    const auto res = conjugate_gradient(op, rhs, f, cfg.cg_tol, cfg.cg_max_iters);
    if (report) *report = {res.iterations, res.initial_residual, res.final_residual};
    return f;
}

CostTerms cost_terms(const DynamicDataset &f, const DeformationField &theta, const KSpaceData &b, double lambda,
                     const PriorKind &prior) {
    const auto af = forward(f, b.pattern);
    CostTerms c;
    for (std::size_t i = 0; i < af.samples.size(); ++i) c.data += std::norm(af.samples[i] - b.samples[i]);
    c.phi = phi_value(theta.is_zero() ? f : warp(f, theta), prior);
    c.total = c.data + lambda * c.phi;
    return c;
}

double cost(const DynamicDataset &f, const DeformationField &theta, const KSpaceData &b, double lambda,
            const PriorKind &prior) {
    return cost_terms(f, theta, b, lambda, prior).total;
}

DynamicDataset spatial_tv_init(const KSpaceData &b, double lambda_s) {
    if (!(lambda_s > 0.0)) throw InvalidValue("lambda_s must be > 0");
    const auto &pat = *b.pattern;
    const Shape s = pat.shape();
    DynamicDataset out(s);
    const int nt = s.nt;
#pragma omp parallel for schedule(dynamic)
    for (int t = 0; t < nt; ++t) {
        auto fp = frame_pattern(pat, t);
        const auto off = static_cast<std::ptrdiff_t>(pat.frame_offset(t));
        std::vector<cplx> samples(b.samples.begin() + off,
                                  b.samples.begin() + off + static_cast<std::ptrdiff_t>(pat.frame_count(t)));
        const KSpaceData bt(fp, std::move(samples), b.noise_sigma);
        const auto ft = spatial_tv_frame(bt, lambda_s);
        std::copy(ft.values().begin(), ft.values().end(), out.frame(t).begin());
    }
    return out;
}

DynamicDataset initial_guess(const KSpaceData &b, const InitSpec &init) {
    switch (init.kind) {
    case InitKind::ZeroFilled: return adjoint(b);
    case InitKind::SpatialTV: return spatial_tv_init(b, init.lambda_s);
    case InitKind::Provided:
        if (!init.provided) throw InvalidConfig("provided initialisation has no dataset");
        require_same_shape(init.provided->shape(), b.shape(), "provided initialisation");
        return *init.provided;
    }
    throw InvalidConfig("unknown initialisation");
}

ReconResult dccs_reconstruct(const KSpaceData &b, const ReconConfig &cfg) {
    cfg.validate();
    const auto t0 = Clock::now();
    const Shape shape = b.shape();

    ReconResult res{initial_guess(b, cfg.init), DeformationField(shape), DynamicDataset(shape), {}};
    DynamicDataset &f = res.f;
    DeformationField &theta = res.theta;

    double beta = 0.0;
    if (cfg.beta0) {
        beta = *cfg.beta0;
    } else {
        const double m = max_coefficient(f, cfg.prior);
        beta = m > 0.0 ? 1.0 / m : 1.0;
    }
    double alpha = cfg.alpha0;

    for (int out = 0; out < cfg.max_outer; ++out) {
        const auto outer_start = Clock::now();
        OuterRecord orec{out, beta, alpha, 0, 0, 0, 0.0};
        double prev = cost(f, theta, b, cfg.lambda, cfg.prior);
        const double tau = 1.0 / beta;
        const double mu = 0.5 * cfg.lambda * beta;

        for (int in = 0; in < cfg.max_inner; ++in) {
            const bool identity = theta.is_zero();
            res.g = prox(identity ? f : warp(f, theta), tau, cfg.prior);
            CgReport rep;
            f = solve_f(b, theta, res.g, cfg.lambda, beta, cfg, f, &rep);

            const DynamicDataset tf = identity ? f : warp(f, theta);
            const auto terms = cost_terms(f, theta, b, cfg.lambda, cfg.prior);
            const double gap = squared_norm(tf - res.g);
            InnerRecord r;
            r.outer = out;
            r.inner = in;
            r.beta = beta;
            r.alpha = alpha;
            r.cost = terms.total;
            r.data_term = terms.data;
            r.phi_term = terms.phi;
            r.gap = gap;
            r.penalty_cost = terms.data + cfg.lambda * phi_value(res.g, cfg.prior) + mu * gap;
            r.cg_iters = rep.iterations;
            r.elapsed_s = seconds_since(t0);
            res.log.inner.push_back(r);
            orec.cg_iters += rep.iterations;
            ++orec.inner_iters;

            if (terms.total <= 0.0 || (prev - terms.total) / terms.total < cfg.inner_cost_tol) break;
            prev = terms.total;
        }

        if (!cfg.cs_baseline) {
            DemonsConfig dc = cfg.demons;
            dc.alpha = alpha;
            for (int loop = 0; loop < cfg.max_theta_loops; ++loop) {
                DeformationField next = register_sequence(f, res.g, dc, theta);
                double change = 0.0;
                for (std::size_t i = 0; i < next.dx().size(); ++i) {
                    const double ex = next.dx()[i] - theta.dx()[i];
                    const double ey = next.dy()[i] - theta.dy()[i];
                    change += ex * ex + ey * ey;
                }
                const double norm = next.squared_norm();
                theta = std::move(next);
                ++orec.theta_loops;
                if (norm == 0.0 || change / norm <= cfg.theta_tol) break;
            }
        }

        orec.wall_s = seconds_since(outer_start);
        res.log.outer.push_back(orec);
        if (cfg.continue_alpha) alpha *= cfg.alpha_factor;
        if (cfg.continue_beta) beta *= cfg.beta_factor;
    }
    return res;
}

} // namespace dccs
