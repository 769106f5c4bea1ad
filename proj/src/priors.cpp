#include "dccs/priors.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "dccs/fft.hpp"

namespace dccs {
namespace {

using Casorati = Eigen::Map<Eigen::MatrixXcd>;
using ConstCasorati = Eigen::Map<const Eigen::MatrixXcd>;

void require_tau(double tau) {
    if (!(tau >= 0.0) || !std::isfinite(tau)) throw InvalidValue("threshold must be finite and >= 0");
}

ConstCasorati casorati(const DynamicDataset &d) {
    return ConstCasorati(d.values().data(), static_cast<Eigen::Index>(d.shape().frame_size()), d.nt());
}

bool use_gram(const DynamicDataset &d) { return d.shape().frame_size() >= 4 * static_cast<std::size_t>(d.nt()); }

// Eigen-decomposition of Q*Q: columns of V are right singular vectors, s the
// singular values (ascending).
struct GramSvd {
    Eigen::MatrixXcd v;
    Eigen::VectorXd s;
};

GramSvd gram_svd(const DynamicDataset &d) {
    const auto q = casorati(d);
    const Eigen::MatrixXcd gram = q.adjoint() * q;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram);
    if (es.info() != Eigen::Success) throw SvdFailure("eigendecomposition of the Casorati Gram matrix did not converge");
    GramSvd out{es.eigenvectors(), es.eigenvalues().cwiseMax(0.0).cwiseSqrt()};
    return out;
}

} // namespace

void PriorKind::validate() const {
    if (tag == PriorTag::TemporalTV) {
        if (tv_inner_iters < 1) throw InvalidConfig("tv_inner_iters must be >= 1");
        if (tv_inner_rho && !(*tv_inner_rho > 0.0)) throw InvalidConfig("tv_inner_rho must be > 0");
    }
}

std::string prior_name(PriorTag tag) {
    switch (tag) {
    case PriorTag::TemporalFourierL1: return "tfl1";
    case PriorTag::TemporalTV: return "ttv";
    case PriorTag::NuclearNorm: return "nuc";
    }
    return "?";
}

PriorTag parse_prior(const std::string &name) {
    if (name == "tfl1") return PriorTag::TemporalFourierL1;
    if (name == "ttv") return PriorTag::TemporalTV;
    if (name == "nuc") return PriorTag::NuclearNorm;
    throw InvalidConfig("unknown prior '" + name + "' (expected tfl1, ttv or nuc)");
}

cplx soft_threshold(cplx z, double tau) {
    const double mag = std::abs(z);
    if (mag <= tau || mag == 0.0) return cplx{};
    return z * ((mag - tau) / mag);
}

DynamicDataset prox_temporal_fourier(const DynamicDataset &q, double tau) {
    require_tau(tau);
    DynamicDataset g = q;
    if (tau == 0.0) return g;
    fft::forward_time(g);
    for (auto &z : g.values()) z = soft_threshold(z, tau);
    fft::inverse_time(g);
    return g;
}

DynamicDataset prox_nuclear(const DynamicDataset &q, double tau) {
    require_tau(tau);
    DynamicDataset g(q.shape(), q.pixel_spacing());
    Casorati out(g.values().data(), static_cast<Eigen::Index>(q.shape().frame_size()), q.nt());
    const auto qm = casorati(q);
    if (use_gram(q)) {
        const auto svd = gram_svd(q);
        Eigen::VectorXd factor(svd.s.size());
        for (Eigen::Index i = 0; i < svd.s.size(); ++i) {
            const double s = svd.s[i];
            factor[i] = (s > tau && s > 0.0) ? (s - tau) / s : (tau == 0.0 ? 1.0 : 0.0);
        }
        out.noalias() = (qm * svd.v) * factor.asDiagonal() * svd.v.adjoint();
    } else {
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(qm, Eigen::ComputeThinU | Eigen::ComputeThinV);
        if (svd.info() != Eigen::Success) throw SvdFailure("Casorati SVD did not converge");
        Eigen::VectorXd s = svd.singularValues();
        for (auto &v : s) v = std::max(v - tau, 0.0);
        out.noalias() = svd.matrixU() * s.asDiagonal() * svd.matrixV().adjoint();
    }
    return g;
}

DynamicDataset temporal_difference(const DynamicDataset &g) {
    DynamicDataset d(g.shape(), g.pixel_spacing());
    const int nt = g.nt();
    for (int t = 0; t < nt; ++t) {
        const auto cur = g.frame(t);
        const auto next = g.frame((t + 1) % nt);
        auto out = d.frame(t);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = next[i] - cur[i];
    }
    return d;
}

DynamicDataset temporal_difference_adjoint(const DynamicDataset &d) {
    DynamicDataset g(d.shape(), d.pixel_spacing());
    const int nt = d.nt();
    for (int t = 0; t < nt; ++t) {
        const auto prev = d.frame((t + nt - 1) % nt);
        const auto cur = d.frame(t);
        auto out = g.frame(t);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = prev[i] - cur[i];
    }
    return g;
}

constexpr int kTvMaxAlternations = 20;
constexpr double kTvSettleTol = 1e-4;

namespace {

// Solver for (I + rho D*D) x = r with D the circular forward difference. The matrix is cyclic
// tridiagonal with diagonal 1 + 2 rho and off-diagonals -rho; the wrap-around corners are
// removed by a Sherman-Morrison correction so each solve costs O(nt).
class CyclicSolver {
  public:
    CyclicSolver(int n, double rho) : n_(n), rho_(rho) {
        if (n_ < 3) return;
        const double b = 1.0 + 2.0 * rho;
        a_ = -rho;
        gamma_ = -b;
        std::vector<double> diag(n_, b);
        diag[0] = b - gamma_;
        diag[n_ - 1] = b - a_ * a_ / gamma_;
        cp_.resize(n_);
        inv_.resize(n_);
        inv_[0] = 1.0 / diag[0];
        cp_[0] = a_ * inv_[0];
        for (int i = 1; i < n_; ++i) {
            inv_[i] = 1.0 / (diag[i] - a_ * cp_[i - 1]);
            cp_[i] = a_ * inv_[i];
        }
        std::vector<double> u(n_, 0.0);
        u[0] = gamma_;
        u[n_ - 1] = a_;
        z_ = tridiag(u);
        denom_ = 1.0 + z_[0] + (a_ / gamma_) * z_[n_ - 1];
    }

    void solve(const cplx *r, cplx *x) const {
        if (n_ == 1) {
            x[0] = r[0];
            return;
        }
        if (n_ == 2) {
            // [[1+2rho, -2rho], [-2rho, 1+2rho]]
            const double b = 1.0 + 2.0 * rho_, c = -2.0 * rho_;
            const double det = b * b - c * c;
            x[0] = (b * r[0] - c * r[1]) / det;
            x[1] = (b * r[1] - c * r[0]) / det;
            return;
        }
        x[0] = r[0] * inv_[0];
        for (int i = 1; i < n_; ++i) x[i] = (r[i] - a_ * x[i - 1]) * inv_[i];
        for (int i = n_ - 2; i >= 0; --i) x[i] -= cp_[i] * x[i + 1];
        const cplx f = (x[0] + (a_ / gamma_) * x[n_ - 1]) / denom_;
        for (int i = 0; i < n_; ++i) x[i] -= f * z_[i];
    }

  private:
    std::vector<double> tridiag(const std::vector<double> &r) const {
        std::vector<double> x(n_);
        x[0] = r[0] * inv_[0];
        for (int i = 1; i < n_; ++i) x[i] = (r[i] - a_ * x[i - 1]) * inv_[i];
        for (int i = n_ - 2; i >= 0; --i) x[i] -= cp_[i] * x[i + 1];
        return x;
    }

    int n_;
    double rho_;
    double a_ = 0.0, gamma_ = 0.0, denom_ = 1.0;
    std::vector<double> cp_, inv_, z_;
};

} // namespace

DynamicDataset prox_temporal_tv(const DynamicDataset &q, double tau, const PriorKind &k) {
    require_tau(tau);
    k.validate();
    DynamicDataset g = q;
    if (tau == 0.0) return g;

    const int nt = q.nt();
    const std::size_t np = q.shape().frame_size();
    double scale = 0.0;
    for (const auto &z : q.values()) scale = std::max(scale, std::abs(z));
    const double settle = kTvSettleTol * scale;

    std::vector<double> rhos(k.tv_inner_iters);
    std::vector<CyclicSolver> solvers;
    solvers.reserve(rhos.size());
    double rho = k.tv_inner_rho.value_or(2.0 * tau);
    for (auto &r : rhos) {
        r = rho;
        solvers.emplace_back(nt, rho);
        rho *= 2.0;
    }

    // Pixels are independent: each time series runs its own sweeps. Within a sweep, shrinkage
    // and the linear solve alternate until that series settles, then the penalty doubles.
    const auto qv = q.values();
    auto gv = g.values();
#pragma omp parallel
    {
        std::vector<cplx> qs(nt), gs(nt), d(nt), rhs(nt), next(nt);
#pragma omp for schedule(static)
        for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(np); ++p) {
            for (int t = 0; t < nt; ++t) qs[t] = gs[t] = qv[t * np + p];
            for (std::size_t s = 0; s < rhos.size(); ++s) {
                const double thr = tau / rhos[s];
                for (int alt = 0; alt < kTvMaxAlternations; ++alt) {
                    for (int t = 0; t < nt; ++t) d[t] = soft_threshold(gs[(t + 1) % nt] - gs[t], thr);
                    for (int t = 0; t < nt; ++t) rhs[t] = qs[t] + rhos[s] * (d[(t + nt - 1) % nt] - d[t]);
                    solvers[s].solve(rhs.data(), next.data());
                    double change = 0.0;
                    for (int t = 0; t < nt; ++t) change = std::max(change, std::abs(next[t] - gs[t]));
                    gs.swap(next);
                    if (change <= settle) break;
                }
            }
            for (int t = 0; t < nt; ++t) gv[t * np + p] = gs[t];
        }
    }
    return g;
}

DynamicDataset prox(const DynamicDataset &q, double tau, const PriorKind &k) {
    switch (k.tag) {
    case PriorTag::TemporalFourierL1: return prox_temporal_fourier(q, tau);
    case PriorTag::TemporalTV: return prox_temporal_tv(q, tau, k);
    case PriorTag::NuclearNorm: return prox_nuclear(q, tau);
    }
    throw InvalidConfig("unknown prior");
}

std::vector<double> casorati_singular_values(const DynamicDataset &g) {
    if (use_gram(g)) {
        const auto svd = gram_svd(g);
        std::vector<double> s(svd.s.data(), svd.s.data() + svd.s.size());
        std::sort(s.rbegin(), s.rend());
        return s;
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(casorati(g));
    if (svd.info() != Eigen::Success) throw SvdFailure("Casorati SVD did not converge");
    const auto &s = svd.singularValues();
    return std::vector<double>(s.data(), s.data() + s.size());
}

double phi_value(const DynamicDataset &g, const PriorKind &k) {
    double sum = 0.0;
    switch (k.tag) {
    case PriorTag::TemporalFourierL1: {
        DynamicDataset h = g;
        fft::forward_time(h);
        for (const auto &z : h.values()) sum += std::abs(z);
        break;
    }
    case PriorTag::TemporalTV: {
        const DynamicDataset d = temporal_difference(g);
        for (const auto &z : d.values()) sum += std::abs(z);
        break;
    }
    case PriorTag::NuclearNorm:
        for (double s : casorati_singular_values(g)) sum += s;
        break;
    }
    return sum;
}

double max_coefficient(const DynamicDataset &g, const PriorKind &k) {
    double m = 0.0;
    switch (k.tag) {
    case PriorTag::TemporalFourierL1: {
        DynamicDataset h = g;
        fft::forward_time(h);
        for (const auto &z : h.values()) m = std::max(m, std::abs(z));
        break;
    }
    case PriorTag::TemporalTV: {
        const DynamicDataset d = temporal_difference(g);
        for (const auto &z : d.values()) m = std::max(m, std::abs(z));
        break;
    }
    case PriorTag::NuclearNorm: {
        const auto s = casorati_singular_values(g);
        if (!s.empty()) m = s.front();
        break;
    }
    }
    return m;
}

} // namespace dccs
