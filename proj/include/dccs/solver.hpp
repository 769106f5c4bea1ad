#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "dccs/data_model.hpp"
#include "dccs/priors.hpp"
#include "dccs/registration.hpp"

namespace dccs {

enum class InitKind { ZeroFilled, SpatialTV, Provided };

struct InitSpec {
    InitKind kind = InitKind::SpatialTV;
    double lambda_s = 0.01;                  // SpatialTV weight
    std::optional<DynamicDataset> provided;  // Provided
};

struct ReconConfig {
    PriorKind prior = PriorKind::tv();
    double lambda = 0.01;
    std::optional<double> beta0;  // unset: 1 / (largest prior coefficient of the initial guess)
    double beta_factor = 10.0;
    double alpha0 = 4.0;
    double alpha_factor = 3.0;
    int max_outer = 6;
    int max_inner = 30;
    int max_theta_loops = 5;
    double inner_cost_tol = 1e-3;
    double theta_tol = 1e-2;
    double cg_tol = 1e-6;
    int cg_max_iters = 10;
    DemonsConfig demons{};  // alpha is driven by alpha0 / alpha_factor
    InitSpec init{};
    bool cs_baseline = false;    // T = I: never register
    bool continue_beta = true;   // false keeps beta at beta0 (ablation)
    bool continue_alpha = true;  // false keeps alpha at alpha0 (ablation)

    void validate() const;
};

struct InnerRecord {
    int outer = 0;
    int inner = 0;
    double beta = 0.0;
    double alpha = 0.0;
    double cost = 0.0;          // ||A f - b||^2 + lambda Phi(T f)
    double data_term = 0.0;
    double phi_term = 0.0;      // Phi(T f)
    double gap = 0.0;           // ||T f - g||^2
    double penalty_cost = 0.0;  // data + lambda (Phi(g) + beta/2 gap)
    int cg_iters = 0;
    double elapsed_s = 0.0;
};

struct OuterRecord {
    int outer = 0;
    double beta = 0.0;
    double alpha = 0.0;
    int cg_iters = 0;
    int inner_iters = 0;
    int theta_loops = 0;
    double wall_s = 0.0;
};

struct ReconLog {
    std::vector<InnerRecord> inner;
    std::vector<OuterRecord> outer;

    int total_cg_iters() const;
    // outer_idx,inner_idx,beta,alpha,cost,data_term,phi_term,gap,cg_iters,elapsed_s
    void write_csv(std::ostream &os) const;
};

struct CgReport {
    int iterations = 0;
    double initial_residual = 0.0;
    double final_residual = 0.0;
};

// CG on (A*A + (lambda beta / 2) T*T) f = A*b + (lambda beta / 2) T* g, warm-started at f_init.
DynamicDataset solve_f(const KSpaceData &b, const DeformationField &theta, const DynamicDataset &g, double lambda,
                       double beta, const ReconConfig &cfg, const DynamicDataset &f_init, CgReport *report = nullptr);

struct CostTerms {
    double data = 0.0;
    double phi = 0.0;
    double total = 0.0;
};

CostTerms cost_terms(const DynamicDataset &f, const DeformationField &theta, const KSpaceData &b, double lambda,
                     const PriorKind &prior);
double cost(const DynamicDataset &f, const DeformationField &theta, const KSpaceData &b, double lambda,
            const PriorKind &prior);

// Frame-independent ||A f - b||^2 + lambda_s sum_t ||grad_xy f_t||_1 (isotropic TV).
DynamicDataset spatial_tv_init(const KSpaceData &b, double lambda_s);

struct ReconResult {
    DynamicDataset f;
    DeformationField theta;
    DynamicDataset g;
    ReconLog log;
};

ReconResult dccs_reconstruct(const KSpaceData &b, const ReconConfig &cfg);

DynamicDataset initial_guess(const KSpaceData &b, const InitSpec &init);

} // namespace dccs
