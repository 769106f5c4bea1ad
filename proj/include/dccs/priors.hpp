#pragma once

#include <optional>
#include <string>

#include "dccs/data_model.hpp"

namespace dccs {

enum class PriorTag { TemporalFourierL1, TemporalTV, NuclearNorm };

// Compactness prior applied to the deformation-corrected series.
struct PriorKind {
    PriorTag tag = PriorTag::TemporalTV;
    // Inner splitting sweeps of the temporal-TV proximal map.
    int tv_inner_iters = 16;
    // Initial inner penalty; unset means 2 * tau.
    std::optional<double> tv_inner_rho;

    static PriorKind fourier() { return {PriorTag::TemporalFourierL1, 16, std::nullopt}; }
    static PriorKind tv() { return {PriorTag::TemporalTV, 16, std::nullopt}; }
    static PriorKind nuclear() { return {PriorTag::NuclearNorm, 16, std::nullopt}; }

    void validate() const;
};

// "tfl1", "ttv", "nuc"
std::string prior_name(PriorTag tag);
PriorTag parse_prior(const std::string &name);

// (z / |z|) * max(|z| - tau, 0)
cplx soft_threshold(cplx z, double tau);

// argmin_g tau * ||F_t g||_1 + 1/2 ||q - g||^2 with F_t the unitary temporal DFT.
DynamicDataset prox_temporal_fourier(const DynamicDataset &q, double tau);

// Singular value thresholding of the (pixels x frames) Casorati matrix.
DynamicDataset prox_nuclear(const DynamicDataset &q, double tau);

// Approximately argmin_g ||q - g||^2 + 2 tau ||D_t g||_1, D_t the circular forward
// difference, by alternating shrinkage and an FFT-diagonal solve with the inner
// penalty doubled every sweep.
DynamicDataset prox_temporal_tv(const DynamicDataset &q, double tau, const PriorKind &k);

DynamicDataset prox(const DynamicDataset &q, double tau, const PriorKind &k);

double phi_value(const DynamicDataset &g, const PriorKind &k);

// Largest coefficient magnitude the prior sees: max |F_t g|, max |D_t g| or the
// largest singular value. Used to seed the penalty continuation.
double max_coefficient(const DynamicDataset &g, const PriorKind &k);

// Circular forward temporal difference and its adjoint.
DynamicDataset temporal_difference(const DynamicDataset &g);
DynamicDataset temporal_difference_adjoint(const DynamicDataset &d);

std::vector<double> casorati_singular_values(const DynamicDataset &g);

} // namespace dccs
