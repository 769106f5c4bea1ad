#pragma once

#include <cstdint>

#include "dccs/data_model.hpp"

namespace dccs {

// Golden-angle pseudo-radial k-t mask. Ray k (global index, continuing across
// frames unless reset_per_frame) has angle k * angle_increment mod 180 degrees;
// its samples_per_ray equispaced points through the k-space centre are rounded to
// the nearest Cartesian cell.
SamplingPattern golden_angle_mask(const GoldenAngleParams &params);

// A: per-frame unitary 2-D DFT restricted to the mask.
KSpaceData forward(const DynamicDataset &f, std::shared_ptr<const SamplingPattern> pattern);
// A*: zero-fill and per-frame inverse unitary 2-D DFT.
DynamicDataset adjoint(const KSpaceData &b);
// A*A f without packing samples.
DynamicDataset normal(const DynamicDataset &f, const SamplingPattern &pattern);

// i.i.d. complex Gaussian noise with std sigma per real/imaginary component.
KSpaceData add_noise(const KSpaceData &b, double sigma, std::uint64_t seed);

std::shared_ptr<const SamplingPattern> full_pattern(const Shape &s);

} // namespace dccs
