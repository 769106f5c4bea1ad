#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "dccs/data_model.hpp"

namespace dccs {

inline constexpr double kSerInfinity = std::numeric_limits<double>::infinity();
// Value written to CSV in place of +inf.
inline constexpr double kSerCsvCap = 300.0;

// -10 log10( (1/N) sum_i ||recon_i - ideal_i||_F^2 / ||ideal_i||_F^2 ) over
// magnitude frames inside roi. +inf when the reconstruction is exact.
double ser_roi(const DynamicDataset &recon, const DynamicDataset &ideal, const Roi &roi);

// Same ratio after a 15x15, sigma 1.5 Laplacian-of-Gaussian filter of each
// magnitude frame (full frame, edge-replicate), evaluated inside roi.
double hfser_roi(const DynamicDataset &recon, const DynamicDataset &ideal, const Roi &roi);

// Sampled LoG kernel, row-major size x size, entries summing to zero.
std::vector<double> log_kernel(int size = 15, double sigma = 1.5);

// Edge-replicate 2-D correlation of one image with a square kernel.
Image convolve_replicate(const Image &img, const std::vector<double> &kernel, int size);

// Mean Euclidean endpoint error over mask-true pixels (nx*ny mask applied to every frame).
double registration_error(const DeformationField &theta_est, const DeformationField &theta_true,
                          const std::vector<std::uint8_t> &mask);

double csv_db(double db);

} // namespace dccs
