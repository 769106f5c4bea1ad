#pragma once

#include <vector>

#include "dccs/data_model.hpp"

namespace dccs {

struct DemonsConfig {
    double alpha = 4.0;    // force strength; small alpha admits large steps
    double sigma = 10.0;   // Gaussian std (px) applied to every force field
    int max_iters = 100;
    double stop_tol = 1e-2; // ||u|| / ||theta|| below which iteration stops
    double gain = 3.0;      // multiplier on the smoothed force

    void validate() const;
};

// Output(x, t) = frame t of f sampled bilinearly at x + theta(x, t), coordinates
// clamped to the grid. Real and imaginary parts are interpolated independently.
DynamicDataset warp(const DynamicDataset &f, const DeformationField &theta);
// Exact transpose of warp: scatters each output value back with the same four weights.
DynamicDataset warp_adjoint(const DynamicDataset &h, const DeformationField &theta);

Image warp_image(const Image &img, const Field2 &theta);
Image magnitude_frame(const DynamicDataset &f, int t);

// Thirion-style force with alpha normalisation, on magnitude images:
// u = (fixed - moving) grad(fixed) / (|grad fixed|^2 + alpha^2 (fixed - moving)^2).
Field2 demons_force(const Image &moving, const Image &fixed, double alpha);

// Separable Gaussian of radius ceil(3 sigma), normalised, edge-replicate boundary.
Image gaussian_smooth(const Image &img, double sigma);
Field2 gaussian_smooth(const Field2 &u, double sigma);

double ssd(const Image &a, const Image &b);

struct DemonsResult {
    Field2 theta;
    std::vector<double> ssd; // SSD before the first and after every accepted update
    int iterations = 0;
};

// theta <- theta + gain * (G_sigma * u), accepting an update only if SSD does not grow;
// a rejected update is retried once at half length before stopping.
DemonsResult demons_register(const Image &moving, const Image &fixed, const DemonsConfig &cfg, const Field2 &theta_init);

// Registers frame t of f (moving) onto frame t of g (fixed), independently per frame.
DeformationField register_sequence(const DynamicDataset &f, const DynamicDataset &g, const DemonsConfig &cfg,
                                   const DeformationField &theta_init);

} // namespace dccs
