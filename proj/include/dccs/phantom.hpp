#pragma once

#include <cstdint>
#include <vector>

#include "dccs/data_model.hpp"

namespace dccs {

enum class MotionKind { None, Translation, SmoothElastic };

enum class Region : std::uint8_t { Background = 0, Torso, Lung, Spine, RightVentricle, LeftVentricle, Myocardium };

inline constexpr int kRegionCount = 7;

struct BolusArrival {
    double rv = 4.0;
    double lv = 8.0;
    double myocardium = 11.0;
};

struct PhantomConfig {
    int nx = 64;
    int ny = 64;
    int nt = 35;
    double pixel_spacing = 3.0;       // mm, metadata only
    double breathing_amplitude = 4.0; // px
    double breathing_period = 9.0;    // frames
    double edge_width = 1.0;          // px, std of the soft region boundary; 0 gives hard edges
    BolusArrival bolus_arrival{};
    std::uint64_t noise_seed = 1;
    MotionKind motion = MotionKind::Translation;

    void validate() const;
};

struct Phantom {
    DynamicDataset truth;
    DeformationField true_theta;   // frame t = static anatomy sampled at x + true_theta(x, t)
    Roi roi;
    std::vector<std::uint8_t> labels; // Region per pixel of the motion-free geometry
};

// Gamma-variate first-pass curve scaled so its maximum equals `peak`.
double bolus_curve(double t, double arrival, double width, double shape, double peak);

Phantom generate(const PhantomConfig &cfg);

std::string motion_name(MotionKind m);
MotionKind parse_motion(const std::string &name);

} // namespace dccs
