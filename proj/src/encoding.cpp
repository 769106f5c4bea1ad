#include "dccs/encoding.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "dccs/fft.hpp"

namespace dccs {

SamplingPattern golden_angle_mask(const GoldenAngleParams &params) {
    GoldenAngleParams p = params;
    const Shape shape{p.nx, p.ny, p.nt};
    validate_shape(shape);
    if (p.rays_per_frame < 0) throw InvalidValue("rays_per_frame must be >= 0");
    if (p.samples_per_ray < 0) throw InvalidValue("samples_per_ray must be >= 0");
    if (!std::isfinite(p.angle_increment)) throw InvalidValue("angle_increment must be finite");
    if (p.samples_per_ray == 0) p.samples_per_ray = std::max(p.nx, p.ny);

    const int spr = p.samples_per_ray;
    const double sx = static_cast<double>(p.nx) / spr;
    const double sy = static_cast<double>(p.ny) / spr;
    std::vector<std::uint8_t> mask(shape.size(), 0);
    for (int t = 0; t < p.nt; ++t) {
        for (int r = 0; r < p.rays_per_frame; ++r) {
            const long k = p.reset_per_frame ? r : static_cast<long>(t) * p.rays_per_frame + r;
            const double deg = std::fmod(static_cast<double>(k) * p.angle_increment, 180.0);
            const double phi = deg * std::numbers::pi / 180.0;
            const double c = std::cos(phi);
            const double s = std::sin(phi);
            for (int j = 0; j < spr; ++j) {
                const double rho = static_cast<double>(j - spr / 2);
                const long ix = std::lround(rho * c * sx);
                const long iy = std::lround(rho * s * sy);
                const int kx = static_cast<int>(((ix % p.nx) + p.nx) % p.nx);
                const int ky = static_cast<int>(((iy % p.ny) + p.ny) % p.ny);
                mask[shape.index(kx, ky, t)] = 1;
            }
        }
    }
    return SamplingPattern(shape, std::move(mask), p);
}

std::shared_ptr<const SamplingPattern> full_pattern(const Shape &s) {
    GoldenAngleParams p;
    p.nx = s.nx;
    p.ny = s.ny;
    p.nt = s.nt;
    p.rays_per_frame = 0;
    return std::make_shared<const SamplingPattern>(s, std::vector<std::uint8_t>(s.size(), 1), p);
}

KSpaceData forward(const DynamicDataset &f, std::shared_ptr<const SamplingPattern> pattern) {
    require_same_shape(f.shape(), pattern->shape(), "forward");
    std::vector<cplx> samples(pattern->count());
    const int nx = f.nx();
    const int ny = f.ny();
    const int nt = f.nt();
#pragma omp parallel for schedule(static)
    for (int t = 0; t < nt; ++t) {
        std::vector<cplx> buf(f.frame(t).begin(), f.frame(t).end());
        fft::forward_2d(buf, nx, ny);
        auto out = samples.begin() + static_cast<std::ptrdiff_t>(pattern->frame_offset(t));
        for (auto idx : pattern->frame_indices(t)) *out++ = buf[idx];
    }
    return KSpaceData(std::move(pattern), std::move(samples));
}

DynamicDataset adjoint(const KSpaceData &b) {
    const auto &pattern = *b.pattern;
    const Shape &s = pattern.shape();
    DynamicDataset f(s);
#pragma omp parallel for schedule(static)
    for (int t = 0; t < s.nt; ++t) {
        auto frame = f.frame(t);
        auto in = b.samples.begin() + static_cast<std::ptrdiff_t>(pattern.frame_offset(t));
        for (auto idx : pattern.frame_indices(t)) frame[idx] = *in++;
        fft::inverse_2d(frame, s.nx, s.ny);
    }
    return f;
}

DynamicDataset normal(const DynamicDataset &f, const SamplingPattern &pattern) {
    require_same_shape(f.shape(), pattern.shape(), "normal");
    const Shape &s = f.shape();
    DynamicDataset out(s, f.pixel_spacing());
#pragma omp parallel for schedule(static)
    for (int t = 0; t < s.nt; ++t) {
        std::vector<cplx> buf(f.frame(t).begin(), f.frame(t).end());
        fft::forward_2d(buf, s.nx, s.ny);
        auto frame = out.frame(t);
        for (auto idx : pattern.frame_indices(t)) frame[idx] = buf[idx];
        fft::inverse_2d(frame, s.nx, s.ny);
    }
    return out;
}

KSpaceData add_noise(const KSpaceData &b, double sigma, std::uint64_t seed) {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InvalidValue("noise sigma must be finite and >= 0");
    KSpaceData out = b;
    out.noise_sigma = std::hypot(b.noise_sigma, sigma);
    if (sigma == 0.0) {
        out.noise_sigma = b.noise_sigma;
        return out;
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, sigma);
    for (auto &z : out.samples) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        z += cplx(re, im);
    }
    return out;
}

} // namespace dccs
