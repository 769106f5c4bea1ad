#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "dccs/errors.hpp"

namespace dccs {

using cplx = std::complex<double>;

struct Shape {
    int nx = 0;
    int ny = 0;
    int nt = 0;

    std::size_t frame_size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
    std::size_t size() const { return frame_size() * static_cast<std::size_t>(nt); }

    // Frame-major linear index: all pixels of frame t are contiguous, rows of length nx.
    std::size_t index(int x, int y, int t) const {
        return static_cast<std::size_t>(t) * frame_size() + static_cast<std::size_t>(y) * nx + x;
    }

    bool operator==(const Shape &) const = default;
};

void validate_shape(const Shape &s);
void require_same_shape(const Shape &a, const Shape &b, const char *what);

// Complex image series f(x, y, t) on an nx*ny*nt grid.
class DynamicDataset {
public:
    DynamicDataset() = default;
    explicit DynamicDataset(Shape shape, double pixel_spacing = 1.0);
    DynamicDataset(Shape shape, std::vector<cplx> values, double pixel_spacing = 1.0);

    const Shape &shape() const { return shape_; }
    int nx() const { return shape_.nx; }
    int ny() const { return shape_.ny; }
    int nt() const { return shape_.nt; }
    double pixel_spacing() const { return pixel_spacing_; }

    std::span<const cplx> values() const { return values_; }
    std::span<cplx> values() { return values_; }

    std::span<const cplx> frame(int t) const { return values().subspan(t * shape_.frame_size(), shape_.frame_size()); }
    std::span<cplx> frame(int t) { return values().subspan(t * shape_.frame_size(), shape_.frame_size()); }

    const cplx &at(int x, int y, int t) const { return values_[shape_.index(x, y, t)]; }
    cplx &at(int x, int y, int t) { return values_[shape_.index(x, y, t)]; }

    bool all_finite() const;

    bool operator==(const DynamicDataset &) const = default;

private:
    Shape shape_{};
    std::vector<cplx> values_;
    double pixel_spacing_ = 1.0;
};

// Per-pixel, per-frame displacement in pixel units. Zero field is the identity warp.
class DeformationField {
public:
    DeformationField() = default;
    explicit DeformationField(Shape shape);
    DeformationField(Shape shape, std::vector<double> dx, std::vector<double> dy);

    const Shape &shape() const { return shape_; }

    std::span<const double> dx() const { return dx_; }
    std::span<const double> dy() const { return dy_; }
    std::span<double> dx() { return dx_; }
    std::span<double> dy() { return dy_; }

    std::span<const double> dx_frame(int t) const { return dx().subspan(t * shape_.frame_size(), shape_.frame_size()); }
    std::span<const double> dy_frame(int t) const { return dy().subspan(t * shape_.frame_size(), shape_.frame_size()); }
    std::span<double> dx_frame(int t) { return dx().subspan(t * shape_.frame_size(), shape_.frame_size()); }
    std::span<double> dy_frame(int t) { return dy().subspan(t * shape_.frame_size(), shape_.frame_size()); }

    bool all_finite() const;
    bool is_zero() const;
    double squared_norm() const;

    bool operator==(const DeformationField &) const = default;

private:
    Shape shape_{};
    std::vector<double> dx_;
    std::vector<double> dy_;
};

// Single-frame real image, row-major.
struct Image {
    int nx = 0;
    int ny = 0;
    std::vector<double> v;

    Image() = default;
    Image(int nx_, int ny_, double fill = 0.0) : nx(nx_), ny(ny_), v(static_cast<std::size_t>(nx_) * ny_, fill) {}
    double &operator()(int x, int y) { return v[static_cast<std::size_t>(y) * nx + x]; }
    double operator()(int x, int y) const { return v[static_cast<std::size_t>(y) * nx + x]; }
};

// Single-frame 2-vector displacement field.
struct Field2 {
    int nx = 0;
    int ny = 0;
    std::vector<double> dx;
    std::vector<double> dy;

    Field2() = default;
    Field2(int nx_, int ny_)
        : nx(nx_), ny(ny_), dx(static_cast<std::size_t>(nx_) * ny_, 0.0), dy(static_cast<std::size_t>(nx_) * ny_, 0.0) {}
    double squared_norm() const;
};

Field2 field_frame(const DeformationField &theta, int t);
void set_field_frame(DeformationField &theta, int t, const Field2 &f);

struct GoldenAngleParams {
    int nx = 64;
    int ny = 64;
    int nt = 35;
    int rays_per_frame = 20;
    double angle_increment = 111.25; // degrees
    int samples_per_ray = 0;         // 0 -> max(nx, ny)
    bool reset_per_frame = false;
};

// Binary k-t mask. Stored in FFT order (DC at (0, 0) of every frame), frame-major.
class SamplingPattern {
public:
    SamplingPattern() = default;
    SamplingPattern(Shape shape, std::vector<std::uint8_t> mask, GoldenAngleParams params = {});

    const Shape &shape() const { return shape_; }
    const GoldenAngleParams &params() const { return params_; }
    std::span<const std::uint8_t> mask() const { return mask_; }
    bool sampled(int kx, int ky, int t) const { return mask_[shape_.index(kx, ky, t)] != 0; }

    // Sorted in-frame linear indices of the sampled cells of frame t.
    std::span<const std::uint32_t> frame_indices(int t) const;
    std::size_t frame_count(int t) const { return frame_indices(t).size(); }
    std::size_t count() const { return indices_.size(); }
    // Offset of frame t's first sample in a frame-ordered sample vector.
    std::size_t frame_offset(int t) const { return offsets_[t]; }

    bool operator==(const SamplingPattern &o) const { return shape_ == o.shape_ && mask_ == o.mask_; }

private:
    Shape shape_{};
    std::vector<std::uint8_t> mask_;
    GoldenAngleParams params_{};
    std::vector<std::uint32_t> indices_;
    std::vector<std::size_t> offsets_;
};

// Measured samples b at mask-true locations, frame-ordered.
struct KSpaceData {
    std::shared_ptr<const SamplingPattern> pattern;
    std::vector<cplx> samples;
    double noise_sigma = 0.0;

    KSpaceData() = default;
    KSpaceData(std::shared_ptr<const SamplingPattern> p, std::vector<cplx> s, double sigma = 0.0);

    const Shape &shape() const { return pattern->shape(); }
};

struct Roi {
    int x0 = 0;
    int y0 = 0;
    int width = 0;
    int height = 0;

    static Roi full(const Shape &s) { return {0, 0, s.nx, s.ny}; }
    bool inside(const Shape &s) const;
    bool operator==(const Roi &) const = default;
};

DynamicDataset extract_roi(const DynamicDataset &d, const Roi &r);

// Linear algebra on datasets (complex Hilbert space, <a, b> = sum conj(a) b).
cplx inner(const DynamicDataset &a, const DynamicDataset &b);
double squared_norm(const DynamicDataset &a);
double squared_norm(std::span<const cplx> a);
// y += a * x
void axpy(cplx a, const DynamicDataset &x, DynamicDataset &y);
DynamicDataset operator+(const DynamicDataset &a, const DynamicDataset &b);
DynamicDataset operator-(const DynamicDataset &a, const DynamicDataset &b);
DynamicDataset operator*(cplx s, const DynamicDataset &a);

std::vector<double> magnitude(std::span<const cplx> v);

} // namespace dccs
