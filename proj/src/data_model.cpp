#include "dccs/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dccs {

void validate_shape(const Shape &s) {
    if (s.nx < 1 || s.ny < 1 || s.nt < 1) {
        throw InvalidValue("shape dimensions must be >= 1, got " + std::to_string(s.nx) + "x" + std::to_string(s.ny) +
                           "x" + std::to_string(s.nt));
    }
}

void require_same_shape(const Shape &a, const Shape &b, const char *what) {
    if (!(a == b)) {
        throw ShapeMismatch(std::string(what) + ": shape " + std::to_string(a.nx) + "x" + std::to_string(a.ny) + "x" +
                            std::to_string(a.nt) + " vs " + std::to_string(b.nx) + "x" + std::to_string(b.ny) + "x" +
                            std::to_string(b.nt));
    }
}

DynamicDataset::DynamicDataset(Shape shape, double pixel_spacing)
    : shape_(shape), pixel_spacing_(pixel_spacing) {
    validate_shape(shape_);
    values_.assign(shape_.size(), cplx{});
}

DynamicDataset::DynamicDataset(Shape shape, std::vector<cplx> values, double pixel_spacing)
    : shape_(shape), values_(std::move(values)), pixel_spacing_(pixel_spacing) {
    validate_shape(shape_);
    if (values_.size() != shape_.size()) {
        throw ShapeMismatch("dataset value count " + std::to_string(values_.size()) + " does not match shape size " +
                            std::to_string(shape_.size()));
    }
    if (!all_finite()) throw InvalidValue("dataset contains non-finite values");
}

bool DynamicDataset::all_finite() const {
    return std::all_of(values_.begin(), values_.end(),
                       [](const cplx &z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
}

DeformationField::DeformationField(Shape shape) : shape_(shape) {
    validate_shape(shape_);
    dx_.assign(shape_.size(), 0.0);
    dy_.assign(shape_.size(), 0.0);
}

DeformationField::DeformationField(Shape shape, std::vector<double> dx, std::vector<double> dy)
    : shape_(shape), dx_(std::move(dx)), dy_(std::move(dy)) {
    validate_shape(shape_);
    if (dx_.size() != shape_.size() || dy_.size() != shape_.size()) {
        throw ShapeMismatch("deformation field planes do not match shape");
    }
    if (!all_finite()) throw InvalidValue("deformation field contains non-finite values");
}

bool DeformationField::all_finite() const {
    auto fin = [](double v) { return std::isfinite(v); };
    return std::all_of(dx_.begin(), dx_.end(), fin) && std::all_of(dy_.begin(), dy_.end(), fin);
}

bool DeformationField::is_zero() const {
    auto zero = [](double v) { return v == 0.0; };
    return std::all_of(dx_.begin(), dx_.end(), zero) && std::all_of(dy_.begin(), dy_.end(), zero);
}

double DeformationField::squared_norm() const {
    double s = 0.0;
    for (std::size_t i = 0; i < dx_.size(); ++i) s += dx_[i] * dx_[i] + dy_[i] * dy_[i];
    return s;
}

double Field2::squared_norm() const {
    double s = 0.0;
    for (std::size_t i = 0; i < dx.size(); ++i) s += dx[i] * dx[i] + dy[i] * dy[i];
    return s;
}

Field2 field_frame(const DeformationField &theta, int t) {
    const auto &s = theta.shape();
    Field2 f(s.nx, s.ny);
    auto dx = theta.dx_frame(t);
    auto dy = theta.dy_frame(t);
    std::copy(dx.begin(), dx.end(), f.dx.begin());
    std::copy(dy.begin(), dy.end(), f.dy.begin());
    return f;
}

void set_field_frame(DeformationField &theta, int t, const Field2 &f) {
    const auto &s = theta.shape();
    if (f.nx != s.nx || f.ny != s.ny) throw ShapeMismatch("frame field does not match deformation grid");
    std::copy(f.dx.begin(), f.dx.end(), theta.dx_frame(t).begin());
    std::copy(f.dy.begin(), f.dy.end(), theta.dy_frame(t).begin());
}

SamplingPattern::SamplingPattern(Shape shape, std::vector<std::uint8_t> mask, GoldenAngleParams params)
    : shape_(shape), mask_(std::move(mask)), params_(params) {
    validate_shape(shape_);
    if (mask_.size() != shape_.size()) throw ShapeMismatch("mask size does not match shape");
    const std::size_t fs = shape_.frame_size();
    offsets_.resize(static_cast<std::size_t>(shape_.nt) + 1, 0);
    for (int t = 0; t < shape_.nt; ++t) {
        offsets_[t] = indices_.size();
        for (std::size_t i = 0; i < fs; ++i) {
            if (mask_[t * fs + i]) indices_.push_back(static_cast<std::uint32_t>(i));
        }
    }
    offsets_[shape_.nt] = indices_.size();
}

std::span<const std::uint32_t> SamplingPattern::frame_indices(int t) const {
    return std::span<const std::uint32_t>(indices_).subspan(offsets_[t], offsets_[t + 1] - offsets_[t]);
}

KSpaceData::KSpaceData(std::shared_ptr<const SamplingPattern> p, std::vector<cplx> s, double sigma)
    : pattern(std::move(p)), samples(std::move(s)), noise_sigma(sigma) {
    if (!pattern) throw InvalidValue("k-space data requires a sampling pattern");
    if (samples.size() != pattern->count()) {
        throw ShapeMismatch("sample count " + std::to_string(samples.size()) + " does not match mask count " +
                            std::to_string(pattern->count()));
    }
}

bool Roi::inside(const Shape &s) const {
    return x0 >= 0 && y0 >= 0 && width >= 1 && height >= 1 && x0 + width <= s.nx && y0 + height <= s.ny;
}

DynamicDataset extract_roi(const DynamicDataset &d, const Roi &r) {
    if (!r.inside(d.shape())) {
        throw RoiOutOfBounds("ROI (" + std::to_string(r.x0) + "," + std::to_string(r.y0) + "," + std::to_string(r.width) +
                             "x" + std::to_string(r.height) + ") exceeds " + std::to_string(d.nx()) + "x" +
                             std::to_string(d.ny()) + " grid");
    }
    DynamicDataset out(Shape{r.width, r.height, d.nt()}, d.pixel_spacing());
    for (int t = 0; t < d.nt(); ++t) {
        for (int y = 0; y < r.height; ++y) {
            const auto src = d.frame(t).subspan(static_cast<std::size_t>(r.y0 + y) * d.nx() + r.x0, r.width);
            std::copy(src.begin(), src.end(), out.frame(t).begin() + static_cast<std::size_t>(y) * r.width);
        }
    }
    return out;
}

cplx inner(const DynamicDataset &a, const DynamicDataset &b) {
    require_same_shape(a.shape(), b.shape(), "inner");
    cplx s{};
    const auto va = a.values();
    const auto vb = b.values();
    for (std::size_t i = 0; i < va.size(); ++i) s += std::conj(va[i]) * vb[i];
    return s;
}

double squared_norm(std::span<const cplx> a) {
    double s = 0.0;
    for (const auto &z : a) s += std::norm(z);
    return s;
}

double squared_norm(const DynamicDataset &a) { return squared_norm(a.values()); }

void axpy(cplx a, const DynamicDataset &x, DynamicDataset &y) {
    require_same_shape(x.shape(), y.shape(), "axpy");
    const auto vx = x.values();
    auto vy = y.values();
    for (std::size_t i = 0; i < vx.size(); ++i) vy[i] += a * vx[i];
}

DynamicDataset operator+(const DynamicDataset &a, const DynamicDataset &b) {
    DynamicDataset out = a;
    axpy(1.0, b, out);
    return out;
}

DynamicDataset operator-(const DynamicDataset &a, const DynamicDataset &b) {
    DynamicDataset out = a;
    axpy(-1.0, b, out);
    return out;
}

DynamicDataset operator*(cplx s, const DynamicDataset &a) {
    DynamicDataset out = a;
    for (auto &z : out.values()) z *= s;
    return out;
}

std::vector<double> magnitude(std::span<const cplx> v) {
    std::vector<double> m(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) m[i] = std::abs(v[i]);
    return m;
}

} // namespace dccs
