#include "dccs/registration.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace dccs {
namespace {

struct Bilinear {
    std::size_t i00, i10, i01, i11;
    double wx, wy;
};

inline Bilinear bilinear_at(int x, int y, double dx, double dy, int nx, int ny) {
    const double px = std::clamp(x + dx, 0.0, static_cast<double>(nx - 1));
    const double py = std::clamp(y + dy, 0.0, static_cast<double>(ny - 1));
    const int x0 = static_cast<int>(std::floor(px));
    const int y0 = static_cast<int>(std::floor(py));
    const int x1 = std::min(x0 + 1, nx - 1);
    const int y1 = std::min(y0 + 1, ny - 1);
    const auto row0 = static_cast<std::size_t>(y0) * nx;
    const auto row1 = static_cast<std::size_t>(y1) * nx;
    return {row0 + x0, row0 + x1, row1 + x0, row1 + x1, px - x0, py - y0};
}

template <class T>
void warp_frame(std::span<const T> src, int nx, int ny, std::span<const double> dx, std::span<const double> dy,
                std::span<T> out) {
    for (int y = 0; y < ny; ++y) {
        for (int x = 0; x < nx; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * nx + x;
            const auto b = bilinear_at(x, y, dx[i], dy[i], nx, ny);
            if (b.wx == 0.0 && b.wy == 0.0) {
                out[i] = src[b.i00];
            } else {
                out[i] = (1.0 - b.wx) * (1.0 - b.wy) * src[b.i00] + b.wx * (1.0 - b.wy) * src[b.i10] +
                         (1.0 - b.wx) * b.wy * src[b.i01] + b.wx * b.wy * src[b.i11];
            }
        }
    }
}

template <class T>
void warp_adjoint_frame(std::span<const T> src, int nx, int ny, std::span<const double> dx, std::span<const double> dy,
                        std::span<T> out) {
    std::fill(out.begin(), out.end(), T{});
    for (int y = 0; y < ny; ++y) {
        for (int x = 0; x < nx; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * nx + x;
            const auto b = bilinear_at(x, y, dx[i], dy[i], nx, ny);
            const T v = src[i];
            if (b.wx == 0.0 && b.wy == 0.0) {
                out[b.i00] += v;
            } else {
                out[b.i00] += (1.0 - b.wx) * (1.0 - b.wy) * v;
                out[b.i10] += b.wx * (1.0 - b.wy) * v;
                out[b.i01] += (1.0 - b.wx) * b.wy * v;
                out[b.i11] += b.wx * b.wy * v;
            }
        }
    }
}

// n x n matrix applying the truncated, normalised 1-D Gaussian with edge replication.
Eigen::MatrixXd gaussian_matrix(int n, double sigma) {
    const int r = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> w(2 * r + 1);
    double sum = 0.0;
    for (int j = -r; j <= r; ++j) sum += (w[j + r] = std::exp(-0.5 * j * j / (sigma * sigma)));
    for (auto &v : w) v /= sum;
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = -r; j <= r; ++j) k(i, std::clamp(i + j, 0, n - 1)) += w[j + r];
    }
    return k;
}

using RowImage = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void smooth_plane(std::vector<double> &v, int nx, int ny, const Eigen::MatrixXd &kx, const Eigen::MatrixXd &ky) {
    Eigen::Map<RowImage> img(v.data(), ny, nx);
    RowImage tmp = ky * img * kx.transpose();
    img = tmp;
}

void require_frame(const Image &a, const Image &b) {
    if (a.nx != b.nx || a.ny != b.ny) throw ShapeMismatch("frame shapes differ");
}

} // namespace

void DemonsConfig::validate() const {
    if (!(alpha > 0.0)) throw InvalidConfig("demons alpha must be > 0");
    if (!(sigma > 0.0)) throw InvalidConfig("demons sigma must be > 0");
    if (max_iters < 1) throw InvalidConfig("demons max_iters must be >= 1");
    if (!(stop_tol > 0.0)) throw InvalidConfig("demons stop_tol must be > 0");
    if (!(gain > 0.0)) throw InvalidConfig("demons gain must be > 0");
}

DynamicDataset warp(const DynamicDataset &f, const DeformationField &theta) {
    require_same_shape(f.shape(), theta.shape(), "warp");
    DynamicDataset out(f.shape(), f.pixel_spacing());
    const int nt = f.nt();
#pragma omp parallel for schedule(static)
    for (int t = 0; t < nt; ++t) {
        warp_frame<cplx>(f.frame(t), f.nx(), f.ny(), theta.dx_frame(t), theta.dy_frame(t), out.frame(t));
    }
    return out;
}

DynamicDataset warp_adjoint(const DynamicDataset &h, const DeformationField &theta) {
    require_same_shape(h.shape(), theta.shape(), "warp_adjoint");
    DynamicDataset out(h.shape(), h.pixel_spacing());
    const int nt = h.nt();
#pragma omp parallel for schedule(static)
    for (int t = 0; t < nt; ++t) {
        warp_adjoint_frame<cplx>(h.frame(t), h.nx(), h.ny(), theta.dx_frame(t), theta.dy_frame(t), out.frame(t));
    }
    return out;
}

Image warp_image(const Image &img, const Field2 &theta) {
    if (img.nx != theta.nx || img.ny != theta.ny) throw ShapeMismatch("warp_image: field does not match image");
    Image out(img.nx, img.ny);
    warp_frame<double>(img.v, img.nx, img.ny, theta.dx, theta.dy, out.v);
    return out;
}

Image magnitude_frame(const DynamicDataset &f, int t) {
    Image img(f.nx(), f.ny());
    const auto fr = f.frame(t);
    for (std::size_t i = 0; i < fr.size(); ++i) img.v[i] = std::abs(fr[i]);
    return img;
}

Field2 demons_force(const Image &moving, const Image &fixed, double alpha) {
    require_frame(moving, fixed);
    const int nx = fixed.nx;
    const int ny = fixed.ny;
    Field2 u(nx, ny);
    const double a2 = alpha * alpha;
    for (int y = 0; y < ny; ++y) {
        for (int x = 0; x < nx; ++x) {
            const int xm = std::max(x - 1, 0), xp = std::min(x + 1, nx - 1);
            const int ym = std::max(y - 1, 0), yp = std::min(y + 1, ny - 1);
            const double gx = xp > xm ? (fixed(xp, y) - fixed(xm, y)) / (xp - xm) : 0.0;
            const double gy = yp > ym ? (fixed(x, yp) - fixed(x, ym)) / (yp - ym) : 0.0;
            const double diff = fixed(x, y) - moving(x, y);
            const double denom = gx * gx + gy * gy + a2 * diff * diff;
            if (denom < 1e-12) continue;
            const std::size_t i = static_cast<std::size_t>(y) * nx + x;
            u.dx[i] = diff * gx / denom;
            u.dy[i] = diff * gy / denom;
        }
    }
    return u;
}

Image gaussian_smooth(const Image &img, double sigma) {
    Image out = img;
    smooth_plane(out.v, img.nx, img.ny, gaussian_matrix(img.nx, sigma), gaussian_matrix(img.ny, sigma));
    return out;
}

Field2 gaussian_smooth(const Field2 &u, double sigma) {
    Field2 out = u;
    const auto kx = gaussian_matrix(u.nx, sigma);
    const auto ky = u.ny == u.nx ? kx : gaussian_matrix(u.ny, sigma);
    smooth_plane(out.dx, u.nx, u.ny, kx, ky);
    smooth_plane(out.dy, u.nx, u.ny, kx, ky);
    return out;
}

double ssd(const Image &a, const Image &b) {
    require_frame(a, b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.v.size(); ++i) {
        const double d = a.v[i] - b.v[i];
        s += d * d;
    }
    return s;
}

DemonsResult demons_register(const Image &moving, const Image &fixed, const DemonsConfig &cfg,
                             const Field2 &theta_init) {
    cfg.validate();
    require_frame(moving, fixed);
    if (theta_init.nx != fixed.nx || theta_init.ny != fixed.ny) throw ShapeMismatch("initial field shape");

    const auto kx = gaussian_matrix(fixed.nx, cfg.sigma);
    const auto ky = fixed.ny == fixed.nx ? kx : gaussian_matrix(fixed.ny, cfg.sigma);

    DemonsResult res;
    res.theta = theta_init;
    Image warped = warp_image(moving, res.theta);
    double current = ssd(warped, fixed);
    res.ssd.push_back(current);

    Field2 cand(fixed.nx, fixed.ny);
    for (int n = 0; n < cfg.max_iters; ++n) {
        Field2 u = demons_force(warped, fixed, cfg.alpha);
        smooth_plane(u.dx, u.nx, u.ny, kx, ky);
        smooth_plane(u.dy, u.nx, u.ny, kx, ky);

        for (auto &v : u.dx) v *= cfg.gain;
        for (auto &v : u.dy) v *= cfg.gain;

        bool accepted = false;
        Image trial;
        double trial_ssd = 0.0;
        for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
            if (attempt == 1) {
                for (auto &v : u.dx) v *= 0.5;
                for (auto &v : u.dy) v *= 0.5;
            }
            for (std::size_t i = 0; i < u.dx.size(); ++i) {
                cand.dx[i] = res.theta.dx[i] + u.dx[i];
                cand.dy[i] = res.theta.dy[i] + u.dy[i];
            }
            trial = warp_image(moving, cand);
            trial_ssd = ssd(trial, fixed);
            accepted = trial_ssd <= current;
        }
        if (!accepted) break;

        std::swap(res.theta, cand);
        warped = std::move(trial);
        current = trial_ssd;
        res.ssd.push_back(current);
        ++res.iterations;

        const double tn = res.theta.squared_norm();
        if (tn == 0.0 || std::sqrt(u.squared_norm() / tn) < cfg.stop_tol) break;
    }
    return res;
}

DeformationField register_sequence(const DynamicDataset &f, const DynamicDataset &g, const DemonsConfig &cfg,
                                   const DeformationField &theta_init) {
    require_same_shape(f.shape(), g.shape(), "register_sequence");
    require_same_shape(f.shape(), theta_init.shape(), "register_sequence initial field");
    cfg.validate();
    DeformationField out(f.shape());
    const int nt = f.nt();
#pragma omp parallel for schedule(dynamic)
    for (int t = 0; t < nt; ++t) {
        const auto res = demons_register(magnitude_frame(f, t), magnitude_frame(g, t), cfg, field_frame(theta_init, t));
        set_field_frame(out, t, res.theta);
    }
    return out;
}

} // namespace dccs
