#include "dccs/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dccs/registration.hpp"

namespace dccs {
namespace {

double ratio_to_db(double mean_ratio) {
    if (mean_ratio == 0.0) return kSerInfinity;
    return -10.0 * std::log10(mean_ratio);
}

template <class FrameFn>
double ser_from_frames(const Shape &shape, const Roi &roi, FrameFn frames) {
    double acc = 0.0;
    for (int t = 0; t < shape.nt; ++t) {
        const auto [rec, ref] = frames(t);
        double err = 0.0;
        double sig = 0.0;
        for (int y = roi.y0; y < roi.y0 + roi.height; ++y) {
            for (int x = roi.x0; x < roi.x0 + roi.width; ++x) {
                const double d = rec(x, y) - ref(x, y);
                err += d * d;
                sig += ref(x, y) * ref(x, y);
            }
        }
        if (sig == 0.0) throw ZeroReferenceFrame("reference frame " + std::to_string(t) + " is zero inside the ROI");
        acc += err / sig;
    }
    return ratio_to_db(acc / shape.nt);
}

void check_inputs(const DynamicDataset &recon, const DynamicDataset &ideal, const Roi &roi) {
    require_same_shape(recon.shape(), ideal.shape(), "metric");
    if (!roi.inside(ideal.shape())) throw RoiOutOfBounds("metric ROI exceeds grid");
}

} // namespace

double ser_roi(const DynamicDataset &recon, const DynamicDataset &ideal, const Roi &roi) {
    check_inputs(recon, ideal, roi);
    return ser_from_frames(ideal.shape(), roi, [&](int t) {
        return std::pair{magnitude_frame(recon, t), magnitude_frame(ideal, t)};
    });
}

std::vector<double> log_kernel(int size, double sigma) {
    const int half = size / 2;
    const double s2 = sigma * sigma;
    std::vector<double> h(static_cast<std::size_t>(size) * size);
    double sum = 0.0;
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const double r2 = static_cast<double>((x - half) * (x - half) + (y - half) * (y - half));
            sum += (h[static_cast<std::size_t>(y) * size + x] = std::exp(-r2 / (2.0 * s2)));
        }
    }
    double mean = 0.0;
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const double r2 = static_cast<double>((x - half) * (x - half) + (y - half) * (y - half));
            auto &v = h[static_cast<std::size_t>(y) * size + x];
            v = (v / sum) * (r2 - 2.0 * s2) / (s2 * s2);
            mean += v;
        }
    }
    mean /= static_cast<double>(h.size());
    for (auto &v : h) v -= mean;
    return h;
}

Image convolve_replicate(const Image &img, const std::vector<double> &kernel, int size) {
    const int half = size / 2;
    Image out(img.nx, img.ny);
    for (int y = 0; y < img.ny; ++y) {
        for (int x = 0; x < img.nx; ++x) {
            double acc = 0.0;
            for (int ky = 0; ky < size; ++ky) {
                const int sy = std::clamp(y + ky - half, 0, img.ny - 1);
                for (int kx = 0; kx < size; ++kx) {
                    const int sx = std::clamp(x + kx - half, 0, img.nx - 1);
                    acc += kernel[static_cast<std::size_t>(ky) * size + kx] * img(sx, sy);
                }
            }
            out(x, y) = acc;
        }
    }
    return out;
}

double hfser_roi(const DynamicDataset &recon, const DynamicDataset &ideal, const Roi &roi) {
    check_inputs(recon, ideal, roi);
    constexpr int kSize = 15;
    const auto kernel = log_kernel(kSize, 1.5);
    return ser_from_frames(ideal.shape(), roi, [&](int t) {
        return std::pair{convolve_replicate(magnitude_frame(recon, t), kernel, kSize),
                         convolve_replicate(magnitude_frame(ideal, t), kernel, kSize)};
    });
}

double registration_error(const DeformationField &theta_est, const DeformationField &theta_true,
                          const std::vector<std::uint8_t> &mask) {
    require_same_shape(theta_est.shape(), theta_true.shape(), "registration_error");
    const Shape &s = theta_est.shape();
    if (mask.size() != s.frame_size()) throw ShapeMismatch("registration mask does not match frame size");
    const auto active = std::count_if(mask.begin(), mask.end(), [](std::uint8_t m) { return m != 0; });
    if (active == 0) throw EmptyMask("registration mask selects no pixels");
    double acc = 0.0;
    for (int t = 0; t < s.nt; ++t) {
        const auto ex = theta_est.dx_frame(t), ey = theta_est.dy_frame(t);
        const auto tx = theta_true.dx_frame(t), ty = theta_true.dy_frame(t);
        for (std::size_t i = 0; i < mask.size(); ++i) {
            if (mask[i]) acc += std::hypot(ex[i] - tx[i], ey[i] - ty[i]);
        }
    }
    return acc / (static_cast<double>(active) * s.nt);
}

double csv_db(double db) { return std::isinf(db) && db > 0 ? kSerCsvCap : db; }

} // namespace dccs
