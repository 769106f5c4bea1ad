#include "dccs/phantom.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace dccs {
namespace {

struct Ellipse {
    double cx, cy, ax, ay;
    bool contains(double x, double y) const {
        const double u = (x - cx) / ax;
        const double v = (y - cy) / ay;
        return u * u + v * v <= 1.0;
    }
    // Soft membership in [0, 1]: an erf ramp of std `width` px across the boundary.
    double membership(double x, double y, double width) const {
        const double u = (x - cx) / ax;
        const double v = (y - cy) / ay;
        const double r = std::sqrt(u * u + v * v);
        // Distance to the boundary along the radius, approximated with the local scale.
        const double scale = r > 0.0 ? std::hypot(u * ax, v * ay) / r : std::min(ax, ay);
        const double dist = (r - 1.0) * scale;
        return 0.5 * std::erfc(dist / (std::sqrt(2.0) * width));
    }
};

// Anatomy on a 64x64 reference grid, scaled to the configured grid.
struct Anatomy {
    Ellipse torso, lung_l, lung_r, spine, rv, lv_inner, lv_outer;

    explicit Anatomy(int nx, int ny) {
        const double sx = nx / 64.0;
        const double sy = ny / 64.0;
        auto e = [&](double cx, double cy, double ax, double ay) { return Ellipse{cx * sx, cy * sy, ax * sx, ay * sy}; };
        torso = e(32.0, 33.0, 27.0, 20.0);
        lung_l = e(14.0, 30.0, 7.5, 11.0);
        lung_r = e(50.0, 30.0, 7.5, 11.0);
        spine = e(32.0, 48.0, 3.5, 3.5);
        rv = e(25.0, 30.0, 6.0, 8.0);
        lv_inner = e(36.0, 31.0, 5.0, 5.0);
        lv_outer = e(36.0, 31.0, 8.5, 8.5);
    }

    Region label(double x, double y) const {
        if (lv_inner.contains(x, y)) return Region::LeftVentricle;
        if (lv_outer.contains(x, y)) return Region::Myocardium;
        if (rv.contains(x, y)) return Region::RightVentricle;
        if (spine.contains(x, y)) return Region::Spine;
        if (lung_l.contains(x, y) || lung_r.contains(x, y)) return Region::Lung;
        if (torso.contains(x, y)) return Region::Torso;
        return Region::Background;
    }

    // Layered painting with soft edges; linear in the region levels.
    double paint(double x, double y, const std::array<double, kRegionCount> &level, double width) const {
        auto lv = [&](Region r) { return level[static_cast<int>(r)]; };
        double v = lv(Region::Background);
        auto layer = [&](const Ellipse &e, Region r) {
            const double m = e.membership(x, y, width);
            v = v * (1.0 - m) + lv(r) * m;
        };
        layer(torso, Region::Torso);
        layer(lung_l, Region::Lung);
        layer(lung_r, Region::Lung);
        layer(spine, Region::Spine);
        layer(rv, Region::RightVentricle);
        layer(lv_outer, Region::Myocardium);
        layer(lv_inner, Region::LeftVentricle);
        return v;
    }

    double heart_cx() const { return lv_inner.cx; }
    double heart_cy() const { return lv_inner.cy; }
};

bool is_heart(Region r) {
    return r == Region::RightVentricle || r == Region::LeftVentricle || r == Region::Myocardium;
}

std::array<double, kRegionCount> intensities(const PhantomConfig &cfg, int t) {
    std::array<double, kRegionCount> v{};
    v[static_cast<int>(Region::Torso)] = 0.35;
    v[static_cast<int>(Region::Lung)] = 0.08;
    v[static_cast<int>(Region::Spine)] = 0.6;
    v[static_cast<int>(Region::RightVentricle)] = 0.15 + bolus_curve(t, cfg.bolus_arrival.rv, 1.6, 2.5, 1.0);
    v[static_cast<int>(Region::LeftVentricle)] = 0.15 + bolus_curve(t, cfg.bolus_arrival.lv, 2.0, 2.5, 0.9);
    v[static_cast<int>(Region::Myocardium)] = 0.2 + bolus_curve(t, cfg.bolus_arrival.myocardium, 3.5, 2.0, 0.35);
    return v;
}

// Per-frame breathing displacement with per-cycle amplitude jitter.
class Breathing {
public:
    explicit Breathing(const PhantomConfig &cfg) : cfg_(cfg) {
        std::mt19937_64 rng(cfg.noise_seed);
        std::uniform_real_distribution<double> jitter(0.75, 1.25);
        const int cycles = static_cast<int>(std::ceil(cfg.nt / cfg.breathing_period)) + 1;
        for (int c = 0; c < cycles; ++c) jitter_.push_back(jitter(rng));
    }

    // Signed breathing excursion (px) at frame t.
    double excursion(int t) const {
        const double phase = 2.0 * std::numbers::pi * t / cfg_.breathing_period;
        const int cycle = static_cast<int>(std::floor(t / cfg_.breathing_period));
        return cfg_.breathing_amplitude * jitter_[cycle] * std::sin(phase);
    }

private:
    PhantomConfig cfg_;
    std::vector<double> jitter_;
};

} // namespace

void PhantomConfig::validate() const {
    if (nx < 1 || ny < 1 || nt < 1) throw InvalidConfig("phantom nx, ny and nt must be >= 1");
    if (!(breathing_amplitude >= 0.0)) throw InvalidConfig("breathing_amplitude must be >= 0");
    if (!(breathing_period > 0.0)) throw InvalidConfig("breathing_period must be > 0");
    if (!(edge_width >= 0.0)) throw InvalidConfig("edge_width must be >= 0");
    if (!(pixel_spacing > 0.0)) throw InvalidConfig("pixel_spacing must be > 0");
    for (double a : {bolus_arrival.rv, bolus_arrival.lv, bolus_arrival.myocardium}) {
        if (!(a >= 0.0 && a < nt)) throw InvalidConfig("bolus arrival frames must lie in [0, nt)");
    }
}

double bolus_curve(double t, double arrival, double width, double shape, double peak) {
    if (t <= arrival) return 0.0;
    const double s = (t - arrival) / width;
    // s^k e^{-s} peaks at s = k with value k^k e^{-k}
    const double norm = std::pow(shape, shape) * std::exp(-shape);
    return peak * std::pow(s, shape) * std::exp(-s) / norm;
}

std::string motion_name(MotionKind m) {
    switch (m) {
    case MotionKind::None: return "none";
    case MotionKind::Translation: return "translation";
    case MotionKind::SmoothElastic: return "elastic";
    }
    return "?";
}

MotionKind parse_motion(const std::string &name) {
    if (name == "none") return MotionKind::None;
    if (name == "translation") return MotionKind::Translation;
    if (name == "elastic") return MotionKind::SmoothElastic;
    throw InvalidConfig("unknown motion '" + name + "' (expected none, translation or elastic)");
}

Phantom generate(const PhantomConfig &cfg) {
    cfg.validate();
    const Shape shape{cfg.nx, cfg.ny, cfg.nt};
    const Anatomy anatomy(cfg.nx, cfg.ny);
    const Breathing breathing(cfg);

    Phantom ph{DynamicDataset(shape, cfg.pixel_spacing), DeformationField(shape), Roi{}, {}};

    // Breathing is mostly superior-inferior (y) with a smaller x component.
    const double bump_sigma = 0.3 * cfg.nx;
    auto displacement = [&](double x, double y, int t, double &dx, double &dy) {
        dx = dy = 0.0;
        if (cfg.motion == MotionKind::None) return;
        const double e = breathing.excursion(t);
        double w = 1.0;
        if (cfg.motion == MotionKind::SmoothElastic) {
            const double rx = x - anatomy.heart_cx();
            const double ry = y - anatomy.heart_cy();
            w = std::exp(-(rx * rx + ry * ry) / (2.0 * bump_sigma * bump_sigma));
        }
        dx = 0.5 * e * w;
        dy = e * w;
    };

    constexpr int kSuper = 4;
    int hx0 = cfg.nx, hy0 = cfg.ny, hx1 = -1, hy1 = -1;
    for (int t = 0; t < cfg.nt; ++t) {
        const auto level = intensities(cfg, t);
        for (int y = 0; y < cfg.ny; ++y) {
            for (int x = 0; x < cfg.nx; ++x) {
                double acc = 0.0;
                bool heart = false;
                for (int sy = 0; sy < kSuper; ++sy) {
                    for (int sx = 0; sx < kSuper; ++sx) {
                        const double px = x + (sx + 0.5) / kSuper - 0.5;
                        const double py = y + (sy + 0.5) / kSuper - 0.5;
                        double dx, dy;
                        displacement(px, py, t, dx, dy);
                        const Region r = anatomy.label(px + dx, py + dy);
                        acc += cfg.edge_width > 0.0 ? anatomy.paint(px + dx, py + dy, level, cfg.edge_width)
                                                    : level[static_cast<int>(r)];
                        heart = heart || is_heart(r);
                    }
                }
                ph.truth.at(x, y, t) = acc / (kSuper * kSuper);
                double dx, dy;
                displacement(x, y, t, dx, dy);
                const auto i = shape.index(x, y, t);
                ph.true_theta.dx()[i] = dx;
                ph.true_theta.dy()[i] = dy;
                if (heart) {
                    hx0 = std::min(hx0, x);
                    hy0 = std::min(hy0, y);
                    hx1 = std::max(hx1, x);
                    hy1 = std::max(hy1, y);
                }
            }
        }
    }

    ph.labels.resize(shape.frame_size());
    for (int y = 0; y < cfg.ny; ++y) {
        for (int x = 0; x < cfg.nx; ++x) {
            ph.labels[static_cast<std::size_t>(y) * cfg.nx + x] = static_cast<std::uint8_t>(anatomy.label(x, y));
        }
    }

    if (hx1 < 0) {
        ph.roi = Roi::full(shape);
        return ph;
    }

    // Bounding square of the heart over all frames, dilated by 4 px.
    constexpr int kDilate = 4;
    hx0 -= kDilate;
    hy0 -= kDilate;
    hx1 += kDilate;
    hy1 += kDilate;
    int side = std::max(hx1 - hx0 + 1, hy1 - hy0 + 1);
    side = std::min({side, cfg.nx, cfg.ny});
    auto place = [side](int lo, int hi, int n) {
        const int centre = (lo + hi) / 2;
        return std::clamp(centre - side / 2, 0, n - side);
    };
    ph.roi = Roi{place(hx0, hx1, cfg.nx), place(hy0, hy1, cfg.ny), side, side};
    return ph;
}

} // namespace dccs
