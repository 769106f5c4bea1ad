#include <doctest.h>

#include <Eigen/Dense>
#include <set>

#include "dccs/phantom.hpp"
#include "dccs/registration.hpp"
#include "oracles.hpp"

using namespace dccs;

namespace {

PhantomConfig with_motion(MotionKind m) {
    PhantomConfig c;
    c.motion = m;
    return c;
}

DeformationField negated(const DeformationField &f) {
    std::vector<double> dx(f.dx().begin(), f.dx().end()), dy(f.dy().begin(), f.dy().end());
    for (auto &v : dx) v = -v;
    for (auto &v : dy) v = -v;
    return DeformationField(f.shape(), dx, dy);
}

std::vector<double> region_curve(const Phantom &ph, Region r) {
    std::vector<double> c(ph.truth.nt(), 0.0);
    int n = 0;
    for (std::size_t i = 0; i < ph.labels.size(); ++i) {
        if (ph.labels[i] != static_cast<std::uint8_t>(r)) continue;
        ++n;
        for (int t = 0; t < ph.truth.nt(); ++t) c[t] += ph.truth.frame(t)[i].real();
    }
    for (auto &v : c) v /= n;
    return c;
}

} // namespace

TEST_CASE("default phantom dimensions") {
    const PhantomConfig c;
    CHECK(c.nx == 64);
    CHECK(c.ny == 64);
    CHECK(c.nt == 35);
    const auto ph = generate(c);
    CHECK(ph.truth.shape() == Shape{64, 64, 35});
    CHECK(ph.true_theta.shape() == ph.truth.shape());
    CHECK(ph.roi.inside(ph.truth.shape()));
    CHECK(ph.roi.width == ph.roi.height);
    CHECK(ph.roi.width < 64);
}

TEST_CASE("values are real and nonnegative") {
    const auto ph = generate(PhantomConfig{});
    bool ok = true;
    for (const auto &z : ph.truth.values()) ok = ok && z.imag() == 0.0 && z.real() >= 0.0;
    CHECK(ok);
}

TEST_CASE("motion-free phantom") {
    const auto ph = generate(with_motion(MotionKind::None));
    CHECK(ph.true_theta.is_zero());

    SUBCASE("geometry is shared: Casorati rank <= regions + 1") {
        const auto s = oracle::casorati(ph.truth);
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(s);
        const auto &sv = svd.singularValues();
        int rank = 0;
        for (Eigen::Index i = 0; i < sv.size(); ++i) rank += sv[i] > 1e-8 * sv[0] ? 1 : 0;
        CHECK(rank <= kRegionCount + 1);
        // Every pixel's curve is a fixed mix of region curves, so frames differ only in intensity.
        CHECK(rank >= 2);
    }
}

TEST_CASE("translation realigns under the negated field") {
    for (auto m : {MotionKind::Translation, MotionKind::SmoothElastic}) {
        const auto moving = generate(with_motion(m));
        const auto still = generate(with_motion(MotionKind::None));
        CHECK_FALSE(moving.true_theta.is_zero());
        const auto aligned = warp(moving.truth, negated(moving.true_theta));
        const double err = squared_norm(aligned - still.truth);
        const double energy = squared_norm(still.truth);
        CHECK(err < 0.01 * energy);
        // Without realignment the mismatch is far larger.
        CHECK(squared_norm(moving.truth - still.truth) > 5.0 * err);
    }
}

TEST_CASE("translation amplitude") {
    PhantomConfig c;
    const auto ph = generate(c);
    double peak = 0.0;
    for (double v : ph.true_theta.dy()) peak = std::max(peak, std::abs(v));
    CHECK(peak > 0.5 * c.breathing_amplitude);
    CHECK(peak <= 1.5 * c.breathing_amplitude);
    // Uniform in space for translation.
    for (int t = 0; t < c.nt; ++t) {
        const auto dy = ph.true_theta.dy_frame(t);
        CHECK(*std::max_element(dy.begin(), dy.end()) == *std::min_element(dy.begin(), dy.end()));
    }
}

TEST_CASE("region labels") {
    const auto ph = generate(PhantomConfig{});
    std::set<int> present;
    for (auto l : ph.labels) {
        CHECK(l < kRegionCount);
        present.insert(l);
    }
    // One label per pixel keeps regions disjoint; background keeps coverage partial.
    CHECK(present.count(static_cast<int>(Region::Background)) == 1);
    for (auto r : {Region::RightVentricle, Region::LeftVentricle, Region::Myocardium})
        CHECK(present.count(static_cast<int>(r)) == 1);
}

TEST_CASE("bolus curves") {
    const auto ph = generate(with_motion(MotionKind::None));

    SUBCASE("LV mean curve is unimodal") {
        const auto c = region_curve(ph, Region::LeftVentricle);
        int changes = 0;
        double prev = 0.0;
        for (std::size_t t = 1; t < c.size(); ++t) {
            const double d = c[t] - c[t - 1];
            if (std::abs(d) < 1e-12) continue;
            if (prev != 0.0 && (d > 0) != (prev > 0)) ++changes;
            prev = d;
        }
        CHECK(changes <= 2);
    }
    SUBCASE("RV enhances before LV") {
        const auto rv = region_curve(ph, Region::RightVentricle);
        const auto lv = region_curve(ph, Region::LeftVentricle);
        const auto argmax = [](const std::vector<double> &v) { return std::max_element(v.begin(), v.end()) - v.begin(); };
        CHECK(argmax(rv) < argmax(lv));
    }
    SUBCASE("gamma variate") {
        CHECK(bolus_curve(3.0, 4.0, 2.0, 2.0, 1.0) == 0.0);
        double peak = 0.0;
        for (double t = 4.0; t < 40.0; t += 0.01) peak = std::max(peak, bolus_curve(t, 4.0, 2.0, 2.0, 3.0));
        CHECK(peak == doctest::Approx(3.0).epsilon(1e-4));
    }
}

TEST_CASE("determinism and seed") {
    PhantomConfig c;
    c.nt = 12;
    const auto a = generate(c);
    const auto b = generate(c);
    CHECK(a.truth == b.truth);
    CHECK(a.true_theta == b.true_theta);
    c.noise_seed = 99;
    CHECK_FALSE(generate(c).true_theta == a.true_theta);
}

TEST_CASE("hard edges") {
    PhantomConfig c;
    c.motion = MotionKind::None;
    c.edge_width = 0.0;
    c.nt = 14;
    const auto ph = generate(c);
    const auto s = oracle::casorati(ph.truth);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(s);
    const auto &sv = svd.singularValues();
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) rank += sv[i] > 1e-8 * sv[0] ? 1 : 0;
    CHECK(rank <= kRegionCount);
    // Interior pixels carry exactly their region's level.
    const auto lv = region_curve(ph, Region::LeftVentricle);
    const int cx = 32, cy = 32;
    if (ph.labels[cy * 64 + cx] == static_cast<std::uint8_t>(Region::LeftVentricle))
        CHECK(ph.truth.at(cx, cy, 10).real() == doctest::Approx(lv[10]).epsilon(0.05));
}

TEST_CASE("config validation") {
    PhantomConfig c;
    c.breathing_amplitude = -1.0;
    CHECK_THROWS_AS(generate(c), InvalidConfig);
    c = PhantomConfig{};
    c.bolus_arrival.lv = 35.0;
    CHECK_THROWS_AS(generate(c), InvalidConfig);
    c = PhantomConfig{};
    c.nx = 0;
    CHECK_THROWS_AS(generate(c), InvalidConfig);
    CHECK(parse_motion(motion_name(MotionKind::SmoothElastic)) == MotionKind::SmoothElastic);
    CHECK_THROWS_AS(parse_motion("wobble"), InvalidConfig);
}
