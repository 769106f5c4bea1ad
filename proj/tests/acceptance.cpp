// Acceptance run: one PASS/FAIL line per criterion. Pass criterion numbers as
// arguments to run a subset, e.g. `acceptance 1 2 4`.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>
#include <unistd.h>

#include "dccs/encoding.hpp"
#include "dccs/metrics.hpp"
#include "dccs/phantom.hpp"
#include "dccs/priors.hpp"
#include "dccs/registration.hpp"
#include "dccs/solver.hpp"
#include "oracles.hpp"

using namespace dccs;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char *f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::shared_ptr<const SamplingPattern> random_pattern(const Shape &s, std::mt19937_64 &rng, double p) {
    std::bernoulli_distribution keep(p);
    std::vector<std::uint8_t> m(s.size());
    for (auto &v : m) v = keep(rng) ? 1 : 0;
    for (int t = 0; t < s.nt; ++t) m[s.index(0, 0, t)] = 1;
    return std::make_shared<const SamplingPattern>(s, std::move(m));
}

DeformationField random_field(const Shape &s, std::mt19937_64 &rng, double amp) {
    std::uniform_real_distribution<double> u(-amp, amp);
    DeformationField th(s);
    for (auto &v : th.dx()) v = u(rng);
    for (auto &v : th.dy()) v = u(rng);
    return th;
}

// ---------------------------------------------------------------- criterion 1

Outcome prox_oracles() {
    std::mt19937_64 rng(101);
    std::uniform_int_distribution<int> dim(1, 5), frames(2, 12);
    std::uniform_real_distribution<double> tau_d(0.05, 1.5);

    double worst_fourier = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        const Shape s{dim(rng), dim(rng), frames(rng)};
        const auto q = oracle::random_dataset(s, rng);
        const double tau = tau_d(rng);
        const auto g = prox_temporal_fourier(q, tau);
        for (int y = 0; y < s.ny; ++y) {
            for (int x = 0; x < s.nx; ++x) {
                auto c = oracle::dft1(oracle::pixel_series(q, x, y));
                for (auto &z : c) z = std::abs(z) > tau ? z * (1.0 - tau / std::abs(z)) : cplx{};
                const auto ref = oracle::dft1(c, +1);
                for (int t = 0; t < s.nt; ++t) worst_fourier = std::max(worst_fourier, std::abs(g.at(x, y, t) - ref[t]));
            }
        }
    }

    double worst_nuclear = 0.0;
    std::uniform_int_distribution<int> side(1, 7);
    for (int rep = 0; rep < 100; ++rep) {
        const Shape s{side(rng), side(rng), frames(rng)};
        const auto q = oracle::random_dataset(s, rng);
        const double tau = 3.0 * tau_d(rng);
        const auto g = prox_nuclear(q, tau);
        const Eigen::MatrixXcd ref = oracle::svt_left_gram(oracle::casorati(q), tau);
        worst_nuclear = std::max(worst_nuclear, (oracle::casorati(g) - ref).cwiseAbs().maxCoeff());
    }

    double worst_tv = 0.0;
    std::uniform_int_distribution<int> len(3, 8);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int rep = 0; rep < 100; ++rep) {
        const int n = len(rng);
        std::vector<double> v(n);
        for (auto &x : v) x = u(rng);
        const double tau = 0.5 * tau_d(rng);
        std::vector<cplx> qc(v.begin(), v.end());
        const auto g = prox_temporal_tv(DynamicDataset({1, 1, n}, qc), tau, PriorKind::tv());
        std::vector<double> gv(n);
        for (int t = 0; t < n; ++t) gv[t] = g.at(0, 0, t).real();
        const double ref = oracle::tv_objective(v, oracle::exact_circular_tv_prox(v, tau), tau);
        const double got = oracle::tv_objective(v, gv, tau);
        worst_tv = std::max(worst_tv, ref > 0 ? (got - ref) / ref : got);
    }

    const bool ok = worst_fourier <= 1e-10 && worst_nuclear <= 1e-9 && worst_tv <= 5e-3;
    return {ok, fmt("tfl1 max err %.2e (tol 1e-10), nuclear max err %.2e (tol 1e-9), TV worst objective excess %.3f%% (tol 0.5%%), 3x100 instances",
                    worst_fourier, worst_nuclear, 100.0 * worst_tv)};
}

// ---------------------------------------------------------------- criterion 2

Outcome adjoint_suite() {
    std::mt19937_64 rng(202);
    std::uniform_int_distribution<int> dim(2, 12), frames(1, 5);
    std::uniform_real_distribution<double> frac(0.1, 0.9);
    double worst_enc = 0.0, worst_warp = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        const Shape s{dim(rng), dim(rng), frames(rng)};
        const auto pat = random_pattern(s, rng, frac(rng));
        const auto f = oracle::random_dataset(s, rng);
        const KSpaceData b(pat, oracle::random_complex(pat->count(), rng));
        const auto af = forward(f, pat);
        cplx lhs{};
        for (std::size_t i = 0; i < af.samples.size(); ++i) lhs += std::conj(af.samples[i]) * b.samples[i];
        const cplx rhs = inner(f, adjoint(b));
        worst_enc = std::max(worst_enc, std::abs(lhs - rhs) / std::abs(lhs));
    }
    for (int rep = 0; rep < 100; ++rep) {
        const Shape s{dim(rng), dim(rng), frames(rng)};
        // amplitude beyond the grid exercises the clamped border
        const auto theta = random_field(s, rng, 0.5 * std::max(s.nx, s.ny));
        const auto f = oracle::random_dataset(s, rng);
        const auto h = oracle::random_dataset(s, rng);
        const cplx lhs = inner(warp(f, theta), h);
        const cplx rhs = inner(f, warp_adjoint(h, theta));
        worst_warp = std::max(worst_warp, std::abs(lhs - rhs) / std::abs(lhs));
    }
    const bool ok = worst_enc <= 1e-10 && worst_warp <= 1e-10;
    return {ok, fmt("encoding worst rel err %.2e, warp worst rel err %.2e (tol 1e-10), 100 pairs each", worst_enc, worst_warp)};
}

// ---------------------------------------------------------------- criterion 3

Outcome cg_dense() {
    std::mt19937_64 rng(303);
    const Shape s{8, 8, 4};
    const int nf = static_cast<int>(s.frame_size());
    ReconConfig cfg;
    cfg.cg_tol = 1e-14;
    cfg.cg_max_iters = 2000;
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        const auto pat = random_pattern(s, rng, 0.35);
        const KSpaceData b(pat, oracle::random_complex(pat->count(), rng));
        const auto theta = trial == 0 ? DeformationField(s) : random_field(s, rng, 2.0);
        const auto g = oracle::random_dataset(s, rng);
        const double lambda = 0.2 + 0.2 * trial, beta = 1.5;
        const double mu = 0.5 * lambda * beta;

        Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(pat->count()), static_cast<Eigen::Index>(s.size()));
        Eigen::Index row = 0;
        for (int t = 0; t < s.nt; ++t)
            for (int ky = 0; ky < s.ny; ++ky)
                for (int kx = 0; kx < s.nx; ++kx) {
                    if (!pat->sampled(kx, ky, t)) continue;
                    for (int y = 0; y < s.ny; ++y)
                        for (int x = 0; x < s.nx; ++x) {
                            const double ph = -2.0 * std::numbers::pi * (static_cast<double>(kx) * x / s.nx + static_cast<double>(ky) * y / s.ny);
                            a(row, t * nf + y * s.nx + x) = std::polar(1.0 / std::sqrt(static_cast<double>(nf)), ph);
                        }
                    ++row;
                }
        Eigen::MatrixXd w = Eigen::MatrixXd::Zero(nf * s.nt, nf * s.nt);
        for (int t = 0; t < s.nt; ++t) {
            const auto dx = theta.dx_frame(t), dy = theta.dy_frame(t);
            w.block(t * nf, t * nf, nf, nf) = oracle::warp_matrix(s.nx, s.ny, {dx.begin(), dx.end()}, {dy.begin(), dy.end()});
        }
        const Eigen::MatrixXcd h = a.adjoint() * a + mu * (w.transpose() * w).cast<cplx>();
        const Eigen::VectorXcd bv = Eigen::Map<const Eigen::VectorXcd>(b.samples.data(), static_cast<Eigen::Index>(b.samples.size()));
        const Eigen::VectorXcd gv = Eigen::Map<const Eigen::VectorXcd>(g.values().data(), static_cast<Eigen::Index>(s.size()));
        const Eigen::VectorXcd direct = h.ldlt().solve(a.adjoint() * bv + mu * (w.transpose().cast<cplx>() * gv));

        const auto f = solve_f(b, theta, g, lambda, beta, cfg, DynamicDataset(s));
        const Eigen::VectorXcd fv = Eigen::Map<const Eigen::VectorXcd>(f.values().data(), static_cast<Eigen::Index>(s.size()));
        worst = std::max(worst, (fv - direct).norm() / direct.norm());
    }
    return {worst <= 1e-8, fmt("worst rel diff vs dense LDLT %.2e (tol 1e-8), 5 problems of 8x8x4", worst)};
}

// ---------------------------------------------------------------- criterion 4

struct Blob {
    double cx, cy, width, amp;
};

Image paint(const std::vector<Blob> &blobs, int n, double sx, double sy) {
    Image img(n, n);
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            double v = 0.0;
            for (const auto &b : blobs) {
                const double r2 = (x - b.cx - sx) * (x - b.cx - sx) + (y - b.cy - sy) * (y - b.cy - sy);
                v += b.amp * std::exp(-r2 / (2.0 * b.width * b.width));
            }
            img(x, y) = v;
        }
    }
    return img;
}

Outcome registration_recovery() {
    std::mt19937_64 rng(404);
    const int n = 64;
    std::uniform_real_distribution<double> pos(22.0, 42.0), width(4.0, 7.0), amp(0.5, 1.0), radius(0.5, 4.0),
        angle(0.0, 2.0 * std::numbers::pi);
    double worst_case = 0.0, total = 0.0;
    bool monotone = true;
    int non_monotone_case = -1;
    for (int c = 0; c < 20; ++c) {
        std::vector<Blob> blobs(5);
        for (auto &b : blobs) b = {pos(rng), pos(rng), width(rng), amp(rng)};
        const double r = radius(rng), a = angle(rng);
        const double dx = r * std::cos(a), dy = r * std::sin(a);
        const Image fixed = paint(blobs, n, 0.0, 0.0);
        // moving(x + d) = fixed(x), so the field that aligns moving onto fixed is d everywhere
        const Image moving = paint(blobs, n, dx, dy);
        const auto res = demons_register(moving, fixed, DemonsConfig{}, Field2(n, n));

        for (std::size_t i = 1; i < res.ssd.size(); ++i) {
            if (res.ssd[i] > res.ssd[i - 1] && monotone) {
                monotone = false;
                non_monotone_case = c;
            }
        }
        if (!res.ssd.empty() && std::abs(ssd(warp_image(moving, res.theta), fixed) - res.ssd.back()) > 1e-9 * (1.0 + res.ssd.back())) {
            monotone = false;
            non_monotone_case = c;
        }

        double peak = 0.0;
        for (double v : fixed.v) peak = std::max(peak, v);
        double err = 0.0;
        int count = 0;
        for (std::size_t i = 0; i < fixed.v.size(); ++i) {
            if (fixed.v[i] < 0.1 * peak) continue;
            err += std::hypot(res.theta.dx[i] - dx, res.theta.dy[i] - dy);
            ++count;
        }
        err /= count;
        worst_case = std::max(worst_case, err);
        total += err;
    }
    const double mean = total / 20.0;
    const bool ok = mean < 0.5 && monotone;
    std::string d = fmt("mean endpoint error %.3f px (tol < 0.5), worst case %.3f px, SSD monotone on every iteration: %s", mean,
                        worst_case, monotone ? "yes" : "no");
    if (!monotone) d += fmt(" (case %d)", non_monotone_case);
    return {ok, d};
}

// ----------------------------------------------------------- phantom studies

struct Study {
    Phantom phantom;
    std::map<int, std::shared_ptr<const SamplingPattern>> masks;
    std::map<int, KSpaceData> data;
    std::map<int, DynamicDataset> init;  // cached spatial-TV initial guess per ray count

    explicit Study(const PhantomConfig &pc) : phantom(generate(pc)) {}

    const KSpaceData &kspace(int rays) {
        if (!data.count(rays)) {
            GoldenAngleParams gp;
            gp.nx = phantom.truth.nx();
            gp.ny = phantom.truth.ny();
            gp.nt = phantom.truth.nt();
            gp.rays_per_frame = rays;
            masks[rays] = std::make_shared<const SamplingPattern>(golden_angle_mask(gp));
            data.emplace(rays, forward(phantom.truth, masks[rays]));
        }
        return data.at(rays);
    }

    // SpatialTV init computed once and handed to the solver as Provided; the
    // solver would compute the identical array itself.
    ReconConfig config(int rays, PriorTag prior, double lambda, bool cs) {
        ReconConfig rc;
        rc.prior.tag = prior;
        rc.lambda = lambda;
        rc.cs_baseline = cs;
        if (!init.count(rays)) init.emplace(rays, initial_guess(kspace(rays), rc.init));
        rc.init.kind = InitKind::Provided;
        rc.init.provided = init.at(rays);
        return rc;
    }

    double ser(const DynamicDataset &f) const { return ser_roi(f, phantom.truth, phantom.roi); }
};

std::string prior_label(PriorTag p) { return prior_name(p); }

// 5-point lambda grids, shared by CS and DC-CS; each method picks its best point.
// The grid brackets the CS optimum of every prior at 16 rays.
const std::vector<double> kLambdaGrid = {1e-4, 3e-4, 1e-3, 3e-3, 1e-2};

// Fixed lambda used by the continuation, initialisation and motion-free studies.
constexpr double kStudyLambda = 1e-3;

Outcome trend(Study &st) {
    const auto t0 = Clock::now();
    bool ok = true;
    double min_gain = INFINITY;
    std::string detail;
    for (int rays : {24, 20, 16, 12}) {
        for (PriorTag p : {PriorTag::TemporalFourierL1, PriorTag::TemporalTV, PriorTag::NuclearNorm}) {
            double best[2] = {-INFINITY, -INFINITY};
            double best_l[2] = {0.0, 0.0};
            for (int cs = 0; cs < 2; ++cs) {
                for (double l : kLambdaGrid) {
                    const auto r = dccs_reconstruct(st.kspace(rays), st.config(rays, p, l, cs == 1));
                    const double s = st.ser(r.f);
                    std::printf("    rays %2d %-4s %-5s lambda %-6g SER_ROI %.2f dB\n", rays, prior_label(p).c_str(),
                                cs ? "CS" : "DC-CS", l, s);
                    std::fflush(stdout);
                    if (s > best[cs]) {
                        best[cs] = s;
                        best_l[cs] = l;
                    }
                }
            }
            const double gain = best[0] - best[1];
            min_gain = std::min(min_gain, gain);
            if (!(gain >= 1.0)) ok = false;
            std::printf("  rays %2d %-4s: DC-CS %.2f dB (lambda %g)  CS %.2f dB (lambda %g)  gain %+.2f dB\n", rays,
                        prior_label(p).c_str(), best[0], best_l[0], best[1], best_l[1], gain);
            std::fflush(stdout);
        }
    }
    detail = fmt("smallest DC-CS minus CS gain over 4 ray counts x 3 priors %+.2f dB (need >= +1.00), %.0f s", min_gain,
                 seconds_since(t0));
    return {ok, detail};
}

// Cumulative CG iterations at the first inner record whose cost is within `level`.
std::optional<int> cg_to_reach(const ReconLog &log, double level) {
    int acc = 0;
    for (const auto &r : log.inner) {
        acc += r.cg_iters;
        if (r.cost <= level) return acc;
    }
    return std::nullopt;
}

Outcome continuation(Study &st) {
    const auto t0 = Clock::now();
    const int rays = 16;
    const auto &b = st.kspace(rays);
    const auto base = st.config(rays, PriorTag::TemporalTV, kStudyLambda, false);
    const double beta0 = 1.0 / max_coefficient(*base.init.provided, base.prior);

    struct Run {
        std::string name;
        ReconConfig cfg;
        ReconResult res;
    };
    std::vector<Run> runs;
    runs.push_back({"full", base, {}});
    {
        auto c = base;
        c.continue_beta = false;
        runs.push_back({"fixed low beta", c, {}});
    }
    {
        auto c = base;
        c.continue_beta = false;
        c.beta0 = beta0 * std::pow(base.beta_factor, base.max_outer - 1);
        runs.push_back({"fixed high beta", c, {}});
    }
    {
        auto c = base;
        c.continue_alpha = false;
        runs.push_back({"fixed alpha", c, {}});
    }
    for (auto &r : runs) {
        r.res = dccs_reconstruct(b, r.cfg);
        std::printf("  %-16s final cost %.5g  SER_ROI %.2f dB  CG iterations %d\n", r.name.c_str(), r.res.log.inner.back().cost,
                    st.ser(r.res.f), r.res.log.total_cg_iters());
        std::fflush(stdout);
    }
    const double full_cost = runs[0].res.log.inner.back().cost;
    bool ok = true;
    double worst_ratio = 0.0;
    for (std::size_t i = 1; i < runs.size(); ++i) {
        const double ratio = full_cost / runs[i].res.log.inner.back().cost;
        worst_ratio = std::max(worst_ratio, ratio);
        if (!(ratio <= 1.01)) ok = false;
    }
    const auto &high = runs[2].res.log;
    const double plateau = high.inner.back().cost * 1.01;
    const auto high_iters = cg_to_reach(high, plateau);
    const auto full_iters = cg_to_reach(runs[0].res.log, plateau);
    double iter_ratio = 0.0;
    if (high_iters && full_iters && *full_iters > 0) iter_ratio = static_cast<double>(*high_iters) / *full_iters;
    if (!(iter_ratio >= 2.0)) ok = false;
    const double wall = seconds_since(t0);
    if (wall > 20 * 60) ok = false;
    return {ok, fmt("full cost / best ablation cost max %.4f (need <= 1.01); CG iterations to the fixed-high-beta plateau: high %d, "
                    "full %s, ratio %.2f (need >= 2); %.0f s",
                    worst_ratio, high_iters.value_or(-1), full_iters ? std::to_string(*full_iters).c_str() : "never", iter_ratio, wall)};
}

Outcome init_robustness(Study &st) {
    const auto t0 = Clock::now();
    const int rays = 16;
    const auto &b = st.kspace(rays);
    std::vector<std::pair<std::string, double>> sers;
    for (InitKind k : {InitKind::ZeroFilled, InitKind::SpatialTV, InitKind::Provided}) {
        auto c = st.config(rays, PriorTag::TemporalTV, kStudyLambda, false);
        c.init = InitSpec{};
        c.init.kind = k;
        if (k == InitKind::Provided) c.init.provided = st.phantom.truth;
        const auto r = dccs_reconstruct(b, c);
        const char *name = k == InitKind::ZeroFilled ? "zero-filled" : k == InitKind::SpatialTV ? "spatial TV" : "truth";
        sers.emplace_back(name, st.ser(r.f));
        std::printf("  init %-12s SER_ROI %.2f dB\n", name, sers.back().second);
        std::fflush(stdout);
    }
    double lo = INFINITY, hi = -INFINITY;
    for (const auto &[n, s] : sers) {
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
    const double wall = seconds_since(t0);
    return {hi - lo <= 0.5 && wall <= 20 * 60,
            fmt("SER_ROI spread across zero-filled / spatial TV / truth inits %.2f dB (tol 0.5), %.0f s", hi - lo, wall)};
}

Outcome motion_free() {
    const auto t0 = Clock::now();
    PhantomConfig pc;
    pc.motion = MotionKind::None;
    Study st(pc);
    const int rays = 16;
    const auto dc = dccs_reconstruct(st.kspace(rays), st.config(rays, PriorTag::TemporalTV, kStudyLambda, false));
    const auto cs = dccs_reconstruct(st.kspace(rays), st.config(rays, PriorTag::TemporalTV, kStudyLambda, true));
    const double a = st.ser(dc.f), b = st.ser(cs.f);
    const double wall = seconds_since(t0);
    return {std::abs(a - b) <= 0.3 && wall <= 10 * 60,
            fmt("DC-CS %.2f dB vs CS %.2f dB, difference %.2f dB (tol 0.3), %.0f s", a, b, a - b, wall)};
}

// ---------------------------------------------------------------- criterion 9

int run_cli(const std::string &args, const fs::path &log) {
    const std::string cmd = std::string("\"") + DCCS_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    return std::system(cmd.c_str());
}

std::map<std::string, std::string> manifest_hashes(const fs::path &dir) {
    std::ifstream in(dir / "manifest.json");
    const auto j = nlohmann::json::parse(in);
    std::map<std::string, std::string> out;
    for (const auto &e : j.at("files")) {
        if (e.value("contains_timing", false)) continue;
        out[e.at("name").get<std::string>()] = e.at("sha256").get<std::string>();
    }
    return out;
}

Outcome determinism() {
    const fs::path root = fs::temp_directory_path() / ("dccs_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(root);
    fs::create_directories(root);
    std::ofstream(root / "sim.json") << R"({"sampling": {"rays_per_frame": 16}})";
    std::ofstream(root / "recon.json") << R"({"prior": "ttv", "lambda": 0.001})";
    std::vector<std::map<std::string, std::string>> hashes;
    for (int run = 0; run < 2; ++run) {
        const fs::path d = root / ("run" + std::to_string(run));
        const fs::path sim = d / "sim", rec = d / "rec";
        const auto quoted = [](const fs::path &p) { return "\"" + p.string() + "\""; };
        if (run_cli("simulate --config " + quoted(root / "sim.json") + " --seed 11 --out \"" + sim.string() + "\"", d.string() + ".sim.log") != 0 ||
            run_cli("reconstruct \"" + (sim / "kspace.dck").string() + "\" --config " + quoted(root / "recon.json") + " --out \"" + rec.string() + "\"",
                    d.string() + ".rec.log") != 0) {
            return {false, fmt("pipeline run %d failed, logs under %s", run, root.string().c_str())};
        }
        std::map<std::string, std::string> h;
        for (const auto &[k, v] : manifest_hashes(sim)) h["sim/" + k] = v;
        for (const auto &[k, v] : manifest_hashes(rec)) h["rec/" + k] = v;
        hashes.push_back(std::move(h));
    }
    std::vector<std::string> differ;
    for (const auto &[k, v] : hashes[0]) {
        auto it = hashes[1].find(k);
        if (it == hashes[1].end() || it->second != v) differ.push_back(k);
    }
    const bool ok = differ.empty() && hashes[0].size() == hashes[1].size() && !hashes[0].empty();
    std::string d = fmt("%zu hashed outputs compared across two simulate+reconstruct runs, %zu differ", hashes[0].size(), differ.size());
    for (const auto &k : differ) d += " " + k;
    if (ok) fs::remove_all(root);
    return {ok, d};
}

} // namespace

int main(int argc, char **argv) {
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
    const auto want = [&](int c) { return wanted.empty() || wanted.count(c) > 0; };

    std::unique_ptr<Study> moving;
    const auto study = [&]() -> Study & {
        if (!moving) moving = std::make_unique<Study>(PhantomConfig{});
        return *moving;
    };

    struct Criterion {
        int id;
        const char *name;
        double limit_s;  // <= 0: not timed
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> all = {
        {1, "proximal operators vs oracles", 60, prox_oracles},
        {2, "adjoint identities", 60, adjoint_suite},
        {3, "CG vs dense solve", 60, cg_dense},
        {4, "translation recovery", 120, registration_recovery},
        {5, "DC-CS beats CS by 1 dB", 0, [&] { return trend(study()); }},
        {6, "continuation schedule", 0, [&] { return continuation(study()); }},
        {7, "initialisation robustness", 0, [&] { return init_robustness(study()); }},
        {8, "motion-free sanity", 0, motion_free},
        {9, "determinism", 0, determinism},
    };

    int failed = 0;
    for (const auto &c : all) {
        if (!want(c.id)) continue;
        std::printf("-- criterion %d: %s\n", c.id, c.name);
        std::fflush(stdout);
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception &e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double wall = seconds_since(t0);
        if (c.limit_s > 0 && wall > c.limit_s) {
            o.pass = false;
            o.detail += fmt(" [took %.1f s, limit %.0f s]", wall, c.limit_s);
        } else if (c.limit_s > 0) {
            o.detail += fmt(" [%.1f s]", wall);
        }
        if (!o.pass) ++failed;
        std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
