#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>

#include "dccs/config.hpp"
#include "dccs/encoding.hpp"
#include "dccs/hash.hpp"
#include "dccs/io.hpp"
#include "dccs/metrics.hpp"
#include "dccs/phantom.hpp"
#include "dccs/png.hpp"
#include "dccs/registration.hpp"
#include "dccs/solver.hpp"

namespace fs = std::filesystem;
using dccs::config::json;

namespace {

constexpr int kExitError = 1;
constexpr int kExitNonFinite = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void set_threads(int n) {
    if (n <= 0) {
        if (const char *env = std::getenv("DCCS_THREADS")) n = std::atoi(env);
    }
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#endif
}

// Output directory guard: refuses to replace existing outputs unless forced.
class OutDir {
public:
    OutDir(fs::path dir, bool force) : dir_(std::move(dir)), force_(force) {}

    void claim(const std::vector<std::string> &names) const {
        fs::create_directories(dir_);
        for (const auto &n : names) {
            if (fs::exists(dir_ / n) && !force_) {
                throw UsageError("refusing to overwrite " + (dir_ / n).string() + " (pass --force)");
            }
        }
    }

    fs::path operator/(const std::string &name) const { return dir_ / name; }
    const fs::path &path() const { return dir_; }

private:
    fs::path dir_;
    bool force_;
};

void write_text(const fs::path &p, const std::string &text) {
    std::ofstream os(p, std::ios::binary | std::ios::trunc);
    if (!os) throw dccs::FormatError("cannot open " + p.string() + " for writing");
    os << text;
}

std::string read_text(const fs::path &p) {
    std::ifstream is(p, std::ios::binary);
    if (!is) throw dccs::FormatError("cannot open " + p.string());
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

// Hashes every listed file. Files carrying wall-clock times are flagged so
// reproducibility checks can skip them.
json write_manifest(const OutDir &out, const std::string &command, const std::vector<std::string> &files,
                    const std::vector<std::string> &timed) {
    json entries = json::array();
    for (const auto &f : files) {
        entries.push_back({{"name", f},
                           {"sha256", dccs::sha256_file(out / f)},
                           {"bytes", fs::file_size(out / f)},
                           {"contains_timing", std::find(timed.begin(), timed.end(), f) != timed.end()}});
    }
    json m{{"command", command}, {"files", entries}};
    write_text(out / "manifest.json", m.dump(2) + "\n");
    return m;
}

json roi_json(const dccs::Roi &r) { return json{{"x0", r.x0}, {"y0", r.y0}, {"width", r.width}, {"height", r.height}}; }

dccs::Roi roi_from(const json &j) {
    const json &r = j.contains("roi") ? j.at("roi") : j;
    return dccs::Roi{r.at("x0").get<int>(), r.at("y0").get<int>(), r.at("width").get<int>(), r.at("height").get<int>()};
}

std::string prior_alias(const std::string &name) {
    if (name == "nuclear") return "nuc";
    if (name == "fourier") return "tfl1";
    if (name == "tv") return "ttv";
    return name;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
    std::string config;
    std::string out;
    std::optional<int> rays;
    std::optional<std::uint64_t> seed;
    bool force = false;
};

int cmd_simulate(const SimulateArgs &a) {
    auto cfg = dccs::config::parse_simulate(a.config.empty() ? json::object() : dccs::config::load_file(a.config));
    if (a.rays) {
        if (*a.rays < 0) throw dccs::InvalidConfig("--rays must be >= 0");
        cfg.sampling.rays_per_frame = *a.rays;
    }
    if (a.seed) {
        cfg.phantom.noise_seed = *a.seed;
        cfg.noise_seed = *a.seed;
    }

    const std::vector<std::string> files = {"truth.dcd", "theta_true.dcf", "mask.dcm", "kspace.dck", "roi.json",
                                            "resolved_config.json"};
    const OutDir out(a.out, a.force);
    out.claim(files);
    out.claim({"manifest.json"});

    const auto ph = dccs::generate(cfg.phantom);
    const auto pattern = std::make_shared<const dccs::SamplingPattern>(dccs::golden_angle_mask(cfg.sampling));
    auto b = dccs::forward(ph.truth, pattern);
    if (cfg.noise_sigma > 0.0) b = dccs::add_noise(b, cfg.noise_sigma, cfg.noise_seed);

    dccs::io::save(out / "truth.dcd", ph.truth);
    dccs::io::save(out / "theta_true.dcf", ph.true_theta);
    dccs::io::save(out / "mask.dcm", *pattern);
    dccs::io::save(out / "kspace.dck", b);

    json regions = json::array();
    for (const char *n : {"background", "torso", "lung", "spine", "right_ventricle", "left_ventricle", "myocardium"})
        regions.push_back(n);
    json sidecar{{"roi", roi_json(ph.roi)},
                 {"nx", cfg.phantom.nx},
                 {"ny", cfg.phantom.ny},
                 {"regions", regions},
                 {"labels", ph.labels}};
    write_text(out / "roi.json", sidecar.dump() + "\n");
    write_text(out / "resolved_config.json", dccs::config::to_json(cfg).dump(2) + "\n");

    std::cout << write_manifest(out, "simulate", files, {}).dump(2) << "\n";
    return 0;
}

// ---------------------------------------------------------------- reconstruct

struct ReconstructArgs {
    std::string kspace;
    std::string config;
    std::string out;
    std::optional<std::string> prior;
    std::optional<double> lambda;
    bool cs_baseline = false;
    bool force = false;
};

int cmd_reconstruct(const ReconstructArgs &a) {
    auto settings = dccs::config::parse_recon(a.config.empty() ? json::object() : dccs::config::load_file(a.config));
    auto &cfg = settings.recon;
    if (a.prior) cfg.prior.tag = dccs::parse_prior(prior_alias(*a.prior));
    if (a.lambda) cfg.lambda = *a.lambda;
    if (a.cs_baseline) cfg.cs_baseline = true;

    const std::vector<std::string> files = {"f.dcd", "theta.dcf", "g.dcd", "log.csv", "run.json", "resolved_config.json"};
    const OutDir out(a.out, a.force);
    out.claim(files);
    out.claim({"manifest.json"});

    const auto b = dccs::io::load_kspace(a.kspace);
    if (cfg.init.kind == dccs::InitKind::Provided) {
        fs::path p = *settings.init_path;
        if (p.is_relative() && !a.config.empty()) p = fs::path(a.config).parent_path() / p;
        cfg.init.provided = dccs::io::load_dataset(p);
    }
    cfg.validate();

    const auto t0 = std::chrono::steady_clock::now();
    const auto res = dccs::dccs_reconstruct(b, cfg);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    dccs::io::save(out / "f.dcd", res.f);
    dccs::io::save(out / "theta.dcf", res.theta);
    dccs::io::save(out / "g.dcd", res.g);
    {
        std::ostringstream os;
        res.log.write_csv(os);
        write_text(out / "log.csv", os.str());
    }
    const auto &last = res.log.inner.back();
    json run{{"method", cfg.cs_baseline ? "cs" : "dccs"},
             {"prior", dccs::prior_name(cfg.prior.tag)},
             {"lambda", cfg.lambda},
             {"rays_per_frame", b.pattern->params().rays_per_frame},
             {"outer_iters", res.log.outer.size()},
             {"inner_iters", res.log.inner.size()},
             {"cg_iters", res.log.total_cg_iters()},
             {"final_cost", last.cost},
             {"wall_s", wall}};
    write_text(out / "run.json", run.dump(2) + "\n");
    write_text(out / "resolved_config.json", dccs::config::to_json(settings).dump(2) + "\n");

    std::cout << write_manifest(out, "reconstruct", files, {"log.csv", "run.json"}).dump(2) << "\n";
    return 0;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
    std::string recon;
    std::string truth;
    std::string roi;
    std::string theta_est;
    std::string theta_true;
    std::string runs;
    std::string out;
    int frame = -1;
    int line = -1;
    double error_scale = 5.0;
    bool force = false;
};

struct Window {
    double lo = 0.0;
    double hi = 1.0;
};

// 1st to 99th percentile of the truth magnitudes.
Window display_window(const dccs::DynamicDataset &truth) {
    auto mag = dccs::magnitude(truth.values());
    const auto pick = [&](double q) {
        const auto k = static_cast<std::size_t>(std::floor(q * static_cast<double>(mag.size() - 1)));
        std::nth_element(mag.begin(), mag.begin() + static_cast<std::ptrdiff_t>(k), mag.end());
        return mag[k];
    };
    Window w{pick(0.01), pick(0.99)};
    if (!(w.hi > w.lo)) w.hi = w.lo + 1.0;
    return w;
}

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); }

std::vector<std::uint8_t> frame_png(const dccs::DynamicDataset &d, int t, const Window &w) {
    std::vector<std::uint8_t> px;
    for (const auto &z : d.frame(t)) px.push_back(to_byte((std::abs(z) - w.lo) / (w.hi - w.lo)));
    return px;
}

// scale * | |recon| - |truth| |, relative to the display range, clipped.
std::vector<std::uint8_t> error_png(const dccs::DynamicDataset &recon, const dccs::DynamicDataset &truth, int t,
                                    const Window &w, double scale) {
    std::vector<std::uint8_t> px;
    const auto r = recon.frame(t), g = truth.frame(t);
    for (std::size_t i = 0; i < r.size(); ++i) px.push_back(to_byte(scale * std::abs(std::abs(r[i]) - std::abs(g[i])) / (w.hi - w.lo)));
    return px;
}

// Rows are frames, columns the pixels of image row `y`.
std::vector<std::uint8_t> xt_png(const dccs::DynamicDataset &d, int y, const Window &w) {
    std::vector<std::uint8_t> px;
    for (int t = 0; t < d.nt(); ++t)
        for (int x = 0; x < d.nx(); ++x) px.push_back(to_byte((std::abs(d.at(x, y, t)) - w.lo) / (w.hi - w.lo)));
    return px;
}

// theta_true.dcf holds the motion applied to the anatomy; a reconstruction's
// field undoes that motion, so estimates are scored against its negation.
dccs::DeformationField load_correction(const std::string &path) {
    auto th = dccs::io::load_field(path);
    for (auto &v : th.dx()) v = -v;
    for (auto &v : th.dy()) v = -v;
    return th;
}

std::vector<std::uint8_t> roi_mask(const dccs::Roi &roi, int nx, int ny) {
    std::vector<std::uint8_t> m(static_cast<std::size_t>(nx) * ny, 0);
    for (int y = roi.y0; y < roi.y0 + roi.height; ++y)
        for (int x = roi.x0; x < roi.x0 + roi.width; ++x) m[static_cast<std::size_t>(y) * nx + x] = 1;
    return m;
}

struct MetricsRow {
    std::string method = "unknown";
    std::string prior = "";
    int rays = -1;
    double lambda = std::nan("");
    double ser = 0.0;
    double hfser = 0.0;
    std::optional<double> reg_error;
    double wall_s = std::nan("");
};

void read_run_info(const fs::path &dir, MetricsRow &row) {
    const auto p = dir / "run.json";
    if (!fs::exists(p)) return;
    const auto j = json::parse(read_text(p));
    row.method = j.value("method", row.method);
    row.prior = j.value("prior", row.prior);
    row.rays = j.value("rays_per_frame", row.rays);
    row.lambda = j.value("lambda", row.lambda);
    row.wall_s = j.value("wall_s", row.wall_s);
}

std::string fmt(double v) {
    if (std::isnan(v)) return "";
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}

const char *kMetricsHeader = "method,prior,rays_per_frame,lambda,SER_ROI_dB,HFSER_ROI_dB,reg_error_px,wall_s\n";

std::string csv_row(const MetricsRow &r) {
    std::ostringstream os;
    os << r.method << ',' << r.prior << ',' << (r.rays >= 0 ? std::to_string(r.rays) : "") << ',' << fmt(r.lambda) << ','
       << fmt(dccs::csv_db(r.ser)) << ',' << fmt(dccs::csv_db(r.hfser)) << ','
       << (r.reg_error ? fmt(*r.reg_error) : "") << ',' << fmt(r.wall_s) << '\n';
    return os.str();
}

// Small line plot of SER against rays per frame, one grey level per series.
std::vector<std::uint8_t> curve_png(const std::map<std::string, std::vector<std::pair<int, double>>> &series, int w, int h) {
    std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h, 255);
    int rmin = 1 << 30, rmax = -1;
    double smin = 1e300, smax = -1e300;
    for (const auto &[k, pts] : series)
        for (const auto &[r, s] : pts) {
            rmin = std::min(rmin, r);
            rmax = std::max(rmax, r);
            smin = std::min(smin, s);
            smax = std::max(smax, s);
        }
    if (rmax < 0) return px;
    if (rmax == rmin) ++rmax;
    if (!(smax > smin)) smax = smin + 1.0;
    const int m = 10;
    const auto xpos = [&](int r) { return m + (w - 2 * m - 1) * (r - rmin) / (rmax - rmin); };
    const auto ypos = [&](double s) { return h - m - 1 - static_cast<int>(std::lround((h - 2 * m - 1) * (s - smin) / (smax - smin))); };
    const auto put = [&](int x, int y, std::uint8_t v) {
        if (x >= 0 && x < w && y >= 0 && y < h) px[static_cast<std::size_t>(y) * w + x] = v;
    };
    for (int x = m; x < w - m; ++x) put(x, h - m, 128);
    for (int y = m; y < h - m; ++y) put(m - 1, y, 128);
    std::size_t idx = 0;
    for (const auto &[k, pts] : series) {
        const auto shade = static_cast<std::uint8_t>(std::min<std::size_t>(40 * idx++, 160));
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const int x1 = xpos(pts[i].first), y1 = ypos(pts[i].second);
            for (int dy = -2; dy <= 2; ++dy)
                for (int dx = -2; dx <= 2; ++dx) put(x1 + dx, y1 + dy, shade);
            if (i == 0) continue;
            const int x0 = xpos(pts[i - 1].first), y0 = ypos(pts[i - 1].second);
            const int steps = std::max({std::abs(x1 - x0), std::abs(y1 - y0), 1});
            for (int s = 0; s <= steps; ++s) put(x0 + (x1 - x0) * s / steps, y0 + (y1 - y0) * s / steps, shade);
        }
    }
    return px;
}

int evaluate_runs(const EvaluateArgs &a, const dccs::DynamicDataset &truth, const dccs::Roi &roi, const OutDir &out) {
    out.claim({"curve.csv", "curve.png"});
    std::vector<MetricsRow> rows;
    std::vector<fs::path> dirs;
    for (const auto &e : fs::directory_iterator(a.runs))
        if (e.is_directory() && fs::exists(e.path() / "f.dcd")) dirs.push_back(e.path());
    std::sort(dirs.begin(), dirs.end());
    if (dirs.empty()) throw UsageError("no run directories with f.dcd under " + a.runs);

    std::vector<std::uint8_t> mask;
    std::optional<dccs::DeformationField> theta_true;
    if (!a.theta_true.empty()) {
        theta_true = load_correction(a.theta_true);
        mask = roi_mask(roi, truth.nx(), truth.ny());
    }
    for (const auto &d : dirs) {
        MetricsRow row;
        read_run_info(d, row);
        const auto f = dccs::io::load_dataset(d / "f.dcd");
        dccs::require_same_shape(f.shape(), truth.shape(), d.string().c_str());
        row.ser = dccs::ser_roi(f, truth, roi);
        row.hfser = dccs::hfser_roi(f, truth, roi);
        if (theta_true && fs::exists(d / "theta.dcf"))
            row.reg_error = dccs::registration_error(dccs::io::load_field(d / "theta.dcf"), *theta_true, mask);
        rows.push_back(row);
    }
    std::stable_sort(rows.begin(), rows.end(), [](const MetricsRow &x, const MetricsRow &y) {
        return std::tie(x.method, x.prior, x.rays) < std::tie(y.method, y.prior, y.rays);
    });

    std::string csv = kMetricsHeader;
    std::map<std::string, std::vector<std::pair<int, double>>> series;
    for (const auto &r : rows) {
        csv += csv_row(r);
        series[r.method + "/" + r.prior].push_back({r.rays, dccs::csv_db(r.ser)});
    }
    write_text(out / "curve.csv", csv);
    dccs::write_png_gray(out / "curve.png", 320, 200, curve_png(series, 320, 200));
    std::cout << csv;
    return 0;
}

int cmd_evaluate(const EvaluateArgs &a) {
    const OutDir out(a.out, a.force);
    const auto truth = dccs::io::load_dataset(a.truth);
    const auto roi = roi_from(json::parse(read_text(a.roi)));
    if (!roi.inside(truth.shape())) throw dccs::RoiOutOfBounds("ROI does not fit the truth grid");

    if (!a.runs.empty()) return evaluate_runs(a, truth, roi, out);
    if (a.recon.empty()) throw UsageError("evaluate needs --recon or --runs");

    const std::vector<std::string> files = {"metrics.csv", "frame.png", "xt.png", "error.png", "truth_frame.png"};
    out.claim(files);

    const auto recon = dccs::io::load_dataset(a.recon);
    dccs::require_same_shape(recon.shape(), truth.shape(), "evaluate");

    MetricsRow row;
    read_run_info(fs::path(a.recon).parent_path(), row);
    row.ser = dccs::ser_roi(recon, truth, roi);
    row.hfser = dccs::hfser_roi(recon, truth, roi);
    if (!a.theta_est.empty() && !a.theta_true.empty()) {
        row.reg_error = dccs::registration_error(dccs::io::load_field(a.theta_est), load_correction(a.theta_true),
                                                 roi_mask(roi, truth.nx(), truth.ny()));
    }
    const std::string csv = std::string(kMetricsHeader) + csv_row(row);
    write_text(out / "metrics.csv", csv);

    const int t = a.frame >= 0 ? std::min(a.frame, truth.nt() - 1) : truth.nt() / 2;
    const int y = a.line >= 0 ? std::min(a.line, truth.ny() - 1) : roi.y0 + roi.height / 2;
    const Window w = display_window(truth);
    dccs::write_png_gray(out / "frame.png", truth.nx(), truth.ny(), frame_png(recon, t, w));
    dccs::write_png_gray(out / "truth_frame.png", truth.nx(), truth.ny(), frame_png(truth, t, w));
    dccs::write_png_gray(out / "error.png", truth.nx(), truth.ny(), error_png(recon, truth, t, w, a.error_scale));
    dccs::write_png_gray(out / "xt.png", truth.nx(), truth.nt(), xt_png(recon, y, w));
    std::cout << csv;
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Deformation-corrected compressed sensing for dynamic MRI"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "worker threads (also DCCS_THREADS)");

    SimulateArgs sim;
    auto *s = app.add_subcommand("simulate", "generate a phantom and its undersampled k-space");
    s->add_option("--config", sim.config, "simulation JSON")->check(CLI::ExistingFile);
    s->add_option("--out", sim.out, "output directory")->required();
    s->add_option("--rays", sim.rays, "rays per frame");
    s->add_option("--seed", sim.seed, "phantom and noise seed");
    s->add_flag("--force", sim.force, "overwrite existing outputs");
    s->add_option("--threads", threads, "worker threads");

    ReconstructArgs rec;
    auto *r = app.add_subcommand("reconstruct", "reconstruct an image series from k-space");
    r->add_option("kspace", rec.kspace, "k-space file (DCCSKSP1)")->required()->check(CLI::ExistingFile);
    r->add_option("--config", rec.config, "reconstruction JSON")->check(CLI::ExistingFile);
    r->add_option("--out", rec.out, "output directory")->required();
    r->add_option("--prior", rec.prior, "tfl1, ttv or nuc");
    r->add_option("--lambda", rec.lambda, "regularisation weight");
    r->add_flag("--cs-baseline", rec.cs_baseline, "skip registration (classical CS)");
    r->add_flag("--force", rec.force, "overwrite existing outputs");
    r->add_option("--threads", threads, "worker threads");

    EvaluateArgs ev;
    auto *e = app.add_subcommand("evaluate", "score reconstructions against the truth");
    e->add_option("--recon", ev.recon, "reconstructed series (DCCSDAT1)")->check(CLI::ExistingFile);
    e->add_option("--truth", ev.truth, "ground truth series")->required()->check(CLI::ExistingFile);
    e->add_option("--roi", ev.roi, "ROI JSON (roi.json from simulate)")->required()->check(CLI::ExistingFile);
    e->add_option("--theta-est", ev.theta_est, "estimated deformation")->check(CLI::ExistingFile);
    e->add_option("--theta-true", ev.theta_true, "true deformation")->check(CLI::ExistingFile);
    e->add_option("--runs", ev.runs, "directory of reconstruct outputs, one per subdirectory")->check(CLI::ExistingDirectory);
    e->add_option("--out", ev.out, "output directory")->required();
    e->add_option("--frame", ev.frame, "frame shown in the PNGs (default: middle)");
    e->add_option("--line", ev.line, "image row used for the x-t profile (default: ROI centre)");
    e->add_option("--error-scale", ev.error_scale, "error map gain")->check(CLI::PositiveNumber);
    e->add_flag("--force", ev.force, "overwrite existing outputs");
    e->add_option("--threads", threads, "worker threads");

    CLI11_PARSE(app, argc, argv);
    set_threads(threads);

    try {
        if (s->parsed()) return cmd_simulate(sim);
        if (r->parsed()) return cmd_reconstruct(rec);
        if (e->parsed()) return cmd_evaluate(ev);
    } catch (const dccs::NonFiniteIterate &ex) {
        std::cerr << "dccs: non-finite iterate: " << ex.what() << "\n";
        return kExitNonFinite;
    } catch (const std::exception &ex) {
        std::cerr << "dccs: " << ex.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
