#include "dccs/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace dccs::config {
namespace {

// Reads typed fields from one JSON object, remembering which keys were consumed.
class Fields {
public:
    Fields(const json &j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw InvalidConfig(path_ + ": expected an object");
    }

    template <class T>
    void get(const char *key, T &out) {
        seen_.insert(key);
        if (!j_.contains(key) || j_.at(key).is_null()) return;
        const json &v = j_.at(key);
        check_type<T>(v, key);
        out = v.get<T>();
    }

    template <class T>
    void get_optional(const char *key, std::optional<T> &out) {
        seen_.insert(key);
        if (!j_.contains(key) || j_.at(key).is_null()) return;
        T v{};
        get(key, v);
        out = v;
    }

    std::optional<Fields> object(const char *key) {
        seen_.insert(key);
        if (!j_.contains(key) || j_.at(key).is_null()) return std::nullopt;
        return Fields(j_.at(key), path_ + "/" + key);
    }

    void finish() const {
        for (const auto &[k, v] : j_.items()) {
            if (!seen_.count(k)) throw InvalidConfig(path_ + "/" + k + ": unknown key");
        }
    }

private:
    template <class T>
    void check_type(const json &v, const char *key) const {
        const std::string where = path_ + "/" + key;
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) throw InvalidConfig(where + ": expected a boolean");
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) throw InvalidConfig(where + ": expected an integer");
            if constexpr (std::is_unsigned_v<T>) {
                if (v.is_number_integer() && !v.is_number_unsigned()) throw InvalidConfig(where + ": expected a non-negative integer");
            }
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) throw InvalidConfig(where + ": expected a number");
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) throw InvalidConfig(where + ": expected a string");
        }
    }

    const json &j_;
    std::string path_;
    std::set<std::string> seen_;
};

const char *init_name(InitKind k) {
    switch (k) {
    case InitKind::ZeroFilled: return "zero_filled";
    case InitKind::SpatialTV: return "spatial_tv";
    case InitKind::Provided: return "provided";
    }
    return "?";
}

InitKind parse_init(const std::string &s) {
    if (s == "zero_filled") return InitKind::ZeroFilled;
    if (s == "spatial_tv") return InitKind::SpatialTV;
    if (s == "provided") return InitKind::Provided;
    throw InvalidConfig("/init/kind: unknown initialisation '" + s + "' (expected zero_filled, spatial_tv or provided)");
}

} // namespace

json parse_text(const std::string &text, const std::string &source) {
    try {
        return json::parse(text);
    } catch (const json::parse_error &e) {
        std::size_t line = 1, col = 1;
        const std::size_t stop = std::min(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < stop; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        std::ostringstream msg;
        msg << source << ":" << line << ":" << col << ": " << e.what();
        throw InvalidConfig(msg.str());
    }
}

json load_file(const std::string &path) {
    std::ifstream is(path);
    if (!is) throw InvalidConfig("cannot open config " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_text(ss.str(), path);
}

SimulateConfig parse_simulate(const json &j) {
    SimulateConfig c;
    Fields root(j, "");
    if (auto p = root.object("phantom")) {
        auto &ph = c.phantom;
        p->get("nx", ph.nx);
        p->get("ny", ph.ny);
        p->get("nt", ph.nt);
        p->get("pixel_spacing", ph.pixel_spacing);
        p->get("breathing_amplitude", ph.breathing_amplitude);
        p->get("breathing_period", ph.breathing_period);
        p->get("edge_width", ph.edge_width);
        p->get("seed", ph.noise_seed);
        std::string motion = motion_name(ph.motion);
        p->get("motion", motion);
        ph.motion = parse_motion(motion);
        if (auto b = p->object("bolus_arrival")) {
            b->get("rv", ph.bolus_arrival.rv);
            b->get("lv", ph.bolus_arrival.lv);
            b->get("myocardium", ph.bolus_arrival.myocardium);
            b->finish();
        }
        p->finish();
    }
    if (auto s = root.object("sampling")) {
        s->get("rays_per_frame", c.sampling.rays_per_frame);
        s->get("angle_increment", c.sampling.angle_increment);
        s->get("samples_per_ray", c.sampling.samples_per_ray);
        s->get("reset_per_frame", c.sampling.reset_per_frame);
        s->finish();
    }
    if (auto n = root.object("noise")) {
        n->get("sigma", c.noise_sigma);
        n->get("seed", c.noise_seed);
        n->finish();
    }
    root.finish();
    c.phantom.validate();
    c.sampling.nx = c.phantom.nx;
    c.sampling.ny = c.phantom.ny;
    c.sampling.nt = c.phantom.nt;
    if (c.sampling.samples_per_ray == 0) c.sampling.samples_per_ray = std::max(c.phantom.nx, c.phantom.ny);
    if (c.sampling.rays_per_frame < 0) throw InvalidConfig("/sampling/rays_per_frame: must be >= 0");
    if (!(c.noise_sigma >= 0.0)) throw InvalidConfig("/noise/sigma: must be >= 0");
    return c;
}

json to_json(const SimulateConfig &c) {
    const auto &ph = c.phantom;
    return json{{"phantom",
                 {{"nx", ph.nx},
                  {"ny", ph.ny},
                  {"nt", ph.nt},
                  {"pixel_spacing", ph.pixel_spacing},
                  {"breathing_amplitude", ph.breathing_amplitude},
                  {"breathing_period", ph.breathing_period},
                  {"edge_width", ph.edge_width},
                  {"seed", ph.noise_seed},
                  {"motion", motion_name(ph.motion)},
                  {"bolus_arrival",
                   {{"rv", ph.bolus_arrival.rv}, {"lv", ph.bolus_arrival.lv}, {"myocardium", ph.bolus_arrival.myocardium}}}}},
                {"sampling",
                 {{"rays_per_frame", c.sampling.rays_per_frame},
                  {"angle_increment", c.sampling.angle_increment},
                  {"samples_per_ray", c.sampling.samples_per_ray},
                  {"reset_per_frame", c.sampling.reset_per_frame}}},
                {"noise", {{"sigma", c.noise_sigma}, {"seed", c.noise_seed}}}};
}

ReconSettings parse_recon(const json &j) {
    ReconSettings s;
    auto &r = s.recon;
    Fields root(j, "");
    std::string prior = prior_name(r.prior.tag);
    root.get("prior", prior);
    r.prior.tag = parse_prior(prior);
    root.get("tv_inner_iters", r.prior.tv_inner_iters);
    root.get_optional("tv_inner_rho", r.prior.tv_inner_rho);
    root.get("lambda", r.lambda);
    root.get_optional("beta0", r.beta0);
    root.get("beta_factor", r.beta_factor);
    root.get("alpha0", r.alpha0);
    root.get("alpha_factor", r.alpha_factor);
    root.get("max_outer", r.max_outer);
    root.get("max_inner", r.max_inner);
    root.get("max_theta_loops", r.max_theta_loops);
    root.get("inner_cost_tol", r.inner_cost_tol);
    root.get("theta_tol", r.theta_tol);
    root.get("cg_tol", r.cg_tol);
    root.get("cg_max_iters", r.cg_max_iters);
    root.get("cs_baseline", r.cs_baseline);
    root.get("continue_beta", r.continue_beta);
    root.get("continue_alpha", r.continue_alpha);
    if (auto d = root.object("demons")) {
        d->get("sigma", r.demons.sigma);
        d->get("max_iters", r.demons.max_iters);
        d->get("stop_tol", r.demons.stop_tol);
        d->get("gain", r.demons.gain);
        d->finish();
    }
    if (auto i = root.object("init")) {
        std::string kind = init_name(r.init.kind);
        i->get("kind", kind);
        r.init.kind = parse_init(kind);
        i->get("lambda_s", r.init.lambda_s);
        std::optional<std::string> path;
        i->get_optional("path", path);
        s.init_path = path;
        i->finish();
    }
    root.finish();
    if (r.init.kind == InitKind::Provided && !s.init_path) throw InvalidConfig("/init/path: required for provided initialisation");
    return s;
}

json to_json(const ReconSettings &s) {
    const auto &r = s.recon;
    json init{{"kind", init_name(r.init.kind)}, {"lambda_s", r.init.lambda_s}};
    if (s.init_path) init["path"] = *s.init_path;
    return json{{"prior", prior_name(r.prior.tag)},
                {"tv_inner_iters", r.prior.tv_inner_iters},
                {"tv_inner_rho", r.prior.tv_inner_rho ? json(*r.prior.tv_inner_rho) : json(nullptr)},
                {"lambda", r.lambda},
                {"beta0", r.beta0 ? json(*r.beta0) : json(nullptr)},
                {"beta_factor", r.beta_factor},
                {"alpha0", r.alpha0},
                {"alpha_factor", r.alpha_factor},
                {"max_outer", r.max_outer},
                {"max_inner", r.max_inner},
                {"max_theta_loops", r.max_theta_loops},
                {"inner_cost_tol", r.inner_cost_tol},
                {"theta_tol", r.theta_tol},
                {"cg_tol", r.cg_tol},
                {"cg_max_iters", r.cg_max_iters},
                {"cs_baseline", r.cs_baseline},
                {"continue_beta", r.continue_beta},
                {"continue_alpha", r.continue_alpha},
                {"demons", {{"sigma", r.demons.sigma}, {"max_iters", r.demons.max_iters}, {"stop_tol", r.demons.stop_tol}, {"gain", r.demons.gain}}},
                {"init", init}};
}

} // namespace dccs::config
