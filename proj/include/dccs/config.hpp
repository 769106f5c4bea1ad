#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "dccs/phantom.hpp"
#include "dccs/solver.hpp"

// JSON configuration for the command-line front end. Every field has a default;
// unknown keys and type errors are reported with their JSON path.
namespace dccs::config {

using json = nlohmann::json;

struct SimulateConfig {
    PhantomConfig phantom{};
    GoldenAngleParams sampling{};  // nx/ny/nt follow the phantom
    double noise_sigma = 0.0;
    std::uint64_t noise_seed = 7;
};

struct ReconSettings {
    ReconConfig recon{};
    std::optional<std::string> init_path;  // init.kind == "provided"
};

// Parses text, reporting syntax errors as "<source>:<line>:<column>: <message>".
json parse_text(const std::string &text, const std::string &source);
json load_file(const std::string &path);

SimulateConfig parse_simulate(const json &j);
json to_json(const SimulateConfig &c);

ReconSettings parse_recon(const json &j);
json to_json(const ReconSettings &c);

} // namespace dccs::config
