#pragma once

#include <filesystem>
#include <string>

#include "densreg/model.hpp"
#include "densreg/sim.hpp"

namespace densreg {

/// Parses a JSON model description:
///
///   {"response": "y",
///    "domain": {"interval": [0, 1], "atoms": [{"at": 0, "weight": 1}], "quadrature": 1001},
///    "basis": {"functions": 12, "degree": 3, "penalty_order": 2},
///    "weights": "w",
///    "terms": [{"kind": "intercept"},
///              {"kind": "categorical", "factors": ["g"], "reference": {"g": "a"}},
///              {"kind": "smooth", "covariate": "x", "functions": 8, "xi_x": "auto", "xi_y": 0.1},
///              {"kind": "varying", "base": "linear", "covariate": "x", "factors": ["g"]}]}
///
/// Smoothing values are numbers or "auto" (grid search).
ModelSpec parse_model_config(const std::string& text);
ModelSpec read_model_config(const std::filesystem::path& path);
/// Canonical JSON text; parse_model_config(dump_model_config(s)) reproduces s.
std::string dump_model_config(const ModelSpec& spec);
/// 16 hex digits of the 64-bit FNV-1a hash of the canonical text.
std::string config_hash(const ModelSpec& spec);
std::string fnv1a_hex(const std::string& bytes);

/// Simulation scenario: {"model": {...}, "combos": {"g": ["a", "b"], "x": [0.1, 0.5]},
/// "theta": [...] or "random_theta": {"seed": 1, "scale": 0.5}, "observations", "bins",
/// "replications", "seed", "level", "smoothing": {"<term label>": {"xi_x": 0, "xi_y": 0}}}.
SimScenario parse_scenario(const std::string& text);
SimScenario read_scenario(const std::filesystem::path& path);

}  // namespace densreg
