#pragma once

#include "carlab/coefficients.hpp"
#include "carlab/weight.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace carlab {

// Bad configuration; the message starts with the offending key path.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PsiConfig {
    std::string kind = "quadratic";  // quadratic | linear
    Vec2 center{-1.0, -1.0};
    double scale = 1.0;
    Vec2 direction{1.0, 0.0};
    double offset = 0.0;
};

// Either an explicit list or a geometric progression min * ratio^i.
struct TauGridConfig {
    std::vector<double> values;
    double min = 1.0;
    double ratio = 2.0;
    int count = 8;
    std::vector<double> resolve() const;
};

struct ExperimentConfig {
    std::string experiment;  // optional; must match the subcommand when given
    std::vector<Interval> bounds{{0.0, 1.0}};
    std::vector<std::string> observed{"right"};

    int n_x = 64;
    int n_t = 64;
    double T = 1.0;

    std::string preset = "identity";  // identity | variable
    CoefficientSpec coefficients;

    PsiConfig psi;
    double lambda = 1.0;
    std::vector<double> lambda_grid;  // empty: powers of two 1..1024
    TauGridConfig tau;

    int count = 10;
    std::uint64_t seed = 1;
    int band = 4;
    std::vector<double> noise_levels{1e-4, 1e-3, 1e-2, 1e-1};

    std::string output = "out";

    // subcommand options
    std::vector<int> resolutions;  // empty: per-subcommand default
    double reg = 1e-10;
    int max_iters = 500;
    double tol = 1e-10;
    double first_time = 0.25;      // energy identity starts at this fraction of T
    double amplitude = 0.1;        // coefficient perturbation size
    double floor_fraction = 0.1;
    int trials = 100;
    int space_samples = 17;
    int time_samples = 5;
    int directions = 16;
    int angles = 33;
    std::vector<double> garding_taus{1.0, 10.0, 100.0};
    std::string source = "sine";   // sine | random

    SpatialDomain domain() const;
    SpaceTimeGrid grid() const { return grid(n_x, n_t); }
    SpaceTimeGrid grid(int nx, int nt) const;
    WeightFunctionPsi weight() const;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config(const std::string& path);

}  // namespace carlab
