#pragma once

// Randomized invariant checks behind `lsl validate`.

#include "lsl/forward_solver.hpp"

#include <random>
#include <string>
#include <vector>

namespace lsl::validation {

struct InstanceLimits {
    int min_nodes = 21;
    int max_nodes = 101;
    int max_shifts = 6;
    int max_sources = 1;
    int max_extra_receivers = 2;
    double lambda_min = 0.5;
    double lambda_max = 300.0;
    // Adjacent shifts differ by at least this factor. Six shifts crowded at
    // the low end leave the snapshot Gram matrix below the SPD floor.
    double min_shift_ratio = 3.0;
    double max_p = 5.0;
};

struct Instance {
    Medium medium;
    ArrayLayout layout;
    std::vector<double> lambdas;
};

// Distinct log-uniform shifts in [lambda_min, lambda_max], pairwise ratio at
// least min_shift_ratio, sorted ascending.
std::vector<double> random_shifts(std::mt19937_64& rng, int count, const InstanceLimits& limits);

// Unit interval with a random node count, p >= 0 made of a few random
// bars on a smooth floor, array elements on distinct nodes.
Instance random_instance(std::mt19937_64& rng, const InstanceLimits& limits = {});

struct Check {
    std::string name;
    double worst = 0.0;
    double tolerance = 0.0;
    bool passed = true;
    std::string note;
};

struct Report {
    std::vector<Check> checks;
    bool all_passed() const;
};

Report run_suite(int instances, unsigned seed);

}  // namespace lsl::validation
