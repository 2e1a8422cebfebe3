#pragma once

#include "lsl/forward_solver.hpp"
#include "lsl/internal_solutions.hpp"
#include "lsl/lsl_system.hpp"
#include "lsl/spectral_data.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace lsl {

enum class SolveMode { Lsl, Born, Cheated };

SolveMode parse_mode(const std::string& name);
std::string mode_name(SolveMode mode);

enum class BasisChoice { Pixel, Background };

struct Shape {
    enum class Kind { Bar, Bump } kind = Kind::Bar;
    // Bar: axis-aligned box [lower, upper]. Bump: smooth compact bump of the
    // given radius around center, cos^2 profile.
    Point lower{};
    Point upper{};
    Point center{};
    double radius = 0.0;
    double amplitude = 1.0;
};

struct GridSpec {
    int dimension = 1;
    std::array<double, 2> extents{1.0, 0.0};
    std::array<int, 2> nodes{101, 1};
    std::array<int, 2> full_nodes{0, 0};  // larger node counts used with --full
};

struct Region {
    Point lower{};
    Point upper{};
};

struct Variant {
    std::string name;
    SolveMode mode = SolveMode::Lsl;
    int receivers = 0;  // 0 = all configured receivers
};

struct ScenarioConfig {
    std::string name;
    GridSpec grid;
    std::vector<Shape> shapes;
    std::string medium_raster;  // optional CSV raster, overrides shapes
    ArrayLayout layout;
    std::vector<double> shifts;
    std::string mask_path;  // optional per-point mask file
    SolveMode mode = SolveMode::Lsl;
    Truncation truncation;
    BasisChoice basis = BasisChoice::Pixel;
    bool equilibrate = false;  // unit row norms before the truncated solve
    std::optional<Region> region;
    std::vector<Variant> variants;

    void validate() const;
};

// Reads the JSON scenario file. Relative paths inside it resolve against the
// file's directory.
ScenarioConfig load_config(const std::filesystem::path& path);

Grid make_grid(const GridSpec& spec, bool full = false);
Medium make_medium(const ScenarioConfig& config, const Grid& grid);

struct Metrics {
    double rel_l2 = 0.0;
    double rel_l2_region = 0.0;
    double max_abs = 0.0;
    int rank_used = 0;
    double residual_norm = 0.0;
};

Metrics compute_metrics(const Grid& grid, const Vector& p_true, const ReconstructionResult& r,
                        const std::optional<Region>& region);

struct RunOptions {
    SolveMode mode = SolveMode::Lsl;
    int receivers = 0;
    bool full = false;
    std::optional<std::filesystem::path> data_path;  // measured data instead of synthesis
    std::optional<std::filesystem::path> mask_path;
    std::optional<Truncation> truncation;
};

struct RunResult {
    Grid grid;
    Vector p_true;
    SpectralDataset data;
    LslSystem system;
    ReconstructionResult reconstruction;
    Metrics metrics;
    SolveMode mode;
};

// synthesize -> ROM -> Lanczos -> internal fields -> system -> truncated solve.
// Errors carry the failing stage.
RunResult run(const ScenarioConfig& config, const RunOptions& options);

// Writes dataset.txt, phat.csv, phat.pgm, spectrum.csv and metrics.json.
void write_artifacts(const RunResult& result, const std::string& scenario,
                     const std::filesystem::path& out_dir);

// Grid-shaped raster, one CSV line per y row.
void write_raster(const Grid& grid, const Vector& values, const std::filesystem::path& path);
Vector read_raster(const Grid& grid, const std::filesystem::path& path);
std::pair<Matrix, std::array<int, 2>> read_raster_any(const std::filesystem::path& path);

// 8-bit binary PGM mapping [0, scale] linearly to [0, 255].
void write_pgm(const Grid& grid, const Vector& values, double scale,
               const std::filesystem::path& path);

struct Comparison {
    std::vector<std::string> keys;
    std::vector<double> a;
    std::vector<double> b;
    double max_abs_difference = 0.0;
    Matrix difference;  // phat_a - phat_b in raster layout
};

// Side-by-side metrics of two run directories; throws if the rasters differ in
// shape.
Comparison compare_runs(const std::filesystem::path& a, const std::filesystem::path& b);

}  // namespace lsl
