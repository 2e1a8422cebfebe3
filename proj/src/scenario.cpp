#include "lsl/scenario.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace lsl {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

SolveMode parse_mode(const std::string& name) {
    if (name == "lsl") return SolveMode::Lsl;
    if (name == "born") return SolveMode::Born;
    if (name == "cheated") return SolveMode::Cheated;
    throw InvalidArgument("config", "unknown mode '" + name + "' (expected lsl, born or cheated)");
}

std::string mode_name(SolveMode mode) {
    switch (mode) {
        case SolveMode::Lsl: return "lsl";
        case SolveMode::Born: return "born";
        case SolveMode::Cheated: return "cheated";
    }
    return "lsl";
}

void ScenarioConfig::validate() const {
    if (grid.dimension != 1 && grid.dimension != 2) throw InvalidArgument("config", "dimension must be 1 or 2");
    if (shifts.empty()) throw InvalidArgument("config", "need at least one shift");
    for (std::size_t i = 0; i < shifts.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (shifts[i] == shifts[j]) throw InvalidArgument("config", "shifts must be distinct");
        }
    }
    if (layout.K < 1 || layout.K > layout.L()) throw InvalidArgument("config", "require 1 <= K <= L");
    for (const auto& v : variants) {
        if (v.receivers != 0 && (v.receivers < layout.K || v.receivers > layout.L())) {
            throw InvalidArgument("config", "variant '" + v.name + "': receivers must lie in [K, L]");
        }
    }
}

namespace {

Point read_point(const json& j) {
    Point p{0.0, 0.0};
    if (j.is_number()) {
        p[0] = j.get<double>();
        return p;
    }
    if (!j.is_array() || j.empty() || j.size() > 2) throw InvalidArgument("config", "point must be [x] or [x, y]");
    for (std::size_t a = 0; a < j.size(); ++a) p[a] = j[a].get<double>();
    return p;
}

template <class T>
std::array<T, 2> read_pair(const json& j, T fill) {
    std::array<T, 2> out{fill, fill};
    if (!j.is_array() || j.empty() || j.size() > 2) throw InvalidArgument("config", "expected 1 or 2 values");
    for (std::size_t a = 0; a < j.size(); ++a) out[a] = j[a].get<T>();
    return out;
}

Shape read_shape(const json& j) {
    Shape s;
    const auto type = j.at("type").get<std::string>();
    s.amplitude = j.value("amplitude", 1.0);
    if (type == "bar") {
        s.kind = Shape::Kind::Bar;
        s.lower = read_point(j.at("lower"));
        s.upper = read_point(j.at("upper"));
    } else if (type == "bump") {
        s.kind = Shape::Kind::Bump;
        s.center = read_point(j.at("center"));
        s.radius = j.at("radius").get<double>();
    } else {
        throw InvalidArgument("config", "unknown shape type '" + type + "'");
    }
    return s;
}

}  // namespace

ScenarioConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("config", "cannot read " + path.string());
    json j;
    try {
        j = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ParseError(path.string(), 0, "", e.what());
    }
    const fs::path base = path.parent_path();
    ScenarioConfig c;
    try {
        c.name = j.value("name", path.stem().string());
        const auto& g = j.at("grid");
        c.grid.dimension = g.at("dimension").get<int>();
        c.grid.extents = read_pair<double>(g.at("extents"), 0.0);
        c.grid.nodes = read_pair<int>(g.at("nodes"), 1);
        if (g.contains("full_nodes")) c.grid.full_nodes = read_pair<int>(g.at("full_nodes"), 1);

        if (j.contains("medium")) {
            const auto& m = j.at("medium");
            if (m.contains("raster")) c.medium_raster = (base / m.at("raster").get<std::string>()).string();
            for (const auto& s : m.value("shapes", json::array())) c.shapes.push_back(read_shape(s));
        }

        const auto& l = j.at("layout");
        c.layout.K = l.at("K").get<int>();
        c.layout.mollifier_radius = l.value("mollifier_radius", 0.0);
        for (const auto& r : l.at("receivers")) c.layout.receivers.push_back(read_point(r));

        c.shifts = j.at("shifts").get<std::vector<double>>();
        if (j.contains("mask")) c.mask_path = (base / j.at("mask").get<std::string>()).string();

        if (j.contains("solver")) {
            const auto& s = j.at("solver");
            c.mode = parse_mode(s.value("mode", "lsl"));
            c.truncation.rel_threshold = s.value("rel_threshold", kDefaultRelThreshold);
            if (s.contains("rank") && !s.at("rank").is_null()) c.truncation.rank = s.at("rank").get<int>();
            c.equilibrate = s.value("equilibrate", false);
            const auto basis = s.value("basis", std::string("pixel"));
            if (basis == "pixel") c.basis = BasisChoice::Pixel;
            else if (basis == "background") c.basis = BasisChoice::Background;
            else throw InvalidArgument("config", "unknown basis '" + basis + "'");
        }
        if (j.contains("region")) {
            const auto& r = j.at("region");
            c.region = Region{read_point(r.at("lower")), read_point(r.at("upper"))};
        }
        for (const auto& v : j.value("variants", json::array())) {
            c.variants.push_back({v.at("name").get<std::string>(), parse_mode(v.value("mode", "lsl")),
                                  v.value("receivers", 0)});
        }
    } catch (const json::exception& e) {
        throw ParseError(path.string(), 0, "", e.what());
    }
    c.validate();
    return c;
}

Grid make_grid(const GridSpec& spec, bool full) {
    std::array<int, 2> nodes = spec.nodes;
    if (full && spec.full_nodes[0] > 0) nodes = spec.full_nodes;
    if (spec.dimension == 1) return Grid::line(spec.extents[0], nodes[0]);
    return Grid::rectangle(spec.extents[0], spec.extents[1], nodes[0], nodes[1]);
}

namespace {

double shape_value(const Shape& s, const Point& x, int dimension) {
    if (s.kind == Shape::Kind::Bar) {
        for (int a = 0; a < dimension; ++a) {
            if (x[a] < s.lower[a] || x[a] > s.upper[a]) return 0.0;
        }
        return s.amplitude;
    }
    double r2 = 0.0;
    for (int a = 0; a < dimension; ++a) r2 += (x[a] - s.center[a]) * (x[a] - s.center[a]);
    const double r = std::sqrt(r2);
    if (r >= s.radius) return 0.0;
    const double c = std::cos(0.5 * std::numbers::pi * r / s.radius);
    return s.amplitude * c * c;
}

}  // namespace

Medium make_medium(const ScenarioConfig& config, const Grid& grid) {
    if (!config.medium_raster.empty()) return Medium(grid, read_raster(grid, config.medium_raster));
    Vector p = Vector::Zero(grid.size());
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
        const Point x = grid.coordinate(i);
        for (const auto& s : config.shapes) p(i) += shape_value(s, x, grid.dimension());
    }
    return Medium(grid, std::move(p));
}

Metrics compute_metrics(const Grid& grid, const Vector& p_true, const ReconstructionResult& r,
                        const std::optional<Region>& region) {
    Metrics m;
    const Vector diff = r.p_hat - p_true;
    const double norm_true = p_true.norm();
    m.rel_l2 = norm_true > 0.0 ? diff.norm() / norm_true : diff.norm();
    m.max_abs = diff.size() ? diff.cwiseAbs().maxCoeff() : 0.0;
    m.rank_used = r.rank_used;
    m.residual_norm = r.residual_norm;
    if (!region) {
        m.rel_l2_region = m.rel_l2;
        return m;
    }
    double num = 0.0;
    double den = 0.0;
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
        const Point x = grid.coordinate(i);
        bool inside = true;
        for (int a = 0; a < grid.dimension(); ++a) {
            inside = inside && x[a] >= region->lower[a] && x[a] <= region->upper[a];
        }
        if (!inside) continue;
        num += diff(i) * diff(i);
        den += p_true(i) * p_true(i);
    }
    m.rel_l2_region = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
    return m;
}

namespace {

template <class F>
auto staged(const char* stage, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const std::exception& e) {
        throw Error(stage, e.what());
    }
}

// Background snapshots of every configured array element at every shift,
// orthonormalized in the quadrature inner product. Directions below 1e-10 of
// the largest singular value are dropped.
Matrix background_basis(const BackgroundFields& full, const Grid& grid) {
    const Eigen::Index per_shift = full.fields.front().fields.cols();
    Matrix snapshots(grid.size(), per_shift * static_cast<Eigen::Index>(full.fields.size()));
    for (std::size_t j = 0; j < full.fields.size(); ++j) {
        snapshots.middleCols(static_cast<Eigen::Index>(j) * per_shift, per_shift) = full.fields[j].fields;
    }
    const Vector root = grid.weights().cwiseSqrt();
    const Eigen::BDCSVD<Matrix> svd(root.asDiagonal() * snapshots, Eigen::ComputeThinU);
    const Vector& s = svd.singularValues();
    Eigen::Index keep = 0;
    while (keep < s.size() && s(keep) > 1e-10 * s(0)) ++keep;
    return root.cwiseInverse().asDiagonal() * svd.matrixU().leftCols(keep);
}

}  // namespace

RunResult run(const ScenarioConfig& config, const RunOptions& options) {
    const Grid grid = make_grid(config.grid, options.full);
    const Medium medium = staged("medium", [&] { return make_medium(config, grid); });
    const ArrayLayout layout =
        options.receivers > 0 ? config.layout.truncated(options.receivers) : config.layout;
    const std::span<const double> shifts(config.shifts);

    SpectralDataset data = staged("synthesize", [&] {
        if (!options.data_path) return synthesize_dataset(medium, layout, shifts);
        SpectralDataset loaded = load_dataset(*options.data_path);
        if (loaded.K() != layout.K || loaded.lambdas() != config.shifts) {
            throw InvalidArgument("synthesize", "dataset shifts or K do not match the config");
        }
        if (loaded.L() != layout.L()) {
            throw InvalidArgument("synthesize", "dataset L does not match the receiver count");
        }
        return loaded;
    });
    const std::string mask_path =
        options.mask_path ? options.mask_path->string() : config.mask_path;
    if (!mask_path.empty()) {
        data = staged("mask", [&] { return apply_mask(data, load_masks(mask_path)); });
    }

    const BackgroundModel bg = staged("background", [&] { return build_background(grid, layout, shifts); });

    const std::vector<InternalFieldSet> fields = staged("internal_solutions", [&] {
        switch (options.mode) {
            case SolveMode::Born: return born_fields(bg);
            case SolveMode::Cheated: return cheated_fields(medium, layout, shifts);
            case SolveMode::Lsl: break;
        }
        return internal_fields(bg, measured_lanczos(data), shifts);
    });

    LslSystem system = staged("assemble", [&] {
        return assemble(data, bg.data, bg.solutions.fields, fields, grid.weights());
    });
    if (config.basis == BasisChoice::Background) {
        system = staged("assemble", [&] {
            const BackgroundFields full = layout.L() == config.layout.L()
                                              ? bg.solutions
                                              : background_model(grid, config.layout, shifts);
            return restrict_basis(system, background_basis(full, grid));
        });
    }

    if (config.equilibrate) system = equilibrate_rows(system);

    const Truncation truncation = options.truncation.value_or(config.truncation);
    ReconstructionResult reconstruction = staged("solve", [&] { return solve_truncated(system, truncation); });
    const Metrics metrics = compute_metrics(grid, medium.p, reconstruction, config.region);
    return RunResult{grid,           medium.p,      std::move(data), std::move(system),
                     std::move(reconstruction), metrics, options.mode};
}

// ---------------------------------------------------------------------------
// Artifacts

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::ofstream open_output(const fs::path& path, bool binary = false) {
    std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
    if (!os) throw Error("io", "cannot write " + path.string());
    return os;
}

}  // namespace

void write_raster(const Grid& grid, const Vector& values, const fs::path& path) {
    if (values.size() != grid.size()) throw InvalidArgument("io", "raster size mismatch");
    auto os = open_output(path);
    for (int iy = 0; iy < grid.ny(); ++iy) {
        for (int ix = 0; ix < grid.nx(); ++ix) {
            if (ix) os << ',';
            os << format_double(values(grid.index(ix, iy)));
        }
        os << '\n';
    }
}

std::pair<Matrix, std::array<int, 2>> read_raster_any(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("io", "cannot read " + path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
            } catch (const std::exception&) {
                throw ParseError(path.string(), line_no, "raster", "not a number: '" + cell + "'");
            }
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw ParseError(path.string(), line_no, "raster", "ragged row");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError(path.string(), line_no, "raster", "empty raster");
    const int ny = static_cast<int>(rows.size());
    const int nx = static_cast<int>(rows.front().size());
    Matrix m(ny, nx);
    for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) m(iy, ix) = rows[static_cast<std::size_t>(iy)][static_cast<std::size_t>(ix)];
    }
    return {m, {nx, ny}};
}

Vector read_raster(const Grid& grid, const fs::path& path) {
    const auto [m, dims] = read_raster_any(path);
    if (dims[0] != grid.nx() || dims[1] != grid.ny()) {
        throw InvalidArgument("io", path.string() + ": raster shape does not match the grid");
    }
    Vector v(grid.size());
    for (int iy = 0; iy < grid.ny(); ++iy) {
        for (int ix = 0; ix < grid.nx(); ++ix) v(grid.index(ix, iy)) = m(iy, ix);
    }
    return v;
}

void write_pgm(const Grid& grid, const Vector& values, double scale, const fs::path& path) {
    auto os = open_output(path, true);
    os << "P5\n" << grid.nx() << ' ' << grid.ny() << "\n255\n";
    // Row 0 of the image is the top of the domain (largest y).
    for (int iy = grid.ny() - 1; iy >= 0; --iy) {
        for (int ix = 0; ix < grid.nx(); ++ix) {
            const double v = scale > 0.0 ? values(grid.index(ix, iy)) / scale : 0.0;
            const double clamped = std::clamp(v, 0.0, 1.0);
            os.put(static_cast<char>(static_cast<unsigned char>(std::lround(clamped * 255.0))));
        }
    }
}

void write_artifacts(const RunResult& result, const std::string& scenario, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    save_dataset(result.data, out_dir / "dataset.txt");
    write_raster(result.grid, result.reconstruction.p_hat, out_dir / "phat.csv");
    const double scale = std::max(result.p_true.maxCoeff(), result.reconstruction.p_hat.maxCoeff());
    write_pgm(result.grid, result.reconstruction.p_hat, scale, out_dir / "phat.pgm");
    {
        auto os = open_output(out_dir / "spectrum.csv");
        os << "index,sigma\n";
        const Vector& s = result.reconstruction.singular_values;
        for (Eigen::Index k = 0; k < s.size(); ++k) os << k << ',' << format_double(s(k)) << '\n';
    }
    ordered_json m;
    m["scenario"] = scenario;
    m["mode"] = mode_name(result.mode);
    m["K"] = result.data.K();
    m["L"] = result.data.L();
    m["m"] = result.data.m();
    m["nx"] = result.grid.nx();
    m["ny"] = result.grid.ny();
    m["rows"] = result.system.rows.rows();
    m["rel_l2"] = result.metrics.rel_l2;
    m["rel_l2_region"] = result.metrics.rel_l2_region;
    m["max_abs"] = result.metrics.max_abs;
    m["rank_used"] = result.metrics.rank_used;
    m["residual_norm"] = result.metrics.residual_norm;
    auto os = open_output(out_dir / "metrics.json");
    os << m.dump(2) << '\n';
}

Comparison compare_runs(const fs::path& a, const fs::path& b) {
    auto load_json = [](const fs::path& p) {
        std::ifstream in(p / "metrics.json");
        if (!in) throw Error("compare", "cannot read " + (p / "metrics.json").string());
        return json::parse(in);
    };
    const json ma = load_json(a);
    const json mb = load_json(b);
    if (ma.value("nx", -1) != mb.value("nx", -2) || ma.value("ny", -1) != mb.value("ny", -2)) {
        throw InvalidArgument("compare", "runs were made on different grids");
    }
    const auto [ra, da] = read_raster_any(a / "phat.csv");
    const auto [rb, db] = read_raster_any(b / "phat.csv");
    if (da != db) throw InvalidArgument("compare", "reconstruction rasters differ in shape");

    Comparison c;
    for (const char* key : {"rel_l2", "rel_l2_region", "max_abs", "rank_used", "residual_norm"}) {
        c.keys.emplace_back(key);
        c.a.push_back(ma.value(key, std::nan("")));
        c.b.push_back(mb.value(key, std::nan("")));
    }
    c.difference = ra - rb;
    c.max_abs_difference = c.difference.size() ? c.difference.cwiseAbs().maxCoeff() : 0.0;
    return c;
}

}  // namespace lsl
