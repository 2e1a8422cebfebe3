// lsl: synthesize spectral data, invert it, compare runs, validate invariants.
//
//   lsl synthesize --config scenarios/1d_simo.json --out runs/data
//   lsl invert --config scenarios/1d_simo.json --mode lsl --out runs/lsl
//   lsl run --config scenarios/2d_medical.json --out runs/medical
//   lsl compare runs/lsl runs/born
//   lsl validate --instances 20 --seed 7

#include "lsl/scenario.hpp"
#include "lsl/simd.hpp"
#include "lsl/validation.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>

namespace {

struct InvertArgs {
    std::string config;
    std::string mode;
    std::string out = "out";
    std::string data;
    std::string mask;
    int receivers = 0;
    int rank = 0;
    double threshold = 0.0;
    bool full = false;
};

lsl::RunOptions to_options(const InvertArgs& a, const lsl::ScenarioConfig& config) {
    lsl::RunOptions o;
    o.mode = a.mode.empty() ? config.mode : lsl::parse_mode(a.mode);
    o.receivers = a.receivers;
    o.full = a.full;
    if (!a.data.empty()) o.data_path = a.data;
    if (!a.mask.empty()) o.mask_path = a.mask;
    if (a.rank > 0 || a.threshold > 0.0) {
        lsl::Truncation t = config.truncation;
        if (a.rank > 0) t.rank = a.rank;
        if (a.threshold > 0.0) {
            t.rel_threshold = a.threshold;
            if (a.rank <= 0) t.rank.reset();
        }
        o.truncation = t;
    }
    return o;
}

void print_metrics(const std::string& label, const lsl::Metrics& m) {
    std::printf("%-16s rel_l2=%.6f rel_l2_region=%.6f max_abs=%.6f rank=%d residual=%.3e\n",
                label.c_str(), m.rel_l2, m.rel_l2_region, m.max_abs, m.rank_used, m.residual_norm);
}

int cmd_synthesize(const InvertArgs& a) {
    const auto config = lsl::load_config(a.config);
    const lsl::Grid grid = lsl::make_grid(config.grid, a.full);
    const lsl::Medium medium = lsl::make_medium(config, grid);
    const lsl::ArrayLayout layout = a.receivers > 0 ? config.layout.truncated(a.receivers) : config.layout;
    const auto data = lsl::synthesize_dataset(medium, layout, config.shifts);
    std::filesystem::create_directories(a.out);
    lsl::save_dataset(data, std::filesystem::path(a.out) / "dataset.txt");
    std::printf("wrote %s (m=%d K=%d L=%d)\n", (std::filesystem::path(a.out) / "dataset.txt").c_str(),
                data.m(), data.K(), data.L());
    return 0;
}

int cmd_invert(const InvertArgs& a) {
    const auto config = lsl::load_config(a.config);
    const auto options = to_options(a, config);
    const auto t0 = std::chrono::steady_clock::now();
    const auto result = lsl::run(config, options);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    lsl::write_artifacts(result, config.name, a.out);
    print_metrics(lsl::mode_name(options.mode), result.metrics);
    std::fprintf(stderr, "%s: %.2f s, artifacts in %s\n", config.name.c_str(), secs, a.out.c_str());
    return 0;
}

int cmd_run(const InvertArgs& a) {
    const auto config = lsl::load_config(a.config);
    if (config.variants.empty()) throw lsl::InvalidArgument("config", "scenario declares no variants");
    for (const auto& v : config.variants) {
        InvertArgs va = a;
        va.mode = lsl::mode_name(v.mode);
        va.receivers = v.receivers;
        const auto options = to_options(va, config);
        const auto result = lsl::run(config, options);
        lsl::write_artifacts(result, config.name, std::filesystem::path(a.out) / v.name);
        print_metrics(v.name, result.metrics);
    }
    return 0;
}

int cmd_compare(const std::string& a, const std::string& b, const std::string& out) {
    const auto c = lsl::compare_runs(a, b);
    std::printf("%-16s %16s %16s\n", "metric", "A", "B");
    for (std::size_t k = 0; k < c.keys.size(); ++k) {
        std::printf("%-16s %16.8g %16.8g  %s\n", c.keys[k].c_str(), c.a[k], c.b[k],
                    c.a[k] < c.b[k] ? "A<B" : (c.a[k] > c.b[k] ? "A>B" : "A=B"));
    }
    std::printf("max |phat_A - phat_B| = %.6g\n", c.max_abs_difference);
    if (!out.empty()) {
        std::filesystem::create_directories(out);
        std::FILE* f = std::fopen((std::filesystem::path(out) / "difference.csv").c_str(), "w");
        if (!f) throw lsl::Error("compare", "cannot write difference.csv");
        for (Eigen::Index i = 0; i < c.difference.rows(); ++i) {
            for (Eigen::Index j = 0; j < c.difference.cols(); ++j) {
                std::fprintf(f, j ? ",%.17g" : "%.17g", c.difference(i, j));
            }
            std::fputc('\n', f);
        }
        std::fclose(f);
    }
    return 0;
}

int cmd_validate(int instances, unsigned seed) {
    const auto report = lsl::validation::run_suite(instances, seed);
    for (const auto& line : report.checks) {
        std::printf("%s %-28s worst=%.3e tol=%.1e\n", line.passed ? "PASS" : "FAIL", line.name.c_str(),
                    line.worst, line.tolerance);
    }
    return report.all_passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Data-driven ROM / Lippmann-Schwinger-Lanczos inversion"};
    app.require_subcommand(1);
    std::string simd;
    app.add_option("--simd", simd, "kernel backend: scalar, avx2, neon (default: best available)");

    InvertArgs args;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", args.config, "scenario JSON file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", args.out, "output directory");
        sub->add_option("--receivers", args.receivers, "use only the first N array elements");
        sub->add_flag("--full", args.full, "use the full_nodes grid");
    };
    auto add_solver = [&](CLI::App* sub) {
        sub->add_option("--data", args.data, "measured dataset file")->check(CLI::ExistingFile);
        sub->add_option("--mask", args.mask, "per-point mask file")->check(CLI::ExistingFile);
        sub->add_option("--rank", args.rank, "explicit truncation rank");
        sub->add_option("--threshold", args.threshold, "relative singular value cutoff");
    };

    auto* synth = app.add_subcommand("synthesize", "write synthesized data for a scenario");
    add_common(synth);

    auto* invert = app.add_subcommand("invert", "reconstruct p for a scenario");
    add_common(invert);
    add_solver(invert);
    invert->add_option("--mode", args.mode, "lsl, born or cheated")
        ->check(CLI::IsMember({"lsl", "born", "cheated"}));

    auto* runall = app.add_subcommand("run", "invert every variant declared in the scenario");
    add_common(runall);
    add_solver(runall);

    std::string dir_a, dir_b, cmp_out;
    auto* compare = app.add_subcommand("compare", "compare two run directories");
    compare->add_option("A", dir_a)->required()->check(CLI::ExistingDirectory);
    compare->add_option("B", dir_b)->required()->check(CLI::ExistingDirectory);
    compare->add_option("--out", cmp_out, "write difference.csv here");

    int instances = 20;
    unsigned seed = 1;
    auto* validate = app.add_subcommand("validate", "check invariants on random small instances");
    validate->add_option("--instances", instances)->check(CLI::PositiveNumber);
    validate->add_option("--seed", seed);

    CLI11_PARSE(app, argc, argv);

    try {
        if (!simd.empty()) {
            const auto b = simd == "scalar" ? lsl::simd::Backend::Scalar
                           : simd == "avx2" ? lsl::simd::Backend::Avx2
                           : simd == "neon" ? lsl::simd::Backend::Neon
                                            : throw lsl::InvalidArgument("cli", "unknown backend " + simd);
            lsl::simd::set_backend(b);
        }
        if (*synth) return cmd_synthesize(args);
        if (*invert) return cmd_invert(args);
        if (*runall) return cmd_run(args);
        if (*compare) return cmd_compare(dir_a, dir_b, cmp_out);
        if (*validate) return cmd_validate(instances, seed);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "lsl: %s\n", e.what());
        return 1;
    }
    return 0;
}
