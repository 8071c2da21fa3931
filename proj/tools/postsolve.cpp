#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <unistd.h>
#include <vector>

#include <CLI11.hpp>

#include "postsolve/config.hpp"
#include "postsolve/metrics.hpp"
#include "postsolve/pipeline.hpp"
#include "postsolve/verify.hpp"

namespace fs = std::filesystem;
using namespace postsolve;

namespace {

struct RunOutcome {
    std::uint64_t seed = 0;
    double mse_to_source = 0.0;
    double measured_mse = 0.0;
    double psnr_to_source = 0.0;
    double sign_match_rate = 1.0;
    bool all_unmeasured_match = true;
};

Config load_config(const std::string& path, std::optional<std::uint64_t> seed_override,
                   const std::string& mode) {
    Config cfg = path.empty() ? Config::defaults() : Config::from_file(path);
    cfg.apply_env(environ);
    cfg.set("run.mode", mode);
    if (seed_override) cfg.set("posterior.seed", std::to_string(*seed_override));
    return cfg;
}

// Sign agreement with the target mean over the coordinates the mask left
// unmeasured; falls back to all coordinates when nothing is unmeasured.
double sign_match(const RunRecord& rec, const GaussianMixtureScore& model, int target_label,
                  bool* all_match) {
    Signal target_mean(model.dimension);
    double wsum = 0.0;
    for (const auto& c : model.components) {
        if (c.label != target_label) continue;
        for (std::size_t i = 0; i < model.dimension; ++i) target_mean[i] += c.weight * c.mean[i];
        wsum += c.weight;
    }
    if (wsum == 0.0) {
        *all_match = true;
        return 1.0;
    }
    std::vector<std::size_t> eval;
    for (std::size_t i = 0; i < model.dimension; ++i)
        if (std::find(rec.mask_kept_indices.begin(), rec.mask_kept_indices.end(), i) ==
            rec.mask_kept_indices.end())
            eval.push_back(i);
    if (eval.empty())
        for (std::size_t i = 0; i < model.dimension; ++i) eval.push_back(i);
    int ok = 0;
    for (std::size_t i : eval)
        if ((rec.output[i] > 0.0) == (target_mean[i] / wsum > 0.0)) ++ok;
    *all_match = ok == static_cast<int>(eval.size());
    return static_cast<double>(ok) / static_cast<double>(eval.size());
}

RunOutcome execute_single(Config cfg, std::uint64_t seed, const fs::path& outdir) {
    cfg.set("posterior.seed", std::to_string(seed));
    const NoiseSchedule schedule = build_schedule(cfg);
    const GaussianMixtureScore model = build_model(cfg);
    RunSpec spec = build_run_spec(cfg, model);
    RngSet rngs = RngSet::from_seed(seed);

    std::vector<TrajectoryRow> trajectory;
    RunRecord rec = spec.mode == RunMode::kEdit
                        ? edit(spec, model, schedule, rngs, &trajectory)
                        : reconstruct(spec, model, schedule, rngs, &trajectory);

    // echo the realized mask so the run replays without resampling
    if (!rec.mask_kept_indices.empty()) {
        std::ostringstream kept;
        for (std::size_t j = 0; j < rec.mask_kept_indices.size(); ++j)
            kept << (j ? "," : "") << rec.mask_kept_indices[j];
        cfg.set("measurement.kept_indices", kept.str());
    }
    rec.config_echo = cfg.effective();

    fs::create_directories(outdir);
    const std::string stem = "run_" + std::to_string(seed);
    write_text_atomic(outdir / (stem + ".txt"), serialize_record(rec));
    write_text_atomic(outdir / (stem + "_trajectory.csv"), serialize_trajectory(trajectory));

    RunOutcome out;
    out.seed = seed;
    out.mse_to_source = mse(rec.output, spec.source);
    out.psnr_to_source = psnr(rec.output, spec.source, 1.0);
    if (!rec.mask_kept_indices.empty()) {
        double acc = 0.0;
        for (std::size_t j = 0; j < rec.mask_kept_indices.size(); ++j) {
            const double d = rec.output[rec.mask_kept_indices[j]] - spec.source[rec.mask_kept_indices[j]];
            acc += d * d;
        }
        out.measured_mse = acc / static_cast<double>(rec.mask_kept_indices.size());
    } else {
        out.measured_mse = out.mse_to_source;
    }
    out.sign_match_rate = sign_match(rec, model, static_cast<int>(cfg.get_int("run.target_label")),
                                     &out.all_unmeasured_match);
    return out;
}

int run_batch(const Config& base, std::uint64_t seed0, int runs, const fs::path& outdir,
              const std::string& label) {
    for (const auto& w : config_warnings(base)) std::cerr << "warning: " << w << "\n";

    std::vector<RunOutcome> outcomes(static_cast<std::size_t>(runs));
    const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::future<void>> futs;
    std::atomic<int> next{0};
    for (unsigned t = 0; t < workers; ++t)
        futs.push_back(std::async(std::launch::async, [&]() {
            for (int i = next.fetch_add(1); i < runs; i = next.fetch_add(1))
                outcomes[static_cast<std::size_t>(i)] =
                    execute_single(base, seed0 + static_cast<std::uint64_t>(i), outdir);
        }));
    for (auto& f : futs) f.get();

    double mse_mean = 0.0, measured_mean = 0.0, psnr_mean = 0.0, sign_runs = 0.0;
    for (const auto& o : outcomes) {
        mse_mean += o.mse_to_source;
        measured_mean += o.measured_mse;
        psnr_mean += o.psnr_to_source;
        sign_runs += o.all_unmeasured_match ? 1.0 : 0.0;
    }
    mse_mean /= runs;
    measured_mean /= runs;
    psnr_mean /= runs;
    sign_runs /= runs;

    std::ostringstream line;
    line << label << " runs=" << runs << " seed0=" << seed0 << " mse_to_source=" << format_real(mse_mean)
         << " measured_mse=" << format_real(measured_mean) << " psnr=" << format_real(psnr_mean)
         << " sign_match_run_rate=" << format_real(sign_runs) << "\n";
    std::cout << line.str();
    if (runs > 1) {
        std::ofstream summary(outdir / "summary.txt", std::ios::app);
        summary << line.str();
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"posterior-sampling editing and reconstruction over analytic score oracles"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed_override;
    int runs = 1;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "config file of key = value lines");
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("--seed", seed_override, "override posterior.seed");
        cmd->add_option("--runs", runs, "number of seeded runs (seed, seed+1, ...)");
    };

    CLI::App* cmd_edit = app.add_subcommand("edit", "run the editing pipeline");
    CLI::App* cmd_recon = app.add_subcommand("reconstruct", "run the reconstruction pipeline");
    add_common(cmd_edit);
    add_common(cmd_recon);

    std::string suite = "all";
    CLI::App* cmd_verify = app.add_subcommand("verify", "run oracle-equivalence and invariant suites");
    cmd_verify->add_option("suite", suite, "schedule|score|solver|measurement|posterior|pipeline|metrics|all");

    CLI::App* cmd_sweep = app.add_subcommand("sweep", "grid over w, f, T with aggregate metrics");
    add_common(cmd_sweep);

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(cmd_verify)) {
            auto results = verify::run_suite(suite);
            const bool ok = verify::print_results(std::cout, results);
            return ok ? 0 : 1;
        }

        if (app.got_subcommand(cmd_edit) || app.got_subcommand(cmd_recon)) {
            const std::string mode = app.got_subcommand(cmd_edit) ? "edit" : "reconstruct";
            Config cfg = load_config(config_path, seed_override, mode);
            const std::uint64_t seed0 = static_cast<std::uint64_t>(cfg.get_int("posterior.seed"));
            return run_batch(cfg, seed0, runs, out_dir, mode);
        }

        if (app.got_subcommand(cmd_sweep)) {
            Config base = load_config(config_path, seed_override, "edit");
            const std::uint64_t seed0 = static_cast<std::uint64_t>(base.get_int("posterior.seed"));
            fs::create_directories(out_dir);
            std::ostringstream csv;
            csv << "knob,value,runs,mse_to_source,measured_mse,sign_match_run_rate\n";
            struct Cell {
                const char* knob;
                const char* key;
                double value;
            };
            const std::vector<Cell> grid = {
                {"w", "posterior.w", 0.0},  {"w", "posterior.w", 0.1},  {"w", "posterior.w", 0.3},
                {"w", "posterior.w", 0.5},  {"f", "posterior.f", 0.3},  {"f", "posterior.f", 0.5},
                {"f", "posterior.f", 0.7},  {"T", "posterior.T", 50},   {"T", "posterior.T", 100},
                {"T", "posterior.T", 150},
            };
            for (const auto& cell : grid) {
                Config cfg = base;
                std::ostringstream v;
                v << cell.value;
                cfg.set(cell.key, v.str());
                double mse_mean = 0.0, measured_mean = 0.0, sign_rate = 0.0;
                const fs::path cell_dir =
                    fs::path(out_dir) / (std::string(cell.knob) + "_" + v.str());
                for (int i = 0; i < runs; ++i) {
                    RunOutcome o = execute_single(cfg, seed0 + static_cast<std::uint64_t>(i), cell_dir);
                    mse_mean += o.mse_to_source;
                    measured_mean += o.measured_mse;
                    sign_rate += o.all_unmeasured_match ? 1.0 : 0.0;
                }
                csv << cell.knob << "," << v.str() << "," << runs << ","
                    << format_real(mse_mean / runs) << "," << format_real(measured_mean / runs) << ","
                    << format_real(sign_rate / runs) << "\n";
            }
            write_text_atomic(fs::path(out_dir) / "sweep.csv", csv.str());
            std::cout << csv.str();
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
