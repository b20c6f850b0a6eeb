#include <cstdio>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "sac/experiment.hpp"
#include "sac/geometry.hpp"
#include "sac/report.hpp"
#include "sac/scenario.hpp"

namespace {

struct SimulateArgs {
    std::string config;
    std::string out;
    std::optional<std::size_t> trials;
    std::optional<std::uint64_t> seed;
    std::size_t workers = 1;
    std::optional<std::string> mode;
    bool profile_only = false;
    bool quiet = false;
};

int simulate(const SimulateArgs& args) {
    auto cfg = sac::load_scenario(args.config);
    if (args.trials) cfg.trials = *args.trials;
    if (args.seed) cfg.seed = *args.seed;
    if (args.mode) cfg.mode = (*args.mode == "sac") ? sac::RunMode::sac : sac::RunMode::nosac;
    cfg.resolved().validate();

    sac::SweepResult result;
    if (args.profile_only) {
        if (cfg.mode != sac::RunMode::sac) throw sac::ConfigError("--profile-only needs SAC mode");
        result.profile = sac::simulate_profile(cfg, cfg.profile_ptx_dbm,
                                               sac::mix_seed(cfg.seed, 0x9E3779B97F4A7C15ULL));
    } else {
        sac::SweepOptions options;
        options.workers = args.workers;
        if (!args.quiet) {
            options.progress = [](std::size_t done, std::size_t total) {
                if (done == total || done % 50 == 0) std::fprintf(stderr, "\r%zu/%zu trials", done, total);
                if (done == total) std::fprintf(stderr, "\n");
            };
        }
        result = sac::run_sweep(cfg, options);
    }

    const auto files = sac::write_results(result, cfg, args.out);
    for (const auto& p : result.curve.points)
        std::printf("ptx %8.3f dBm  mean BLER %.4f  [%.4f, %.4f]  predicted SNR %7.3f dB\n", p.ptx_dbm,
                    p.mean_bler, p.mean_ci.lo, p.mean_ci.hi, sac::predicted_snr_db(cfg, p.ptx_dbm));
    if (!args.profile_only) {
        if (result.threshold_dbm)
            std::printf("BLER 0.1 reached at %.3f dBm (predicted SNR there %.3f dB)\n", *result.threshold_dbm,
                        sac::predicted_snr_db(cfg, *result.threshold_dbm));
        else
            std::printf("BLER 0.1 not bracketed by the sweep grid\n");
    }
    std::printf("wrote %s\n", files.manifest.parent_path().string().c_str());
    return 0;
}

int plan(double resolution_m, int mu, std::optional<double> bandwidth_hz) {
    static const std::map<int, double> default_bandwidth = {{0, 4.5e6}, {1, 3.96e6}, {2, 7.92e6}};
    const double b = bandwidth_hz.value_or(default_bandwidth.at(mu));
    const auto numerology = sac::Numerology::nr(mu, b);
    const auto r = sac::plan_parameters(resolution_m, numerology, sac::OrbitGeometry{}, sac::CarrierConfig{});
    std::printf("subcarrier spacing   %.0f kHz\n", numerology.subcarrier_spacing_hz / 1e3);
    std::printf("bandwidth            %.4g MHz\n", b / 1e6);
    std::printf("symbols M            %zu\n", r.symbols);
    std::printf("processing gain      %.2f dB\n", r.processing_gain_db);
    std::printf("aperture length      %.2f m (required %.2f m)\n", r.aperture_length_m, r.required_aperture_m);
    std::printf("symbol duration      %.4f us\n", r.symbol_duration_s * 1e6);
    std::printf("info bits per frame  %.1f\n", r.info_bits_per_frame);
    std::printf("net bit rate         %.2f kbit/s\n", r.net_bit_rate_bps / 1e3);
    for (const auto& w : r.warnings) std::printf("warning: %s\n", w.c_str());
    return 0;
}

int validate(const std::string& path) {
    const auto cfg = sac::load_scenario(path);
    const auto resolved = cfg.resolved();
    resolved.validate();
    std::cout << resolved.to_text();
    const auto polar = resolved.polar();
    std::printf("# code: K = %zu, E = %zu, N = %zu\n", polar.info_bits, polar.rate_matched_length,
                polar.mother_length);
    std::printf("# config is valid\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Synthetic aperture combining simulator for LEO uplinks"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate_cmd = app.add_subcommand("simulate", "Run a BLER sweep and write CSV results");
    simulate_cmd->add_option("config", sim.config, "Scenario file")->required()->check(CLI::ExistingFile);
    simulate_cmd->add_option("--out", sim.out, "Output directory")->required();
    simulate_cmd->add_option("--trials", sim.trials, "Trials per sweep point");
    simulate_cmd->add_option("--seed", sim.seed, "Base RNG seed");
    simulate_cmd->add_option("--workers", sim.workers, "Worker threads")->check(CLI::PositiveNumber);
    simulate_cmd->add_option("--mode", sim.mode, "sac or nosac")->check(CLI::IsMember({"sac", "nosac"}));
    simulate_cmd->add_flag("--profile-only", sim.profile_only, "Only write the azimuth profile");
    simulate_cmd->add_flag("--quiet", sim.quiet, "No progress output");

    double resolution = 0.0;
    int mu = 0;
    std::optional<double> bandwidth;
    auto* plan_cmd = app.add_subcommand("plan", "Smallest M for a cross-range resolution");
    plan_cmd->add_option("--resolution", resolution, "Target cross-range resolution in m")->required();
    plan_cmd->add_option("--mu", mu, "Numerology 0, 1 or 2")->required()->check(CLI::IsMember({0, 1, 2}));
    plan_cmd->add_option("--bandwidth", bandwidth, "Occupied bandwidth in Hz");

    std::string validate_path;
    auto* validate_cmd = app.add_subcommand("validate", "Check a scenario file and print it resolved");
    validate_cmd->add_option("config", validate_path, "Scenario file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*simulate_cmd) return simulate(sim);
        if (*plan_cmd) return plan(resolution, mu, bandwidth);
        if (*validate_cmd) return validate(validate_path);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
