#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sac/receiver.hpp"
#include "sac/scenario.hpp"

namespace sac {

struct UeOutcome {
    std::uint64_t ue_id = 0;
    double x_m = 0.0;
    double tx_power_dbm = 0.0;
    bool detected = false;
    bool crc_ok = false;
    std::size_t bit_errors = 0;
    double x_hat_m = 0.0;
    double doppler_hat_hz = 0.0;
    double measured_snr_db = 0.0;  // post-combining, from the data-symbol EVM
    std::string error;

    bool block_error() const { return !crc_ok || bit_errors != 0 || !error.empty(); }
    bool operator==(const UeOutcome&) const = default;
};

struct TrialRecord {
    std::size_t trial = 0;
    double ptx_dbm = 0.0;
    std::vector<UeOutcome> ues;

    bool operator==(const TrialRecord&) const = default;
};

/// Stateless 64-bit mixing (splitmix64 finaliser) used to derive seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);
std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t ptx_index, std::size_t trial_index);

/// One Monte Carlo frame at a sweep power. Component failures are captured
/// per UE; nothing is thrown for a valid config.
TrialRecord run_trial(const ScenarioConfig& cfg, double ptx_dbm, std::uint64_t seed,
                      std::size_t trial_index = 0);

/// Received, compressed Doppler profile of one frame (SAC mode only).
AzimuthProfile simulate_profile(const ScenarioConfig& cfg, double ptx_dbm, std::uint64_t seed);

struct ConfidenceInterval {
    double lo = 0.0;
    double hi = 1.0;
};

/// Two-sided Clopper-Pearson interval for k errors in n trials.
ConfidenceInterval clopper_pearson(std::size_t errors, std::size_t trials, double level = 0.95);

struct UeBler {
    std::uint64_t ue_id = 0;
    std::size_t trials = 0;
    std::size_t errors = 0;
    double bler = 0.0;
    ConfidenceInterval ci;
    double doa_rmse_m = 0.0;  // over trials with a detection; NaN if none
    std::size_t detections = 0;
    double mean_snr_db = 0.0;
};

struct BlerPoint {
    double ptx_dbm = 0.0;
    std::vector<UeBler> ues;
    std::size_t trials = 0;
    std::size_t errors = 0;  // summed over UEs
    double mean_bler = 0.0;
    ConfidenceInterval mean_ci;  // over trials x UEs block outcomes
    std::size_t component_errors = 0;
};

struct BlerCurve {
    std::vector<BlerPoint> points;

    std::vector<double> ptx_dbm() const;
    std::vector<double> mean_bler() const;
};

struct SweepResult {
    BlerCurve curve;
    std::optional<AzimuthProfile> profile;  // SAC mode, at profile_ptx_dbm
    std::optional<double> threshold_dbm;     // mean BLER crossing 0.1
};

struct SweepOptions {
    std::size_t workers = 1;
    bool profile = true;
    std::function<void(std::size_t done, std::size_t total)> progress;
};

BlerPoint aggregate(double ptx_dbm, const std::vector<TrialRecord>& records);

SweepResult run_sweep(const ScenarioConfig& cfg, const SweepOptions& options = {});

/// First P_Tx where the curve falls to `target`, by linear interpolation of
/// log10(BLER) between the bracketing points. Zero BLER counts as half an
/// error. Nothing if the curve never brackets the target.
std::optional<double> find_crossing(const std::vector<double>& ptx_dbm,
                                    const std::vector<double>& bler, double target = 0.1,
                                    std::size_t trials = 0);

/// Link-budget SNR per subcarrier after combining for the configured mode.
double predicted_snr_db(const ScenarioConfig& cfg, double ptx_dbm);

}  // namespace sac
