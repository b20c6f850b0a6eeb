#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sac/channel.hpp"
#include "sac/fec.hpp"
#include "sac/geometry.hpp"
#include "sac/ofdm.hpp"
#include "sac/receiver.hpp"

namespace sac {

enum class RunMode { sac, nosac };

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct UeConfig {
    std::uint64_t id = 0;
    double x_m = 0.0;
    std::optional<double> ptx_dbm;  // fixed power; otherwise follows the sweep
};

struct ScenarioConfig {
    std::string name = "scenario";
    SystemConfig system;
    std::size_t pilot_spacing = 4;
    double code_rate = 2.0 / 3.0;
    std::size_t crc_bits = 11;
    std::size_t list_size = 8;
    PolarConstruction construction = PolarConstruction::nr_sequence;
    double design_snr_db = 0.0;
    LinkBudget budget;
    std::vector<UeConfig> ues;
    std::vector<double> ptx_dbm;
    double profile_ptx_dbm = -10.0;
    std::size_t trials = 200;
    std::uint64_t seed = 1;
    RunMode mode = RunMode::sac;
    CsiMode csi = CsiMode::pilot;
    DopplerEstimation estimation = DopplerEstimation::interpolated;
    std::size_t zero_padding = 8;
    bool noise = true;
    PhaseModel channel_phase = PhaseModel::fresnel;

    /// Coded bits per frame: two per data subcarrier.
    std::size_t coded_bits() const;
    PolarConfig polar() const;
    double ue_power_dbm(const UeConfig& ue, double sweep_ptx_dbm) const {
        return ue.ptx_dbm.value_or(sweep_ptx_dbm);
    }

    /// Throws ConfigError naming the offending field.
    void validate() const;

    /// Single-symbol reference link: one UE at x = 0, M = 1, no aperture
    /// processing. Spectral parameters, FEC, budget and sweep are kept.
    ScenarioConfig baseline() const;
    /// The configuration actually simulated for the selected mode.
    ScenarioConfig resolved() const { return mode == RunMode::nosac ? baseline() : *this; }

    /// The resolved configuration as ordered key/value pairs in file syntax.
    std::vector<std::pair<std::string, std::string>> entries() const;
    std::string to_text() const;
};

ScenarioConfig parse_scenario(std::string_view text);
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// `[a, b, c]`, `[a..b step s]` or a single number.
std::vector<double> parse_number_list(std::string_view text);

std::string to_string(RunMode mode);
std::string to_string(CsiMode mode);
std::string to_string(DopplerEstimation mode);
std::string to_string(PhaseModel model);
std::string to_string(PolarConstruction construction);

}  // namespace sac
