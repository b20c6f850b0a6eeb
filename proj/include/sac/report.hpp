#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sac/experiment.hpp"
#include "sac/scenario.hpp"

namespace sac {

inline constexpr const char* kToolVersion = "1.0.0";

struct WrittenFiles {
    std::filesystem::path bler_csv;
    std::filesystem::path mean_bler_csv;
    std::filesystem::path profile_csv;  // empty when no profile was produced
    std::filesystem::path manifest;
};

/// Writes bler.csv, bler_mean.csv, azimuth_profile.csv (if a profile is
/// present) and manifest.json into `dir`, creating it if needed. Output is
/// byte-identical for identical inputs except the manifest timestamp.
/// Throws std::runtime_error naming the path on I/O failure.
WrittenFiles write_results(const SweepResult& result, const ScenarioConfig& cfg,
                           const std::filesystem::path& dir);

void write_bler_csv(const BlerCurve& curve, const std::filesystem::path& path);
void write_mean_bler_csv(const BlerCurve& curve, const std::filesystem::path& path);
void write_profile_csv(const AzimuthProfile& profile, const std::filesystem::path& path);

/// Manifest document without I/O; `timestamp` goes in its own field.
std::string manifest_json(const SweepResult& result, const ScenarioConfig& cfg,
                          const std::string& timestamp);

/// Minimal CSV reader for files written above: header plus numeric rows.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace sac
