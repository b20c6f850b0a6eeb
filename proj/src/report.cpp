#include "sac/report.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace sac {
namespace {

namespace fs = std::filesystem;

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
    out << text;
    out.close();
    if (!out) throw std::runtime_error(path.string() + ": write failed");
}

nlohmann::ordered_json json_number(double v) {
    if (!std::isfinite(v)) return nullptr;
    return v;
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

void write_bler_csv(const BlerCurve& curve, const fs::path& path) {
    std::ostringstream out;
    out << "ptx_dbm,ue_id,trials,errors,bler,ci_lo,ci_hi,doa_rmse_m\n";
    for (const auto& p : curve.points)
        for (const auto& u : p.ues)
            out << num(p.ptx_dbm) << ',' << u.ue_id << ',' << u.trials << ',' << u.errors << ','
                << num(u.bler) << ',' << num(u.ci.lo) << ',' << num(u.ci.hi) << ','
                << num(u.doa_rmse_m) << '\n';
    write_text(path, out.str());
}

void write_mean_bler_csv(const BlerCurve& curve, const fs::path& path) {
    std::ostringstream out;
    out << "ptx_dbm,trials,errors,mean_bler,ci_lo,ci_hi\n";
    for (const auto& p : curve.points)
        out << num(p.ptx_dbm) << ',' << p.trials << ',' << p.errors << ',' << num(p.mean_bler) << ','
            << num(p.mean_ci.lo) << ',' << num(p.mean_ci.hi) << '\n';
    write_text(path, out.str());
}

void write_profile_csv(const AzimuthProfile& profile, const fs::path& path) {
    double peak = 0.0;
    for (double v : profile.norms) peak = std::max(peak, v);
    std::ostringstream out;
    out << "bin,doppler_hz,angle_deg,cross_range_m,norm_db\n";
    for (std::size_t i = 0; i < profile.norms.size(); ++i) {
        const double db = (peak > 0.0 && profile.norms[i] > 0.0)
                              ? 20.0 * std::log10(profile.norms[i] / peak)
                              : -std::numeric_limits<double>::infinity();
        out << num(profile.bins[i]) << ',' << num(profile.doppler_hz[i]) << ','
            << num(rad_to_deg(profile.angle_rad[i])) << ',' << num(profile.cross_range_m[i]) << ','
            << num(db) << '\n';
    }
    write_text(path, out.str());
}

std::string manifest_json(const SweepResult& result, const ScenarioConfig& cfg,
                          const std::string& timestamp) {
    const auto resolved = cfg.resolved();
    const auto& ofdm = resolved.system.ofdm;
    const auto polar = resolved.polar();

    nlohmann::ordered_json m;
    m["tool"] = "sacsim";
    m["version"] = kToolVersion;
    m["generated_utc"] = timestamp;
    m["scenario"] = resolved.name;
    m["seed"] = resolved.seed;
    m["mode"] = to_string(resolved.mode);

    nlohmann::ordered_json config;
    for (const auto& [key, value] : resolved.entries()) config[key] = value;
    m["config"] = config;

    if (resolved.mode == RunMode::nosac) {
        m["baseline"] =
            "single UE at x = 0 m, one OFDM symbol per frame (M = 1), no azimuth compression, "
            "beamsteering or Doppler correction; numerology, pilots, code and link budget as configured";
    }

    nlohmann::ordered_json derived;
    derived["symbol_duration_s"] = ofdm.symbol_duration_s();
    derived["frame_duration_s"] = ofdm.frame_duration_s();
    derived["processing_gain_db"] = linear_to_db(static_cast<double>(ofdm.symbols));
    derived["info_bits"] = polar.info_bits;
    derived["coded_bits"] = polar.rate_matched_length;
    derived["mother_length"] = polar.mother_length;
    derived["net_bit_rate_bps"] = static_cast<double>(polar.info_bits) / ofdm.frame_duration_s();
    if (ofdm.symbols >= 2) {
        const auto res = resolution_and_ambiguity(resolved.system.window(), resolved.system.carrier,
                                                  resolved.system.orbit);
        derived["aperture_length_m"] = res.aperture_length_m;
        derived["cross_range_resolution_m"] = res.cross_range_resolution_m;
        derived["max_unambiguous_cross_range_m"] = res.max_unambiguous_cross_range_m;
    }
    m["derived"] = derived;

    nlohmann::ordered_json threshold;
    threshold["target_bler"] = 0.1;
    threshold["measured_ptx_dbm"] =
        result.threshold_dbm ? json_number(*result.threshold_dbm) : nlohmann::ordered_json(nullptr);
    threshold["predicted_snr_db_at_measured_ptx"] =
        result.threshold_dbm ? json_number(predicted_snr_db(resolved, *result.threshold_dbm))
                             : nlohmann::ordered_json(nullptr);
    threshold["predicted_snr_db_at_profile_ptx"] =
        json_number(predicted_snr_db(resolved, resolved.profile_ptx_dbm));
    m["threshold"] = threshold;

    nlohmann::ordered_json points = nlohmann::ordered_json::array();
    for (const auto& p : result.curve.points) {
        nlohmann::ordered_json jp;
        jp["ptx_dbm"] = p.ptx_dbm;
        jp["predicted_snr_db"] = json_number(predicted_snr_db(resolved, p.ptx_dbm));
        nlohmann::ordered_json snr = nlohmann::ordered_json::array();
        for (const auto& u : p.ues) snr.push_back(json_number(u.mean_snr_db));
        jp["measured_snr_db"] = snr;
        jp["component_errors"] = p.component_errors;
        points.push_back(jp);
    }
    m["points"] = points;
    m["profile_ptx_dbm"] = result.profile ? json_number(resolved.profile_ptx_dbm)
                                          : nlohmann::ordered_json(nullptr);
    return m.dump(2) + "\n";
}

WrittenFiles write_results(const SweepResult& result, const ScenarioConfig& cfg, const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error(dir.string() + ": " + ec.message());
    WrittenFiles files;
    files.bler_csv = dir / "bler.csv";
    files.mean_bler_csv = dir / "bler_mean.csv";
    files.manifest = dir / "manifest.json";
    write_bler_csv(result.curve, files.bler_csv);
    write_mean_bler_csv(result.curve, files.mean_bler_csv);
    if (result.profile) {
        files.profile_csv = dir / "azimuth_profile.csv";
        write_profile_csv(*result.profile, files.profile_csv);
    }
    write_text(files.manifest, manifest_json(result, cfg, utc_now()));
    return files;
}

CsvTable read_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path.string() + ": cannot open for reading");
    CsvTable table;
    std::string line;
    auto split = [](const std::string& s) {
        std::vector<std::string> cells;
        std::stringstream ss(s);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        return cells;
    };
    if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty file");
    table.header = split(line);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<double> row;
        for (const auto& cell : split(line)) {
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str() || *end != '\0')
                throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": bad number '" + cell + "'");
            row.push_back(v);
        }
        if (row.size() != table.header.size())
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": wrong column count");
        table.rows.push_back(std::move(row));
    }
    return table;
}

}  // namespace sac
