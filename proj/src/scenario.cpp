#include "sac/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace sac {
namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_double(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
        throw ConfigError("not a number: '" + std::string(s) + "'");
    return v;
}

std::uint64_t parse_unsigned(std::string_view s) {
    s = trim(s);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw ConfigError("not a non-negative integer: '" + std::string(s) + "'");
    return v;
}

bool parse_bool(std::string_view s) {
    s = trim(s);
    if (s == "true" || s == "on" || s == "1") return true;
    if (s == "false" || s == "off" || s == "0") return false;
    throw ConfigError("not a boolean: '" + std::string(s) + "'");
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string format_list(const std::vector<double>& values) {
    std::string out = "[";
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ", ";
        out += format_double(values[i]);
    }
    return out + "]";
}

template <typename Enum>
Enum parse_enum(std::string_view s, std::initializer_list<std::pair<std::string_view, Enum>> names) {
    s = trim(s);
    for (const auto& [name, value] : names)
        if (s == name) return value;
    std::string allowed;
    for (const auto& [name, value] : names) allowed += (allowed.empty() ? "" : "|") + std::string(name);
    throw ConfigError("expected one of " + allowed + ", got '" + std::string(s) + "'");
}

using Setter = std::function<void(ScenarioConfig&, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters() {
    static const std::map<std::string, Setter, std::less<>> table = {
        {"scenario.name", [](ScenarioConfig& c, std::string_view v) { c.name = std::string(trim(v)); }},
        {"orbit.r0_m", [](ScenarioConfig& c, std::string_view v) { c.system.orbit.height_m = parse_double(v); }},
        {"orbit.v_mps", [](ScenarioConfig& c, std::string_view v) { c.system.orbit.velocity_mps = parse_double(v); }},
        {"carrier.fc_hz", [](ScenarioConfig& c, std::string_view v) { c.system.carrier.frequency_hz = parse_double(v); }},
        {"ofdm.n_subcarriers", [](ScenarioConfig& c, std::string_view v) { c.system.ofdm.subcarriers = parse_unsigned(v); }},
        {"ofdm.delta_f_hz", [](ScenarioConfig& c, std::string_view v) { c.system.ofdm.subcarrier_spacing_hz = parse_double(v); }},
        {"ofdm.n_cp", [](ScenarioConfig& c, std::string_view v) { c.system.ofdm.cp_length = parse_unsigned(v); }},
        {"ofdm.m_symbols", [](ScenarioConfig& c, std::string_view v) { c.system.ofdm.symbols = parse_unsigned(v); }},
        {"pilots.spacing", [](ScenarioConfig& c, std::string_view v) { c.pilot_spacing = parse_unsigned(v); }},
        {"fec.code_rate", [](ScenarioConfig& c, std::string_view v) { c.code_rate = parse_double(v); }},
        {"fec.crc_bits", [](ScenarioConfig& c, std::string_view v) { c.crc_bits = parse_unsigned(v); }},
        {"fec.list_size", [](ScenarioConfig& c, std::string_view v) { c.list_size = parse_unsigned(v); }},
        {"fec.construction", [](ScenarioConfig& c, std::string_view v) {
             c.construction = parse_enum<PolarConstruction>(
                 v, {{"nr", PolarConstruction::nr_sequence}, {"ga", PolarConstruction::gaussian_approximation}});
         }},
        {"fec.design_snr_db", [](ScenarioConfig& c, std::string_view v) { c.design_snr_db = parse_double(v); }},
        {"budget.g_tx_dbi", [](ScenarioConfig& c, std::string_view v) { c.budget.tx_gain_dbi = parse_double(v); }},
        {"budget.g_rx_dbi", [](ScenarioConfig& c, std::string_view v) { c.budget.rx_gain_dbi = parse_double(v); }},
        {"budget.path_loss_db", [](ScenarioConfig& c, std::string_view v) { c.budget.path_loss_db = parse_double(v); }},
        {"budget.atmospheric_loss_db", [](ScenarioConfig& c, std::string_view v) { c.budget.atmospheric_loss_db = parse_double(v); }},
        {"budget.scintillation_loss_db", [](ScenarioConfig& c, std::string_view v) { c.budget.scintillation_loss_db = parse_double(v); }},
        {"budget.nf_db", [](ScenarioConfig& c, std::string_view v) { c.budget.noise_figure_db = parse_double(v); }},
        {"budget.t_k", [](ScenarioConfig& c, std::string_view v) { c.budget.temperature_k = parse_double(v); }},
        {"sweep.ptx_dbm", [](ScenarioConfig& c, std::string_view v) { c.ptx_dbm = parse_number_list(v); }},
        {"sweep.profile_ptx_dbm", [](ScenarioConfig& c, std::string_view v) { c.profile_ptx_dbm = parse_double(v); }},
        {"run.trials", [](ScenarioConfig& c, std::string_view v) { c.trials = parse_unsigned(v); }},
        {"run.seed", [](ScenarioConfig& c, std::string_view v) { c.seed = parse_unsigned(v); }},
        {"run.mode", [](ScenarioConfig& c, std::string_view v) {
             c.mode = parse_enum<RunMode>(v, {{"sac", RunMode::sac}, {"nosac", RunMode::nosac}});
         }},
        {"run.csi", [](ScenarioConfig& c, std::string_view v) {
             c.csi = parse_enum<CsiMode>(v, {{"ideal", CsiMode::ideal}, {"pilot", CsiMode::pilot}});
         }},
        {"run.estimation", [](ScenarioConfig& c, std::string_view v) {
             c.estimation = parse_enum<DopplerEstimation>(
                 v, {{"grid", DopplerEstimation::grid}, {"interpolated", DopplerEstimation::interpolated}});
         }},
        {"run.zero_padding", [](ScenarioConfig& c, std::string_view v) { c.zero_padding = parse_unsigned(v); }},
        {"run.noise", [](ScenarioConfig& c, std::string_view v) { c.noise = parse_bool(v); }},
        {"run.channel_phase", [](ScenarioConfig& c, std::string_view v) {
             c.channel_phase = parse_enum<PhaseModel>(v, {{"exact", PhaseModel::exact}, {"fresnel", PhaseModel::fresnel}});
         }},
    };
    return table;
}

// ue[<i>].<field>
bool apply_ue_key(ScenarioConfig& cfg, std::string_view key, std::string_view value) {
    if (!key.starts_with("ue[")) return false;
    const auto close = key.find("].");
    if (close == std::string_view::npos) throw ConfigError("malformed UE key");
    const auto index = parse_unsigned(key.substr(3, close - 3));
    if (index > 1024) throw ConfigError("UE index too large");
    const auto field = key.substr(close + 2);
    if (cfg.ues.size() <= index) {
        const std::size_t old = cfg.ues.size();
        cfg.ues.resize(index + 1);
        for (std::size_t i = old; i <= index; ++i) cfg.ues[i].id = i;
    }
    auto& ue = cfg.ues[index];
    if (field == "id") {
        ue.id = parse_unsigned(value);
    } else if (field == "x_m") {
        ue.x_m = parse_double(value);
    } else if (field == "ptx_dbm") {
        ue.ptx_dbm = parse_double(value);
    } else {
        throw ConfigError("unknown UE field '" + std::string(field) + "'");
    }
    return true;
}

}  // namespace

std::string to_string(RunMode mode) { return mode == RunMode::sac ? "sac" : "nosac"; }
std::string to_string(CsiMode mode) { return mode == CsiMode::ideal ? "ideal" : "pilot"; }
std::string to_string(DopplerEstimation mode) {
    return mode == DopplerEstimation::grid ? "grid" : "interpolated";
}
std::string to_string(PhaseModel model) { return model == PhaseModel::exact ? "exact" : "fresnel"; }
std::string to_string(PolarConstruction construction) {
    return construction == PolarConstruction::nr_sequence ? "nr" : "ga";
}

std::vector<double> parse_number_list(std::string_view text) {
    auto s = trim(text);
    if (s.empty()) throw ConfigError("empty value");
    if (s.front() != '[') return {parse_double(s)};
    if (s.back() != ']') throw ConfigError("unterminated list");
    s = trim(s.substr(1, s.size() - 2));
    std::vector<double> out;
    if (s.empty()) return out;

    if (const auto dots = s.find(".."); dots != std::string_view::npos) {
        const auto step_pos = s.find("step");
        if (step_pos == std::string_view::npos || step_pos < dots)
            throw ConfigError("range needs the form [a..b step s]");
        const double a = parse_double(s.substr(0, dots));
        const double b = parse_double(s.substr(dots + 2, step_pos - dots - 2));
        const double step = parse_double(s.substr(step_pos + 4));
        if (!(step > 0.0)) throw ConfigError("range step must be > 0");
        if (b < a) throw ConfigError("range end is below its start");
        const auto count = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9)) + 1;
        if (count > 100000) throw ConfigError("range has too many points");
        for (std::size_t i = 0; i < count; ++i) {
            // Snap to a 1e-9 grid so that decimal steps print cleanly.
            const double v = a + static_cast<double>(i) * step;
            out.push_back(std::round(v * 1e9) / 1e9);
        }
        return out;
    }

    std::size_t start = 0;
    while (start <= s.size()) {
        const auto comma = s.find(',', start);
        const auto item = s.substr(start, comma == std::string_view::npos ? s.npos : comma - start);
        out.push_back(parse_double(item));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::size_t ScenarioConfig::coded_bits() const {
    const auto layout = PilotLayout::comb(system.ofdm.subcarriers, pilot_spacing, 0);
    return 2 * layout.data_count();
}

PolarConfig ScenarioConfig::polar() const {
    auto cfg = PolarConfig::for_block(coded_bits(), code_rate);
    cfg.crc_bits = crc_bits;
    cfg.list_size = list_size;
    cfg.construction = construction;
    cfg.design_snr_db = design_snr_db;
    return cfg;
}

void ScenarioConfig::validate() const {
    auto check = [](const char* field, auto&& fn) {
        try {
            fn();
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError(std::string(field) + ": " + e.what());
        }
    };
    check("system", [&] { system.validate(); });
    check("budget", [&] { budget.validate(); });
    check("pilots", [&] { (void)PilotLayout::comb(system.ofdm.subcarriers, pilot_spacing, 0); });
    if (!(code_rate > 0.0 && code_rate < 1.0)) throw ConfigError("fec.code_rate must be in (0, 1)");
    check("fec", [&] { polar().validate(); });
    if (list_size < 1) throw ConfigError("fec.list_size must be >= 1");
    if (ues.empty()) throw ConfigError("at least one UE is required");
    if (trials < 1) throw ConfigError("run.trials must be >= 1");
    if (zero_padding < 1) throw ConfigError("run.zero_padding must be >= 1");
    for (std::size_t i = 0; i < ues.size(); ++i) {
        if (std::abs(ues[i].x_m) >= system.orbit.height_m / 10.0)
            throw ConfigError("ue[" + std::to_string(i) + "].x_m is outside |x| < R0/10");
        for (std::size_t j = 0; j < i; ++j)
            if (ues[i].id == ues[j].id)
                throw ConfigError("ue[" + std::to_string(i) + "].id duplicates ue[" + std::to_string(j) + "]");
    }
    if (mode == RunMode::sac && ues.size() > system.ofdm.symbols)
        throw ConfigError("more UEs than Doppler bins");
}

ScenarioConfig ScenarioConfig::baseline() const {
    ScenarioConfig out = *this;
    out.mode = RunMode::nosac;
    out.system.ofdm.symbols = 1;
    out.zero_padding = 1;
    UeConfig ue = ues.empty() ? UeConfig{} : ues.front();
    ue.x_m = 0.0;
    out.ues = {ue};
    return out;
}

std::vector<std::pair<std::string, std::string>> ScenarioConfig::entries() const {
    std::vector<std::pair<std::string, std::string>> e;
    auto num = [&](const char* key, double v) { e.emplace_back(key, format_double(v)); };
    auto count = [&](const char* key, std::uint64_t v) { e.emplace_back(key, std::to_string(v)); };
    e.emplace_back("scenario.name", name);
    num("orbit.r0_m", system.orbit.height_m);
    num("orbit.v_mps", system.orbit.velocity_mps);
    num("carrier.fc_hz", system.carrier.frequency_hz);
    count("ofdm.n_subcarriers", system.ofdm.subcarriers);
    num("ofdm.delta_f_hz", system.ofdm.subcarrier_spacing_hz);
    count("ofdm.n_cp", system.ofdm.cp_length);
    count("ofdm.m_symbols", system.ofdm.symbols);
    count("pilots.spacing", pilot_spacing);
    num("fec.code_rate", code_rate);
    count("fec.crc_bits", crc_bits);
    count("fec.list_size", list_size);
    e.emplace_back("fec.construction", to_string(construction));
    num("fec.design_snr_db", design_snr_db);
    num("budget.g_tx_dbi", budget.tx_gain_dbi);
    num("budget.g_rx_dbi", budget.rx_gain_dbi);
    num("budget.path_loss_db", budget.path_loss_db);
    num("budget.atmospheric_loss_db", budget.atmospheric_loss_db);
    num("budget.scintillation_loss_db", budget.scintillation_loss_db);
    num("budget.nf_db", budget.noise_figure_db);
    num("budget.t_k", budget.temperature_k);
    for (std::size_t i = 0; i < ues.size(); ++i) {
        const std::string prefix = "ue[" + std::to_string(i) + "].";
        e.emplace_back(prefix + "id", std::to_string(ues[i].id));
        e.emplace_back(prefix + "x_m", format_double(ues[i].x_m));
        if (ues[i].ptx_dbm) e.emplace_back(prefix + "ptx_dbm", format_double(*ues[i].ptx_dbm));
    }
    e.emplace_back("sweep.ptx_dbm", format_list(ptx_dbm));
    num("sweep.profile_ptx_dbm", profile_ptx_dbm);
    count("run.trials", trials);
    count("run.seed", seed);
    e.emplace_back("run.mode", to_string(mode));
    e.emplace_back("run.csi", to_string(csi));
    e.emplace_back("run.estimation", to_string(estimation));
    count("run.zero_padding", zero_padding);
    e.emplace_back("run.noise", noise ? "true" : "false");
    e.emplace_back("run.channel_phase", to_string(channel_phase));
    return e;
}

std::string ScenarioConfig::to_text() const {
    std::string out;
    for (const auto& [key, value] : entries()) out += key + " = " + value + "\n";
    return out;
}

ScenarioConfig parse_scenario(std::string_view text) {
    ScenarioConfig cfg;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto end = text.find('\n', pos);
        auto line = text.substr(pos, end == std::string_view::npos ? text.npos : end - pos);
        pos = (end == std::string_view::npos) ? text.size() + 1 : end + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        try {
            if (eq == std::string_view::npos) throw ConfigError("expected 'key = value'");
            const auto key = trim(line.substr(0, eq));
            const auto value = trim(line.substr(eq + 1));
            if (value.empty()) throw ConfigError("missing value for '" + std::string(key) + "'");
            if (apply_ue_key(cfg, key, value)) continue;
            const auto it = setters().find(key);
            if (it == setters().end()) throw ConfigError("unknown key '" + std::string(key) + "'");
            it->second(cfg, value);
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string() + ": cannot open config file");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_scenario(buf.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

}  // namespace sac
