#include "sac/ofdm.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "sac/dft.hpp"

namespace sac {

OfdmConfig OfdmConfig::with_normal_cp(std::size_t subcarriers, double subcarrier_spacing_hz,
                                      std::size_t symbols) {
    OfdmConfig cfg;
    cfg.subcarriers = subcarriers;
    cfg.cp_length = static_cast<std::size_t>(
        std::lround(static_cast<double>(subcarriers) * 144.0 / 2048.0));
    cfg.subcarrier_spacing_hz = subcarrier_spacing_hz;
    cfg.symbols = symbols;
    return cfg;
}

void OfdmConfig::validate() const {
    if (subcarriers < 2) throw std::invalid_argument("ofdm: need at least two subcarriers");
    if (cp_length >= subcarriers) throw std::invalid_argument("ofdm: CP must be shorter than N");
    if (!(subcarrier_spacing_hz > 0.0)) throw std::invalid_argument("ofdm: spacing must be > 0");
    if (symbols < 1) throw std::invalid_argument("ofdm: need at least one symbol");
}

PilotLayout PilotLayout::comb(std::size_t subcarriers, std::size_t spacing, std::uint64_t ue_id) {
    if (spacing < 2 || spacing > subcarriers)
        throw std::invalid_argument("pilot spacing must be in [2, N]");
    PilotLayout layout;
    layout.spacing = spacing;
    for (std::size_t k = 0; k < subcarriers; ++k) {
        if (k % spacing == 0)
            layout.indices.push_back(k);
        else
            layout.data_indices.push_back(k);
    }
    std::mt19937_64 rng(0x5EED'0000'0000'0000ULL ^ ue_id);
    std::vector<std::uint8_t> bits(2 * layout.indices.size());
    for (auto& b : bits) b = static_cast<std::uint8_t>(rng() >> 63);
    layout.symbols = map_bits(bits);
    return layout;
}

double FrameGrid::energy() const {
    double e = 0.0;
    for (const auto& v : data_) e += std::norm(v);
    return e;
}

std::vector<Complex> map_bits(std::span<const std::uint8_t> bits) {
    if (bits.size() % 2 != 0) throw std::invalid_argument("map_bits: odd number of bits");
    const double a = 1.0 / std::sqrt(2.0);
    std::vector<Complex> out(bits.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = {bits[2 * i] ? -a : a, bits[2 * i + 1] ? -a : a};
    }
    return out;
}

std::vector<double> llr_demap(std::span<const Complex> symbols, double noise_var) {
    std::vector<double> var(symbols.size(), noise_var);
    return llr_demap(symbols, var);
}

std::vector<double> llr_demap(std::span<const Complex> symbols,
                              std::span<const double> noise_var) {
    if (symbols.size() != noise_var.size())
        throw std::invalid_argument("llr_demap: variance count mismatch");
    const double scale = 2.0 * std::sqrt(2.0);
    std::vector<double> llrs(2 * symbols.size());
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        if (!(noise_var[i] > 0.0)) throw std::invalid_argument("llr_demap: noise_var must be > 0");
        llrs[2 * i] = scale * symbols[i].real() / noise_var[i];
        llrs[2 * i + 1] = scale * symbols[i].imag() / noise_var[i];
    }
    return llrs;
}

FrameGrid build_frame(std::span<const Complex> data_symbols, const PilotLayout& pilots,
                      const OfdmConfig& cfg) {
    if (data_symbols.size() != pilots.data_count())
        throw std::invalid_argument("build_frame: data symbol count does not match layout");
    if (pilots.indices.size() + pilots.data_indices.size() != cfg.subcarriers)
        throw std::invalid_argument("build_frame: pilot layout built for another N");

    std::vector<Complex> column(cfg.subcarriers);
    for (std::size_t i = 0; i < pilots.indices.size(); ++i)
        column[pilots.indices[i]] = pilots.symbols[i];
    for (std::size_t i = 0; i < pilots.data_indices.size(); ++i)
        column[pilots.data_indices[i]] = data_symbols[i];

    FrameGrid grid(cfg.subcarriers, cfg.symbols, Domain::frequency);
    for (std::size_t m = 0; m < cfg.symbols; ++m)
        std::copy(column.begin(), column.end(), grid.column(m).begin());
    return grid;
}

std::vector<Complex> ofdm_modulate(const FrameGrid& grid, const OfdmConfig& cfg) {
    if (grid.domain() != Domain::frequency)
        throw std::invalid_argument("ofdm_modulate: expected a frequency-domain grid");
    if (grid.rows() != cfg.subcarriers || grid.cols() != cfg.symbols)
        throw std::invalid_argument("ofdm_modulate: grid shape does not match config");

    const std::size_t cp = cfg.cp_length;
    std::vector<Complex> out;
    out.reserve(cfg.frame_samples());
    for (std::size_t m = 0; m < cfg.symbols; ++m) {
        const auto time = unitary_idft(grid.column(m));
        out.insert(out.end(), time.end() - static_cast<std::ptrdiff_t>(cp), time.end());
        out.insert(out.end(), time.begin(), time.end());
    }
    return out;
}

FrameGrid strip_cp(std::span<const Complex> samples, const OfdmConfig& cfg) {
    if (samples.size() != cfg.frame_samples())
        throw std::invalid_argument("strip_cp: stream length does not match config");
    FrameGrid grid(cfg.subcarriers, cfg.symbols, Domain::time);
    const std::size_t stride = cfg.samples_per_symbol();
    for (std::size_t m = 0; m < cfg.symbols; ++m) {
        auto src = samples.subspan(m * stride + cfg.cp_length, cfg.subcarriers);
        std::copy(src.begin(), src.end(), grid.column(m).begin());
    }
    return grid;
}

std::vector<Complex> ofdm_demod_column(std::span<const Complex> samples, std::size_t subcarriers) {
    if (samples.size() != subcarriers)
        throw std::invalid_argument("ofdm_demod_column: expected exactly N samples");
    return unitary_dft(samples);
}

}  // namespace sac
