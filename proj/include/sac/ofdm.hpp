#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sac/common.hpp"
#include "sac/geometry.hpp"

namespace sac {

struct OfdmConfig {
    std::size_t subcarriers = 300;
    std::size_t cp_length = 21;
    double subcarrier_spacing_hz = 15e3;
    std::size_t symbols = 93;

    /// CP length at the NR normal-CP ratio 144/2048, rounded to whole samples.
    static OfdmConfig with_normal_cp(std::size_t subcarriers, double subcarrier_spacing_hz,
                                     std::size_t symbols);

    double bandwidth_hz() const { return static_cast<double>(subcarriers) * subcarrier_spacing_hz; }
    double useful_duration_s() const { return 1.0 / subcarrier_spacing_hz; }
    double cp_duration_s() const { return static_cast<double>(cp_length) / bandwidth_hz(); }
    double symbol_duration_s() const { return useful_duration_s() + cp_duration_s(); }
    double frame_duration_s() const { return static_cast<double>(symbols) * symbol_duration_s(); }
    std::size_t samples_per_symbol() const { return subcarriers + cp_length; }
    std::size_t frame_samples() const { return symbols * samples_per_symbol(); }

    /// Absolute time of CP-stripped sample n of symbol m.
    double sample_time(std::size_t n, std::size_t m) const {
        return static_cast<double>(m) * symbol_duration_s() + cp_duration_s() +
               static_cast<double>(n) / bandwidth_hz();
    }

    AcquisitionWindow window(const OrbitGeometry& orbit) const {
        return AcquisitionWindow{symbols, symbol_duration_s(), orbit.velocity_mps};
    }

    void validate() const;
};

/// Regular pilot comb anchored at subcarrier 0 carrying a known QPSK
/// sequence derived from the UE identifier.
struct PilotLayout {
    std::size_t spacing = 4;
    std::vector<std::size_t> indices;
    std::vector<Complex> symbols;
    std::vector<std::size_t> data_indices;

    static PilotLayout comb(std::size_t subcarriers, std::size_t spacing, std::uint64_t ue_id);
    std::size_t data_count() const { return data_indices.size(); }
};

enum class Domain { time, frequency };

/// N x M matrix of samples or symbols, one OFDM symbol per column.
class FrameGrid {
public:
    FrameGrid() = default;
    FrameGrid(std::size_t rows, std::size_t cols, Domain domain)
        : rows_(rows), cols_(cols), domain_(domain), data_(rows * cols) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    Domain domain() const { return domain_; }

    Complex& operator()(std::size_t n, std::size_t m) { return data_[m * rows_ + n]; }
    const Complex& operator()(std::size_t n, std::size_t m) const { return data_[m * rows_ + n]; }

    std::span<Complex> column(std::size_t m) { return {data_.data() + m * rows_, rows_}; }
    std::span<const Complex> column(std::size_t m) const {
        return {data_.data() + m * rows_, rows_};
    }
    std::span<const Complex> values() const { return data_; }

    double energy() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    Domain domain_ = Domain::time;
    std::vector<Complex> data_;
};

/// Gray QPSK, unit average power: bit pair (b0, b1) -> ((1-2b0) + j(1-2b1))/sqrt(2).
std::vector<Complex> map_bits(std::span<const std::uint8_t> bits);

/// Bit LLRs log(P(b=0)/P(b=1)) for Gray QPSK: 2*sqrt(2)*component/noise_var.
std::vector<double> llr_demap(std::span<const Complex> symbols, double noise_var);
std::vector<double> llr_demap(std::span<const Complex> symbols,
                              std::span<const double> noise_var);

/// Frequency-domain frame with every column carrying the same symbol.
FrameGrid build_frame(std::span<const Complex> data_symbols, const PilotLayout& pilots,
                      const OfdmConfig& cfg);

/// Column-wise unitary IDFT, CP prepended, serialised.
std::vector<Complex> ofdm_modulate(const FrameGrid& grid, const OfdmConfig& cfg);

/// Serial stream -> N x M time-domain grid with the CP removed.
FrameGrid strip_cp(std::span<const Complex> samples, const OfdmConfig& cfg);

/// Unitary DFT of one CP-stripped symbol.
std::vector<Complex> ofdm_demod_column(std::span<const Complex> samples, std::size_t subcarriers);

}  // namespace sac
