#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

// CRC-aided polar code: Arikan kernel in natural order, shortening of the
// trailing codeword bits, frozen set from the NR reliability sequence (or a
// Gaussian-approximation construction) and successive-cancellation list
// decoding.
namespace sac {

enum class PolarConstruction { nr_sequence, gaussian_approximation };

struct PolarConfig {
    std::size_t info_bits = 300;
    std::size_t crc_bits = 11;
    std::size_t mother_length = 512;
    std::size_t rate_matched_length = 450;
    std::size_t list_size = 8;
    PolarConstruction construction = PolarConstruction::nr_sequence;
    double design_snr_db = 0.0;  // Es/N0 for the Gaussian-approximation construction

    /// Code sized to fill `coded_bits` at the given rate, smallest mother length.
    static PolarConfig for_block(std::size_t coded_bits, double rate);

    double code_rate() const {
        return static_cast<double>(info_bits) / static_cast<double>(rate_matched_length);
    }
    void validate() const;
};

/// CRC remainder (MSB first) with the NR generator polynomials.
/// Supported lengths: 6, 11, 16, 24.
std::vector<std::uint8_t> crc_remainder(std::span<const std::uint8_t> bits, std::size_t length);

struct DecodeResult {
    std::vector<std::uint8_t> info_bits;
    bool crc_ok = false;
};

class PolarCode {
public:
    explicit PolarCode(PolarConfig cfg);

    const PolarConfig& config() const { return cfg_; }
    /// Sorted leaf indices carrying info + CRC bits.
    const std::vector<std::size_t>& info_positions() const { return info_positions_; }
    const std::vector<std::uint8_t>& frozen_mask() const { return frozen_; }

    std::vector<std::uint8_t> encode(std::span<const std::uint8_t> info_bits) const;

    /// LLRs follow log(P(0)/P(1)); throws std::invalid_argument on non-finite input.
    DecodeResult decode(std::span<const double> llrs) const;

private:
    PolarConfig cfg_;
    std::size_t stages_ = 0;
    std::vector<std::uint8_t> frozen_;
    std::vector<std::size_t> info_positions_;
};

/// Bit indices 0..1023 in ascending reliability.
const std::array<std::uint16_t, 1024>& nr_reliability_sequence();

/// Bit-channel reliabilities (mean LLR) by Gaussian approximation. Positions
/// with an infinite channel mean are passed as `known`.
std::vector<double> gaussian_approximation(std::size_t mother_length, double channel_mean,
                                           std::span<const std::uint8_t> known);

}  // namespace sac
