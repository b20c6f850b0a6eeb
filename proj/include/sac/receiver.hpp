#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "sac/channel.hpp"
#include "sac/common.hpp"
#include "sac/ofdm.hpp"

// Synthetic aperture receiver: azimuth compression against the x = 0 phase
// history, Doppler profiling across the M repeated symbols, peak detection,
// beamsteering, Doppler correction, pilot channel estimation and ZF.
namespace sac {

enum class DopplerEstimation { grid, interpolated };
enum class CsiMode { ideal, pilot };

/// Per-bin column norms of the Doppler transform with their physical axes.
/// Bins are fractional when the transform is zero-padded.
struct AzimuthProfile {
    std::size_t symbols = 0;
    std::size_t zero_padding = 1;
    std::vector<double> norms;
    std::vector<double> bins;
    std::vector<double> doppler_hz;
    std::vector<double> angle_rad;
    std::vector<double> cross_range_m;
};

struct UeDetection {
    std::size_t index = 0;
    double bin = 0.0;
    double doppler_hz = 0.0;
    double azimuth_rad = 0.0;
    double cross_range_m = 0.0;
    double peak_magnitude = 0.0;

    static UeDetection from_doppler(double doppler_hz, const SystemConfig& sys);
    /// Ground-truth detection for a known UE position.
    static UeDetection from_position(double x_m, const SystemConfig& sys);
};

struct ChannelEstimate {
    std::vector<Complex> response;
    std::vector<Complex> equalizer;

    static ChannelEstimate known(std::span<const Complex> response);
};

struct EqualizedSymbols {
    std::vector<Complex> symbols;
    std::vector<Complex> equalizer;
    std::vector<double> noise_variance;
};

struct UeReception {
    EqualizedSymbols equalized;
    std::vector<Complex> data_symbols;
    std::vector<double> llrs;
};

class UnreliablePilotError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DetectionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

FrameGrid azimuth_compress(const FrameGrid& r, const SystemConfig& sys);

/// Normalised transform across the M symbols for every sample row, then the
/// Euclidean norm over rows. `zero_padding` > 1 oversamples the Doppler axis.
AzimuthProfile doppler_profile(const FrameGrid& r_az, const SystemConfig& sys,
                               std::size_t zero_padding = 1);

/// The `count` strongest local maxima, each suppressing its neighbours
/// within one Doppler bin before the next pick. Sorted by magnitude.
std::vector<UeDetection> detect_ues(const AzimuthProfile& profile, std::size_t count,
                                    const SystemConfig& sys, bool interpolate = false);

std::vector<Complex> steering_vector(double azimuth_rad, const SystemConfig& sys);
std::vector<Complex> beamsteer(const FrameGrid& r_az, double azimuth_rad, const SystemConfig& sys);

std::vector<Complex> doppler_correct(std::span<const Complex> combined, double doppler_hz,
                                     const OfdmConfig& ofdm);

/// Least-squares pilot estimates, interpolated linearly on real and imaginary
/// parts after removing the common phase slope (bulk-delay ramp) across the
/// comb; nearest-pilot extrapolation at the band edges.
ChannelEstimate estimate_channel(std::span<const Complex> freq_symbols, const PilotLayout& pilots);

EqualizedSymbols zf_equalize(std::span<const Complex> freq_symbols,
                             std::span<const Complex> equalizer, double noise_var);

/// Beamsteer, Doppler-correct, demodulate, equalise and demap one UE from an
/// already compressed frame. An empty `ideal_response` selects pilot CSI.
UeReception receive_compressed(const FrameGrid& r_az, const UeDetection& detection,
                               const PilotLayout& pilots, const SystemConfig& sys,
                               double noise_var, std::span<const Complex> ideal_response = {});

/// Full chain from the CP-stripped time-domain frame.
UeReception receive_ue(const FrameGrid& r, const UeDetection& detection, const PilotLayout& pilots,
                       const SystemConfig& sys, double noise_var,
                       std::span<const Complex> ideal_response = {});

/// Conventional single-symbol receiver without synthetic aperture processing.
UeReception receive_single_symbol(std::span<const Complex> samples, const PilotLayout& pilots,
                                  double noise_var, std::span<const Complex> ideal_response = {});

}  // namespace sac
