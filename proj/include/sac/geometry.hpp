#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sac/common.hpp"

// Flat-Earth satellite/UE geometry for a straight pass at constant height.
// Cross-range x runs along the satellite track; the satellite flies from
// x = -L/2 to x = +L/2 during one frame of M repeated OFDM symbols.
namespace sac {

struct OrbitGeometry {
    double height_m = 600e3;
    double velocity_mps = 7820.0;

    void validate() const;
};

struct CarrierConfig {
    double frequency_hz = 3.5e9;

    double wavelength_m() const { return kSpeedOfLight / frequency_hz; }
    void validate() const;
};

/// Synthetic aperture formed by M acquisitions spaced one symbol time apart.
struct AcquisitionWindow {
    std::size_t symbols = 1;
    double symbol_duration_s = 0.0;
    double velocity_mps = 0.0;

    double aperture_length_m() const {
        return velocity_mps * static_cast<double>(symbols) * symbol_duration_s;
    }
    double element_spacing_m() const { return velocity_mps * symbol_duration_s; }
    double frame_duration_s() const { return static_cast<double>(symbols) * symbol_duration_s; }
};

struct UePosition {
    double x_m = 0.0;
    double range_m = 0.0;    // slant range from the aperture centre
    double azimuth_rad = 0.0;  // exact angle, asin(x / range)

    static UePosition at(double x_m, const OrbitGeometry& orbit);
};

enum class PhaseModel { exact, fresnel };

double satellite_x(double t, const AcquisitionWindow& win);

double range_at(double t, const OrbitGeometry& orbit, const AcquisitionWindow& win, double x_ue);

/// Unwrapped carrier phase 2*pi*R(t)/lambda, either from the exact range or
/// its quadratic (Fresnel) expansion about the closest approach.
double carrier_phase(double t, PhaseModel model, const OrbitGeometry& orbit,
                     const CarrierConfig& carrier, const AcquisitionWindow& win, double x_ue);

/// Phase beyond the constant 2*pi*R0/lambda, 2*pi*(R(t) - R0)/lambda, computed
/// without cancellation. Sample-level signal processing uses this plus
/// `carrier_phase_constant` to keep sub-nanoradian precision.
double carrier_phase_excess(double t, PhaseModel model, const OrbitGeometry& orbit,
                            const CarrierConfig& carrier, const AcquisitionWindow& win, double x_ue);

/// 2*pi*R0/lambda reduced modulo 2*pi.
double carrier_phase_constant(const OrbitGeometry& orbit, const CarrierConfig& carrier);

/// Instantaneous Doppler of the Fresnel phase history (linear chirp in t).
double doppler_true(double t, const OrbitGeometry& orbit, const CarrierConfig& carrier,
                    const AcquisitionWindow& win, double x_ue);

/// Constant Doppler left after compressing against the x = 0 reference.
/// Throws std::domain_error when |x_ue| >= R0/10.
double doppler_after_compression(double x_ue, const OrbitGeometry& orbit,
                                 const CarrierConfig& carrier);

/// Small-angle azimuth estimate from a residual Doppler.
double azimuth_from_doppler(double doppler_hz, const OrbitGeometry& orbit,
                            const CarrierConfig& carrier);

struct Resolution {
    double doppler_resolution_hz = 0.0;
    double azimuth_resolution_rad = 0.0;
    double max_unambiguous_azimuth_rad = 0.0;  // symmetric, +/-
    double cross_range_resolution_m = 0.0;
    double max_unambiguous_cross_range_m = 0.0;  // symmetric, +/-
    double aperture_length_m = 0.0;
};

Resolution resolution_and_ambiguity(const AcquisitionWindow& win, const CarrierConfig& carrier,
                                    const OrbitGeometry& orbit);

/// NR numerology used by the planner. Timing uses the standard normal-CP
/// duration (144/2048 of the useful symbol), not an integer sample count.
struct Numerology {
    double subcarrier_spacing_hz = 15e3;
    double bandwidth_hz = 4.5e6;

    static Numerology nr(int mu, double bandwidth_hz);
    double subcarriers() const { return bandwidth_hz / subcarrier_spacing_hz; }
    double useful_duration_s() const { return 1.0 / subcarrier_spacing_hz; }
    double cp_duration_s() const { return useful_duration_s() * 144.0 / 2048.0; }
    double symbol_duration_s() const { return useful_duration_s() + cp_duration_s(); }
};

struct PayloadFormat {
    double pilot_fraction = 0.25;
    int bits_per_symbol = 2;
    double code_rate = 2.0 / 3.0;
};

struct PlanResult {
    std::size_t symbols = 0;
    double processing_gain_db = 0.0;
    double required_aperture_m = 0.0;
    double aperture_length_m = 0.0;
    double symbol_duration_s = 0.0;
    double info_bits_per_frame = 0.0;
    double net_bit_rate_bps = 0.0;
    std::vector<std::string> warnings;
};

/// Smallest number of repeated symbols reaching a cross-range resolution.
/// Throws std::invalid_argument for non-positive targets or when the needed
/// aperture is no longer small against the orbit height (L >= R0/10).
PlanResult plan_parameters(double target_cross_range_m, const Numerology& numerology,
                           const OrbitGeometry& orbit, const CarrierConfig& carrier,
                           const PayloadFormat& payload = {});

}  // namespace sac
