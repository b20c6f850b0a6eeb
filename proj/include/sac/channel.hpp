#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sac/common.hpp"
#include "sac/geometry.hpp"
#include "sac/ofdm.hpp"

namespace sac {

/// Orbit, carrier and OFDM numerology shared by the channel and the receiver.
struct SystemConfig {
    OrbitGeometry orbit;
    CarrierConfig carrier;
    OfdmConfig ofdm;

    AcquisitionWindow window() const { return ofdm.window(orbit); }
    void validate() const {
        orbit.validate();
        carrier.validate();
        ofdm.validate();
    }
};

/// Uplink link budget in logarithmic units, as configured.
struct LinkBudget {
    double tx_gain_dbi = 11.72;
    double rx_gain_dbi = 30.0;
    double path_loss_db = 158.89;
    double atmospheric_loss_db = 0.12;
    double scintillation_loss_db = 4.39;
    double noise_figure_db = 4.0;
    double temperature_k = 290.0;

    double total_loss_db() const { return path_loss_db + atmospheric_loss_db + scintillation_loss_db; }
    double antenna_gain_linear() const { return db_to_linear(tx_gain_dbi + rx_gain_dbi); }
    void validate() const;
};

double free_space_path_loss_db(double distance_m, const CarrierConfig& carrier);

/// Frame-constant amplitude factor 10^(-loss/20); antenna gains excluded.
double attenuation_amplitude(const LinkBudget& budget);

struct UeTransmit {
    std::uint64_t ue_id = 0;
    UePosition position;
    double tx_power_dbm = 0.0;
    std::vector<Complex> samples;

    /// Scales a unit-power baseband stream to the transmit power.
    static UeTransmit scaled(std::uint64_t ue_id, const UePosition& position, double tx_power_dbm,
                             std::span<const Complex> unit_power_samples);
};

/// Thermal noise referenced to the N-subcarrier grid: per-sample variance
/// N * P_eta = k_B * B * T * NF at sample rate B.
struct NoiseModel {
    double per_subcarrier_power_w = 0.0;
    std::size_t subcarriers = 1;
    std::uint64_t seed = 0;

    double variance() const { return static_cast<double>(subcarriers) * per_subcarrier_power_w; }
    static NoiseModel thermal(const LinkBudget& budget, const OfdmConfig& ofdm, std::uint64_t seed);
};

/// Line-of-sight channel seen by the moving satellite. Each sample is scaled
/// by sqrt(Gtx*Grx)*alpha and rotated by the carrier phase at its absolute
/// time. The bulk delay R_UE/c0 is kept only as its per-subcarrier phase
/// ramp (ideal timing), applied as a circular shift within each symbol.
std::vector<Complex> apply_channel(const UeTransmit& tx, const SystemConfig& sys,
                                   const LinkBudget& budget,
                                   PhaseModel phase = PhaseModel::fresnel);

std::vector<Complex> superpose(std::span<const std::vector<Complex>> streams);

/// Adds circular complex Gaussian noise in place; deterministic given the seed.
void add_awgn(std::span<Complex> stream, const NoiseModel& noise);

/// Per-subcarrier response after compression, matched steering and Doppler
/// correction for a UE at `ue` (ideal CSI). With `combined == false` the
/// single-symbol response without synthetic aperture processing is returned.
std::vector<Complex> ideal_subcarrier_response(const UePosition& ue, double tx_power_dbm,
                                               const SystemConfig& sys, const LinkBudget& budget,
                                               bool combined = true);

/// Predicted per-subcarrier SNR after combining (linear), for a processing
/// gain given as a linear factor.
double predicted_snr(double tx_power_dbm, const LinkBudget& budget, const OfdmConfig& ofdm,
                     double processing_gain);

}  // namespace sac
