#include "sac/channel.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "sac/dft.hpp"

namespace sac {
namespace {

// exp(-j*2*pi*k*d/N) for k = 0..N-1, with the product reduced modulo N
// before scaling to keep the argument small.
std::vector<Complex> delay_ramp(double delay_samples, std::size_t n) {
    std::vector<Complex> ramp(n);
    const double nn = static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double turns = std::fmod(static_cast<double>(k) * delay_samples, nn) / nn;
        ramp[k] = std::polar(1.0, -2.0 * kPi * turns);
    }
    return ramp;
}

double bulk_delay_samples(const UePosition& ue, const OfdmConfig& ofdm) {
    return ue.range_m / kSpeedOfLight * ofdm.bandwidth_hz();
}

}  // namespace

void LinkBudget::validate() const {
    if (!(temperature_k > 0.0)) throw std::invalid_argument("budget: temperature must be > 0");
}

double free_space_path_loss_db(double distance_m, const CarrierConfig& carrier) {
    return 20.0 * std::log10(4.0 * kPi * distance_m / carrier.wavelength_m());
}

double attenuation_amplitude(const LinkBudget& budget) {
    return std::pow(10.0, -budget.total_loss_db() / 20.0);
}

UeTransmit UeTransmit::scaled(std::uint64_t ue_id, const UePosition& position,
                              double tx_power_dbm, std::span<const Complex> unit_power_samples) {
    UeTransmit tx;
    tx.ue_id = ue_id;
    tx.position = position;
    tx.tx_power_dbm = tx_power_dbm;
    const double amplitude = std::sqrt(dbm_to_watts(tx_power_dbm));
    tx.samples.reserve(unit_power_samples.size());
    for (const auto& s : unit_power_samples) tx.samples.push_back(amplitude * s);
    return tx;
}

NoiseModel NoiseModel::thermal(const LinkBudget& budget, const OfdmConfig& ofdm,
                               std::uint64_t seed) {
    NoiseModel noise;
    noise.per_subcarrier_power_w = kBoltzmann * ofdm.subcarrier_spacing_hz * budget.temperature_k *
                                   db_to_linear(budget.noise_figure_db);
    noise.subcarriers = ofdm.subcarriers;
    noise.seed = seed;
    return noise;
}

std::vector<Complex> apply_channel(const UeTransmit& tx, const SystemConfig& sys,
                                   const LinkBudget& budget, PhaseModel phase) {
    const auto& ofdm = sys.ofdm;
    if (tx.samples.size() != ofdm.frame_samples())
        throw std::invalid_argument("apply_channel: stream length does not match the frame");

    const double gain = std::sqrt(budget.antenna_gain_linear()) * attenuation_amplitude(budget);
    const auto ramp = delay_ramp(bulk_delay_samples(tx.position, ofdm), ofdm.subcarriers);
    const auto win = sys.window();
    const std::size_t n = ofdm.subcarriers;
    const std::size_t cp = ofdm.cp_length;
    const std::size_t stride = ofdm.samples_per_symbol();
    const double b = ofdm.bandwidth_hz();
    const double constant = carrier_phase_constant(sys.orbit, sys.carrier);

    std::vector<Complex> out(tx.samples.size());
    for (std::size_t m = 0; m < ofdm.symbols; ++m) {
        const auto useful = std::span<const Complex>(tx.samples).subspan(m * stride + cp, n);
        auto spectrum = unitary_dft(useful);
        for (std::size_t k = 0; k < n; ++k) spectrum[k] *= ramp[k];
        const auto delayed = unitary_idft(spectrum);

        const double t0 = static_cast<double>(m) * ofdm.symbol_duration_s();
        for (std::size_t j = 0; j < stride; ++j) {
            const Complex s = (j < cp) ? delayed[n - cp + j] : delayed[j - cp];
            const double t = t0 + static_cast<double>(j) / b;
            const double ph =
                constant + carrier_phase_excess(t, phase, sys.orbit, sys.carrier, win, tx.position.x_m);
            out[m * stride + j] = gain * s * std::polar(1.0, ph);
        }
    }
    return out;
}

std::vector<Complex> superpose(std::span<const std::vector<Complex>> streams) {
    if (streams.empty()) return {};
    std::vector<Complex> out(streams.front().size());
    for (const auto& s : streams) {
        if (s.size() != out.size()) throw std::invalid_argument("superpose: length mismatch");
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += s[i];
    }
    return out;
}

void add_awgn(std::span<Complex> stream, const NoiseModel& noise) {
    const double var = noise.variance();
    if (var <= 0.0) return;
    std::mt19937_64 rng(noise.seed);
    std::normal_distribution<double> gauss(0.0, std::sqrt(var / 2.0));
    for (auto& s : stream) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        s += Complex{re, im};
    }
}

std::vector<Complex> ideal_subcarrier_response(const UePosition& ue, double tx_power_dbm,
                                               const SystemConfig& sys, const LinkBudget& budget,
                                               bool combined) {
    const auto& ofdm = sys.ofdm;
    const double lambda = sys.carrier.wavelength_m();
    const double r0 = sys.orbit.height_m;
    const double x = ue.x_m;
    const double amplitude = std::sqrt(budget.antenna_gain_linear() * dbm_to_watts(tx_power_dbm)) *
                             attenuation_amplitude(budget);

    double constant_phase = 0.0;
    double scale = amplitude;
    if (combined) {
        const double length = sys.window().aperture_length_m();
        const double doppler = -sys.orbit.velocity_mps * x / (r0 * lambda);
        constant_phase = 2.0 * kPi / (r0 * lambda) * (x * x + length * x) / 2.0 +
                         2.0 * kPi * doppler * ofdm.cp_duration_s();
        scale *= std::sqrt(static_cast<double>(ofdm.symbols));
    } else {
        // Single symbol: carrier phase at mid-symbol. The drift across the
        // symbol is v*T*|x|/(R0*lambda) turns, negligible near x = 0.
        const double t_mid = ofdm.sample_time(ofdm.subcarriers / 2, 0);
        constant_phase =
            carrier_phase_constant(sys.orbit, sys.carrier) +
            carrier_phase_excess(t_mid, PhaseModel::fresnel, sys.orbit, sys.carrier, sys.window(), x);
    }

    auto response = delay_ramp(bulk_delay_samples(ue, ofdm), ofdm.subcarriers);
    const Complex common = std::polar(scale, constant_phase);
    for (auto& h : response) h *= common;
    return response;
}

double predicted_snr(double tx_power_dbm, const LinkBudget& budget, const OfdmConfig& ofdm,
                     double processing_gain) {
    const double signal = dbm_to_watts(tx_power_dbm) * budget.antenna_gain_linear() *
                          processing_gain * std::pow(attenuation_amplitude(budget), 2);
    const double noise = kBoltzmann * ofdm.bandwidth_hz() * budget.temperature_k *
                         db_to_linear(budget.noise_figure_db);
    return signal / noise;
}

}  // namespace sac
