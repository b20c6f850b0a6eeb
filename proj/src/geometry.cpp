#include "sac/geometry.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sac {

void OrbitGeometry::validate() const {
    if (!(height_m > 0.0)) throw std::invalid_argument("orbit height must be positive");
    if (!(velocity_mps > 0.0)) throw std::invalid_argument("orbital velocity must be positive");
}

void CarrierConfig::validate() const {
    if (!(frequency_hz > 0.0)) throw std::invalid_argument("carrier frequency must be positive");
}

UePosition UePosition::at(double x_m, const OrbitGeometry& orbit) {
    UePosition p;
    p.x_m = x_m;
    p.range_m = std::hypot(x_m, orbit.height_m);
    p.azimuth_rad = std::asin(x_m / p.range_m);
    return p;
}

double satellite_x(double t, const AcquisitionWindow& win) {
    return -0.5 * win.aperture_length_m() + win.velocity_mps * t;
}

double range_at(double t, const OrbitGeometry& orbit, const AcquisitionWindow& win, double x_ue) {
    return std::hypot(satellite_x(t, win) - x_ue, orbit.height_m);
}

double carrier_phase(double t, PhaseModel model, const OrbitGeometry& orbit,
                     const CarrierConfig& carrier, const AcquisitionWindow& win, double x_ue) {
    const double lambda = carrier.wavelength_m();
    if (model == PhaseModel::exact) return 2.0 * kPi * range_at(t, orbit, win, x_ue) / lambda;
    const double dx = satellite_x(t, win) - x_ue;
    return 2.0 * kPi * (dx * dx / (2.0 * orbit.height_m) + orbit.height_m) / lambda;
}

double carrier_phase_excess(double t, PhaseModel model, const OrbitGeometry& orbit,
                            const CarrierConfig& carrier, const AcquisitionWindow& win, double x_ue) {
    const double dx = satellite_x(t, win) - x_ue;
    const double r0 = orbit.height_m;
    // R - R0 = dx^2 / (R + R0) exactly; the Fresnel form replaces R by R0.
    const double excess = (model == PhaseModel::exact) ? dx * dx / (std::hypot(dx, r0) + r0)
                                                       : dx * dx / (2.0 * r0);
    return 2.0 * kPi * excess / carrier.wavelength_m();
}

double carrier_phase_constant(const OrbitGeometry& orbit, const CarrierConfig& carrier) {
    return 2.0 * kPi * std::fmod(orbit.height_m / carrier.wavelength_m(), 1.0);
}

double doppler_true(double t, const OrbitGeometry& orbit, const CarrierConfig& carrier,
                    const AcquisitionWindow& win, double x_ue) {
    // d/dt of the Fresnel phase divided by 2*pi.
    const double dx = satellite_x(t, win) - x_ue;
    return win.velocity_mps * dx / (orbit.height_m * carrier.wavelength_m());
}

double doppler_after_compression(double x_ue, const OrbitGeometry& orbit,
                                 const CarrierConfig& carrier) {
    if (std::abs(x_ue) >= orbit.height_m / 10.0) {
        std::ostringstream msg;
        msg << "cross-range " << x_ue << " m outside the small-offset regime (|x| < R0/10)";
        throw std::domain_error(msg.str());
    }
    return -orbit.velocity_mps * x_ue / (orbit.height_m * carrier.wavelength_m());
}

double azimuth_from_doppler(double doppler_hz, const OrbitGeometry& orbit,
                            const CarrierConfig& carrier) {
    return -doppler_hz * carrier.wavelength_m() / orbit.velocity_mps;
}

Resolution resolution_and_ambiguity(const AcquisitionWindow& win, const CarrierConfig& carrier,
                                    const OrbitGeometry& orbit) {
    if (win.symbols < 2) throw std::invalid_argument("resolution needs at least two symbols");
    const double lambda = carrier.wavelength_m();
    Resolution r;
    r.aperture_length_m = win.aperture_length_m();
    r.doppler_resolution_hz = 1.0 / win.frame_duration_s();
    r.azimuth_resolution_rad = lambda / r.aperture_length_m;
    r.max_unambiguous_azimuth_rad = lambda / (2.0 * win.element_spacing_m());
    r.cross_range_resolution_m = orbit.height_m * r.azimuth_resolution_rad;
    r.max_unambiguous_cross_range_m = orbit.height_m * r.max_unambiguous_azimuth_rad;
    return r;
}

Numerology Numerology::nr(int mu, double bandwidth_hz) {
    if (mu < 0 || mu > 4) throw std::invalid_argument("numerology mu must be in 0..4");
    return Numerology{15e3 * static_cast<double>(1 << mu), bandwidth_hz};
}

PlanResult plan_parameters(double target_cross_range_m, const Numerology& numerology,
                           const OrbitGeometry& orbit, const CarrierConfig& carrier,
                           const PayloadFormat& payload) {
    if (!(target_cross_range_m > 0.0))
        throw std::invalid_argument("target cross-range resolution must be positive");
    orbit.validate();
    carrier.validate();

    PlanResult plan;
    plan.required_aperture_m = carrier.wavelength_m() * orbit.height_m / target_cross_range_m;
    if (plan.required_aperture_m >= orbit.height_m / 10.0) {
        std::ostringstream msg;
        msg << "a " << target_cross_range_m << " m resolution needs a " << plan.required_aperture_m
            << " m aperture, not small against the orbit height";
        throw std::invalid_argument(msg.str());
    }

    plan.symbol_duration_s = numerology.symbol_duration_s();
    const double spacing = orbit.velocity_mps * plan.symbol_duration_s;
    plan.symbols = static_cast<std::size_t>(std::ceil(plan.required_aperture_m / spacing));
    plan.aperture_length_m = spacing * static_cast<double>(plan.symbols);
    plan.processing_gain_db = linear_to_db(static_cast<double>(plan.symbols));

    const double data_subcarriers = (1.0 - payload.pilot_fraction) * numerology.subcarriers();
    plan.info_bits_per_frame = data_subcarriers * payload.bits_per_symbol * payload.code_rate;
    plan.net_bit_rate_bps =
        plan.info_bits_per_frame / (static_cast<double>(plan.symbols) * plan.symbol_duration_s);

    // Range walk over the aperture beyond one range cell calls for migration
    // correction, which this simulator does not model.
    const double half = 0.5 * plan.aperture_length_m;
    const double walk = half * half / (2.0 * orbit.height_m);
    const double range_cell = kSpeedOfLight / numerology.bandwidth_hz;
    if (walk > range_cell) {
        std::ostringstream msg;
        msg << "range walk " << walk << " m exceeds one range cell (" << range_cell << " m)";
        plan.warnings.push_back(msg.str());
    }
    return plan;
}

}  // namespace sac
