#include "sac/receiver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "sac/dft.hpp"

namespace sac {
namespace {

double doppler_bin_width(const SystemConfig& sys) { return 1.0 / sys.ofdm.frame_duration_s(); }

UeReception equalize_and_demap(std::span<const Complex> freq, const PilotLayout& pilots,
                               double noise_var, std::span<const Complex> ideal_response) {
    const ChannelEstimate csi = ideal_response.empty() ? estimate_channel(freq, pilots)
                                                       : ChannelEstimate::known(ideal_response);
    UeReception rx;
    rx.equalized = zf_equalize(freq, csi.equalizer, noise_var);
    std::vector<double> data_var;
    rx.data_symbols.reserve(pilots.data_count());
    data_var.reserve(pilots.data_count());
    for (auto k : pilots.data_indices) {
        rx.data_symbols.push_back(rx.equalized.symbols[k]);
        data_var.push_back(rx.equalized.noise_variance[k]);
    }
    rx.llrs = llr_demap(rx.data_symbols, data_var);
    return rx;
}

}  // namespace

UeDetection UeDetection::from_doppler(double doppler_hz, const SystemConfig& sys) {
    UeDetection d;
    d.doppler_hz = doppler_hz;
    d.bin = doppler_hz / doppler_bin_width(sys);
    d.azimuth_rad = azimuth_from_doppler(doppler_hz, sys.orbit, sys.carrier);
    d.cross_range_m = d.azimuth_rad * sys.orbit.height_m;
    return d;
}

UeDetection UeDetection::from_position(double x_m, const SystemConfig& sys) {
    return from_doppler(doppler_after_compression(x_m, sys.orbit, sys.carrier), sys);
}

ChannelEstimate ChannelEstimate::known(std::span<const Complex> response) {
    ChannelEstimate est;
    est.response.assign(response.begin(), response.end());
    est.equalizer.reserve(response.size());
    for (const auto& h : response) est.equalizer.push_back(1.0 / h);
    return est;
}

FrameGrid azimuth_compress(const FrameGrid& r, const SystemConfig& sys) {
    const auto& ofdm = sys.ofdm;
    if (r.rows() != ofdm.subcarriers || r.cols() != ofdm.symbols)
        throw std::invalid_argument("azimuth_compress: frame shape does not match config");
    const auto win = sys.window();
    const double constant = carrier_phase_constant(sys.orbit, sys.carrier);
    FrameGrid out(r.rows(), r.cols(), Domain::time);
    for (std::size_t m = 0; m < r.cols(); ++m) {
        for (std::size_t n = 0; n < r.rows(); ++n) {
            const double ref = constant + carrier_phase_excess(ofdm.sample_time(n, m), PhaseModel::fresnel,
                                                               sys.orbit, sys.carrier, win, 0.0);
            out(n, m) = r(n, m) * std::polar(1.0, -ref);
        }
    }
    return out;
}

AzimuthProfile doppler_profile(const FrameGrid& r_az, const SystemConfig& sys,
                               std::size_t zero_padding) {
    if (zero_padding < 1) throw std::invalid_argument("doppler_profile: padding must be >= 1");
    const std::size_t m_count = r_az.cols();
    const std::size_t size = m_count * zero_padding;
    const std::size_t negative = size / 2;  // bins -floor(size/2) .. ceil(size/2)-1

    std::vector<double> power(size, 0.0);
    std::vector<Complex> row(m_count);
    for (std::size_t n = 0; n < r_az.rows(); ++n) {
        for (std::size_t m = 0; m < m_count; ++m) row[m] = r_az(n, m);
        const auto spectrum = padded_dft(row, size);
        for (std::size_t q = 0; q < size; ++q) power[(q + negative) % size] += std::norm(spectrum[q]);
    }

    AzimuthProfile profile;
    profile.symbols = m_count;
    profile.zero_padding = zero_padding;
    const double width = doppler_bin_width(sys);
    for (std::size_t i = 0; i < size; ++i) {
        const double bin = (static_cast<double>(i) - static_cast<double>(negative)) /
                           static_cast<double>(zero_padding);
        const double doppler = bin * width;
        const double angle = azimuth_from_doppler(doppler, sys.orbit, sys.carrier);
        profile.norms.push_back(std::sqrt(power[i]));
        profile.bins.push_back(bin);
        profile.doppler_hz.push_back(doppler);
        profile.angle_rad.push_back(angle);
        profile.cross_range_m.push_back(angle * sys.orbit.height_m);
    }
    return profile;
}

std::vector<UeDetection> detect_ues(const AzimuthProfile& profile, std::size_t count,
                                    const SystemConfig& sys, bool interpolate) {
    const std::size_t size = profile.norms.size();
    if (count < 1 || count > profile.symbols)
        throw std::invalid_argument("detect_ues: expected count must be in [1, M]");
    const auto& y = profile.norms;
    auto at = [&](std::ptrdiff_t i) {
        const auto s = static_cast<std::ptrdiff_t>(size);
        return y[static_cast<std::size_t>(((i % s) + s) % s)];
    };

    std::vector<std::size_t> maxima;
    for (std::size_t i = 0; i < size; ++i) {
        const auto si = static_cast<std::ptrdiff_t>(i);
        if (size == 1 || (y[i] >= at(si - 1) && y[i] >= at(si + 1))) maxima.push_back(i);
    }
    // Near-equal peaks (e.g. a source midway between two bins) go to the
    // smaller |bin|.
    const double peak = *std::max_element(y.begin(), y.end());
    std::sort(maxima.begin(), maxima.end(), [&](std::size_t a, std::size_t b) {
        if (std::abs(y[a] - y[b]) > 1e-9 * peak) return y[a] > y[b];
        return std::abs(profile.bins[a]) < std::abs(profile.bins[b]);
    });

    // One grid bin on the plain profile, half a bin when zero-padded: two UEs
    // one bin apart drift inwards under noise and must both survive.
    const std::size_t radius = std::max<std::size_t>(1, profile.zero_padding / 2);
    std::vector<std::size_t> picked;
    for (auto i : maxima) {
        if (picked.size() == count) break;
        const bool suppressed = std::any_of(picked.begin(), picked.end(), [&](std::size_t p) {
            const std::size_t d = (i > p) ? i - p : p - i;
            return std::min(d, size - d) <= radius;
        });
        if (!suppressed) picked.push_back(i);
    }
    if (picked.size() < count) {
        std::ostringstream msg;
        msg << "detect_ues: found " << picked.size() << " separated peaks, expected " << count;
        throw DetectionError(msg.str());
    }

    std::vector<UeDetection> out;
    for (std::size_t k = 0; k < picked.size(); ++k) {
        const std::size_t i = picked[k];
        double bin = profile.bins[i];
        if (interpolate && size >= 3) {
            const auto si = static_cast<std::ptrdiff_t>(i);
            const double a = at(si - 1);
            const double b = y[i];
            const double c = at(si + 1);
            const double denom = a - 2.0 * b + c;
            if (denom < 0.0) {
                const double delta = std::clamp(0.5 * (a - c) / denom, -0.5, 0.5);
                bin += delta / static_cast<double>(profile.zero_padding);
            }
        }
        UeDetection d = UeDetection::from_doppler(bin * doppler_bin_width(sys), sys);
        d.index = k;
        d.peak_magnitude = y[i];
        out.push_back(d);
    }
    return out;
}

std::vector<Complex> steering_vector(double azimuth_rad, const SystemConfig& sys) {
    const std::size_t m_count = sys.ofdm.symbols;
    const double step = 2.0 * kPi / sys.carrier.wavelength_m() *
                        sys.window().element_spacing_m() * azimuth_rad;
    const double norm = 1.0 / std::sqrt(static_cast<double>(m_count));
    std::vector<Complex> b(m_count);
    for (std::size_t m = 0; m < m_count; ++m) b[m] = std::polar(norm, step * static_cast<double>(m));
    return b;
}

std::vector<Complex> beamsteer(const FrameGrid& r_az, double azimuth_rad, const SystemConfig& sys) {
    if (r_az.cols() != sys.ofdm.symbols)
        throw std::invalid_argument("beamsteer: frame has the wrong number of symbols");
    const auto b = steering_vector(azimuth_rad, sys);
    std::vector<Complex> out(r_az.rows());
    for (std::size_t m = 0; m < r_az.cols(); ++m) {
        const auto col = r_az.column(m);
        for (std::size_t n = 0; n < out.size(); ++n) out[n] += col[n] * b[m];
    }
    return out;
}

std::vector<Complex> doppler_correct(std::span<const Complex> combined, double doppler_hz,
                                     const OfdmConfig& ofdm) {
    std::vector<Complex> out(combined.size());
    const double step = -2.0 * kPi * doppler_hz / ofdm.bandwidth_hz();
    for (std::size_t n = 0; n < combined.size(); ++n)
        out[n] = combined[n] * std::polar(1.0, step * static_cast<double>(n));
    return out;
}

ChannelEstimate estimate_channel(std::span<const Complex> freq_symbols, const PilotLayout& pilots) {
    const std::size_t n = freq_symbols.size();
    const std::size_t p_count = pilots.indices.size();
    if (p_count == 0) throw std::invalid_argument("estimate_channel: no pilots");

    std::vector<Complex> ls(p_count);
    for (std::size_t i = 0; i < p_count; ++i)
        ls[i] = freq_symbols[pilots.indices[i]] / pilots.symbols[i];

    std::vector<double> mags(p_count);
    std::transform(ls.begin(), ls.end(), mags.begin(), [](Complex h) { return std::abs(h); });
    std::nth_element(mags.begin(), mags.begin() + static_cast<std::ptrdiff_t>(p_count / 2), mags.end());
    const double floor = 1e-3 * mags[p_count / 2];
    for (std::size_t i = 0; i < p_count; ++i) {
        if (!(std::abs(ls[i]) >= floor)) {
            std::ostringstream msg;
            msg << "estimate_channel: pilot at subcarrier " << pilots.indices[i] << " is unreliable";
            throw UnreliablePilotError(msg.str());
        }
    }

    // Common phase slope per subcarrier from adjacent-pilot correlation.
    Complex corr{};
    for (std::size_t i = 1; i < p_count; ++i) corr += ls[i] * std::conj(ls[i - 1]);
    const double slope = (p_count > 1) ? std::arg(corr) / static_cast<double>(pilots.spacing) : 0.0;

    std::vector<Complex> flat(p_count);
    for (std::size_t i = 0; i < p_count; ++i)
        flat[i] = ls[i] * std::polar(1.0, -slope * static_cast<double>(pilots.indices[i]));

    ChannelEstimate est;
    est.response.resize(n);
    std::size_t right = 0;
    for (std::size_t k = 0; k < n; ++k) {
        while (right < p_count && pilots.indices[right] < k) ++right;
        Complex h;
        if (right == 0) {
            h = flat.front();
        } else if (right == p_count) {
            h = flat.back();
        } else {
            const double k0 = static_cast<double>(pilots.indices[right - 1]);
            const double k1 = static_cast<double>(pilots.indices[right]);
            const double w = (static_cast<double>(k) - k0) / (k1 - k0);
            h = (1.0 - w) * flat[right - 1] + w * flat[right];
        }
        est.response[k] = h * std::polar(1.0, slope * static_cast<double>(k));
    }
    est.equalizer.reserve(n);
    for (const auto& h : est.response) est.equalizer.push_back(1.0 / h);
    return est;
}

EqualizedSymbols zf_equalize(std::span<const Complex> freq_symbols,
                             std::span<const Complex> equalizer, double noise_var) {
    if (freq_symbols.size() != equalizer.size())
        throw std::invalid_argument("zf_equalize: length mismatch");
    EqualizedSymbols eq;
    eq.equalizer.assign(equalizer.begin(), equalizer.end());
    eq.symbols.resize(freq_symbols.size());
    eq.noise_variance.resize(freq_symbols.size());
    for (std::size_t k = 0; k < freq_symbols.size(); ++k) {
        eq.symbols[k] = freq_symbols[k] * equalizer[k];
        eq.noise_variance[k] = noise_var * std::norm(equalizer[k]);
    }
    return eq;
}

UeReception receive_compressed(const FrameGrid& r_az, const UeDetection& detection,
                               const PilotLayout& pilots, const SystemConfig& sys,
                               double noise_var, std::span<const Complex> ideal_response) {
    const auto combined = beamsteer(r_az, detection.azimuth_rad, sys);
    const auto corrected = doppler_correct(combined, detection.doppler_hz, sys.ofdm);
    const auto freq = ofdm_demod_column(corrected, sys.ofdm.subcarriers);
    return equalize_and_demap(freq, pilots, noise_var, ideal_response);
}

UeReception receive_ue(const FrameGrid& r, const UeDetection& detection, const PilotLayout& pilots,
                       const SystemConfig& sys, double noise_var,
                       std::span<const Complex> ideal_response) {
    return receive_compressed(azimuth_compress(r, sys), detection, pilots, sys, noise_var,
                              ideal_response);
}

UeReception receive_single_symbol(std::span<const Complex> samples, const PilotLayout& pilots,
                                  double noise_var, std::span<const Complex> ideal_response) {
    const auto freq = ofdm_demod_column(samples, samples.size());
    return equalize_and_demap(freq, pilots, noise_var, ideal_response);
}

}  // namespace sac
