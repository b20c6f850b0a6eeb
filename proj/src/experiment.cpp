#include "sac/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

#include <boost/math/special_functions/beta.hpp>

#include "sac/channel.hpp"
#include "sac/fec.hpp"
#include "sac/ofdm.hpp"

namespace sac {
namespace {

constexpr std::uint64_t kNoiseStream = 0xFFFFFFFFFFFFFFFFULL;
constexpr std::uint64_t kProfileStream = 0x9E3779B97F4A7C15ULL;

// Everything a trial needs that does not depend on the seed.
struct TrialContext {
    ScenarioConfig cfg;  // resolved
    PolarCode code;
    std::vector<PilotLayout> pilots;
    double noise_var = 0.0;

    explicit TrialContext(const ScenarioConfig& input)
        : cfg(input.resolved()), code(cfg.polar()) {
        cfg.validate();
        for (const auto& ue : cfg.ues)
            pilots.push_back(PilotLayout::comb(cfg.system.ofdm.subcarriers, cfg.pilot_spacing, ue.id));
        noise_var = NoiseModel::thermal(cfg.budget, cfg.system.ofdm, 0).variance();
    }
};

struct Transmitted {
    std::vector<std::vector<std::uint8_t>> info;
    std::vector<std::vector<Complex>> data_symbols;
    FrameGrid received;  // CP-stripped
};

std::vector<std::uint8_t> random_bits(std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::uint8_t> bits(count);
    std::uint64_t word = 0;
    for (std::size_t i = 0; i < count; ++i) {
        if (i % 64 == 0) word = rng();
        bits[i] = static_cast<std::uint8_t>((word >> (i % 64)) & 1U);
    }
    return bits;
}

Transmitted transmit(const TrialContext& ctx, double ptx_dbm, std::uint64_t seed) {
    const auto& cfg = ctx.cfg;
    const auto& sys = cfg.system;
    Transmitted out;
    std::vector<std::vector<Complex>> streams;
    for (std::size_t u = 0; u < cfg.ues.size(); ++u) {
        const auto& ue = cfg.ues[u];
        auto info = random_bits(ctx.code.config().info_bits, mix_seed(seed, ue.id));
        const auto coded = ctx.code.encode(info);
        auto symbols = map_bits(coded);
        const auto grid = build_frame(symbols, ctx.pilots[u], sys.ofdm);
        const auto baseband = ofdm_modulate(grid, sys.ofdm);
        const auto tx = UeTransmit::scaled(ue.id, UePosition::at(ue.x_m, sys.orbit),
                                           cfg.ue_power_dbm(ue, ptx_dbm), baseband);
        streams.push_back(apply_channel(tx, sys, cfg.budget, cfg.channel_phase));
        out.info.push_back(std::move(info));
        out.data_symbols.push_back(std::move(symbols));
    }
    auto rx = superpose(streams);
    if (cfg.noise) add_awgn(rx, NoiseModel::thermal(cfg.budget, sys.ofdm, mix_seed(seed, kNoiseStream)));
    out.received = strip_cp(rx, sys.ofdm);
    return out;
}

double evm_snr_db(std::span<const Complex> received, std::span<const Complex> sent) {
    double signal = 0.0;
    double error = 0.0;
    for (std::size_t i = 0; i < sent.size(); ++i) {
        signal += std::norm(sent[i]);
        error += std::norm(received[i] - sent[i]);
    }
    if (error == 0.0) return std::numeric_limits<double>::infinity();
    return linear_to_db(signal / error);
}

void decode_into(UeOutcome& out, const TrialContext& ctx, const UeReception& rx,
                 const std::vector<std::uint8_t>& info, const std::vector<Complex>& sent) {
    out.measured_snr_db = evm_snr_db(rx.data_symbols, sent);
    const auto decoded = ctx.code.decode(rx.llrs);
    out.crc_ok = decoded.crc_ok;
    out.bit_errors = 0;
    for (std::size_t i = 0; i < info.size(); ++i) out.bit_errors += decoded.info_bits[i] != info[i];
}

TrialRecord run_trial_with(const TrialContext& ctx, double ptx_dbm, std::uint64_t seed,
                           std::size_t trial_index) {
    const auto& cfg = ctx.cfg;
    const auto& sys = cfg.system;
    TrialRecord record;
    record.trial = trial_index;
    record.ptx_dbm = ptx_dbm;
    for (const auto& ue : cfg.ues) {
        UeOutcome o;
        o.ue_id = ue.id;
        o.x_m = ue.x_m;
        o.tx_power_dbm = cfg.ue_power_dbm(ue, ptx_dbm);
        record.ues.push_back(o);
    }

    Transmitted frame;
    try {
        frame = transmit(ctx, ptx_dbm, seed);
    } catch (const std::exception& e) {
        for (auto& o : record.ues) o.error = std::string("transmit: ") + e.what();
        return record;
    }

    if (cfg.mode == RunMode::nosac) {
        auto& o = record.ues.front();
        try {
            std::vector<Complex> ideal;
            if (cfg.csi == CsiMode::ideal)
                ideal = ideal_subcarrier_response(UePosition::at(o.x_m, sys.orbit), o.tx_power_dbm,
                                                  sys, cfg.budget, false);
            const auto rx = receive_single_symbol(frame.received.column(0), ctx.pilots.front(),
                                                  ctx.noise_var, ideal);
            decode_into(o, ctx, rx, frame.info.front(), frame.data_symbols.front());
        } catch (const std::exception& e) {
            o.error = e.what();
        }
        return record;
    }

    FrameGrid compressed;
    std::vector<UeDetection> detections;
    try {
        compressed = azimuth_compress(frame.received, sys);
        const auto profile = doppler_profile(compressed, sys, cfg.zero_padding);
        detections = detect_ues(profile, cfg.ues.size(), sys,
                                cfg.estimation == DopplerEstimation::interpolated);
    } catch (const std::exception& e) {
        for (auto& o : record.ues) o.error = std::string("detection: ") + e.what();
        return record;
    }

    // Detections and UEs are paired in cross-range order.
    std::vector<std::size_t> ue_order(cfg.ues.size());
    std::iota(ue_order.begin(), ue_order.end(), std::size_t{0});
    std::stable_sort(ue_order.begin(), ue_order.end(),
                     [&](std::size_t a, std::size_t b) { return cfg.ues[a].x_m < cfg.ues[b].x_m; });
    std::stable_sort(detections.begin(), detections.end(),
                     [](const UeDetection& a, const UeDetection& b) { return a.cross_range_m < b.cross_range_m; });

    for (std::size_t i = 0; i < ue_order.size(); ++i) {
        const std::size_t u = ue_order[i];
        auto& o = record.ues[u];
        const auto& det = detections[i];
        o.detected = true;
        o.x_hat_m = det.cross_range_m;
        o.doppler_hat_hz = det.doppler_hz;
        try {
            std::vector<Complex> ideal;
            if (cfg.csi == CsiMode::ideal)
                ideal = ideal_subcarrier_response(UePosition::at(o.x_m, sys.orbit), o.tx_power_dbm,
                                                  sys, cfg.budget, true);
            const auto rx = receive_compressed(compressed, det, ctx.pilots[u], sys, ctx.noise_var, ideal);
            decode_into(o, ctx, rx, frame.info[u], frame.data_symbols[u]);
        } catch (const std::exception& e) {
            o.error = e.what();
        }
    }
    return record;
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t ptx_index, std::size_t trial_index) {
    return mix_seed(mix_seed(base_seed, ptx_index), trial_index);
}

TrialRecord run_trial(const ScenarioConfig& cfg, double ptx_dbm, std::uint64_t seed,
                      std::size_t trial_index) {
    const TrialContext ctx(cfg);
    return run_trial_with(ctx, ptx_dbm, seed, trial_index);
}

AzimuthProfile simulate_profile(const ScenarioConfig& cfg, double ptx_dbm, std::uint64_t seed) {
    if (cfg.mode != RunMode::sac) throw std::invalid_argument("simulate_profile: SAC mode only");
    const TrialContext ctx(cfg);
    const auto frame = transmit(ctx, ptx_dbm, seed);
    return doppler_profile(azimuth_compress(frame.received, ctx.cfg.system), ctx.cfg.system,
                           ctx.cfg.zero_padding);
}

ConfidenceInterval clopper_pearson(std::size_t errors, std::size_t trials, double level) {
    if (trials == 0) return {0.0, 1.0};
    if (errors > trials) throw std::invalid_argument("clopper_pearson: errors > trials");
    const double alpha = 1.0 - level;
    const auto k = static_cast<double>(errors);
    const auto n = static_cast<double>(trials);
    ConfidenceInterval ci;
    ci.lo = errors == 0 ? 0.0 : boost::math::ibeta_inv(k, n - k + 1.0, alpha / 2.0);
    ci.hi = errors == trials ? 1.0 : boost::math::ibeta_inv(k + 1.0, n - k, 1.0 - alpha / 2.0);
    return ci;
}

std::vector<double> BlerCurve::ptx_dbm() const {
    std::vector<double> out;
    for (const auto& p : points) out.push_back(p.ptx_dbm);
    return out;
}

std::vector<double> BlerCurve::mean_bler() const {
    std::vector<double> out;
    for (const auto& p : points) out.push_back(p.mean_bler);
    return out;
}

BlerPoint aggregate(double ptx_dbm, const std::vector<TrialRecord>& records) {
    BlerPoint point;
    point.ptx_dbm = ptx_dbm;
    point.trials = records.size();
    if (records.empty()) return point;
    const std::size_t ue_count = records.front().ues.size();
    std::size_t outcomes = 0;
    for (std::size_t u = 0; u < ue_count; ++u) {
        UeBler b;
        b.ue_id = records.front().ues[u].ue_id;
        double sq = 0.0;
        double snr_sum = 0.0;
        std::size_t snr_count = 0;
        for (const auto& r : records) {
            const auto& o = r.ues.at(u);
            ++b.trials;
            if (o.block_error()) ++b.errors;
            if (!o.error.empty()) ++point.component_errors;
            if (o.detected) {
                ++b.detections;
                sq += (o.x_hat_m - o.x_m) * (o.x_hat_m - o.x_m);
            }
            if (o.error.empty() && std::isfinite(o.measured_snr_db)) {
                snr_sum += o.measured_snr_db;
                ++snr_count;
            }
        }
        b.bler = static_cast<double>(b.errors) / static_cast<double>(b.trials);
        b.ci = clopper_pearson(b.errors, b.trials);
        b.doa_rmse_m = b.detections ? std::sqrt(sq / static_cast<double>(b.detections))
                                    : std::numeric_limits<double>::quiet_NaN();
        b.mean_snr_db = snr_count ? snr_sum / static_cast<double>(snr_count)
                                  : std::numeric_limits<double>::quiet_NaN();
        point.errors += b.errors;
        outcomes += b.trials;
        point.ues.push_back(b);
    }
    point.mean_bler = static_cast<double>(point.errors) / static_cast<double>(outcomes);
    point.mean_ci = clopper_pearson(point.errors, outcomes);
    return point;
}

SweepResult run_sweep(const ScenarioConfig& cfg, const SweepOptions& options) {
    if (cfg.ptx_dbm.empty()) throw ConfigError("sweep.ptx_dbm is empty");
    const TrialContext ctx(cfg);
    const std::size_t points = cfg.ptx_dbm.size();
    const std::size_t total = points * cfg.trials;

    std::vector<TrialRecord> records(total);
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    std::mutex progress_mutex;
    auto worker = [&] {
        for (std::size_t task = next++; task < total; task = next++) {
            const std::size_t p = task / cfg.trials;
            const std::size_t t = task % cfg.trials;
            records[task] = run_trial_with(ctx, cfg.ptx_dbm[p], trial_seed(cfg.seed, p, t), t);
            const std::size_t finished = ++done;
            if (options.progress) {
                std::lock_guard lock(progress_mutex);
                options.progress(finished, total);
            }
        }
    };
    const std::size_t workers = std::clamp<std::size_t>(options.workers, 1, std::max<std::size_t>(1, total));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    SweepResult result;
    for (std::size_t p = 0; p < points; ++p) {
        const std::vector<TrialRecord> slice(records.begin() + static_cast<std::ptrdiff_t>(p * cfg.trials),
                                             records.begin() + static_cast<std::ptrdiff_t>((p + 1) * cfg.trials));
        result.curve.points.push_back(aggregate(cfg.ptx_dbm[p], slice));
    }
    result.threshold_dbm = find_crossing(result.curve.ptx_dbm(), result.curve.mean_bler(), 0.1,
                                         cfg.trials * ctx.cfg.ues.size());
    if (options.profile && ctx.cfg.mode == RunMode::sac)
        result.profile = simulate_profile(ctx.cfg, cfg.profile_ptx_dbm, mix_seed(cfg.seed, kProfileStream));
    return result;
}

std::optional<double> find_crossing(const std::vector<double>& ptx_dbm,
                                    const std::vector<double>& bler, double target,
                                    std::size_t trials) {
    if (ptx_dbm.size() != bler.size()) throw std::invalid_argument("find_crossing: length mismatch");
    const double floor = trials ? 0.5 / static_cast<double>(trials) : 1e-12;
    for (std::size_t i = 1; i < bler.size(); ++i) {
        if (bler[i - 1] > target && bler[i] <= target) {
            const double y0 = std::log10(std::max(bler[i - 1], floor));
            const double y1 = std::log10(std::max(bler[i], floor));
            const double yt = std::log10(target);
            if (y0 == y1) return ptx_dbm[i];
            return ptx_dbm[i - 1] + (yt - y0) / (y1 - y0) * (ptx_dbm[i] - ptx_dbm[i - 1]);
        }
    }
    return std::nullopt;
}

double predicted_snr_db(const ScenarioConfig& cfg, double ptx_dbm) {
    const auto resolved = cfg.resolved();
    const auto& ofdm = resolved.system.ofdm;
    return linear_to_db(predicted_snr(ptx_dbm, resolved.budget, ofdm, static_cast<double>(ofdm.symbols)));
}

}  // namespace sac
