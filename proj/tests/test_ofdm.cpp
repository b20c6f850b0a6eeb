#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "sac/dft.hpp"
#include "sac/ofdm.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using sac::Complex;

namespace {

std::vector<std::uint8_t> random_bits(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::uint8_t> bits(n);
    for (auto& b : bits) b = static_cast<std::uint8_t>(rng() & 1U);
    return bits;
}

std::vector<Complex> random_symbols(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<Complex> out(n);
    for (auto& v : out) {
        const double re = g(rng);
        const double im = g(rng);
        v = {re, im};
    }
    return out;
}

// Direct O(n^2) unitary DFT.
std::vector<Complex> naive_dft(const std::vector<Complex>& x, int sign) {
    const std::size_t n = x.size();
    std::vector<Complex> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        Complex acc{};
        for (std::size_t j = 0; j < n; ++j)
            acc += x[j] * std::polar(1.0, sign * 2.0 * sac::kPi * static_cast<double>(j * k % n) / static_cast<double>(n));
        out[k] = acc / std::sqrt(static_cast<double>(n));
    }
    return out;
}

double max_diff(std::span<const Complex> a, std::span<const Complex> b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

double power(std::span<const Complex> v) {
    double p = 0.0;
    for (const auto& x : v) p += std::norm(x);
    return p;
}

}  // namespace

TEST_CASE("unitary DFT matches the direct sum") {
    for (std::size_t n : {1, 2, 7, 93, 300, 321}) {
        const auto x = random_symbols(n, n);
        CHECK(max_diff(sac::unitary_dft(x), naive_dft(x, -1)) < 1e-10);
        CHECK(max_diff(sac::unitary_idft(x), naive_dft(x, +1)) < 1e-10);
    }
}

TEST_CASE("zero-padded DFT keeps the 1/sqrt(M) scaling") {
    const auto x = random_symbols(93, 5);
    const auto padded = sac::padded_dft(x, 93 * 8);
    REQUIRE(padded.size() == 744);
    const auto plain = sac::unitary_dft(x);
    for (std::size_t k = 0; k < 93; ++k) CHECK(std::abs(padded[8 * k] - plain[k]) < 1e-10);
    CHECK_THROWS(sac::padded_dft(x, 50));
}

TEST_CASE("ofdm config timing") {
    const sac::OfdmConfig cfg{};
    CHECK(cfg.bandwidth_hz() == 4.5e6);
    CHECK_THAT(cfg.symbol_duration_s(), WithinRel((300.0 + 21.0) / 4.5e6, 1e-14));
    CHECK_THAT(cfg.useful_duration_s() + cfg.cp_duration_s(), WithinRel(cfg.symbol_duration_s(), 1e-15));
    CHECK_THAT(cfg.frame_duration_s(), WithinRel(93.0 * cfg.symbol_duration_s(), 1e-15));
    CHECK_THAT(cfg.symbol_duration_s() * 1e6, WithinAbs(71.33, 0.01));
    CHECK(cfg.frame_samples() == 93 * 321);
    CHECK(sac::OfdmConfig::with_normal_cp(300, 15e3, 93).cp_length == 21);
    CHECK(sac::OfdmConfig::with_normal_cp(132, 30e3, 185).cp_length == 9);
    CHECK(sac::OfdmConfig::with_normal_cp(2048, 15e3, 1).cp_length == 144);
}

TEST_CASE("ofdm config validation") {
    CHECK_THROWS(sac::OfdmConfig{1, 0, 15e3, 1}.validate());
    CHECK_THROWS(sac::OfdmConfig{300, 300, 15e3, 1}.validate());
    CHECK_THROWS(sac::OfdmConfig{300, 21, 0.0, 1}.validate());
    CHECK_THROWS(sac::OfdmConfig{300, 21, 15e3, 0}.validate());
    CHECK_NOTHROW(sac::OfdmConfig{}.validate());
}

TEST_CASE("pilot comb layout") {
    const auto p = sac::PilotLayout::comb(300, 4, 1);
    CHECK(p.indices.size() == 75);
    CHECK(p.data_count() == 225);
    CHECK(p.indices.front() == 0);
    for (std::size_t i = 1; i < p.indices.size(); ++i) CHECK(p.indices[i] - p.indices[i - 1] == 4);
    for (const auto& s : p.symbols) CHECK_THAT(std::norm(s), WithinAbs(1.0, 1e-12));
    for (auto k : p.data_indices) CHECK(k % 4 != 0);
    CHECK(p.indices.size() == static_cast<std::size_t>(std::lround(0.25 * 300)));

    const auto same = sac::PilotLayout::comb(300, 4, 1);
    const auto other = sac::PilotLayout::comb(300, 4, 2);
    CHECK(same.symbols == p.symbols);
    CHECK(other.symbols != p.symbols);
    CHECK_THROWS(sac::PilotLayout::comb(300, 1, 0));
}

TEST_CASE("gray QPSK mapping") {
    const double a = 1.0 / std::sqrt(2.0);
    const std::vector<std::uint8_t> bits{0, 0, 0, 1, 1, 0, 1, 1};
    const auto s = sac::map_bits(bits);
    CHECK(s[0] == Complex(a, a));
    CHECK(s[1] == Complex(a, -a));
    CHECK(s[2] == Complex(-a, a));
    CHECK(s[3] == Complex(-a, -a));
    // Gray: neighbours in angle differ by one bit.
    CHECK(std::abs(s[0] - s[1]) < std::abs(s[0] - s[3]));
    CHECK_THROWS(sac::map_bits(std::vector<std::uint8_t>{1, 0, 1}));
}

TEST_CASE("mapped random bits have unit mean power") {
    const auto s = sac::map_bits(random_bits(20000, 3));
    CHECK_THAT(power(s) / static_cast<double>(s.size()), WithinAbs(1.0, 1e-12));
}

TEST_CASE("noise-free demap recovers the bits") {
    const auto bits = random_bits(4500, 9);
    const auto llr = sac::llr_demap(sac::map_bits(bits), 1e-3);
    for (std::size_t i = 0; i < bits.size(); ++i) CHECK((llr[i] < 0.0) == (bits[i] == 1));
}

TEST_CASE("QPSK LLR closed form") {
    const double a = 1.0 / std::sqrt(2.0);
    const auto l = sac::llr_demap(std::vector<Complex>{{a, a}}, 1.0);
    CHECK_THAT(l[0], WithinAbs(2.0, 1e-12));
    CHECK_THAT(l[1], WithinAbs(2.0, 1e-12));

    const std::vector<Complex> y{{0.3, -0.8}, {-1.2, 0.05}};
    const auto l1 = sac::llr_demap(y, 0.5);
    const auto l2 = sac::llr_demap(y, 1.0);
    for (std::size_t i = 0; i < l1.size(); ++i) CHECK_THAT(l2[i], WithinAbs(0.5 * l1[i], 1e-12));
    CHECK_THROWS(sac::llr_demap(y, 0.0));

    // Exact posterior ratio for one BPSK component with sigma^2/2 per dimension.
    const double sigma2 = 0.7;
    const double re = 0.31;
    const double p0 = std::exp(-(re - a) * (re - a) / sigma2);
    const double p1 = std::exp(-(re + a) * (re + a) / sigma2);
    CHECK_THAT(sac::llr_demap(std::vector<Complex>{{re, 0.0}}, sigma2)[0], WithinAbs(std::log(p0 / p1), 1e-12));
}

TEST_CASE("frame construction") {
    const sac::OfdmConfig cfg{};
    const auto pilots = sac::PilotLayout::comb(cfg.subcarriers, 4, 7);
    const auto data = sac::map_bits(random_bits(450, 1));
    const auto grid = sac::build_frame(data, pilots, cfg);
    REQUIRE(grid.rows() == 300);
    REQUIRE(grid.cols() == 93);
    CHECK(grid.domain() == sac::Domain::frequency);
    for (std::size_t m = 1; m < grid.cols(); ++m) {
        const auto c0 = grid.column(0);
        const auto cm = grid.column(m);
        CHECK(std::equal(c0.begin(), c0.end(), cm.begin()));
    }
    for (std::size_t i = 0; i < pilots.indices.size(); ++i) CHECK(grid(pilots.indices[i], 5) == pilots.symbols[i]);
    for (std::size_t i = 0; i < pilots.data_indices.size(); ++i) CHECK(grid(pilots.data_indices[i], 5) == data[i]);
    CHECK_THAT(grid.energy(), WithinRel(93.0 * 300.0, 1e-12));
    CHECK_THROWS(sac::build_frame(std::vector<Complex>(224), pilots, cfg));
}

TEST_CASE("single active subcarrier gives a flat symbol") {
    sac::OfdmConfig cfg{};
    cfg.symbols = 1;
    sac::FrameGrid grid(cfg.subcarriers, 1, sac::Domain::frequency);
    grid(0, 0) = 1.0;
    const auto s = sac::ofdm_modulate(grid, cfg);
    REQUIRE(s.size() == 321);
    for (const auto& v : s) CHECK_THAT(std::abs(v), WithinAbs(1.0 / std::sqrt(300.0), 1e-14));
}

TEST_CASE("cyclic prefix copies the symbol tail") {
    sac::OfdmConfig cfg{};
    cfg.symbols = 3;
    const auto pilots = sac::PilotLayout::comb(cfg.subcarriers, 4, 1);
    const auto grid = sac::build_frame(sac::map_bits(random_bits(450, 2)), pilots, cfg);
    const auto s = sac::ofdm_modulate(grid, cfg);
    REQUIRE(s.size() == cfg.frame_samples());
    for (std::size_t m = 0; m < 3; ++m) {
        const std::size_t base = m * 321;
        for (std::size_t j = 0; j < 21; ++j) CHECK(s[base + j] == s[base + 300 + j]);
        // Parseval per symbol, CP adds N_CP/N of the energy on average.
        const double useful = power(std::span<const Complex>(s).subspan(base + 21, 300));
        CHECK_THAT(useful, WithinRel(300.0, 1e-12));
    }
}

TEST_CASE("modulate, strip CP and demodulate is the identity") {
    sac::OfdmConfig cfg{};
    cfg.symbols = 5;
    sac::FrameGrid grid(cfg.subcarriers, cfg.symbols, sac::Domain::frequency);
    const auto values = random_symbols(cfg.subcarriers * cfg.symbols, 77);
    for (std::size_t m = 0; m < cfg.symbols; ++m)
        for (std::size_t n = 0; n < cfg.subcarriers; ++n) grid(n, m) = values[m * cfg.subcarriers + n];
    const auto rx = sac::strip_cp(sac::ofdm_modulate(grid, cfg), cfg);
    CHECK(rx.domain() == sac::Domain::time);
    for (std::size_t m = 0; m < cfg.symbols; ++m) {
        const auto back = sac::ofdm_demod_column(rx.column(m), cfg.subcarriers);
        const auto sent = grid.column(m);
        double err = 0.0;
        double ref = 0.0;
        for (std::size_t n = 0; n < back.size(); ++n) {
            err = std::max(err, std::abs(back[n] - sent[n]));
            ref = std::max(ref, std::abs(sent[n]));
        }
        CHECK(err / ref < 1e-12);
        CHECK_THAT(power(rx.column(m)), WithinRel(power(sent), 1e-12));
    }
    CHECK_THROWS(sac::ofdm_demod_column(rx.column(0).subspan(0, 299), 300));
    CHECK_THROWS(sac::strip_cp(std::vector<Complex>(10), cfg));
}

TEST_CASE("single tone demodulates to a single bin") {
    const std::size_t n = 300;
    const std::size_t k = 37;
    std::vector<Complex> tone(n);
    for (std::size_t j = 0; j < n; ++j)
        tone[j] = std::polar(1.0 / std::sqrt(double(n)), 2.0 * sac::kPi * double(j * k) / double(n));
    const auto bins = sac::ofdm_demod_column(tone, n);
    for (std::size_t q = 0; q < n; ++q) CHECK_THAT(std::abs(bins[q]), WithinAbs(q == k ? 1.0 : 0.0, 1e-12));
}

TEST_CASE("demodulation preserves white-noise variance") {
    const std::size_t n = 300;
    const int trials = 10000;
    const double var = 2.5;
    std::mt19937_64 rng(123);
    std::normal_distribution<double> g(0.0, std::sqrt(var / 2.0));
    double in_power = 0.0;
    double out_power = 0.0;
    std::vector<Complex> x(n);
    for (int t = 0; t < trials; ++t) {
        for (auto& v : x) {
            const double re = g(rng);
            const double im = g(rng);
            v = {re, im};
        }
        in_power += power(x);
        out_power += power(sac::ofdm_demod_column(x, n));
    }
    const double samples = double(trials) * double(n);
    CHECK_THAT(out_power / samples, WithinRel(var, 0.01));
    CHECK_THAT(out_power, WithinRel(in_power, 1e-12));
}
