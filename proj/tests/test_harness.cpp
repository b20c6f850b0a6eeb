#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "sac/experiment.hpp"
#include "sac/report.hpp"
#include "sac/scenario.hpp"

using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace fs = std::filesystem;

namespace {

sac::ScenarioConfig scenario(const std::string& name) {
    return sac::load_scenario(fs::path(SAC_CONFIG_DIR) / (name + ".cfg"));
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("sac_harness_" + name);
    fs::remove_all(dir);
    return dir;
}

sac::ScenarioConfig small_sweep() {
    auto cfg = scenario("scenario_a");
    cfg.ptx_dbm = {3.0, 5.0};
    cfg.trials = 6;
    cfg.seed = 42;
    return cfg;
}

}  // namespace

TEST_CASE("number lists") {
    CHECK(sac::parse_number_list("[1, 2.5, -3]") == std::vector<double>{1.0, 2.5, -3.0});
    CHECK(sac::parse_number_list("7.5") == std::vector<double>{7.5});
    CHECK(sac::parse_number_list("[]").empty());
    const auto r = sac::parse_number_list("[-16..-4 step 1]");
    REQUIRE(r.size() == 13);
    CHECK(r.front() == -16.0);
    CHECK(r.back() == -4.0);
    const auto d = sac::parse_number_list("[0..1 step 0.1]");
    REQUIRE(d.size() == 11);
    CHECK(d[3] == 0.3);
    CHECK(d[10] == 1.0);
    CHECK_THROWS_AS(sac::parse_number_list("[1..2 step 0]"), sac::ConfigError);
    CHECK_THROWS_AS(sac::parse_number_list("[2..1 step 1]"), sac::ConfigError);
    CHECK_THROWS_AS(sac::parse_number_list("[1..2]"), sac::ConfigError);
    CHECK_THROWS_AS(sac::parse_number_list("[1, x]"), sac::ConfigError);
    CHECK_THROWS_AS(sac::parse_number_list("[1, 2"), sac::ConfigError);
}

TEST_CASE("shipped scenario files parse and validate") {
    for (const char* name : {"scenario_a", "scenario_b", "nosac"}) {
        const auto cfg = scenario(name);
        CHECK_NOTHROW(cfg.validate());
        CHECK(cfg.system.ofdm.subcarriers == 300);
        CHECK(cfg.system.ofdm.cp_length == 21);
        CHECK(cfg.polar().info_bits == 300);
        CHECK(cfg.polar().rate_matched_length == 450);
    }
    const auto a = scenario("scenario_a");
    REQUIRE(a.ues.size() == 2);
    CHECK(a.ues[0].x_m == -495.33);
    CHECK(a.ues[1].x_m == 495.33);
    CHECK(a.system.ofdm.symbols == 93);
    const auto b = scenario("scenario_b");
    CHECK(b.ues[1].x_m == 742.99);
    CHECK(scenario("nosac").mode == sac::RunMode::nosac);
}

TEST_CASE("config text round trip") {
    auto cfg = scenario("scenario_b");
    cfg.ues[0].ptx_dbm = 1.25;
    cfg.csi = sac::CsiMode::ideal;
    cfg.estimation = sac::DopplerEstimation::grid;
    cfg.construction = sac::PolarConstruction::gaussian_approximation;
    cfg.channel_phase = sac::PhaseModel::exact;
    cfg.noise = false;
    const auto text = cfg.to_text();
    const auto back = sac::parse_scenario(text);
    CHECK(back.entries() == cfg.entries());
    CHECK(back.to_text() == text);
    CHECK(back.ues[0].ptx_dbm == 1.25);
    CHECK_FALSE(back.ues[1].ptx_dbm.has_value());
    CHECK(back.ptx_dbm == cfg.ptx_dbm);
}

TEST_CASE("config errors carry the line and field") {
    auto message = [](const std::string& text) {
        try {
            (void)sac::parse_scenario(text);
        } catch (const sac::ConfigError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK_THAT(message("# c\norbit.r0_m = 6e5\nbogus.key = 1\n"), ContainsSubstring("line 3") && ContainsSubstring("bogus.key"));
    CHECK_THAT(message("orbit.r0_m = abc\n"), ContainsSubstring("line 1") && ContainsSubstring("abc"));
    CHECK_THAT(message("\n\norbit.r0_m\n"), ContainsSubstring("line 3"));
    CHECK_THAT(message("run.mode = fast\n"), ContainsSubstring("sac"));
    CHECK_THAT(message("run.noise = maybe\n"), ContainsSubstring("line 1"));
    CHECK_THAT(message("ue[0].colour = red\n"), ContainsSubstring("colour"));
    CHECK_THAT(message("run.trials = -3\n"), ContainsSubstring("line 1"));
    CHECK_THROWS_WITH(sac::load_scenario("/nonexistent/x.cfg"), ContainsSubstring("/nonexistent/x.cfg"));

    auto validation = [](auto mutate) {
        auto cfg = scenario("scenario_a");
        mutate(cfg);
        try {
            cfg.validate();
        } catch (const sac::ConfigError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK_THAT(validation([](auto& c) { c.ues.clear(); }), ContainsSubstring("UE"));
    CHECK_THAT(validation([](auto& c) { c.trials = 0; }), ContainsSubstring("run.trials"));
    CHECK_THAT(validation([](auto& c) { c.code_rate = 1.5; }), ContainsSubstring("fec.code_rate"));
    CHECK_THAT(validation([](auto& c) { c.ues[1].id = c.ues[0].id; }), ContainsSubstring("ue[1].id"));
    CHECK_THAT(validation([](auto& c) { c.ues[0].x_m = 7e4; }), ContainsSubstring("ue[0].x_m"));
    CHECK_THAT(validation([](auto& c) { c.system.ofdm.subcarriers = 0; }), ContainsSubstring("system"));
    CHECK_THAT(validation([](auto& c) { c.pilot_spacing = 1; }), ContainsSubstring("pilots"));
    CHECK_THAT(validation([](auto& c) { c.crc_bits = 5; }), ContainsSubstring("fec"));
    CHECK(validation([](auto&) {}).empty());
}

TEST_CASE("baseline configuration") {
    const auto cfg = scenario("scenario_a");
    const auto base = cfg.baseline();
    CHECK(base.mode == sac::RunMode::nosac);
    CHECK(base.system.ofdm.symbols == 1);
    CHECK(base.zero_padding == 1);
    REQUIRE(base.ues.size() == 1);
    CHECK(base.ues[0].x_m == 0.0);
    CHECK(base.ues[0].id == cfg.ues[0].id);
    CHECK(base.polar().info_bits == cfg.polar().info_bits);
    CHECK(base.system.ofdm.subcarriers == cfg.system.ofdm.subcarriers);
    // The same transmit power loses exactly the aperture gain.
    CHECK_THAT(sac::predicted_snr_db(cfg, 0.0) - sac::predicted_snr_db(base, 0.0), WithinAbs(10.0 * std::log10(93.0), 1e-9));
    CHECK_THAT(sac::predicted_snr_db(cfg, -10.0), WithinAbs(-8.55, 0.02));
}

TEST_CASE("noise-free trials decode without errors") {
    for (const char* name : {"scenario_a", "scenario_b"}) {
        auto cfg = scenario(name);
        cfg.noise = false;
        for (auto csi : {sac::CsiMode::pilot, sac::CsiMode::ideal}) {
            cfg.csi = csi;
            const auto rec = sac::run_trial(cfg, -10.0, 5);
            REQUIRE(rec.ues.size() == 2);
            for (const auto& o : rec.ues) {
                CHECK(o.error.empty());
                CHECK(o.detected);
                CHECK(o.crc_ok);
                CHECK(o.bit_errors == 0);
                CHECK_FALSE(o.block_error());
                CHECK(std::abs(o.x_hat_m - o.x_m) < 50.0);
            }
        }
    }
    auto single = scenario("scenario_a");
    single.noise = false;
    single.ues = {{7, 3.0 * 990.65, std::nullopt}};
    const auto rec = sac::run_trial(single, -30.0, 1);
    CHECK(rec.ues[0].crc_ok);
    CHECK(rec.ues[0].bit_errors == 0);

    single.mode = sac::RunMode::nosac;
    const auto base = sac::run_trial(single, -30.0, 1);
    REQUIRE(base.ues.size() == 1);
    CHECK(base.ues[0].crc_ok);
    CHECK(base.ues[0].bit_errors == 0);
}

TEST_CASE("trials are deterministic and seed dependent") {
    const auto cfg = scenario("scenario_b");
    const auto a = sac::run_trial(cfg, 4.0, 123, 7);
    const auto b = sac::run_trial(cfg, 4.0, 123, 7);
    CHECK(a == b);
    CHECK(a.trial == 7);
    const auto c = sac::run_trial(cfg, 4.0, 124, 7);
    CHECK(c.ues[0].measured_snr_db != a.ues[0].measured_snr_db);
    CHECK(sac::trial_seed(1, 0, 0) != sac::trial_seed(1, 0, 1));
    CHECK(sac::trial_seed(1, 0, 1) != sac::trial_seed(1, 1, 0));
    CHECK(sac::mix_seed(5, 6) == sac::mix_seed(5, 6));
}

TEST_CASE("one-point sweep equals aggregated trials") {
    auto cfg = scenario("scenario_a");
    cfg.ptx_dbm = {4.0};
    cfg.trials = 8;
    cfg.seed = 9;
    const auto sweep = sac::run_sweep(cfg, {.workers = 1, .profile = false});
    std::vector<sac::TrialRecord> records;
    for (std::size_t t = 0; t < cfg.trials; ++t)
        records.push_back(sac::run_trial(cfg, 4.0, sac::trial_seed(cfg.seed, 0, t), t));
    const auto point = sac::aggregate(4.0, records);
    REQUIRE(sweep.curve.points.size() == 1);
    const auto& p = sweep.curve.points[0];
    CHECK(p.errors == point.errors);
    CHECK(p.trials == 8);
    CHECK(p.mean_bler == point.mean_bler);
    for (std::size_t u = 0; u < 2; ++u) {
        CHECK(p.ues[u].errors == point.ues[u].errors);
        CHECK(p.ues[u].doa_rmse_m == point.ues[u].doa_rmse_m);
    }
    CHECK_FALSE(sweep.profile.has_value());
}

TEST_CASE("aggregation arithmetic") {
    std::vector<sac::TrialRecord> records(4);
    for (std::size_t t = 0; t < 4; ++t) {
        sac::UeOutcome a;
        a.ue_id = 1;
        a.x_m = 100.0;
        a.detected = true;
        a.x_hat_m = 100.0 + (t % 2 ? 3.0 : -3.0);
        a.crc_ok = t != 0;
        a.measured_snr_db = 5.0;
        sac::UeOutcome b = a;
        b.ue_id = 2;
        b.crc_ok = true;
        b.bit_errors = t == 3 ? 2 : 0;
        b.error = t == 2 ? "boom" : "";
        records[t].ues = {a, b};
    }
    const auto p = sac::aggregate(1.0, records);
    CHECK(p.ues[0].errors == 1);
    CHECK(p.ues[1].errors == 2);
    CHECK(p.errors == 3);
    CHECK(p.mean_bler == 3.0 / 8.0);
    CHECK(p.component_errors == 1);
    CHECK_THAT(p.ues[0].doa_rmse_m, WithinAbs(3.0, 1e-12));
    CHECK(p.ues[0].mean_snr_db == 5.0);
    CHECK(p.ues[1].ci.lo < 0.5);
    CHECK(p.ues[1].ci.hi > 0.5);
}

TEST_CASE("parallel sweep matches serial") {
    const auto cfg = small_sweep();
    const auto serial = sac::run_sweep(cfg, {.workers = 1});
    const auto parallel = sac::run_sweep(cfg, {.workers = 4});
    const auto d1 = scratch("serial");
    const auto d2 = scratch("parallel");
    const auto f1 = sac::write_results(serial, cfg, d1);
    const auto f2 = sac::write_results(parallel, cfg, d2);
    CHECK(slurp(f1.bler_csv) == slurp(f2.bler_csv));
    CHECK(slurp(f1.mean_bler_csv) == slurp(f2.mean_bler_csv));
    CHECK(slurp(f1.profile_csv) == slurp(f2.profile_csv));
    CHECK(sac::manifest_json(serial, cfg, "t") == sac::manifest_json(parallel, cfg, "t"));
    fs::remove_all(d1);
    fs::remove_all(d2);
}

TEST_CASE("reruns write byte-identical results") {
    const auto cfg = small_sweep();
    const auto d1 = scratch("run1");
    const auto d2 = scratch("run2");
    const auto f1 = sac::write_results(sac::run_sweep(cfg, {.workers = 2}), cfg, d1);
    const auto f2 = sac::write_results(sac::run_sweep(cfg, {.workers = 2}), cfg, d2);
    CHECK(slurp(f1.bler_csv) == slurp(f2.bler_csv));
    CHECK(slurp(f1.mean_bler_csv) == slurp(f2.mean_bler_csv));
    CHECK(slurp(f1.profile_csv) == slurp(f2.profile_csv));
    auto m1 = nlohmann::json::parse(slurp(f1.manifest));
    auto m2 = nlohmann::json::parse(slurp(f2.manifest));
    m1.erase("generated_utc");
    m2.erase("generated_utc");
    CHECK(m1 == m2);
    fs::remove_all(d1);
    fs::remove_all(d2);
}

TEST_CASE("written CSV files round trip") {
    auto cfg = small_sweep();
    const auto result = sac::run_sweep(cfg, {.workers = 2});
    const auto dir = scratch("roundtrip");
    const auto files = sac::write_results(result, cfg, dir);

    const auto bler = sac::read_csv(files.bler_csv);
    CHECK(bler.header == std::vector<std::string>{"ptx_dbm", "ue_id", "trials", "errors", "bler", "ci_lo", "ci_hi", "doa_rmse_m"});
    REQUIRE(bler.rows.size() == cfg.ptx_dbm.size() * cfg.ues.size());
    std::size_t row = 0;
    for (const auto& p : result.curve.points) {
        for (const auto& u : p.ues) {
            const auto& r = bler.rows[row++];
            CHECK(r[0] == p.ptx_dbm);
            CHECK(r[1] == static_cast<double>(u.ue_id));
            CHECK(r[2] == static_cast<double>(u.trials));
            CHECK(r[3] == static_cast<double>(u.errors));
            CHECK_THAT(r[4], WithinRel(u.bler, 1e-9));
            CHECK_THAT(r[5], WithinAbs(u.ci.lo, 1e-9));
            CHECK_THAT(r[6], WithinAbs(u.ci.hi, 1e-9));
            CHECK_THAT(r[7], WithinRel(u.doa_rmse_m, 1e-9));
        }
    }

    const auto mean = sac::read_csv(files.mean_bler_csv);
    CHECK(mean.header == std::vector<std::string>{"ptx_dbm", "trials", "errors", "mean_bler", "ci_lo", "ci_hi"});
    REQUIRE(mean.rows.size() == cfg.ptx_dbm.size());
    for (std::size_t i = 0; i < mean.rows.size(); ++i)
        CHECK_THAT(mean.rows[i][3], WithinAbs(result.curve.points[i].mean_bler, 1e-9));

    REQUIRE(result.profile.has_value());
    const auto prof = sac::read_csv(files.profile_csv);
    CHECK(prof.header == std::vector<std::string>{"bin", "doppler_hz", "angle_deg", "cross_range_m", "norm_db"});
    REQUIRE(prof.rows.size() == result.profile->norms.size());
    double top = -1e9;
    for (std::size_t i = 0; i < prof.rows.size(); ++i) {
        CHECK_THAT(prof.rows[i][0], WithinAbs(result.profile->bins[i], 1e-9));
        CHECK_THAT(prof.rows[i][3], WithinRel(result.profile->cross_range_m[i], 1e-9));
        CHECK(prof.rows[i][4] <= 0.0);
        top = std::max(top, prof.rows[i][4]);
    }
    CHECK(top == 0.0);
    fs::remove_all(dir);
}

TEST_CASE("manifest echoes the resolved configuration") {
    auto cfg = small_sweep();
    const auto result = sac::run_sweep(cfg, {.workers = 2, .profile = false});
    const auto m = nlohmann::json::parse(sac::manifest_json(result, cfg, "2026-01-01T00:00:00Z"));
    CHECK(m["tool"] == "sacsim");
    CHECK(m["version"] == sac::kToolVersion);
    CHECK(m["generated_utc"] == "2026-01-01T00:00:00Z");
    CHECK(m["seed"] == 42);
    CHECK(m["mode"] == "sac");
    for (const auto& [key, value] : cfg.entries()) {
        REQUIRE(m["config"].contains(key));
        CHECK(m["config"][key] == value);
    }
    CHECK(m["derived"]["info_bits"] == 300);
    CHECK(m["derived"]["coded_bits"] == 450);
    CHECK_THAT(m["derived"]["cross_range_resolution_m"].get<double>(), WithinRel(990.65, 0.005));
    CHECK(m["points"].size() == 2);
    CHECK(m.contains("threshold"));
    CHECK_FALSE(m.contains("baseline"));

    cfg.mode = sac::RunMode::nosac;
    cfg.trials = 2;
    const auto base = sac::run_sweep(cfg, {.workers = 1});
    CHECK_FALSE(base.profile.has_value());
    const auto mb = nlohmann::json::parse(sac::manifest_json(base, cfg, "t"));
    CHECK(mb["mode"] == "nosac");
    CHECK(mb.contains("baseline"));
    CHECK(mb["config"]["ofdm.m_symbols"] == "1");
}

TEST_CASE("unwritable output directory is reported with its path") {
    const auto cfg = small_sweep();
    sac::SweepResult empty;
    const fs::path blocker = scratch("blocker");
    { std::ofstream(blocker) << "x"; }
    CHECK_THROWS_WITH(sac::write_results(empty, cfg, blocker / "sub"), ContainsSubstring(blocker.string()));
    fs::remove_all(blocker);
}

TEST_CASE("Clopper-Pearson reference values") {
    const auto zero = sac::clopper_pearson(0, 10);
    CHECK(zero.lo == 0.0);
    CHECK_THAT(zero.hi, WithinAbs(1.0 - std::pow(0.025, 0.1), 1e-10));
    const auto all = sac::clopper_pearson(10, 10);
    CHECK(all.hi == 1.0);
    CHECK_THAT(all.lo, WithinAbs(std::pow(0.025, 0.1), 1e-10));
    const auto mid = sac::clopper_pearson(5, 10);
    CHECK_THAT(mid.lo, WithinAbs(0.187086, 1e-5));
    CHECK_THAT(mid.hi, WithinAbs(0.812914, 1e-5));
    CHECK_THROWS(sac::clopper_pearson(11, 10));
}

TEST_CASE("Clopper-Pearson intervals cover forced error rates") {
    std::mt19937_64 rng(2024);
    for (double p : {0.005, 0.05, 0.1, 0.3, 0.5, 0.9}) {
        std::binomial_distribution<std::size_t> draw(200, p);
        int covered = 0;
        const int reps = 2000;
        for (int i = 0; i < reps; ++i) {
            const auto ci = sac::clopper_pearson(draw(rng), 200);
            if (ci.lo <= p && p <= ci.hi) ++covered;
        }
        UNSCOPED_INFO("p = " << p << " coverage " << covered);
        CHECK(covered >= 0.93 * reps);
    }
}

TEST_CASE("BLER = 0.1 crossing") {
    const auto x = sac::find_crossing({0.0, 1.0}, {1.0, 0.01});
    REQUIRE(x.has_value());
    CHECK_THAT(*x, WithinAbs(0.5, 1e-12));
    const auto y = sac::find_crossing({0.0, 1.0, 2.0, 3.0}, {0.9, 0.5, 0.1, 0.0});
    CHECK_THAT(*y, WithinAbs(2.0, 1e-12));
    // Zero errors are floored at half an error.
    const auto z = sac::find_crossing({0.0, 1.0}, {0.2, 0.0}, 0.1, 200);
    const double y0 = std::log10(0.2);
    const double y1 = std::log10(0.5 / 200.0);
    CHECK_THAT(*z, WithinAbs((-1.0 - y0) / (y1 - y0), 1e-12));
    CHECK_FALSE(sac::find_crossing({0.0, 1.0}, {0.5, 0.3}).has_value());
    CHECK_FALSE(sac::find_crossing({0.0, 1.0}, {0.05, 0.01}).has_value());
    CHECK_THROWS(sac::find_crossing({0.0}, {0.1, 0.2}));
}

TEST_CASE("mean BLER does not increase with transmit power") {
    auto cfg = scenario("scenario_a");
    cfg.ptx_dbm = {2.0, 3.0, 4.0, 5.0, 6.0};
    cfg.trials = 60;
    cfg.seed = 3;
    const auto result = sac::run_sweep(cfg, {.workers = 2, .profile = false});
    const auto& pts = result.curve.points;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        if (pts[i].mean_bler <= pts[i - 1].mean_bler) continue;
        CHECK(pts[i].mean_ci.lo <= pts[i - 1].mean_ci.hi);
    }
    CHECK(pts.front().mean_bler > pts.back().mean_bler);
    for (const auto& p : pts) {
        CHECK(p.mean_bler >= 0.0);
        CHECK(p.mean_bler <= 1.0);
        CHECK(p.trials == 60);
    }
}
