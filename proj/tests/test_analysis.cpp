// SPDX-License-Identifier: Apache-2.0
//
// beamscan: directional 60 GHz channel-sounder simulation and analysis
// Copyright (C) 2026 The beamscan authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace beamscan;
using testutil::to_dbm;
using testutil::to_mw;

namespace
{

sounder::PdpTensor filled(std::size_t n_dly, std::size_t n_dir, std::size_t n_scan, float value)
{
    sounder::PdpTensor x(n_dly, n_dir, n_scan, 0.8, 3.2e-3, value);
    std::fill(x.data().begin(), x.data().end(), value);
    return x;
}

array::PatternTable coarse_codebook()
{
    array::CodebookSpec spec;
    spec.az_step_deg = 10.0;
    spec.el_step_deg = 10.0;
    return array::synth_codebook(spec);
}

std::vector<double> model_rssi(const array::PatternTable &tx, const array::PatternTable &rx,
                               const array::AoaAodPair &w, double rssi0)
{
    std::vector<double> out(tx.beams() * rx.beams());
    for (std::size_t n = 0; n < out.size(); ++n)
        out[n] = rssi0 + array::combined_gain(tx, rx, array::pac_from_index(n, rx.beams()), w);
    return out;
}

raytrace::RayPath synthetic_path(double delay_ns, const array::AoaAodPair &w, double gain)
{
    raytrace::RayPath p;
    p.delay_ns = delay_ns;
    p.length_m = delay_ns * kLightSpeedMPerNs;
    p.omega = w;
    p.path_gain_db = gain;
    p.vertices = {{0, 0, 1}, {p.length_m, 0, 1}};
    return p;
}

} // namespace

TEST_CASE("omni PDP")
{
    SUBCASE("one PAC: the PDP itself")
    {
        auto x = filled(8, 1, 3, -80.0f);
        x.at(4, 0, 1) = -41.0f;
        const auto s = analysis::synthesize_omni(x);
        for (std::size_t j = 0; j < 3; ++j)
            for (std::size_t t = 0; t < 8; ++t)
                CHECK(s.at(t, j) == x.at(t, 0, j));
    }
    SUBCASE("identical PACs")
    {
        auto x = filled(6, 5, 2, -70.0f);
        for (std::size_t n = 0; n < 5; ++n)
            x.at(3, n, 1) = -30.0f;
        const auto s = analysis::synthesize_omni(x);
        CHECK(s.at(3, 1) == -30.0f);
        CHECK(s.at(2, 1) == -70.0f);
    }
    SUBCASE("random tensor against a brute-force max")
    {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<float> u(-100.0f, -20.0f);
        sounder::PdpTensor x(16, 8, 10, 0.8, 3.2e-3, -80.0);
        for (auto &v : x.data())
            v = u(rng);
        const auto s = analysis::synthesize_omni(x);
        CHECK(s == analysis::synthesize_omni_reference(x));
        for (std::size_t j = 0; j < 10; ++j)
            for (std::size_t t = 0; t < 16; ++t)
            {
                float m = -1e30f;
                for (std::size_t n = 0; n < 8; ++n)
                    m = std::max(m, x.at(t, n, j));
                CHECK(s.at(t, j) == m);
            }
    }
}

TEST_CASE("LOS index detection")
{
    auto x = filled(100, 2, 4, -80.0f);
    for (std::size_t j = 0; j < 4; ++j)
        x.at(25, 1, j) = -60.0f;
    CHECK(analysis::detect_los_index(analysis::synthesize_omni(x)) == 25);

    // a later arrival 5 dB hotter does not displace the first one
    for (std::size_t j = 0; j < 4; ++j)
        x.at(60, 0, j) = -55.0f;
    CHECK(analysis::detect_los_index(analysis::synthesize_omni(x)) == 25);

    // spread pulse: the rising edge is followed to its top
    for (std::size_t j = 0; j < 4; ++j)
    {
        x.at(24, 1, j) = -66.0f;
        x.at(26, 1, j) = -66.0f;
    }
    CHECK(analysis::detect_los_index(analysis::synthesize_omni(x)) == 25);

    CHECK_THROWS_AS(analysis::detect_los_index(analysis::synthesize_omni(filled(100, 2, 4, -80.0f))),
                    analysis::NoSignalError);
}

TEST_CASE("RSSI extraction averages in mW")
{
    auto x = filled(4, 2, 2, -50.0f);
    CHECK(analysis::extract_rssi(x, 1)[0] == doctest::Approx(-50.0));
    x.at(2, 1, 0) = -50.0f;
    x.at(2, 1, 1) = -60.0f;
    CHECK(std::abs(analysis::extract_rssi(x, 2)[1] - (-52.6)) <= 0.05);
    CHECK(analysis::extract_rssi(x, 2)[1] == doctest::Approx(-52.5964).epsilon(1e-5));
    CHECK_THROWS_AS(analysis::extract_rssi(x, 4), std::out_of_range);
}

TEST_CASE("zero-jitter extraction matches the prediction plus noise")
{
    const auto scene = env::load_scene_file(testutil::data_path("reference.scene"));
    const auto cb = array::synth_codebook({});
    const auto paths = raytrace::trace_paths(scene.environment, scene.tx, scene.rx, 5.0);
    sounder::SimConfig cfg;
    cfg.n_scan = 3;
    cfg.noise_sigma_db = 0.0;
    const auto x = sounder::synthesize_tensor(paths, cb, cb, cfg);
    const std::size_t k = analysis::detect_los_index(analysis::synthesize_omni(x));
    CHECK(k == 22);
    const auto rssi = analysis::extract_rssi(x, k);
    const auto pred = raytrace::predict_rssi(paths[0], cb, cb);
    for (std::size_t n = 0; n < 144; ++n)
        CHECK(std::abs(rssi[n] - to_dbm(to_mw(pred[n]) + to_mw(cfg.noise_floor_dbm))) <= 0.2);

    const auto noise = analysis::pac_noise_mw(x, k, 5);
    const auto clean = analysis::extract_rssi_denoised(x, k, noise);
    for (std::size_t n = 0; n < 144; ++n)
    {
        CHECK(noise[n] == doctest::Approx(to_mw(cfg.noise_floor_dbm)).epsilon(1e-5));
        CHECK(clean[n] >= to_dbm(noise[n]) - 30.0 - 1e-9);
        if (pred[n] > cfg.noise_floor_dbm)
            CHECK(clean[n] == doctest::Approx(pred[n]).epsilon(1e-4));
    }
}

TEST_CASE("LS direction finding")
{
    const auto cb = array::synth_codebook({});

    SUBCASE("exact model")
    {
        const array::AoaAodPair w{-24.0, 36.0, 10.0, -22.0};
        const auto est = analysis::ls_direction_find(model_rssi(cb, cb, w, -50.0), cb, cb);
        CHECK(est.omega_hat == w);
        CHECK(est.residual_var_db2 == doctest::Approx(0.0));
        CHECK(est.rssi0_dbm == doctest::Approx(-50.0));
    }
    SUBCASE("constant offset moves RSSI_0 only")
    {
        const array::AoaAodPair w{6.0, -2.0, -30.0, 18.0};
        auto r = model_rssi(cb, cb, w, -50.0);
        std::mt19937_64 rng(3);
        std::normal_distribution<double> z(0.0, 1.0);
        for (auto &v : r)
            v += z(rng);
        const auto a = analysis::ls_direction_find(r, cb, cb);
        for (auto &v : r)
            v += 7.25;
        const auto b = analysis::ls_direction_find(r, cb, cb);
        CHECK(a.omega_hat == b.omega_hat);
        CHECK(b.rssi0_dbm - a.rssi0_dbm == doctest::Approx(7.25));
        CHECK(b.residual_var_db2 == doctest::Approx(a.residual_var_db2));
    }
    SUBCASE("noisy recovery within one grid step")
    {
        std::mt19937_64 rng(11);
        std::normal_distribution<double> z(0.0, 1.0);
        std::uniform_int_distribution<std::size_t> ia(0, cb.az_grid().size() - 1), ie(0, cb.el_grid().size() - 1);
        int hits = 0;
        for (int t = 0; t < 20; ++t)
        {
            const array::AoaAodPair w{cb.az_grid()[ia(rng)], cb.az_grid()[ia(rng)], cb.el_grid()[ie(rng)],
                                      cb.el_grid()[ie(rng)]};
            auto r = model_rssi(cb, cb, w, -55.0);
            for (auto &v : r)
                v += z(rng);
            const auto est = analysis::ls_direction_find(r, cb, cb);
            const auto &h = est.omega_hat;
            hits += std::abs(h.phi_tx - w.phi_tx) <= 2 && std::abs(h.phi_rx - w.phi_rx) <= 2 &&
                    std::abs(h.theta_tx - w.theta_tx) <= 2 && std::abs(h.theta_rx - w.theta_rx) <= 2;
        }
        CHECK(hits >= 18);
    }
    SUBCASE("input errors")
    {
        std::vector<double> short_vec(10, -50.0);
        CHECK_THROWS_AS(analysis::ls_direction_find(short_vec, cb, cb), std::invalid_argument);
        std::vector<double> bad(144, -50.0);
        bad[7] = std::numeric_limits<double>::quiet_NaN();
        CHECK_THROWS_AS(analysis::ls_direction_find(bad, cb, cb), std::invalid_argument);
    }
}

TEST_CASE("separable LS search equals the 4-D brute force")
{
    const auto cb = coarse_codebook();
    std::mt19937_64 rng(21);
    std::normal_distribution<double> z(0.0, 2.0);
    std::uniform_int_distribution<std::size_t> ia(0, cb.az_grid().size() - 1), ie(0, cb.el_grid().size() - 1);
    for (int t = 0; t < 6; ++t)
    {
        const array::AoaAodPair w{cb.az_grid()[ia(rng)], cb.az_grid()[ia(rng)], cb.el_grid()[ie(rng)],
                                  cb.el_grid()[ie(rng)]};
        auto r = model_rssi(cb, cb, w, -60.0);
        for (auto &v : r)
            v += z(rng);
        const auto fast = analysis::ls_direction_find(r, cb, cb);
        const auto ref = analysis::ls_direction_find_reference(r, cb, cb);
        CHECK(fast.omega_hat == ref.omega_hat);
        CHECK(fast.residual_var_db2 == doctest::Approx(ref.residual_var_db2));
        CHECK(fast.rssi0_dbm == doctest::Approx(ref.rssi0_dbm));
    }
    // flat input: every node ties, the boresight wins
    const std::vector<double> flat(144, -60.0);
    const auto cbf = testutil::flat_table(3.0, 12);
    const auto tie = analysis::ls_direction_find(flat, cbf, cbf);
    CHECK(tie.omega_hat == analysis::ls_direction_find_reference(flat, cbf, cbf).omega_hat);
}

TEST_CASE("noise-masked LS search")
{
    const auto cb = coarse_codebook();
    const array::AoaAodPair w{20.0, -40.0, 0.0, 10.0};
    auto r = model_rssi(cb, cb, w, -60.0);
    analysis::LsOptions opt;
    opt.mask_below_dbm = -45.0;
    // clamp the masked-out PACs to a flat floor, as the noise would
    for (auto &v : r)
        v = std::max(v, -46.0);
    const auto est = analysis::ls_direction_find(r, cb, cb, opt);
    const auto ref = analysis::ls_direction_find_reference(r, cb, cb, opt);
    CHECK(est.omega_hat == ref.omega_hat);
    CHECK(est.omega_hat == w);
    opt.mask_below_dbm = 0.0;
    CHECK_THROWS_AS(analysis::ls_direction_find(r, cb, cb, opt), std::invalid_argument);
}

TEST_CASE("correlation coefficient")
{
    const std::vector<double> a{1, 4, 2, 8, 5};
    std::vector<double> b = a, c;
    for (double v : a)
        c.push_back(-v + 3.0);
    CHECK(analysis::correlation_rho(a, b) == doctest::Approx(1.0));
    CHECK(analysis::correlation_rho(a, c) == doctest::Approx(-1.0));
    CHECK_THROWS_AS(analysis::correlation_rho(a, std::vector<double>(5, 2.0)), std::invalid_argument);
    CHECK_THROWS_AS(analysis::correlation_rho(a, std::vector<double>(4, 2.0)), std::invalid_argument);
}

TEST_CASE("power report")
{
    SUBCASE("noiseless single path carries all the power")
    {
        auto x = filled(64, 1, 5, -250.0f);
        for (std::size_t j = 0; j < 5; ++j)
            x.at(30, 0, j) = -50.0f;
        const auto s = analysis::synthesize_omni(x);
        const auto r = analysis::power_report(s, 30, {}, 5);
        CHECK(r.los_fraction_pct == doctest::Approx(100.0));
        CHECK(r.p_los_dbm == doctest::Approx(-50.0));
        CHECK(r.p_rx_dbm == doctest::Approx(-50.0));
        CHECK(r.p_noise_dbm == doctest::Approx(-250.0));
    }
    SUBCASE("flat noise region over 1750 scans")
    {
        const auto flat = testutil::flat_table(0.0);
        raytrace::RayPath p = synthetic_path(40.0, {}, -40.0);
        sounder::SimConfig cfg;
        cfg.noise_floor_dbm = -80.0;
        cfg.rng_seed = 4;
        const auto x = sounder::synthesize_tensor({p}, flat, flat, cfg);
        const auto s = analysis::synthesize_omni(x);
        const std::size_t k = analysis::detect_los_index(s);
        CHECK(k == 50);
        const auto r = analysis::power_report(s, k, {}, 5);
        CHECK(std::abs(r.p_noise_dbm - (-80.0)) <= 0.1);
        CHECK(r.p_los_dbm == doctest::Approx(-40.0).epsilon(0.01));
    }
    SUBCASE("NLOS rows and fraction")
    {
        auto x = filled(64, 1, 2, -90.0f);
        for (std::size_t j = 0; j < 2; ++j)
        {
            x.at(20, 0, j) = -50.0f;
            x.at(30, 0, j) = -60.0f;
        }
        const auto s = analysis::synthesize_omni(x);
        const std::vector<std::size_t> nlos{30};
        const auto r = analysis::power_report(s, 20, nlos, 5);
        const double los = to_mw(-50.0) - to_mw(-90.0), nl = to_mw(-60.0) - to_mw(-90.0);
        REQUIRE(r.nlos.size() == 1);
        CHECK(r.nlos[0].p_nlos_dbm == doctest::Approx(to_dbm(nl)));
        CHECK(r.nlos[0].p_rel_db == doctest::Approx(to_dbm(nl) - to_dbm(los)));
        CHECK(r.los_fraction_pct == doctest::Approx(100.0 * los / (los + nl)));
        CHECK(r.p_av_dbm.size() == 64);
        CHECK_THROWS_AS(analysis::power_report(s, 5, nlos, 5), std::invalid_argument);
        CHECK_THROWS_AS(analysis::power_report(s, 64, nlos, 5), std::out_of_range);
    }
    SUBCASE("reference cell implies a LOS power inside the reported range")
    {
        const double p_los = -58.51 - (-9.68);
        CHECK(p_los == doctest::Approx(-48.83));
        CHECK(analysis::relative_power_db(-58.51, p_los) == doctest::Approx(-9.68));
        CHECK(p_los >= -49.0);
        CHECK(p_los <= -44.0);
    }
}

TEST_CASE("NLOS peak detection")
{
    auto x = filled(128, 1, 2, -90.0f);
    auto set = [&](std::size_t t, float v) {
        for (std::size_t j = 0; j < 2; ++j)
            x.at(t, 0, j) = v;
    };
    set(20, -40.0f);
    const double pn = -90.0;
    CHECK(analysis::detect_nlos_peaks(analysis::synthesize_omni(x), pn, 20).empty());

    const std::vector<std::size_t> bins{27, 35, 44, 60, 94};
    for (std::size_t b : bins)
        set(b, -75.0f);
    CHECK(analysis::detect_nlos_peaks(analysis::synthesize_omni(x), pn, 20) == bins);

    set(70, -88.0f); // 2 dB above the noise
    CHECK(analysis::detect_nlos_peaks(analysis::synthesize_omni(x), pn, 20) == bins);

    // neighbours closer than the separation: the stronger one survives
    set(45, -70.0f);
    const auto got = analysis::detect_nlos_peaks(analysis::synthesize_omni(x), pn, 20);
    CHECK(std::find(got.begin(), got.end(), 45) != got.end());
    CHECK(std::find(got.begin(), got.end(), 44) == got.end());
}

TEST_CASE("candidate matching")
{
    const auto cb = array::synth_codebook({});
    const array::AoaAodPair truth{10.0, -20.0, -6.0, 8.0};
    analysis::PathEstimate est;
    est.delay_bin = 30;
    est.rssi_dbm = model_rssi(cb, cb, truth, -60.0);
    est.omega_hat = truth;
    analysis::MatchOptions mo;
    mo.delay_offset_bins = 0;

    SUBCASE("sole survivor is the true path")
    {
        const std::vector<raytrace::RayPath> tr{synthetic_path(24.0, {12.0, -18.0, -4.0, 5.0}, -55.0)};
        const auto m = analysis::match_candidates(est, tr, cb, cb, mo);
        REQUIRE(m.size() == 1);
        CHECK(m[0].verdict == analysis::Verdict::True);
        REQUIRE(m[0].rho.has_value());
        CHECK(*m[0].rho > 0.9);
    }
    SUBCASE("higher rho wins among survivors at the same delay")
    {
        const std::vector<raytrace::RayPath> tr{synthetic_path(24.0, {14.0, -16.0, -6.0, 8.0}, -55.0),
                                                synthetic_path(24.0, {10.0, -20.0, -6.0, 8.0}, -57.0),
                                                synthetic_path(60.0, truth, -50.0)};
        const auto m = analysis::match_candidates(est, tr, cb, cb, mo);
        CHECK(m[0].verdict == analysis::Verdict::Rejected);
        CHECK(m[1].verdict == analysis::Verdict::True);
        CHECK(m[2].verdict == analysis::Verdict::NonExistent);
        CHECK(*m[1].rho > *m[0].rho);
        CHECK(m[0].angle_gaps_deg[0] == doctest::Approx(4.0));
    }
    SUBCASE("a 6 degree gap rejects regardless of rho")
    {
        const std::vector<raytrace::RayPath> tr{synthetic_path(24.0, {10.0, -20.0, 0.0, 8.0}, -55.0)};
        const auto m = analysis::match_candidates(est, tr, cb, cb, mo);
        CHECK(m[0].verdict == analysis::Verdict::Rejected);
        CHECK_FALSE(m[0].rho.has_value());
    }
    SUBCASE("delay gate of one bin")
    {
        const std::vector<raytrace::RayPath> tr{synthetic_path(23.2, truth, -55.0), synthetic_path(24.8, truth, -55.0),
                                                synthetic_path(22.4, truth, -55.0), synthetic_path(25.6, truth, -55.0)};
        const auto m = analysis::match_candidates(est, tr, cb, cb, mo);
        CHECK(m[0].verdict != analysis::Verdict::NonExistent); // bin 29
        CHECK(m[1].verdict != analysis::Verdict::NonExistent); // bin 31
        CHECK(m[2].verdict == analysis::Verdict::NonExistent); // bin 28
        CHECK(m[3].verdict == analysis::Verdict::NonExistent); // bin 32
    }
    SUBCASE("azimuth gaps wrap around")
    {
        analysis::PathEstimate e2 = est;
        e2.omega_hat.phi_tx = 179.0;
        const std::vector<raytrace::RayPath> tr{synthetic_path(24.0, {-179.0, -20.0, -6.0, 8.0}, -55.0)};
        const auto m = analysis::match_candidates(e2, tr, cb, cb, mo);
        CHECK(m[0].angle_gaps_deg[0] == doctest::Approx(2.0));
    }
    CHECK_THROWS_AS(analysis::match_candidates(est, {}, cb, cb, mo), std::invalid_argument);
}

TEST_CASE("blockage series without a blocker stay flat")
{
    const auto scene = env::load_scene_file(testutil::data_path("reference.scene"));
    const auto cb = array::synth_codebook({});
    const auto cases = array::load_case_table(testutil::data_path("cases.txt"));
    const auto &c = array::find_case(cases, 8);
    const auto paths =
        raytrace::trace_paths(scene.environment, array::apply_tx(scene.tx, c), array::apply_rx(scene.rx, c), 5.0);
    sounder::SimConfig cfg;
    cfg.n_scan = 200;
    cfg.rng_seed = 8;
    const auto x = sounder::synthesize_tensor(paths, cb, cb, cfg);
    const auto a = analysis::analyze_case(x, paths, cb, cb);
    const auto series = analysis::blockage_timeseries(x, a.paths);
    REQUIRE_FALSE(series.empty());
    CHECK(series[0].traced_index == 0);
    for (const auto &s : series)
    {
        CHECK(s.rssi_dbm.size() == 200);
        CHECK(s.time_s[10] == doctest::Approx(10 * 3.2e-3));
        double mean = 0.0;
        for (double v : s.rssi_dbm)
            mean += v / 200.0;
        for (double v : s.rssi_dbm)
            CHECK(std::abs(v - mean) < 5.0 * cfg.noise_sigma_db);
    }
    CHECK_THROWS_AS(analysis::blockage_timeseries(x, {}), std::invalid_argument);
}

TEST_CASE("ceiling twin merges into the LOS bin")
{
    const auto scene = env::load_scene_file(testutil::data_path("reference_ceiling.scene"));
    const auto cb = array::synth_codebook({});
    const auto cases = array::load_case_table(testutil::data_path("cases.txt"));
    const auto &c = array::find_case(cases, 2);
    const auto paths =
        raytrace::trace_paths(scene.environment, array::apply_tx(scene.tx, c), array::apply_rx(scene.rx, c), 5.0);
    sounder::SimConfig cfg;
    cfg.n_scan = 300;
    cfg.rng_seed = 3;
    const auto x = sounder::synthesize_tensor(paths, cb, cb, cfg);
    const auto a = analysis::analyze_case(x, paths, cb, cb);
    CHECK(a.k_los == 22);
    for (const auto &row : a.power.nlos)
        CHECK(row.delay_bin > a.k_los + 1);
    // one measured path at the LOS bin: LOS true, its ceiling twin a rejected candidate
    const auto &los = a.paths[0];
    const auto *t = los.true_match();
    REQUIRE(t != nullptr);
    CHECK(paths[t->candidate].signature() == "LOS");
    int ceiling_seen = 0;
    for (const auto &m : los.matches)
        if (paths[m.candidate].signature() == "ceiling")
        {
            ++ceiling_seen;
            CHECK(m.verdict == analysis::Verdict::Rejected);
        }
    CHECK(ceiling_seen == 1);
    std::size_t true_count = 0;
    for (const auto &ip : a.paths)
        true_count += ip.true_match() != nullptr;
    CHECK(true_count <= a.paths.size());
}
