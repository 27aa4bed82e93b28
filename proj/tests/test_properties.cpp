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
using testutil::pose_at;

namespace
{

using Key = std::pair<std::vector<raytrace::Interaction>, double>;

std::vector<Key> path_keys(const std::vector<raytrace::RayPath> &paths, bool reverse)
{
    std::vector<Key> keys;
    for (const auto &p : paths)
    {
        auto it = p.interactions;
        if (reverse)
            std::reverse(it.begin(), it.end());
        keys.emplace_back(it, std::round(p.length_m * 1e7) / 1e7);
    }
    std::sort(keys.begin(), keys.end(), [](const Key &a, const Key &b) {
        if (a.second != b.second)
            return a.second < b.second;
        return std::lexicographical_compare(
            a.first.begin(), a.first.end(), b.first.begin(), b.first.end(),
            [](const auto &x, const auto &y) { return x.surface_id < y.surface_id; });
    });
    return keys;
}

bool path_crosses(const raytrace::RayPath &p, const env::Surface &s)
{
    for (std::size_t i = 0; i + 1 < p.vertices.size(); ++i)
        if (testutil::segment_hits(p.vertices[i], p.vertices[i + 1], s, 1e-6))
            return true;
    return false;
}

raytrace::TraceOptions keep_all()
{
    raytrace::TraceOptions o;
    o.drop_below_strongest_db = 1e9;
    return o;
}

} // namespace

TEST_CASE("local frame round trip")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i)
    {
        const auto pose = pose_at({0, 0, 0}, 180.0 * u(rng), 90.0 * u(rng), 45.0 * u(rng));
        const array::LocalAngles l{179.0 * u(rng), 89.0 * u(rng)};
        const auto back = array::global_to_local(pose, array::local_to_global(pose, l));
        worst = std::max({worst, std::abs(back.phi_deg - l.phi_deg), std::abs(back.theta_deg - l.theta_deg)});
    }
    CHECK(worst <= 1e-9);
}

TEST_CASE("swapping TX and RX reverses every path")
{
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 50; ++trial)
    {
        const auto s = testutil::random_scene(rng, 4);
        const auto fwd = raytrace::trace_paths(s.env, s.tx, s.rx, 0.0, keep_all());
        const auto rev = raytrace::trace_paths(s.env, s.rx, s.tx, 0.0, keep_all());
        REQUIRE(fwd.size() == rev.size());
        CHECK(path_keys(fwd, false) == path_keys(rev, true));
    }
}

TEST_CASE("reflection angles equal on random three-surface scenes")
{
    std::mt19937_64 rng(31);
    std::size_t reflected = 0;
    for (int trial = 0; trial < 200; ++trial)
    {
        const auto s = testutil::random_scene(rng, 3);
        for (const auto &p : raytrace::trace_paths(s.env, s.tx, s.rx, 0.0, keep_all()))
        {
            reflected += p.reflection_count();
            CHECK(testutil::max_reflection_angle_error(p, s.env) <= 1e-6);
        }
    }
    CHECK(reflected > 200);
}

TEST_CASE("removing a surface only adds paths that surface was blocking")
{
    std::mt19937_64 rng(41);
    std::size_t unblocked = 0;
    for (int trial = 0; trial < 100; ++trial)
    {
        const auto s = testutil::random_scene(rng, 5);
        const auto full = raytrace::trace_paths(s.env, s.tx, s.rx, 0.0, keep_all());
        const auto full_keys = path_keys(full, false);
        for (std::size_t k = 0; k < s.env.surfaces.size(); ++k)
        {
            auto reduced = s.env;
            const auto removed = reduced.surfaces[k];
            reduced.surfaces.erase(reduced.surfaces.begin() + static_cast<long>(k));
            for (const auto &p : raytrace::trace_paths(reduced, s.tx, s.rx, 0.0, keep_all()))
            {
                const auto key = path_keys({p}, false).front();
                const auto [lo, hi] = std::equal_range(full_keys.begin(), full_keys.end(), key,
                                                       [](const Key &a, const Key &b) { return a.second < b.second; });
                const bool existed = std::any_of(lo, hi, [&](const Key &f) { return f.first == key.first; });
                if (!existed)
                {
                    ++unblocked;
                    CHECK(path_crosses(p, removed));
                }
            }
        }
    }
    CHECK(unblocked > 0);
}

TEST_CASE("tracing and LS are deterministic")
{
    const auto scene = env::load_scene_file(testutil::data_path("reference.scene"));
    const auto a = raytrace::trace_paths(scene.environment, scene.tx, scene.rx, 5.0);
    const auto b = raytrace::trace_paths(scene.environment, scene.tx, scene.rx, 5.0);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        CHECK(a[i].signature() == b[i].signature());
        CHECK(a[i].length_m == b[i].length_m);
        CHECK(a[i].omega == b[i].omega);
    }
    const auto cb = array::synth_codebook({});
    const auto r = raytrace::predict_rssi(a[1], cb, cb);
    const auto e1 = analysis::ls_direction_find(r, cb, cb);
    const auto e2 = analysis::ls_direction_find(r, cb, cb);
    CHECK(e1.omega_hat == e2.omega_hat);
    CHECK(e1.rssi0_dbm == e2.rssi0_dbm);
}

TEST_CASE("correlation is invariant to positive affine maps")
{
    std::mt19937_64 rng(51);
    std::normal_distribution<double> g(0.0, 5.0);
    for (int trial = 0; trial < 50; ++trial)
    {
        std::vector<double> x(144), y(144), ya(144), yn(144);
        for (std::size_t i = 0; i < x.size(); ++i)
        {
            x[i] = g(rng);
            y[i] = 0.5 * x[i] + g(rng);
            ya[i] = 3.7 * y[i] - 60.0;
            yn[i] = -2.0 * y[i] + 1.0;
        }
        const double r = analysis::correlation_rho(x, y);
        CHECK(analysis::correlation_rho(x, ya) == doctest::Approx(r).epsilon(1e-12));
        CHECK(analysis::correlation_rho(x, yn) == doctest::Approx(-r).epsilon(1e-12));
        CHECK(analysis::correlation_rho(y, x) == doctest::Approx(r).epsilon(1e-12));
    }
}

TEST_CASE("omni PDP dominates every PAC")
{
    const auto scene = env::load_scene_file(testutil::data_path("reference.scene"));
    const auto cb = array::synth_codebook({});
    const auto paths = raytrace::trace_paths(scene.environment, scene.tx, scene.rx, 5.0);
    sounder::SimConfig cfg;
    cfg.n_scan = 20;
    const auto x = sounder::synthesize_tensor(paths, cb, cb, cfg, &*scene.blocker);
    const auto s = analysis::synthesize_omni(x);
    for (std::size_t j = 0; j < x.n_scan(); ++j)
        for (std::size_t t = 0; t < x.n_dly(); ++t)
        {
            bool attained = false;
            for (std::size_t n = 0; n < x.n_dir(); ++n)
            {
                CHECK(s.at(t, j) >= x.at(t, n, j));
                attained = attained || s.at(t, j) == x.at(t, n, j);
            }
            CHECK(attained);
        }
}

TEST_CASE("each beam peaks at its center")
{
    const array::CodebookSpec spec;
    const auto centers = array::beam_centers(spec);
    const auto t = array::synth_codebook(spec);
    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> az(-90.0, 90.0), el(-60.0, 60.0);
    for (std::size_t b = 0; b < centers.size(); ++b)
    {
        const double peak = array::synth_beam_gain(spec, centers[b], centers[b].az_deg, centers[b].el_deg);
        CHECK(peak == spec.peak_gain_dbi);
        for (int i = 0; i < 200; ++i)
        {
            const double a = az(rng), e = el(rng);
            CHECK(array::synth_beam_gain(spec, centers[b], a, e) <= peak);
            CHECK(t.gain(b, a, e) <= t.peak_db(b) + 1e-12);
        }
        // sampled table: the best node is within one grid step of the center
        std::size_t best = 0;
        for (std::size_t i = 0; i < t.grid_size(); ++i)
            if (t.values()[b * t.grid_size() + i] > t.values()[b * t.grid_size() + best])
                best = i;
        const double best_az = t.az_grid()[best / t.el_grid().size()];
        const double best_el = t.el_grid()[best % t.el_grid().size()];
        CHECK(std::abs(best_az - centers[b].az_deg) <= spec.az_step_deg);
        CHECK(std::abs(best_el - centers[b].el_deg) <= spec.el_step_deg);
    }
}

TEST_CASE("blockage attenuation is continuous in time")
{
    const auto scene = env::load_scene_file(testutil::data_path("reference.scene"));
    const auto paths = raytrace::trace_paths(scene.environment, scene.tx, scene.rx, 5.0);
    const auto &traj = *scene.blocker;
    const double dt = 1e-3;
    for (const auto &p : paths)
    {
        double prev = sounder::blockage_attenuation(p, traj.start_time(), traj);
        for (double t = traj.start_time() + dt; t <= traj.end_time(); t += dt)
        {
            const double a = sounder::blockage_attenuation(p, t, traj);
            CHECK(a >= 0.0);
            CHECK(a <= traj.attenuation_db);
            CHECK(std::abs(a - prev) <= 0.5);
            prev = a;
        }
    }
}

TEST_CASE("a true verdict always sits inside both gates")
{
    const auto scene = env::load_scene_file(testutil::data_path("reference.scene"));
    const auto cb = array::synth_codebook({});
    const auto cases = array::load_case_table(testutil::data_path("cases.txt"));
    std::mt19937_64 rng(71);
    std::uniform_real_distribution<double> jitter(-8.0, 8.0);
    std::uniform_int_distribution<int> bin_shift(-2, 2);
    analysis::MatchOptions opts;
    std::size_t trues = 0;
    for (const auto &c : cases)
    {
        const auto traced =
            raytrace::trace_paths(scene.environment, array::apply_tx(scene.tx, c), array::apply_rx(scene.rx, c), 5.0);
        for (const auto &p : traced)
        {
            analysis::PathEstimate est;
            est.omega_hat = {p.omega.phi_tx + jitter(rng), p.omega.phi_rx + jitter(rng), p.omega.theta_tx + jitter(rng),
                             p.omega.theta_rx + jitter(rng)};
            est.delay_bin = static_cast<std::size_t>(std::llround(p.delay_ns / opts.sample_period_ns) + bin_shift(rng));
            est.rssi_dbm = sounder::path_pac_gains(p, cb, cb);
            for (double &v : est.rssi_dbm)
                v += p.path_gain_db;
            const auto m = analysis::match_candidates(est, traced, cb, cb, opts);
            std::size_t n_true = 0;
            for (const auto &r : m)
            {
                if (r.verdict != analysis::Verdict::True)
                    continue;
                ++n_true;
                for (double g : r.angle_gaps_deg)
                    CHECK(g <= opts.angle_tol_deg);
                const long bin = std::llround(traced[r.candidate].delay_ns / opts.sample_period_ns);
                CHECK(std::abs(bin - static_cast<long>(est.delay_bin)) <= opts.delay_tol_bins);
            }
            CHECK(n_true <= 1);
            trues += n_true;
        }
    }
    CHECK(trues > 0);
}
