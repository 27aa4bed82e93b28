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

#include "beamscan/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace beamscan::analysis
{

double correlation_rho(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size() || a.empty())
        throw std::invalid_argument("correlation_rho: vectors must be non-empty and of equal length");
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        const double da = a[i] - ma, db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa <= 0.0 || sbb <= 0.0)
        throw std::invalid_argument("correlation_rho: zero variance");
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

const char *to_string(Verdict v)
{
    switch (v)
    {
    case Verdict::True:
        return "true";
    case Verdict::Rejected:
        return "rejected";
    case Verdict::NonExistent:
        return "non-existent";
    }
    return "?";
}

namespace
{

double angle_gap(double a, double b)
{
    double d = std::fmod(std::abs(a - b), 360.0);
    return d > 180.0 ? 360.0 - d : d;
}

long traced_bin(const raytrace::RayPath &p, const MatchOptions &opts)
{
    return std::lround(p.delay_ns / opts.sample_period_ns) + opts.delay_offset_bins;
}

} // namespace

std::vector<TruePathMatch> match_candidates(const PathEstimate &est, const std::vector<raytrace::RayPath> &traced,
                                            const array::PatternTable &tx, const array::PatternTable &rx,
                                            const MatchOptions &opts)
{
    if (traced.empty())
        throw std::invalid_argument("match_candidates: no traced paths");
    std::vector<TruePathMatch> out(traced.size());
    std::optional<std::size_t> winner;
    for (std::size_t i = 0; i < traced.size(); ++i)
    {
        auto &m = out[i];
        const auto &p = traced[i];
        m.measured_bin = est.delay_bin;
        m.candidate = i;
        m.verdict = Verdict::NonExistent;
        if (std::abs(traced_bin(p, opts) - static_cast<long>(est.delay_bin)) > opts.delay_tol_bins)
            continue;
        m.angle_gaps_deg = {angle_gap(est.omega_hat.phi_tx, p.omega.phi_tx),
                            angle_gap(est.omega_hat.phi_rx, p.omega.phi_rx),
                            std::abs(est.omega_hat.theta_tx - p.omega.theta_tx),
                            std::abs(est.omega_hat.theta_rx - p.omega.theta_rx)};
        m.verdict = Verdict::Rejected;
        const bool inside =
            std::all_of(m.angle_gaps_deg.begin(), m.angle_gaps_deg.end(), [&](double g) { return g <= opts.angle_tol_deg; });
        if (!inside)
            continue;
        try
        {
            const auto predicted = raytrace::predict_rssi(p, tx, rx);
            m.rho = correlation_rho(est.rssi_dbm, predicted);
        }
        catch (const std::exception &)
        {
            // off-grid or flat prediction: no rho, stays rejected
            continue;
        }
        if (!winner || *m.rho > *out[*winner].rho)
            winner = i;
    }
    if (winner)
        out[*winner].verdict = Verdict::True;
    return out;
}

const TruePathMatch *IdentifiedPath::true_match() const
{
    for (const auto &m : matches)
        if (m.verdict == Verdict::True)
            return &m;
    return nullptr;
}

std::vector<BlockageSeries> blockage_timeseries(const sounder::PdpTensor &x, std::span<const IdentifiedPath> paths)
{
    if (paths.empty())
        throw std::invalid_argument("blockage_timeseries: no identified paths");
    std::vector<BlockageSeries> out;
    for (const auto &ip : paths)
    {
        const auto *m = ip.true_match();
        if (!m)
            continue;
        const auto &r = ip.estimate.rssi_dbm;
        BlockageSeries s;
        s.traced_index = m->candidate;
        s.delay_bin = ip.estimate.delay_bin;
        s.best_pac = static_cast<std::size_t>(std::max_element(r.begin(), r.end()) - r.begin());
        s.time_s.resize(x.n_scan());
        s.rssi_dbm.resize(x.n_scan());
        for (std::size_t j = 0; j < x.n_scan(); ++j)
        {
            s.time_s[j] = static_cast<double>(j) * x.scan_period_s();
            s.rssi_dbm[j] = x.at(s.delay_bin, s.best_pac, j);
        }
        out.push_back(std::move(s));
    }
    return out;
}

CaseAnalysis analyze_case(const sounder::PdpTensor &x, const std::vector<raytrace::RayPath> &traced,
                          const array::PatternTable &tx, const array::PatternTable &rx, const AnalysisConfig &cfg)
{
    if (traced.empty())
        throw std::invalid_argument("analyze_case: no traced paths");
    if (x.n_dir() != tx.beams() * rx.beams())
        throw std::invalid_argument("analyze_case: tensor has " + std::to_string(x.n_dir()) +
                                    " PACs but the tables define " + std::to_string(tx.beams() * rx.beams()));
    const OmniPdp omni = synthesize_omni(x);

    CaseAnalysis out;
    out.k_los = detect_los_index(omni);
    const auto first = std::min_element(traced.begin(), traced.end(), [](const auto &a, const auto &b) {
        return a.delay_ns < b.delay_ns;
    });
    out.delay_offset_bins = static_cast<long>(out.k_los) - std::lround(first->delay_ns / x.sample_period_ns());

    const double p_noise = power_report(omni, out.k_los, {}, cfg.guard_m).p_noise_dbm;
    const auto nlos = detect_nlos_peaks(omni, p_noise, out.k_los, cfg.peak_threshold_db, cfg.peak_min_separation);
    out.power = power_report(omni, out.k_los, nlos, cfg.guard_m);

    MatchOptions mo;
    mo.delay_offset_bins = out.delay_offset_bins;
    mo.sample_period_ns = x.sample_period_ns();
    mo.delay_tol_bins = cfg.delay_tol_bins;
    mo.angle_tol_deg = cfg.angle_tol_deg;

    std::vector<double> noise;
    if (cfg.subtract_noise)
        noise = pac_noise_mw(x, out.k_los, cfg.guard_m);

    std::vector<std::size_t> bins{out.k_los};
    bins.insert(bins.end(), nlos.begin(), nlos.end());
    for (std::size_t bin : bins)
    {
        IdentifiedPath ip;
        const auto rssi =
            cfg.subtract_noise ? extract_rssi_denoised(x, bin, noise, cfg.denoise_floor_db) : extract_rssi(x, bin);
        ip.estimate = ls_direction_find(rssi, tx, rx, cfg.ls);
        ip.estimate.delay_bin = bin;
        ip.matches = match_candidates(ip.estimate, traced, tx, rx, mo);
        out.paths.push_back(std::move(ip));
    }

    for (std::size_t i = 0; i < traced.size(); ++i)
        if (traced[i].tag == raytrace::PathTag::Los)
        {
            out.traced_los = i;
            try
            {
                out.los_rho = correlation_rho(out.paths[0].estimate.rssi_dbm, raytrace::predict_rssi(traced[i], tx, rx));
            }
            catch (const std::exception &)
            {
            }
            break;
        }
    return out;
}

} // namespace beamscan::analysis
