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
#include <limits>
#include <string>

namespace beamscan::analysis
{

namespace
{

double to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

double to_dbm(double mw) { return mw > 0.0 ? 10.0 * std::log10(mw) : -std::numeric_limits<double>::infinity(); }

} // namespace

OmniPdp synthesize_omni_reference(const sounder::PdpTensor &x)
{
    OmniPdp s(x.n_dly(), x.n_scan());
    for (std::size_t j = 0; j < x.n_scan(); ++j)
        for (std::size_t tau = 0; tau < x.n_dly(); ++tau)
        {
            float best = -std::numeric_limits<float>::infinity();
            for (std::size_t n = 0; n < x.n_dir(); ++n)
                best = std::max(best, x.at(tau, n, j));
            s.at(tau, j) = best;
        }
    return s;
}

OmniPdp synthesize_omni(const sounder::PdpTensor &x)
{
    OmniPdp s(x.n_dly(), x.n_scan());
    const std::size_t n_dly = x.n_dly();
    const auto n_scan = static_cast<long>(x.n_scan());
#pragma omp parallel for schedule(static)
    for (long js = 0; js < n_scan; ++js)
    {
        const auto j = static_cast<std::size_t>(js);
        float *out = &s.at(0, j);
        std::copy_n(x.pdp(0, j).data(), n_dly, out);
        for (std::size_t n = 1; n < x.n_dir(); ++n)
        {
            const float *row = x.pdp(n, j).data();
            for (std::size_t tau = 0; tau < n_dly; ++tau)
                out[tau] = std::max(out[tau], row[tau]);
        }
    }
    return s;
}

std::vector<double> mean_power_mw(const OmniPdp &s)
{
    std::vector<double> p(s.n_dly(), 0.0);
    for (std::size_t j = 0; j < s.n_scan(); ++j)
        for (std::size_t tau = 0; tau < s.n_dly(); ++tau)
            p[tau] += to_mw(s.at(tau, j));
    for (auto &v : p)
        v /= static_cast<double>(s.n_scan());
    return p;
}

std::size_t detect_los_index(const OmniPdp &s)
{
    if (s.n_dly() == 0 || s.n_scan() == 0)
        throw NoSignalError("no signal detected: empty PDP");
    const auto p = mean_power_mw(s);
    const std::size_t head = std::max<std::size_t>(1, p.size() / 10);
    double noise = 0.0;
    for (std::size_t i = 0; i < head; ++i)
        noise += p[i];
    noise /= static_cast<double>(head);
    const double threshold = noise * std::pow(10.0, 0.6);
    for (std::size_t tau = 0; tau < p.size(); ++tau)
        if (p[tau] > threshold)
        {
            while (tau + 1 < p.size() && p[tau + 1] > p[tau])
                ++tau;
            return tau;
        }
    throw NoSignalError("no signal detected: no delay bin exceeds the noise estimate by 6 dB");
}

std::vector<double> extract_rssi(const sounder::PdpTensor &x, std::size_t k)
{
    if (k >= x.n_dly())
        throw std::out_of_range("extract_rssi: delay bin " + std::to_string(k) + " out of range");
    std::vector<double> out(x.n_dir(), 0.0);
    for (std::size_t j = 0; j < x.n_scan(); ++j)
        for (std::size_t n = 0; n < x.n_dir(); ++n)
            out[n] += to_mw(x.at(k, n, j));
    for (auto &v : out)
        v = to_dbm(v / static_cast<double>(x.n_scan()));
    return out;
}

std::vector<double> pac_noise_mw(const sounder::PdpTensor &x, std::size_t k_los, std::size_t guard_m)
{
    if (k_los >= x.n_dly() || k_los < guard_m + 1)
        throw std::invalid_argument("pac_noise_mw: insufficient pre-LOS region (k_los - M < 1)");
    const std::size_t bins = k_los - guard_m;
    std::vector<double> out(x.n_dir(), 0.0);
    for (std::size_t j = 0; j < x.n_scan(); ++j)
        for (std::size_t n = 0; n < x.n_dir(); ++n)
        {
            const auto pdp = x.pdp(n, j);
            for (std::size_t tau = 0; tau < bins; ++tau)
                out[n] += to_mw(pdp[tau]);
        }
    for (auto &v : out)
        v /= static_cast<double>(bins * x.n_scan());
    return out;
}

std::vector<double> extract_rssi_denoised(const sounder::PdpTensor &x, std::size_t k,
                                          std::span<const double> noise_mw, double floor_db)
{
    if (noise_mw.size() != x.n_dir())
        throw std::invalid_argument("extract_rssi_denoised: one noise value per PAC required");
    auto out = extract_rssi(x, k);
    const double floor_ratio = std::pow(10.0, -floor_db / 10.0);
    for (std::size_t n = 0; n < out.size(); ++n)
        out[n] = to_dbm(std::max(to_mw(out[n]) - noise_mw[n], noise_mw[n] * floor_ratio));
    return out;
}

PowerReport power_report(const OmniPdp &s, std::size_t k_los, std::span<const std::size_t> nlos_bins,
                         std::size_t guard_m)
{
    if (k_los >= s.n_dly())
        throw std::out_of_range("power_report: LOS bin out of range");
    if (k_los < guard_m + 1)
        throw std::invalid_argument("power_report: insufficient pre-LOS region (k_los - M < 1)");
    const auto p_av = mean_power_mw(s);

    PowerReport r;
    r.k_los = k_los;
    r.guard_m = guard_m;
    const std::size_t noise_bins = k_los - guard_m;
    double noise = 0.0;
    for (std::size_t i = 0; i < noise_bins; ++i)
        noise += p_av[i];
    noise /= static_cast<double>(noise_bins);
    r.p_noise_dbm = to_dbm(noise);

    double p_rx = 0.0;
    for (double v : p_av)
        p_rx += std::max(v - noise, 0.0);
    r.p_rx_dbm = to_dbm(p_rx);

    const double p_los = p_av[k_los] - noise;
    r.p_los_dbm = to_dbm(p_los);
    r.los_fraction_pct = p_rx > 0.0 ? 100.0 * std::max(p_los, 0.0) / p_rx : 0.0;

    for (std::size_t bin : nlos_bins)
    {
        if (bin >= s.n_dly())
            throw std::out_of_range("power_report: NLOS bin out of range");
        const double p_dbm = to_dbm(p_av[bin] - noise);
        r.nlos.push_back({bin, p_dbm, relative_power_db(p_dbm, r.p_los_dbm)});
    }
    r.p_av_dbm.reserve(p_av.size());
    for (double v : p_av)
        r.p_av_dbm.push_back(to_dbm(v));
    return r;
}

std::vector<std::size_t> detect_nlos_peaks(const OmniPdp &s, double p_noise_dbm, std::size_t k_los,
                                           double threshold_db, std::size_t min_separation)
{
    const auto p = mean_power_mw(s);
    const double threshold = to_mw(p_noise_dbm + threshold_db);
    std::vector<std::size_t> maxima;
    for (std::size_t tau = k_los + 1; tau < p.size(); ++tau)
    {
        const bool rising = p[tau] > p[tau - 1];
        const bool not_falling_into = tau + 1 >= p.size() || p[tau] >= p[tau + 1];
        if (rising && not_falling_into && p[tau] > threshold)
            maxima.push_back(tau);
    }
    std::stable_sort(maxima.begin(), maxima.end(), [&](std::size_t a, std::size_t b) { return p[a] > p[b]; });
    std::vector<std::size_t> accepted;
    auto gap = [](std::size_t a, std::size_t b) { return a > b ? a - b : b - a; };
    for (std::size_t tau : maxima)
    {
        if (gap(tau, k_los) < min_separation)
            continue;
        if (std::all_of(accepted.begin(), accepted.end(), [&](std::size_t a) { return gap(a, tau) >= min_separation; }))
            accepted.push_back(tau);
    }
    std::sort(accepted.begin(), accepted.end());
    return accepted;
}

} // namespace beamscan::analysis
