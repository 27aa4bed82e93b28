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

#include "beamscan/sounder.hpp"

#include "binary_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace beamscan::sounder
{

namespace
{

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

double db_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

constexpr double kSpreadTaps[3] = {0.25, 0.5, 0.25};

// Mean offset that keeps the jittered samples unbiased in mW: E[10^(0.1 s z)] = 10^(0.1 m).
double jitter_bias_db(double sigma_db) { return sigma_db * sigma_db * std::log(10.0) / 20.0; }

// Minimum horizontal distance between the blocker axis and the part of segment
// a->b that lies inside the blocker's height slab; +inf if none.
double slab_clearance(const Point3 &a, const Point3 &b, const Point3 &base, double height)
{
    double s0 = 0.0, s1 = 1.0;
    const double z_lo = base.z, z_hi = base.z + height;
    const double dz = b.z - a.z;
    if (std::abs(dz) < 1e-15)
    {
        if (a.z < z_lo || a.z > z_hi)
            return std::numeric_limits<double>::infinity();
    }
    else
    {
        double t_lo = (z_lo - a.z) / dz, t_hi = (z_hi - a.z) / dz;
        if (t_lo > t_hi)
            std::swap(t_lo, t_hi);
        s0 = std::max(s0, t_lo);
        s1 = std::min(s1, t_hi);
        if (s0 > s1)
            return std::numeric_limits<double>::infinity();
    }
    const double ex = b.x - a.x, ey = b.y - a.y;
    const double len2 = ex * ex + ey * ey;
    double s = len2 > 0.0 ? ((base.x - a.x) * ex + (base.y - a.y) * ey) / len2 : s0;
    s = std::clamp(s, s0, s1);
    return std::hypot(a.x + s * ex - base.x, a.y + s * ey - base.y);
}

struct Prepared
{
    std::size_t n_dir;
    std::vector<std::size_t> bins;
    std::vector<double> gains; // [path][pac], dBm before blockage
};

Prepared prepare(const std::vector<raytrace::RayPath> &paths, const array::PatternTable &tx,
                 const array::PatternTable &rx, const SimConfig &cfg)
{
    if (!(cfg.noise_sigma_db >= 0.0))
        throw std::invalid_argument("SimConfig: noise sigma must be >= 0");
    if (cfg.n_dly == 0 || cfg.n_scan == 0 || !(cfg.sample_period_ns > 0.0) || !(cfg.scan_period_s > 0.0))
        throw std::invalid_argument("SimConfig: dimensions and periods must be positive");
    if (!std::isfinite(cfg.noise_floor_dbm))
        throw std::invalid_argument("SimConfig: noise floor must be finite");
    Prepared p;
    p.n_dir = tx.beams() * rx.beams();
    const std::size_t offset = delay_offset_bins(paths, cfg);
    for (const auto &path : paths)
    {
        const std::size_t bin = path_bin(path, cfg.sample_period_ns, offset);
        if (bin + (cfg.pulse_spread ? 1 : 0) >= cfg.n_dly)
            throw std::invalid_argument("synthesize_tensor: path delay " + std::to_string(path.delay_ns) +
                                        " ns exceeds the delay window");
        if (cfg.pulse_spread && bin == 0)
            throw std::invalid_argument("synthesize_tensor: spread pulse needs a bin before the path");
        p.bins.push_back(bin);
        const auto g = path_pac_gains(path, tx, rx);
        for (double v : g)
            p.gains.push_back(path.path_gain_db + v);
    }
    return p;
}

std::vector<double> scan_attenuations(const std::vector<raytrace::RayPath> &paths, const SimConfig &cfg,
                                      const env::BlockerTrajectory *traj, std::size_t j)
{
    std::vector<double> att(paths.size(), 0.0);
    if (traj)
    {
        const double t = static_cast<double>(j) * cfg.scan_period_s;
        for (std::size_t p = 0; p < paths.size(); ++p)
            att[p] = blockage_attenuation(paths[p], t, *traj);
    }
    return att;
}

} // namespace

PdpTensor::PdpTensor(std::size_t n_dly, std::size_t n_dir, std::size_t n_scan, double sample_period_ns,
                     double scan_period_s, double noise_floor_dbm)
    : n_dly_(n_dly), n_dir_(n_dir), n_scan_(n_scan), sample_period_ns_(sample_period_ns),
      scan_period_s_(scan_period_s), noise_floor_dbm_(noise_floor_dbm), data_(n_dly * n_dir * n_scan, 0.0f)
{
}

std::size_t delay_offset_bins(const std::vector<raytrace::RayPath> &paths, const SimConfig &cfg)
{
    if (paths.empty())
        return 0;
    const auto first = std::min_element(paths.begin(), paths.end(), [](const auto &a, const auto &b) {
        return a.delay_ns < b.delay_ns;
    });
    const std::size_t bin = path_bin(*first, cfg.sample_period_ns, 0);
    return bin >= cfg.min_los_bin ? 0 : cfg.min_los_bin - bin;
}

std::size_t path_bin(const raytrace::RayPath &path, double sample_period_ns, std::size_t offset_bins)
{
    return static_cast<std::size_t>(std::llround(path.delay_ns / sample_period_ns)) + offset_bins;
}

double blockage_attenuation(const raytrace::RayPath &path, double scan_time_s, const env::BlockerTrajectory &traj)
{
    if (traj.waypoints.empty() || scan_time_s < traj.start_time() || scan_time_s > traj.end_time())
        return 0.0;
    const Point3 base = env::blocker_position(traj, scan_time_s);
    double clearance = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s + 1 < path.vertices.size(); ++s)
        clearance = std::min(clearance, slab_clearance(path.vertices[s], path.vertices[s + 1], base, traj.height_m));
    if (!std::isfinite(clearance))
        return 0.0;
    if (traj.edge_width_m <= 0.0)
        return clearance <= traj.radius_m ? traj.attenuation_db : 0.0;
    // Raised-cosine roll-off centred on the cylinder surface.
    const double x = (clearance - (traj.radius_m - traj.edge_width_m / 2.0)) / traj.edge_width_m;
    if (x <= 0.0)
        return traj.attenuation_db;
    if (x >= 1.0)
        return 0.0;
    return traj.attenuation_db * 0.5 * (1.0 + std::cos(std::numbers::pi * x));
}

std::vector<double> path_pac_gains(const raytrace::RayPath &path, const array::PatternTable &tx,
                                   const array::PatternTable &rx)
{
    std::vector<double> tx_g(tx.beams()), rx_g(rx.beams());
    for (std::size_t c = 0; c < tx.beams(); ++c)
        tx_g[c] = tx.gain_or_floor(c, path.omega.phi_tx, path.omega.theta_tx);
    for (std::size_t c = 0; c < rx.beams(); ++c)
        rx_g[c] = rx.gain_or_floor(c, path.omega.phi_rx, path.omega.theta_rx);
    std::vector<double> out(tx.beams() * rx.beams());
    for (std::size_t t = 0; t < tx.beams(); ++t)
        for (std::size_t r = 0; r < rx.beams(); ++r)
            out[t * rx.beams() + r] = tx_g[t] + rx_g[r];
    return out;
}

std::vector<double> pac_profile_mw(std::span<const double> gains_db, std::span<const std::size_t> bins,
                                   const SimConfig &cfg)
{
    std::vector<double> lin(cfg.n_dly, db_to_mw(cfg.noise_floor_dbm));
    for (std::size_t p = 0; p < gains_db.size(); ++p)
    {
        const double mw = db_to_mw(gains_db[p]);
        if (cfg.pulse_spread)
            for (int k = 0; k < 3; ++k)
                lin[bins[p] + static_cast<std::size_t>(k) - 1] += kSpreadTaps[k] * mw;
        else
            lin[bins[p]] += mw;
    }
    return lin;
}

std::uint64_t scan_seed(std::uint64_t seed, std::size_t scan)
{
    return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(scan) + 0x632BE59BD9B4E019ULL));
}

PdpTensor synthesize_tensor_reference(const std::vector<raytrace::RayPath> &paths, const array::PatternTable &tx,
                                      const array::PatternTable &rx, const SimConfig &cfg,
                                      const env::BlockerTrajectory *traj)
{
    const Prepared prep = prepare(paths, tx, rx, cfg);
    PdpTensor out(cfg.n_dly, prep.n_dir, cfg.n_scan, cfg.sample_period_ns, cfg.scan_period_s, cfg.noise_floor_dbm);
    const double bias = jitter_bias_db(cfg.noise_sigma_db);
    std::vector<double> g(paths.size());
    for (std::size_t j = 0; j < cfg.n_scan; ++j)
    {
        std::mt19937_64 rng(scan_seed(cfg.rng_seed, j));
        std::normal_distribution<double> jitter(0.0, 1.0);
        const auto att = scan_attenuations(paths, cfg, traj, j);
        for (std::size_t n = 0; n < prep.n_dir; ++n)
        {
            for (std::size_t p = 0; p < paths.size(); ++p)
                g[p] = prep.gains[p * prep.n_dir + n] - att[p];
            const auto lin = pac_profile_mw(g, prep.bins, cfg);
            for (std::size_t tau = 0; tau < cfg.n_dly; ++tau)
            {
                double v = 10.0 * std::log10(lin[tau]);
                if (cfg.noise_sigma_db > 0.0)
                    v += cfg.noise_sigma_db * jitter(rng) - bias;
                out.at(tau, n, j) = static_cast<float>(v);
            }
        }
    }
    return out;
}

PdpTensor synthesize_tensor(const std::vector<raytrace::RayPath> &paths, const array::PatternTable &tx,
                            const array::PatternTable &rx, const SimConfig &cfg, const env::BlockerTrajectory *traj)
{
    const Prepared prep = prepare(paths, tx, rx, cfg);
    PdpTensor out(cfg.n_dly, prep.n_dir, cfg.n_scan, cfg.sample_period_ns, cfg.scan_period_s, cfg.noise_floor_dbm);

    const double floor_mw = db_to_mw(cfg.noise_floor_dbm);
    const double floor_db = 10.0 * std::log10(floor_mw);
    const double bias = jitter_bias_db(cfg.noise_sigma_db);
    // Bins a path can touch; everything else is pure noise floor.
    std::vector<char> touched(cfg.n_dly, 0);
    for (std::size_t b : prep.bins)
        for (std::size_t k = cfg.pulse_spread ? b - 1 : b; k <= (cfg.pulse_spread ? b + 1 : b); ++k)
            touched[k] = 1;

    const auto n_scan = static_cast<long>(cfg.n_scan);
#pragma omp parallel
    {
        std::vector<double> g(paths.size());
#pragma omp for schedule(static)
        for (long js = 0; js < n_scan; ++js)
        {
            const auto j = static_cast<std::size_t>(js);
            std::mt19937_64 rng(scan_seed(cfg.rng_seed, j));
            std::normal_distribution<double> jitter(0.0, 1.0);
            const auto att = scan_attenuations(paths, cfg, traj, j);
            for (std::size_t n = 0; n < prep.n_dir; ++n)
            {
                std::span<float> row = out.pdp(n, j);
                std::vector<double> lin;
                if (!paths.empty())
                {
                    for (std::size_t p = 0; p < paths.size(); ++p)
                        g[p] = prep.gains[p * prep.n_dir + n] - att[p];
                    lin = pac_profile_mw(g, prep.bins, cfg);
                }
                for (std::size_t tau = 0; tau < cfg.n_dly; ++tau)
                {
                    double v = touched[tau] ? 10.0 * std::log10(lin[tau]) : floor_db;
                    if (cfg.noise_sigma_db > 0.0)
                        v += cfg.noise_sigma_db * jitter(rng) - bias;
                    row[tau] = static_cast<float>(v);
                }
            }
        }
    }
    return out;
}

void write_tensor(std::ostream &out, const PdpTensor &t)
{
    detail::put_magic(out, "BSCN");
    detail::put_le<std::uint32_t>(out, 1);
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.n_dly()));
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.n_dir()));
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.n_scan()));
    detail::put_le<double>(out, t.sample_period_ns());
    detail::put_le<double>(out, t.scan_period_s());
    detail::put_le<double>(out, t.noise_floor_dbm());
    out.write("dBm\0", 4);
    if constexpr (std::endian::native == std::endian::little)
        out.write(reinterpret_cast<const char *>(t.data().data()),
                  static_cast<std::streamsize>(t.data().size() * sizeof(float)));
    else
        for (float v : t.data())
            detail::put_le<float>(out, v);
    if (!out)
        throw std::runtime_error("write_tensor: stream error");
}

PdpTensor read_tensor(std::istream &in)
{
    detail::expect_magic(in, "BSCN", "tensor");
    const auto version = detail::get_le<std::uint32_t>(in, "version");
    if (version != 1)
        throw std::runtime_error("tensor: unsupported version " + std::to_string(version));
    const auto n_dly = detail::get_le<std::uint32_t>(in, "n_dly");
    const auto n_dir = detail::get_le<std::uint32_t>(in, "n_dir");
    const auto n_scan = detail::get_le<std::uint32_t>(in, "n_scan");
    const auto sp = detail::get_le<double>(in, "sample period");
    const auto scp = detail::get_le<double>(in, "scan period");
    const auto nf = detail::get_le<double>(in, "noise floor");
    char units[4];
    if (!in.read(units, 4) || std::string(units, 3) != "dBm")
        throw std::runtime_error("tensor: unsupported units");
    PdpTensor t(n_dly, n_dir, n_scan, sp, scp, nf);
    auto &d = t.data();
    if constexpr (std::endian::native == std::endian::little)
    {
        if (!in.read(reinterpret_cast<char *>(d.data()), static_cast<std::streamsize>(d.size() * sizeof(float))))
            throw std::runtime_error("tensor: truncated data");
    }
    else
        for (auto &v : d)
            v = detail::get_le<float>(in, "data");
    for (float v : d)
        if (!std::isfinite(v))
            throw std::runtime_error("tensor: non-finite sample");
    return t;
}

void save_tensor(const std::filesystem::path &path, const PdpTensor &t)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot write tensor '" + path.string() + "'");
    write_tensor(out, t);
}

PdpTensor load_tensor(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open tensor '" + path.string() + "'");
    return read_tensor(in);
}

} // namespace beamscan::sounder
