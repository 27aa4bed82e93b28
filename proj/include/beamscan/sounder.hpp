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

#ifndef BEAMSCAN_SOUNDER_HPP
#define BEAMSCAN_SOUNDER_HPP

#include "beamscan/array.hpp"
#include "beamscan/environment.hpp"
#include "beamscan/raytrace.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace beamscan::sounder
{

// Directional PDP record X(tau, n, j) in dBm. Storage is scan-major, then PAC,
// then delay, the same order as the tensor file.
class PdpTensor
{
  public:
    PdpTensor() = default;
    PdpTensor(std::size_t n_dly, std::size_t n_dir, std::size_t n_scan, double sample_period_ns,
              double scan_period_s, double noise_floor_dbm);

    std::size_t n_dly() const { return n_dly_; }
    std::size_t n_dir() const { return n_dir_; }
    std::size_t n_scan() const { return n_scan_; }
    double sample_period_ns() const { return sample_period_ns_; }
    double scan_period_s() const { return scan_period_s_; }
    double noise_floor_dbm() const { return noise_floor_dbm_; }

    std::size_t index(std::size_t tau, std::size_t n, std::size_t j) const { return (j * n_dir_ + n) * n_dly_ + tau; }
    float at(std::size_t tau, std::size_t n, std::size_t j) const { return data_[index(tau, n, j)]; }
    float &at(std::size_t tau, std::size_t n, std::size_t j) { return data_[index(tau, n, j)]; }

    std::span<const float> pdp(std::size_t n, std::size_t j) const { return {&data_[index(0, n, j)], n_dly_}; }
    std::span<float> pdp(std::size_t n, std::size_t j) { return {&data_[index(0, n, j)], n_dly_}; }

    const std::vector<float> &data() const { return data_; }
    std::vector<float> &data() { return data_; }

    friend bool operator==(const PdpTensor &, const PdpTensor &) = default;

  private:
    std::size_t n_dly_ = 0;
    std::size_t n_dir_ = 0;
    std::size_t n_scan_ = 0;
    double sample_period_ns_ = 0.8;
    double scan_period_s_ = 3.2e-3;
    double noise_floor_dbm_ = -80.0;
    std::vector<float> data_;
};

struct SimConfig
{
    std::size_t n_dly = 192;
    std::size_t n_scan = 1750;
    double sample_period_ns = 0.8;
    double scan_period_s = 3.2e-3;
    double noise_floor_dbm = -74.0; // per PAC; calibrated for the reference scene at 5 dBm
    double noise_sigma_db = 1.0; // log-domain jitter per sample, centred so the mW mean is unbiased
    std::uint64_t rng_seed = 1;
    std::size_t min_los_bin = 20;  // first path is shifted to at least this bin
    bool pulse_spread = false;     // 3-tap raised-cosine (1/4, 1/2, 1/4) instead of a single bin
    int case_id = 0;
};

// Shift (in whole bins) applied to all path delays so the earliest path lands at
// bin >= cfg.min_los_bin.
std::size_t delay_offset_bins(const std::vector<raytrace::RayPath> &paths, const SimConfig &cfg);

// round(delay / sample period) + offset.
std::size_t path_bin(const raytrace::RayPath &path, double sample_period_ns, std::size_t offset_bins);

// Blocker loss for one path at one instant, dB. Zero outside the trajectory span.
double blockage_attenuation(const raytrace::RayPath &path, double scan_time_s, const env::BlockerTrajectory &traj);

// Per-path, per-PAC gain G(n, omega); directions outside a table use that beam's floor.
std::vector<double> path_pac_gains(const raytrace::RayPath &path, const array::PatternTable &tx,
                                   const array::PatternTable &rx);

// Noise-free linear power (mW) of one PDP before jitter: noise floor plus every
// path's power in its delay bin(s). gains_db[p] is the total of path gain, PAC gain
// and blockage for path p; bins[p] its delay bin.
std::vector<double> pac_profile_mw(std::span<const double> gains_db, std::span<const std::size_t> bins,
                                   const SimConfig &cfg);

// Parallel over scans; per-scan RNG substreams make the output independent of
// thread count.
PdpTensor synthesize_tensor(const std::vector<raytrace::RayPath> &paths, const array::PatternTable &tx,
                            const array::PatternTable &rx, const SimConfig &cfg,
                            const env::BlockerTrajectory *traj = nullptr);

// Straightforward serial version kept as the test oracle for synthesize_tensor.
PdpTensor synthesize_tensor_reference(const std::vector<raytrace::RayPath> &paths, const array::PatternTable &tx,
                                      const array::PatternTable &rx, const SimConfig &cfg,
                                      const env::BlockerTrajectory *traj = nullptr);

// Seed of the RNG substream for scan j.
std::uint64_t scan_seed(std::uint64_t seed, std::size_t scan);

// Tensor file: "BSCN", u32 version, u32 n_dly, n_dir, n_scan, f64 sample_period_ns,
// f64 scan_period_s, f64 noise_floor_dbm, 4-byte units "dBm\0", float32 data.
inline constexpr std::size_t kTensorHeaderBytes = 48;
void write_tensor(std::ostream &out, const PdpTensor &t);
PdpTensor read_tensor(std::istream &in);
void save_tensor(const std::filesystem::path &path, const PdpTensor &t);
PdpTensor load_tensor(const std::filesystem::path &path);

} // namespace beamscan::sounder

#endif
