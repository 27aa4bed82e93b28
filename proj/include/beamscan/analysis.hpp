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

#ifndef BEAMSCAN_ANALYSIS_HPP
#define BEAMSCAN_ANALYSIS_HPP

#include "beamscan/array.hpp"
#include "beamscan/raytrace.hpp"
#include "beamscan/sounder.hpp"

#include <array>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace beamscan::analysis
{

// No delay bin rises above the detection threshold.
class NoSignalError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

// S(tau, j) = max_n X(tau, n, j); stored scan-major.
class OmniPdp
{
  public:
    OmniPdp() = default;
    OmniPdp(std::size_t n_dly, std::size_t n_scan) : n_dly_(n_dly), n_scan_(n_scan), data_(n_dly * n_scan) {}

    std::size_t n_dly() const { return n_dly_; }
    std::size_t n_scan() const { return n_scan_; }
    float at(std::size_t tau, std::size_t j) const { return data_[j * n_dly_ + tau]; }
    float &at(std::size_t tau, std::size_t j) { return data_[j * n_dly_ + tau]; }
    const std::vector<float> &data() const { return data_; }

    friend bool operator==(const OmniPdp &, const OmniPdp &) = default;

  private:
    std::size_t n_dly_ = 0;
    std::size_t n_scan_ = 0;
    std::vector<float> data_;
};

OmniPdp synthesize_omni(const sounder::PdpTensor &x);
OmniPdp synthesize_omni_reference(const sounder::PdpTensor &x);

// P_av(tau): linear-domain mean over scans, in mW.
std::vector<double> mean_power_mw(const OmniPdp &s);

// First bin whose mean power clears the initial noise estimate (linear mean of the
// first 10 % of bins) by 6 dB, advanced to the top of that rising edge.
std::size_t detect_los_index(const OmniPdp &s);

// Per-PAC linear mean over scans at delay bin k, in dBm.
std::vector<double> extract_rssi(const sounder::PdpTensor &x, std::size_t k);

// Per-PAC noise power: linear mean over scans and bins [0, k_los - M), in mW.
std::vector<double> pac_noise_mw(const sounder::PdpTensor &x, std::size_t k_los, std::size_t guard_m);

// extract_rssi with each PAC's noise power removed in mW. Results are floored at
// the PAC noise level minus floor_db so empty PACs stay finite.
std::vector<double> extract_rssi_denoised(const sounder::PdpTensor &x, std::size_t k,
                                          std::span<const double> noise_mw, double floor_db = 30.0);

struct PathEstimate
{
    std::size_t delay_bin = 0;
    std::vector<double> rssi_dbm;
    array::AoaAodPair omega_hat;
    double rssi0_dbm = 0.0;
    double residual_var_db2 = 0.0;
};

struct LsOptions
{
    // When set, only PACs with rssi above this level enter the variance.
    std::optional<double> mask_below_dbm;
    // Objective values closer than this are treated as ties.
    double tie_epsilon = 1e-9;
};

// Exhaustive least-squares direction finding over the pattern grids,
// minimising var_n(rssi(n) - G(n, omega)). The unmasked objective separates
// into a TX and an RX term, so each side is searched over its own grid
// (parallel over grid nodes). Ties: smallest |omega| then lowest grid index.
PathEstimate ls_direction_find(std::span<const double> rssi_dbm, const array::PatternTable &tx,
                               const array::PatternTable &rx, const LsOptions &opts = {});

// Serial brute force over every 4-tuple; the oracle for ls_direction_find.
PathEstimate ls_direction_find_reference(std::span<const double> rssi_dbm, const array::PatternTable &tx,
                                         const array::PatternTable &rx, const LsOptions &opts = {});

// Pearson correlation over PACs in the dB domain. Throws on zero variance.
double correlation_rho(std::span<const double> a, std::span<const double> b);

struct NlosPower
{
    std::size_t delay_bin = 0;
    double p_nlos_dbm = 0.0;
    double p_rel_db = 0.0; // P_nlos - P_LOS
};

struct PowerReport
{
    std::vector<double> p_av_dbm;
    double p_noise_dbm = 0.0;
    std::size_t guard_m = 0;
    std::size_t k_los = 0;
    double p_rx_dbm = 0.0;
    double p_los_dbm = 0.0;
    double los_fraction_pct = 0.0;
    std::vector<NlosPower> nlos;
};

// Noise from bins [0, k_los - M), signal powers with the noise removed in mW.
PowerReport power_report(const OmniPdp &s, std::size_t k_los, std::span<const std::size_t> nlos_bins,
                         std::size_t guard_m);

// Relative link power in dB; the one formula behind every P' column.
inline double relative_power_db(double p_nlos_dbm, double p_los_dbm) { return p_nlos_dbm - p_los_dbm; }

// Local maxima of P_av after k_los above P_N + threshold, at least min_separation
// bins apart (stronger peak wins).
std::vector<std::size_t> detect_nlos_peaks(const OmniPdp &s, double p_noise_dbm, std::size_t k_los,
                                           double threshold_db = 3.0, std::size_t min_separation = 2);

enum class Verdict
{
    True,
    Rejected,
    NonExistent
};

const char *to_string(Verdict v);

struct TruePathMatch
{
    std::size_t measured_bin = 0;
    std::size_t candidate = 0; // index into the traced path list
    std::array<double, 4> angle_gaps_deg{}; // phi_tx, phi_rx, theta_tx, theta_rx
    std::optional<double> rho;
    Verdict verdict = Verdict::NonExistent;
};

struct MatchOptions
{
    long delay_offset_bins = 0; // added to round(delay / period) of traced paths
    double sample_period_ns = 0.8;
    long delay_tol_bins = 1;
    double angle_tol_deg = 5.0;
};

// One entry per traced path: outside the delay gate -> NonExistent; inside but
// failing the angle gate -> Rejected; the highest-rho survivor -> True.
std::vector<TruePathMatch> match_candidates(const PathEstimate &est, const std::vector<raytrace::RayPath> &traced,
                                            const array::PatternTable &tx, const array::PatternTable &rx,
                                            const MatchOptions &opts = {});

struct IdentifiedPath
{
    PathEstimate estimate;
    std::vector<TruePathMatch> matches;

    const TruePathMatch *true_match() const;
};

struct BlockageSeries
{
    std::size_t traced_index = 0;
    std::size_t delay_bin = 0;
    std::size_t best_pac = 0;
    std::vector<double> time_s;
    std::vector<double> rssi_dbm;
};

// RSSI over scans on each true path's strongest PAC.
std::vector<BlockageSeries> blockage_timeseries(const sounder::PdpTensor &x, std::span<const IdentifiedPath> paths);

struct AnalysisConfig
{
    std::size_t guard_m = 5;
    double peak_threshold_db = 3.0;
    std::size_t peak_min_separation = 2;
    long delay_tol_bins = 1;
    double angle_tol_deg = 5.0;
    // Feed LS and rho with noise-subtracted RSSI vectors.
    bool subtract_noise = true;
    double denoise_floor_db = 30.0;
    LsOptions ls;
};

struct CaseAnalysis
{
    std::size_t k_los = 0;
    long delay_offset_bins = 0;
    std::vector<IdentifiedPath> paths; // paths[0] is the LOS peak
    std::optional<double> los_rho;
    std::optional<std::size_t> traced_los; // index of the traced LOS path
    PowerReport power;
};

// Full chain on one static measurement: omni PDP, LOS detection, noise, NLOS
// peaks, LS direction finding, candidate matching and power accounting.
// The delay offset of the traced paths is fixed by aligning the earliest traced
// path with the detected LOS bin.
CaseAnalysis analyze_case(const sounder::PdpTensor &x, const std::vector<raytrace::RayPath> &traced,
                          const array::PatternTable &tx, const array::PatternTable &rx,
                          const AnalysisConfig &cfg = {});

} // namespace beamscan::analysis

#endif
