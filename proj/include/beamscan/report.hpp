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

#ifndef BEAMSCAN_REPORT_HPP
#define BEAMSCAN_REPORT_HPP

#include "beamscan/analysis.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace beamscan::report
{

struct CaseRecord
{
    int case_id = 0;
    std::vector<raytrace::RayPath> traced;
    std::optional<analysis::CaseAnalysis> analysis; // empty when the case failed
    std::string error;
};

// case,k_los,p_noise_dbm,p_rx_dbm,p_los_dbm,los_fraction_pct,los_rho
void write_los_power_csv(std::ostream &out, const std::vector<CaseRecord> &cases);

// One row per detected NLOS peak:
// case,delay_bin,p_nlos_dbm,p_rel_db,verdict,path,rho
void write_nlos_power_csv(std::ostream &out, const std::vector<CaseRecord> &cases);

// time_s then one column per series, headed by the traced path signature.
void write_blockage_csv(std::ostream &out, const std::vector<analysis::BlockageSeries> &series,
                    const std::vector<raytrace::RayPath> &traced);

// Machine-readable run summary: per case omega_hat, rho and verdicts.
std::string summary_json(const std::vector<CaseRecord> &cases);

// A populated cell of a reference NLOS power table.
struct NlosTableCell
{
    int case_id = 0;
    std::string path;
    double p_nlos_dbm = 0.0;
    double p_rel_db = 0.0; // as printed
};

// CSV with header case,path,p_nlos_dbm,p_rel_db.
std::vector<NlosTableCell> parse_nlos_table(std::string_view text);
std::vector<NlosTableCell> load_nlos_table(const std::filesystem::path &path);

// Per case, the LOS power implied by the printed cells: mean of P_nlos - P'.
std::map<int, double> implied_los_dbm(const std::vector<NlosTableCell> &cells);

// P' recomputed for each cell from its P_nlos and the case's implied LOS power.
std::vector<double> recompute_relative(const std::vector<NlosTableCell> &cells);

// Writes to a sibling temp file then renames over the target.
void write_file_atomic(const std::filesystem::path &path, std::string_view contents);

} // namespace beamscan::report

#endif
