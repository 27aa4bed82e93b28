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

#include "beamscan/report.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace beamscan::report
{

namespace
{

std::string num(double v, int precision = 4)
{
    if (!std::isfinite(v))
        return "nan";
    std::ostringstream s;
    s << std::fixed << std::setprecision(precision) << v;
    return s.str();
}

std::string matched_signature(const analysis::IdentifiedPath &ip, const std::vector<raytrace::RayPath> &traced)
{
    const auto *m = ip.true_match();
    return m ? traced[m->candidate].signature() : std::string();
}

std::vector<std::string_view> split(std::string_view line, char sep)
{
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true)
    {
        const auto next = line.find(sep, pos);
        out.push_back(line.substr(pos, next - pos));
        if (next == std::string_view::npos)
            break;
        pos = next + 1;
    }
    return out;
}

template <typename T> T parse_field(std::string_view tok, int line)
{
    while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t'))
        tok.remove_prefix(1);
    while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\r'))
        tok.remove_suffix(1);
    T v{};
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
        throw std::invalid_argument("nlos table line " + std::to_string(line) + ": bad number '" + std::string(tok) + "'");
    return v;
}

} // namespace

void write_los_power_csv(std::ostream &out, const std::vector<CaseRecord> &cases)
{
    out << "case,k_los,p_noise_dbm,p_rx_dbm,p_los_dbm,los_fraction_pct,los_rho\n";
    for (const auto &c : cases)
    {
        if (!c.analysis)
            continue;
        const auto &a = *c.analysis;
        out << c.case_id << ',' << a.k_los << ',' << num(a.power.p_noise_dbm) << ',' << num(a.power.p_rx_dbm) << ','
            << num(a.power.p_los_dbm) << ',' << num(a.power.los_fraction_pct, 2) << ','
            << (a.los_rho ? num(*a.los_rho) : "") << '\n';
    }
}

void write_nlos_power_csv(std::ostream &out, const std::vector<CaseRecord> &cases)
{
    out << "case,delay_bin,p_nlos_dbm,p_rel_db,verdict,path,rho\n";
    for (const auto &c : cases)
    {
        if (!c.analysis)
            continue;
        const auto &a = *c.analysis;
        for (std::size_t i = 0; i < a.power.nlos.size(); ++i)
        {
            const auto &row = a.power.nlos[i];
            const auto &ip = a.paths[i + 1];
            const auto *m = ip.true_match();
            out << c.case_id << ',' << row.delay_bin << ',' << num(row.p_nlos_dbm, 2) << ',' << num(row.p_rel_db, 2)
                << ',' << (m ? "true" : "unmatched") << ',' << matched_signature(ip, c.traced) << ','
                << (m && m->rho ? num(*m->rho) : "") << '\n';
        }
    }
}

void write_blockage_csv(std::ostream &out, const std::vector<analysis::BlockageSeries> &series,
                    const std::vector<raytrace::RayPath> &traced)
{
    out << "time_s";
    for (const auto &s : series)
        out << ',' << traced.at(s.traced_index).signature();
    out << '\n';
    if (series.empty())
        return;
    for (std::size_t j = 0; j < series.front().time_s.size(); ++j)
    {
        out << num(series.front().time_s[j], 4);
        for (const auto &s : series)
            out << ',' << num(s.rssi_dbm[j], 3);
        out << '\n';
    }
}

std::string summary_json(const std::vector<CaseRecord> &cases)
{
    using nlohmann::json;
    json doc = json::object();
    json arr = json::array();
    for (const auto &c : cases)
    {
        json jc;
        jc["case"] = c.case_id;
        if (!c.analysis)
        {
            jc["error"] = c.error;
            arr.push_back(jc);
            continue;
        }
        const auto &a = *c.analysis;
        jc["k_los"] = a.k_los;
        jc["delay_offset_bins"] = a.delay_offset_bins;
        jc["p_noise_dbm"] = a.power.p_noise_dbm;
        jc["p_rx_dbm"] = a.power.p_rx_dbm;
        jc["p_los_dbm"] = a.power.p_los_dbm;
        jc["los_fraction_pct"] = a.power.los_fraction_pct;
        jc["los_rho"] = a.los_rho ? json(*a.los_rho) : json(nullptr);
        json paths = json::array();
        for (const auto &ip : a.paths)
        {
            const auto &w = ip.estimate.omega_hat;
            json jp;
            jp["delay_bin"] = ip.estimate.delay_bin;
            jp["omega_hat"] = {{"phi_tx", w.phi_tx}, {"phi_rx", w.phi_rx}, {"theta_tx", w.theta_tx}, {"theta_rx", w.theta_rx}};
            jp["rssi0_dbm"] = ip.estimate.rssi0_dbm;
            jp["residual_var_db2"] = ip.estimate.residual_var_db2;
            json cands = json::array();
            for (const auto &m : ip.matches)
            {
                if (m.verdict == analysis::Verdict::NonExistent)
                    continue;
                cands.push_back({{"path", c.traced[m.candidate].signature()},
                                 {"verdict", analysis::to_string(m.verdict)},
                                 {"rho", m.rho ? json(*m.rho) : json(nullptr)},
                                 {"angle_gaps_deg", m.angle_gaps_deg}});
            }
            jp["candidates"] = cands;
            const auto *t = ip.true_match();
            jp["true_path"] = t ? json(c.traced[t->candidate].signature()) : json(nullptr);
            paths.push_back(jp);
        }
        jc["paths"] = paths;
        arr.push_back(jc);
    }
    doc["cases"] = arr;
    return doc.dump(2) + "\n";
}

std::vector<NlosTableCell> parse_nlos_table(std::string_view text)
{
    std::vector<NlosTableCell> cells;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    bool header = true;
    while (std::getline(in, line))
    {
        ++line_no;
        if (line.empty() || line[0] == '#')
            continue;
        if (header)
        {
            header = false;
            continue;
        }
        const auto f = split(line, ',');
        if (f.size() != 4)
            throw std::invalid_argument("nlos table line " + std::to_string(line_no) + ": expected 4 fields");
        cells.push_back({parse_field<int>(f[0], line_no), std::string(f[1]), parse_field<double>(f[2], line_no),
                         parse_field<double>(f[3], line_no)});
    }
    return cells;
}

std::vector<NlosTableCell> load_nlos_table(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path.string());
    std::ostringstream s;
    s << in.rdbuf();
    return parse_nlos_table(s.str());
}

std::map<int, double> implied_los_dbm(const std::vector<NlosTableCell> &cells)
{
    std::map<int, std::pair<double, int>> acc;
    for (const auto &c : cells)
    {
        auto &[sum, n] = acc[c.case_id];
        sum += c.p_nlos_dbm - c.p_rel_db;
        ++n;
    }
    std::map<int, double> out;
    for (const auto &[id, v] : acc)
        out[id] = v.first / v.second;
    return out;
}

std::vector<double> recompute_relative(const std::vector<NlosTableCell> &cells)
{
    const auto los = implied_los_dbm(cells);
    std::vector<double> out;
    out.reserve(cells.size());
    for (const auto &c : cells)
        out.push_back(analysis::relative_power_db(c.p_nlos_dbm, los.at(c.case_id)));
    return out;
}

void write_file_atomic(const std::filesystem::path &path, std::string_view contents)
{
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot write " + tmp.string());
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out)
            throw std::runtime_error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

} // namespace beamscan::report
