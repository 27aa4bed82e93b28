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

#include "beamscan/array.hpp"

#include "binary_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

namespace beamscan::array
{

namespace
{

void check_grid(const std::vector<double> &g, const char *name)
{
    if (g.empty())
        throw std::invalid_argument(std::string("pattern table: empty ") + name + " grid");
    for (std::size_t i = 0; i < g.size(); ++i)
    {
        if (!std::isfinite(g[i]))
            throw std::invalid_argument(std::string("pattern table: non-finite ") + name + " grid value");
        if (i > 0 && !(g[i] > g[i - 1]))
            throw std::invalid_argument(std::string("pattern table: ") + name + " grid not strictly increasing");
    }
}

// Cell index i and weight w such that value = (1-w)*g[i] + w*g[i+1].
std::pair<std::size_t, double> locate(const std::vector<double> &g, double v)
{
    if (g.size() == 1)
        return {0, 0.0};
    auto it = std::upper_bound(g.begin(), g.end(), v);
    std::size_t hi = static_cast<std::size_t>(it - g.begin());
    hi = std::clamp<std::size_t>(hi, 1, g.size() - 1);
    const std::size_t lo = hi - 1;
    return {lo, (v - g[lo]) / (g[hi] - g[lo])};
}

struct Basis
{
    Vec3 boresight, left, up;
};

Basis mount_basis(const env::NodePose &pose)
{
    const double psi = deg2rad(pose.heading_deg - pose.mount_azimuth_deg);
    const double e = deg2rad(pose.mount_elevation_deg);
    return {{std::cos(e) * std::cos(psi), std::cos(e) * std::sin(psi), std::sin(e)},
            {-std::sin(psi), std::cos(psi), 0.0},
            {-std::sin(e) * std::cos(psi), -std::sin(e) * std::sin(psi), std::cos(e)}};
}

} // namespace

PatternTable::PatternTable(std::size_t beams, std::vector<double> az_grid, std::vector<double> el_grid,
                           std::vector<double> gain_db)
    : beams_(beams), az_(std::move(az_grid)), el_(std::move(el_grid)), gain_(std::move(gain_db))
{
    if (beams_ == 0)
        throw std::invalid_argument("pattern table: needs at least one beam");
    check_grid(az_, "azimuth");
    check_grid(el_, "elevation");
    if (gain_.size() != beams_ * az_.size() * el_.size())
        throw std::invalid_argument("pattern table: gain size does not match dimensions");
    const std::size_t per_beam = az_.size() * el_.size();
    floor_.resize(beams_);
    peak_.resize(beams_);
    for (std::size_t c = 0; c < beams_; ++c)
    {
        const auto first = gain_.begin() + static_cast<std::ptrdiff_t>(c * per_beam);
        const auto last = first + static_cast<std::ptrdiff_t>(per_beam);
        if (!std::all_of(first, last, [](double g) { return std::isfinite(g); }))
            throw std::invalid_argument("pattern table: non-finite gain");
        const auto [mn, mx] = std::minmax_element(first, last);
        floor_[c] = *mn;
        peak_[c] = *mx;
        if (*mx < 0.0 || *mx > 40.0)
            throw std::invalid_argument("pattern table: beam peak gain outside [0, 40] dBi");
    }
}

bool PatternTable::covers(double az_deg, double el_deg) const
{
    return az_deg >= az_.front() && az_deg <= az_.back() && el_deg >= el_.front() && el_deg <= el_.back();
}

double PatternTable::gain(std::size_t beam, double az_deg, double el_deg) const
{
    if (beam >= beams_)
        throw std::out_of_range("pattern table: beam index out of range");
    if (!covers(az_deg, el_deg))
        throw GridError("pattern table: direction (" + std::to_string(az_deg) + ", " + std::to_string(el_deg) +
                        ") deg outside grid span");
    const auto [ia, wa] = locate(az_, az_deg);
    const auto [ie, we] = locate(el_, el_deg);
    const std::size_t ia1 = std::min(ia + 1, az_.size() - 1);
    const std::size_t ie1 = std::min(ie + 1, el_.size() - 1);
    const double g00 = at(beam, ia, ie);
    const double g01 = at(beam, ia, ie1);
    const double g10 = at(beam, ia1, ie);
    const double g11 = at(beam, ia1, ie1);
    return (1.0 - wa) * ((1.0 - we) * g00 + we * g01) + wa * ((1.0 - we) * g10 + we * g11);
}

double PatternTable::gain_or_floor(std::size_t beam, double az_deg, double el_deg) const
{
    return covers(az_deg, el_deg) ? gain(beam, az_deg, el_deg) : floor_db(beam);
}

double combined_gain(const PatternTable &tx, const PatternTable &rx, const Pac &n, const AoaAodPair &omega)
{
    return tx.gain(n.tx_beam, omega.phi_tx, omega.theta_tx) + rx.gain(n.rx_beam, omega.phi_rx, omega.theta_rx);
}

std::vector<BeamCenter> beam_centers(const CodebookSpec &spec)
{
    std::vector<BeamCenter> out(spec.beams);
    for (std::size_t i = 0; i < spec.beams; ++i)
    {
        const double az = spec.beams == 1 ? 0.0
                                          : -spec.steering_span_deg / 2.0 +
                                                spec.steering_span_deg * static_cast<double>(i) /
                                                    static_cast<double>(spec.beams - 1);
        const double el = spec.beams < 3 ? 0.0 : (static_cast<double>(i % 3) - 1.0) * spec.elevation_span_deg / 2.0;
        out[i] = {az, el};
    }
    return out;
}

double synth_beam_gain(const CodebookSpec &spec, const BeamCenter &c, double az_deg, double el_deg)
{
    const double da = (az_deg - c.az_deg) / spec.hpbw_deg;
    const double de = (el_deg - c.el_deg) / spec.hpbw_deg;
    // 12 (d/hpbw)^2 equals 3 dB at d = hpbw/2.
    const double g = spec.peak_gain_dbi - 12.0 * (da * da + de * de);
    return std::max(g, spec.peak_gain_dbi - spec.sidelobe_level_db);
}

PatternTable synth_codebook(const CodebookSpec &spec)
{
    if (spec.beams < 1)
        throw std::invalid_argument("synth_codebook: beams must be >= 1");
    if (!(spec.hpbw_deg > 0.0))
        throw std::invalid_argument("synth_codebook: hpbw must be positive");
    if (!(spec.steering_span_deg > 0.0) && spec.beams > 1)
        throw std::invalid_argument("synth_codebook: steering span must be positive for multiple beams");
    if (spec.steering_span_deg < 0.0 || spec.elevation_span_deg < 0.0 || !(spec.sidelobe_level_db >= 0.0))
        throw std::invalid_argument("synth_codebook: negative span or sidelobe level");
    if (!(spec.az_step_deg > 0.0) || !(spec.el_step_deg > 0.0))
        throw std::invalid_argument("synth_codebook: grid steps must be positive");

    auto grid = [](double limit, double step) {
        std::vector<double> g;
        const auto n = static_cast<long>(std::floor(2.0 * limit / step + 1e-9));
        for (long i = 0; i <= n; ++i)
            g.push_back(-limit + step * static_cast<double>(i));
        return g;
    };
    auto az = grid(spec.az_limit_deg, spec.az_step_deg);
    auto el = grid(spec.el_limit_deg, spec.el_step_deg);
    const auto centers = beam_centers(spec);
    std::vector<double> gains;
    gains.reserve(spec.beams * az.size() * el.size());
    for (const auto &c : centers)
        for (double a : az)
            for (double e : el)
                gains.push_back(synth_beam_gain(spec, c, a, e));
    return PatternTable(spec.beams, std::move(az), std::move(el), std::move(gains));
}

LocalAngles global_to_local(const env::NodePose &pose, const Vec3 &direction)
{
    const double len = norm(direction);
    if (!(len > 0.0) || !std::isfinite(len))
        throw std::invalid_argument("global_to_local: zero or non-finite direction");
    const Vec3 d = (1.0 / len) * direction;
    const Basis b = mount_basis(pose);
    const double x = dot(d, b.boresight);
    const double y = dot(d, b.left);
    const double z = dot(d, b.up);
    double phi = -rad2deg(std::atan2(y, x));
    if (phi <= -180.0)
        phi += 360.0;
    return {phi, rad2deg(std::atan2(z, std::hypot(x, y)))};
}

Vec3 local_to_global(const env::NodePose &pose, const LocalAngles &local)
{
    const Basis b = mount_basis(pose);
    const double ph = deg2rad(-local.phi_deg);
    const double th = deg2rad(local.theta_deg);
    return (std::cos(th) * std::cos(ph)) * b.boresight + (std::cos(th) * std::sin(ph)) * b.left +
           std::sin(th) * b.up;
}

std::vector<OrientationCase> parse_case_table(std::string_view text)
{
    std::vector<OrientationCase> out;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line))
    {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        std::istringstream fields(line);
        OrientationCase c;
        if (!(fields >> c.case_id >> c.tx_elevation_deg >> c.rx_elevation_deg >> c.tx_azimuth_deg >>
              c.rx_azimuth_deg))
            throw std::invalid_argument("case table line " + std::to_string(line_no) + ": expected 5 columns");
        if (c.case_id < 1)
            throw std::invalid_argument("case table line " + std::to_string(line_no) + ": case id must be >= 1");
        for (const auto &prev : out)
            if (prev.case_id == c.case_id)
                throw std::invalid_argument("case table: duplicate case " + std::to_string(c.case_id));
        out.push_back(c);
    }
    return out;
}

std::vector<OrientationCase> load_case_table(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("cannot open case table '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_case_table(ss.str());
}

const OrientationCase &find_case(const std::vector<OrientationCase> &cases, int case_id)
{
    for (const auto &c : cases)
        if (c.case_id == case_id)
            return c;
    throw std::invalid_argument("unknown case id " + std::to_string(case_id));
}

env::NodePose apply_tx(const env::NodePose &base, const OrientationCase &c)
{
    auto p = base;
    p.mount_azimuth_deg = c.tx_azimuth_deg;
    p.mount_elevation_deg = c.tx_elevation_deg;
    return p;
}

env::NodePose apply_rx(const env::NodePose &base, const OrientationCase &c)
{
    auto p = base;
    p.mount_azimuth_deg = c.rx_azimuth_deg;
    p.mount_elevation_deg = c.rx_elevation_deg;
    return p;
}

void write_pattern_table(std::ostream &out, const PatternTable &table)
{
    detail::put_magic(out, "BSPT");
    detail::put_le<std::uint32_t>(out, 1);
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(table.beams()));
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(table.az_grid().size()));
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(table.el_grid().size()));
    for (double v : table.az_grid())
        detail::put_le<float>(out, static_cast<float>(v));
    for (double v : table.el_grid())
        detail::put_le<float>(out, static_cast<float>(v));
    for (double v : table.values())
        detail::put_le<float>(out, static_cast<float>(v));
}

PatternTable read_pattern_table(std::istream &in)
{
    detail::expect_magic(in, "BSPT", "pattern table");
    const auto version = detail::get_le<std::uint32_t>(in, "version");
    if (version != 1)
        throw std::runtime_error("pattern table: unsupported version " + std::to_string(version));
    const auto beams = detail::get_le<std::uint32_t>(in, "beams");
    const auto n_az = detail::get_le<std::uint32_t>(in, "n_az");
    const auto n_el = detail::get_le<std::uint32_t>(in, "n_el");
    auto read_vec = [&](std::size_t n, const char *what) {
        std::vector<double> v(n);
        for (auto &x : v)
            x = detail::get_le<float>(in, what);
        return v;
    };
    auto az = read_vec(n_az, "azimuth grid");
    auto el = read_vec(n_el, "elevation grid");
    auto g = read_vec(static_cast<std::size_t>(beams) * n_az * n_el, "gains");
    return PatternTable(beams, std::move(az), std::move(el), std::move(g));
}

void save_pattern_table(const std::filesystem::path &path, const PatternTable &table)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot write pattern table '" + path.string() + "'");
    write_pattern_table(out, table);
}

PatternTable load_pattern_table(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open pattern table '" + path.string() + "'");
    return read_pattern_table(in);
}

} // namespace beamscan::array
