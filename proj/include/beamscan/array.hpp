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

#ifndef BEAMSCAN_ARRAY_HPP
#define BEAMSCAN_ARRAY_HPP

#include "beamscan/environment.hpp"
#include "beamscan/geometry.hpp"

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace beamscan::array
{

// Thrown when an angle falls outside a pattern table's grid span.
class GridError : public std::out_of_range
{
  public:
    using std::out_of_range::out_of_range;
};

// Per-beam directionality gain(c, az, el) in dBi sampled on a regular-or-not,
// strictly increasing (azimuth, elevation) grid. Immutable after construction.
class PatternTable
{
  public:
    PatternTable() = default;

    // gain_db is laid out [beam][az][el] (elevation fastest).
    PatternTable(std::size_t beams, std::vector<double> az_grid, std::vector<double> el_grid,
                 std::vector<double> gain_db);

    std::size_t beams() const { return beams_; }
    const std::vector<double> &az_grid() const { return az_; }
    const std::vector<double> &el_grid() const { return el_; }
    const std::vector<double> &values() const { return gain_; }

    std::size_t grid_size() const { return az_.size() * el_.size(); }

    double at(std::size_t beam, std::size_t ia, std::size_t ie) const
    {
        return gain_[(beam * az_.size() + ia) * el_.size() + ie];
    }

    bool covers(double az_deg, double el_deg) const;

    // Bilinear interpolation; throws GridError outside the grid span.
    double gain(std::size_t beam, double az_deg, double el_deg) const;

    // Lowest table value of the beam (its sidelobe floor).
    double floor_db(std::size_t beam) const { return floor_[beam]; }

    // gain() inside the grid, floor_db() for directions the table does not cover.
    double gain_or_floor(std::size_t beam, double az_deg, double el_deg) const;

    double peak_db(std::size_t beam) const { return peak_[beam]; }

  private:
    std::size_t beams_ = 0;
    std::vector<double> az_;
    std::vector<double> el_;
    std::vector<double> gain_;
    std::vector<double> floor_;
    std::vector<double> peak_;
};

// Pointing angle combination: row-major over (tx beam, rx beam).
struct Pac
{
    std::size_t n = 0;
    std::size_t tx_beam = 0;
    std::size_t rx_beam = 0;
};

inline Pac pac_from_index(std::size_t n, std::size_t rx_beams) { return {n, n / rx_beams, n % rx_beams}; }
inline Pac pac_from_beams(std::size_t tx_beam, std::size_t rx_beam, std::size_t rx_beams)
{
    return {tx_beam * rx_beams + rx_beam, tx_beam, rx_beam};
}

// Angle of departure/arrival in each array's local frame, degrees.
struct AoaAodPair
{
    double phi_tx = 0.0;
    double phi_rx = 0.0;
    double theta_tx = 0.0;
    double theta_rx = 0.0;

    friend bool operator==(const AoaAodPair &, const AoaAodPair &) = default;
};

// G(n, omega) = G_tx(tx_beam, phi_tx, theta_tx) + G_rx(rx_beam, phi_rx, theta_rx).
double combined_gain(const PatternTable &tx, const PatternTable &rx, const Pac &n, const AoaAodPair &omega);

struct CodebookSpec
{
    std::size_t beams = 12;
    double hpbw_deg = 65.0;
    double peak_gain_dbi = 15.0;
    double steering_span_deg = 90.0;
    double elevation_span_deg = 45.0; // beam elevations cycle over {-span/2, 0, +span/2}
    double sidelobe_level_db = 20.0;  // floor below peak
    double az_step_deg = 2.0;
    double az_limit_deg = 90.0;
    double el_step_deg = 2.0;
    double el_limit_deg = 60.0;
};

struct BeamCenter
{
    double az_deg;
    double el_deg;
};

std::vector<BeamCenter> beam_centers(const CodebookSpec &spec);

// Gaussian main lobe (in dB: peak - 12 * (d/hpbw)^2 over both axes) clipped to a flat floor.
double synth_beam_gain(const CodebookSpec &spec, const BeamCenter &c, double az_deg, double el_deg);

PatternTable synth_codebook(const CodebookSpec &spec);

struct LocalAngles
{
    double phi_deg;   // positive clockwise viewed from above
    double theta_deg; // positive up
};

// Room-frame direction to the array's local (phi, theta). Throws on a zero vector.
LocalAngles global_to_local(const env::NodePose &pose, const Vec3 &direction);

// Unit vector in the room frame.
Vec3 local_to_global(const env::NodePose &pose, const LocalAngles &local);

// One row of the orientation case table: the reported mount angles.
struct OrientationCase
{
    int case_id = 0;
    double tx_elevation_deg = 0.0;
    double rx_elevation_deg = 0.0;
    double tx_azimuth_deg = 0.0;
    double rx_azimuth_deg = 0.0;
};

std::vector<OrientationCase> parse_case_table(std::string_view text);
std::vector<OrientationCase> load_case_table(const std::filesystem::path &path);
const OrientationCase &find_case(const std::vector<OrientationCase> &cases, int case_id);

// Returns copies of the scene poses with the case's mount angles applied.
env::NodePose apply_tx(const env::NodePose &base, const OrientationCase &c);
env::NodePose apply_rx(const env::NodePose &base, const OrientationCase &c);

// Binary pattern file: "BSPT", u32 version, u32 beams, u32 n_az, u32 n_el,
// then az grid, el grid and gains as little-endian float32.
void write_pattern_table(std::ostream &out, const PatternTable &table);
PatternTable read_pattern_table(std::istream &in);
void save_pattern_table(const std::filesystem::path &path, const PatternTable &table);
PatternTable load_pattern_table(const std::filesystem::path &path);

} // namespace beamscan::array

#endif
