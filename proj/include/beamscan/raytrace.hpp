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

#ifndef BEAMSCAN_RAYTRACE_HPP
#define BEAMSCAN_RAYTRACE_HPP

#include "beamscan/array.hpp"
#include "beamscan/environment.hpp"

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace beamscan::raytrace
{

class GeometryError : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

enum class InteractionKind
{
    Reflection,
    Transmission
};

struct Interaction
{
    std::string surface_id;
    InteractionKind kind = InteractionKind::Reflection;

    friend bool operator==(const Interaction &, const Interaction &) = default;
};

// Transmitted: no reflection but at least one pass-through.
enum class PathTag
{
    Los,
    Nlos1st,
    Nlos2nd,
    Transmitted
};

const char *to_string(PathTag tag);

struct RayPath
{
    std::vector<Point3> vertices; // TX, interaction points..., RX
    std::vector<Interaction> interactions;
    double length_m = 0.0;
    double delay_ns = 0.0;
    double path_gain_db = 0.0; // tx power minus spreading and interaction losses, dBm
    array::AoaAodPair omega;
    PathTag tag = PathTag::Los;

    std::size_t reflection_count() const;
    std::size_t transmission_count() const;

    // e.g. "floor>cabinet" or "pole_n|partition" (| marks transmissions); "LOS" when empty.
    std::string signature() const;
};

struct TraceOptions
{
    int max_reflections = 2;
    int max_transmissions = 1;
    double drop_below_strongest_db = 60.0;
};

// Free-space (Friis) spreading loss, dB.
double fspl_db(double frequency_hz, double distance_m);

// Image-method specular tracer. Output sorted by delay, ties by signature.
std::vector<RayPath> trace_paths(const env::Environment &env, const env::NodePose &tx, const env::NodePose &rx,
                                 double tx_power_dbm, const TraceOptions &opts = {});

// RSSI_est(n) = path gain + G(n, omega) over all PACs. Throws GridError if omega
// falls outside either table.
std::vector<double> predict_rssi(const RayPath &path, const array::PatternTable &tx, const array::PatternTable &rx);

// CSV: tag,length_m,delay_ns,path_gain_db,phi_tx,theta_tx,phi_rx,theta_rx,interactions
void write_path_csv(std::ostream &out, const std::vector<RayPath> &paths);

} // namespace beamscan::raytrace

#endif
