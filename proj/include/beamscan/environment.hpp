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

#ifndef BEAMSCAN_ENVIRONMENT_HPP
#define BEAMSCAN_ENVIRONMENT_HPP

#include "beamscan/geometry.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace beamscan::env
{

// Raised by the scene loader and validators; message carries the offending item.
class SceneError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

// A convex planar polygon with per-surface interaction losses.
// transmission_loss_db == nullopt means the surface is opaque.
struct Surface
{
    std::string id;
    std::vector<Point3> polygon;
    double reflection_loss_db = 0.0;
    std::optional<double> transmission_loss_db;

    bool opaque() const { return !transmission_loss_db.has_value(); }

    // Unit normal following the right-hand winding of the polygon.
    Vec3 normal() const;

    friend bool operator==(const Surface &, const Surface &) = default;
};

struct Environment
{
    std::vector<Surface> surfaces;
    double carrier_frequency_hz = 60e9;

    const Surface *find(std::string_view id) const;

    friend bool operator==(const Environment &, const Environment &) = default;
};

// Array mount. heading_deg is the room-frame azimuth (counter-clockwise from +x)
// the gimbal points to at zero rotation. The mount angles follow the gimbal
// convention: azimuth positive clockwise viewed from above, elevation positive
// for up-tilt.
struct NodePose
{
    Point3 position;
    double heading_deg = 0.0;
    double mount_azimuth_deg = 0.0;
    double mount_elevation_deg = 0.0;

    friend bool operator==(const NodePose &, const NodePose &) = default;
};

struct Waypoint
{
    double time_s = 0.0;
    Point3 base; // cylinder-axis foot point

    friend bool operator==(const Waypoint &, const Waypoint &) = default;
};

// Vertical cylinder moving piecewise-linearly between waypoints.
struct BlockerTrajectory
{
    double radius_m = 0.2;
    double height_m = 1.8;
    double attenuation_db = 20.0;
    double edge_width_m = 0.1; // raised-cosine transition width across the cylinder edge
    std::vector<Waypoint> waypoints;

    double start_time() const { return waypoints.front().time_s; }
    double end_time() const { return waypoints.back().time_s; }

    friend bool operator==(const BlockerTrajectory &, const BlockerTrajectory &) = default;
};

struct Scene
{
    Environment environment;
    NodePose tx;
    NodePose rx;
    std::optional<BlockerTrajectory> blocker;

    friend bool operator==(const Scene &, const Scene &) = default;
};

void validate(const Surface &s);
void validate(const Environment &env);
void validate(const NodePose &pose);
void validate(const BlockerTrajectory &traj);

// Parses a `beamscan-scene v1` document and validates every invariant.
Scene load_environment(std::string_view document);
Scene load_scene_file(const std::filesystem::path &path);

// Inverse of load_environment; doubles are written in shortest round-trip form.
std::string serialize(const Scene &scene);

// Linear interpolation between the bracketing waypoints.
Point3 blocker_position(const BlockerTrajectory &traj, double t);

} // namespace beamscan::env

#endif
