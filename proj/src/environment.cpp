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

#include "beamscan/environment.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace beamscan::env
{

namespace
{

constexpr double kCoplanarTolM = 1e-3;
constexpr std::string_view kHeader = "beamscan-scene v1";

// Newell's method, robust for any simple polygon.
Vec3 newell_normal(const std::vector<Point3> &poly)
{
    Vec3 n{};
    for (std::size_t i = 0; i < poly.size(); ++i)
    {
        const Point3 &a = poly[i];
        const Point3 &b = poly[(i + 1) % poly.size()];
        n.x += (a.y - b.y) * (a.z + b.z);
        n.y += (a.z - b.z) * (a.x + b.x);
        n.z += (a.x - b.x) * (a.y + b.y);
    }
    return n;
}

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::string fmt_double(double v)
{
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

std::string fmt_point(const Point3 &p)
{
    return fmt_double(p.x) + " " + fmt_double(p.y) + " " + fmt_double(p.z);
}

class Parser
{
  public:
    explicit Parser(int line) : line_(line) {}

    [[noreturn]] void fail(const std::string &msg) const
    {
        throw SceneError("scene line " + std::to_string(line_) + ": " + msg);
    }

    double number(std::string_view tok) const
    {
        tok = trim(tok);
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || ptr != tok.data() + tok.size())
            fail("expected a number, got '" + std::string(tok) + "'");
        return v;
    }

    std::vector<double> numbers(std::string_view s) const
    {
        std::vector<double> out;
        std::size_t pos = 0;
        while (pos < s.size())
        {
            while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t'))
                ++pos;
            if (pos >= s.size())
                break;
            auto end = s.find_first_of(" \t", pos);
            if (end == std::string_view::npos)
                end = s.size();
            out.push_back(number(s.substr(pos, end - pos)));
            pos = end;
        }
        return out;
    }

    Point3 point(std::string_view s) const
    {
        const auto v = numbers(s);
        if (v.size() != 3)
            fail("expected 3 coordinates, got " + std::to_string(v.size()));
        return {v[0], v[1], v[2]};
    }

    // "a b c; d e f; ..." groups of `width` numbers
    std::vector<std::vector<double>> groups(std::string_view s, std::size_t width) const
    {
        std::vector<std::vector<double>> out;
        std::size_t pos = 0;
        while (pos <= s.size())
        {
            auto end = s.find(';', pos);
            if (end == std::string_view::npos)
                end = s.size();
            const auto chunk = trim(s.substr(pos, end - pos));
            if (!chunk.empty())
            {
                auto v = numbers(chunk);
                if (v.size() != width)
                    fail("expected groups of " + std::to_string(width) + " numbers");
                out.push_back(std::move(v));
            }
            pos = end + 1;
        }
        return out;
    }

  private:
    int line_;
};

struct Section
{
    std::string kind; // "", "tx", "rx", "surface", "blocker"
    std::string name;
    int line = 0;
    std::vector<std::pair<std::string, std::pair<std::string, int>>> entries;
};

const std::string *lookup(const Section &s, std::string_view key, int *line)
{
    for (const auto &[k, v] : s.entries)
        if (k == key)
        {
            *line = v.second;
            return &v.first;
        }
    return nullptr;
}

double required_number(const Section &s, std::string_view key)
{
    int line = s.line;
    const auto *v = lookup(s, key, &line);
    if (!v)
        Parser(s.line).fail("section [" + s.kind + "] missing '" + std::string(key) + "'");
    return Parser(line).number(*v);
}

double optional_number(const Section &s, std::string_view key, double fallback)
{
    int line = s.line;
    const auto *v = lookup(s, key, &line);
    return v ? Parser(line).number(*v) : fallback;
}

void reject_unknown(const Section &s, std::initializer_list<std::string_view> known)
{
    for (const auto &[k, v] : s.entries)
        if (std::find(known.begin(), known.end(), k) == known.end())
            Parser(v.second).fail("unknown key '" + k + "'");
}

NodePose parse_pose(const Section &s)
{
    reject_unknown(s, {"position", "heading_deg", "mount_azimuth_deg", "mount_elevation_deg"});
    int line = s.line;
    const auto *pos = lookup(s, "position", &line);
    if (!pos)
        Parser(s.line).fail("section [" + s.kind + "] missing 'position'");
    NodePose p;
    p.position = Parser(line).point(*pos);
    p.heading_deg = optional_number(s, "heading_deg", 0.0);
    p.mount_azimuth_deg = optional_number(s, "mount_azimuth_deg", 0.0);
    p.mount_elevation_deg = optional_number(s, "mount_elevation_deg", 0.0);
    return p;
}

Surface parse_surface(const Section &s)
{
    reject_unknown(s, {"reflection_loss_db", "transmission_loss_db", "vertices"});
    Surface out;
    out.id = s.name;
    if (out.id.empty())
        Parser(s.line).fail("surface section needs an id: [surface <id>]");
    out.reflection_loss_db = required_number(s, "reflection_loss_db");
    int line = s.line;
    if (const auto *t = lookup(s, "transmission_loss_db", &line); t && trim(*t) != "opaque")
        out.transmission_loss_db = Parser(line).number(*t);
    const auto *verts = lookup(s, "vertices", &line);
    if (!verts)
        Parser(s.line).fail("surface '" + out.id + "' missing 'vertices'");
    for (const auto &g : Parser(line).groups(*verts, 3))
        out.polygon.push_back({g[0], g[1], g[2]});
    return out;
}

BlockerTrajectory parse_blocker(const Section &s)
{
    reject_unknown(s, {"radius_m", "height_m", "attenuation_db", "edge_width_m", "waypoints"});
    BlockerTrajectory b;
    b.radius_m = required_number(s, "radius_m");
    b.height_m = required_number(s, "height_m");
    b.attenuation_db = optional_number(s, "attenuation_db", b.attenuation_db);
    b.edge_width_m = optional_number(s, "edge_width_m", b.edge_width_m);
    int line = s.line;
    const auto *w = lookup(s, "waypoints", &line);
    if (!w)
        Parser(s.line).fail("blocker missing 'waypoints'");
    for (const auto &g : Parser(line).groups(*w, 4))
        b.waypoints.push_back({g[0], {g[1], g[2], g[3]}});
    return b;
}

} // namespace

Vec3 Surface::normal() const
{
    return normalized(newell_normal(polygon));
}

const Surface *Environment::find(std::string_view id) const
{
    for (const auto &s : surfaces)
        if (s.id == id)
            return &s;
    return nullptr;
}

void validate(const Surface &s)
{
    const auto where = "surface '" + s.id + "': ";
    if (s.polygon.size() < 3)
        throw SceneError(where + "polygon needs at least 3 vertices");
    for (const auto &p : s.polygon)
        if (!is_finite(p))
            throw SceneError(where + "non-finite vertex");
    if (!(s.reflection_loss_db >= 0.0))
        throw SceneError(where + "reflection loss must be >= 0 dB");
    if (s.transmission_loss_db && !(*s.transmission_loss_db >= 0.0))
        throw SceneError(where + "transmission loss must be >= 0 dB or opaque");

    const Vec3 raw = newell_normal(s.polygon);
    const double area2 = norm(raw);
    if (!(area2 > 1e-12))
        throw SceneError(where + "degenerate polygon, normal undefined");
    const Vec3 n = (1.0 / area2) * raw;

    Point3 centroid{};
    for (const auto &p : s.polygon)
        centroid = centroid + p;
    centroid = (1.0 / static_cast<double>(s.polygon.size())) * centroid;
    for (const auto &p : s.polygon)
        if (std::abs(dot(p - centroid, n)) > kCoplanarTolM)
            throw SceneError(where + "vertices not coplanar within 1 mm");

    const std::size_t m = s.polygon.size();
    for (std::size_t i = 0; i < m; ++i)
    {
        const Vec3 e0 = s.polygon[(i + 1) % m] - s.polygon[i];
        const Vec3 e1 = s.polygon[(i + 2) % m] - s.polygon[(i + 1) % m];
        if (dot(cross(e0, e1), n) < -1e-12)
            throw SceneError(where + "polygon is not convex");
    }
}

void validate(const Environment &env)
{
    if (!(env.carrier_frequency_hz > 0.0))
        throw SceneError("carrier frequency must be positive");
    std::set<std::string> ids;
    for (const auto &s : env.surfaces)
    {
        validate(s);
        if (!ids.insert(s.id).second)
            throw SceneError("duplicate surface id '" + s.id + "'");
    }
}

void validate(const NodePose &pose)
{
    if (!is_finite(pose.position) || !std::isfinite(pose.heading_deg))
        throw SceneError("node pose: non-finite position or heading");
    if (!(pose.mount_azimuth_deg > -180.0 && pose.mount_azimuth_deg <= 180.0))
        throw SceneError("node pose: mount azimuth must lie in (-180, 180]");
    if (!(pose.mount_elevation_deg >= -90.0 && pose.mount_elevation_deg <= 90.0))
        throw SceneError("node pose: mount elevation must lie in [-90, 90]");
}

void validate(const BlockerTrajectory &traj)
{
    if (!(traj.radius_m > 0.0))
        throw SceneError("blocker: radius must be > 0");
    if (!(traj.height_m > 0.0))
        throw SceneError("blocker: height must be > 0");
    if (!(traj.attenuation_db >= 0.0) || !(traj.edge_width_m >= 0.0))
        throw SceneError("blocker: attenuation and edge width must be >= 0");
    if (traj.waypoints.empty())
        throw SceneError("blocker: at least one waypoint required");
    for (std::size_t i = 0; i < traj.waypoints.size(); ++i)
    {
        if (!is_finite(traj.waypoints[i].base) || !std::isfinite(traj.waypoints[i].time_s))
            throw SceneError("blocker: non-finite waypoint");
        if (i > 0 && !(traj.waypoints[i].time_s > traj.waypoints[i - 1].time_s))
            throw SceneError("blocker: waypoint times must be strictly increasing");
    }
}

Scene load_environment(std::string_view document)
{
    std::vector<Section> sections(1);
    bool header_seen = false;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= document.size())
    {
        auto end = document.find('\n', pos);
        if (end == std::string_view::npos)
            end = document.size();
        ++line_no;
        auto line = trim(document.substr(pos, end - pos));
        pos = end + 1;
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = trim(line.substr(0, hash));
        if (line.empty())
            continue;
        if (!header_seen)
        {
            if (line != kHeader)
                Parser(line_no).fail("expected header '" + std::string(kHeader) + "'");
            header_seen = true;
            continue;
        }
        if (line.front() == '[')
        {
            if (line.back() != ']')
                Parser(line_no).fail("unterminated section header");
            auto inner = trim(line.substr(1, line.size() - 2));
            Section s;
            s.line = line_no;
            const auto sp = inner.find(' ');
            s.kind = std::string(inner.substr(0, sp));
            if (sp != std::string_view::npos)
                s.name = std::string(trim(inner.substr(sp + 1)));
            if (s.kind != "tx" && s.kind != "rx" && s.kind != "surface" && s.kind != "blocker")
                Parser(line_no).fail("unknown section '" + s.kind + "'");
            sections.push_back(std::move(s));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            Parser(line_no).fail("expected 'key = value'");
        sections.back().entries.push_back(
            {std::string(trim(line.substr(0, eq))), {std::string(trim(line.substr(eq + 1))), line_no}});
    }
    if (!header_seen)
        throw SceneError("empty scene document");

    Scene scene;
    reject_unknown(sections.front(), {"carrier_frequency_hz"});
    scene.environment.carrier_frequency_hz = optional_number(sections.front(), "carrier_frequency_hz", 60e9);
    bool have_tx = false, have_rx = false;
    for (std::size_t i = 1; i < sections.size(); ++i)
    {
        const auto &s = sections[i];
        if (s.kind == "tx" || s.kind == "rx")
        {
            bool &flag = s.kind == "tx" ? have_tx : have_rx;
            if (flag)
                Parser(s.line).fail("duplicate [" + s.kind + "] section");
            flag = true;
            (s.kind == "tx" ? scene.tx : scene.rx) = parse_pose(s);
        }
        else if (s.kind == "surface")
            scene.environment.surfaces.push_back(parse_surface(s));
        else
        {
            if (scene.blocker)
                Parser(s.line).fail("duplicate [blocker] section");
            scene.blocker = parse_blocker(s);
        }
    }
    if (!have_tx || !have_rx)
        throw SceneError("scene needs both [tx] and [rx] sections");

    validate(scene.environment);
    validate(scene.tx);
    validate(scene.rx);
    if (scene.blocker)
        validate(*scene.blocker);
    return scene;
}

Scene load_scene_file(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw SceneError("cannot open scene file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_environment(ss.str());
}

std::string serialize(const Scene &scene)
{
    std::ostringstream out;
    out << kHeader << "\n";
    out << "carrier_frequency_hz = " << fmt_double(scene.environment.carrier_frequency_hz) << "\n";
    auto pose = [&](const char *name, const NodePose &p) {
        out << "\n[" << name << "]\n";
        out << "position = " << fmt_point(p.position) << "\n";
        out << "heading_deg = " << fmt_double(p.heading_deg) << "\n";
        out << "mount_azimuth_deg = " << fmt_double(p.mount_azimuth_deg) << "\n";
        out << "mount_elevation_deg = " << fmt_double(p.mount_elevation_deg) << "\n";
    };
    pose("tx", scene.tx);
    pose("rx", scene.rx);
    for (const auto &s : scene.environment.surfaces)
    {
        out << "\n[surface " << s.id << "]\n";
        out << "reflection_loss_db = " << fmt_double(s.reflection_loss_db) << "\n";
        out << "transmission_loss_db = "
            << (s.transmission_loss_db ? fmt_double(*s.transmission_loss_db) : std::string("opaque")) << "\n";
        out << "vertices = ";
        for (std::size_t i = 0; i < s.polygon.size(); ++i)
            out << (i ? "; " : "") << fmt_point(s.polygon[i]);
        out << "\n";
    }
    if (scene.blocker)
    {
        const auto &b = *scene.blocker;
        out << "\n[blocker]\n";
        out << "radius_m = " << fmt_double(b.radius_m) << "\n";
        out << "height_m = " << fmt_double(b.height_m) << "\n";
        out << "attenuation_db = " << fmt_double(b.attenuation_db) << "\n";
        out << "edge_width_m = " << fmt_double(b.edge_width_m) << "\n";
        out << "waypoints = ";
        for (std::size_t i = 0; i < b.waypoints.size(); ++i)
            out << (i ? "; " : "") << fmt_double(b.waypoints[i].time_s) << " " << fmt_point(b.waypoints[i].base);
        out << "\n";
    }
    return out.str();
}

Point3 blocker_position(const BlockerTrajectory &traj, double t)
{
    const auto &w = traj.waypoints;
    if (w.empty() || !(t >= w.front().time_s && t <= w.back().time_s))
        throw std::out_of_range("blocker_position: t = " + std::to_string(t) + " s outside trajectory span");
    auto it = std::upper_bound(w.begin(), w.end(), t, [](double v, const Waypoint &p) { return v < p.time_s; });
    if (it == w.begin())
        return w.front().base;
    if (it == w.end())
        return w.back().base;
    const Waypoint &a = *(it - 1);
    const Waypoint &b = *it;
    if (t == a.time_s)
        return a.base;
    const double f = (t - a.time_s) / (b.time_s - a.time_s);
    return a.base + f * (b.base - a.base);
}

} // namespace beamscan::env
