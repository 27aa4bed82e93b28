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

#include "beamscan/raytrace.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <ostream>

namespace beamscan::raytrace
{

namespace
{

constexpr double kPlaneEps = 1e-9;

struct Facet
{
    const env::Surface *surface;
    Vec3 normal;
    double offset; // normal . p == offset on the plane

    double signed_distance(const Point3 &p) const { return dot(normal, p) - offset; }

    Point3 mirror(const Point3 &p) const { return p - (2.0 * signed_distance(p)) * normal; }

    bool contains(const Point3 &p) const
    {
        const auto &poly = surface->polygon;
        for (std::size_t i = 0; i < poly.size(); ++i)
        {
            const Vec3 edge = poly[(i + 1) % poly.size()] - poly[i];
            if (dot(cross(edge, p - poly[i]), normal) < -kPlaneEps * norm(edge))
                return false;
        }
        return true;
    }
};

std::vector<Facet> build_facets(const env::Environment &env)
{
    std::vector<Facet> out;
    out.reserve(env.surfaces.size());
    for (const auto &s : env.surfaces)
    {
        const Vec3 n = s.normal();
        out.push_back({&s, n, dot(n, s.polygon.front())});
    }
    return out;
}

struct Hit
{
    double t;
    std::size_t facet;
};

// Interior crossings of segment a->b with any facet other than the excluded ones.
std::vector<Hit> segment_hits(const std::vector<Facet> &facets, const Point3 &a, const Point3 &b,
                              std::optional<std::size_t> skip_a, std::optional<std::size_t> skip_b)
{
    std::vector<Hit> hits;
    for (std::size_t f = 0; f < facets.size(); ++f)
    {
        if (f == skip_a || f == skip_b)
            continue;
        const double da = facets[f].signed_distance(a);
        const double db = facets[f].signed_distance(b);
        if (std::abs(da) < kPlaneEps || std::abs(db) < kPlaneEps || (da > 0) == (db > 0))
            continue;
        const double t = da / (da - db);
        if (facets[f].contains(a + t * (b - a)))
            hits.push_back({t, f});
    }
    std::sort(hits.begin(), hits.end(), [](const Hit &x, const Hit &y) { return x.t < y.t; });
    return hits;
}

std::optional<RayPath> build_path(const std::vector<Facet> &facets, const std::vector<std::size_t> &sequence,
                                  const env::NodePose &tx, const env::NodePose &rx, double frequency_hz,
                                  double tx_power_dbm, const TraceOptions &opts)
{
    const std::size_t k = sequence.size();
    std::vector<Point3> images(k + 1);
    images[0] = tx.position;
    for (std::size_t i = 0; i < k; ++i)
        images[i + 1] = facets[sequence[i]].mirror(images[i]);

    std::vector<Point3> vertices(k + 2);
    vertices.front() = tx.position;
    vertices.back() = rx.position;
    Point3 target = rx.position;
    for (std::size_t i = k; i-- > 0;)
    {
        const Facet &f = facets[sequence[i]];
        const double dt = f.signed_distance(target);
        const double di = f.signed_distance(images[i + 1]);
        if (std::abs(dt) < kPlaneEps || std::abs(di) < kPlaneEps || (dt > 0) == (di > 0))
            return std::nullopt;
        const double t = dt / (dt - di);
        const Point3 p = target + t * (images[i + 1] - target);
        if (!f.contains(p))
            return std::nullopt;
        vertices[i + 1] = p;
        target = p;
    }

    // Specular validity: both neighbours of a reflection point lie strictly on the same side.
    for (std::size_t i = 0; i < k; ++i)
    {
        const Facet &f = facets[sequence[i]];
        const double before = f.signed_distance(vertices[i]);
        const double after = f.signed_distance(vertices[i + 2]);
        if (std::abs(before) < kPlaneEps || std::abs(after) < kPlaneEps || (before > 0) != (after > 0))
            return std::nullopt;
    }

    RayPath path;
    double losses = 0.0;
    int transmissions = 0;
    for (std::size_t s = 0; s + 1 < vertices.size(); ++s)
    {
        const std::optional<std::size_t> skip_a = s > 0 ? std::optional(sequence[s - 1]) : std::nullopt;
        const std::optional<std::size_t> skip_b = s < k ? std::optional(sequence[s]) : std::nullopt;
        for (const Hit &h : segment_hits(facets, vertices[s], vertices[s + 1], skip_a, skip_b))
        {
            const env::Surface &surf = *facets[h.facet].surface;
            if (surf.opaque() || ++transmissions > opts.max_transmissions)
                return std::nullopt;
            path.interactions.push_back({surf.id, InteractionKind::Transmission});
            losses += *surf.transmission_loss_db;
        }
        if (s < k)
        {
            const env::Surface &surf = *facets[sequence[s]].surface;
            path.interactions.push_back({surf.id, InteractionKind::Reflection});
            losses += surf.reflection_loss_db;
        }
        path.length_m += distance(vertices[s], vertices[s + 1]);
    }

    path.vertices = std::move(vertices);
    path.delay_ns = path.length_m / kLightSpeedMPerNs;
    path.path_gain_db = tx_power_dbm - fspl_db(frequency_hz, path.length_m) - losses;
    const auto aod = array::global_to_local(tx, path.vertices[1] - path.vertices[0]);
    const auto aoa = array::global_to_local(rx, path.vertices[path.vertices.size() - 2] - path.vertices.back());
    path.omega = {aod.phi_deg, aoa.phi_deg, aod.theta_deg, aoa.theta_deg};
    if (k == 0)
        path.tag = transmissions == 0 ? PathTag::Los : PathTag::Transmitted;
    else
        path.tag = k == 1 ? PathTag::Nlos1st : PathTag::Nlos2nd;
    return path;
}

void check_endpoint(const std::vector<Facet> &facets, const Point3 &p, const char *who)
{
    for (const auto &f : facets)
        if (std::abs(f.signed_distance(p)) < 1e-9 && f.contains(p))
            throw GeometryError(std::string(who) + " lies on surface '" + f.surface->id + "'");
}

} // namespace

const char *to_string(PathTag tag)
{
    switch (tag)
    {
    case PathTag::Los:
        return "LOS";
    case PathTag::Nlos1st:
        return "NLOS-1st";
    case PathTag::Nlos2nd:
        return "NLOS-2nd";
    case PathTag::Transmitted:
        return "NLOS-T";
    }
    return "?";
}

std::size_t RayPath::reflection_count() const
{
    return static_cast<std::size_t>(std::count_if(interactions.begin(), interactions.end(), [](const Interaction &i) {
        return i.kind == InteractionKind::Reflection;
    }));
}

std::size_t RayPath::transmission_count() const { return interactions.size() - reflection_count(); }

std::string RayPath::signature() const
{
    if (interactions.empty())
        return "LOS";
    std::string out;
    for (const auto &i : interactions)
    {
        if (!out.empty())
            out += i.kind == InteractionKind::Reflection ? ">" : "|";
        else if (i.kind == InteractionKind::Transmission)
            out += "|";
        out += i.surface_id;
    }
    return out;
}

double fspl_db(double frequency_hz, double distance_m)
{
    if (!(distance_m > 0.0))
        throw std::invalid_argument("fspl_db: distance must be positive");
    if (!(frequency_hz > 0.0))
        throw std::invalid_argument("fspl_db: frequency must be positive");
    return 20.0 * std::log10(4.0 * std::numbers::pi * distance_m * frequency_hz / kLightSpeedMPerS);
}

std::vector<RayPath> trace_paths(const env::Environment &env, const env::NodePose &tx, const env::NodePose &rx,
                                 double tx_power_dbm, const TraceOptions &opts)
{
    if (distance(tx.position, rx.position) < 1e-9)
        throw GeometryError("trace_paths: TX and RX positions coincide");
    const auto facets = build_facets(env);
    check_endpoint(facets, tx.position, "TX");
    check_endpoint(facets, rx.position, "RX");

    std::vector<std::vector<std::size_t>> sequences{{}};
    const std::size_t m = facets.size();
    if (opts.max_reflections >= 1)
        for (std::size_t i = 0; i < m; ++i)
            sequences.push_back({i});
    if (opts.max_reflections >= 2)
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j)
                if (i != j)
                    sequences.push_back({i, j});

    std::vector<std::optional<RayPath>> found(sequences.size());
    const auto count = static_cast<long>(sequences.size());
#pragma omp parallel for schedule(dynamic, 8)
    for (long s = 0; s < count; ++s)
        found[static_cast<std::size_t>(s)] =
            build_path(facets, sequences[static_cast<std::size_t>(s)], tx, rx, env.carrier_frequency_hz,
                       tx_power_dbm, opts);

    std::vector<RayPath> paths;
    for (auto &p : found)
        if (p)
            paths.push_back(std::move(*p));
    if (paths.empty())
        return paths;

    const double strongest =
        std::max_element(paths.begin(), paths.end(), [](const RayPath &a, const RayPath &b) {
            return a.path_gain_db < b.path_gain_db;
        })->path_gain_db;
    std::erase_if(paths, [&](const RayPath &p) { return p.path_gain_db < strongest - opts.drop_below_strongest_db; });
    std::sort(paths.begin(), paths.end(), [](const RayPath &a, const RayPath &b) {
        if (a.delay_ns != b.delay_ns)
            return a.delay_ns < b.delay_ns;
        return a.signature() < b.signature();
    });
    return paths;
}

std::vector<double> predict_rssi(const RayPath &path, const array::PatternTable &tx, const array::PatternTable &rx)
{
    std::vector<double> out(tx.beams() * rx.beams());
    for (std::size_t n = 0; n < out.size(); ++n)
        out[n] = path.path_gain_db + array::combined_gain(tx, rx, array::pac_from_index(n, rx.beams()), path.omega);
    return out;
}

void write_path_csv(std::ostream &out, const std::vector<RayPath> &paths)
{
    out << "tag,length_m,delay_ns,path_gain_db,phi_tx,theta_tx,phi_rx,theta_rx,interactions\n";
    const auto old_precision = out.precision(10);
    for (const auto &p : paths)
        out << to_string(p.tag) << ',' << p.length_m << ',' << p.delay_ns << ',' << p.path_gain_db << ','
            << p.omega.phi_tx << ',' << p.omega.theta_tx << ',' << p.omega.phi_rx << ',' << p.omega.theta_rx << ','
            << p.signature() << '\n';
    out.precision(old_precision);
}

} // namespace beamscan::raytrace
