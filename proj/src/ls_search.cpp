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

#include "beamscan/analysis.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace beamscan::analysis
{

namespace
{

struct Candidate
{
    double objective = std::numeric_limits<double>::infinity();
    double dist2 = std::numeric_limits<double>::infinity();
    std::size_t tx_node = 0;
    std::size_t rx_node = 0;
};

// Strict weak-ish ordering with an epsilon band on the objective.
bool better(const Candidate &a, const Candidate &b, double eps)
{
    if (a.objective < b.objective - eps)
        return true;
    if (a.objective > b.objective + eps)
        return false;
    if (a.dist2 != b.dist2)
        return a.dist2 < b.dist2;
    if (a.tx_node != b.tx_node)
        return a.tx_node < b.tx_node;
    return a.rx_node < b.rx_node;
}

struct Node
{
    double az;
    double el;
};

Node node_angles(const array::PatternTable &t, std::size_t g)
{
    return {t.az_grid()[g / t.el_grid().size()], t.el_grid()[g % t.el_grid().size()]};
}

double node_dist2(const array::PatternTable &t, std::size_t g)
{
    const Node a = node_angles(t, g);
    return a.az * a.az + a.el * a.el;
}

// gains[g * beams + c] for every grid node g.
std::vector<double> node_gains(const array::PatternTable &t)
{
    std::vector<double> out(t.grid_size() * t.beams());
    const std::size_t n_el = t.el_grid().size();
    for (std::size_t g = 0; g < t.grid_size(); ++g)
        for (std::size_t c = 0; c < t.beams(); ++c)
            out[g * t.beams() + c] = t.at(c, g / n_el, g % n_el);
    return out;
}

void check_input(std::span<const double> rssi, const array::PatternTable &tx, const array::PatternTable &rx)
{
    if (rssi.size() != tx.beams() * rx.beams())
        throw std::invalid_argument("ls_direction_find: rssi length " + std::to_string(rssi.size()) +
                                    " does not match the PAC count");
    for (double v : rssi)
        if (!std::isfinite(v))
            throw std::invalid_argument("ls_direction_find: rssi must be finite");
}

std::vector<char> make_mask(std::span<const double> rssi, const LsOptions &opts)
{
    std::vector<char> mask(rssi.size(), 1);
    if (opts.mask_below_dbm)
        for (std::size_t n = 0; n < rssi.size(); ++n)
            mask[n] = rssi[n] > *opts.mask_below_dbm;
    return mask;
}

PathEstimate finish(std::span<const double> rssi, const array::PatternTable &tx, const array::PatternTable &rx,
                    const Candidate &best, const std::vector<char> &mask)
{
    const Node a = node_angles(tx, best.tx_node);
    const Node b = node_angles(rx, best.rx_node);
    PathEstimate est;
    est.rssi_dbm.assign(rssi.begin(), rssi.end());
    est.omega_hat = {a.az, b.az, a.el, b.el};
    const std::size_t tx_el = tx.el_grid().size(), rx_el = rx.el_grid().size();
    double sum = 0.0, sum2 = 0.0;
    std::size_t count = 0;
    for (std::size_t n = 0; n < rssi.size(); ++n)
    {
        if (!mask[n])
            continue;
        const auto pac = array::pac_from_index(n, rx.beams());
        const double r = rssi[n] - tx.at(pac.tx_beam, best.tx_node / tx_el, best.tx_node % tx_el) -
                         rx.at(pac.rx_beam, best.rx_node / rx_el, best.rx_node % rx_el);
        sum += r;
        ++count;
    }
    const double mean = sum / static_cast<double>(count);
    for (std::size_t n = 0; n < rssi.size(); ++n)
    {
        if (!mask[n])
            continue;
        const auto pac = array::pac_from_index(n, rx.beams());
        const double r = rssi[n] - tx.at(pac.tx_beam, best.tx_node / tx_el, best.tx_node % tx_el) -
                         rx.at(pac.rx_beam, best.rx_node / rx_el, best.rx_node % rx_el) - mean;
        sum2 += r * r;
    }
    est.rssi0_dbm = mean;
    est.residual_var_db2 = sum2 / static_cast<double>(count);
    return est;
}

// Per-side objective sum_c (d_c - mean d)^2 with d_c = target_c - G(c, node).
std::vector<double> side_objective(const std::vector<double> &target, const array::PatternTable &t)
{
    const auto gains = node_gains(t);
    const std::size_t beams = t.beams();
    const auto nodes = static_cast<long>(t.grid_size());
    std::vector<double> obj(t.grid_size());
#pragma omp parallel for schedule(static)
    for (long gs = 0; gs < nodes; ++gs)
    {
        const auto g = static_cast<std::size_t>(gs);
        const double *row = &gains[g * beams];
        double mean = 0.0;
        for (std::size_t c = 0; c < beams; ++c)
            mean += target[c] - row[c];
        mean /= static_cast<double>(beams);
        double acc = 0.0;
        for (std::size_t c = 0; c < beams; ++c)
        {
            const double d = target[c] - row[c] - mean;
            acc += d * d;
        }
        obj[g] = acc;
    }
    return obj;
}

std::size_t side_argmin(const std::vector<double> &obj, const array::PatternTable &t, double eps)
{
    Candidate best;
    for (std::size_t g = 0; g < obj.size(); ++g)
    {
        const Candidate c{obj[g], node_dist2(t, g), g, 0};
        if (better(c, best, eps))
            best = c;
    }
    return best.tx_node;
}

PathEstimate masked_search(std::span<const double> rssi, const array::PatternTable &tx,
                           const array::PatternTable &rx, const LsOptions &opts, const std::vector<char> &mask)
{
    std::vector<std::size_t> active;
    for (std::size_t n = 0; n < mask.size(); ++n)
        if (mask[n])
            active.push_back(n);
    if (active.size() < 2)
        throw std::invalid_argument("ls_direction_find: fewer than two PACs above the mask level");

    const auto tx_g = node_gains(tx);
    const auto rx_g = node_gains(rx);
    const std::size_t nrx = rx.beams();
    std::vector<Candidate> per_tx(tx.grid_size());
    const auto tx_nodes = static_cast<long>(tx.grid_size());
#pragma omp parallel for schedule(dynamic, 16)
    for (long gts = 0; gts < tx_nodes; ++gts)
    {
        const auto gt = static_cast<std::size_t>(gts);
        std::vector<double> partial(active.size());
        for (std::size_t i = 0; i < active.size(); ++i)
            partial[i] = rssi[active[i]] - tx_g[gt * tx.beams() + active[i] / nrx];
        Candidate best;
        const double dt = node_dist2(tx, gt);
        for (std::size_t gr = 0; gr < rx.grid_size(); ++gr)
        {
            const double *row = &rx_g[gr * nrx];
            double sum = 0.0, sum2 = 0.0;
            for (std::size_t i = 0; i < active.size(); ++i)
            {
                const double d = partial[i] - row[active[i] % nrx];
                sum += d;
                sum2 += d * d;
            }
            const double m = static_cast<double>(active.size());
            const Candidate c{sum2 / m - (sum / m) * (sum / m), dt + node_dist2(rx, gr), gt, gr};
            if (better(c, best, opts.tie_epsilon))
                best = c;
        }
        per_tx[gt] = best;
    }
    Candidate best;
    for (const auto &c : per_tx)
        if (better(c, best, opts.tie_epsilon))
            best = c;
    return finish(rssi, tx, rx, best, mask);
}

} // namespace

PathEstimate ls_direction_find(std::span<const double> rssi_dbm, const array::PatternTable &tx,
                               const array::PatternTable &rx, const LsOptions &opts)
{
    check_input(rssi_dbm, tx, rx);
    const auto mask = make_mask(rssi_dbm, opts);
    if (opts.mask_below_dbm)
        return masked_search(rssi_dbm, tx, rx, opts, mask);

    // var_n(R - G_tx - G_rx) = var_t(rowmean - G_tx)/.. + var_r(colmean - G_rx)/.. + const
    const std::size_t ntx = tx.beams(), nrx = rx.beams();
    std::vector<double> row_mean(ntx, 0.0), col_mean(nrx, 0.0);
    for (std::size_t t = 0; t < ntx; ++t)
        for (std::size_t r = 0; r < nrx; ++r)
        {
            row_mean[t] += rssi_dbm[t * nrx + r] / static_cast<double>(nrx);
            col_mean[r] += rssi_dbm[t * nrx + r] / static_cast<double>(ntx);
        }
    Candidate best;
    best.tx_node = side_argmin(side_objective(row_mean, tx), tx, opts.tie_epsilon);
    best.rx_node = side_argmin(side_objective(col_mean, rx), rx, opts.tie_epsilon);
    return finish(rssi_dbm, tx, rx, best, mask);
}

PathEstimate ls_direction_find_reference(std::span<const double> rssi_dbm, const array::PatternTable &tx,
                                         const array::PatternTable &rx, const LsOptions &opts)
{
    check_input(rssi_dbm, tx, rx);
    const auto mask = make_mask(rssi_dbm, opts);
    const std::size_t nrx = rx.beams();
    const std::size_t tx_el = tx.el_grid().size(), rx_el = rx.el_grid().size();
    Candidate best;
    for (std::size_t gt = 0; gt < tx.grid_size(); ++gt)
        for (std::size_t gr = 0; gr < rx.grid_size(); ++gr)
        {
            double sum = 0.0, count = 0.0;
            for (std::size_t n = 0; n < rssi_dbm.size(); ++n)
                if (mask[n])
                {
                    sum += rssi_dbm[n] - tx.at(n / nrx, gt / tx_el, gt % tx_el) - rx.at(n % nrx, gr / rx_el, gr % rx_el);
                    count += 1.0;
                }
            const double mean = sum / count;
            double var = 0.0;
            for (std::size_t n = 0; n < rssi_dbm.size(); ++n)
                if (mask[n])
                {
                    const double d = rssi_dbm[n] - tx.at(n / nrx, gt / tx_el, gt % tx_el) -
                                     rx.at(n % nrx, gr / rx_el, gr % rx_el) - mean;
                    var += d * d;
                }
            const Candidate c{var / count, node_dist2(tx, gt) + node_dist2(rx, gr), gt, gr};
            if (better(c, best, opts.tie_epsilon))
                best = c;
        }
    return finish(rssi_dbm, tx, rx, best, mask);
}

} // namespace beamscan::analysis
