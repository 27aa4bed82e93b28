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

// beamscan command line: trace, simulate, analyze.

#include "beamscan/analysis.hpp"
#include "beamscan/array.hpp"
#include "beamscan/environment.hpp"
#include "beamscan/raytrace.hpp"
#include "beamscan/report.hpp"
#include "beamscan/sounder.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace beamscan;

namespace
{

constexpr int kExitAnalysis = 1;
constexpr int kExitInput = 2;

struct InputError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

struct RunConfig
{
    std::string scene;
    std::string case_table;
    std::vector<int> cases;
    std::string out = "out";
    std::string in;
    bool force = false;

    std::uint64_t seed = 1;
    std::size_t n_scan = 1750;
    std::size_t n_dly = 192;
    double noise_floor_dbm = sounder::SimConfig{}.noise_floor_dbm;
    double noise_sigma_db = 1.0;
    double tx_power_dbm = 5.0;
    bool pulse_spread = false;
    int blockage_case = 0; // 0: no blocker run

    double hpbw_deg = array::CodebookSpec{}.hpbw_deg;
    double steering_span_deg = array::CodebookSpec{}.steering_span_deg;
    double elevation_span_deg = array::CodebookSpec{}.elevation_span_deg;

    std::size_t guard_m = 5;
    double peak_threshold_db = 3.0;
    double angle_tol_deg = 5.0;
    long delay_tol_bins = 1;
    bool mask_noise = false;
};

json to_json(const RunConfig &c)
{
    return {{"scene", c.scene},
            {"case-table", c.case_table},
            {"cases", c.cases},
            {"out", c.out},
            {"in", c.in},
            {"seed", c.seed},
            {"n-scan", c.n_scan},
            {"n-dly", c.n_dly},
            {"noise-floor", c.noise_floor_dbm},
            {"noise-sigma", c.noise_sigma_db},
            {"tx-power", c.tx_power_dbm},
            {"pulse-spread", c.pulse_spread},
            {"blockage-case", c.blockage_case},
            {"hpbw", c.hpbw_deg},
            {"steering-span", c.steering_span_deg},
            {"elevation-span", c.elevation_span_deg},
            {"guard-m", c.guard_m},
            {"peak-threshold-db", c.peak_threshold_db},
            {"angle-tol", c.angle_tol_deg},
            {"delay-tol", c.delay_tol_bins},
            {"mask-noise", c.mask_noise}};
}

// Options shared by all subcommands; the key doubles as the config-file name.
void add_options(CLI::App *app, RunConfig &c, std::vector<std::pair<std::string, CLI::Option *>> &opts)
{
    auto add = [&](const std::string &key, CLI::Option *o) { opts.emplace_back(key, o); };
    add("scene", app->add_option("--scene", c.scene, "scene file"));
    add("case-table", app->add_option("--case-table", c.case_table, "orientation case table"));
    add("cases", app->add_option("--cases", c.cases, "case ids (default: all)")->delimiter(','));
    add("out", app->add_option("--out", c.out, "output directory"));
    add("seed", app->add_option("--seed", c.seed, "RNG seed"));
    add("n-scan", app->add_option("--n-scan", c.n_scan, "scans per case"));
    add("n-dly", app->add_option("--n-dly", c.n_dly, "delay bins"));
    add("noise-floor", app->add_option("--noise-floor", c.noise_floor_dbm, "noise floor, dBm"));
    add("noise-sigma", app->add_option("--noise-sigma", c.noise_sigma_db, "log-domain jitter, dB"));
    add("tx-power", app->add_option("--tx-power", c.tx_power_dbm, "TX power, dBm"));
    add("pulse-spread", app->add_flag("--pulse-spread", c.pulse_spread, "3-tap pulse"));
    add("blockage-case", app->add_option("--blockage-case", c.blockage_case, "case simulated with the blocker"));
    add("hpbw", app->add_option("--hpbw", c.hpbw_deg, "beam half-power width, deg"));
    add("steering-span", app->add_option("--steering-span", c.steering_span_deg, "codebook azimuth span, deg"));
    add("elevation-span", app->add_option("--elevation-span", c.elevation_span_deg, "codebook elevation span, deg"));
    add("guard-m", app->add_option("--guard-m", c.guard_m, "noise guard bins"));
    add("peak-threshold-db", app->add_option("--peak-threshold-db", c.peak_threshold_db, "NLOS threshold above P_N"));
    add("angle-tol", app->add_option("--angle-tol", c.angle_tol_deg, "matching angle tolerance, deg"));
    add("delay-tol", app->add_option("--delay-tol", c.delay_tol_bins, "matching delay tolerance, bins"));
    add("mask-noise", app->add_flag("--mask-noise", c.mask_noise, "LS over PACs above noise only"));
    app->add_flag("--force", c.force, "overwrite existing outputs");
}

// Values from the config file fill options not given on the command line.
void apply_config_file(const std::string &path, RunConfig &c,
                       const std::vector<std::pair<std::string, CLI::Option *>> &opts)
{
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open config file '" + path + "'");
    json j;
    try
    {
        j = json::parse(in);
    }
    catch (const json::exception &e)
    {
        throw InputError("config file '" + path + "': " + e.what());
    }
    for (const auto &[key, opt] : opts)
    {
        if (opt->count() > 0 || !j.contains(key))
            continue;
        try
        {
            const auto &v = j[key];
            if (key == "scene") c.scene = v.get<std::string>();
            else if (key == "case-table") c.case_table = v.get<std::string>();
            else if (key == "cases") c.cases = v.get<std::vector<int>>();
            else if (key == "out") c.out = v.get<std::string>();
            else if (key == "seed") c.seed = v.get<std::uint64_t>();
            else if (key == "n-scan") c.n_scan = v.get<std::size_t>();
            else if (key == "n-dly") c.n_dly = v.get<std::size_t>();
            else if (key == "noise-floor") c.noise_floor_dbm = v.get<double>();
            else if (key == "noise-sigma") c.noise_sigma_db = v.get<double>();
            else if (key == "tx-power") c.tx_power_dbm = v.get<double>();
            else if (key == "pulse-spread") c.pulse_spread = v.get<bool>();
            else if (key == "blockage-case") c.blockage_case = v.get<int>();
            else if (key == "hpbw") c.hpbw_deg = v.get<double>();
            else if (key == "steering-span") c.steering_span_deg = v.get<double>();
            else if (key == "elevation-span") c.elevation_span_deg = v.get<double>();
            else if (key == "guard-m") c.guard_m = v.get<std::size_t>();
            else if (key == "peak-threshold-db") c.peak_threshold_db = v.get<double>();
            else if (key == "angle-tol") c.angle_tol_deg = v.get<double>();
            else if (key == "delay-tol") c.delay_tol_bins = v.get<long>();
            else if (key == "mask-noise") c.mask_noise = v.get<bool>();
        }
        catch (const json::exception &e)
        {
            throw InputError("config key '" + key + "': " + e.what());
        }
    }
}

struct Prepared
{
    env::Scene scene;
    std::vector<array::OrientationCase> table;
    std::vector<int> cases;
    array::PatternTable codebook;
};

Prepared prepare(const RunConfig &c)
{
    if (c.scene.empty())
        throw InputError("--scene is required");
    if (!fs::exists(c.scene))
        throw InputError("scene file not found: " + c.scene);
    Prepared p;
    p.scene = env::load_scene_file(c.scene);
    fs::path table = c.case_table;
    if (table.empty())
        table = fs::path(c.scene).parent_path() / "cases.txt";
    if (!fs::exists(table))
        throw InputError("case table not found: " + table.string());
    p.table = array::load_case_table(table);
    p.cases = c.cases;
    if (p.cases.empty())
        for (const auto &row : p.table)
            p.cases.push_back(row.case_id);
    for (int id : p.cases)
        try
        {
            (void)array::find_case(p.table, id);
        }
        catch (const std::exception &)
        {
            throw InputError("unknown case id " + std::to_string(id));
        }
    array::CodebookSpec spec;
    spec.hpbw_deg = c.hpbw_deg;
    spec.steering_span_deg = c.steering_span_deg;
    spec.elevation_span_deg = c.elevation_span_deg;
    p.codebook = array::synth_codebook(spec);
    return p;
}

std::vector<raytrace::RayPath> trace_case(const Prepared &p, int id, double tx_power)
{
    const auto &row = array::find_case(p.table, id);
    return raytrace::trace_paths(p.scene.environment, array::apply_tx(p.scene.tx, row), array::apply_rx(p.scene.rx, row),
                                 tx_power);
}

void ensure_out_dir(const RunConfig &c)
{
    std::error_code ec;
    fs::create_directories(c.out, ec);
    if (ec)
        throw InputError("cannot create output directory '" + c.out + "': " + ec.message());
}

void write_output(const RunConfig &c, const fs::path &path, std::string_view contents)
{
    if (fs::exists(path) && !c.force)
        throw InputError("refusing to overwrite " + path.string() + " (use --force)");
    report::write_file_atomic(path, contents);
}

void echo_config(const RunConfig &c, const std::string &command)
{
    json j = to_json(c);
    j["command"] = command;
    report::write_file_atomic(fs::path(c.out) / "config.json", j.dump(2) + "\n");
}

std::string tensor_name(int id, bool blocked)
{
    return "tensor_case" + std::to_string(id) + (blocked ? "_blockage" : "") + ".bin";
}

sounder::SimConfig sim_config(const RunConfig &c, int id)
{
    sounder::SimConfig s;
    s.n_dly = c.n_dly;
    s.n_scan = c.n_scan;
    s.noise_floor_dbm = c.noise_floor_dbm;
    s.noise_sigma_db = c.noise_sigma_db;
    s.rng_seed = c.seed + static_cast<std::uint64_t>(id);
    s.pulse_spread = c.pulse_spread;
    s.case_id = id;
    return s;
}

int cmd_trace(const RunConfig &c)
{
    const auto p = prepare(c);
    ensure_out_dir(c);
    for (int id : p.cases)
    {
        std::ostringstream csv;
        const auto paths = trace_case(p, id, c.tx_power_dbm);
        raytrace::write_path_csv(csv, paths);
        write_output(c, fs::path(c.out) / ("paths_case" + std::to_string(id) + ".csv"), csv.str());
        std::cout << "case " << id << ": " << paths.size() << " paths\n";
    }
    echo_config(c, "trace");
    return 0;
}

int cmd_simulate(const RunConfig &c)
{
    const auto p = prepare(c);
    ensure_out_dir(c);
    if (c.blockage_case != 0 && !p.scene.blocker)
        throw InputError("--blockage-case given but the scene has no [blocker]");
    for (int id : p.cases)
    {
        const auto paths = trace_case(p, id, c.tx_power_dbm);
        const auto cfg = sim_config(c, id);
        auto emit = [&](const env::BlockerTrajectory *traj) {
            const auto x = sounder::synthesize_tensor(paths, p.codebook, p.codebook, cfg, traj);
            std::ostringstream bytes(std::ios::binary);
            sounder::write_tensor(bytes, x);
            write_output(c, fs::path(c.out) / tensor_name(id, traj != nullptr), bytes.str());
        };
        emit(nullptr);
        if (id == c.blockage_case)
            emit(&*p.scene.blocker);
        std::cout << "case " << id << ": simulated " << paths.size() << " paths\n";
    }
    echo_config(c, "simulate");
    return 0;
}

int cmd_analyze(const RunConfig &c)
{
    const auto p = prepare(c);
    const fs::path in = c.in.empty() ? fs::path(c.out) : fs::path(c.in);
    ensure_out_dir(c);

    analysis::AnalysisConfig acfg;
    acfg.guard_m = c.guard_m;
    acfg.peak_threshold_db = c.peak_threshold_db;
    acfg.angle_tol_deg = c.angle_tol_deg;
    acfg.delay_tol_bins = c.delay_tol_bins;
    if (c.mask_noise)
        acfg.ls.mask_below_dbm = c.noise_floor_dbm + 3.0;

    std::vector<report::CaseRecord> records;
    std::vector<analysis::BlockageSeries> blockage;
    std::vector<raytrace::RayPath> blockage_paths;
    bool failed = false;
    for (int id : p.cases)
    {
        const fs::path tensor_path = in / tensor_name(id, false);
        if (!fs::exists(tensor_path))
            throw InputError("tensor not found: " + tensor_path.string());
        const auto x = sounder::load_tensor(tensor_path);
        report::CaseRecord rec;
        rec.case_id = id;
        rec.traced = trace_case(p, id, c.tx_power_dbm);
        try
        {
            rec.analysis = analysis::analyze_case(x, rec.traced, p.codebook, p.codebook, acfg);
        }
        catch (const analysis::NoSignalError &e)
        {
            rec.error = e.what();
            failed = true;
            std::cerr << "case " << id << ": " << e.what() << "\n";
        }
        const fs::path blocked = in / tensor_name(id, true);
        if (rec.analysis && fs::exists(blocked))
        {
            const auto xb = sounder::load_tensor(blocked);
            blockage = analysis::blockage_timeseries(xb, rec.analysis->paths);
            blockage_paths = rec.traced;
        }
        records.push_back(std::move(rec));
    }

    const fs::path out = c.out;
    std::ostringstream los_csv, nlos_csv, blockage_csv;
    report::write_los_power_csv(los_csv, records);
    report::write_nlos_power_csv(nlos_csv, records);
    write_output(c, out / "los_power.csv", los_csv.str());
    write_output(c, out / "nlos_power.csv", nlos_csv.str());
    if (!blockage.empty())
    {
        report::write_blockage_csv(blockage_csv, blockage, blockage_paths);
        write_output(c, out / "blockage.csv", blockage_csv.str());
    }
    write_output(c, out / "summary.json", report::summary_json(records));
    echo_config(c, "analyze");
    return failed ? kExitAnalysis : 0;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"beamscan: directional 60 GHz channel-sounder simulation and analysis"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "JSON config; fills options absent from the command line");

    RunConfig cfg;
    std::map<CLI::App *, std::vector<std::pair<std::string, CLI::Option *>>> opts;
    auto *trace = app.add_subcommand("trace", "trace paths per case and write CSV");
    auto *simulate = app.add_subcommand("simulate", "write a PDP tensor per case");
    auto *analyze = app.add_subcommand("analyze", "analyze tensors and write reports");
    for (auto *sub : {trace, simulate, analyze})
    {
        add_options(sub, cfg, opts[sub]);
        sub->add_option("--config", config_path, "JSON config; fills options absent from the command line");
    }
    analyze->add_option("--in", cfg.in, "directory holding the tensors (default: --out)");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitInput;
    }

    try
    {
        if (!config_path.empty())
        {
            apply_config_file(config_path, cfg, opts[app.get_subcommands().front()]);
        }
        if (trace->parsed())
            return cmd_trace(cfg);
        if (simulate->parsed())
            return cmd_simulate(cfg);
        return cmd_analyze(cfg);
    }
    catch (const InputError &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    catch (const env::SceneError &e)
    {
        std::cerr << "scene error: " << e.what() << "\n";
        return kExitInput;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
}
