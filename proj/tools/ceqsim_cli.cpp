// Command-line front end: simulate, benchmark, gridsearch, report.
// All artifacts are CSV; plotting is external.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ceqsim/csv.hpp"
#include "ceqsim/harness.hpp"
#include "ceqsim/runner.hpp"
#include "ceqsim/scenario.hpp"

namespace fs = std::filesystem;
using namespace ceqsim;

namespace {

int verbosity = 1;

void say(const std::string& msg) {
    if (verbosity > 0) std::cout << msg << "\n";
}

Scenario load_scenario(const std::string& path, const std::vector<std::string>& overrides) {
    ScenarioDoc doc = parse_scenario_file(path);
    for (const auto& o : overrides) apply_override(doc, o);
    return build_scenario(doc);
}

void write_manifest(const fs::path& dir, const Scenario& sc, const std::string& controller,
                    std::uint64_t seed, const std::vector<std::string>& files) {
    std::ofstream out(dir / "manifest.txt", std::ios::binary);
    out << "artifact_version = " << kArtifactVersion << "\n";
    out << "scenario_hash = " << sc.doc.hash_hex() << "\n";
    out << "controller = " << controller << "\n";
    out << "seed = " << seed << "\n";
    out << "eval_start_s = " << fmt_full(sc.sim.eval_start_s) << "\n";
    out << "eval_end_s = " << fmt_full(sc.sim.eval_end_s) << "\n";
    out << "min_demand_share = " << fmt_full(sc.sim.min_demand_share) << "\n";
    for (const auto& f : files) out << "file = " << f << "\n";
}

std::map<std::string, std::string> read_manifest(const fs::path& dir) {
    std::ifstream in(dir / "manifest.txt");
    if (!in) throw ConfigError("no manifest.txt in " + dir.string());
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string k = line.substr(0, eq);
        std::string v = line.substr(eq + 1);
        auto trim = [](std::string& s) {
            while (!s.empty() && s.front() == ' ') s.erase(s.begin());
            while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.pop_back();
        };
        trim(k);
        trim(v);
        if (k != "file") kv[k] = v;
    }
    return kv;
}

void write_trips(const fs::path& path, const std::vector<TripRecord>& trips) {
    CsvWriter w(path.string());
    w.row({"origin", "destination", "depart_s", "arrive_s", "distance_km",
           "freeflow_time_s", "weight"});
    for (const auto& t : trips)
        w.row({t.origin, t.destination, fmt_full(t.depart_s), fmt_full(t.arrive_s),
               fmt_full(t.distance_km), fmt_full(t.freeflow_time_s), fmt_full(t.weight)});
}

std::vector<TripRecord> read_trips(const fs::path& path) {
    auto rows = read_csv(path.string());
    std::vector<TripRecord> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.size() != 7) throw ConfigError("malformed trips.csv row in " + path.string());
        TripRecord t;
        t.origin = r[0];
        t.destination = r[1];
        t.depart_s = std::stod(r[2]);
        t.arrive_s = std::stod(r[3]);
        t.distance_km = std::stod(r[4]);
        t.freeflow_time_s = std::stod(r[5]);
        t.weight = std::stod(r[6]);
        out.push_back(std::move(t));
    }
    return out;
}

void write_departures(const fs::path& path, const std::vector<DepartureTally>& deps) {
    CsvWriter w(path.string());
    w.row({"origin", "depart_s", "weight", "arrived_weight"});
    for (const auto& d : deps)
        w.row({d.origin, fmt_full(d.depart_s), fmt_full(d.weight), fmt_full(d.arrived_weight)});
}

std::vector<DepartureTally> read_departures(const fs::path& path) {
    auto rows = read_csv(path.string());
    std::vector<DepartureTally> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.size() != 4) throw ConfigError("malformed departures.csv row in " + path.string());
        out.push_back({r[0], std::stod(r[1]), std::stod(r[2]), std::stod(r[3])});
    }
    return out;
}

void write_ramp_log(const fs::path& path, const std::vector<RampLogRow>& log) {
    CsvWriter w(path.string());
    w.row({"cycle_index", "ramp_id", "occupancy", "flow_command_vph", "rate", "queue_len"});
    for (const auto& r : log)
        w.row({std::to_string(r.cycle_index), r.ramp_id, fmt_full(r.occupancy),
               fmt_full(r.flow_command_vph), fmt_full(r.rate), fmt_full(r.queue_len)});
}

void write_spacetime(const fs::path& path, const std::vector<std::vector<double>>& matrix,
                     const std::vector<double>& positions) {
    CsvWriter w(path.string());
    std::vector<std::string> header{"t_index"};
    for (double p : positions) header.push_back(fmt_full(p));
    w.row(header);
    for (std::size_t i = 0; i < matrix.size(); ++i) {
        std::vector<std::string> row{std::to_string(i)};
        for (double v : matrix[i]) row.push_back(fmt_full(v));
        w.row(row);
    }
}

void write_run_outputs(const fs::path& dir, const Scenario& sc, const std::string& controller,
                       std::uint64_t seed, const RunResult& run) {
    fs::create_directories(dir);
    write_trips(dir / "trips.csv", run.trips);
    write_departures(dir / "departures.csv", run.departures);
    write_ramp_log(dir / "ramp_log.csv", run.ramp_log);
    write_spacetime(dir / "spacetime_speed.csv", run.spacetime_speed_kmh, run.cell_positions_m);
    write_spacetime(dir / "spacetime_occupancy.csv", run.spacetime_occupancy,
                    run.cell_positions_m);
    write_manifest(dir, sc, controller, seed,
                   {"trips.csv", "departures.csv", "ramp_log.csv", "spacetime_speed.csv",
                    "spacetime_occupancy.csv"});
}

// Table layouts mirror the benchmark panels: metrics as rows, controllers as
// columns, "mean (std)" cells. Delays and efficiency rows use 1 decimal,
// gini 4 decimals.
int metric_decimals(const std::string& name) {
    return name == "gini" ? 4 : 1;
}

void write_benchmark_tables(const fs::path& out_dir,
                            const std::vector<ExperimentResult>& results) {
    const std::vector<std::string> eff_rows = {
        "departed", "arrived", "arrival_rate_pct", "total_travel_time_h",
        "total_distance_km", "total_delay_h", "avg_speed_kmh", "avg_delay_s_per_veh"};
    const std::vector<std::string> notion_rows = {"harsanyian_s", "gini", "rawlsian_max_s",
                                                  "aristotelian_s"};
    auto stat_for = [](const ExperimentResult& r, const std::string& name)
        -> const MetricStat* {
        for (const auto& [n, st] : r.aggregate)
            if (n == name) return &st;
        return nullptr;
    };
    auto cell = [&](const ExperimentResult& r, const std::string& name) -> std::string {
        const MetricStat* st = stat_for(r, name);
        if (!st) return "";
        int d = metric_decimals(name);
        return fmt_fixed(st->mean, d) + " (" + fmt_fixed(st->std_dev, d) + ")";
    };

    {
        CsvWriter w((out_dir / "efficiency.csv").string());
        std::vector<std::string> header{"metric"};
        for (const auto& r : results) header.push_back(r.controller);
        w.row(header);
        for (const auto& name : eff_rows) {
            std::vector<std::string> row{name};
            for (const auto& r : results) row.push_back(cell(r, name));
            w.row(row);
        }
    }
    {
        CsvWriter w((out_dir / "fairness.csv").string());
        std::vector<std::string> header{"ramp"};
        for (const auto& r : results) header.push_back(r.controller);
        w.row(header);
        // union of per-ramp rows across controllers, sorted
        std::set<std::string> ramp_rows;
        for (const auto& r : results)
            for (const auto& [n, st] : r.aggregate)
                if (n.rfind("ramp.", 0) == 0) ramp_rows.insert(n);
        for (const auto& name : ramp_rows) {
            std::vector<std::string> row{name.substr(5)};
            for (const auto& r : results) row.push_back(cell(r, name));
            w.row(row);
        }
        for (const auto& name : notion_rows) {
            std::vector<std::string> row{name};
            for (const auto& r : results) row.push_back(cell(r, name));
            w.row(row);
        }
    }
}

void write_per_seed(const fs::path& out_dir, const std::vector<ExperimentResult>& results) {
    CsvWriter w((out_dir / "per_seed.csv").string());
    w.row({"controller", "seed", "metric", "value"});
    for (const auto& r : results)
        for (std::size_t si = 0; si < r.per_seed.size(); ++si)
            for (const auto& [name, v] : panel_from_reports(r.per_seed[si]))
                w.row({r.controller, std::to_string(r.seeds[si]), name, fmt_full(v)});
}

int cmd_simulate(const std::string& scenario_path, std::uint64_t seed,
                 const std::string& out_dir, const std::vector<std::string>& overrides) {
    fs::path dir(out_dir);
    try {
        Scenario sc = load_scenario(scenario_path, overrides);
        std::string name = sc.default_controller;
        if (name.empty()) {
            if (sc.controllers.empty())
                throw ConfigError("scenario declares no controllers");
            name = sc.controllers.begin()->first;
        }
        const ControllerSpec& spec = sc.controllers.at(name);
        RunResult run = run_simulation(sc, spec, seed);
        write_run_outputs(dir, sc, name, seed, run);
        say("wrote " + dir.string());
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "simulate: " << e.what() << "\n";
        // remove partial outputs
        for (const char* f : {"trips.csv", "departures.csv", "ramp_log.csv",
                              "spacetime_speed.csv", "spacetime_occupancy.csv",
                              "manifest.txt"}) {
            std::error_code ec;
            fs::remove(dir / f, ec);
        }
        return 1;
    }
}

int cmd_benchmark(const std::string& scenario_path, std::vector<std::string> controllers,
                  const std::string& out_dir, const std::vector<std::string>& overrides) {
    try {
        Scenario sc = load_scenario(scenario_path, overrides);
        {
            // accept space- or comma-delimited lists inside a single argument
            std::vector<std::string> flat;
            for (const auto& item : controllers) {
                std::string token;
                for (char c : item + " ") {
                    if (c == ' ' || c == ',') {
                        if (!token.empty()) flat.push_back(token);
                        token.clear();
                    } else {
                        token += c;
                    }
                }
            }
            controllers = std::move(flat);
        }
        if (controllers.empty()) controllers = sc.benchmark_controllers;
        if (controllers.empty())
            throw ConfigError("no controllers: pass --controllers or set [experiment] controllers");
        for (const auto& name : controllers) {
            if (!sc.controllers.count(name)) {
                std::string valid;
                for (const auto& [n, s] : sc.controllers) valid += " " + n;
                throw ConfigError("unknown controller '" + name + "'; valid:" + valid);
            }
        }
        fs::path dir(out_dir);
        fs::create_directories(dir);
        std::vector<ExperimentResult> results;
        for (const auto& name : controllers) {
            say("running controller " + name + " over " + std::to_string(sc.seeds.size()) +
                " seeds");
            const ControllerSpec& spec = sc.controllers.at(name);
            ExperimentResult res;
            res.controller = name;
            res.seeds = sc.seeds;
            std::vector<MetricPanel> panels;
            for (std::uint64_t s : sc.seeds) {
                RunResult run = run_simulation(sc, spec, s);
                // persist raw runs so `report` can recompute without re-simulating
                write_run_outputs(dir / name / ("seed_" + std::to_string(s)), sc, name, s, run);
                RunReports reports = compute_reports(sc, run);
                panels.push_back(panel_from_reports(reports));
                res.per_seed.push_back(std::move(reports));
            }
            res.aggregate = aggregate_panels(panels);
            results.push_back(std::move(res));
        }
        write_benchmark_tables(dir, results);
        write_per_seed(dir, results);
        say("wrote " + (dir / "efficiency.csv").string() + " and fairness.csv");
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "benchmark: " << e.what() << "\n";
        return 1;
    }
}

int cmd_gridsearch(const std::string& scenario_path, const std::string& out_dir,
                   const std::vector<std::string>& overrides) {
    try {
        Scenario sc = load_scenario(scenario_path, overrides);
        GridSearchResult res = grid_search(sc, sc.grid);
        fs::path dir(out_dir);
        fs::create_directories(dir);
        CsvWriter w((dir / "gridsearch.csv").string());
        std::vector<std::string> param_names;
        for (const auto& [n, v] : res.ranked.front().params) param_names.push_back(n);
        std::vector<std::string> header{"rank"};
        for (const auto& n : param_names) header.push_back(n);
        header.insert(header.end(), {"seed", "arrived", "total_delay_h"});
        w.row(header);
        for (std::size_t rank = 0; rank < res.ranked.size(); ++rank) {
            const GridPoint& p = res.ranked[rank];
            for (const auto& [seed, rep] : p.seed_reports) {
                std::vector<std::string> row{std::to_string(rank)};
                for (const auto& [n, v] : p.params) row.push_back(v);
                row.push_back(std::to_string(seed));
                row.push_back(fmt_full(rep.efficiency.arrived));
                row.push_back(fmt_full(rep.efficiency.total_delay_h));
                w.row(row);
            }
        }
        // aggregate block
        w.row({"#aggregate"});
        std::vector<std::string> agg_header{"rank"};
        for (const auto& n : param_names) agg_header.push_back(n);
        agg_header.insert(agg_header.end(), {"objective", "mean_arrived", "mean_total_delay_h"});
        w.row(agg_header);
        for (std::size_t rank = 0; rank < res.ranked.size(); ++rank) {
            const GridPoint& p = res.ranked[rank];
            std::vector<std::string> row{std::to_string(rank)};
            for (const auto& [n, v] : p.params) row.push_back(v);
            row.push_back(fmt_full(p.objective));
            row.push_back(fmt_full(p.mean_arrived));
            row.push_back(fmt_full(p.mean_total_delay_h));
            w.row(row);
        }
        std::string best;
        for (const auto& [n, v] : res.ranked.front().params) best += " " + n + "=" + v;
        say("best point:" + best);
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "gridsearch: " << e.what() << "\n";
        return 1;
    }
}

int cmd_report(const std::vector<std::string>& run_dirs, const std::string& out_dir) {
    try {
        if (run_dirs.empty()) throw ConfigError("report: no run directories given");
        struct Entry {
            std::string controller;
            std::uint64_t seed;
            RunReports reports;
        };
        std::vector<Entry> entries;
        for (const auto& d : run_dirs) {
            fs::path dir(d);
            auto kv = read_manifest(dir);
            if (kv["artifact_version"] != kArtifactVersion)
                std::cerr << "warning: " << d << " written by version "
                          << kv["artifact_version"] << ", recomputing anyway\n";
            double t0 = std::stod(kv.at("eval_start_s"));
            double t1 = std::stod(kv.at("eval_end_s"));
            double share = std::stod(kv.at("min_demand_share"));
            auto trips = read_trips(dir / "trips.csv");
            auto deps = read_departures(dir / "departures.csv");
            // recompute the panel exactly as compute_reports does
            Scenario tmp;
            tmp.sim.eval_start_s = t0;
            tmp.sim.eval_end_s = t1;
            tmp.sim.min_demand_share = share;
            RunResult run;
            run.trips = trips;
            run.departures = deps;
            Entry e;
            e.controller = kv.at("controller");
            e.seed = std::stoull(kv.at("seed"));
            e.reports = compute_reports(tmp, run);
            entries.push_back(std::move(e));
        }
        // group by controller, preserving first-seen order
        std::vector<ExperimentResult> results;
        for (const auto& e : entries) {
            ExperimentResult* r = nullptr;
            for (auto& x : results)
                if (x.controller == e.controller) r = &x;
            if (!r) {
                results.push_back({});
                r = &results.back();
                r->controller = e.controller;
            }
            r->seeds.push_back(e.seed);
            r->per_seed.push_back(e.reports);
        }
        for (auto& r : results) {
            std::vector<MetricPanel> panels;
            for (const auto& rep : r.per_seed) panels.push_back(panel_from_reports(rep));
            r.aggregate = aggregate_panels(panels);
        }
        fs::path dir(out_dir);
        fs::create_directories(dir);
        write_benchmark_tables(dir, results);
        write_per_seed(dir, results);
        say("wrote " + (dir / "efficiency.csv").string() + " and fairness.csv");
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "report: " << e.what() << "\n";
        return 1;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"macroscopic ramp-metering simulator and benchmark harness"};
    app.require_subcommand(1);

    std::string scenario_path, out_dir = "out";
    std::uint64_t seed = 1;
    std::string seeds_range;
    std::vector<std::string> overrides, controllers, run_dirs;
    bool quiet = false, verbose = false;

    app.add_flag("--quiet", quiet, "suppress progress output");
    app.add_flag("--verbose", verbose, "extra progress output");

    auto add_common = [&](CLI::App* cmd, bool needs_scenario) {
        if (needs_scenario)
            cmd->add_option("--scenario", scenario_path, "scenario document path")->required();
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("--set", overrides, "override: section.key=value (repeatable)");
    };

    auto* sim = app.add_subcommand("simulate", "run one seed, write per-run CSVs");
    add_common(sim, true);
    sim->add_option("--seed", seed, "random seed");

    auto* bench = app.add_subcommand("benchmark", "multi-seed benchmark across controllers");
    add_common(bench, true);
    bench->add_option("--controllers", controllers, "controller names (default: scenario list)");
    bench->add_option("--seeds", seeds_range, "seed list override, e.g. 1..10");

    auto* grid = app.add_subcommand("gridsearch", "exhaustive parameter grid search");
    add_common(grid, true);
    grid->add_option("--seeds", seeds_range, "seed list override");

    auto* rep = app.add_subcommand("report", "recompute tables from persisted runs");
    rep->add_option("dirs", run_dirs, "run directories (simulate outputs)");
    rep->add_option("--out", out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);
    if (quiet) verbosity = 0;
    if (verbose) verbosity = 2;
    if (!seeds_range.empty()) overrides.push_back("experiment.seeds=" + seeds_range);

    if (sim->parsed()) return cmd_simulate(scenario_path, seed, out_dir, overrides);
    if (bench->parsed()) return cmd_benchmark(scenario_path, controllers, out_dir, overrides);
    if (grid->parsed()) return cmd_gridsearch(scenario_path, out_dir, overrides);
    if (rep->parsed()) return cmd_report(run_dirs, out_dir);
    return 1;
}
