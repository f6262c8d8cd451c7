#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <future>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "ceqsim/common.hpp"
#include "ceqsim/runner.hpp"
#include "ceqsim/scenario.hpp"

namespace ceqsim {

struct MetricStat {
    double mean = 0;
    double std_dev = 0; // sample std, zero for a single seed
};

// Ordered metric panel: efficiency rows, fairness notion rows, then
// per-ramp delay rows ("ramp.<id>").
using MetricPanel = std::vector<std::pair<std::string, double>>;

inline MetricPanel panel_from_reports(const RunReports& r) {
    MetricPanel p;
    const EfficiencyReport& e = r.efficiency;
    p.emplace_back("departed", e.departed);
    p.emplace_back("arrived", e.arrived);
    p.emplace_back("arrival_rate_pct", e.arrival_rate_pct);
    p.emplace_back("total_travel_time_h", e.total_travel_time_h);
    p.emplace_back("total_distance_km", e.total_distance_km);
    p.emplace_back("total_delay_h", e.total_delay_h);
    p.emplace_back("avg_speed_kmh", e.avg_speed_kmh);
    p.emplace_back("avg_delay_s_per_veh", e.avg_delay_s_per_veh);
    if (r.fairness_defined) {
        p.emplace_back("harsanyian_s", r.fairness.harsanyian_s);
        p.emplace_back("gini", r.fairness.gini);
        p.emplace_back("rawlsian_max_s", r.fairness.rawlsian_max_s);
        p.emplace_back("aristotelian_s", r.fairness.aristotelian_s);
        for (const auto& [ramp, delay] : r.fairness.per_ramp_avg_delay_s)
            p.emplace_back("ramp." + ramp, delay);
    }
    return p;
}

struct ExperimentResult {
    std::string controller;
    std::vector<std::uint64_t> seeds;
    std::vector<RunReports> per_seed; // retained for recomputation
    std::vector<std::pair<std::string, MetricStat>> aggregate;
};

// Element-wise mean and sample standard deviation across seed panels.
// Metrics absent in some seeds (e.g. a ramp dropping below the demand
// threshold) are aggregated over the seeds where they are present.
inline std::vector<std::pair<std::string, MetricStat>> aggregate_panels(
    const std::vector<MetricPanel>& panels) {
    std::vector<std::string> order;
    std::map<std::string, std::vector<double>> values;
    for (const auto& panel : panels) {
        for (const auto& [name, v] : panel) {
            if (!values.count(name)) order.push_back(name);
            values[name].push_back(v);
        }
    }
    std::vector<std::pair<std::string, MetricStat>> out;
    for (const auto& name : order) {
        const auto& vs = values[name];
        MetricStat st;
        for (double v : vs) st.mean += v;
        st.mean /= vs.size();
        if (vs.size() > 1) {
            double acc = 0;
            for (double v : vs) acc += (v - st.mean) * (v - st.mean);
            st.std_dev = std::sqrt(acc / (vs.size() - 1));
        }
        out.emplace_back(name, st);
    }
    return out;
}

// Worker-parallelism degree: CEQSIM_WORKERS, default = available cores.
inline unsigned worker_count() {
    if (const char* env = std::getenv("CEQSIM_WORKERS")) {
        int n = std::atoi(env);
        if (n >= 1) return static_cast<unsigned>(n);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

// Runs every seed independently (in parallel batches) and aggregates
// element-wise; results are stored by seed index, so the aggregate is
// independent of execution order.
inline ExperimentResult run_experiment(const Scenario& sc, const ControllerSpec& spec) {
    ExperimentResult res;
    res.controller = spec.name;
    res.seeds = sc.seeds;
    res.per_seed.resize(sc.seeds.size());
    const unsigned workers = worker_count();
    for (std::size_t start = 0; start < sc.seeds.size(); start += workers) {
        std::size_t end = std::min(sc.seeds.size(), start + workers);
        std::vector<std::future<RunReports>> futs;
        for (std::size_t i = start; i < end; ++i)
            futs.push_back(std::async(std::launch::async, [&, i]() {
                RunResult run = run_simulation(sc, spec, sc.seeds[i]);
                return compute_reports(sc, run);
            }));
        for (std::size_t i = start; i < end; ++i) {
            try {
                res.per_seed[i] = futs[i - start].get();
            } catch (const std::exception& e) {
                throw ContractError("seed " + std::to_string(sc.seeds[i]) +
                                    " failed: " + e.what());
            }
        }
    }
    std::vector<MetricPanel> panels;
    for (const auto& r : res.per_seed) panels.push_back(panel_from_reports(r));
    res.aggregate = aggregate_panels(panels);
    return res;
}

struct GridPoint {
    std::vector<std::pair<std::string, std::string>> params; // sorted by name
    double objective = 0;
    double mean_total_delay_h = 0;
    double mean_arrived = 0;
    std::vector<std::pair<std::uint64_t, RunReports>> seed_reports;
};

struct GridSearchResult {
    std::vector<GridPoint> ranked; // best first
    ControllerSpec best;
    Objective objective;
};

inline ControllerSpec apply_grid_point(ControllerSpec spec,
                                       const std::vector<std::pair<std::string, std::string>>& params) {
    for (const auto& [name, value] : params) {
        if (name == "K") spec.cfg.K = std::stod(value);
        else if (name == "o_hat") spec.cfg.o_hat = std::stod(value);
        else if (name == "K_c") spec.cfg.K_c = std::stod(value);
        else if (name == "m") spec.cfg.m = std::stoi(value);
        else if (name == "norm_mode") {
            if (value == "global") spec.cfg.norm_mode = NormMode::Global;
            else if (value == "local") spec.cfg.norm_mode = NormMode::Local;
            else throw ConfigError("grid: norm_mode must be global or local");
        } else if (name == "k1") spec.metaline.k1 = std::stod(value);
        else if (name == "k2") spec.metaline.k2 = std::stod(value);
        else throw ConfigError("grid: unknown parameter " + name);
    }
    spec.metaline.base = spec.cfg;
    return spec;
}

// Exhaustive Cartesian evaluation. Ranking: objective first, ties broken by
// lower mean total delay, then lexicographic parameter order.
inline GridSearchResult grid_search(const Scenario& sc, const GridSpec& grid) {
    if (grid.values.empty()) throw ConfigError("grid: no parameters to search");
    for (const auto& [name, vals] : grid.values)
        if (vals.empty()) throw ConfigError("grid: empty value list for " + name);
    if (grid.seeds_per_point < 1) throw ConfigError("grid: seeds per point must be >= 1");

    std::string base_name = grid.base_controller.empty() ? sc.default_controller
                                                         : grid.base_controller;
    auto it = sc.controllers.find(base_name);
    if (it == sc.controllers.end())
        throw ConfigError("grid: no [controller." + base_name + "] section");
    const ControllerSpec& base = it->second;

    std::vector<std::uint64_t> seeds(sc.seeds.begin(),
                                     sc.seeds.begin() +
                                         std::min<std::size_t>(sc.seeds.size(),
                                                               grid.seeds_per_point));
    if (static_cast<int>(seeds.size()) < grid.seeds_per_point)
        throw ConfigError("grid: scenario seed list shorter than grid_seeds");

    // cartesian product, parameters in sorted-name order
    std::vector<std::pair<std::string, std::vector<std::string>>> axes(
        grid.values.begin(), grid.values.end());
    std::size_t n_points = 1;
    for (const auto& [name, vals] : axes) n_points *= vals.size();
    if (n_points * seeds.size() > static_cast<std::size_t>(grid.budget))
        throw ConfigError("grid: " + std::to_string(n_points * seeds.size()) +
                          " runs exceed budget " + std::to_string(grid.budget));

    GridSearchResult res;
    res.objective = grid.objective;
    std::vector<std::size_t> idx(axes.size(), 0);
    for (std::size_t p = 0; p < n_points; ++p) {
        GridPoint point;
        for (std::size_t a = 0; a < axes.size(); ++a)
            point.params.emplace_back(axes[a].first, axes[a].second[idx[a]]);
        ControllerSpec spec = apply_grid_point(base, point.params);
        Scenario point_sc = sc;
        point_sc.seeds = seeds;
        ExperimentResult exp = run_experiment(point_sc, spec);
        double delay = 0, arrived = 0;
        for (std::size_t si = 0; si < exp.per_seed.size(); ++si) {
            point.seed_reports.emplace_back(seeds[si], exp.per_seed[si]);
            delay += exp.per_seed[si].efficiency.total_delay_h;
            arrived += exp.per_seed[si].efficiency.arrived;
        }
        point.mean_total_delay_h = delay / exp.per_seed.size();
        point.mean_arrived = arrived / exp.per_seed.size();
        point.objective = (grid.objective == Objective::MaxThroughput)
                              ? point.mean_arrived
                              : point.mean_total_delay_h;
        res.ranked.push_back(std::move(point));
        // advance mixed-radix counter (last axis fastest)
        for (std::size_t a = axes.size(); a-- > 0;) {
            if (++idx[a] < axes[a].second.size()) break;
            idx[a] = 0;
        }
    }

    const bool maximize = grid.objective == Objective::MaxThroughput;
    std::stable_sort(res.ranked.begin(), res.ranked.end(),
                     [&](const GridPoint& a, const GridPoint& b) {
                         if (a.objective != b.objective)
                             return maximize ? a.objective > b.objective
                                             : a.objective < b.objective;
                         if (a.mean_total_delay_h != b.mean_total_delay_h)
                             return a.mean_total_delay_h < b.mean_total_delay_h;
                         return a.params < b.params;
                     });
    res.best = apply_grid_point(base, res.ranked.front().params);
    return res;
}

} // namespace ceqsim
