#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ceqsim/common.hpp"
#include "ceqsim/control.hpp"
#include "ceqsim/dynamics.hpp"
#include "ceqsim/metrics.hpp"
#include "ceqsim/scenario.hpp"

namespace ceqsim {

struct RampLogRow {
    int cycle_index;
    std::string ramp_id;
    double occupancy;
    double flow_command_vph;
    double rate;
    double queue_len;
};

struct RunResult {
    std::vector<TripRecord> trips;
    std::vector<DepartureTally> departures;
    std::vector<RampLogRow> ramp_log;
    std::vector<std::vector<double>> spacetime_speed_kmh; // rows = steps
    std::vector<std::vector<double>> spacetime_occupancy;
    std::vector<double> cell_positions_m;
    double conservation_residual = 0;
};

// Executes warmup plus measurement horizon: at every control-cycle boundary
// the controller receives the cycle-averaged MeasurementFrame and its
// returned rates are applied for the next cycle. The first cycle runs fully
// permissive (rate = r_max cold start).
inline RunResult run_simulation(const Scenario& sc, const ControllerSpec& spec,
                                std::uint64_t seed) {
    FreewayNetwork net = sc.build_network();
    CtmPlant plant(net, sc.cell, sc.demand, sc.sim.dt_s, sc.discharge_headway_s,
                   sc.sim.cohort_bin_s, sc.sim.max_queue_veh);
    std::mt19937_64 rng(seed);
    plant.seed_demand_noise(rng, sc.noise_frac);
    std::unique_ptr<Controller> controller = make_controller(net, spec);

    SimState state = plant.make_state();
    const int steps_per_cycle = static_cast<int>(std::round(sc.sim.cycle_s / sc.sim.dt_s));
    const int total_steps = static_cast<int>(std::round(sc.sim.horizon_s / sc.sim.dt_s));
    const std::size_t n_ramps = net.on_ramps().size();
    const int n_cells = net.num_cells();

    std::vector<double> rates(n_ramps, spec.cfg.r_max);
    std::vector<double> occ_acc(n_ramps, 0.0);
    std::vector<double> queue_acc(n_ramps, 0.0);
    std::vector<double> cell_occ_acc(n_cells, 0.0);
    std::vector<int> detector(n_ramps);
    std::vector<int> ramp_queue_slot(n_ramps);
    for (std::size_t i = 0; i < n_ramps; ++i) {
        detector[i] = net.ramp(net.on_ramps()[i]).detector_cell;
        ramp_queue_slot[i] = static_cast<int>(i); // plant origin order starts with on-ramps
    }

    RunResult out;
    for (int i = 0; i < n_cells; ++i)
        out.cell_positions_m.push_back(i * sc.cell.length_m);

    int cycle_index = 0;
    for (int step = 0; step < total_steps; ++step) {
        // record beginning-of-step state
        std::vector<double> occ_row(n_cells), spd_row(n_cells);
        for (int c = 0; c < n_cells; ++c) {
            occ_row[c] = plant.occupancy(state, c);
            spd_row[c] = plant.speed_kmh(state, c);
            cell_occ_acc[c] += occ_row[c];
        }
        out.spacetime_occupancy.push_back(std::move(occ_row));
        out.spacetime_speed_kmh.push_back(std::move(spd_row));
        for (std::size_t i = 0; i < n_ramps; ++i) {
            occ_acc[i] += plant.occupancy(state, detector[i]);
            queue_acc[i] += state.queue_veh[ramp_queue_slot[i]];
        }

        plant.step(state, rates);

        if ((step + 1) % steps_per_cycle == 0) {
            MeasurementFrame frame;
            frame.cycle_index = cycle_index;
            for (std::size_t i = 0; i < n_ramps; ++i) {
                frame.on_ramp_occupancy.push_back(occ_acc[i] / steps_per_cycle);
                frame.on_ramp_queue_veh.push_back(queue_acc[i] / steps_per_cycle);
            }
            for (int c = 0; c < n_cells; ++c)
                frame.cell_occupancy.push_back(cell_occ_acc[c] / steps_per_cycle);
            std::vector<RampDecision> decisions = controller->cycle(frame);
            if (decisions.size() != n_ramps)
                throw ContractError("controller returned wrong number of rates");
            for (std::size_t i = 0; i < n_ramps; ++i) {
                if (!(decisions[i].rate >= 0.0 && decisions[i].rate <= 1.0))
                    throw ContractError("controller emitted rate outside [0,1] for ramp " +
                                        net.on_ramps()[i]);
                rates[i] = decisions[i].rate;
                out.ramp_log.push_back({cycle_index, net.on_ramps()[i],
                                        decisions[i].occupancy,
                                        decisions[i].flow_command_vph, decisions[i].rate,
                                        state.queue_veh[ramp_queue_slot[i]]});
            }
            std::fill(occ_acc.begin(), occ_acc.end(), 0.0);
            std::fill(queue_acc.begin(), queue_acc.end(), 0.0);
            std::fill(cell_occ_acc.begin(), cell_occ_acc.end(), 0.0);
            ++cycle_index;
        }
    }

    out.trips = plant.trip_records(state);
    for (const auto& d : plant.cohort_departures(state))
        out.departures.push_back({d.origin, d.depart_s, d.weight, d.arrived_weight});
    out.conservation_residual = plant.conservation_residual(state);
    return out;
}

// Metric panel of one run over the scenario's evaluation window.
struct RunReports {
    EfficiencyReport efficiency;
    FairnessReport fairness;
    bool fairness_defined = true;
};

inline RunReports compute_reports(const Scenario& sc, const RunResult& run) {
    RunReports r;
    const double t0 = sc.sim.eval_start_s, t1 = sc.sim.eval_end_s;
    r.efficiency = efficiency(run.trips, run.departures, t0, t1);

    // demand per origin ramp inside the window, for threshold + weighting
    std::map<std::string, double> demand_w;
    double total = 0;
    for (const auto& d : run.departures) {
        if (d.depart_s < t0 || d.depart_s >= t1) continue;
        if (d.origin == "mainline") continue;
        demand_w[d.origin] += d.weight;
        total += d.weight;
    }
    double threshold = sc.sim.min_demand_share * total;
    std::map<std::string, double> per_ramp;
    {
        // restrict to on-ramp origins
        std::vector<TripRecord> ramp_trips;
        for (const auto& t : run.trips)
            if (t.origin != "mainline") ramp_trips.push_back(t);
        per_ramp = per_ramp_avg_delay(ramp_trips, t0, t1, threshold);
    }
    if (per_ramp.empty()) {
        r.fairness_defined = false;
        return r;
    }
    r.fairness = fairness(per_ramp, demand_w);
    return r;
}

} // namespace ceqsim
