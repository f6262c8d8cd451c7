#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ceqsim/common.hpp"
#include "ceqsim/network.hpp"

namespace ceqsim {

// Triangular fundamental diagram parameters, identical for every cell in a
// scenario. All per-lane except where noted.
struct Cell {
    double length_m = 500.0;
    int lanes = 3;
    double free_speed_kmh = 100.0;
    double jam_density_vpkpl = 120.0;   // veh/km/lane
    double capacity_vphpl = 2000.0;     // veh/h/lane
    double backward_wave_kmh = 20.0;

    double critical_density_vpkpl() const { return capacity_vphpl / free_speed_kmh; }

    void validate() const {
        if (length_m <= 0 || lanes <= 0) throw ConfigError("cell: bad geometry");
        if (free_speed_kmh <= 0 || backward_wave_kmh <= 0)
            throw ConfigError("cell: speeds must be positive");
        if (critical_density_vpkpl() >= jam_density_vpkpl)
            throw ConfigError("cell: critical density must be below jam density");
    }
};

// Piecewise-constant inflow profiles per origin plus off-ramp split fractions.
struct DemandProfile {
    struct Piece {
        double start_s;
        double flow_vph;
    };
    // Origin key: on-ramp id, or "mainline" for the line-topology entry.
    std::map<std::string, std::vector<Piece>> inflow;
    std::map<std::string, double> off_split; // off-ramp id -> fraction of passing flow

    void validate() const {
        for (const auto& [origin, pieces] : inflow) {
            if (pieces.empty())
                throw ConfigError("demand: empty profile for " + origin);
            for (std::size_t i = 0; i < pieces.size(); ++i) {
                if (pieces[i].flow_vph < 0)
                    throw ConfigError("demand: negative inflow for " + origin);
                if (i > 0 && pieces[i].start_s <= pieces[i - 1].start_s)
                    throw ConfigError("demand: piece boundaries not sorted for " + origin);
            }
        }
        for (const auto& [id, beta] : off_split)
            if (beta < 0.0 || beta > 1.0)
                throw ConfigError("demand: split fraction out of [0,1] for " + id);
    }

    // Index of the active piece at time t (pieces before the first start
    // contribute zero flow).
    static int piece_at(const std::vector<Piece>& pieces, double t) {
        int idx = -1;
        for (std::size_t i = 0; i < pieces.size(); ++i)
            if (pieces[i].start_s <= t) idx = static_cast<int>(i);
        return idx;
    }
};

// A cohort is all flow entering at one origin during one departure bin.
// On a ring, flow that passes every off-ramp returns to its entry cell and
// keeps circulating; the lap counter keeps that extra distance attributable
// so travel-time baselines stay honest.
struct CohortKey {
    int origin;   // index into origin list
    int bin;      // departure-time bin
    int lap = 0;  // completed loops past the entry cell (ring only)
    bool operator<(const CohortKey& o) const {
        if (origin != o.origin) return origin < o.origin;
        if (bin != o.bin) return bin < o.bin;
        return lap < o.lap;
    }
    bool operator==(const CohortKey& o) const {
        return origin == o.origin && bin == o.bin && lap == o.lap;
    }
};

// Cohort -> vehicles, stored as a sorted flat vector: compositions are
// iterated and merged every step, where contiguous storage beats a tree.
class Composition {
public:
    using value_type = std::pair<CohortKey, double>;
    using iterator = std::vector<value_type>::iterator;
    using const_iterator = std::vector<value_type>::const_iterator;

    iterator begin() { return items_.begin(); }
    iterator end() { return items_.end(); }
    const_iterator begin() const { return items_.begin(); }
    const_iterator end() const { return items_.end(); }
    bool empty() const { return items_.empty(); }
    std::size_t size() const { return items_.size(); }
    iterator erase(iterator it) { return items_.erase(it); }

    double& operator[](const CohortKey& k) {
        auto it = std::lower_bound(items_.begin(), items_.end(), k,
                                   [](const value_type& a, const CohortKey& b) {
                                       return a.first < b;
                                   });
        if (it == items_.end() || !(it->first == k)) it = items_.insert(it, {k, 0.0});
        return it->second;
    }

    // Linear merge of a key-sorted addend list into this composition.
    void merge_add(const std::vector<value_type>& addend) {
        std::vector<value_type> merged;
        merged.reserve(items_.size() + addend.size());
        auto a = items_.begin();
        auto b = addend.begin();
        while (a != items_.end() && b != addend.end()) {
            if (a->first < b->first) merged.push_back(*a++);
            else if (b->first < a->first) merged.push_back(*b++);
            else {
                merged.emplace_back(a->first, a->second + b->second);
                ++a;
                ++b;
            }
        }
        merged.insert(merged.end(), a, items_.end());
        merged.insert(merged.end(), b, addend.end());
        items_ = std::move(merged);
    }

private:
    std::vector<value_type> items_;
};

// Occupancy and queue measurements averaged over one control cycle.
struct MeasurementFrame {
    int cycle_index = 0;
    std::vector<double> on_ramp_occupancy; // per on-ramp, detector cell, [0,1]
    std::vector<double> on_ramp_queue_veh; // per on-ramp
    std::vector<double> cell_occupancy;    // per cell, cycle-averaged density/jam
};

struct TripRecord {
    std::string origin;
    std::string destination;
    double depart_s = 0;
    double arrive_s = 0;
    double distance_km = 0;
    double freeflow_time_s = 0;
    double weight = 0;

    double delay_s() const {
        return std::max(0.0, (arrive_s - depart_s) - freeflow_time_s);
    }
};

// Neumaier-compensated accumulator for the conservation counters.
class KahanSum {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0, comp_ = 0.0;
};

// Per-cohort departure/arrival bookkeeping that TripRecords are cut from.
struct CohortLedger {
    struct Departure {
        KahanSum weight;         // vehicles entered
        KahanSum weighted_time;  // sum of w * entry time
    };
    struct Arrival {
        double weight = 0;
        double weighted_time = 0;
    };
    std::map<CohortKey, Departure> departed;
    std::map<std::pair<CohortKey, int>, Arrival> arrived; // by exit index
};

// Mutable state of one simulation run.
struct SimState {
    std::vector<double> cell_veh;          // total vehicles per cell
    std::vector<Composition> cell_mix;     // cohort composition per cell
    std::vector<double> queue_veh;         // per origin (on-ramps + mainline)
    std::vector<Composition> queue_mix;
    double clock_s = 0;
    KahanSum entered;
    KahanSum exited;
    CohortLedger ledger;
};

// CTM plant: send/receive flows, ramp queues with merge logic, off-ramp
// splits, detector occupancy, and cohort advection for trip accounting.
class CtmPlant {
public:
    CtmPlant(const FreewayNetwork& net, Cell cell, DemandProfile demand,
             double dt_s, double discharge_headway_s, double cohort_bin_s,
             double max_queue_veh = 0.0 /* 0 = unlimited */)
        : net_(net), cell_(cell), demand_(std::move(demand)), dt_s_(dt_s),
          discharge_headway_s_(discharge_headway_s), cohort_bin_s_(cohort_bin_s),
          max_queue_veh_(max_queue_veh) {
        cell_.validate();
        demand_.validate();
        if (dt_s_ <= 0) throw ConfigError("dt must be positive");
        if (discharge_headway_s_ <= 0) throw ConfigError("discharge headway must be positive");
        if (cohort_bin_s_ <= 0) throw ConfigError("cohort bin must be positive");
        // CFL is a construction-time check.
        if (dt_s_ > cell_.length_m / (cell_.free_speed_kmh / 3.6) + 1e-12)
            throw ConfigError("dt violates CFL condition: dt <= cell length / free speed");
        build_origins();
        build_boundaries();
    }

    SimState make_state() const {
        SimState s;
        s.cell_veh.assign(net_.num_cells(), 0.0);
        s.cell_mix.assign(net_.num_cells(), {});
        s.queue_veh.assign(origins_.size(), 0.0);
        s.queue_mix.assign(origins_.size(), {});
        return s;
    }

    const std::vector<std::string>& origins() const { return origins_; }
    double dt_s() const { return dt_s_; }
    double jam_veh_per_cell() const {
        return cell_.jam_density_vpkpl * cell_.lanes * cell_.length_m / 1000.0;
    }
    const Cell& cell() const { return cell_; }
    const FreewayNetwork& network() const { return net_; }

    // Per-origin demand noise factors, one per (origin, piece), drawn from a
    // seeded generator in deterministic (sorted-origin, piece) order.
    template <typename Rng>
    void seed_demand_noise(Rng& rng, double noise_frac) {
        noise_.clear();
        for (const auto& origin : origins_) {
            auto it = demand_.inflow.find(origin);
            if (it == demand_.inflow.end()) continue;
            std::vector<double>& f = noise_[origin];
            for (std::size_t i = 0; i < it->second.size(); ++i)
                f.push_back(1.0 + noise_frac * (2.0 * uniform01(rng) - 1.0));
        }
    }

    // Advance one CTM step. `rates` maps on-ramp index (order of
    // net.on_ramps()) to metering rate in [0,1].
    void step(SimState& s, const std::vector<double>& rates) const {
        const int C = net_.num_cells();
        const double jam = jam_veh_per_cell();
        const double vf = cell_.free_speed_kmh / 3.6;      // m/s
        const double wv = cell_.backward_wave_kmh / 3.6;   // m/s
        const double cap_vps = cell_.capacity_vphpl * cell_.lanes / 3600.0;
        const int bin = static_cast<int>(std::floor(s.clock_s / cohort_bin_s_));
        const bool ring = net_.topology() == Topology::Ring;

        // 1) demand into origin queues
        for (std::size_t oi = 0; oi < origins_.size(); ++oi) {
            auto it = demand_.inflow.find(origins_[oi]);
            if (it == demand_.inflow.end()) continue;
            int p = DemandProfile::piece_at(it->second, s.clock_s);
            if (p < 0) continue;
            double flow = it->second[p].flow_vph;
            auto nf = noise_.find(origins_[oi]);
            if (nf != noise_.end()) flow *= nf->second[p];
            double veh = flow * dt_s_ / 3600.0;
            if (veh <= 0) continue;
            if (max_queue_veh_ > 0.0) {
                // optional spillback switch: excess demand is lost
                double room = std::max(0.0, max_queue_veh_ - s.queue_veh[oi]);
                veh = std::min(veh, room);
                if (veh <= 0) continue;
            }
            CohortKey key{static_cast<int>(oi), bin};
            s.queue_veh[oi] += veh;
            s.queue_mix[oi][key] += veh;
            s.entered.add(veh);
            auto& dep = s.ledger.departed[key];
            dep.weight.add(veh);
            dep.weighted_time.add(veh * s.clock_s);
        }

        // 2) send/receive from beginning-of-step densities
        std::vector<double> send(C), recv(C);
        for (int i = 0; i < C; ++i) {
            send[i] = std::min(vf * s.cell_veh[i] / cell_.length_m, cap_vps);
            recv[i] = std::min(cap_vps, wv * (jam - s.cell_veh[i]) / cell_.length_m);
            recv[i] = std::max(0.0, recv[i]);
        }

        // 3) boundary flows (veh this step)
        std::vector<double> adv(C, 0.0);   // cell i -> next cell
        std::vector<double> exi(C, 0.0);   // cell i -> off-ramp
        std::vector<double> ramp_in(origins_.size(), 0.0); // queue -> cell
        // line topology: the origin feeding cell 0 has no upstream boundary
        if (net_.topology() == Topology::Line && origin_into_cell_[0] >= 0) {
            int oi = origin_into_cell_[0];
            double d_ramp = origin_discharge_demand(s, oi, rates);
            ramp_in[oi] = std::min(d_ramp, recv[0]) * dt_s_;
        }
        for (int i = 0; i < C; ++i) {
            const Boundary& b = boundary_[i];
            if (b.next < 0) { // open line end: everything sends out
                adv[i] = 0.0;
                exi[i] = send[i] * dt_s_;
                continue;
            }
            double beta = b.split;
            // mainline demand toward next cell and its off-ramp exit
            double d_main = (1.0 - beta) * send[i];
            double d_exit = beta * send[i];
            // ramp demand into next cell
            double d_ramp = 0.0;
            int oi = origin_into_cell_[b.next];
            if (oi >= 0) d_ramp = origin_discharge_demand(s, oi, rates);
            double supply = recv[b.next];
            double want = d_main + d_ramp;
            double f_main = d_main, f_ramp = d_ramp;
            if (want > supply && want > 0) {
                f_main = supply * d_main / want;
                f_ramp = supply * d_ramp / want;
            }
            // FIFO split: exit flow throttled together with the through flow
            double through_frac = (d_main > 0) ? f_main / d_main : 1.0;
            adv[i] = f_main * dt_s_;
            exi[i] = d_exit * through_frac * dt_s_;
            if (oi >= 0) ramp_in[oi] = f_ramp * dt_s_;
        }

        // 4) apply transfers with cohort advection; all moves are computed
        //    against pre-step compositions, then merged. Each cell has one
        //    upstream predecessor and at most one feeding queue, so arrivals
        //    are key-sorted lists combined with linear merges.
        std::vector<std::vector<Composition::value_type>> arriving(C);
        for (int i = 0; i < C; ++i) {
            double out = adv[i] + exi[i];
            if (out <= 0 || s.cell_veh[i] <= 0) continue;
            double frac = std::min(1.0, out / s.cell_veh[i]);
            const Boundary& b = boundary_[i];
            double exit_share = exi[i] / out;
            if (b.next >= 0) arriving[b.next].reserve(s.cell_mix[i].size());
            for (auto& [key, veh] : s.cell_mix[i]) {
                double moving = veh * frac;
                if (moving < 1e-12) continue; // leave negligible residue for prune
                veh -= moving;
                double exiting = moving * exit_share;
                double advancing = moving - exiting;
                if (exiting > 0)
                    record_arrival(s, key, b.exit_index, exiting);
                if (advancing > 0 && b.next >= 0) {
                    CohortKey moved_key = key;
                    if (ring && b.next == origin_cell_[key.origin]) ++moved_key.lap;
                    arriving[b.next].emplace_back(moved_key, advancing);
                }
            }
            prune(s.cell_mix[i]);
        }
        for (std::size_t oi = 0; oi < origins_.size(); ++oi) {
            double out = ramp_in[oi];
            if (out <= 0 || s.queue_veh[oi] <= 0) continue;
            double frac = std::min(1.0, out / s.queue_veh[oi]);
            int target = origin_cell_[oi];
            std::vector<Composition::value_type> moved;
            moved.reserve(s.queue_mix[oi].size());
            for (auto& [key, veh] : s.queue_mix[oi]) {
                double moving = veh * frac;
                if (moving < 1e-12) continue;
                veh -= moving;
                moved.emplace_back(key, moving);
            }
            prune(s.queue_mix[oi]);
            if (arriving[target].empty()) {
                arriving[target] = std::move(moved);
            } else {
                std::vector<Composition::value_type> merged;
                merged.reserve(arriving[target].size() + moved.size());
                auto a = arriving[target].begin();
                auto b = moved.begin();
                while (a != arriving[target].end() && b != moved.end()) {
                    if (a->first < b->first) merged.push_back(*a++);
                    else if (b->first < a->first) merged.push_back(*b++);
                    else {
                        merged.emplace_back(a->first, a->second + b->second);
                        ++a;
                        ++b;
                    }
                }
                merged.insert(merged.end(), a, arriving[target].end());
                merged.insert(merged.end(), b, moved.end());
                arriving[target] = std::move(merged);
            }
        }
        for (int i = 0; i < C; ++i)
            if (!arriving[i].empty()) s.cell_mix[i].merge_add(arriving[i]);
        for (int i = 0; i < C; ++i) {
            const Boundary& b = boundary_[i];
            s.cell_veh[i] -= adv[i] + exi[i];
            if (b.next >= 0) s.cell_veh[b.next] += adv[i];
            s.exited.add(exi[i]);
        }
        for (std::size_t oi = 0; oi < origins_.size(); ++oi) {
            s.queue_veh[oi] -= ramp_in[oi];
            s.cell_veh[origin_cell_[oi]] += ramp_in[oi];
            if (s.queue_veh[oi] < 0) s.queue_veh[oi] = 0.0; // rounding guard
        }
        for (int i = 0; i < C; ++i) {
            if (s.cell_veh[i] < 0) s.cell_veh[i] = 0.0;
            if (s.cell_veh[i] > jam) s.cell_veh[i] = jam;
        }
        s.clock_s += dt_s_;
    }

    // Occupancy proxy: density / jam density, in [0,1].
    double occupancy(const SimState& s, int cell_idx) const {
        return std::clamp(s.cell_veh[cell_idx] / jam_veh_per_cell(), 0.0, 1.0);
    }

    // FD speed in km/h at the current density of a cell.
    double speed_kmh(const SimState& s, int cell_idx) const {
        double dens = s.cell_veh[cell_idx] / (cell_.lanes * cell_.length_m / 1000.0);
        double crit = cell_.critical_density_vpkpl();
        if (dens <= crit || dens <= 0) return cell_.free_speed_kmh;
        double flow = cell_.backward_wave_kmh * (cell_.jam_density_vpkpl - dens);
        return std::max(0.0, flow / dens);
    }

    // Vehicle balance: entered - exited - on mainline - in queues.
    double conservation_residual(const SimState& s) const {
        KahanSum onroad;
        for (double v : s.cell_veh) onroad.add(v);
        for (double v : s.queue_veh) onroad.add(v);
        return s.entered.value() - s.exited.value() - onroad.value();
    }

    // Directed arc from an origin position to a destination position, meters.
    double trip_distance_m(const std::string& origin, const std::string& dest) const {
        double a = origin_position(origin);
        double b = dest_position(dest);
        if (net_.topology() == Topology::Line) return b - a;
        double d = b - a;
        if (d <= 0) d += net_.total_length_m();
        return d;
    }

    double freeflow_time_s(double distance_m) const {
        return distance_m / (cell_.free_speed_kmh / 3.6);
    }

    // Cut TripRecords from the ledger. Records are per (cohort, destination)
    // with weighted-mean departure and arrival times.
    std::vector<TripRecord> trip_records(const SimState& s) const {
        std::vector<TripRecord> out;
        for (const auto& [key, arr] : s.ledger.arrived) {
            const auto& [cohort, exit_index] = key;
            auto dit = s.ledger.departed.find({cohort.origin, cohort.bin, 0});
            if (dit == s.ledger.departed.end() || arr.weight <= 0) continue;
            TripRecord t;
            t.origin = origins_[cohort.origin];
            t.destination = exit_ids_[exit_index];
            t.depart_s = dit->second.weighted_time.value() / dit->second.weight.value();
            t.arrive_s = arr.weighted_time / arr.weight;
            double dist = trip_distance_m(t.origin, t.destination) +
                          cohort.lap * net_.total_length_m();
            t.distance_km = dist / 1000.0;
            t.freeflow_time_s = freeflow_time_s(dist);
            t.weight = arr.weight;
            out.push_back(std::move(t));
        }
        return out;
    }

    // Departed weight per cohort, with mean departure time, for arrival-rate
    // and demand-weighting computations.
    struct CohortDeparture {
        std::string origin;
        double depart_s;
        double weight;
        double arrived_weight;
    };
    std::vector<CohortDeparture> cohort_departures(const SimState& s) const {
        std::vector<CohortDeparture> out;
        for (const auto& [key, dep] : s.ledger.departed) {
            CohortDeparture d;
            d.origin = origins_[key.origin];
            d.weight = dep.weight.value();
            d.depart_s = d.weight > 0 ? dep.weighted_time.value() / d.weight : 0.0;
            d.arrived_weight = 0.0;
            for (const auto& [akey, arr] : s.ledger.arrived)
                if (akey.first.origin == key.origin && akey.first.bin == key.bin)
                    d.arrived_weight += arr.weight;
            out.push_back(std::move(d));
        }
        return out;
    }

private:
    struct Boundary {
        int next = -1;        // downstream cell, -1 = open end
        double split = 0.0;   // off-ramp split fraction at this cell
        std::string exit_id;  // off-ramp id, or "end" for the open line end
        int exit_index = -1;  // index into exit_ids_
    };

    void build_origins() {
        // on-ramps in corridor order, then the mainline origin for lines
        for (const auto& id : net_.on_ramps()) origins_.push_back(id);
        if (net_.topology() == Topology::Line) origins_.push_back("mainline");
        origin_cell_.resize(origins_.size());
        ramp_rate_index_.resize(origins_.size());
        origin_into_cell_.assign(net_.num_cells(), -1);
        for (std::size_t oi = 0; oi < origins_.size(); ++oi) {
            if (origins_[oi] == "mainline") {
                origin_cell_[oi] = 0;
                ramp_rate_index_[oi] = -1; // never metered
            } else {
                const RampNode& r = net_.ramp(origins_[oi]);
                origin_cell_[oi] = r.attach_cell;
                ramp_rate_index_[oi] = r.metered ? net_.on_ramp_index(origins_[oi]) : -1;
            }
            if (origin_into_cell_[origin_cell_[oi]] >= 0)
                throw ConfigError("two origins feed the same cell");
            origin_into_cell_[origin_cell_[oi]] = static_cast<int>(oi);
        }
        // origins feeding cell 0 on a line merge with nothing upstream; treat
        // the wrap boundary as feeding it
    }

    void build_boundaries() {
        const int C = net_.num_cells();
        boundary_.resize(C);
        for (int i = 0; i < C; ++i) {
            if (net_.topology() == Topology::Ring)
                boundary_[i].next = (i + 1) % C;
            else
                boundary_[i].next = (i + 1 < C) ? i + 1 : -1;
            if (boundary_[i].next < 0) boundary_[i].exit_id = "end";
        }
        for (const auto& r : net_.ramps()) {
            if (r.kind != RampKind::OffRamp) continue;
            auto it = demand_.off_split.find(r.id);
            double beta = (it != demand_.off_split.end()) ? it->second : 0.0;
            Boundary& b = boundary_[r.attach_cell];
            if (!b.exit_id.empty() && b.exit_id != "end")
                throw ConfigError("two off-ramps at the same cell");
            if (b.next >= 0) {
                b.split = beta;
                b.exit_id = r.id;
            }
        }
        for (auto& b : boundary_) {
            if (b.exit_id.empty()) continue;
            b.exit_index = static_cast<int>(exit_ids_.size());
            exit_ids_.push_back(b.exit_id);
        }
    }

    // Queue discharge demand in veh/s: bounded by queue availability and the
    // metering rate times the saturation flow 1/headway.
    double origin_discharge_demand(const SimState& s, int oi,
                                   const std::vector<double>& rates) const {
        double rate = 1.0;
        int ri = ramp_rate_index_[oi];
        if (ri >= 0) {
            if (ri >= static_cast<int>(rates.size()))
                throw ContractError("metering rate vector too short");
            rate = rates[ri];
            if (!(rate >= 0.0 && rate <= 1.0))
                throw ContractError("metering rate outside [0,1] for ramp " + origins_[oi]);
        }
        double sat_vps = rate / discharge_headway_s_;
        return std::min(s.queue_veh[oi] / dt_s_, sat_vps);
    }

    void record_arrival(SimState& s, const CohortKey& key, int exit_index,
                        double weight) const {
        auto& a = s.ledger.arrived[{key, exit_index}];
        a.weight += weight;
        a.weighted_time += weight * (s.clock_s + dt_s_);
    }

    // Cohort shares decay geometrically and would otherwise accumulate
    // without bound; residues below kTiny are folded into the largest
    // cohort so the composition total stays paired with the scalar state.
    static void prune(Composition& mix) {
        constexpr double kTiny = 1e-9; // veh
        auto largest = mix.end();
        for (auto it = mix.begin(); it != mix.end(); ++it)
            if (largest == mix.end() || it->second > largest->second) largest = it;
        if (largest == mix.end() || largest->second <= kTiny) {
            for (auto it = mix.begin(); it != mix.end();) {
                if (it->second <= 0.0)
                    it = mix.erase(it);
                else
                    ++it;
            }
            return;
        }
        double removed = 0.0;
        for (auto it = mix.begin(); it != mix.end();) {
            if (it != largest && it->second <= kTiny) {
                removed += std::max(0.0, it->second);
                it = mix.erase(it);
            } else {
                ++it;
            }
        }
        largest->second += removed;
    }

    double origin_position(const std::string& origin) const {
        if (origin == "mainline") return 0.0;
        return net_.ramp(origin).position_m;
    }
    double dest_position(const std::string& dest) const {
        if (dest == "end") return net_.total_length_m();
        return net_.ramp(dest).position_m;
    }

    const FreewayNetwork& net_;
    Cell cell_;
    DemandProfile demand_;
    double dt_s_;
    double discharge_headway_s_;
    double cohort_bin_s_;
    double max_queue_veh_;
    std::map<std::string, std::vector<double>> noise_;
    std::vector<std::string> origins_;
    std::vector<int> origin_cell_;
    std::vector<int> ramp_rate_index_;
    std::vector<int> origin_into_cell_;
    std::vector<Boundary> boundary_;
    std::vector<std::string> exit_ids_;
};

} // namespace ceqsim
