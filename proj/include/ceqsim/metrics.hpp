#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ceqsim/common.hpp"
#include "ceqsim/dynamics.hpp"

namespace ceqsim {

struct EfficiencyReport {
    double departed = 0;          // vehicle-equivalents departing in window
    double arrived = 0;           // of those, arrived before horizon end
    double arrival_rate_pct = 0;
    double total_travel_time_h = 0;
    double total_delay_h = 0;
    double total_distance_km = 0;
    double avg_speed_kmh = 0;
    double avg_delay_s_per_veh = 0;
    double unfinished = 0;        // departed - arrived
    bool defined = true;          // false for an empty trip set
};

struct FairnessReport {
    std::map<std::string, double> per_ramp_avg_delay_s;
    double harsanyian_s = 0;   // unweighted mean
    double gini = 0;           // of per-ramp delays, unit weights
    double rawlsian_max_s = 0;
    double aristotelian_s = 0; // demand-weighted mean
};

// Weighted Gini: sum_ij w_i w_j |x_i - x_j| / (2 (sum w)^2 mu). Zero when
// the mean is zero.
inline double gini(const std::vector<std::pair<double, double>>& value_weight) {
    double wsum = 0, mean_num = 0;
    for (const auto& [x, w] : value_weight) {
        if (x < 0) throw ContractError("gini: negative value");
        wsum += w;
        mean_num += w * x;
    }
    if (wsum <= 0) throw ContractError("gini: no positive weight");
    double mu = mean_num / wsum;
    if (mu == 0) return 0.0;
    double acc = 0;
    for (const auto& [xi, wi] : value_weight)
        for (const auto& [xj, wj] : value_weight)
            acc += wi * wj * std::abs(xi - xj);
    return acc / (2.0 * wsum * wsum * mu);
}

inline double gini_unit(const std::vector<double>& values) {
    std::vector<std::pair<double, double>> vw;
    for (double v : values) vw.emplace_back(v, 1.0);
    return gini(vw);
}

// Table-II style panel over trips departing within [t0, t1]. Unfinished
// cohort mass counts as departed but contributes no travel time or delay.
struct DepartureTally {
    std::string origin;
    double depart_s;
    double weight;          // departed
    double arrived_weight;  // arrived before horizon end
};

inline EfficiencyReport efficiency(const std::vector<TripRecord>& trips,
                                   const std::vector<DepartureTally>& departures,
                                   double t0, double t1) {
    EfficiencyReport r;
    for (const auto& d : departures) {
        if (d.depart_s < t0 || d.depart_s >= t1) continue;
        r.departed += d.weight;
        r.arrived += d.arrived_weight;
    }
    for (const auto& t : trips) {
        if (t.depart_s < t0 || t.depart_s >= t1) continue;
        r.total_travel_time_h += t.weight * (t.arrive_s - t.depart_s) / 3600.0;
        r.total_delay_h += t.weight * t.delay_s() / 3600.0;
        r.total_distance_km += t.weight * t.distance_km;
    }
    r.unfinished = r.departed - r.arrived;
    if (r.departed <= 0) {
        r.defined = false;
        return r;
    }
    r.arrival_rate_pct = 100.0 * r.arrived / r.departed;
    r.avg_speed_kmh = r.total_travel_time_h > 0
                          ? r.total_distance_km / r.total_travel_time_h
                          : 0.0;
    r.avg_delay_s_per_veh = r.arrived > 0 ? r.total_delay_h * 3600.0 / r.arrived : 0.0;
    return r;
}

// Weighted mean delay per origin on-ramp; origins whose departed weight in
// the window is below the threshold are omitted.
inline std::map<std::string, double> per_ramp_avg_delay(
    const std::vector<TripRecord>& trips, double t0, double t1,
    double min_weight_threshold) {
    std::map<std::string, double> wsum, dsum;
    for (const auto& t : trips) {
        if (t.depart_s < t0 || t.depart_s >= t1) continue;
        wsum[t.origin] += t.weight;
        dsum[t.origin] += t.weight * t.delay_s();
    }
    std::map<std::string, double> out;
    for (const auto& [origin, w] : wsum)
        if (w >= min_weight_threshold && w > 0) out[origin] = dsum[origin] / w;
    return out;
}

// The four fairness statistics over per-ramp average delays.
inline FairnessReport fairness(const std::map<std::string, double>& per_ramp,
                               const std::map<std::string, double>& demands) {
    if (per_ramp.empty()) throw ContractError("fairness: empty per-ramp delay map");
    FairnessReport r;
    r.per_ramp_avg_delay_s = per_ramp;
    double sum = 0, max = 0, dw_sum = 0, dsum = 0;
    std::vector<double> values;
    for (const auto& [ramp, delay] : per_ramp) {
        auto it = demands.find(ramp);
        if (it == demands.end())
            throw ContractError("fairness: missing demand for ramp " + ramp);
        sum += delay;
        max = std::max(max, delay);
        dw_sum += it->second * delay;
        dsum += it->second;
        values.push_back(delay);
    }
    r.harsanyian_s = sum / per_ramp.size();
    r.rawlsian_max_s = max;
    r.gini = gini_unit(values);
    r.aristotelian_s = dsum > 0 ? dw_sum / dsum : r.harsanyian_s;
    return r;
}

// Delay per kilometre travelled, binned by trip distance. Bins with no
// trips are absent from the map. Zero-distance trips are rejected and
// tallied.
struct RelativeDelayReport {
    std::map<int, double> per_bin_s_per_km; // bin index -> weighted mean
    double dispersion_gini = 0;             // gini across present bin means
    double rejected_weight = 0;
};

inline RelativeDelayReport relative_delay_by_distance(
    const std::vector<TripRecord>& trips, const std::vector<double>& bin_edges_km) {
    if (bin_edges_km.size() < 2) throw ContractError("relative delay: need >= 2 bin edges");
    for (std::size_t i = 0; i < bin_edges_km.size(); ++i) {
        if (bin_edges_km[i] <= 0 || (i > 0 && bin_edges_km[i] <= bin_edges_km[i - 1]))
            throw ContractError("relative delay: bin edges must be sorted and positive");
    }
    RelativeDelayReport r;
    std::map<int, double> wsum, vsum;
    for (const auto& t : trips) {
        if (t.distance_km <= 0) {
            r.rejected_weight += t.weight;
            continue;
        }
        int bin = -1;
        for (std::size_t i = 0; i + 1 < bin_edges_km.size(); ++i)
            if (t.distance_km >= bin_edges_km[i] && t.distance_km < bin_edges_km[i + 1])
                bin = static_cast<int>(i);
        if (bin < 0) continue;
        wsum[bin] += t.weight;
        vsum[bin] += t.weight * (t.delay_s() / t.distance_km);
    }
    std::vector<double> means;
    for (const auto& [bin, w] : wsum) {
        double v = vsum[bin] / w;
        r.per_bin_s_per_km[bin] = v;
        means.push_back(v);
    }
    if (!means.empty()) r.dispersion_gini = gini_unit(means);
    return r;
}

} // namespace ceqsim
