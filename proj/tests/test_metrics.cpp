#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "ceqsim/metrics.hpp"

using namespace ceqsim;

namespace {

const std::vector<double> kNoControlDelays = {151.7, 402.0, 550.4, 188.8, 273.5, 235.3,
                                              316.7, 282.7, 443.5, 66.7, 199.0};
const std::vector<double> kAlineaDelays = {134.8, 136.9, 259.8, 145.4, 197.4, 179.5,
                                           233.0, 208.2, 330.0, 47.7, 97.3};

TripRecord trip(const std::string& origin, double depart, double tt, double dist_km,
                double ff, double weight = 1.0) {
    TripRecord t;
    t.origin = origin;
    t.destination = "X";
    t.depart_s = depart;
    t.arrive_s = depart + tt;
    t.distance_km = dist_km;
    t.freeflow_time_s = ff;
    t.weight = weight;
    return t;
}

} // namespace

TEST_CASE("gini: equality, two-point extreme, reference delay vectors") {
    CHECK(gini_unit({5, 5, 5, 5}) == doctest::Approx(0.0));
    CHECK(gini_unit({0, 7}) == doctest::Approx(0.5));
    CHECK(gini_unit({0, 123456}) == doctest::Approx(0.5));
    CHECK(gini_unit(kNoControlDelays) == doctest::Approx(0.2635).epsilon(0.004));
    CHECK(gini_unit(kAlineaDelays) == doctest::Approx(0.2354).epsilon(0.004));
    CHECK(gini_unit({0, 0, 0}) == 0.0); // zero mean
    CHECK_THROWS_AS(gini({{-1.0, 1.0}}), ContractError);
}

TEST_CASE("gini is population-invariant under replication") {
    std::vector<std::pair<double, double>> vw{{1, 1}, {4, 2}, {9, 1}};
    std::vector<std::pair<double, double>> rep;
    for (int k = 0; k < 3; ++k) rep.insert(rep.end(), vw.begin(), vw.end());
    CHECK(gini(vw) == doctest::Approx(gini(rep)).epsilon(1e-12));
}

TEST_CASE("fairness statistics reproduce the reference columns") {
    std::map<std::string, double> per_ramp, demands;
    for (std::size_t i = 0; i < kNoControlDelays.size(); ++i) {
        std::string id(1, char('A' + i));
        per_ramp[id] = kNoControlDelays[i];
        demands[id] = 1.0;
    }
    FairnessReport r = fairness(per_ramp, demands);
    CHECK(r.harsanyian_s == doctest::Approx(282.8).epsilon(0.001));
    CHECK(r.rawlsian_max_s == doctest::Approx(550.4));
    CHECK(r.gini == doctest::Approx(0.2635).epsilon(0.004));
    CHECK(r.aristotelian_s == doctest::Approx(r.harsanyian_s)); // uniform demands
}

TEST_CASE("aristotelian weighted mean") {
    std::map<std::string, double> per_ramp{{"A", 100.0}, {"B", 300.0}};
    std::map<std::string, double> demands{{"A", 3.0}, {"B", 1.0}};
    FairnessReport r = fairness(per_ramp, demands);
    CHECK(r.aristotelian_s == doctest::Approx(150.0));
    CHECK_THROWS_AS(fairness({}, demands), ContractError);
    CHECK_THROWS_AS(fairness({{"C", 1.0}}, demands), ContractError); // missing demand
}

TEST_CASE("fairness scale equivariance and permutation invariance") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 200; ++trial) {
        std::map<std::string, double> per_ramp, demands;
        int n = 2 + static_cast<int>(rng() % 10);
        for (int i = 0; i < n; ++i) {
            std::string id = "R" + std::to_string(i);
            per_ramp[id] = (rng() % 10000) / 10.0;
            demands[id] = 1.0 + (rng() % 100);
        }
        double c = 0.5 + (rng() % 100) / 10.0;
        auto scaled = per_ramp;
        for (auto& [k, v] : scaled) v *= c;
        FairnessReport a = fairness(per_ramp, demands);
        FairnessReport b = fairness(scaled, demands);
        CHECK(b.harsanyian_s == doctest::Approx(c * a.harsanyian_s).epsilon(1e-12));
        CHECK(b.rawlsian_max_s == doctest::Approx(c * a.rawlsian_max_s).epsilon(1e-12));
        CHECK(b.aristotelian_s == doctest::Approx(c * a.aristotelian_s).epsilon(1e-12));
        CHECK(b.gini == doctest::Approx(a.gini).epsilon(1e-12));
        CHECK(a.harsanyian_s <= a.rawlsian_max_s + 1e-12);
        double lo = 1e18, hi = -1e18;
        for (const auto& [k, v] : per_ramp) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        CHECK(a.aristotelian_s >= lo - 1e-9);
        CHECK(a.aristotelian_s <= hi + 1e-9);
    }
}

TEST_CASE("efficiency report basics") {
    // one free-flow trip
    std::vector<TripRecord> trips{trip("A", 100, 600, 10.0, 600)};
    std::vector<DepartureTally> deps{{"A", 100, 1.0, 1.0}};
    EfficiencyReport r = efficiency(trips, deps, 0, 1000);
    CHECK(r.total_delay_h == doctest::Approx(0.0));
    CHECK(r.avg_speed_kmh == doctest::Approx(60.0));
    CHECK(r.arrival_rate_pct == doctest::Approx(100.0));

    // empty set: zeros, undefined-marked
    EfficiencyReport e = efficiency({}, {}, 0, 1000);
    CHECK(e.defined == false);
    CHECK(e.departed == 0.0);
}

TEST_CASE("efficiency weight linearity") {
    std::vector<TripRecord> trips{trip("A", 100, 700, 10, 600, 2.0),
                                  trip("B", 200, 900, 12, 720, 1.0)};
    std::vector<DepartureTally> deps{{"A", 100, 2.0, 2.0}, {"B", 200, 1.0, 1.0}};
    EfficiencyReport r1 = efficiency(trips, deps, 0, 1000);
    // split each trip into two with halved weights
    std::vector<TripRecord> halves;
    for (const auto& t : trips) {
        auto h = t;
        h.weight = t.weight / 2;
        halves.push_back(h);
        halves.push_back(h);
    }
    EfficiencyReport r2 = efficiency(halves, deps, 0, 1000);
    CHECK(r1.total_travel_time_h == doctest::Approx(r2.total_travel_time_h).epsilon(1e-12));
    CHECK(r1.total_delay_h == doctest::Approx(r2.total_delay_h).epsilon(1e-12));
    CHECK(r1.avg_speed_kmh == doctest::Approx(r2.avg_speed_kmh).epsilon(1e-12));
}

TEST_CASE("efficiency: hand-summed 3-trip set") {
    // delays: 100 s, 0 s, 300 s; weights 1, 2, 1
    std::vector<TripRecord> trips{trip("A", 0, 700, 10, 600, 1.0),
                                  trip("B", 100, 600, 10, 600, 2.0),
                                  trip("C", 200, 900, 15, 600, 1.0)};
    std::vector<DepartureTally> deps{{"A", 0, 1, 1}, {"B", 100, 2, 2}, {"C", 200, 1, 1}};
    EfficiencyReport r = efficiency(trips, deps, 0, 1000);
    CHECK(r.departed == doctest::Approx(4.0));
    CHECK(r.total_travel_time_h == doctest::Approx((700 + 1200 + 900) / 3600.0));
    CHECK(r.total_delay_h == doctest::Approx((100 + 0 + 300) / 3600.0));
    CHECK(r.total_distance_km == doctest::Approx(10 + 20 + 15));
    CHECK(r.avg_delay_s_per_veh == doctest::Approx(400.0 / 4.0));
}

TEST_CASE("per-ramp average delay with threshold exclusion") {
    std::vector<TripRecord> trips{trip("A", 10, 700, 10, 600, 1.0),   // delay 100
                                  trip("A", 20, 800, 10, 600, 1.0),   // delay 200
                                  trip("B", 30, 650, 10, 600, 0.01)}; // tiny demand
    auto m = per_ramp_avg_delay(trips, 0, 1000, 0.5);
    CHECK(m.at("A") == doctest::Approx(150.0));
    CHECK(m.count("B") == 0); // below threshold -> absent

    // all zero-delay
    std::vector<TripRecord> zero{trip("A", 10, 600, 10, 600)};
    CHECK(per_ramp_avg_delay(zero, 0, 1000, 0).at("A") == doctest::Approx(0.0));
}

TEST_CASE("relative delay by distance") {
    // bins [5,15), [15,30)
    std::vector<double> edges{5, 15, 30};
    // 4 trips in two bins, hand-computed means
    std::vector<TripRecord> trips{
        trip("A", 0, 700, 10, 600),   // 100s / 10km = 10 s/km, bin 0
        trip("B", 0, 900, 10, 600),   // 300s / 10km = 30 s/km, bin 0
        trip("C", 0, 1000, 20, 800),  // 200s / 20km = 10 s/km, bin 1
        trip("D", 0, 1200, 20, 800)}; // 400s / 20km = 20 s/km, bin 1
    auto r = relative_delay_by_distance(trips, edges);
    CHECK(r.per_bin_s_per_km.at(0) == doctest::Approx(20.0));
    CHECK(r.per_bin_s_per_km.at(1) == doctest::Approx(15.0));
    CHECK(r.rejected_weight == 0.0);

    // uniform relative delay -> gini 0
    std::vector<TripRecord> flat{trip("A", 0, 700, 10, 600), trip("B", 0, 1000, 20, 800)};
    auto rf = relative_delay_by_distance(flat, edges);
    CHECK(rf.dispersion_gini == doctest::Approx(0.0));

    // empty bin absent, zero-distance trip rejected
    std::vector<TripRecord> sparse{trip("A", 0, 700, 10, 600), trip("Z", 0, 700, 0.0, 0)};
    auto rs = relative_delay_by_distance(sparse, edges);
    CHECK(rs.per_bin_s_per_km.count(1) == 0);
    CHECK(rs.rejected_weight == doctest::Approx(1.0));
}
