#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "ceqsim/control.hpp"
#include "ceqsim/network.hpp"

using namespace ceqsim;

namespace {

FreewayNetwork make_ring(const std::vector<std::pair<std::string, double>>& ramps,
                         int cells = 64, double cell_len = 500.0) {
    std::vector<RampNode> nodes;
    for (const auto& [id, pos] : ramps) {
        RampNode r;
        r.id = id;
        r.kind = RampKind::OnRamp;
        r.position_m = pos;
        r.attach_cell = static_cast<int>(pos / cell_len);
        r.detector_cell = r.attach_cell;
        r.metered = true;
        nodes.push_back(r);
    }
    return FreewayNetwork(Topology::Ring, cells, cell_len, std::move(nodes));
}

FreewayNetwork make_line(const std::vector<std::pair<std::string, double>>& ramps,
                         int cells = 64, double cell_len = 500.0) {
    std::vector<RampNode> nodes;
    for (const auto& [id, pos] : ramps) {
        RampNode r;
        r.id = id;
        r.kind = RampKind::OnRamp;
        r.position_m = pos;
        r.attach_cell = static_cast<int>(pos / cell_len);
        r.detector_cell = r.attach_cell;
        r.metered = true;
        nodes.push_back(r);
    }
    return FreewayNetwork(Topology::Line, cells, cell_len, std::move(nodes));
}

} // namespace

TEST_CASE("flow to rate conversion") {
    ControllerConfig cfg;
    cfg.gamma_s_per_veh = 0.5;
    cfg.cycle_s = 60;
    cfg.r_min = 0.1;
    cfg.r_max = 1.0;
    CHECK(flow_to_rate(7200, cfg) == doctest::Approx(1.0));
    CHECK(flow_to_rate(3600, cfg) == doctest::Approx(0.5));
    CHECK(flow_to_rate(0, cfg) == doctest::Approx(cfg.r_min)); // lower clamp
    CHECK(flow_to_rate(1e6, cfg) == doctest::Approx(cfg.r_max));
}

TEST_CASE("alinea base law") {
    ControllerConfig cfg;
    cfg.K = 7000;
    cfg.o_hat = 0.18;
    cfg.q_min = 200;
    cfg.q_max = 2000;
    CHECK(alinea_base(1000, 0.18, cfg) == doctest::Approx(1000)); // zero error
    CHECK(alinea_base(1000, 0.28, cfg) == doctest::Approx(300));
    CHECK(alinea_base(cfg.q_min, 0.5, cfg) == doctest::Approx(cfg.q_min)); // clamp holds
    CHECK(alinea_base(1900, 0.0, cfg) == doctest::Approx(cfg.q_max));
}

TEST_CASE("weights: normalization and cutoff") {
    // single neighbor -> weight 1
    auto net2 = make_ring({{"A", 1000}, {"B", 9000}});
    auto w = compute_weights(net2, "A", 1, NormMode::Global);
    CHECK(w.size() == 1);
    CHECK(w.at("B") == doctest::Approx(1.0));

    // d = {500, 1000}, L_max = 2000 -> u = {0.75, 0.5}, w = {0.6, 0.4}
    // geometry: B at 2000, A at 1500 (500 up), C at 3000 (1000 down),
    // widest consecutive gap elsewhere = 2000
    auto net = make_line({{"Z", 0}, {"A", 1500}, {"B", 2000}, {"C", 3000}, {"D", 5000}},
                         64, 100);
    // gaps: 1500, 500, 1000, 2000 -> L_max 2000... but Z-A gap 1500
    CHECK(net.max_consecutive_gap(GapScope::Global) == doctest::Approx(2000));
    auto wb = compute_weights(net, "B", 1, NormMode::Global);
    CHECK(wb.at("A") == doctest::Approx(0.6));
    CHECK(wb.at("C") == doctest::Approx(0.4));

    // all neighbors at or beyond L_max -> coordination disabled
    auto far = make_line({{"A", 0}, {"B", 4000}, {"C", 8000}}, 64, 500);
    auto wa = compute_weights(far, "B", 1, NormMode::Global);
    CHECK(wa.at("A") == doctest::Approx(0.0));
    CHECK(wa.at("C") == doctest::Approx(0.0));
}

TEST_CASE("weight invariants randomized") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        int n = 4 + static_cast<int>(rng() % 8);
        std::set<int> cells;
        std::vector<std::pair<std::string, double>> ramps;
        std::vector<double> pos;
        for (int i = 0; i < n; ++i) {
            int c;
            do {
                c = static_cast<int>(rng() % 64);
            } while (cells.count(c));
            cells.insert(c);
            pos.push_back(c * 500.0 + 50.0);
        }
        std::sort(pos.begin(), pos.end());
        for (int i = 0; i < n; ++i) ramps.emplace_back("R" + std::to_string(i), pos[i]);
        auto net = make_ring(ramps);
        for (const auto& [id, p] : ramps) {
            for (int m = 1; m <= 3; ++m) {
                for (auto mode : {NormMode::Global, NormMode::Local}) {
                    auto u = compute_unnormed_weights(net, id, m, mode);
                    auto w = compute_weights(net, id, m, mode);
                    double usum = 0, wsum = 0;
                    for (const auto& [j, v] : u) usum += v;
                    for (const auto& [j, v] : w) {
                        wsum += v;
                        CHECK(v >= 0.0);
                        CHECK(v <= 1.0);
                    }
                    if (usum > 0) CHECK(wsum == doctest::Approx(1.0).epsilon(1e-12));
                    // monotone proximity: closer neighbor never gets less weight
                    for (const auto& [j1, w1] : w)
                        for (const auto& [j2, w2] : w)
                            if (net.proximity_distance(id, j1) < net.proximity_distance(id, j2))
                                CHECK(w1 >= w2);
                }
                // local L_max <= global L_max, so local u <= global u
                auto ug = compute_unnormed_weights(net, id, m, NormMode::Global);
                auto ul = compute_unnormed_weights(net, id, m, NormMode::Local);
                for (const auto& [j, v] : ul) CHECK(v <= ug.at(j) + 1e-12);
            }
        }
    }
}

TEST_CASE("coordination term") {
    std::map<std::string, double> w{{"A", 0.6}, {"B", 0.4}};
    std::vector<NeighborMessage> msgs{{"A", 1200}, {"B", 900}};
    CHECK(coordination_term(1000, msgs, w, 0.5) == doctest::Approx(40.0));
    // consensus fixed point
    std::vector<NeighborMessage> same{{"A", 1000}, {"B", 1000}};
    CHECK(coordination_term(1000, same, w, 0.7) == doctest::Approx(0.0));
    // zero gain
    CHECK(coordination_term(1000, msgs, w, 0.0) == 0.0);
    // all-zero weights disable coordination
    std::map<std::string, double> wz{{"A", 0.0}, {"B", 0.0}};
    CHECK(coordination_term(1000, msgs, wz, 0.5) == 0.0);
    // non-neighbor message
    std::vector<NeighborMessage> bad{{"X", 500}};
    CHECK_THROWS_AS(coordination_term(1000, bad, w, 0.5), ContractError);
}

namespace {
MeasurementFrame frame_for(const std::vector<double>& occ, int n_cells) {
    MeasurementFrame f;
    f.on_ramp_occupancy = occ;
    f.on_ramp_queue_veh.assign(occ.size(), 0.0);
    f.cell_occupancy.assign(n_cells, 0.0);
    return f;
}
} // namespace

TEST_CASE("ceq-alinea reduces to alinea when K_c = 0") {
    auto net = make_ring({{"A", 1000}, {"B", 9000}, {"C", 17000}, {"D", 25000}});
    ControllerConfig cfg;
    cfg.K = 7000;
    cfg.o_hat = 0.18;
    cfg.K_c = 0.0;
    cfg.m = 2;
    AlineaController alinea(net, cfg);
    CeqAlineaController ceq(net, cfg);
    std::mt19937_64 rng(3);
    for (int cycle = 0; cycle < 50; ++cycle) {
        std::vector<double> occ;
        for (int i = 0; i < 4; ++i) occ.push_back((rng() % 1000) / 1000.0);
        auto a = alinea.cycle(frame_for(occ, 64));
        auto c = ceq.cycle(frame_for(occ, 64));
        for (int i = 0; i < 4; ++i) {
            CHECK(a[i].rate == c[i].rate); // bitwise identical
            CHECK(a[i].flow_command_vph == c[i].flow_command_vph);
        }
    }
}

TEST_CASE("ceq-alinea symmetry: uniform inputs give uniform outputs") {
    std::vector<std::pair<std::string, double>> ramps;
    for (int i = 0; i < 8; ++i) ramps.emplace_back("R" + std::to_string(i), i * 4000.0 + 100);
    auto net = make_ring(ramps);
    ControllerConfig cfg;
    cfg.K_c = 0.6;
    cfg.m = 2;
    CeqAlineaController ceq(net, cfg);
    auto out = ceq.cycle(frame_for(std::vector<double>(8, 0.3), 64));
    for (int i = 1; i < 8; ++i) CHECK(out[i].rate == doctest::Approx(out[0].rate));
}

TEST_CASE("ceq-alinea matches a hand-computed two-phase trace") {
    // 3-ramp line: A at 0, B at 1000, C at 3000. Gaps 1000 and 2000, global
    // L_max = 2000.
    auto net = make_line({{"A", 0}, {"B", 1000}, {"C", 3000}}, 64, 100);
    ControllerConfig cfg;
    cfg.K = 5000;
    cfg.o_hat = 0.20;
    cfg.K_c = 0.5;
    cfg.m = 1;
    cfg.q_min = 200;
    cfg.q_max = 2000;
    cfg.gamma_s_per_veh = 0.5;
    CeqAlineaController ceq(net, cfg);
    // occupancies: A 0.30, B 0.20, C 0.10; q_prev = 2000 everywhere
    // phase 1: base_A = clamp(2000 + 5000*(-0.10)) = 1500
    //          base_B = 2000 (zero error), base_C = clamp(2000+500) = 2000
    // weights: A: {B: u=1-1000/2000=0.5} -> w_B = 1
    //          B: {A: 0.5, C: 0} -> w_A = 1, w_C = 0
    //          C: {B: 0} -> all zero, coordination disabled
    // phase 2: q_A = 1500 + 0.5*(2000 - 1500) = 1750
    //          q_B = 2000 + 0.5*(1500 - 2000) = 1750
    //          q_C = 2000
    auto out = ceq.cycle(frame_for({0.30, 0.20, 0.10}, 64));
    CHECK(out[0].flow_command_vph == doctest::Approx(1750));
    CHECK(out[1].flow_command_vph == doctest::Approx(1750));
    CHECK(out[2].flow_command_vph == doctest::Approx(2000));
    CHECK(out[0].rate == doctest::Approx(1750 * 0.5 / 3600));
}

TEST_CASE("locality: far ramp occupancy cannot change a ramp's output") {
    std::vector<std::pair<std::string, double>> ramps;
    for (int i = 0; i < 8; ++i) ramps.emplace_back("R" + std::to_string(i), i * 4000.0 + 100);
    ControllerConfig cfg;
    cfg.K_c = 0.5;
    cfg.m = 1;
    std::vector<double> occ(8, 0.25);
    auto net = make_ring(ramps);
    CeqAlineaController base(net, cfg);
    auto out1 = base.cycle(frame_for(occ, 64));
    // perturb R4, outside {R0} u N[R0] = {R7, R1}
    CeqAlineaController pert(net, cfg);
    auto occ2 = occ;
    occ2[4] = 0.9;
    auto out2 = pert.cycle(frame_for(occ2, 64));
    CHECK(out1[0].rate == out2[0].rate);
    CHECK(out1[4].rate != out2[4].rate);
}

TEST_CASE("no-control controller") {
    auto net = make_ring({{"A", 1000}, {"B", 9000}});
    ControllerConfig cfg;
    NoControlController nc(net, cfg);
    auto out1 = nc.cycle(frame_for({0.1, 0.9}, 64));
    auto out2 = nc.cycle(frame_for({0.9, 0.1}, 64));
    for (int i = 0; i < 2; ++i) {
        CHECK(out1[i].rate == cfg.r_max);
        CHECK(out2[i].rate == cfg.r_max); // stateless, occupancy-independent
    }
}

TEST_CASE("metaline fixed point and hand example") {
    // 2 ramps, 3 cells
    std::vector<RampNode> nodes;
    RampNode a{"A", RampKind::OnRamp, 100, 0, 0, true};
    RampNode b{"B", RampKind::OnRamp, 1100, 2, 2, true};
    FreewayNetwork net(Topology::Line, 3, 500, {a, b});
    MetalineConfig mc;
    mc.base.o_hat = 0.2;
    mc.base.q_min = 0;
    mc.base.q_max = 4000;
    mc.K1 = {{100, 0, 0}, {0, 0, 200}};
    mc.K2 = {{300, 0}, {0, 400}};
    MetalineController ctl(net, mc);

    MeasurementFrame f;
    f.on_ramp_occupancy = {0.2, 0.2};
    f.on_ramp_queue_veh = {0, 0};
    f.cell_occupancy = {0.2, 0.2, 0.2};
    auto out = ctl.cycle(f); // first cycle: o_prev = o, bottlenecks at set-point
    CHECK(out[0].flow_command_vph == doctest::Approx(4000)); // q_prev stays q_max
    CHECK(out[1].flow_command_vph == doctest::Approx(4000));

    // hand example: occupancies rise
    MeasurementFrame g;
    g.on_ramp_occupancy = {0.3, 0.25};
    g.on_ramp_queue_veh = {0, 0};
    g.cell_occupancy = {0.3, 0.2, 0.25};
    // q_A = 4000 - 100*(0.3-0.2) - 300*(0.3-0.2) = 4000 - 10 - 30 = 3960
    // q_B = 4000 - 200*(0.25-0.2) - 400*(0.25-0.2) = 4000 - 10 - 20 = 3970
    auto out2 = ctl.cycle(g);
    CHECK(out2[0].flow_command_vph == doctest::Approx(3960));
    CHECK(out2[1].flow_command_vph == doctest::Approx(3970));
}

TEST_CASE("metaline dimension mismatch is a configuration error") {
    RampNode a{"A", RampKind::OnRamp, 100, 0, 0, true};
    FreewayNetwork net(Topology::Line, 3, 500, {a});
    MetalineConfig mc;
    mc.K1 = {{1, 2}}; // wrong width
    CHECK_THROWS_AS(MetalineController(net, mc), ConfigError);
}

TEST_CASE("controller config validation") {
    ControllerConfig cfg;
    cfg.K = -1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.r_min = 0.9;
    cfg.r_max = 0.5;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.q_min = 3000;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
