#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ceqsim/common.hpp"
#include "ceqsim/dynamics.hpp"
#include "ceqsim/network.hpp"

namespace ceqsim {

enum class NormMode { Global, Local };

struct ControllerConfig {
    double K = 7000.0;            // veh/h per unit occupancy
    double o_hat = 0.18;          // desired occupancy
    double K_c = 0.5;             // coordination gain
    int m = 1;                    // neighborhood size
    NormMode norm_mode = NormMode::Global;
    double gamma_s_per_veh = 0.5; // discharge headway
    double cycle_s = 60.0;
    double q_min = 200.0;         // veh/h
    double q_max = 2000.0;        // veh/h
    double r_min = 0.0;
    double r_max = 1.0;

    void validate() const {
        if (K <= 0) throw ConfigError("controller: K must be positive");
        if (!(o_hat > 0 && o_hat < 1)) throw ConfigError("controller: o_hat must be in (0,1)");
        if (K_c < 0) throw ConfigError("controller: K_c must be nonnegative");
        if (m < 1) throw ConfigError("controller: m must be >= 1");
        if (gamma_s_per_veh <= 0) throw ConfigError("controller: gamma must be positive");
        if (cycle_s <= 0) throw ConfigError("controller: cycle must be positive");
        if (q_min < 0 || q_min >= q_max) throw ConfigError("controller: flow bounds out of order");
        if (!(r_min >= 0 && r_min < r_max && r_max <= 1))
            throw ConfigError("controller: rate bounds must satisfy 0 <= r_min < r_max <= 1");
    }
};

// Rate conversion: r = q * gamma / 3600, clamped to the rate bounds.
inline double flow_to_rate(double q_vph, const ControllerConfig& cfg) {
    double r = q_vph * cfg.gamma_s_per_veh / 3600.0;
    return std::clamp(r, cfg.r_min, cfg.r_max);
}

// P-control law: q~ = q_prev + K * (o_hat - o), clamped to the flow bounds.
inline double alinea_base(double q_prev, double occupancy, const ControllerConfig& cfg) {
    double q = q_prev + cfg.K * (cfg.o_hat - occupancy);
    return std::clamp(q, cfg.q_min, cfg.q_max);
}

// Distance-decay weights over the neighborhood of n:
//   u_j = max(0, 1 - d_nj / L_max),  w_j = u_j / sum(u).
// L_max is the maximum consecutive on-ramp gap in the chosen scope. If every
// u_j is zero the ramp runs uncoordinated (all weights zero).
inline std::map<std::string, double> compute_weights(const FreewayNetwork& net,
                                                     const std::string& n, int m,
                                                     NormMode mode) {
    std::vector<std::string> nb = net.neighborhood(n, m);
    if (nb.empty()) throw ContractError("compute_weights: empty neighborhood for " + n);
    double l_max = (mode == NormMode::Global)
                       ? net.max_consecutive_gap(GapScope::Global)
                       : net.max_consecutive_gap(GapScope::Local, n, m);
    std::map<std::string, double> w;
    double total = 0.0;
    for (const auto& j : nb) {
        double u = std::max(0.0, 1.0 - net.proximity_distance(n, j) / l_max);
        w[j] = u;
        total += u;
    }
    if (total > 0)
        for (auto& [id, u] : w) u /= total;
    else
        for (auto& [id, u] : w) u = 0.0;
    return w;
}

// Same as compute_weights but before normalization, for property checks.
inline std::map<std::string, double> compute_unnormed_weights(
    const FreewayNetwork& net, const std::string& n, int m, NormMode mode) {
    std::vector<std::string> nb = net.neighborhood(n, m);
    double l_max = (mode == NormMode::Global)
                       ? net.max_consecutive_gap(GapScope::Global)
                       : net.max_consecutive_gap(GapScope::Local, n, m);
    std::map<std::string, double> u;
    for (const auto& j : nb)
        u[j] = std::max(0.0, 1.0 - net.proximity_distance(n, j) / l_max);
    return u;
}

// One neighbor's pre-coordination flow command for the current cycle.
struct NeighborMessage {
    std::string sender;
    double base_flow_vph;
};

// Coordination term: K_c * (sum_j w_j q_j - q_base). Zero when K_c is zero
// or all weights are zero.
inline double coordination_term(double q_base, const std::vector<NeighborMessage>& msgs,
                                const std::map<std::string, double>& weights,
                                double k_c) {
    if (k_c == 0.0) return 0.0;
    double wsum = 0.0;
    for (const auto& [id, w] : weights) wsum += w;
    if (wsum == 0.0) return 0.0;
    double avg = 0.0;
    for (const auto& msg : msgs) {
        auto it = weights.find(msg.sender);
        if (it == weights.end())
            throw ContractError("coordination_term: message from non-neighbor " + msg.sender);
        avg += it->second * msg.base_flow_vph;
    }
    return k_c * (avg - q_base);
}

// Per-cycle decision for one ramp, as logged.
struct RampDecision {
    double occupancy = 0;
    double flow_command_vph = 0;
    double rate = 0;
};

// Controller interface: one call per control cycle, returns a rate per
// metered on-ramp (indexed in corridor order).
class Controller {
public:
    virtual ~Controller() = default;
    virtual std::string name() const = 0;
    virtual std::vector<RampDecision> cycle(const MeasurementFrame& frame) = 0;
};

class NoControlController : public Controller {
public:
    NoControlController(const FreewayNetwork& net, ControllerConfig cfg)
        : n_ramps_(net.on_ramps().size()), cfg_(cfg) {}
    std::string name() const override { return "no_control"; }
    std::vector<RampDecision> cycle(const MeasurementFrame& frame) override {
        std::vector<RampDecision> out(n_ramps_);
        for (std::size_t i = 0; i < n_ramps_; ++i) {
            out[i].occupancy = frame.on_ramp_occupancy[i];
            out[i].rate = cfg_.r_max;
            out[i].flow_command_vph = cfg_.r_max * 3600.0 / cfg_.gamma_s_per_veh;
        }
        return out;
    }

private:
    std::size_t n_ramps_;
    ControllerConfig cfg_;
};

class AlineaController : public Controller {
public:
    AlineaController(const FreewayNetwork& net, ControllerConfig cfg)
        : cfg_(cfg), q_prev_(net.on_ramps().size(), cfg.q_max) {
        cfg_.validate();
    }
    std::string name() const override { return "alinea"; }
    std::vector<RampDecision> cycle(const MeasurementFrame& frame) override {
        std::vector<RampDecision> out(q_prev_.size());
        for (std::size_t i = 0; i < q_prev_.size(); ++i) {
            double q = alinea_base(q_prev_[i], frame.on_ramp_occupancy[i], cfg_);
            q_prev_[i] = q; // clamp-then-store anti-windup
            out[i].occupancy = frame.on_ramp_occupancy[i];
            out[i].flow_command_vph = q;
            out[i].rate = flow_to_rate(q, cfg_);
        }
        return out;
    }

private:
    ControllerConfig cfg_;
    std::vector<double> q_prev_;
};

// Decentralized coordinated update. Phase 1: every ramp computes its own
// ALINEA base flow. Phase 2: each ramp reads its neighbors' base flows (one
// message exchange) and adds the coordination term. A ramp only ever touches
// its own detector and its <= 2m neighbor messages.
class CeqAlineaController : public Controller {
public:
    CeqAlineaController(const FreewayNetwork& net, ControllerConfig cfg)
        : net_(net), cfg_(cfg), q_prev_(net.on_ramps().size(), cfg.q_max) {
        cfg_.validate();
        for (const auto& id : net.on_ramps())
            weights_.push_back(compute_weights(net, id, cfg_.m, cfg_.norm_mode));
    }
    std::string name() const override { return "ceq_alinea"; }

    std::vector<RampDecision> cycle(const MeasurementFrame& frame) override {
        const std::size_t n = q_prev_.size();
        std::vector<double> base(n);
        for (std::size_t i = 0; i < n; ++i)
            base[i] = alinea_base(q_prev_[i], frame.on_ramp_occupancy[i], cfg_);
        std::vector<RampDecision> out(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<NeighborMessage> msgs;
            for (const auto& [j, w] : weights_[i])
                msgs.push_back({j, base[net_.on_ramp_index(j)]});
            double q = base[i] + coordination_term(base[i], msgs, weights_[i], cfg_.K_c);
            q = std::clamp(q, cfg_.q_min, cfg_.q_max);
            q_prev_[i] = q;
            out[i].occupancy = frame.on_ramp_occupancy[i];
            out[i].flow_command_vph = q;
            out[i].rate = flow_to_rate(q, cfg_);
        }
        return out;
    }

    const std::map<std::string, double>& weights(std::size_t ramp_idx) const {
        return weights_[ramp_idx];
    }

private:
    const FreewayNetwork& net_;
    ControllerConfig cfg_;
    std::vector<double> q_prev_;
    std::vector<std::map<std::string, double>> weights_;
};

// Multivariable baseline:
//   q[k] = q[k-1] - K1 (o[k] - o[k-1]) - K2 (o_b[k] - o_hat)
// with K1 over the full cell-occupancy vector and K2 over per-ramp
// bottleneck (detector) occupancies.
struct MetalineConfig {
    ControllerConfig base;      // bounds, gamma, cycle, o_hat
    double k1 = 1000.0;         // default gain on own detector cell
    double k2 = 4000.0;         // default gain on own bottleneck occupancy
    // Optional explicit gain rows; empty = generated defaults.
    std::vector<std::vector<double>> K1; // |ramps| x |cells|
    std::vector<std::vector<double>> K2; // |ramps| x |ramps|
};

class MetalineController : public Controller {
public:
    MetalineController(const FreewayNetwork& net, MetalineConfig cfg)
        : cfg_(std::move(cfg)), q_prev_(net.on_ramps().size(), cfg_.base.q_max) {
        cfg_.base.validate();
        const std::size_t n_ramps = net.on_ramps().size();
        const std::size_t n_cells = static_cast<std::size_t>(net.num_cells());
        if (cfg_.K1.empty()) {
            cfg_.K1.assign(n_ramps, std::vector<double>(n_cells, 0.0));
            for (std::size_t i = 0; i < n_ramps; ++i)
                cfg_.K1[i][net.ramp(net.on_ramps()[i]).detector_cell] = cfg_.k1;
        }
        if (cfg_.K2.empty()) {
            cfg_.K2.assign(n_ramps, std::vector<double>(n_ramps, 0.0));
            for (std::size_t i = 0; i < n_ramps; ++i) cfg_.K2[i][i] = cfg_.k2;
        }
        if (cfg_.K1.size() != n_ramps || cfg_.K2.size() != n_ramps)
            throw ConfigError("metaline: gain matrix row count mismatch");
        for (const auto& row : cfg_.K1)
            if (row.size() != n_cells) throw ConfigError("metaline: K1 column count mismatch");
        for (const auto& row : cfg_.K2)
            if (row.size() != n_ramps) throw ConfigError("metaline: K2 column count mismatch");
        for (const auto& id : net.on_ramps())
            detector_.push_back(net.ramp(id).detector_cell);
    }
    std::string name() const override { return "metaline"; }

    std::vector<RampDecision> cycle(const MeasurementFrame& frame) override {
        const std::size_t n = q_prev_.size();
        if (!have_prev_) {
            o_prev_ = frame.cell_occupancy;
            have_prev_ = true;
        }
        std::vector<RampDecision> out(n);
        for (std::size_t i = 0; i < n; ++i) {
            double delta = 0.0;
            for (std::size_t c = 0; c < frame.cell_occupancy.size(); ++c)
                delta -= cfg_.K1[i][c] * (frame.cell_occupancy[c] - o_prev_[c]);
            for (std::size_t j = 0; j < n; ++j)
                delta -= cfg_.K2[i][j] *
                         (frame.cell_occupancy[detector_[j]] - cfg_.base.o_hat);
            double q = std::clamp(q_prev_[i] + delta, cfg_.base.q_min, cfg_.base.q_max);
            q_prev_[i] = q;
            out[i].occupancy = frame.on_ramp_occupancy[i];
            out[i].flow_command_vph = q;
            out[i].rate = flow_to_rate(q, cfg_.base);
        }
        o_prev_ = frame.cell_occupancy;
        return out;
    }

private:
    MetalineConfig cfg_;
    std::vector<double> q_prev_;
    std::vector<int> detector_;
    std::vector<double> o_prev_;
    bool have_prev_ = false;
};

} // namespace ceqsim
