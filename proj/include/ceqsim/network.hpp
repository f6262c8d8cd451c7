#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "ceqsim/common.hpp"

namespace ceqsim {

enum class Topology { Ring, Line };
enum class RampKind { OnRamp, OffRamp };
enum class GapScope { Global, Local };

struct RampNode {
    std::string id;
    RampKind kind = RampKind::OnRamp;
    double position_m = 0.0;
    int attach_cell = 0;
    int detector_cell = 0; // attach cell or a cell a small offset downstream
    bool metered = false;  // off-ramps never metered
};

// Directed corridor of uniform cells with ramp attachment points.
// Immutable after construction; shared read-only across runs.
class FreewayNetwork {
public:
    FreewayNetwork(Topology topology, int num_cells, double cell_length_m,
                   std::vector<RampNode> ramps)
        : topology_(topology),
          num_cells_(num_cells),
          cell_length_m_(cell_length_m),
          ramps_(std::move(ramps)) {
        if (num_cells_ <= 0) throw ConfigError("network: cell count must be positive");
        if (cell_length_m_ <= 0) throw ConfigError("network: cell length must be positive");
        validate();
        index();
    }

    Topology topology() const { return topology_; }
    int num_cells() const { return num_cells_; }
    double cell_length_m() const { return cell_length_m_; }
    double total_length_m() const { return num_cells_ * cell_length_m_; }
    const std::vector<RampNode>& ramps() const { return ramps_; }

    const RampNode& ramp(const std::string& id) const {
        auto it = by_id_.find(id);
        if (it == by_id_.end()) throw ContractError("unknown ramp id: " + id);
        return ramps_[it->second];
    }

    bool has_ramp(const std::string& id) const { return by_id_.count(id) > 0; }

    // On-ramp ids sorted by position along travel direction.
    const std::vector<std::string>& on_ramps() const { return on_ramp_order_; }

    std::vector<std::string> off_ramps() const {
        std::vector<std::string> out;
        for (const auto& r : ramps_)
            if (r.kind == RampKind::OffRamp) out.push_back(r.id);
        std::sort(out.begin(), out.end(), [this](const auto& a, const auto& b) {
            return ramp(a).position_m < ramp(b).position_m;
        });
        return out;
    }

    // Directed arc distance from n to j along travel direction.
    // Satisfies d(n,j) + d(j,n) = total length on a ring.
    double ramp_distance(const std::string& n, const std::string& j) const {
        const RampNode& a = on_ramp_checked(n);
        const RampNode& b = on_ramp_checked(j);
        if (n == j) throw ContractError("ramp_distance: distance to self is undefined");
        if (topology_ == Topology::Line) return std::abs(b.position_m - a.position_m);
        double d = b.position_m - a.position_m;
        if (d <= 0) d += total_length_m();
        return d;
    }

    // Near-side separation used for coordination weights: the smaller of
    // the two arcs on a ring, plain distance on a line.
    double proximity_distance(const std::string& n, const std::string& j) const {
        double d = ramp_distance(n, j);
        if (topology_ == Topology::Ring) d = std::min(d, total_length_m() - d);
        return d;
    }

    // The m nearest upstream then m nearest downstream on-ramps of n,
    // each side nearest-first, n excluded, off-ramps excluded.
    std::vector<std::string> neighborhood(const std::string& n, int m) const {
        const RampNode& node = on_ramp_checked(n);
        (void)node;
        if (m < 1) throw ContractError("neighborhood: m must be >= 1");
        const int count = static_cast<int>(on_ramp_order_.size());
        const int i = on_ramp_index(n);
        std::vector<std::string> upstream, downstream;
        std::vector<bool> taken(count, false);
        taken[i] = true;
        for (int k = 1; k <= m; ++k) {
            int u = i - k, d = i + k;
            if (topology_ == Topology::Ring) {
                u = ((u % count) + count) % count;
                d = d % count;
            }
            if (u >= 0 && u < count && !taken[u]) {
                taken[u] = true;
                upstream.push_back(on_ramp_order_[u]);
            }
            if (d >= 0 && d < count && !taken[d]) {
                taken[d] = true;
                downstream.push_back(on_ramp_order_[d]);
            }
        }
        std::vector<std::string> out = upstream;
        out.insert(out.end(), downstream.begin(), downstream.end());
        return out;
    }

    // Largest gap between successive on-ramps. Global scope walks the whole
    // corridor (including the wrap gap on a ring); local scope walks the
    // chain {m upstream .. n .. m downstream} without wrapping past its ends.
    double max_consecutive_gap(GapScope scope, const std::string& n = {},
                               int m = 0) const {
        if (scope == GapScope::Global) {
            const int count = static_cast<int>(on_ramp_order_.size());
            if (count < 2) throw ContractError("max_consecutive_gap: need at least 2 on-ramps");
            double best = 0.0;
            const int last = (topology_ == Topology::Ring) ? count : count - 1;
            for (int i = 0; i < last; ++i) {
                const auto& a = on_ramp_order_[i];
                const auto& b = on_ramp_order_[(i + 1) % count];
                best = std::max(best, ramp_distance(a, b));
            }
            return best;
        }
        std::vector<std::string> chain = neighborhood_chain(n, m);
        if (chain.size() < 2) throw ContractError("max_consecutive_gap: need at least 2 on-ramps in scope");
        double best = 0.0;
        for (std::size_t i = 0; i + 1 < chain.size(); ++i)
            best = std::max(best, ramp_distance(chain[i], chain[i + 1]));
        return best;
    }

    // {upstream_m, ..., upstream_1, n, downstream_1, ..., downstream_m}
    // in corridor order.
    std::vector<std::string> neighborhood_chain(const std::string& n, int m) const {
        std::vector<std::string> nb = neighborhood(n, m);
        std::vector<std::string> chain;
        // neighborhood() lists upstream nearest-first; reverse that half.
        std::size_t n_up = 0;
        for (const auto& j : nb)
            if (is_upstream_of(j, n)) ++n_up;
        for (std::size_t k = n_up; k-- > 0;) chain.push_back(nb[k]);
        chain.push_back(n);
        for (std::size_t k = n_up; k < nb.size(); ++k) chain.push_back(nb[k]);
        return chain;
    }

    int on_ramp_index(const std::string& id) const {
        auto it = std::find(on_ramp_order_.begin(), on_ramp_order_.end(), id);
        if (it == on_ramp_order_.end()) throw ContractError("not an on-ramp: " + id);
        return static_cast<int>(it - on_ramp_order_.begin());
    }

private:
    const RampNode& on_ramp_checked(const std::string& id) const {
        const RampNode& r = ramp(id);
        if (r.kind != RampKind::OnRamp) throw ContractError("not an on-ramp: " + id);
        return r;
    }

    // Whether j was classified on the upstream side of n by neighborhood().
    bool is_upstream_of(const std::string& j, const std::string& n) const {
        const int count = static_cast<int>(on_ramp_order_.size());
        const int in = on_ramp_index(n);
        const int ij = on_ramp_index(j);
        if (topology_ == Topology::Line) return ij < in;
        const int fwd = ((ij - in) % count + count) % count;  // steps downstream
        const int bwd = count - fwd;                          // steps upstream
        return bwd <= fwd; // ties go upstream, matching neighborhood()
    }

    void validate() const {
        std::map<std::string, int> ids;
        std::map<int, int> on_cells;
        for (const auto& r : ramps_) {
            if (r.id.empty()) throw ConfigError("network: empty ramp id");
            if (++ids[r.id] > 1) throw ConfigError("network: duplicate ramp id " + r.id);
            if (r.position_m < 0 || r.position_m >= total_length_m())
                throw ConfigError("network: ramp " + r.id + " position outside corridor");
            if (r.attach_cell < 0 || r.attach_cell >= num_cells_)
                throw ConfigError("network: ramp " + r.id + " attach cell out of range");
            if (r.detector_cell < 0 || r.detector_cell >= num_cells_)
                throw ConfigError("network: ramp " + r.id + " detector cell out of range");
            if (r.kind == RampKind::OnRamp && ++on_cells[r.attach_cell] > 1)
                throw ConfigError("network: two on-ramps attach to the same cell");
            if (r.kind == RampKind::OffRamp && r.metered)
                throw ConfigError("network: off-ramp " + r.id + " cannot be metered");
        }
    }

    void index() {
        for (std::size_t i = 0; i < ramps_.size(); ++i) by_id_[ramps_[i].id] = i;
        for (const auto& r : ramps_)
            if (r.kind == RampKind::OnRamp) on_ramp_order_.push_back(r.id);
        std::sort(on_ramp_order_.begin(), on_ramp_order_.end(),
                  [this](const auto& a, const auto& b) {
                      return ramp(a).position_m < ramp(b).position_m;
                  });
    }

    Topology topology_;
    int num_cells_;
    double cell_length_m_;
    std::vector<RampNode> ramps_;
    std::map<std::string, std::size_t> by_id_;
    std::vector<std::string> on_ramp_order_;
};

} // namespace ceqsim
