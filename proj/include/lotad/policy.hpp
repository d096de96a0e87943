#ifndef LOTAD_POLICY_HPP
#define LOTAD_POLICY_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <unordered_map>
#include <vector>

#include "lotad/error.hpp"
#include "lotad/grid.hpp"
#include "lotad/rng.hpp"

namespace lotad {

// Conditioning key of the shared tabular policy: own observation, selected
// decomposition, sub-task RM state (namespaced per sub-task machine) and the
// overall RM state. kNoOverall stands in when overall conditioning is off.
struct PolicyKey {
    Cell obs;
    int decomposition_id = 0;
    int sub_namespace = 0; // 0 when all agents share one machine (monolithic)
    int sub_state = 0;
    int overall_state = 0;

    static constexpr int kNoOverall = 1023;

    uint64_t packed() const {
        return (static_cast<uint64_t>(static_cast<uint32_t>(obs.row) & 0xfff) << 42) |
               (static_cast<uint64_t>(static_cast<uint32_t>(obs.col) & 0xfff) << 30) |
               (static_cast<uint64_t>(static_cast<uint32_t>(decomposition_id) & 0xff) << 22) |
               (static_cast<uint64_t>(static_cast<uint32_t>(sub_namespace) & 0xf) << 18) |
               (static_cast<uint64_t>(static_cast<uint32_t>(sub_state) & 0xff) << 10) |
               (static_cast<uint64_t>(static_cast<uint32_t>(overall_state) & 0x3ff));
    }
};

// One action-value table shared by every agent, keyed by PolicyKey. Unseen
// keys read as zero rows.
class TaskConditionedPolicy {
public:
    TaskConditionedPolicy(double epsilon, double learning_rate, double gamma)
        : epsilon_(epsilon), learning_rate_(learning_rate), gamma_(gamma) {
        if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw Error("epsilon must be in [0, 1]");
        if (!(gamma > 0.0 && gamma <= 1.0)) throw Error("gamma must be in (0, 1]");
    }

    double epsilon() const { return epsilon_; }
    void set_epsilon(double e) { epsilon_ = e; }
    double learning_rate() const { return learning_rate_; }
    double gamma() const { return gamma_; }
    size_t table_size() const { return table_.size(); }

    std::array<double, kNumActions> row(const PolicyKey& key) const {
        auto it = table_.find(key.packed());
        return it == table_.end() ? std::array<double, kNumActions>{} : it->second;
    }

    // Epsilon-greedy with uniform tie-breaking among maximal actions.
    AgentAction act(const PolicyKey& key, Rng& rng) const {
        if (epsilon_ > 0.0 && rng.next_double() < epsilon_)
            return static_cast<AgentAction>(rng.next_below(kNumActions));
        const auto q = row(key);
        double best = *std::max_element(q.begin(), q.end());
        int ties[kNumActions];
        int n = 0;
        for (int a = 0; a < kNumActions; ++a)
            if (q[static_cast<size_t>(a)] == best) ties[n++] = a;
        return static_cast<AgentAction>(ties[n == 1 ? 0 : rng.next_below(static_cast<uint64_t>(n))]);
    }

    // One-step TD update; terminal transitions bootstrap to zero.
    void q_update(const PolicyKey& key, AgentAction action, double reward, const PolicyKey& next,
                  bool terminal) {
        if (!std::isfinite(reward)) throw Error("non-finite reward in q_update");
        double target = reward;
        if (!terminal) {
            const auto nq = row(next);
            target += gamma_ * *std::max_element(nq.begin(), nq.end());
        }
        auto& q = table_[key.packed()];
        double& cell = q[static_cast<size_t>(action)];
        cell += learning_rate_ * (target - cell);
        if (!std::isfinite(cell)) throw Error("non-finite value in Q table");
    }

    // Text dump ordered by key for reproducible files.
    void dump(std::ostream& out) const {
        std::map<uint64_t, std::array<double, kNumActions>> sorted(table_.begin(), table_.end());
        out << "qtable " << sorted.size() << "\n";
        char buf[64];
        for (const auto& [k, q] : sorted) {
            out << k;
            for (double v : q) {
                std::snprintf(buf, sizeof buf, " %.17g", v);
                out << buf;
            }
            out << "\n";
        }
    }

    void load(std::istream& in) {
        std::string tag;
        size_t n = 0;
        if (!(in >> tag >> n) || tag != "qtable") throw ParseError("bad policy dump header");
        table_.clear();
        for (size_t i = 0; i < n; ++i) {
            uint64_t k;
            std::array<double, kNumActions> q{};
            if (!(in >> k)) throw ParseError("truncated policy dump");
            for (auto& v : q)
                if (!(in >> v)) throw ParseError("truncated policy dump");
            table_[k] = q;
        }
    }

private:
    double epsilon_;
    double learning_rate_;
    double gamma_;
    std::unordered_map<uint64_t, std::array<double, kNumActions>> table_;
};

} // namespace lotad

#endif
