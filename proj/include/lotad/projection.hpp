#ifndef LOTAD_PROJECTION_HPP
#define LOTAD_PROJECTION_HPP

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "lotad/reward_machine.hpp"

namespace lotad {

// Sub-task RM produced by projecting an RM onto a local event set, together
// with the equivalence classes of original states behind each sub-RM state.
struct SubTaskRm {
    RewardMachine machine;
    // machine state name -> original state names ("dead" maps to empty set)
    std::map<std::string, std::set<std::string>> origin_classes;
};

namespace detail {
struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(static_cast<size_t>(n)) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int x) {
        while (parent[static_cast<size_t>(x)] != x) {
            parent[static_cast<size_t>(x)] = parent[static_cast<size_t>(parent[static_cast<size_t>(x)])];
            x = parent[static_cast<size_t>(x)];
        }
        return x;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        // smaller index wins, keeps class naming deterministic
        if (a < b) parent[static_cast<size_t>(b)] = a;
        else parent[static_cast<size_t>(a)] = b;
    }
};
} // namespace detail

// Projects rm onto a local event set. States of the result are the classes of
// the smallest equivalence relation joining u with delta(u, e) for every
// defined transition on an event outside the LES, restricted to non-sink
// states; a class-to-class transition on e in the LES exists when some
// original transition on e connects distinct states of those classes.
// Transitions into original sink states survive only on LES events and are
// redirected to a single fresh sink. Classes containing a goal state become
// absorbing goals. Throws ProjectionError when the quotient is
// nondeterministic.
inline SubTaskRm project(const RewardMachine& rm, const std::vector<std::string>& les,
                         const std::string& prefix = "a") {
    const int n = rm.num_states();
    std::vector<char> in_les(static_cast<size_t>(rm.num_events()), 0);
    for (const auto& e : les) in_les[static_cast<size_t>(rm.event_id(e))] = 1;

    detail::UnionFind uf(n);
    for (int u = 0; u < n; ++u) {
        if (rm.is_sink(u)) continue;
        for (int e = 0; e < rm.num_events(); ++e) {
            if (in_les[static_cast<size_t>(e)]) continue;
            int v = rm.raw_step(u, e);
            if (v >= 0 && !rm.is_sink(v)) uf.unite(u, v);
        }
    }

    constexpr int kDead = -2; // shared target for transitions into original sinks
    // class representative -> event -> set of targets (class rep or kDead)
    std::map<int, std::map<int, std::set<int>>> edges;
    std::map<int, std::set<int>> members; // rep -> original states
    std::set<int> goal_reps;
    const bool initial_is_sink = rm.is_sink(rm.initial());
    for (int u = 0; u < n; ++u) {
        if (rm.is_sink(u)) continue;
        int cu = uf.find(u);
        members[cu].insert(u);
        if (rm.is_goal(u)) goal_reps.insert(cu);
    }
    for (int u = 0; u < n; ++u) {
        if (rm.is_sink(u)) continue;
        int cu = uf.find(u);
        for (int e = 0; e < rm.num_events(); ++e) {
            if (!in_les[static_cast<size_t>(e)]) continue;
            int v = rm.raw_step(u, e);
            if (v < 0) continue;
            if (rm.is_sink(v)) edges[cu][e].insert(kDead);
            else if (v != u) edges[cu][e].insert(uf.find(v));
        }
    }
    // Goal classes absorb: a completed sub-task cannot be left or killed.
    for (int g : goal_reps) edges.erase(g);

    // Reachability from the initial class; multi-target edges are explored in
    // full so the determinism check below sees every reachable violation.
    std::vector<int> order;
    bool dead_reachable = false;
    if (!initial_is_sink) {
        std::set<int> seen;
        std::vector<int> queue{uf.find(rm.initial())};
        seen.insert(queue.front());
        while (!queue.empty()) {
            int c = queue.front();
            queue.erase(queue.begin());
            order.push_back(c);
            auto it = edges.find(c);
            if (it == edges.end()) continue;
            for (const auto& [e, targets] : it->second) {
                for (int t : targets) {
                    if (t == kDead) {
                        dead_reachable = true;
                    } else if (!seen.count(t)) {
                        seen.insert(t);
                        queue.push_back(t);
                    }
                }
            }
        }
        for (int c : order) {
            auto it = edges.find(c);
            if (it == edges.end()) continue;
            for (const auto& [e, targets] : it->second) {
                if (targets.size() > 1) {
                    throw ProjectionError("LES induces nondeterministic projection on event '" +
                                          rm.event_name(e) + "'");
                }
            }
        }
    }

    RmSpec spec;
    spec.alphabet = les;
    SubTaskRm out;
    const std::string dead_name = prefix + "_dead";
    std::map<int, std::string> names;
    if (initial_is_sink) {
        spec.states.push_back(dead_name);
        spec.initial = dead_name;
        spec.sinks.push_back(dead_name);
        out.origin_classes[dead_name] = {};
    } else {
        int idx = 0;
        for (int c : order) {
            std::string nm = prefix + "_c" + std::to_string(idx++);
            names[c] = nm;
            spec.states.push_back(nm);
            std::set<std::string> orig;
            for (int u : members[c]) orig.insert(rm.state_name(u));
            out.origin_classes[nm] = orig;
            if (goal_reps.count(c)) spec.goals.push_back(nm);
        }
        if (dead_reachable) {
            spec.states.push_back(dead_name);
            spec.sinks.push_back(dead_name);
            out.origin_classes[dead_name] = {};
        }
        spec.initial = names[uf.find(rm.initial())];
        for (int c : order) {
            auto it = edges.find(c);
            if (it == edges.end()) continue;
            for (const auto& [e, targets] : it->second) {
                int t = *targets.begin();
                spec.transitions.emplace_back(names[c], rm.event_name(e),
                                              t == kDead ? dead_name : names[t]);
            }
        }
    }
    out.machine = RewardMachine::build(spec);
    return out;
}

// Augments a projected sub-task RM with accident-avoidance transitions: every
// event of the full alphabet covered by no local event set sends each
// non-goal, non-sink state to a fresh sink with reward 0. Returns the input
// unchanged when every event is covered.
inline SubTaskRm make_accident_avoidance(const SubTaskRm& sub,
                                         const std::vector<std::vector<std::string>>& all_les,
                                         const std::vector<std::string>& full_alphabet) {
    std::set<std::string> covered;
    for (const auto& les : all_les) covered.insert(les.begin(), les.end());
    std::vector<std::string> uncovered;
    for (const auto& e : full_alphabet)
        if (!covered.count(e)) uncovered.push_back(e);
    if (uncovered.empty()) return sub;

    const RewardMachine& m = sub.machine;
    RmSpec spec;
    spec.states = m.state_names();
    std::string acc = "acc_dead";
    while (std::find(spec.states.begin(), spec.states.end(), acc) != spec.states.end()) acc += "_";
    spec.states.push_back(acc);
    spec.initial = m.state_name(m.initial());
    for (int u : m.goal_states()) spec.goals.push_back(m.state_name(u));
    for (int u : m.sink_states()) spec.sinks.push_back(m.state_name(u));
    spec.sinks.push_back(acc);
    spec.alphabet = m.alphabet();
    spec.alphabet.insert(spec.alphabet.end(), uncovered.begin(), uncovered.end());
    for (int u = 0; u < m.num_states(); ++u)
        for (int e = 0; e < m.num_events(); ++e) {
            int v = m.raw_step(u, e);
            if (v >= 0) spec.transitions.emplace_back(m.state_name(u), m.event_name(e), m.state_name(v));
        }
    for (int u = 0; u < m.num_states(); ++u) {
        if (m.is_goal(u) || m.is_sink(u)) continue;
        for (const auto& e : uncovered) spec.transitions.emplace_back(m.state_name(u), e, acc);
    }
    SubTaskRm out;
    out.machine = RewardMachine::build(spec);
    out.origin_classes = sub.origin_classes;
    out.origin_classes[acc] = {};
    return out;
}

} // namespace lotad

#endif
