#ifndef LOTAD_COMPOSE_HPP
#define LOTAD_COMPOSE_HPP

#include <map>
#include <set>
#include <string>
#include <vector>

#include "lotad/reward_machine.hpp"

namespace lotad {

// Synchronized parallel composition. The product ranges over the union
// alphabet; on event e every machine with e in its alphabet moves exactly
// when each of them has a defined transition on e from its current component,
// otherwise no component moves. Machines without e keep their component. A
// product state is a goal when every component is a goal. Only tuples
// reachable from the tuple of initials are constructed.
inline RewardMachine parallel_compose(const std::vector<const RewardMachine*>& machines) {
    if (machines.empty()) throw Error("parallel_compose needs at least one machine");
    std::set<std::string> union_events;
    for (const auto* m : machines)
        union_events.insert(m->alphabet().begin(), m->alphabet().end());
    std::vector<std::string> events(union_events.begin(), union_events.end());

    const size_t k = machines.size();
    // per union event, per machine: local event id or -1
    std::vector<std::vector<int>> local(events.size(), std::vector<int>(k, -1));
    for (size_t ei = 0; ei < events.size(); ++ei)
        for (size_t mi = 0; mi < k; ++mi)
            if (machines[mi]->has_event(events[ei])) local[ei][mi] = machines[mi]->event_id(events[ei]);

    std::map<std::vector<int>, int> index;
    std::vector<std::vector<int>> tuples;
    std::vector<int> init(k);
    for (size_t mi = 0; mi < k; ++mi) init[mi] = machines[mi]->initial();
    index[init] = 0;
    tuples.push_back(init);

    RmSpec spec;
    spec.alphabet = events;
    auto name_of = [](int i) { return "q" + std::to_string(i); };

    for (size_t qi = 0; qi < tuples.size(); ++qi) {
        const std::vector<int> cur = tuples[qi];
        bool cur_goal = true;
        for (size_t mi = 0; mi < k; ++mi) cur_goal = cur_goal && machines[mi]->is_goal(cur[mi]);
        if (cur_goal) continue; // goal tuples absorb
        for (size_t ei = 0; ei < events.size(); ++ei) {
            std::vector<int> nxt = cur;
            bool all_defined = true;
            bool any_sharer = false;
            for (size_t mi = 0; mi < k; ++mi) {
                int le = local[ei][mi];
                if (le < 0) continue;
                any_sharer = true;
                int v = machines[mi]->raw_step(cur[mi], le);
                if (v < 0) {
                    all_defined = false;
                    break;
                }
                nxt[mi] = v;
            }
            if (!any_sharer || !all_defined) continue;
            auto it = index.find(nxt);
            int ti;
            if (it == index.end()) {
                ti = static_cast<int>(tuples.size());
                index[nxt] = ti;
                tuples.push_back(nxt);
            } else {
                ti = it->second;
            }
            spec.transitions.emplace_back(name_of(static_cast<int>(qi)), events[ei], name_of(ti));
        }
    }
    for (size_t qi = 0; qi < tuples.size(); ++qi) {
        spec.states.push_back(name_of(static_cast<int>(qi)));
        bool goal = true;
        for (size_t mi = 0; mi < k; ++mi) goal = goal && machines[mi]->is_goal(tuples[qi][mi]);
        if (goal) spec.goals.push_back(name_of(static_cast<int>(qi)));
    }
    spec.initial = name_of(0);
    return RewardMachine::build(spec);
}

inline RewardMachine parallel_compose(const std::vector<RewardMachine>& machines) {
    std::vector<const RewardMachine*> ptrs;
    ptrs.reserve(machines.size());
    for (const auto& m : machines) ptrs.push_back(&m);
    return parallel_compose(ptrs);
}

} // namespace lotad

#endif
