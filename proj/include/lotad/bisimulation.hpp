#ifndef LOTAD_BISIMULATION_HPP
#define LOTAD_BISIMULATION_HPP

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "lotad/reward_machine.hpp"

namespace lotad {

// Bisimilarity of the goal-labeled transition systems obtained by completing
// both machines with self-loops over the union alphabet. Both systems are
// deterministic and complete, so bisimilarity coincides with goal-label
// agreement at every pair reachable in the synchronized pair graph.
inline bool bisimilar(const RewardMachine& a, const RewardMachine& b) {
    std::set<std::string> union_events(a.alphabet().begin(), a.alphabet().end());
    union_events.insert(b.alphabet().begin(), b.alphabet().end());
    std::vector<std::pair<int, int>> ev_ids; // (id in a or -1, id in b or -1)
    for (const auto& e : union_events)
        ev_ids.emplace_back(a.has_event(e) ? a.event_id(e) : -1, b.has_event(e) ? b.event_id(e) : -1);

    std::set<std::pair<int, int>> seen;
    std::vector<std::pair<int, int>> stack{{a.initial(), b.initial()}};
    seen.insert(stack.front());
    while (!stack.empty()) {
        auto [ua, ub] = stack.back();
        stack.pop_back();
        if (a.is_goal(ua) != b.is_goal(ub)) return false;
        for (auto [ea, eb] : ev_ids) {
            int va = ea < 0 ? ua : a.step(ua, ea);
            int vb = eb < 0 ? ub : b.step(ub, eb);
            auto p = std::make_pair(va, vb);
            if (seen.insert(p).second) stack.push_back(p);
        }
    }
    return true;
}

} // namespace lotad

#endif
