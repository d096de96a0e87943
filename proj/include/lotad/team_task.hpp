#ifndef LOTAD_TEAM_TASK_HPP
#define LOTAD_TEAM_TASK_HPP

#include <set>
#include <string>
#include <vector>

#include "lotad/decomposition.hpp"
#include "lotad/projection.hpp"
#include "lotad/reward_machine.hpp"

namespace lotad {

// A decomposition prepared for rollouts: accident-avoided sub-task machines,
// per-event sharer lists and the key namespaces used by the shared policy
// table. In monolithic mode every agent runs the same machine object and the
// namespace is 0 for all agents, so table rows are shared; candidates get one
// namespace per agent slot.
struct ActiveDecomposition {
    int id = 0;
    std::vector<std::vector<std::string>> les; // per agent, sorted
    std::vector<RewardMachine> machines;       // accident-avoided sub-task RMs
    std::vector<int> key_namespace;            // per agent
    double score = 0.0;

    // per overall-event id: agents whose LES contains the event
    std::vector<std::vector<int>> sharers;
    // per overall-event id, per agent: local event id or -1
    std::vector<std::vector<int>> local_event;

    static ActiveDecomposition from_candidate(const Decomposition& d, const RewardMachine& overall) {
        ActiveDecomposition a;
        a.id = d.id;
        a.score = d.score;
        std::vector<std::vector<std::string>> all_les;
        for (const auto& l : d.les) all_les.push_back(l.events);
        a.les = all_les;
        for (size_t i = 0; i < d.subtasks.size(); ++i) {
            a.machines.push_back(
                make_accident_avoidance(d.subtasks[i], all_les, overall.alphabet()).machine);
            a.key_namespace.push_back(static_cast<int>(i) + 1);
        }
        a.index_events(overall);
        return a;
    }

    // Baseline construction: every agent is assigned the overall task.
    static ActiveDecomposition monolithic(const RewardMachine& overall, int n_agents) {
        ActiveDecomposition a;
        a.id = 0;
        for (int i = 0; i < n_agents; ++i) {
            a.les.push_back(overall.alphabet());
            a.machines.push_back(overall);
            a.key_namespace.push_back(0);
        }
        std::vector<size_t> sizes(static_cast<size_t>(n_agents), overall.alphabet().size());
        a.score = score_decomposition(sizes, 2.0, 0.5);
        a.index_events(overall);
        return a;
    }

    void index_events(const RewardMachine& overall) {
        const int ne = overall.num_events();
        const int n = static_cast<int>(machines.size());
        sharers.assign(static_cast<size_t>(ne), {});
        local_event.assign(static_cast<size_t>(ne), std::vector<int>(static_cast<size_t>(n), -1));
        for (int e = 0; e < ne; ++e) {
            const std::string& name = overall.event_name(e);
            for (int i = 0; i < n; ++i) {
                const auto& l = les[static_cast<size_t>(i)];
                if (std::find(l.begin(), l.end(), name) != l.end())
                    sharers[static_cast<size_t>(e)].push_back(i);
                if (machines[static_cast<size_t>(i)].has_event(name))
                    local_event[static_cast<size_t>(e)][static_cast<size_t>(i)] =
                        machines[static_cast<size_t>(i)].event_id(name);
            }
        }
    }
};

// Joint task progress within one episode: the overall RM configuration plus
// one configuration per sub-task RM, with completion bookkeeping.
struct TeamTaskState {
    int overall_state = 0;
    std::vector<int> sub_states;
    int overall_goal_step = -1;          // step index when the overall RM entered a goal
    std::vector<int> sub_goal_steps;     // per agent, -1 while unreached
    std::vector<int> sub_entry_steps;    // per agent, step when sigma fired (-1: never;
                                         // stays -1 for sub-tasks complete at birth)
    std::vector<char> sub_resolved;      // goal or sink reached

    static TeamTaskState init(const RewardMachine& overall, const ActiveDecomposition& d) {
        TeamTaskState t;
        t.overall_state = overall.initial();
        for (const auto& m : d.machines) t.sub_states.push_back(m.initial());
        t.sub_goal_steps.assign(d.machines.size(), -1);
        t.sub_entry_steps.assign(d.machines.size(), -1);
        t.sub_resolved.assign(d.machines.size(), 0);
        t.refresh(overall, d, 0);
        return t;
    }

    bool overall_done() const { return overall_goal_step >= 0; }
    bool all_subs_resolved() const {
        for (char c : sub_resolved)
            if (!c) return false;
        return true;
    }

    void refresh(const RewardMachine& overall, const ActiveDecomposition& d, int step_idx) {
        if (overall_goal_step < 0 && overall.is_goal(overall_state)) overall_goal_step = step_idx;
        for (size_t i = 0; i < sub_states.size(); ++i) {
            const auto& m = d.machines[i];
            int u = sub_states[i];
            if (sub_goal_steps[i] < 0 && m.is_goal(u)) sub_goal_steps[i] = step_idx;
            if (m.is_goal(u) || m.is_sink(u)) sub_resolved[i] = 1;
        }
    }
};

struct SyncOutcome {
    std::vector<int> agent_sigma; // per-agent goal-entry indicator this step
    int overall_sigma = 0;
};

// Processes one ordered batch of simultaneous events. For each event the
// overall RM always steps. A covered event moves the sub-RMs of all agents
// sharing it when each sharer has a defined transition, and none otherwise.
// An event covered by no LES drives accident-avoidance transitions of every
// sub-RM independently.
inline SyncOutcome sync_step(const RewardMachine& overall, const ActiveDecomposition& d,
                             TeamTaskState& t, const std::vector<int>& ordered_events,
                             int step_idx) {
    SyncOutcome out;
    const size_t n = d.machines.size();
    out.agent_sigma.assign(n, 0);
    for (int e : ordered_events) {
        int v = overall.step(t.overall_state, e);
        out.overall_sigma += overall.score(t.overall_state, v);
        t.overall_state = v;

        const auto& sh = d.sharers[static_cast<size_t>(e)];
        if (!sh.empty()) {
            bool all_defined = true;
            for (int i : sh) {
                int le = d.local_event[static_cast<size_t>(e)][static_cast<size_t>(i)];
                if (le < 0 ||
                    d.machines[static_cast<size_t>(i)].raw_step(t.sub_states[static_cast<size_t>(i)], le) < 0) {
                    all_defined = false;
                    break;
                }
            }
            if (all_defined) {
                for (int i : sh) {
                    int le = d.local_event[static_cast<size_t>(e)][static_cast<size_t>(i)];
                    auto& m = d.machines[static_cast<size_t>(i)];
                    int u = t.sub_states[static_cast<size_t>(i)];
                    int w = m.raw_step(u, le);
                    out.agent_sigma[static_cast<size_t>(i)] += m.score(u, w);
                    t.sub_states[static_cast<size_t>(i)] = w;
                }
            }
        } else {
            for (size_t i = 0; i < n; ++i) {
                int le = d.local_event[static_cast<size_t>(e)][i];
                if (le < 0) continue;
                auto& m = d.machines[i];
                int u = t.sub_states[i];
                int w = m.raw_step(u, le);
                if (w >= 0) {
                    out.agent_sigma[i] += m.score(u, w);
                    t.sub_states[i] = w;
                }
            }
        }
    }
    for (size_t i = 0; i < n; ++i)
        if (out.agent_sigma[i] > 0 && t.sub_entry_steps[i] < 0) t.sub_entry_steps[i] = step_idx;
    t.refresh(overall, d, step_idx);
    return out;
}

} // namespace lotad

#endif
