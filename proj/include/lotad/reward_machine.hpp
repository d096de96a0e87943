#ifndef LOTAD_REWARD_MACHINE_HPP
#define LOTAD_REWARD_MACHINE_HPP

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "lotad/error.hpp"

namespace lotad {

// Raw description of a task-completion reward machine, as read from a file or
// built in code. Order of states/transitions carries no meaning.
struct RmSpec {
    std::vector<std::string> states;
    std::string initial;
    std::vector<std::string> goals;
    std::vector<std::string> sinks;
    std::vector<std::string> alphabet;
    // (from, event, to)
    std::vector<std::tuple<std::string, std::string, std::string>> transitions;
};

inline bool valid_event_name(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
    }
    return true;
}

inline bool valid_state_name(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '*')) return false;
    }
    return true;
}

// Deterministic partial Mealy machine (U, u-1, Sigma, delta, U*) with an
// optional set of rejecting sink states. Goal states have no outgoing
// transitions; undefined (state, event) pairs behave as self-loops at run
// time. sigma(u, u') = 1 exactly when u is not a goal and u' is.
// Immutable after construction.
class RewardMachine {
public:
    RewardMachine() = default;

    static RewardMachine build(const RmSpec& spec) {
        RewardMachine rm;
        if (spec.states.empty()) throw Error("reward machine needs at least one state");
        for (const auto& s : spec.states) {
            if (!valid_state_name(s)) throw Error("bad state name '" + s + "'");
            if (rm.state_index_.count(s)) throw Error("duplicate state '" + s + "'");
            rm.state_index_[s] = static_cast<int>(rm.state_names_.size());
            rm.state_names_.push_back(s);
        }
        // Alphabet is stored sorted by name; event index order is the
        // canonical processing order for simultaneous events.
        std::vector<std::string> alpha = spec.alphabet;
        std::sort(alpha.begin(), alpha.end());
        for (const auto& e : alpha) {
            if (!valid_event_name(e)) throw Error("bad event name '" + e + "'");
            if (rm.event_index_.count(e)) throw Error("duplicate event '" + e + "'");
            rm.event_index_[e] = static_cast<int>(rm.event_names_.size());
            rm.event_names_.push_back(e);
        }
        auto state_of = [&rm](const std::string& s) {
            auto it = rm.state_index_.find(s);
            if (it == rm.state_index_.end()) throw Error("unknown state '" + s + "'");
            return it->second;
        };
        rm.initial_ = state_of(spec.initial);
        rm.goal_.assign(rm.state_names_.size(), 0);
        rm.sink_.assign(rm.state_names_.size(), 0);
        for (const auto& g : spec.goals) rm.goal_[state_of(g)] = 1;
        for (const auto& s : spec.sinks) {
            int i = state_of(s);
            if (rm.goal_[i]) throw Error("state '" + s + "' cannot be both goal and sink");
            rm.sink_[i] = 1;
        }
        rm.delta_.assign(rm.state_names_.size(), std::vector<int>(rm.event_names_.size(), -1));
        for (const auto& [from, ev, to] : spec.transitions) {
            int u = state_of(from);
            auto eit = rm.event_index_.find(ev);
            if (eit == rm.event_index_.end()) throw Error("unknown event '" + ev + "'");
            int v = state_of(to);
            if (rm.goal_[u]) throw Error("goal state '" + from + "' has outgoing transition");
            int& slot = rm.delta_[u][eit->second];
            if (slot != -1) {
                throw Error("nondeterministic: duplicate transition from '" + from + "' on '" + ev + "'");
            }
            slot = v;
        }
        return rm;
    }

    int num_states() const { return static_cast<int>(state_names_.size()); }
    int num_events() const { return static_cast<int>(event_names_.size()); }
    int initial() const { return initial_; }
    bool is_goal(int u) const { return goal_[static_cast<size_t>(u)] != 0; }
    bool is_sink(int u) const { return sink_[static_cast<size_t>(u)] != 0; }
    const std::string& state_name(int u) const { return state_names_[static_cast<size_t>(u)]; }
    const std::string& event_name(int e) const { return event_names_[static_cast<size_t>(e)]; }
    const std::vector<std::string>& alphabet() const { return event_names_; }
    const std::vector<std::string>& state_names() const { return state_names_; }

    int state_id(const std::string& name) const {
        auto it = state_index_.find(name);
        if (it == state_index_.end()) throw Error("unknown symbol '" + name + "'");
        return it->second;
    }
    int event_id(const std::string& name) const {
        auto it = event_index_.find(name);
        if (it == event_index_.end()) throw Error("unknown symbol '" + name + "'");
        return it->second;
    }
    bool has_event(const std::string& name) const { return event_index_.count(name) != 0; }

    // delta(u, e) if defined, -1 otherwise.
    int raw_step(int u, int e) const { return delta_[static_cast<size_t>(u)][static_cast<size_t>(e)]; }

    // Run-time step: undefined pairs are implicit self-loops.
    int step(int u, int e) const {
        int v = raw_step(u, e);
        return v < 0 ? u : v;
    }

    int step(const std::string& state, const std::string& event) const {
        return step(state_id(state), event_id(event));
    }

    // sigma(u, u')
    int score(int u, int u_next) const { return (!is_goal(u) && is_goal(u_next)) ? 1 : 0; }

    int score(const std::string& u, const std::string& v) const { return score(state_id(u), state_id(v)); }

    // Folds step over the event set in canonical lexicographic name order.
    int step_event_set(int u, const std::set<std::string>& events) const {
        // std::set iterates in lexicographic order already.
        for (const auto& e : events) u = step(u, event_id(e));
        return u;
    }

    int step_event_ids(int u, const std::vector<int>& ordered_events) const {
        for (int e : ordered_events) u = step(u, e);
        return u;
    }

    bool accepts(const std::vector<std::set<std::string>>& trace) const {
        int u = initial_;
        for (const auto& es : trace) u = step_event_set(u, es);
        return is_goal(u);
    }

    std::vector<int> goal_states() const {
        std::vector<int> out;
        for (int u = 0; u < num_states(); ++u)
            if (is_goal(u)) out.push_back(u);
        return out;
    }

    std::vector<int> sink_states() const {
        std::vector<int> out;
        for (int u = 0; u < num_states(); ++u)
            if (is_sink(u)) out.push_back(u);
        return out;
    }

    // True if some goal state is reachable from the initial state.
    bool goal_reachable() const {
        std::vector<char> seen(static_cast<size_t>(num_states()), 0);
        std::vector<int> stack{initial_};
        seen[static_cast<size_t>(initial_)] = 1;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            if (is_goal(u)) return true;
            for (int e = 0; e < num_events(); ++e) {
                int v = raw_step(u, e);
                if (v >= 0 && !seen[static_cast<size_t>(v)]) {
                    seen[static_cast<size_t>(v)] = 1;
                    stack.push_back(v);
                }
            }
        }
        return false;
    }

    // Structural (order-insensitive) equality over names.
    friend bool operator==(const RewardMachine& a, const RewardMachine& b) {
        auto key = [](const RewardMachine& m) {
            std::set<std::string> states(m.state_names_.begin(), m.state_names_.end());
            std::set<std::string> goals, sinks;
            std::set<std::tuple<std::string, std::string, std::string>> trans;
            for (int u = 0; u < m.num_states(); ++u) {
                if (m.is_goal(u)) goals.insert(m.state_name(u));
                if (m.is_sink(u)) sinks.insert(m.state_name(u));
                for (int e = 0; e < m.num_events(); ++e) {
                    int v = m.raw_step(u, e);
                    if (v >= 0) trans.emplace(m.state_name(u), m.event_name(e), m.state_name(v));
                }
            }
            return std::make_tuple(states, m.state_name(m.initial_), goals, sinks,
                                   m.event_names_, trans);
        };
        return key(a) == key(b);
    }

private:
    std::vector<std::string> state_names_;
    std::vector<std::string> event_names_; // sorted lexicographically
    std::map<std::string, int> state_index_;
    std::map<std::string, int> event_index_;
    std::vector<std::vector<int>> delta_; // [state][event] -> state or -1
    std::vector<char> goal_;
    std::vector<char> sink_;
    int initial_ = 0;
};

} // namespace lotad

#endif
