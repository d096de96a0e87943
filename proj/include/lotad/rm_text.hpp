#ifndef LOTAD_RM_TEXT_HPP
#define LOTAD_RM_TEXT_HPP

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "lotad/reward_machine.hpp"

namespace lotad {

// Line-based RM text format. '#' starts a comment, sections may appear in any
// order, tokens are whitespace-separated:
//
//   states: u-1 u0 u*
//   initial: u-1
//   goals: u*
//   sinks: dead          (optional)
//   alphabet: a b Signal
//   trans: u-1 a u0      (one line per transition)

namespace detail {
inline std::vector<std::string> tokens(const std::string& s) {
    std::istringstream iss(s);
    std::vector<std::string> out;
    std::string t;
    while (iss >> t) out.push_back(t);
    return out;
}
} // namespace detail

inline RewardMachine parse_rm(const std::string& text) {
    RmSpec spec;
    bool have_states = false, have_initial = false, have_alphabet = false, have_goals = false;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto toks = detail::tokens(line);
        if (toks.empty()) continue;
        const std::string head = toks.front();
        std::vector<std::string> rest(toks.begin() + 1, toks.end());
        try {
            if (head == "states:") {
                spec.states.insert(spec.states.end(), rest.begin(), rest.end());
                have_states = true;
            } else if (head == "initial:") {
                if (rest.size() != 1) throw ParseError("initial: expects exactly one state", line_no);
                spec.initial = rest.front();
                have_initial = true;
            } else if (head == "goals:") {
                spec.goals.insert(spec.goals.end(), rest.begin(), rest.end());
                have_goals = true;
            } else if (head == "sinks:") {
                spec.sinks.insert(spec.sinks.end(), rest.begin(), rest.end());
            } else if (head == "alphabet:") {
                spec.alphabet.insert(spec.alphabet.end(), rest.begin(), rest.end());
                have_alphabet = true;
            } else if (head == "trans:") {
                if (rest.size() != 3) throw ParseError("trans: expects 'from event to'", line_no);
                spec.transitions.emplace_back(rest[0], rest[1], rest[2]);
            } else {
                throw ParseError("unrecognized section '" + head + "'", line_no);
            }
        } catch (const ParseError&) {
            throw;
        }
    }
    if (!have_states) throw ParseError("missing states: section");
    if (!have_initial) throw ParseError("missing initial: section");
    if (!have_alphabet) throw ParseError("missing alphabet: section");
    (void)have_goals; // a goal-less machine is legal (accepts nothing)
    try {
        return RewardMachine::build(spec);
    } catch (const Error& e) {
        throw ParseError(e.what());
    }
}

inline std::string serialize_rm(const RewardMachine& rm) {
    std::ostringstream out;
    out << "states:";
    for (const auto& s : rm.state_names()) out << ' ' << s;
    out << "\ninitial: " << rm.state_name(rm.initial()) << "\ngoals:";
    for (int u : rm.goal_states()) out << ' ' << rm.state_name(u);
    out << '\n';
    auto sinks = rm.sink_states();
    if (!sinks.empty()) {
        out << "sinks:";
        for (int u : sinks) out << ' ' << rm.state_name(u);
        out << '\n';
    }
    out << "alphabet:";
    for (const auto& e : rm.alphabet()) out << ' ' << e;
    out << '\n';
    for (int u = 0; u < rm.num_states(); ++u) {
        for (int e = 0; e < rm.num_events(); ++e) {
            int v = rm.raw_step(u, e);
            if (v >= 0) out << "trans: " << rm.state_name(u) << ' ' << rm.event_name(e) << ' '
                            << rm.state_name(v) << '\n';
        }
    }
    return out.str();
}

inline RewardMachine load_rm_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ParseError("cannot open RM file '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_rm(ss.str());
}

} // namespace lotad

#endif
