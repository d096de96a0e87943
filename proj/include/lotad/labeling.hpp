#ifndef LOTAD_LABELING_HPP
#define LOTAD_LABELING_HPP

#include <set>
#include <string>
#include <vector>

#include "lotad/grid.hpp"

namespace lotad {

// Events the labeling function of a spec can ever emit. Derived from the
// features present in the map so that small test maps get small vocabularies.
inline std::vector<std::string> label_vocabulary(const GridSpec& spec) {
    std::vector<std::string> out;
    switch (spec.kind) {
        case EnvKind::FourButtons:
            for (const auto& [color, cell] : spec.buttons) {
                (void)cell;
                if (color == "yellow") out.push_back("Y_B");
                else if (color == "green") out.push_back("G_B");
                else if (color == "blue") out.push_back("B_B");
                else if (color == "red") out.push_back("R_B");
            }
            break;
        case EnvKind::CoopButtons:
            if (spec.buttons.count("yellow")) out.push_back("Y_B");
            if (spec.buttons.count("green")) out.push_back("G_B");
            if (spec.buttons.count("red")) {
                out.push_back("A2_RB");
                out.push_back("A2_nRB");
                out.push_back("A3_RB");
                out.push_back("A3_nRB");
                out.push_back("R_B");
            }
            if (spec.goal_cell) out.push_back("Goal");
            break;
        case EnvKind::Repairs:
            if (spec.stations.count("HQ")) {
                for (int i = 1; i <= spec.num_agents(); ++i) {
                    out.push_back("A" + std::to_string(i) + "HQ");
                    out.push_back("nA" + std::to_string(i) + "HQ");
                }
                out.push_back("Signal");
            }
            if (spec.stations.count("yellow")) out.push_back("Y_S");
            if (spec.stations.count("red")) out.push_back("R_S");
            break;
    }
    return out;
}

// State-based labeling: events true in the current joint state (including the
// latched pressed set). The previous-state argument is part of the call
// contract for labelers that need history; none of the shipped vocabularies
// does.
inline std::set<std::string> label(const GridSpec& spec, const JointState& prev,
                                   const JointState& cur) {
    (void)prev;
    std::set<std::string> out;
    auto any_on = [&cur](Cell c) {
        for (const auto& p : cur.positions)
            if (p == c) return true;
        return false;
    };
    switch (spec.kind) {
        case EnvKind::FourButtons:
            if (cur.pressed.count("yellow")) out.insert("Y_B");
            if (cur.pressed.count("green")) out.insert("G_B");
            if (cur.pressed.count("blue")) out.insert("B_B");
            if (cur.pressed.count("red")) out.insert("R_B");
            break;
        case EnvKind::CoopButtons: {
            if (cur.pressed.count("yellow")) out.insert("Y_B");
            if (cur.pressed.count("green")) out.insert("G_B");
            if (cur.pressed.count("red")) out.insert("R_B");
            auto red = spec.buttons.find("red");
            if (red != spec.buttons.end() && spec.num_agents() >= 3) {
                out.insert(cur.positions[1] == red->second ? "A2_RB" : "A2_nRB");
                out.insert(cur.positions[2] == red->second ? "A3_RB" : "A3_nRB");
            }
            if (spec.goal_cell && any_on(*spec.goal_cell)) out.insert("Goal");
            break;
        }
        case EnvKind::Repairs: {
            auto hq = spec.stations.find("HQ");
            if (hq != spec.stations.end()) {
                int at_hq = 0;
                for (int i = 0; i < spec.num_agents(); ++i) {
                    bool on = cur.positions[static_cast<size_t>(i)] == hq->second;
                    if (on) ++at_hq;
                    out.insert((on ? "A" : "nA") + std::to_string(i + 1) + "HQ");
                }
                if (at_hq >= 2) out.insert("Signal");
            }
            auto ys = spec.stations.find("yellow");
            if (ys != spec.stations.end() && any_on(ys->second)) out.insert("Y_S");
            auto rs = spec.stations.find("red");
            if (rs != spec.stations.end() && any_on(rs->second)) out.insert("R_S");
            break;
        }
    }
    return out;
}

} // namespace lotad

#endif
