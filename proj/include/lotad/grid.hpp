#ifndef LOTAD_GRID_HPP
#define LOTAD_GRID_HPP

#include <array>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lotad/error.hpp"
#include "lotad/rng.hpp"

namespace lotad {

struct Cell {
    int row = 0;
    int col = 0;
    auto operator<=>(const Cell&) const = default;
};

enum class AgentAction : int { Up = 0, Down = 1, Left = 2, Right = 3, NoOp = 4 };
constexpr int kNumActions = 5;

enum class EnvKind { FourButtons, CoopButtons, Repairs };

inline EnvKind env_kind_from(const std::string& s) {
    if (s == "four_buttons") return EnvKind::FourButtons;
    if (s == "coop_buttons") return EnvKind::CoopButtons;
    if (s == "repairs") return EnvKind::Repairs;
    throw ParseError("unknown env kind '" + s + "'");
}

// Immutable description of a grid Markov game: geometry, features and the
// dynamics parameters. Layouts are data; alternative maps are drop-in.
struct GridSpec {
    std::string name;
    EnvKind kind = EnvKind::FourButtons;
    int width = 0;
    int height = 0;
    std::vector<char> wall;                        // row-major
    std::vector<Cell> starts;                      // agent i starts at starts[i]
    std::map<std::string, Cell> buttons;           // color -> cell
    std::map<std::string, std::set<Cell>> regions; // color -> cells gated by that button
    std::set<Cell> hazard;
    int hazard_capacity = 1;
    std::map<std::string, Cell> stations; // "HQ", "yellow", "red"
    std::optional<Cell> goal_cell;
    double slip_prob = 0.05;
    int max_steps = 100;

    int num_agents() const { return static_cast<int>(starts.size()); }
    bool in_bounds(Cell c) const { return c.row >= 0 && c.row < height && c.col >= 0 && c.col < width; }
    bool is_wall(Cell c) const { return wall[static_cast<size_t>(c.row * width + c.col)] != 0; }

    void check() const {
        if (width <= 0 || height <= 0) throw Error("map has no cells");
        if (starts.empty()) throw Error("map defines no agent starts");
        if (hazard_capacity < 1) throw Error("hazard_capacity must be >= 1");
        if (!(slip_prob >= 0.0 && slip_prob <= 1.0)) throw Error("slip_prob must be in [0, 1]");
        auto inside = [this](Cell c, const std::string& what) {
            if (!in_bounds(c)) throw Error(what + " outside the grid");
            if (is_wall(c)) throw Error(what + " inside a wall");
        };
        for (size_t i = 0; i < starts.size(); ++i)
            inside(starts[i], "start of agent " + std::to_string(i + 1));
        for (const auto& [color, c] : buttons) inside(c, color + " button");
        for (const auto& [nm, c] : stations) inside(c, "station " + nm);
        if (goal_cell) inside(*goal_cell, "goal cell");
    }
};

struct JointState {
    std::vector<Cell> positions;
    std::set<std::string> pressed; // latched: button colors, "Signal"
    int step_count = 0;

    bool operator==(const JointState&) const = default;
};

inline JointState reset(const GridSpec& spec) {
    spec.check();
    JointState s;
    s.positions = spec.starts;
    s.step_count = 0;
    return s;
}

namespace detail {
inline Cell moved(Cell c, AgentAction a) {
    switch (a) {
        case AgentAction::Up: return {c.row - 1, c.col};
        case AgentAction::Down: return {c.row + 1, c.col};
        case AgentAction::Left: return {c.row, c.col - 1};
        case AgentAction::Right: return {c.row, c.col + 1};
        case AgentAction::NoOp: return c;
    }
    return c;
}

inline int hazard_occupancy(const GridSpec& spec, const std::vector<Cell>& pos, int except) {
    int n = 0;
    for (size_t i = 0; i < pos.size(); ++i)
        if (static_cast<int>(i) != except && spec.hazard.count(pos[i])) ++n;
    return n;
}

// End-of-step latches: pressed buttons stay pressed. The red button of the
// cooperative task needs two simultaneous occupants.
inline void apply_latches(const GridSpec& spec, JointState& s) {
    auto occupants = [&s](Cell c) {
        int n = 0;
        for (const auto& p : s.positions)
            if (p == c) ++n;
        return n;
    };
    if (spec.kind == EnvKind::FourButtons || spec.kind == EnvKind::CoopButtons) {
        for (const auto& [color, cell] : spec.buttons) {
            int need = (spec.kind == EnvKind::CoopButtons && color == "red") ? 2 : 1;
            if (occupants(cell) >= need) s.pressed.insert(color);
        }
    }
}
} // namespace detail

// Joint transition: agents resolve in index order; with probability slip_prob
// the intended action is resampled uniformly over all five actions. Moves
// into walls or off-grid, into a color region whose button is unpressed, or
// into the hazard at capacity are no-ops.
inline JointState step(const GridSpec& spec, const JointState& s,
                       const std::vector<AgentAction>& actions, Rng& rng) {
    if (actions.size() != s.positions.size()) throw Error("action list length mismatch");
    JointState next = s;
    for (size_t i = 0; i < actions.size(); ++i) {
        AgentAction a = actions[i];
        if (spec.slip_prob > 0.0 && rng.next_double() < spec.slip_prob)
            a = static_cast<AgentAction>(rng.next_below(kNumActions));
        Cell from = next.positions[i];
        Cell to = detail::moved(from, a);
        if (to == from) continue;
        if (!spec.in_bounds(to) || spec.is_wall(to)) continue;
        bool gated = false;
        for (const auto& [color, cells] : spec.regions) {
            if (cells.count(to) && !next.pressed.count(color)) {
                gated = true;
                break;
            }
        }
        if (gated) continue;
        if (spec.hazard.count(to) && !spec.hazard.count(from) &&
            detail::hazard_occupancy(spec, next.positions, static_cast<int>(i)) >= spec.hazard_capacity)
            continue;
        next.positions[i] = to;
    }
    detail::apply_latches(spec, next);
    next.step_count = s.step_count + 1;
    return next;
}

inline Cell observe(const GridSpec& spec, const JointState& s, int agent) {
    if (agent < 0 || agent >= spec.num_agents()) throw Error("agent index out of range");
    return s.positions[static_cast<size_t>(agent)];
}

// --- map files ---------------------------------------------------------------
//
// Header of key: value lines followed by a line "map:" and the grid. Glyphs:
//   '.' floor   '#' wall   digits agent starts   '~' hazard
//   four_buttons: Y G B R buttons
//   coop_buttons: Y G R buttons, y g r region cells, X goal
//   repairs:      H HQ, Y R stations, y r station-on-hazard

inline GridSpec parse_map(const std::string& text) {
    GridSpec spec;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    bool in_grid = false;
    std::vector<std::string> rows;
    bool kind_set = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!in_grid) {
            auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            std::istringstream ls(line);
            std::string key;
            if (!(ls >> key)) continue;
            if (key == "map:") {
                in_grid = true;
                continue;
            }
            std::string value;
            ls >> value;
            if (key == "name:") spec.name = value;
            else if (key == "env:") {
                spec.kind = env_kind_from(value);
                kind_set = true;
            } else if (key == "slip_prob:") spec.slip_prob = std::stod(value);
            else if (key == "hazard_capacity:") spec.hazard_capacity = std::stoi(value);
            else if (key == "max_steps:") spec.max_steps = std::stoi(value);
            else throw ParseError("unknown map header key '" + key + "'", line_no);
        } else {
            if (line.empty()) continue;
            rows.push_back(line);
        }
    }
    if (!kind_set) throw ParseError("map is missing the env: header");
    if (rows.empty()) throw ParseError("map has no grid lines");
    spec.height = static_cast<int>(rows.size());
    spec.width = static_cast<int>(rows[0].size());
    for (const auto& r : rows)
        if (static_cast<int>(r.size()) != spec.width) throw ParseError("ragged map rows");
    spec.wall.assign(static_cast<size_t>(spec.width * spec.height), 0);

    std::map<int, Cell> starts_by_digit;
    for (int r = 0; r < spec.height; ++r) {
        for (int c = 0; c < spec.width; ++c) {
            Cell cell{r, c};
            char g = rows[static_cast<size_t>(r)][static_cast<size_t>(c)];
            switch (g) {
                case '.': break;
                case '#': spec.wall[static_cast<size_t>(r * spec.width + c)] = 1; break;
                case '~': spec.hazard.insert(cell); break;
                default:
                    if (g >= '1' && g <= '9') {
                        starts_by_digit[g - '0'] = cell;
                        break;
                    }
                    if (spec.kind == EnvKind::FourButtons) {
                        if (g == 'Y') spec.buttons["yellow"] = cell;
                        else if (g == 'G') spec.buttons["green"] = cell;
                        else if (g == 'B') spec.buttons["blue"] = cell;
                        else if (g == 'R') spec.buttons["red"] = cell;
                        else throw ParseError(std::string("bad glyph '") + g + "'");
                    } else if (spec.kind == EnvKind::CoopButtons) {
                        if (g == 'Y') spec.buttons["yellow"] = cell;
                        else if (g == 'G') spec.buttons["green"] = cell;
                        else if (g == 'R') spec.buttons["red"] = cell;
                        else if (g == 'y') spec.regions["yellow"].insert(cell);
                        else if (g == 'g') spec.regions["green"].insert(cell);
                        else if (g == 'r') spec.regions["red"].insert(cell);
                        else if (g == 'X') spec.goal_cell = cell;
                        else throw ParseError(std::string("bad glyph '") + g + "'");
                    } else {
                        if (g == 'H') spec.stations["HQ"] = cell;
                        else if (g == 'Y') spec.stations["yellow"] = cell;
                        else if (g == 'R') spec.stations["red"] = cell;
                        else if (g == 'y') {
                            spec.stations["yellow"] = cell;
                            spec.hazard.insert(cell);
                        } else if (g == 'r') {
                            spec.stations["red"] = cell;
                            spec.hazard.insert(cell);
                        } else throw ParseError(std::string("bad glyph '") + g + "'");
                    }
            }
        }
    }
    for (int i = 1; i <= static_cast<int>(starts_by_digit.size()); ++i) {
        auto it = starts_by_digit.find(i);
        if (it == starts_by_digit.end()) throw ParseError("agent start digits must be 1..n");
        spec.starts.push_back(it->second);
    }
    spec.check();
    return spec;
}

inline GridSpec load_map_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ParseError("cannot open map file '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_map(ss.str());
}

} // namespace lotad

#endif
