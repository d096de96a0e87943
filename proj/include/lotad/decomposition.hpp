#ifndef LOTAD_DECOMPOSITION_HPP
#define LOTAD_DECOMPOSITION_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lotad/bisimulation.hpp"
#include "lotad/compose.hpp"
#include "lotad/projection.hpp"
#include "lotad/reward_machine.hpp"
#include "lotad/rm_text.hpp"

namespace lotad {

struct LocalEventSet {
    int agent = 0;                   // 1-based agent index
    std::vector<std::string> events; // sorted
};

// One member of the candidate set D: per-agent local event sets with the
// projected (pre accident-avoidance) sub-task RMs and the ATAD score.
struct Decomposition {
    int id = 0;
    std::vector<LocalEventSet> les;
    std::vector<SubTaskRm> subtasks;
    double score = 0.0;
};

struct GenerationConstraints {
    int k = 10;
    double w_size = 2.0;
    double w_balance = 0.5;
    std::vector<std::set<std::string>> forbidden; // per agent, may be shorter than n
    std::vector<std::set<std::string>> required;
    uint64_t max_assignments = 1000000;

    const std::set<std::string>& forbidden_for(size_t i) const {
        static const std::set<std::string> empty;
        return i < forbidden.size() ? forbidden[i] : empty;
    }
    const std::set<std::string>& required_for(size_t i) const {
        static const std::set<std::string> empty;
        return i < required.size() ? required[i] : empty;
    }
    void validate(int n_agents) const {
        for (int i = 0; i < n_agents; ++i) {
            for (const auto& e : required_for(static_cast<size_t>(i)))
                if (forbidden_for(static_cast<size_t>(i)).count(e))
                    throw ConfigError("event '" + e + "' both required and forbidden for agent " +
                                      std::to_string(i + 1));
        }
        if (k < 1) throw ConfigError("k must be >= 1");
    }
};

// ATAD scoring with the utility term fixed to zero: higher is better,
// score = -(w_size * mean(|Sigma_i|) + w_balance * population stdev(|Sigma_i|)).
inline double score_decomposition(const std::vector<size_t>& les_sizes, double w_size,
                                  double w_balance) {
    const double n = static_cast<double>(les_sizes.size());
    double mean = 0.0;
    for (size_t s : les_sizes) mean += static_cast<double>(s);
    mean /= n;
    double var = 0.0;
    for (size_t s : les_sizes) {
        double d = static_cast<double>(s) - mean;
        var += d * d;
    }
    var /= n;
    return -(w_size * mean + w_balance * std::sqrt(var));
}

inline double score_decomposition(const Decomposition& d, double w_size, double w_balance) {
    std::vector<size_t> sizes;
    sizes.reserve(d.les.size());
    for (const auto& l : d.les) sizes.push_back(l.events.size());
    return score_decomposition(sizes, w_size, w_balance);
}

// Validity per the decomposition theorem: the synchronized parallel
// composition of the (pre accident-avoidance) sub-task RMs must be bisimilar
// to the original machine.
inline bool is_valid(const RewardMachine& rm, const Decomposition& d) {
    std::vector<const RewardMachine*> ms;
    ms.reserve(d.subtasks.size());
    for (const auto& s : d.subtasks) ms.push_back(&s.machine);
    return bisimilar(parallel_compose(ms), rm);
}

namespace detail {
inline std::vector<std::vector<std::string>> les_key(const Decomposition& d) {
    std::vector<std::vector<std::string>> key;
    key.reserve(d.les.size());
    for (const auto& l : d.les) key.push_back(l.events);
    return key;
}
} // namespace detail

// Projects every agent's event set, without the validity check. Returns
// false when some projection is nondeterministic.
inline bool try_build_decomposition_projections_only(
    const RewardMachine& rm, const std::vector<std::vector<std::string>>& les_events,
    Decomposition& out) {
    Decomposition d;
    for (size_t i = 0; i < les_events.size(); ++i) {
        LocalEventSet l;
        l.agent = static_cast<int>(i) + 1;
        l.events = les_events[i];
        std::sort(l.events.begin(), l.events.end());
        d.les.push_back(std::move(l));
    }
    try {
        for (size_t i = 0; i < les_events.size(); ++i)
            d.subtasks.push_back(project(rm, d.les[i].events, "a" + std::to_string(i + 1)));
    } catch (const ProjectionError&) {
        return false;
    }
    out = std::move(d);
    return true;
}

// Builds a decomposition (projections, validity, score) from per-agent event
// sets. Returns false when some projection is nondeterministic or the result
// is invalid.
inline bool try_build_decomposition(const RewardMachine& rm,
                                    const std::vector<std::vector<std::string>>& les_events,
                                    double w_size, double w_balance, Decomposition& out) {
    Decomposition d;
    if (!try_build_decomposition_projections_only(rm, les_events, d)) return false;
    if (!is_valid(rm, d)) return false;
    d.score = score_decomposition(d, w_size, w_balance);
    out = std::move(d);
    return true;
}

// Enumerates assignments of every event to a subset of agents (possibly
// empty, possibly shared) subject to the forbidden/required sets, keeps the
// assignments whose projections are deterministic and whose decomposition is
// valid, and returns the k best by score. Ties break lexicographically on the
// LES encoding so generation is deterministic.
inline std::vector<Decomposition> enumerate_candidates(const RewardMachine& rm, int n_agents,
                                                       const GenerationConstraints& gc) {
    gc.validate(n_agents);
    const auto& alphabet = rm.alphabet();
    const int n = n_agents;

    // allowed agent-subsets per event, as bitmasks in ascending order
    std::vector<std::vector<uint32_t>> options;
    options.reserve(alphabet.size());
    for (const auto& e : alphabet) {
        std::vector<uint32_t> opts;
        uint32_t must = 0, cant = 0;
        for (int i = 0; i < n; ++i) {
            if (gc.required_for(static_cast<size_t>(i)).count(e)) must |= 1u << i;
            if (gc.forbidden_for(static_cast<size_t>(i)).count(e)) cant |= 1u << i;
        }
        for (uint32_t s = 0; s < (1u << n); ++s) {
            if ((s & must) != must) continue;
            if (s & cant) continue;
            opts.push_back(s);
        }
        if (opts.empty())
            throw NoValidDecomposition("constraints leave no assignment for event '" + e + "'");
        options.push_back(std::move(opts));
    }
    double total = 1.0;
    for (const auto& o : options) total *= static_cast<double>(o.size());
    if (total > static_cast<double>(gc.max_assignments))
        throw Error("assignment space too large (" + std::to_string(static_cast<uint64_t>(total)) +
                    " > cap " + std::to_string(gc.max_assignments) + ")");

    std::vector<Decomposition> valid;
    std::vector<size_t> idx(alphabet.size(), 0);
    std::vector<std::vector<std::string>> les(static_cast<size_t>(n));
    for (;;) {
        for (auto& l : les) l.clear();
        for (size_t ei = 0; ei < alphabet.size(); ++ei) {
            uint32_t s = options[ei][idx[ei]];
            for (int i = 0; i < n; ++i)
                if (s & (1u << i)) les[static_cast<size_t>(i)].push_back(alphabet[ei]);
        }
        Decomposition d;
        if (try_build_decomposition(rm, les, gc.w_size, gc.w_balance, d)) valid.push_back(std::move(d));
        // next assignment
        size_t pos = 0;
        while (pos < idx.size() && ++idx[pos] == options[pos].size()) idx[pos++] = 0;
        if (pos == idx.size()) break;
    }
    if (valid.empty()) throw NoValidDecomposition("no valid decomposition");

    std::sort(valid.begin(), valid.end(), [](const Decomposition& a, const Decomposition& b) {
        if (a.score != b.score) return a.score > b.score;
        return detail::les_key(a) < detail::les_key(b);
    });
    if (static_cast<int>(valid.size()) > gc.k) valid.resize(static_cast<size_t>(gc.k));
    for (size_t i = 0; i < valid.size(); ++i) valid[i].id = static_cast<int>(i);
    return valid;
}

// --- constraints file -------------------------------------------------------
//
//   forbidden: 1 A2HQ nA2HQ A3HQ nA3HQ
//   required: 1 Signal

inline GenerationConstraints parse_constraints(const std::string& text) {
    GenerationConstraints gc;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto toks = detail::tokens(line);
        if (toks.empty()) continue;
        if (toks[0] != "forbidden:" && toks[0] != "required:")
            throw ParseError("expected 'forbidden:' or 'required:'", line_no);
        if (toks.size() < 2) throw ParseError("missing agent index", line_no);
        int agent = 0;
        try {
            agent = std::stoi(toks[1]);
        } catch (...) {
            throw ParseError("bad agent index '" + toks[1] + "'", line_no);
        }
        if (agent < 1) throw ParseError("agent index must be >= 1", line_no);
        auto& dst = toks[0] == "forbidden:" ? gc.forbidden : gc.required;
        if (dst.size() < static_cast<size_t>(agent)) dst.resize(static_cast<size_t>(agent));
        for (size_t i = 2; i < toks.size(); ++i) dst[static_cast<size_t>(agent - 1)].insert(toks[i]);
    }
    return gc;
}

inline GenerationConstraints load_constraints_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ParseError("cannot open constraints file '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_constraints(ss.str());
}

// Candidate-set listing: id, per-agent LES, score, per-agent sub-RMs in the
// RM text format.
inline std::string serialize_decompositions(const std::vector<Decomposition>& ds) {
    std::ostringstream out;
    for (const auto& d : ds) {
        out << "candidate: " << d.id << "\n";
        char score_buf[32];
        std::snprintf(score_buf, sizeof score_buf, "%.6f", d.score);
        out << "score: " << score_buf << "\n";
        for (const auto& l : d.les) {
            out << "les " << l.agent << ":";
            for (const auto& e : l.events) out << ' ' << e;
            out << "\n";
        }
        for (size_t i = 0; i < d.subtasks.size(); ++i) {
            out << "subtask " << (i + 1) << ":\n";
            std::istringstream rm_text(serialize_rm(d.subtasks[i].machine));
            std::string line;
            while (std::getline(rm_text, line)) out << "  " << line << "\n";
        }
        out << "\n";
    }
    return out.str();
}

} // namespace lotad

#endif
