#ifndef LOTAD_HARNESS_HPP
#define LOTAD_HARNESS_HPP

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "lotad/config.hpp"
#include "lotad/grid.hpp"
#include "lotad/labeling.hpp"
#include "lotad/svg.hpp"
#include "lotad/training.hpp"

namespace lotad {

namespace detail {

inline std::string fmt_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline std::string les_desc(const std::vector<std::vector<std::string>>& les) {
    std::string out;
    for (size_t i = 0; i < les.size(); ++i) {
        out += "a" + std::to_string(i + 1) + "{";
        for (size_t j = 0; j < les[i].size(); ++j) {
            if (j) out += ",";
            out += les[i][j];
        }
        out += "}";
        if (i + 1 < les.size()) out += " ";
    }
    return out;
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write '" + path + "'");
    f << content;
}

// rolling completion rate over the trailing `window` episodes
inline std::vector<double> rolling_rate(const std::vector<char>& completed, int window) {
    std::vector<double> out(completed.size(), 0.0);
    int in_window = 0;
    for (size_t i = 0; i < completed.size(); ++i) {
        in_window += completed[i];
        if (i >= static_cast<size_t>(window)) in_window -= completed[i - static_cast<size_t>(window)];
        int denom = static_cast<int>(std::min(i + 1, static_cast<size_t>(window)));
        out[i] = static_cast<double>(in_window) / denom;
    }
    return out;
}

} // namespace detail

struct SeedSummary {
    uint64_t seed = 0;
    int best_arm = 0;
    double tail_completion = 0.0; // mean over the final min(1000, episodes)
    long episodes_to_090 = -1;    // rolling-100 completion >= 0.9, -1 if never
    double final_best = 0.0;      // final best-so-far discounted overall reward
    std::vector<double> best_curve;
    std::vector<char> completed;
    double wall_ms = 0.0;
};

struct RunSummary {
    int num_arms = 0;
    int num_agents = 0;
    std::vector<std::string> arm_descs;
    std::vector<std::vector<std::vector<std::string>>> arm_les; // per arm, per agent
    std::vector<SeedSummary> seeds;

    double tail_completion_mean() const {
        double s = 0.0;
        for (const auto& x : seeds) s += x.tail_completion;
        return seeds.empty() ? 0.0 : s / static_cast<double>(seeds.size());
    }
};

// Environment/RM compatibility: everything the labeler can emit must be in
// the machine's alphabet.
inline void check_vocabulary(const GridSpec& spec, const RewardMachine& rm) {
    std::vector<std::string> missing;
    for (const auto& e : label_vocabulary(spec))
        if (!rm.has_event(e)) missing.push_back(e);
    if (!missing.empty()) {
        std::string msg = "RM alphabet is missing labeler events:";
        for (const auto& e : missing) msg += " " + e;
        throw ConfigError(msg);
    }
}

inline GridSpec load_spec_for(const ExperimentConfig& cfg) {
    GridSpec spec = load_map_file(cfg.env_map);
    if (cfg.slip_prob) spec.slip_prob = *cfg.slip_prob;
    return spec;
}

namespace detail {

struct SeedRun {
    TrainResult result;
    double wall_ms = 0.0;
};

inline SeedRun run_one_seed(const GridSpec& spec, const RewardMachine& rm, TrainParams params) {
    SeedRun out;
    auto t0 = std::chrono::steady_clock::now();
    out.result = train(spec, rm, params);
    out.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

inline std::string train_log_csv(const TrainResult& r) {
    std::ostringstream o;
    const int n = r.num_agents;
    const int arms = static_cast<int>(r.arms.size());
    o << "episode,selected,overall_completed,completion_step,overall_reward";
    for (int i = 1; i <= n; ++i) o << ",sub_reward_" << i;
    for (int a = 0; a < arms; ++a) o << ",visits_" << a;
    for (int a = 0; a < arms; ++a) o << ",score_" << a;
    o << "\n";
    for (const auto& row : r.rows) {
        o << row.episode << ',' << row.selected << ',' << (row.overall_completed ? 1 : 0) << ','
          << row.completion_step << ',' << fmt_num(row.overall_reward);
        for (double v : row.sub_rewards) o << ',' << fmt_num(v);
        for (long v : row.visits) o << ',' << v;
        for (double v : row.arm_scores) o << ',' << fmt_num(v);
        o << "\n";
    }
    return o.str();
}

inline std::string selector_trace_csv(const TrainResult& r) {
    std::ostringstream o;
    const int arms = static_cast<int>(r.arms.size());
    o << "episode,selected";
    for (int a = 0; a < arms; ++a) o << ",visits_" << a;
    for (int a = 0; a < arms; ++a) o << ",score_" << a;
    for (int a = 0; a < arms; ++a) o << ",raw_value_" << a;
    for (int a = 0; a < arms; ++a) o << ",bonus_" << a;
    o << "\n";
    for (const auto& row : r.rows) {
        o << row.episode << ',' << row.selected;
        for (long v : row.visits) o << ',' << v;
        for (double v : row.arm_scores) o << ',' << fmt_num(v);
        for (double v : row.arm_raw) o << ',' << fmt_num(v);
        for (double v : row.arm_bonus) o << ',' << fmt_num(v);
        o << "\n";
    }
    return o.str();
}

inline SeedSummary summarize_seed(uint64_t seed, const SeedRun& sr) {
    SeedSummary s;
    s.seed = seed;
    s.best_arm = sr.result.best_arm;
    s.wall_ms = sr.wall_ms;
    double best = 0.0;
    for (const auto& row : sr.result.rows) {
        best = std::max(best, row.overall_reward);
        s.best_curve.push_back(best);
        s.completed.push_back(row.overall_completed ? 1 : 0);
    }
    s.final_best = best;
    const size_t n = s.completed.size();
    const size_t tail = std::min<size_t>(1000, n);
    if (tail > 0) {
        long c = 0;
        for (size_t i = n - tail; i < n; ++i) c += s.completed[i];
        s.tail_completion = static_cast<double>(c) / static_cast<double>(tail);
    }
    auto rates = rolling_rate(s.completed, 100);
    for (size_t i = 99; i < rates.size(); ++i) {
        if (rates[i] >= 0.9) {
            s.episodes_to_090 = static_cast<long>(i);
            break;
        }
    }
    return s;
}

} // namespace detail

// Trains every seed (in parallel worker threads), writes per-seed and
// aggregate CSVs, the SVG chart, policy dumps and a text summary under
// cfg.out. Output bytes are a pure function of (config, seeds); wall-clock
// timings go to a separate timings.csv.
inline RunSummary run(const ExperimentConfig& cfg, bool write_policies = true) {
    cfg.validate();
    GridSpec spec = load_spec_for(cfg);
    RewardMachine rm = load_rm_file(cfg.rm);
    check_vocabulary(spec, rm);
    GenerationConstraints gc;
    if (!cfg.constraints.empty()) gc = load_constraints_file(cfg.constraints);
    gc.validate(spec.num_agents());

    std::vector<detail::SeedRun> runs(cfg.seeds.size());
    std::vector<std::exception_ptr> errors(cfg.seeds.size());
    std::vector<std::thread> workers;
    for (size_t i = 0; i < cfg.seeds.size(); ++i) {
        workers.emplace_back([&, i] {
            try {
                TrainParams p = cfg.train_params(cfg.seeds[i], spec.max_steps);
                p.constraints.forbidden = gc.forbidden;
                p.constraints.required = gc.required;
                runs[i] = detail::run_one_seed(spec, rm, p);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        });
    }
    for (auto& w : workers) w.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    std::filesystem::create_directories(cfg.out);
    RunSummary summary;
    summary.num_arms = static_cast<int>(runs.front().result.arms.size());
    summary.num_agents = runs.front().result.num_agents;
    for (const auto& arm : runs.front().result.arms) {
        summary.arm_descs.push_back("score " + detail::fmt_num(arm.score) + " | " +
                                    detail::les_desc(arm.les));
        summary.arm_les.push_back(arm.les);
    }

    std::ostringstream timings;
    timings << "seed,episodes,wall_ms\n";
    for (size_t i = 0; i < cfg.seeds.size(); ++i) {
        const auto& sr = runs[i];
        const std::string tag = std::to_string(cfg.seeds[i]);
        detail::write_file(cfg.out + "/train_log_seed" + tag + ".csv",
                           detail::train_log_csv(sr.result));
        detail::write_file(cfg.out + "/selector_trace_seed" + tag + ".csv",
                           detail::selector_trace_csv(sr.result));
        if (write_policies) {
            std::ofstream pf(cfg.out + "/policy_seed" + tag + ".txt", std::ios::binary);
            sr.result.policy.dump(pf);
        }
        summary.seeds.push_back(detail::summarize_seed(cfg.seeds[i], sr));
        timings << tag << ',' << sr.result.rows.size() << ','
                << detail::fmt_num(sr.wall_ms) << "\n";
    }
    detail::write_file(cfg.out + "/timings.csv", timings.str());

    if (!runs.front().result.candidates.empty())
        detail::write_file(cfg.out + "/decompositions.txt",
                           serialize_decompositions(runs.front().result.candidates));

    // aggregate curve: mean/stdev of best-so-far, mean rolling completion
    size_t max_len = 0;
    for (const auto& s : summary.seeds) max_len = std::max(max_len, s.best_curve.size());
    std::ostringstream agg;
    agg << "episode,best_mean,best_std,completion_mean\n";
    std::vector<std::vector<double>> rates;
    for (const auto& s : summary.seeds) rates.push_back(detail::rolling_rate(s.completed, 100));
    std::vector<double> best_mean_curve;
    for (size_t e = 0; e < max_len; ++e) {
        double m = 0.0, m2 = 0.0, cr = 0.0;
        for (size_t i = 0; i < summary.seeds.size(); ++i) {
            double v = e < summary.seeds[i].best_curve.size() ? summary.seeds[i].best_curve[e] : 0.0;
            m += v;
            m2 += v * v;
            cr += e < rates[i].size() ? rates[i][e] : 0.0;
        }
        const double n = static_cast<double>(summary.seeds.size());
        m /= n;
        m2 = m2 / n - m * m;
        cr /= n;
        agg << e << ',' << detail::fmt_num(m) << ',' << detail::fmt_num(std::sqrt(std::max(0.0, m2)))
            << ',' << detail::fmt_num(cr) << "\n";
        best_mean_curve.push_back(m);
    }
    detail::write_file(cfg.out + "/aggregate.csv", agg.str());

    std::vector<SvgSeries> series;
    series.push_back({"best discounted reward (mean)", "#1f6fb2", best_mean_curve});
    detail::write_file(cfg.out + "/curve.svg",
                       render_line_chart("best discounted reward, mean over seeds", "episode",
                                         "discounted reward", series));

    std::ostringstream sum;
    sum << "# lotad run summary\n\nconfig:\n";
    std::istringstream cfg_lines(cfg.describe());
    std::string line;
    while (std::getline(cfg_lines, line)) sum << "  " << line << "\n";
    sum << "\narms: " << summary.num_arms << "\n";
    for (size_t a = 0; a < summary.arm_descs.size(); ++a)
        sum << "arm " << a << ": " << summary.arm_descs[a] << "\n";
    sum << "\n";
    for (const auto& s : summary.seeds) {
        sum << "seed " << s.seed << ": best_arm " << s.best_arm << " tail_completion "
            << detail::fmt_num(s.tail_completion) << " episodes_to_090 " << s.episodes_to_090
            << " final_best " << detail::fmt_num(s.final_best) << "\n";
    }
    sum << "\naggregate: tail_completion_mean " << detail::fmt_num(summary.tail_completion_mean())
        << "\n";
    detail::write_file(cfg.out + "/summary.txt", sum.str());
    return summary;
}

struct SweepEntry {
    int k = 0;
    int arms = 0;
    bool truncated = false; // fewer valid candidates than requested
    double tail_completion_mean = 0.0;
    std::vector<std::vector<std::vector<std::string>>> arm_les;
};

// One run per k with shared seeds; candidate sets are nested by the
// deterministic ranking. Emits a comparison table under cfg.out.
inline std::vector<SweepEntry> sweep_k(const ExperimentConfig& cfg, const std::vector<int>& ks) {
    std::vector<SweepEntry> entries;
    for (int k : ks) {
        if (k < 1) throw ConfigError("sweep k values must be >= 1");
        ExperimentConfig sub = cfg;
        sub.k = k;
        sub.out = cfg.out + "/k" + std::to_string(k);
        RunSummary rs = run(sub, false);
        SweepEntry e;
        e.k = k;
        e.arms = rs.num_arms;
        e.truncated = rs.num_arms < k;
        e.tail_completion_mean = rs.tail_completion_mean();
        e.arm_les = rs.arm_les;
        entries.push_back(std::move(e));
    }
    std::ostringstream table;
    table << "k,arms,truncated,tail_completion_mean,nested_prefix_of_next\n";
    for (size_t i = 0; i < entries.size(); ++i) {
        bool nested = true;
        if (i + 1 < entries.size()) {
            const auto& a = entries[i].arm_les;
            const auto& b = entries[i + 1].arm_les;
            if (a.size() > b.size()) nested = false;
            for (size_t j = 0; nested && j < a.size(); ++j) nested = a[j] == b[j];
        }
        table << entries[i].k << ',' << entries[i].arms << ',' << (entries[i].truncated ? 1 : 0)
              << ',' << detail::fmt_num(entries[i].tail_completion_mean) << ','
              << (nested ? 1 : 0) << "\n";
    }
    std::filesystem::create_directories(cfg.out);
    detail::write_file(cfg.out + "/sweep_summary.csv", table.str());
    return entries;
}

// Library-side trace-enumeration confirmation used by the validate command:
// co-simulates the synchronized team against the machine over every event
// string up to max_len (joint configurations explored breadth-first).
inline bool confirm_by_trace_enumeration(const RewardMachine& rm, const Decomposition& d,
                                         int max_len) {
    const size_t n = d.subtasks.size();
    std::vector<std::vector<std::pair<int, int>>> sharer_events(
        static_cast<size_t>(rm.num_events()));
    for (int e = 0; e < rm.num_events(); ++e) {
        const std::string& name = rm.event_name(e);
        for (size_t i = 0; i < n; ++i) {
            const auto& ev = d.les[i].events;
            if (std::find(ev.begin(), ev.end(), name) != ev.end())
                sharer_events[static_cast<size_t>(e)].emplace_back(
                    static_cast<int>(i), d.subtasks[i].machine.event_id(name));
        }
    }
    std::set<std::vector<int>> seen;
    std::vector<int> init;
    init.push_back(rm.initial());
    for (const auto& s : d.subtasks) init.push_back(s.machine.initial());
    std::vector<std::vector<int>> frontier{init};
    seen.insert(init);
    for (int depth = 0; depth <= max_len; ++depth) {
        std::vector<std::vector<int>> next;
        for (const auto& cfg : frontier) {
            bool team_goal = true;
            for (size_t i = 0; i < n; ++i)
                team_goal = team_goal && d.subtasks[i].machine.is_goal(cfg[i + 1]);
            if (rm.is_goal(cfg[0]) != team_goal) return false;
            if (depth == max_len) continue;
            for (int e = 0; e < rm.num_events(); ++e) {
                std::vector<int> c = cfg;
                c[0] = rm.step(c[0], e);
                const auto& sh = sharer_events[static_cast<size_t>(e)];
                bool all_defined = !sh.empty();
                for (const auto& [i, le] : sh)
                    all_defined = all_defined &&
                                  d.subtasks[static_cast<size_t>(i)].machine.raw_step(
                                      c[static_cast<size_t>(i) + 1], le) >= 0;
                if (all_defined)
                    for (const auto& [i, le] : sh)
                        c[static_cast<size_t>(i) + 1] = d.subtasks[static_cast<size_t>(i)].machine.raw_step(
                            c[static_cast<size_t>(i) + 1], le);
                if (seen.insert(c).second) next.push_back(std::move(c));
            }
        }
        frontier = std::move(next);
        if (frontier.empty()) break;
    }
    return true;
}

// Candidate report for the validate subcommand: every candidate's LESs,
// score, validity verdict and (for small alphabets) the brute-force
// trace-equivalence confirmation.
inline std::string validate_decompositions(const RewardMachine& rm, int n_agents,
                                           GenerationConstraints gc) {
    std::ostringstream out;
    if (!rm.goal_reachable())
        out << "warning: task unsatisfiable by any trace (no goal reachable)\n";
    auto cands = enumerate_candidates(rm, n_agents, gc);
    out << "candidates: " << cands.size();
    if (static_cast<int>(cands.size()) < gc.k)
        out << " (fewer than k=" << gc.k << " valid decompositions exist)";
    out << "\n";
    const bool small = rm.num_events() <= 6;
    if (!small) out << "alphabet larger than 6 events: trace-enumeration check skipped\n";
    for (const auto& c : cands) {
        out << "candidate " << c.id << ": score " << detail::fmt_num(c.score) << "\n";
        for (const auto& l : c.les) {
            out << "  agent " << l.agent << " LES:";
            for (const auto& e : l.events) out << ' ' << e;
            out << "\n";
        }
        bool valid = is_valid(rm, c);
        out << "  valid: " << (valid ? "yes" : "no");
        if (small)
            out << "  trace-check: "
                << (confirm_by_trace_enumeration(rm, c, 2 * rm.num_states()) ? "confirmed"
                                                                             : "MISMATCH");
        out << "\n";
    }
    return out.str();
}

struct EvalArmResult {
    int arm = 0;
    double completion_rate = 0.0;
    double mean_reward = 0.0; // mean discounted overall reward
    double mean_steps = 0.0;  // over completed episodes
};

// Frozen-policy rollouts (epsilon = 0, no learning) for every arm.
inline std::vector<EvalArmResult> eval_policy(const ExperimentConfig& cfg,
                                              const std::string& policy_path, uint64_t seed) {
    cfg.validate();
    GridSpec spec = load_spec_for(cfg);
    RewardMachine rm = load_rm_file(cfg.rm);
    check_vocabulary(spec, rm);
    TrainParams p = cfg.train_params(seed, spec.max_steps);
    if (!cfg.constraints.empty()) {
        auto gc = load_constraints_file(cfg.constraints);
        p.constraints.forbidden = gc.forbidden;
        p.constraints.required = gc.required;
    }
    Rng cand_rng(seed);
    auto candidates = build_candidates(rm, spec.num_agents(), p, cand_rng);
    std::vector<ActiveDecomposition> arms;
    if (p.mode == Mode::Monolithic) {
        arms.push_back(ActiveDecomposition::monolithic(rm, spec.num_agents()));
    } else {
        for (const auto& c : candidates) arms.push_back(ActiveDecomposition::from_candidate(c, rm));
    }
    TaskConditionedPolicy policy(0.0, p.learning_rate, p.gamma);
    std::ifstream pf(policy_path);
    if (!pf) throw ConfigError("cannot open policy dump '" + policy_path + "'");
    policy.load(pf);

    std::vector<EvalArmResult> results;
    RewardShaping shaping{1.0, p.overall_bonus, p.gamma};
    for (const auto& arm : arms) {
        Rng rng(seed ^ (0x9e3779b97f4a7c15ULL + static_cast<uint64_t>(arm.id)));
        EvalArmResult r;
        r.arm = arm.id;
        long completed = 0, step_sum = 0;
        double reward_sum = 0.0;
        for (int ep = 0; ep < cfg.eval_episodes; ++ep) {
            auto res = run_episode(spec, rm, arm, policy, shaping, p.max_steps, rng,
                                   p.condition_on_overall, p.shuffle_events, false, nullptr);
            if (res.overall_completed) {
                ++completed;
                step_sum += res.completion_step;
                reward_sum += std::pow(p.gamma, res.completion_step);
            }
        }
        r.completion_rate = static_cast<double>(completed) / cfg.eval_episodes;
        r.mean_reward = reward_sum / cfg.eval_episodes;
        r.mean_steps = completed ? static_cast<double>(step_sum) / static_cast<double>(completed) : -1.0;
        results.push_back(r);
    }
    return results;
}

// Runs one episode and renders its event/RM-state trace.
inline std::string replay(const ExperimentConfig& cfg, uint64_t seed, int arm_id,
                          const std::string& policy_path) {
    cfg.validate();
    GridSpec spec = load_spec_for(cfg);
    RewardMachine rm = load_rm_file(cfg.rm);
    check_vocabulary(spec, rm);
    TrainParams p = cfg.train_params(seed, spec.max_steps);
    if (!cfg.constraints.empty()) {
        auto gc = load_constraints_file(cfg.constraints);
        p.constraints.forbidden = gc.forbidden;
        p.constraints.required = gc.required;
    }
    Rng cand_rng(seed);
    auto candidates = build_candidates(rm, spec.num_agents(), p, cand_rng);
    std::vector<ActiveDecomposition> arms;
    if (p.mode == Mode::Monolithic) {
        arms.push_back(ActiveDecomposition::monolithic(rm, spec.num_agents()));
    } else {
        for (const auto& c : candidates) arms.push_back(ActiveDecomposition::from_candidate(c, rm));
    }
    if (arm_id < 0 || arm_id >= static_cast<int>(arms.size()))
        throw ConfigError("arm " + std::to_string(arm_id) + " out of range (have " +
                          std::to_string(arms.size()) + ")");
    TaskConditionedPolicy policy(policy_path.empty() ? p.epsilon : 0.0, p.learning_rate, p.gamma);
    if (!policy_path.empty()) {
        std::ifstream pf(policy_path);
        if (!pf) throw ConfigError("cannot open policy dump '" + policy_path + "'");
        policy.load(pf);
    }
    Rng rng(seed);
    EpisodeTrace trace;
    RewardShaping shaping{1.0, p.overall_bonus, p.gamma};
    auto res = run_episode(spec, rm, arms[static_cast<size_t>(arm_id)], policy, shaping,
                           p.max_steps, rng, p.condition_on_overall, p.shuffle_events, false,
                           &trace);
    std::ostringstream out;
    out << "arm " << arm_id << " (" << detail::les_desc(arms[static_cast<size_t>(arm_id)].les)
        << ")\n";
    for (const auto& st : trace.steps) {
        out << "step " << st.step << " | pos";
        for (const auto& c : st.positions) out << " (" << c.row << "," << c.col << ")";
        out << " | events";
        if (st.events.empty()) out << " -";
        for (const auto& e : st.events) out << ' ' << e;
        out << " | overall " << st.overall_state << " | subs";
        for (const auto& s : st.sub_states) out << ' ' << s;
        out << " | r";
        for (double r : st.rewards) out << ' ' << detail::fmt_num(r);
        out << "\n";
    }
    out << (res.overall_completed
                ? "completed at step " + std::to_string(res.completion_step)
                : std::string("not completed"))
        << "\n";
    return out.str();
}

} // namespace lotad

#endif
