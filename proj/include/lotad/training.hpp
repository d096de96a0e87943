#ifndef LOTAD_TRAINING_HPP
#define LOTAD_TRAINING_HPP

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "lotad/decomposition.hpp"
#include "lotad/grid.hpp"
#include "lotad/labeling.hpp"
#include "lotad/policy.hpp"
#include "lotad/reward_machine.hpp"
#include "lotad/rng.hpp"
#include "lotad/selection.hpp"
#include "lotad/team_task.hpp"

namespace lotad {

struct RewardShaping {
    double sub_goal_reward = 1.0;
    double overall_bonus = 0.1;
    double gamma = 0.95;
};

struct EpisodeResult {
    std::vector<double> sub_discounted; // gamma^(completion step), 0 if unreached
    std::vector<int> sub_indicator;
    // Selector feed: gamma^(step sigma fired), 0 when the sub-RM never
    // transitioned into its goal. A sub-task complete at birth reports 1.0 in
    // sub_discounted but contributes no sigma reward, so it cannot inflate a
    // decomposition's value estimate.
    std::vector<double> sub_entry_discounted;
    std::vector<int> sub_entry_indicator;
    bool overall_completed = false;
    int completion_step = -1;
};

struct EpisodeStepRecord {
    int step = 0;
    std::vector<Cell> positions;
    std::vector<std::string> events;
    std::string overall_state;
    std::vector<std::string> sub_states;
    std::vector<double> rewards;
};

struct EpisodeTrace {
    std::vector<EpisodeStepRecord> steps;
};

namespace detail {
inline std::vector<int> ordered_event_ids(const RewardMachine& overall,
                                          const std::set<std::string>& events, bool shuffle,
                                          Rng& rng) {
    std::vector<int> ids;
    ids.reserve(events.size());
    for (const auto& e : events) ids.push_back(overall.event_id(e)); // set order == lex order
    if (shuffle) rng.shuffle(ids);
    return ids;
}

inline PolicyKey make_key(Cell obs, const ActiveDecomposition& d, const TeamTaskState& t, int agent,
                          bool condition_on_overall) {
    PolicyKey k;
    k.obs = obs;
    k.decomposition_id = d.id;
    k.sub_namespace = d.key_namespace[static_cast<size_t>(agent)];
    k.sub_state = t.sub_states[static_cast<size_t>(agent)];
    k.overall_state = condition_on_overall ? t.overall_state : PolicyKey::kNoOverall;
    return k;
}
} // namespace detail

// One synchronized rollout. Every agent acts each step (also after its own
// sub-goal); labels feed the overall RM and the sub-task RMs through
// sync_step; each agent receives sigma_i * sub_goal_reward plus
// sigma_overall * overall_bonus and performs a one-step TD update. The
// episode ends on overall goal entry, when every sub-RM sits in a goal or
// sink, or at max_steps.
inline EpisodeResult run_episode(const GridSpec& spec, const RewardMachine& overall,
                                 const ActiveDecomposition& d, TaskConditionedPolicy& policy,
                                 const RewardShaping& shaping, int max_steps, Rng& rng,
                                 bool condition_on_overall = true, bool shuffle_events = false,
                                 bool learn = true, EpisodeTrace* trace = nullptr) {
    const int n = spec.num_agents();
    if (static_cast<size_t>(n) != d.machines.size())
        throw Error("decomposition size does not match agent count");

    JointState cur = reset(spec);
    TeamTaskState tts = TeamTaskState::init(overall, d);
    {
        auto ev0 = label(spec, cur, cur);
        sync_step(overall, d, tts, detail::ordered_event_ids(overall, ev0, shuffle_events, rng), 0);
    }
    bool terminal = tts.overall_done() || tts.all_subs_resolved();
    int t = 0;
    std::vector<PolicyKey> keys(static_cast<size_t>(n));
    std::vector<AgentAction> actions(static_cast<size_t>(n));
    while (!terminal && t < max_steps) {
        ++t;
        for (int i = 0; i < n; ++i) {
            keys[static_cast<size_t>(i)] =
                detail::make_key(observe(spec, cur, i), d, tts, i, condition_on_overall);
            actions[static_cast<size_t>(i)] = policy.act(keys[static_cast<size_t>(i)], rng);
        }
        JointState nxt = step(spec, cur, actions, rng);
        auto events = label(spec, cur, nxt);
        auto sync = sync_step(overall, d, tts,
                              detail::ordered_event_ids(overall, events, shuffle_events, rng), t);
        terminal = tts.overall_done() || tts.all_subs_resolved() || t >= max_steps;
        for (int i = 0; i < n; ++i) {
            double r = sync.agent_sigma[static_cast<size_t>(i)] * shaping.sub_goal_reward +
                       sync.overall_sigma * shaping.overall_bonus;
            if (learn) {
                PolicyKey next_key =
                    detail::make_key(observe(spec, nxt, i), d, tts, i, condition_on_overall);
                policy.q_update(keys[static_cast<size_t>(i)], actions[static_cast<size_t>(i)], r,
                                next_key, terminal);
            }
            if (trace) {
                if (static_cast<int>(trace->steps.size()) < t) {
                    EpisodeStepRecord rec;
                    rec.step = t;
                    rec.positions = nxt.positions;
                    rec.events.assign(events.begin(), events.end());
                    rec.overall_state = overall.state_name(tts.overall_state);
                    for (int j = 0; j < n; ++j)
                        rec.sub_states.push_back(d.machines[static_cast<size_t>(j)].state_name(
                            tts.sub_states[static_cast<size_t>(j)]));
                    rec.rewards.assign(static_cast<size_t>(n), 0.0);
                    trace->steps.push_back(std::move(rec));
                }
                trace->steps.back().rewards[static_cast<size_t>(i)] = r;
            }
        }
        cur = nxt;
    }

    EpisodeResult res;
    res.sub_discounted.resize(static_cast<size_t>(n));
    res.sub_indicator.resize(static_cast<size_t>(n));
    res.sub_entry_discounted.resize(static_cast<size_t>(n));
    res.sub_entry_indicator.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        int ts = tts.sub_goal_steps[static_cast<size_t>(i)];
        res.sub_indicator[static_cast<size_t>(i)] = ts >= 0 ? 1 : 0;
        res.sub_discounted[static_cast<size_t>(i)] = ts >= 0 ? std::pow(shaping.gamma, ts) : 0.0;
        int te = tts.sub_entry_steps[static_cast<size_t>(i)];
        res.sub_entry_indicator[static_cast<size_t>(i)] = te >= 0 ? 1 : 0;
        res.sub_entry_discounted[static_cast<size_t>(i)] =
            te >= 0 ? std::pow(shaping.gamma, te) : 0.0;
    }
    res.overall_completed = tts.overall_done();
    res.completion_step = tts.overall_goal_step;
    return res;
}

enum class Mode { Lotad, AtadFixed, Monolithic };

inline Mode mode_from(const std::string& s) {
    if (s == "lotad") return Mode::Lotad;
    if (s == "atad_fixed") return Mode::AtadFixed;
    if (s == "monolithic") return Mode::Monolithic;
    throw ConfigError("unknown mode '" + s + "'");
}

enum class SelectorReward { Discounted, Indicator };

struct TrainParams {
    Mode mode = Mode::Lotad;
    GenerationConstraints constraints; // holds k and the scoring weights
    double alpha = 1.0;
    double beta = 0.5;
    double gamma = 0.95;
    double epsilon = 0.1;
    double learning_rate = 0.25;
    double overall_bonus = 0.1;
    bool condition_on_overall = true;
    bool shuffle_events = false;
    SelectorReward selector_reward = SelectorReward::Discounted;
    int episodes = 10000;
    int max_steps = 100;
    uint64_t seed = 1;
};

struct EpisodeRow {
    int episode = 0;
    int selected = 0;
    bool overall_completed = false;
    int completion_step = -1;
    double overall_reward = 0.0; // gamma^completion_step, 0 when incomplete
    std::vector<double> sub_rewards;
    std::vector<long> visits;
    std::vector<double> arm_scores; // normalized to [0,1]
    std::vector<double> arm_raw;    // unnormalized V, averaged over agents
    std::vector<double> arm_bonus;
};

struct TrainResult {
    std::vector<EpisodeRow> rows;
    std::vector<ActiveDecomposition> arms;
    std::vector<Decomposition> candidates; // empty in monolithic mode
    TaskConditionedPolicy policy{0.1, 0.25, 0.95};
    int best_arm = 0;
    int num_agents = 0;
};

// Builds the candidate arms for a mode. LOTaD keeps the top-k candidate set;
// ATAD fixes a single top-scoring candidate with ties broken by a seeded
// draw; Monolithic assigns every agent the overall task.
inline std::vector<Decomposition> build_candidates(const RewardMachine& overall, int n_agents,
                                                   const TrainParams& p, Rng& rng) {
    if (p.mode == Mode::Monolithic) return {};
    GenerationConstraints gc = p.constraints;
    if (p.mode == Mode::AtadFixed) gc.k = std::numeric_limits<int>::max();
    auto cands = enumerate_candidates(overall, n_agents, gc);
    if (p.mode == Mode::AtadFixed) {
        size_t ties = 1;
        while (ties < cands.size() && cands[ties].score == cands[0].score) ++ties;
        size_t pick = static_cast<size_t>(rng.next_below(ties));
        Decomposition chosen = cands[pick];
        chosen.id = 0;
        return {chosen};
    }
    return cands;
}

inline TrainResult train(const GridSpec& spec, const RewardMachine& overall, const TrainParams& p) {
    Rng rng(p.seed);
    TrainResult out;
    out.num_agents = spec.num_agents();
    out.candidates = build_candidates(overall, spec.num_agents(), p, rng);
    if (p.mode == Mode::Monolithic) {
        out.arms.push_back(ActiveDecomposition::monolithic(overall, spec.num_agents()));
    } else {
        for (const auto& c : out.candidates)
            out.arms.push_back(ActiveDecomposition::from_candidate(c, overall));
    }

    out.policy = TaskConditionedPolicy(p.epsilon, p.learning_rate, p.gamma);
    SelectorState selector(static_cast<int>(out.arms.size()), spec.num_agents(), p.alpha, p.beta);
    RewardShaping shaping{1.0, p.overall_bonus, p.gamma};

    out.rows.reserve(static_cast<size_t>(p.episodes));
    for (int ep = 0; ep < p.episodes; ++ep) {
        int j = selector.select();
        EpisodeResult res = run_episode(spec, overall, out.arms[static_cast<size_t>(j)], out.policy,
                                        shaping, p.max_steps, rng, p.condition_on_overall,
                                        p.shuffle_events, true, nullptr);
        std::vector<double> fed;
        if (p.selector_reward == SelectorReward::Discounted) {
            fed = res.sub_entry_discounted;
        } else {
            fed.assign(res.sub_entry_indicator.begin(), res.sub_entry_indicator.end());
        }
        selector.record_episode(j, fed);

        EpisodeRow row;
        row.episode = ep;
        row.selected = j;
        row.overall_completed = res.overall_completed;
        row.completion_step = res.completion_step;
        row.overall_reward =
            res.overall_completed ? std::pow(p.gamma, res.completion_step) : 0.0;
        row.sub_rewards = res.sub_discounted;
        for (int a = 0; a < selector.num_decompositions(); ++a) {
            row.visits.push_back(selector.visits(a));
            row.arm_scores.push_back(selector.decomposition_score(a));
            double raw = 0.0;
            for (int i = 0; i < selector.num_agents(); ++i) raw += selector.estimate(a, i).value;
            row.arm_raw.push_back(raw / selector.num_agents());
            row.arm_bonus.push_back(selector.ucb_bonus(a));
        }
        out.rows.push_back(std::move(row));
    }

    out.best_arm = 0;
    double best = -1.0;
    for (int a = 0; a < selector.num_decompositions(); ++a) {
        double s = selector.decomposition_score(a);
        if (s > best) {
            best = s;
            out.best_arm = a;
        }
    }
    return out;
}

} // namespace lotad

#endif
