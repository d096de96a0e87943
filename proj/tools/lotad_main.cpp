// lotad: reward-machine task decomposition experiments.
//
//   lotad train    --config configs/four_buttons.conf [--mode monolithic ...]
//   lotad sweep-k  --config ... --ks 1,5,10,25
//   lotad validate --rm maps/four_buttons.rm --agents 2 [--constraints f] [--k 10]
//   lotad eval     --config ... --policy out/policy_seed1.txt [--seed 1]
//   lotad replay   --config ... [--arm 0] [--seed 1] [--policy dump.txt]
//
// Exit codes: 0 success, 2 configuration error, 3 no valid decomposition.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lotad/config.hpp"
#include "lotad/harness.hpp"

using namespace lotad;

namespace {

struct CommonFlags {
    std::string config_path;
    std::optional<std::string> mode, selector_reward, event_order, out, seeds;
    std::optional<int> k, episodes, max_steps, eval_episodes;
    std::optional<double> alpha, beta, gamma, epsilon, learning_rate, overall_bonus, slip_prob;
    std::optional<bool> condition_on_overall;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "experiment config file")->required();
    cmd->add_option("--mode", f.mode, "lotad|atad_fixed|monolithic");
    cmd->add_option("--k", f.k, "number of candidate decompositions");
    cmd->add_option("--alpha", f.alpha, "value-estimate decay");
    cmd->add_option("--beta", f.beta, "UCB exploration weight");
    cmd->add_option("--gamma", f.gamma, "discount factor");
    cmd->add_option("--epsilon", f.epsilon, "exploration rate");
    cmd->add_option("--learning-rate", f.learning_rate, "TD learning rate");
    cmd->add_option("--overall-bonus", f.overall_bonus, "overall-completion bonus c");
    cmd->add_option("--condition-on-overall", f.condition_on_overall,
                    "condition the policy on the overall RM state");
    cmd->add_option("--selector-reward", f.selector_reward, "discounted|indicator");
    cmd->add_option("--event-order", f.event_order, "lex|shuffle");
    cmd->add_option("--slip-prob", f.slip_prob, "slip probability override");
    cmd->add_option("--max-steps", f.max_steps, "episode length override");
    cmd->add_option("--episodes", f.episodes, "training episodes per seed");
    cmd->add_option("--seeds", f.seeds, "comma-separated seed list");
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_option("--eval-episodes", f.eval_episodes, "episodes per eval arm");
}

ExperimentConfig load_with_flags(const CommonFlags& f) {
    ExperimentConfig c = load_config_file(f.config_path);
    if (f.mode) c.mode = *f.mode;
    if (f.k) c.k = *f.k;
    if (f.alpha) c.alpha = *f.alpha;
    if (f.beta) c.beta = *f.beta;
    if (f.gamma) c.gamma = *f.gamma;
    if (f.epsilon) c.epsilon = *f.epsilon;
    if (f.learning_rate) c.learning_rate = *f.learning_rate;
    if (f.overall_bonus) c.overall_bonus = *f.overall_bonus;
    if (f.condition_on_overall) c.condition_on_overall = *f.condition_on_overall;
    if (f.selector_reward) c.selector_reward = *f.selector_reward;
    if (f.event_order) c.event_order = *f.event_order;
    if (f.slip_prob) c.slip_prob = *f.slip_prob;
    if (f.max_steps) c.max_steps = *f.max_steps;
    if (f.episodes) c.episodes = *f.episodes;
    if (f.seeds) c.seeds = detail::parse_seed_list(*f.seeds);
    if (f.out) c.out = *f.out;
    if (f.eval_episodes) c.eval_episodes = *f.eval_episodes;
    c.validate();
    return c;
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::istringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (!item.empty()) out.push_back(std::stoi(item));
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"reward-machine task decomposition experiments"};
    app.require_subcommand(1);

    CommonFlags train_flags, sweep_flags, eval_flags, replay_flags;
    std::string ks_arg = "1,5,10,25";
    std::string policy_path;
    uint64_t one_seed = 1;
    int replay_arm = 0;

    auto* cmd_train = app.add_subcommand("train", "train with decomposition selection");
    add_common(cmd_train, train_flags);

    auto* cmd_sweep = app.add_subcommand("sweep-k", "train across candidate-set sizes");
    add_common(cmd_sweep, sweep_flags);
    cmd_sweep->add_option("--ks", ks_arg, "comma-separated k values");

    std::string val_rm, val_constraints;
    int val_agents = 2, val_k = 10;
    auto* cmd_validate = app.add_subcommand("validate", "generate and check decompositions");
    cmd_validate->add_option("--rm", val_rm, "RM file")->required();
    cmd_validate->add_option("--agents", val_agents, "team size")->required();
    cmd_validate->add_option("--constraints", val_constraints, "constraints file");
    cmd_validate->add_option("--k", val_k, "candidate count");

    auto* cmd_eval = app.add_subcommand("eval", "frozen-policy rollouts per arm");
    add_common(cmd_eval, eval_flags);
    cmd_eval->add_option("--policy", policy_path, "policy dump file")->required();
    cmd_eval->add_option("--seed", one_seed, "evaluation seed");

    auto* cmd_replay = app.add_subcommand("replay", "print one episode's trace");
    add_common(cmd_replay, replay_flags);
    cmd_replay->add_option("--seed", one_seed, "episode seed");
    cmd_replay->add_option("--arm", replay_arm, "decomposition arm to run");
    cmd_replay->add_option("--policy", policy_path, "optional policy dump (greedy replay)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_train->parsed()) {
            auto cfg = load_with_flags(train_flags);
            auto summary = run(cfg);
            std::printf("arms: %d\n", summary.num_arms);
            for (const auto& s : summary.seeds)
                std::printf("seed %llu: best_arm %d tail_completion %.4f episodes_to_090 %ld\n",
                            static_cast<unsigned long long>(s.seed), s.best_arm,
                            s.tail_completion, s.episodes_to_090);
            std::printf("tail_completion_mean %.4f\nwrote %s\n",
                        summary.tail_completion_mean(), cfg.out.c_str());
        } else if (cmd_sweep->parsed()) {
            auto cfg = load_with_flags(sweep_flags);
            auto ks = parse_int_list(ks_arg);
            if (ks.empty()) throw ConfigError("--ks is empty");
            auto entries = sweep_k(cfg, ks);
            for (const auto& e : entries) {
                std::printf("k=%d arms=%d%s tail_completion_mean=%.4f\n", e.k, e.arms,
                            e.truncated ? " (truncated: fewer valid decompositions)" : "",
                            e.tail_completion_mean);
            }
            std::printf("wrote %s/sweep_summary.csv\n", cfg.out.c_str());
        } else if (cmd_validate->parsed()) {
            auto rm = load_rm_file(val_rm);
            GenerationConstraints gc;
            if (!val_constraints.empty()) gc = load_constraints_file(val_constraints);
            gc.k = val_k;
            gc.validate(val_agents);
            std::cout << validate_decompositions(rm, val_agents, gc);
        } else if (cmd_eval->parsed()) {
            auto cfg = load_with_flags(eval_flags);
            auto results = eval_policy(cfg, policy_path, one_seed);
            std::printf("arm,completion_rate,mean_reward,mean_steps\n");
            for (const auto& r : results)
                std::printf("%d,%.4f,%.4f,%.1f\n", r.arm, r.completion_rate, r.mean_reward,
                            r.mean_steps);
        } else if (cmd_replay->parsed()) {
            auto cfg = load_with_flags(replay_flags);
            std::cout << replay(cfg, one_seed, replay_arm, policy_path);
        }
    } catch (const NoValidDecomposition& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
