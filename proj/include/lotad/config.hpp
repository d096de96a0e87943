#ifndef LOTAD_CONFIG_HPP
#define LOTAD_CONFIG_HPP

#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lotad/error.hpp"
#include "lotad/training.hpp"

namespace lotad {

// Flat key = value experiment configuration. Values may be overridden by
// LOTAD_<KEY> environment variables (uppercased key) and by CLI flags on top.
struct ExperimentConfig {
    std::string env_map;     // map file path
    std::string rm;          // RM file path
    std::string constraints; // optional constraints file path
    std::string mode = "lotad";
    int k = 10;
    double alpha = 1.0;
    double beta = 0.5;
    double gamma = 0.95;
    double epsilon = 0.1;
    double learning_rate = 0.25;
    double overall_bonus = 0.1;
    bool condition_on_overall = true;
    std::string selector_reward = "discounted"; // or "indicator"
    std::string event_order = "lex";            // or "shuffle"
    std::optional<double> slip_prob;            // overrides the map header
    std::optional<int> max_steps;               // overrides the map header
    int episodes = 30000;
    std::vector<uint64_t> seeds{1, 2, 3, 4, 5};
    std::string out = "out";
    int eval_episodes = 200;
    double w_size = 2.0;
    double w_balance = 0.5;

    // Collects every violated field instead of stopping at the first.
    void validate() const {
        std::vector<std::string> bad;
        if (env_map.empty()) bad.push_back("env_map: missing");
        if (rm.empty()) bad.push_back("rm: missing");
        if (mode != "lotad" && mode != "atad_fixed" && mode != "monolithic")
            bad.push_back("mode: must be lotad|atad_fixed|monolithic");
        if (k < 1) bad.push_back("k: must be >= 1");
        if (!(alpha > 0.0 && alpha <= 1.0)) bad.push_back("alpha: must be in (0,1]");
        if (beta < 0.0) bad.push_back("beta: must be >= 0");
        if (!(gamma > 0.0 && gamma <= 1.0)) bad.push_back("gamma: must be in (0,1]");
        if (!(epsilon >= 0.0 && epsilon <= 1.0)) bad.push_back("epsilon: must be in [0,1]");
        if (!(learning_rate > 0.0 && learning_rate <= 1.0))
            bad.push_back("learning_rate: must be in (0,1]");
        if (overall_bonus < 0.0) bad.push_back("overall_bonus: must be >= 0");
        if (selector_reward != "discounted" && selector_reward != "indicator")
            bad.push_back("selector_reward: must be discounted|indicator");
        if (event_order != "lex" && event_order != "shuffle")
            bad.push_back("event_order: must be lex|shuffle");
        if (slip_prob && !(*slip_prob >= 0.0 && *slip_prob <= 1.0))
            bad.push_back("slip_prob: must be in [0,1]");
        if (max_steps && *max_steps < 0) bad.push_back("max_steps: must be >= 0");
        if (episodes < 0) bad.push_back("episodes: must be >= 0");
        if (seeds.empty()) bad.push_back("seeds: at least one seed");
        if (out.empty()) bad.push_back("out: missing");
        if (eval_episodes < 1) bad.push_back("eval_episodes: must be >= 1");
        if (!bad.empty()) {
            std::string msg = "invalid configuration:";
            for (const auto& b : bad) msg += "\n  " + b;
            throw ConfigError(msg);
        }
    }

    TrainParams train_params(uint64_t seed, int map_max_steps) const {
        TrainParams p;
        p.mode = mode_from(mode);
        p.constraints.k = k;
        p.constraints.w_size = w_size;
        p.constraints.w_balance = w_balance;
        p.alpha = alpha;
        p.beta = beta;
        p.gamma = gamma;
        p.epsilon = epsilon;
        p.learning_rate = learning_rate;
        p.overall_bonus = overall_bonus;
        p.condition_on_overall = condition_on_overall;
        p.shuffle_events = event_order == "shuffle";
        p.selector_reward =
            selector_reward == "indicator" ? SelectorReward::Indicator : SelectorReward::Discounted;
        p.episodes = episodes;
        p.max_steps = max_steps ? *max_steps : map_max_steps;
        p.seed = seed;
        return p;
    }

    std::string describe() const {
        std::ostringstream o;
        o << "alpha = " << alpha << "\nbeta = " << beta
          << "\ncondition_on_overall = " << (condition_on_overall ? "true" : "false")
          << "\nconstraints = " << constraints << "\nenv_map = " << env_map
          << "\nepisodes = " << episodes << "\nepsilon = " << epsilon
          << "\neval_episodes = " << eval_episodes << "\nevent_order = " << event_order
          << "\ngamma = " << gamma << "\nk = " << k << "\nlearning_rate = " << learning_rate
          << "\nmax_steps = " << (max_steps ? std::to_string(*max_steps) : std::string("(map)"))
          << "\nmode = " << mode << "\nout = " << out
          << "\noverall_bonus = " << overall_bonus << "\nrm = " << rm
          << "\nselector_reward = " << selector_reward << "\nseeds =";
        for (auto s : seeds) o << ' ' << s;
        o << "\nslip_prob = " << (slip_prob ? std::to_string(*slip_prob) : std::string("(map)"))
          << "\nw_balance = " << w_balance << "\nw_size = " << w_size << "\n";
        return o.str();
    }
};

namespace detail {
inline std::string dirname_of(const std::string& path) {
    auto pos = path.find_last_of('/');
    return pos == std::string::npos ? std::string(".") : path.substr(0, pos);
}

inline std::string resolve_path(const std::string& base_dir, const std::string& p) {
    if (p.empty() || p.front() == '/') return p;
    return base_dir + "/" + p;
}

inline std::vector<uint64_t> parse_seed_list(const std::string& s) {
    std::vector<uint64_t> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, ',')) {
        std::istringstream item(cur);
        uint64_t v;
        if (item >> v) out.push_back(v);
    }
    return out;
}
} // namespace detail

// Applies one key/value pair; unknown keys are configuration errors.
inline void apply_config_kv(ExperimentConfig& c, const std::string& key, const std::string& value,
                            const std::string& base_dir) {
    try {
        if (key == "env_map") c.env_map = detail::resolve_path(base_dir, value);
        else if (key == "rm") c.rm = detail::resolve_path(base_dir, value);
        else if (key == "constraints") c.constraints = detail::resolve_path(base_dir, value);
        else if (key == "mode") c.mode = value;
        else if (key == "k") c.k = std::stoi(value);
        else if (key == "alpha") c.alpha = std::stod(value);
        else if (key == "beta") c.beta = std::stod(value);
        else if (key == "gamma") c.gamma = std::stod(value);
        else if (key == "epsilon") c.epsilon = std::stod(value);
        else if (key == "learning_rate") c.learning_rate = std::stod(value);
        else if (key == "overall_bonus") c.overall_bonus = std::stod(value);
        else if (key == "condition_on_overall")
            c.condition_on_overall = value == "true" || value == "1";
        else if (key == "selector_reward") c.selector_reward = value;
        else if (key == "event_order") c.event_order = value;
        else if (key == "slip_prob") c.slip_prob = std::stod(value);
        else if (key == "max_steps") c.max_steps = std::stoi(value);
        else if (key == "episodes") c.episodes = std::stoi(value);
        else if (key == "seeds") c.seeds = detail::parse_seed_list(value);
        else if (key == "out") c.out = detail::resolve_path(base_dir, value);
        else if (key == "eval_episodes") c.eval_episodes = std::stoi(value);
        else if (key == "w_size") c.w_size = std::stod(value);
        else if (key == "w_balance") c.w_balance = std::stod(value);
        else throw ConfigError("unknown config key '" + key + "'");
    } catch (const ConfigError&) {
        throw;
    } catch (...) {
        throw ConfigError("bad value for config key '" + key + "': '" + value + "'");
    }
}

inline ExperimentConfig parse_config(const std::string& text, const std::string& base_dir) {
    ExperimentConfig c;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            std::istringstream check(line);
            std::string stray;
            if (check >> stray) throw ConfigError("config line without '=': " + line);
            continue;
        }
        auto trim = [](std::string s) {
            size_t a = s.find_first_not_of(" \t\r");
            size_t b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("config line with empty key: " + line);
        apply_config_kv(c, key, value, base_dir);
    }
    return c;
}

// Environment overrides: LOTAD_<KEY> (key uppercased).
inline void apply_env_overrides(ExperimentConfig& c) {
    static const char* keys[] = {"env_map", "rm", "constraints", "mode", "k", "alpha", "beta",
                                 "gamma", "epsilon", "learning_rate", "overall_bonus",
                                 "condition_on_overall", "selector_reward", "event_order",
                                 "slip_prob", "max_steps", "episodes", "seeds", "out",
                                 "eval_episodes", "w_size", "w_balance"};
    for (const char* key : keys) {
        std::string env_name = "LOTAD_";
        for (const char* p = key; *p; ++p) env_name += static_cast<char>(std::toupper(*p));
        if (const char* v = std::getenv(env_name.c_str())) apply_config_kv(c, key, v, ".");
    }
}

inline ExperimentConfig load_config_file(const std::string& path, bool env_overrides = true) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    auto c = parse_config(ss.str(), detail::dirname_of(path));
    if (env_overrides) apply_env_overrides(c);
    return c;
}

} // namespace lotad

#endif
