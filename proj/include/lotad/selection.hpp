#ifndef LOTAD_SELECTION_HPP
#define LOTAD_SELECTION_HPP

#include <cmath>
#include <vector>

#include "lotad/error.hpp"

namespace lotad {

// Exponential weighted moving sum of a sub-task's episode rewards,
// V = sum_{h=0..H} alpha^(H-h) r_h, maintained by the recurrence
// V' = alpha * V + r.
struct ValueEstimate {
    double value = 0.0;
    long episodes_seen = 0;
};

inline ValueEstimate update_value(ValueEstimate v, double r, double alpha) {
    v.value = alpha * v.value + r;
    v.episodes_seen += 1;
    return v;
}

// Normalizes a raw value estimate to [0, 1] for rewards in [0, 1]:
// divide by sum_{h=0..H} alpha^(H-h), the maximum attainable weighted sum.
inline double normalized_value(const ValueEstimate& v, double alpha) {
    if (v.episodes_seen == 0) return 0.0;
    const double n = static_cast<double>(v.episodes_seen);
    if (alpha == 1.0) return v.value / n;
    return v.value * (1.0 - alpha) / (1.0 - std::pow(alpha, n));
}

// Per-decomposition value bookkeeping plus the UCB state shared by one
// training loop.
class SelectorState {
public:
    SelectorState(int num_decompositions, int num_agents, double alpha, double beta)
        : alpha_(alpha), beta_(beta),
          estimates_(static_cast<size_t>(num_decompositions),
                     std::vector<ValueEstimate>(static_cast<size_t>(num_agents))),
          visits_(static_cast<size_t>(num_decompositions), 0) {
        if (!(alpha > 0.0 && alpha <= 1.0)) throw Error("alpha must be in (0, 1]");
        if (beta < 0.0) throw Error("beta must be >= 0");
    }

    int num_decompositions() const { return static_cast<int>(estimates_.size()); }
    int num_agents() const { return estimates_.empty() ? 0 : static_cast<int>(estimates_[0].size()); }
    long visits(int j) const { return visits_[static_cast<size_t>(j)]; }
    long total_episodes() const { return total_; }
    double alpha() const { return alpha_; }
    double beta() const { return beta_; }
    const ValueEstimate& estimate(int j, int i) const {
        return estimates_[static_cast<size_t>(j)][static_cast<size_t>(i)];
    }

    // Mean over agents of the normalized sub-task value estimates; 0 for an
    // unvisited decomposition.
    double decomposition_score(int j) const {
        if (visits_[static_cast<size_t>(j)] == 0) return 0.0;
        double sum = 0.0;
        for (const auto& v : estimates_[static_cast<size_t>(j)]) sum += normalized_value(v, alpha_);
        return sum / static_cast<double>(estimates_[static_cast<size_t>(j)].size());
    }

    double ucb_bonus(int j) const {
        if (visits_[static_cast<size_t>(j)] == 0 || total_ == 0) return 0.0;
        return beta_ * std::sqrt(std::log(static_cast<double>(total_)) /
                                 static_cast<double>(visits_[static_cast<size_t>(j)]));
    }

    // Unvisited decompositions first (lowest index); afterwards UCB:
    // argmax_j score(j) + beta * sqrt(ln T / N_j), ties to the lowest index.
    int select() const {
        for (int j = 0; j < num_decompositions(); ++j)
            if (visits_[static_cast<size_t>(j)] == 0) return j;
        int best = 0;
        double best_v = -1.0;
        for (int j = 0; j < num_decompositions(); ++j) {
            double v = decomposition_score(j) + ucb_bonus(j);
            if (v > best_v) {
                best_v = v;
                best = j;
            }
        }
        return best;
    }

    // Records one episode of decomposition j. Rewards outside [0, 1] signal a
    // shaping bug upstream.
    void record_episode(int j, const std::vector<double>& rewards) {
        auto& est = estimates_[static_cast<size_t>(j)];
        if (rewards.size() != est.size()) throw Error("record_episode: reward count mismatch");
        for (double r : rewards)
            if (!(r >= 0.0 && r <= 1.0)) throw Error("sub-task reward outside [0, 1]");
        for (size_t i = 0; i < est.size(); ++i) est[i] = update_value(est[i], rewards[i], alpha_);
        visits_[static_cast<size_t>(j)] += 1;
        total_ += 1;
    }

private:
    double alpha_;
    double beta_;
    std::vector<std::vector<ValueEstimate>> estimates_;
    std::vector<long> visits_;
    long total_ = 0;
};

} // namespace lotad

#endif
