#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "convopt/env.hpp"
#include "convopt/types.hpp"

namespace convopt {

struct RewardSpec {
    enum class Mode { exact_match, judge_stub };

    Mode mode = Mode::exact_match;
    double gamma = 1.0;  // per-step discount, applied only on adaptive episodes
    double weight_accuracy = 1.0;
    double weight_style = 0.0;
    double weight_brevity = 0.0;

    void validate() const;
};

struct StandardizationStats {
    double mu_hat = 0.0;
    double sigma_hat = 0.0;
    int m = 0;

    bool operator==(const StandardizationStats&) const = default;
};

/// Per-group standardization statistics keyed by group_id.
using StandardizationMap = std::map<std::string, StandardizationStats>;

/// Deterministic trajectory score in [0, 10]. exact_match scores the final
/// answer only; judge_stub blends accuracy, style, and brevity components.
/// Errors if the trajectory is not terminal for the task.
double raw_reward(const RewardSpec& spec, const EnvSpec& env, const TaskInstance& task,
                  const Trajectory& trajectory);

/// [0, 10] -> [0, 1]; errors when out of range.
double rescale(double r10);

/// r * gamma^steps_used.
double apply_discount(double r, int steps_used, double gamma);

/// Final logged reward for a rollout: rescaled, and discounted by episode
/// length when the environment supports early answering.
double episode_reward(const RewardSpec& spec, const EnvSpec& env, const TaskInstance& task,
                      const Trajectory& trajectory);

/// mu_hat = sample mean, sigma_hat = Bessel-corrected sample std. All-equal
/// groups (sigma_hat = 0) standardize to all zeros. Errors when m < 2.
std::pair<StandardizationStats, std::vector<double>> standardize_group(
    std::span<const double> rewards);

/// Group statistics over reward_raw for every group in the dataset.
/// Errors, naming the group, when any group has fewer than two rollouts.
StandardizationMap standardization_by_group(const Dataset& dataset);

/// (r - mu_hat) / sigma_hat, or 0 for degenerate groups (sigma_hat = 0).
inline double standardized_reward(double r, const StandardizationStats& stats) {
    return stats.sigma_hat > 0.0 ? (r - stats.mu_hat) / stats.sigma_hat : 0.0;
}

}  // namespace convopt
