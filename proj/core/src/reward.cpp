#include "convopt/reward.hpp"

#include <cmath>

#include "convopt/errors.hpp"
#include "convopt/numeric.hpp"

namespace convopt {

void RewardSpec::validate() const {
    if (!(gamma > 0.0 && gamma <= 1.0)) {
        throw validation_error("reward: gamma must be in (0, 1]");
    }
    if (weight_accuracy < 0.0 || weight_style < 0.0 || weight_brevity < 0.0) {
        throw validation_error("reward: component weights must be nonnegative");
    }
    const double sum = weight_accuracy + weight_style + weight_brevity;
    if (std::abs(sum - 1.0) > 1e-12) {
        throw validation_error("reward: component weights must sum to 1");
    }
}

double raw_reward(const RewardSpec& spec, const EnvSpec& env, const TaskInstance& task,
                  const Trajectory& trajectory) {
    spec.validate();
    const HistoryState end = history_prefix(task, trajectory, trajectory.steps.size());
    if (!is_terminal(env, task, end)) {
        throw validation_error("raw_reward: trajectory is not terminal");
    }
    const double accuracy = env.final_answer_matches(task, trajectory) ? 10.0 : 0.0;
    if (spec.mode == RewardSpec::Mode::exact_match) return accuracy;

    const std::size_t steps = trajectory.steps.size();
    double styled = 0.0;
    for (const Step& step : trajectory.steps) {
        styled += env.action_style(step.action) ? 1.0 : 0.0;
    }
    const double style = 10.0 * styled / static_cast<double>(steps);
    const double brevity =
        task.horizon == 1
            ? 10.0
            : 10.0 * static_cast<double>(task.horizon - static_cast<int>(steps)) /
                  static_cast<double>(task.horizon - 1);
    return spec.weight_accuracy * accuracy + spec.weight_style * style +
           spec.weight_brevity * brevity;
}

double rescale(double r10) {
    if (!(r10 >= 0.0 && r10 <= 10.0)) {
        throw validation_error("rescale: reward must be in [0, 10]");
    }
    return r10 / 10.0;
}

double apply_discount(double r, int steps_used, double gamma) {
    if (steps_used < 1) throw validation_error("apply_discount: steps_used must be >= 1");
    if (gamma == 1.0) return r;
    return r * std::pow(gamma, steps_used);
}

double episode_reward(const RewardSpec& spec, const EnvSpec& env, const TaskInstance& task,
                      const Trajectory& trajectory) {
    double r = rescale(raw_reward(spec, env, task, trajectory));
    if (env.adaptive) {
        r = apply_discount(r, static_cast<int>(trajectory.steps.size()), spec.gamma);
    }
    return r;
}

std::pair<StandardizationStats, std::vector<double>> standardize_group(
    std::span<const double> rewards) {
    if (rewards.size() < 2) {
        throw validation_error("standardize_group: need at least two rewards");
    }
    StandardizationStats stats;
    stats.m = static_cast<int>(rewards.size());
    stats.mu_hat = mean_of(rewards);
    stats.sigma_hat = sample_std(rewards);
    std::vector<double> tilde(rewards.size(), 0.0);
    if (stats.sigma_hat > 0.0) {
        for (std::size_t i = 0; i < rewards.size(); ++i) {
            tilde[i] = (rewards[i] - stats.mu_hat) / stats.sigma_hat;
        }
    }
    return {stats, std::move(tilde)};
}

StandardizationMap standardization_by_group(const Dataset& dataset) {
    std::map<std::string, std::vector<double>> rewards;
    for (const LoggedExample& example : dataset.examples) {
        rewards[example.group_id].push_back(example.reward_raw);
    }
    StandardizationMap stats;
    for (const auto& [group, values] : rewards) {
        if (values.size() < 2) {
            throw validation_error("standardization_by_group: group \"" + group +
                                   "\" has fewer than two rollouts");
        }
        stats.emplace(group, standardize_group(values).first);
    }
    return stats;
}

}  // namespace convopt
