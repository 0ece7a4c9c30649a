#include "convopt/datagen.hpp"

#include <map>

#include "convopt/errors.hpp"

namespace convopt {

void DatagenConfig::validate() const {
    if (m < 1) throw validation_error("datagen: m must be >= 1");
    if (temperatures.empty()) throw validation_error("datagen: temperatures must be non-empty");
    for (const double t : temperatures) {
        if (!(t > 0.0)) throw validation_error("datagen: temperatures must be > 0");
    }
    if (standardize && m < 2) {
        throw validation_error("datagen: standardization needs m >= 2");
    }
}

std::pair<Trajectory, double> complete_rollout(const PolicyParams& params, const EnvSpec& env,
                                               const RewardSpec& reward_spec,
                                               const TaskInstance& task, Trajectory partial,
                                               double temperature,
                                               bool record_tempered_propensity, Rng& rng) {
    HistoryState state{task.context_id, {}};
    for (const Step& step : partial.steps) {
        state.prefix.emplace_back(step.action, step.observation);
    }
    while (!is_terminal(env, task, state)) {
        const SampledAction sampled = sample_action(params, state, temperature, rng);
        const double lp_a = record_tempered_propensity
                                ? sampled.logprob
                                : action_logprob(params, state, sampled.action);
        const UserResponse response = user_response(env, task, state, sampled.action, rng);
        partial.steps.push_back(
            Step{sampled.action, lp_a, response.observation, response.logprob});
        state.prefix.emplace_back(sampled.action, response.observation);
    }
    partial.terminated_early = static_cast<int>(partial.steps.size()) < task.horizon;
    const double reward = episode_reward(reward_spec, env, task, partial);
    return {std::move(partial), reward};
}

LoggedExample rollout(const PolicyParams& params, const EnvSpec& env,
                      const RewardSpec& reward_spec, const TaskInstance& task,
                      double temperature, bool record_tempered_propensity, Rng& rng) {
    LoggedExample example;
    example.task = task;
    example.group_id = task.task_id;
    example.temperature = temperature;
    example.seed = rng.seed();
    auto [trajectory, reward] = complete_rollout(params, env, reward_spec, task, Trajectory{},
                                                 temperature, record_tempered_propensity, rng);
    example.trajectory = std::move(trajectory);
    example.reward_raw = reward;
    return example;
}

Dataset generate_dataset(const PolicyParams& params, const EnvSpec& env,
                         const RewardSpec& reward_spec,
                         const std::vector<TaskInstance>& tasks, const DatagenConfig& cfg) {
    cfg.validate();
    if (tasks.empty()) throw validation_error("generate_dataset: tasks must be non-empty");
    Dataset dataset;
    dataset.examples.reserve(tasks.size() * static_cast<std::size_t>(cfg.m));
    for (const TaskInstance& task : tasks) {
        const std::uint64_t task_key = fnv1a64(task.task_id);
        for (int i = 0; i < cfg.m; ++i) {
            const double temperature =
                cfg.temperatures[static_cast<std::size_t>(i) % cfg.temperatures.size()];
            Rng stream(derive_seed(cfg.master_seed, task_key, static_cast<std::uint64_t>(i)));
            dataset.examples.push_back(rollout(params, env, reward_spec, task, temperature,
                                               cfg.record_tempered_propensity, stream));
        }
    }
    if (cfg.standardize) dataset = attach_standardized(std::move(dataset));
    validate_dataset(dataset);
    return dataset;
}

Dataset attach_standardized(Dataset dataset) {
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < dataset.examples.size(); ++i) {
        groups[dataset.examples[i].group_id].push_back(i);
    }
    for (const auto& [group, indices] : groups) {
        if (indices.size() < 2) {
            throw validation_error("attach_standardized: group \"" + group +
                                   "\" has fewer than two rollouts");
        }
        std::vector<double> rewards;
        rewards.reserve(indices.size());
        for (const std::size_t i : indices) rewards.push_back(dataset.examples[i].reward_raw);
        const auto [stats, tilde] = standardize_group(rewards);
        for (std::size_t k = 0; k < indices.size(); ++k) {
            dataset.examples[indices[k]].reward_std = tilde[k];
        }
    }
    return dataset;
}

}  // namespace convopt
