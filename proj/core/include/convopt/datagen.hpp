#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "convopt/env.hpp"
#include "convopt/policy.hpp"
#include "convopt/reward.hpp"
#include "convopt/rng.hpp"
#include "convopt/types.hpp"

namespace convopt {

struct DatagenConfig {
    int m = 3;  // rollouts per task, one group each
    std::vector<double> temperatures = {0.7, 1.0, 1.3};  // cycled across the m rollouts
    std::uint64_t master_seed = 0;
    // Log the propensity of the distribution actually sampled (tempered).
    // Off, the untempered propensity is logged instead, deliberately
    // misspecifying the importance ratios.
    bool record_tempered_propensity = true;
    bool standardize = true;

    void validate() const;
};

/// Continues sampling (action, observation) steps from the end of `partial`
/// until the episode is terminal. Returns the completed trajectory and its
/// episode reward. `partial` may be empty (a fresh rollout).
std::pair<Trajectory, double> complete_rollout(const PolicyParams& params, const EnvSpec& env,
                                               const RewardSpec& reward_spec,
                                               const TaskInstance& task, Trajectory partial,
                                               double temperature,
                                               bool record_tempered_propensity, Rng& rng);

/// One logged episode: alternate sample_action / user_response to termination,
/// record per-step log-propensities and the episode reward.
LoggedExample rollout(const PolicyParams& params, const EnvSpec& env,
                      const RewardSpec& reward_spec, const TaskInstance& task,
                      double temperature, bool record_tempered_propensity, Rng& rng);

/// |tasks| * m examples; rollout i of each task uses temperatures[i mod k] and
/// an rng stream derived from (master_seed, task_id, i), so output is a pure
/// function of the arguments regardless of execution order. group_id = task_id.
/// With cfg.standardize, reward_std is filled per group before returning.
Dataset generate_dataset(const PolicyParams& params, const EnvSpec& env,
                         const RewardSpec& reward_spec,
                         const std::vector<TaskInstance>& tasks, const DatagenConfig& cfg);

/// Fills reward_std for every example via per-group standardization of
/// reward_raw. Errors, naming the group, when any group has m < 2.
Dataset attach_standardized(Dataset dataset);

}  // namespace convopt
