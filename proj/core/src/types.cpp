#include "convopt/types.hpp"

#include <cmath>
#include <string>

#include "convopt/errors.hpp"

namespace convopt {

namespace {

void check(bool ok, std::size_t record, const std::string& what) {
    if (!ok) {
        throw validation_error("dataset record " + std::to_string(record) + ": " + what);
    }
}

}  // namespace

void validate_dataset(const Dataset& dataset, bool strict_reward_range) {
    for (std::size_t i = 0; i < dataset.examples.size(); ++i) {
        const LoggedExample& ex = dataset.examples[i];
        check(ex.task.horizon >= 1, i, "horizon must be >= 1");
        check(!ex.task.task_id.empty(), i, "empty task_id");
        check(!ex.group_id.empty(), i, "empty group_id");
        check(ex.temperature > 0.0, i, "temperature must be > 0");
        check(!ex.trajectory.steps.empty(), i, "empty trajectory");
        check(static_cast<int>(ex.trajectory.steps.size()) <= ex.task.horizon, i,
              "trajectory longer than horizon");
        check(std::isfinite(ex.reward_raw), i, "non-finite reward_raw");
        if (strict_reward_range) {
            check(ex.reward_raw >= 0.0 && ex.reward_raw <= 1.0, i,
                  "reward_raw outside [0, 1]");
        }
        if (ex.reward_std) {
            check(std::isfinite(*ex.reward_std), i, "non-finite reward_std");
        }
        for (const Step& s : ex.trajectory.steps) {
            check(s.action >= 0, i, "negative action id");
            check(s.observation >= 0, i, "negative observation id");
            check(std::isfinite(s.behavior_action_logprob) && s.behavior_action_logprob <= 0.0,
                  i, "behavior_action_logprob must be finite and <= 0");
            check(std::isfinite(s.observation_logprob) && s.observation_logprob <= 0.0, i,
                  "observation_logprob must be finite and <= 0");
        }
    }
    // All examples in a group must describe the same task.
    std::map<std::string, std::string> group_task;
    for (std::size_t i = 0; i < dataset.examples.size(); ++i) {
        const LoggedExample& ex = dataset.examples[i];
        auto [it, inserted] = group_task.emplace(ex.group_id, ex.task.task_id);
        check(inserted || it->second == ex.task.task_id, i,
              "group " + ex.group_id + " mixes task ids");
    }
}

std::map<std::string, std::vector<std::size_t>> group_by_task(const Dataset& dataset) {
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < dataset.examples.size(); ++i) {
        groups[dataset.examples[i].group_id].push_back(i);
    }
    return groups;
}

}  // namespace convopt
