#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace convopt {

using ActionId = int;
using ObservationId = int;

// One conversation task. The hidden intent is environment-side state: only
// the simulated user and the reward may read it, never a policy.
struct TaskInstance {
    std::string task_id;
    int context_id = 0;
    int hidden_intent = 0;
    int horizon = 1;

    bool operator==(const TaskInstance&) const = default;
};

// One (action, observation) exchange with the logged behavior propensity of
// the action and the exact log-probability of the realized observation.
struct Step {
    ActionId action = 0;
    double behavior_action_logprob = 0.0;
    ObservationId observation = 0;
    double observation_logprob = 0.0;

    bool operator==(const Step&) const = default;
};

struct Trajectory {
    std::vector<Step> steps;
    bool terminated_early = false;

    std::size_t length() const { return steps.size(); }
    bool operator==(const Trajectory&) const = default;
};

// A logged (x, tau, r) tuple. reward_raw is stored post-rescale in [0, 1];
// reward_std appears only after per-group standardization. Serialized
// rewards are range-checked; in-memory diagnostic datasets may carry
// arbitrary finite rewards (see gradient-variance diagnostics).
struct LoggedExample {
    TaskInstance task;
    Trajectory trajectory;
    double reward_raw = 0.0;
    std::optional<double> reward_std;
    std::string group_id;
    double temperature = 1.0;
    std::uint64_t seed = 0;

    bool operator==(const LoggedExample&) const = default;
};

struct Dataset {
    std::vector<LoggedExample> examples;

    std::size_t size() const { return examples.size(); }
    bool operator==(const Dataset&) const = default;
};

// Throws validation_error naming the offending record. Called on every
// serialization boundary; strict_reward_range enforces reward_raw in [0, 1].
void validate_dataset(const Dataset& dataset, bool strict_reward_range = true);

// Groups example indices by group_id, preserving in-group order. The union
// of the groups is exactly the dataset. std::map keeps iteration stable.
std::map<std::string, std::vector<std::size_t>> group_by_task(const Dataset& dataset);

}  // namespace convopt
