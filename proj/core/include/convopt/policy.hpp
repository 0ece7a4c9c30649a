#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "convopt/rng.hpp"
#include "convopt/types.hpp"

namespace convopt {

struct EnvSpec;

// Conversation history as seen by a policy: the observable context plus the
// (action, observation) prefix. The hidden intent is deliberately absent.
struct HistoryState {
    int context_id = 0;
    std::vector<std::pair<ActionId, ObservationId>> prefix;

    bool operator==(const HistoryState&) const = default;
};

// Canonical key for the tabular family, e.g. "3|1:0,4:2".
std::string state_key(const HistoryState& state);

// Softmax policy over A actions, two parameterizations:
//  - linear: logits = W phi(state), theta = W row-major (A x F), with
//    phi = [context one-hot | counts of (action, observation) pairs].
//  - tabular: one logit row per materialized state key; unseen keys fall
//    back to zero logits (uniform), which keeps every propensity finite.
struct PolicyParams {
    enum class Family { linear, tabular };

    Family family = Family::linear;
    int action_count = 0;
    int context_count = 0;      // linear feature map dimensions
    int observation_count = 0;
    std::map<std::string, int> state_rows;  // tabular: key -> row
    std::vector<double> values;             // linear: A*F; tabular: rows*A

    int feature_dim() const { return context_count + action_count * observation_count; }
    std::size_t dim() const { return values.size(); }
};

// Zero-parameter (uniform) policy of the given family for an environment.
PolicyParams uniform_policy(const EnvSpec& env, PolicyParams::Family family);

// Linear policy with i.i.d. N(0, scale^2) entries.
PolicyParams random_linear_policy(const EnvSpec& env, Rng& rng, double scale);

// phi(state) for the linear family.
std::vector<double> feature_vector(const PolicyParams& params, const HistoryState& state);

std::vector<double> action_logits(const PolicyParams& params, const HistoryState& state);
std::vector<double> action_logprobs(const PolicyParams& params, const HistoryState& state);
double action_logprob(const PolicyParams& params, const HistoryState& state, ActionId action);

struct SampledAction {
    ActionId action = 0;
    double logprob = 0.0;  // under the tempered distribution actually sampled
};

SampledAction sample_action(const PolicyParams& params, const HistoryState& state,
                            double temperature, Rng& rng);

ActionId greedy_action(const PolicyParams& params, const HistoryState& state);

// Score of the realized action: d/dtheta log pi(action | state; theta),
// returned dense in the shape of theta. For tabular parameters the gradient
// of an unmaterialized state is zero (the uniform fallback is constant).
std::vector<double> grad_action_logprob(const PolicyParams& params, const HistoryState& state,
                                        ActionId action);

// log pi(tau | x; theta): sum of action log-probabilities, plus the exact
// observation log-probabilities (recomputed from the environment) when
// include_observations is set.
double trajectory_logprob(const PolicyParams& params, const EnvSpec& env,
                          const TaskInstance& task, const Trajectory& trajectory,
                          bool include_observations);

// Actions-only sum against theta; the theta-dependent part of the offline
// objective. Needs no environment.
double trajectory_action_logprob(const PolicyParams& params, const TaskInstance& task,
                                 const Trajectory& trajectory);

// Tabular row management. ensure_state appends a zero row when absent and
// returns the row index; callers materialize rows before training so the
// parameter vector has a fixed shape during gradient updates.
int ensure_state(PolicyParams& params, const HistoryState& state);
void materialize_dataset_states(PolicyParams& params, const Dataset& dataset);

// Checkpoint file: single JSON object, 17-digit reals.
void save_policy(const PolicyParams& params, const std::filesystem::path& path);
PolicyParams load_policy(const std::filesystem::path& path);

}  // namespace convopt
