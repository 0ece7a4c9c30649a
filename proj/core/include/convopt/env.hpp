#pragma once

#include <string>
#include <vector>

#include "convopt/policy.hpp"
#include "convopt/rng.hpp"
#include "convopt/types.hpp"

namespace convopt {

// Simulated users. Two families:
//
//  hidden_intent: the user holds one of G intents, each described by K
//  attributes with V values (attribute j of intent g is digit j of g in
//  base V). Actions 0..K-1 ask attribute j; actions K..K+G-1 commit to an
//  answer. Asking returns the true attribute value with probability
//  1 - user_noise, otherwise a uniformly wrong value. Answer actions return
//  a terminal acknowledgment observation (id = V). A = K + G, O = V + 1.
//
//  scripted_exam: the user follows a fixed script regardless of the agent's
//  actions ("solve" -> "think deeper" -> "final answer"); the observation at
//  step t is script line min(t, 2). Actions are answer-choice x style
//  templates: a = choice * styles + style. A = G * styles, O = 3.
struct EnvSpec {
    enum class Family { hidden_intent, scripted_exam };

    Family family = Family::hidden_intent;
    int intent_count = 1;     // G
    int attribute_count = 0;  // K (hidden_intent)
    int value_count = 1;      // V (hidden_intent)
    int style_count = 1;      // scripted_exam
    int context_count = 1;
    int horizon = 1;          // default task horizon
    bool adaptive = false;    // answer actions end the episode
    double user_noise = 0.0;  // epsilon

    static EnvSpec hidden_intent(int intents, int attributes, int values, int contexts,
                                 int horizon, bool adaptive = false, double noise = 0.0);
    static EnvSpec scripted_exam(int choices, int styles, int contexts, int horizon);

    int action_count() const;
    int observation_count() const;

    bool is_answer_action(ActionId a) const;
    // Intent committed to by an answer action (-1 for clarifiers).
    int answer_intent(ActionId a) const;
    // Style bit used by the judge stub: template style bit in the scripted
    // family, 1 for clarifying actions in the hidden-intent family.
    int action_style(ActionId a) const;
    // Attribute value j of intent g: digit j of g in base V.
    int attribute_value(int intent, int attribute) const;
    bool final_answer_matches(const TaskInstance& task, const Trajectory& trajectory) const;

    void validate() const;
};

// Tasks with uniformly drawn context and hidden intent; deterministic given
// the rng stream. Task ids are "task-000042" style.
std::vector<TaskInstance> make_tasks(const EnvSpec& spec, int count, Rng& rng);

struct UserResponse {
    ObservationId observation = 0;
    double logprob = 0.0;
};

UserResponse user_response(const EnvSpec& spec, const TaskInstance& task,
                           const HistoryState& history, ActionId action, Rng& rng);

// Exact log p(y | x, history, a) for a realized observation; -inf when the
// observation is outside the support.
double observation_logprob(const EnvSpec& spec, const TaskInstance& task,
                           const HistoryState& history, ActionId action,
                           ObservationId observation);

// Support of the observation distribution as (observation, probability)
// pairs; probabilities sum to 1.
std::vector<std::pair<ObservationId, double>> observation_support(
    const EnvSpec& spec, const TaskInstance& task, const HistoryState& history,
    ActionId action);

bool is_terminal(const EnvSpec& spec, const TaskInstance& task, const HistoryState& history);

struct EnumeratedTrajectory {
    Trajectory trajectory;         // lp_y exact; lp_a filled when theta given
    double obs_prob_product = 1.0; // product of observation probabilities
};

// Upper bound on the enumeration leaf count, (A * max obs branching)^n.
double enumeration_leaf_bound(const EnvSpec& spec, const TaskInstance& task);

// Every reachable trajectory of the task exactly once. Guarded: refuses
// instances whose leaf bound exceeds 10^6. When theta is given, behavior
// log-propensities are filled with log pi(a | s; theta) so the entries
// carry the full trajectory probability.
std::vector<EnumeratedTrajectory> enumerate_trajectories(const EnvSpec& spec,
                                                         const TaskInstance& task,
                                                         const PolicyParams* theta = nullptr);

// History after replaying the first `steps` steps of a trajectory.
HistoryState history_prefix(const TaskInstance& task, const Trajectory& trajectory,
                            std::size_t steps);

}  // namespace convopt
