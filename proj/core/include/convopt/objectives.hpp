#pragma once

#include <vector>

#include "convopt/datagen.hpp"
#include "convopt/env.hpp"
#include "convopt/policy.hpp"
#include "convopt/reward.hpp"
#include "convopt/rng.hpp"
#include "convopt/types.hpp"

namespace convopt {

// All exact functionals enumerate every trajectory, so they demand enumerable
// instances (see enumeration_leaf_bound) and weight the supplied tasks
// uniformly. Passing a StandardizationMap replaces each task's reward r with
// (r - mu_hat)/sigma_hat from the task's group stats (0 for degenerate groups);
// every task must then have an entry.

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
};

struct BoundReport {
    double v_online = 0.0;       // exact value of theta (standardized analog for the
                                 // standardized-reward bound)
    double j_offline_full = 0.0; // exact E under behavior of r * full trajectory logprob
    double c1 = 0.0;
    double c2 = 0.0;             // pointwise at theta; 0 for the raw-reward bound
    double b = 0.0;              // reward bound: 1 raw, max |standardized r| otherwise
    double gap = 0.0;            // slack of the inequality; satisfied <=> gap >= -1e-9
    bool satisfied = false;
};

/// Exact policy value: mean over tasks of sum_tau pi(tau|x;theta) * reward.
double exact_value(const PolicyParams& theta, const EnvSpec& env,
                   const RewardSpec& reward_spec, const std::vector<TaskInstance>& tasks,
                   const StandardizationMap* standardization = nullptr);

/// Monte Carlo estimate of the same value (temperature-1 rollouts, tasks drawn
/// uniformly). std_error = sample std / sqrt(samples).
McEstimate mc_value(const PolicyParams& theta, const EnvSpec& env,
                    const RewardSpec& reward_spec, const std::vector<TaskInstance>& tasks,
                    int samples, Rng& rng);

/// Importance-sampling estimate of the value of theta from logged data:
/// mean of r * exp(actions-only logprob under theta - stored behavior logprob).
/// Observation terms cancel. clip bounds each ratio when finite (diagnostic
/// only; off by default).
McEstimate ips_value(const Dataset& dataset, const PolicyParams& theta, const EnvSpec& env,
                     double clip = 0.0);

/// Same estimand computed exactly by enumeration through the ratio route;
/// equals exact_value(theta) identically.
double exact_ips_value(const PolicyParams& theta, const PolicyParams& theta0,
                       const EnvSpec& env, const RewardSpec& reward_spec,
                       const std::vector<TaskInstance>& tasks);

/// Sample offline surrogate: mean over examples of
/// (r or r_std) * sum_t log pi(a_t | x, tau_{t-1}; theta). Actions only.
double offline_objective(const PolicyParams& theta, const Dataset& dataset,
                         bool use_standardized);

/// Exact E under the behavior policy of r * log pi(tau|x;theta), full
/// trajectory probability including observation terms.
double exact_offline_full(const PolicyParams& theta, const PolicyParams& theta0,
                          const EnvSpec& env, const RewardSpec& reward_spec,
                          const std::vector<TaskInstance>& tasks,
                          const StandardizationMap* standardization = nullptr);

/// Actions-only counterpart of exact_offline_full.
double exact_offline_actions(const PolicyParams& theta, const PolicyParams& theta0,
                             const EnvSpec& env, const RewardSpec& reward_spec,
                             const std::vector<TaskInstance>& tasks,
                             const StandardizationMap* standardization = nullptr);

/// The theta-independent observation term: exact E under behavior of
/// r * sum_t log p(y_t | ...). exact_offline_full = exact_offline_actions + this.
double observation_constant(const PolicyParams& theta0, const EnvSpec& env,
                            const RewardSpec& reward_spec,
                            const std::vector<TaskInstance>& tasks,
                            const StandardizationMap* standardization = nullptr);

/// C1 = exact E under behavior of r * (1 - log pi0(tau|x)). Nonnegative for
/// nonnegative rewards; may be negative under standardization.
double constant_c1(const PolicyParams& theta0, const EnvSpec& env,
                   const RewardSpec& reward_spec, const std::vector<TaskInstance>& tasks,
                   const StandardizationMap* standardization = nullptr);

/// C2 = b * max over enumerated (x, tau) of (u - 1 - log u), u = ratio of
/// trajectory probabilities theta/theta0. Always >= 0.
double pointwise_c2(const PolicyParams& theta, const PolicyParams& theta0, const EnvSpec& env,
                    const std::vector<TaskInstance>& tasks, double b);

/// Per-example update direction: (r or r_std) * sum_t grad log pi(a_t | ...).
std::vector<double> grad_example(const PolicyParams& theta, const LoggedExample& example,
                                 bool use_standardized);

/// Trace of the sample covariance of per-example gradients.
double gradient_variance(const PolicyParams& theta, const Dataset& dataset,
                         bool use_standardized);

/// Checks exact_value(theta) >= exact_offline_full(theta, theta0) + C1.
/// gap = left - right; satisfied <=> gap >= -1e-9. Tight at theta = theta0.
BoundReport verify_lemma1(const PolicyParams& theta, const PolicyParams& theta0,
                          const EnvSpec& env, const RewardSpec& reward_spec,
                          const std::vector<TaskInstance>& tasks);

/// Standardized-reward analog:
/// |std online value - std offline-full| <= |C1| + C2 with b = max |r_std|.
/// gap = bound - left side.
BoundReport verify_lemma3(const PolicyParams& theta, const PolicyParams& theta0,
                          const EnvSpec& env, const RewardSpec& reward_spec,
                          const std::vector<TaskInstance>& tasks,
                          const StandardizationMap& standardization);

struct GreedyResult {
    PolicyParams params;   // tabular, +60-logit rows on the chosen actions
    double optimal_value;  // belief-weighted optimal expected reward, mean over tasks
};

/// Backward-induction optimal policy over reachable histories. Tasks sharing a
/// context_id form one belief block (the policy cannot see the hidden intent);
/// such tasks must agree on horizon.
GreedyResult greedy_optimal_tabular(const EnvSpec& env, const RewardSpec& reward_spec,
                                    const std::vector<TaskInstance>& tasks);

}  // namespace convopt
