#include "convopt/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "convopt/errors.hpp"
#include "convopt/numeric.hpp"

namespace convopt {

namespace {

constexpr double kSlack = 1e-9;

const StandardizationStats& stats_for(const StandardizationMap& map,
                                      const TaskInstance& task) {
    const auto it = map.find(task.task_id);
    if (it == map.end()) {
        throw validation_error("standardization stats missing for task \"" + task.task_id +
                               "\"");
    }
    return it->second;
}

double weighted_reward(const RewardSpec& reward_spec, const EnvSpec& env,
                       const TaskInstance& task, const Trajectory& trajectory,
                       const StandardizationMap* standardization) {
    const double r = episode_reward(reward_spec, env, task, trajectory);
    if (!standardization) return r;
    return standardized_reward(r, stats_for(*standardization, task));
}

double action_lp_sum(const Trajectory& trajectory) {
    double total = 0.0;
    for (const Step& step : trajectory.steps) total += step.behavior_action_logprob;
    return total;
}

double observation_lp_sum(const Trajectory& trajectory) {
    double total = 0.0;
    for (const Step& step : trajectory.steps) total += step.observation_logprob;
    return total;
}

void require_tasks(const std::vector<TaskInstance>& tasks) {
    if (tasks.empty()) throw validation_error("objectives: task list must be non-empty");
}

// Shared accumulation for the exact behavior-side functionals: sums
// pi0(tau|x) * weight(r) * term(tau) over all trajectories, averaged over tasks.
template <typename TermFn>
double exact_behavior_expectation(const PolicyParams& theta0, const EnvSpec& env,
                                  const RewardSpec& reward_spec,
                                  const std::vector<TaskInstance>& tasks,
                                  const StandardizationMap* standardization, TermFn term) {
    require_tasks(tasks);
    double total = 0.0;
    for (const TaskInstance& task : tasks) {
        double task_sum = 0.0;
        for (const EnumeratedTrajectory& e : enumerate_trajectories(env, task, &theta0)) {
            const double w =
                weighted_reward(reward_spec, env, task, e.trajectory, standardization);
            if (w == 0.0) continue;
            const double p0 = std::exp(action_lp_sum(e.trajectory)) * e.obs_prob_product;
            task_sum += p0 * w * term(task, e);
        }
        total += task_sum;
    }
    return total / static_cast<double>(tasks.size());
}

}  // namespace

double exact_value(const PolicyParams& theta, const EnvSpec& env,
                   const RewardSpec& reward_spec, const std::vector<TaskInstance>& tasks,
                   const StandardizationMap* standardization) {
    require_tasks(tasks);
    double total = 0.0;
    for (const TaskInstance& task : tasks) {
        double task_sum = 0.0;
        for (const EnumeratedTrajectory& e : enumerate_trajectories(env, task, &theta)) {
            const double w =
                weighted_reward(reward_spec, env, task, e.trajectory, standardization);
            if (w == 0.0) continue;
            task_sum += std::exp(action_lp_sum(e.trajectory)) * e.obs_prob_product * w;
        }
        total += task_sum;
    }
    return total / static_cast<double>(tasks.size());
}

McEstimate mc_value(const PolicyParams& theta, const EnvSpec& env,
                    const RewardSpec& reward_spec, const std::vector<TaskInstance>& tasks,
                    int samples, Rng& rng) {
    require_tasks(tasks);
    if (samples < 1) throw validation_error("mc_value: samples must be >= 1");
    std::vector<double> rewards;
    rewards.reserve(static_cast<std::size_t>(samples));
    for (int i = 0; i < samples; ++i) {
        const TaskInstance& task = tasks[rng.uniform_int(tasks.size())];
        rewards.push_back(
            complete_rollout(theta, env, reward_spec, task, Trajectory{}, 1.0, true, rng)
                .second);
    }
    McEstimate out;
    out.mean = mean_of(rewards);
    out.std_error =
        samples >= 2 ? sample_std(rewards) / std::sqrt(static_cast<double>(samples)) : 0.0;
    return out;
}

McEstimate ips_value(const Dataset& dataset, const PolicyParams& theta, const EnvSpec& env,
                     double clip) {
    if (dataset.examples.empty()) throw validation_error("ips_value: empty dataset");
    if (env.action_count() != theta.action_count) {
        throw validation_error("ips_value: policy/env action counts differ");
    }
    std::vector<double> values;
    values.reserve(dataset.examples.size());
    for (const LoggedExample& example : dataset.examples) {
        const double lp_target =
            trajectory_action_logprob(theta, example.task, example.trajectory);
        const double lp_behavior = action_lp_sum(example.trajectory);
        double ratio = std::exp(lp_target - lp_behavior);
        if (clip > 0.0) ratio = std::min(ratio, clip);
        values.push_back(example.reward_raw * ratio);
    }
    McEstimate out;
    out.mean = mean_of(values);
    out.std_error = values.size() >= 2
                        ? sample_std(values) / std::sqrt(static_cast<double>(values.size()))
                        : 0.0;
    return out;
}

double exact_ips_value(const PolicyParams& theta, const PolicyParams& theta0,
                       const EnvSpec& env, const RewardSpec& reward_spec,
                       const std::vector<TaskInstance>& tasks) {
    // Deliberately routed through the importance ratio rather than simplified,
    // so the estimand identity with exact_value is checkable.
    return exact_behavior_expectation(
        theta0, env, reward_spec, tasks, nullptr,
        [&](const TaskInstance& task, const EnumeratedTrajectory& e) {
            const double lp0 = action_lp_sum(e.trajectory);
            if (!std::isfinite(lp0)) {
                throw validation_error("exact_ips_value: behavior policy lacks support");
            }
            return std::exp(trajectory_action_logprob(theta, task, e.trajectory) - lp0);
        });
}

double offline_objective(const PolicyParams& theta, const Dataset& dataset,
                         bool use_standardized) {
    if (dataset.examples.empty()) throw validation_error("offline_objective: empty dataset");
    double total = 0.0;
    for (const LoggedExample& example : dataset.examples) {
        double w = example.reward_raw;
        if (use_standardized) {
            if (!example.reward_std) {
                throw validation_error("offline_objective: reward_std missing");
            }
            w = *example.reward_std;
        }
        if (w == 0.0) continue;
        total += w * trajectory_action_logprob(theta, example.task, example.trajectory);
    }
    return total / static_cast<double>(dataset.examples.size());
}

double exact_offline_full(const PolicyParams& theta, const PolicyParams& theta0,
                          const EnvSpec& env, const RewardSpec& reward_spec,
                          const std::vector<TaskInstance>& tasks,
                          const StandardizationMap* standardization) {
    return exact_behavior_expectation(
        theta0, env, reward_spec, tasks, standardization,
        [&](const TaskInstance& task, const EnumeratedTrajectory& e) {
            return trajectory_action_logprob(theta, task, e.trajectory) +
                   observation_lp_sum(e.trajectory);
        });
}

double exact_offline_actions(const PolicyParams& theta, const PolicyParams& theta0,
                             const EnvSpec& env, const RewardSpec& reward_spec,
                             const std::vector<TaskInstance>& tasks,
                             const StandardizationMap* standardization) {
    return exact_behavior_expectation(
        theta0, env, reward_spec, tasks, standardization,
        [&](const TaskInstance& task, const EnumeratedTrajectory& e) {
            return trajectory_action_logprob(theta, task, e.trajectory);
        });
}

double observation_constant(const PolicyParams& theta0, const EnvSpec& env,
                            const RewardSpec& reward_spec,
                            const std::vector<TaskInstance>& tasks,
                            const StandardizationMap* standardization) {
    return exact_behavior_expectation(
        theta0, env, reward_spec, tasks, standardization,
        [](const TaskInstance&, const EnumeratedTrajectory& e) {
            return observation_lp_sum(e.trajectory);
        });
}

double constant_c1(const PolicyParams& theta0, const EnvSpec& env,
                   const RewardSpec& reward_spec, const std::vector<TaskInstance>& tasks,
                   const StandardizationMap* standardization) {
    return exact_behavior_expectation(
        theta0, env, reward_spec, tasks, standardization,
        [](const TaskInstance&, const EnumeratedTrajectory& e) {
            return 1.0 - (action_lp_sum(e.trajectory) + observation_lp_sum(e.trajectory));
        });
}

double pointwise_c2(const PolicyParams& theta, const PolicyParams& theta0, const EnvSpec& env,
                    const std::vector<TaskInstance>& tasks, double b) {
    require_tasks(tasks);
    if (b < 0.0) throw validation_error("pointwise_c2: b must be >= 0");
    double worst = 0.0;
    for (const TaskInstance& task : tasks) {
        for (const EnumeratedTrajectory& e : enumerate_trajectories(env, task, &theta0)) {
            const double lp0 = action_lp_sum(e.trajectory);
            if (!std::isfinite(lp0)) {
                throw validation_error("pointwise_c2: behavior policy lacks support");
            }
            // Observation factors are common to both policies and cancel in u.
            const double log_u =
                trajectory_action_logprob(theta, task, e.trajectory) - lp0;
            const double u = std::exp(log_u);
            worst = std::max(worst, u - 1.0 - log_u);
        }
    }
    return b * worst;
}

std::vector<double> grad_example(const PolicyParams& theta, const LoggedExample& example,
                                 bool use_standardized) {
    double w = example.reward_raw;
    if (use_standardized) {
        if (!example.reward_std) throw validation_error("grad_example: reward_std missing");
        w = *example.reward_std;
    }
    std::vector<double> grad(static_cast<std::size_t>(theta.dim()), 0.0);
    if (w == 0.0) return grad;
    for (std::size_t t = 0; t < example.trajectory.steps.size(); ++t) {
        const HistoryState state = history_prefix(example.task, example.trajectory, t);
        const std::vector<double> g =
            grad_action_logprob(theta, state, example.trajectory.steps[t].action);
        for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += w * g[k];
    }
    return grad;
}

double gradient_variance(const PolicyParams& theta, const Dataset& dataset,
                         bool use_standardized) {
    const std::size_t n = dataset.examples.size();
    if (n < 2) throw validation_error("gradient_variance: need at least two examples");
    const std::size_t dim = static_cast<std::size_t>(theta.dim());
    std::vector<double> mean(dim, 0.0);
    std::vector<std::vector<double>> grads;
    grads.reserve(n);
    for (const LoggedExample& example : dataset.examples) {
        grads.push_back(grad_example(theta, example, use_standardized));
        for (std::size_t k = 0; k < dim; ++k) mean[k] += grads.back()[k];
    }
    for (double& v : mean) v /= static_cast<double>(n);
    double trace = 0.0;
    for (const std::vector<double>& g : grads) {
        for (std::size_t k = 0; k < dim; ++k) {
            const double d = g[k] - mean[k];
            trace += d * d;
        }
    }
    return trace / static_cast<double>(n - 1);
}

BoundReport verify_lemma1(const PolicyParams& theta, const PolicyParams& theta0,
                          const EnvSpec& env, const RewardSpec& reward_spec,
                          const std::vector<TaskInstance>& tasks) {
    BoundReport report;
    report.v_online = exact_value(theta, env, reward_spec, tasks);
    report.j_offline_full = exact_offline_full(theta, theta0, env, reward_spec, tasks);
    report.c1 = constant_c1(theta0, env, reward_spec, tasks);
    report.c2 = 0.0;
    report.b = 1.0;
    report.gap = report.v_online - report.j_offline_full - report.c1;
    report.satisfied = report.gap >= -kSlack;
    return report;
}

BoundReport verify_lemma3(const PolicyParams& theta, const PolicyParams& theta0,
                          const EnvSpec& env, const RewardSpec& reward_spec,
                          const std::vector<TaskInstance>& tasks,
                          const StandardizationMap& standardization) {
    require_tasks(tasks);
    BoundReport report;
    report.v_online = exact_value(theta, env, reward_spec, tasks, &standardization);
    report.j_offline_full =
        exact_offline_full(theta, theta0, env, reward_spec, tasks, &standardization);
    report.c1 = constant_c1(theta0, env, reward_spec, tasks, &standardization);
    double b = 0.0;
    for (const TaskInstance& task : tasks) {
        const StandardizationStats& stats = stats_for(standardization, task);
        for (const EnumeratedTrajectory& e : enumerate_trajectories(env, task)) {
            const double r = episode_reward(reward_spec, env, task, e.trajectory);
            b = std::max(b, std::abs(standardized_reward(r, stats)));
        }
    }
    report.b = b;
    report.c2 = pointwise_c2(theta, theta0, env, tasks, b);
    const double lhs = std::abs(report.v_online - report.j_offline_full);
    report.gap = (std::abs(report.c1) + report.c2) - lhs;
    report.satisfied = report.gap >= -kSlack;
    return report;
}

namespace {

constexpr double kGreedyLogit = 60.0;

struct BeliefBlock {
    std::vector<const TaskInstance*> tasks;
};

double greedy_dp(const EnvSpec& env, const RewardSpec& reward_spec, const BeliefBlock& block,
                 const std::vector<double>& weights, HistoryState& state,
                 PolicyParams& out) {
    const int actions = env.action_count();
    double best = -std::numeric_limits<double>::infinity();
    ActionId best_action = 0;
    for (ActionId a = 0; a < actions; ++a) {
        // Merge per-task observation supports so identical user replies share a
        // subtree; posterior weights are carried unnormalized.
        std::map<ObservationId, std::vector<double>> branches;
        for (std::size_t i = 0; i < block.tasks.size(); ++i) {
            if (weights[i] == 0.0) continue;
            for (const auto& [obs, p] : observation_support(env, *block.tasks[i], state, a)) {
                auto [it, inserted] =
                    branches.try_emplace(obs, std::vector<double>(block.tasks.size(), 0.0));
                it->second[i] += weights[i] * p;
            }
        }
        double value = 0.0;
        for (auto& [obs, next_weights] : branches) {
            state.prefix.emplace_back(a, obs);
            if (is_terminal(env, *block.tasks.front(), state)) {
                Trajectory trajectory;
                for (const auto& [pa, py] : state.prefix) {
                    trajectory.steps.push_back(Step{pa, 0.0, py, 0.0});
                }
                trajectory.terminated_early =
                    static_cast<int>(trajectory.steps.size()) <
                    block.tasks.front()->horizon;
                for (std::size_t i = 0; i < block.tasks.size(); ++i) {
                    if (next_weights[i] == 0.0) continue;
                    value += next_weights[i] *
                             episode_reward(reward_spec, env, *block.tasks[i], trajectory);
                }
            } else {
                value += greedy_dp(env, reward_spec, block, next_weights, state, out);
            }
            state.prefix.pop_back();
        }
        if (value > best) {
            best = value;
            best_action = a;
        }
    }
    ensure_state(out, state);
    const int row = out.state_rows.at(state_key(state));
    out.values[static_cast<std::size_t>(row) * out.action_count +
               static_cast<std::size_t>(best_action)] = kGreedyLogit;
    return best;
}

}  // namespace

GreedyResult greedy_optimal_tabular(const EnvSpec& env, const RewardSpec& reward_spec,
                                    const std::vector<TaskInstance>& tasks) {
    require_tasks(tasks);
    std::map<int, BeliefBlock> blocks;
    for (const TaskInstance& task : tasks) {
        if (enumeration_leaf_bound(env, task) > 1e6) {
            throw capability_error("greedy_optimal_tabular: instance is not enumerable");
        }
        BeliefBlock& block = blocks[task.context_id];
        if (!block.tasks.empty() && block.tasks.front()->horizon != task.horizon) {
            throw validation_error(
                "greedy_optimal_tabular: tasks sharing a context must share a horizon");
        }
        block.tasks.push_back(&task);
    }
    GreedyResult result;
    result.params = uniform_policy(env, PolicyParams::Family::tabular);
    double total = 0.0;
    for (const auto& [context, block] : blocks) {
        HistoryState state{context, {}};
        const std::vector<double> weights(block.tasks.size(), 1.0);
        total += greedy_dp(env, reward_spec, block, weights, state, result.params);
    }
    result.optimal_value = total / static_cast<double>(tasks.size());
    return result;
}

}  // namespace convopt
