#include "convopt/trainers.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include "convopt/errors.hpp"
#include "convopt/numeric.hpp"

namespace convopt {

void TrainConfig::validate() const {
    if (epochs < 1) throw validation_error("train: epochs must be >= 1");
    if (!(lr > 0.0)) throw validation_error("train: lr must be > 0");
    if (clip_norm < 0.0) throw validation_error("train: clip_norm must be >= 0");
    if (!(dpo_beta > 0.0)) throw validation_error("train: dpo_beta must be > 0");
}

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t shuffle_seed, int epoch) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(derive_seed(shuffle_seed, static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = n; i > 1; --i) {
        const std::uint64_t j = rng.uniform_int(i);
        std::swap(order[i - 1], order[j]);
    }
    return order;
}

namespace {

// Shared ascent state: one instance per training run, owning the update index
// i that drives the schedule alpha_i.
class Ascender {
  public:
    Ascender(const TrainConfig& cfg, std::size_t dim) : cfg_(cfg) {
        if (cfg_.adaptive) {
            m_.assign(dim, 0.0);
            v_.assign(dim, 0.0);
        }
    }

    void apply(PolicyParams& params, std::vector<double>& grad) {
        double norm_sq = 0.0;
        for (const double g : grad) {
            if (!std::isfinite(g)) {
                throw validation_error("train: non-finite gradient at update " +
                                       std::to_string(i_));
            }
            norm_sq += g * g;
        }
        if (cfg_.clip_norm > 0.0) {
            const double norm = std::sqrt(norm_sq);
            if (norm > cfg_.clip_norm) {
                const double scale = cfg_.clip_norm / norm;
                for (double& g : grad) g *= scale;
            }
        }
        const double alpha = cfg_.schedule == TrainConfig::Schedule::constant
                                 ? cfg_.lr
                                 : cfg_.lr / std::sqrt(static_cast<double>(i_));
        if (cfg_.adaptive) {
            constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
            const double t = static_cast<double>(i_);
            for (std::size_t k = 0; k < grad.size(); ++k) {
                m_[k] = b1 * m_[k] + (1.0 - b1) * grad[k];
                v_[k] = b2 * v_[k] + (1.0 - b2) * grad[k] * grad[k];
                const double m_hat = m_[k] / (1.0 - std::pow(b1, t));
                const double v_hat = v_[k] / (1.0 - std::pow(b2, t));
                params.values[k] += alpha * m_hat / (std::sqrt(v_hat) + eps);
            }
        } else {
            for (std::size_t k = 0; k < grad.size(); ++k) {
                params.values[k] += alpha * grad[k];
            }
        }
        ++i_;
    }

    std::size_t updates() const { return i_ - 1; }

  private:
    const TrainConfig& cfg_;
    std::size_t i_ = 1;
    std::vector<double> m_, v_;
};

void record_epoch(TrainResult& result, const Dataset& dataset, bool use_standardized,
                  const ExactTraceSpec* trace) {
    result.offline_objective_by_epoch.push_back(
        offline_objective(result.params, dataset, use_standardized));
    if (trace) {
        result.exact_value_by_epoch.push_back(
            exact_value(result.params, trace->env, trace->reward_spec, trace->tasks));
    }
}

// The Algorithm-1 loop: shuffled passes over (dataset index, weight) items.
TrainResult weighted_sft(const PolicyParams& theta_init, const Dataset& dataset,
                         const std::vector<std::size_t>& items,
                         const std::vector<double>& weights, const TrainConfig& cfg,
                         bool trace_standardized, const ExactTraceSpec* trace) {
    TrainResult result;
    result.params = theta_init;
    materialize_dataset_states(result.params, dataset);
    Ascender ascender(cfg, static_cast<std::size_t>(result.params.dim()));
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (const std::size_t pos : epoch_order(items.size(), cfg.shuffle_seed, epoch)) {
            const LoggedExample& example = dataset.examples[items[pos]];
            const double w = weights[pos];
            std::vector<double> grad(static_cast<std::size_t>(result.params.dim()), 0.0);
            if (w != 0.0) {
                for (std::size_t t = 0; t < example.trajectory.steps.size(); ++t) {
                    const HistoryState state =
                        history_prefix(example.task, example.trajectory, t);
                    const std::vector<double> g = grad_action_logprob(
                        result.params, state, example.trajectory.steps[t].action);
                    for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += w * g[k];
                }
            }
            ascender.apply(result.params, grad);
        }
        record_epoch(result, dataset, trace_standardized, trace);
    }
    result.update_count = ascender.updates();
    return result;
}

std::vector<std::size_t> all_indices(const Dataset& dataset) {
    std::vector<std::size_t> items(dataset.examples.size());
    for (std::size_t i = 0; i < items.size(); ++i) items[i] = i;
    return items;
}

std::map<std::string, std::vector<std::size_t>> groups_of(const Dataset& dataset) {
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < dataset.examples.size(); ++i) {
        groups[dataset.examples[i].group_id].push_back(i);
    }
    return groups;
}

void require_dataset(const Dataset& dataset) {
    if (dataset.examples.empty()) throw validation_error("train: empty dataset");
}

}  // namespace

TrainResult train_refit(const PolicyParams& theta_init, const Dataset& dataset,
                        const TrainConfig& cfg, const ExactTraceSpec* trace) {
    cfg.validate();
    require_dataset(dataset);
    if (cfg.reward_mode != TrainConfig::RewardMode::raw) {
        throw validation_error("train_refit: reward_mode must be raw");
    }
    const std::vector<std::size_t> items = all_indices(dataset);
    std::vector<double> weights(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
        weights[i] = dataset.examples[i].reward_raw;
    }
    return weighted_sft(theta_init, dataset, items, weights, cfg, false, trace);
}

TrainResult train_swift(const PolicyParams& theta_init, const Dataset& dataset,
                        const TrainConfig& cfg, const ExactTraceSpec* trace) {
    cfg.validate();
    require_dataset(dataset);
    if (cfg.reward_mode != TrainConfig::RewardMode::standardized) {
        throw validation_error("train_swift: reward_mode must be standardized");
    }
    const std::vector<std::size_t> items = all_indices(dataset);
    std::vector<double> weights(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (!dataset.examples[i].reward_std) {
            throw validation_error("train_swift: reward_std missing");
        }
        weights[i] = *dataset.examples[i].reward_std;
    }
    return weighted_sft(theta_init, dataset, items, weights, cfg, true, trace);
}

TrainResult train_threshold_sft(const PolicyParams& theta_init, const Dataset& dataset,
                                const TrainConfig& cfg, const ExactTraceSpec* trace) {
    cfg.validate();
    require_dataset(dataset);
    std::vector<std::size_t> items;
    for (const auto& [group, indices] : groups_of(dataset)) {
        std::size_t best = indices.front();
        for (const std::size_t i : indices) {
            if (dataset.examples[i].reward_raw > dataset.examples[best].reward_raw) best = i;
        }
        items.push_back(best);
    }
    const std::vector<double> weights(items.size(), 1.0);
    return weighted_sft(theta_init, dataset, items, weights, cfg, false, trace);
}

namespace {

double action_score_sum(const PolicyParams& params, const LoggedExample& example) {
    return trajectory_action_logprob(params, example.task, example.trajectory);
}

}  // namespace

TrainResult train_dpo(const PolicyParams& theta_init, const PolicyParams& theta_ref,
                      const Dataset& dataset, const TrainConfig& cfg,
                      const ExactTraceSpec* trace) {
    cfg.validate();
    require_dataset(dataset);
    TrainResult result;
    result.params = theta_init;
    materialize_dataset_states(result.params, dataset);

    std::string skipped;
    for (const auto& [group, indices] : groups_of(dataset)) {
        std::size_t best = indices.front();
        std::size_t worst = indices.front();
        for (const std::size_t i : indices) {
            if (dataset.examples[i].reward_raw > dataset.examples[best].reward_raw) best = i;
            if (dataset.examples[i].reward_raw < dataset.examples[worst].reward_raw) worst = i;
        }
        if (dataset.examples[best].reward_raw == dataset.examples[worst].reward_raw) {
            skipped += skipped.empty() ? group : ", " + group;
            continue;
        }
        PreferencePair pair;
        pair.group_id = group;
        pair.winner_index = static_cast<int>(best);
        pair.loser_index = static_cast<int>(worst);
        result.pairs.push_back(std::move(pair));
    }
    if (result.pairs.empty()) {
        throw validation_error("train_dpo: no group has distinct rewards (all skipped: " +
                               skipped + ")");
    }

    Ascender ascender(cfg, static_cast<std::size_t>(result.params.dim()));
    const double beta = cfg.dpo_beta;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (const std::size_t pos :
             epoch_order(result.pairs.size(), cfg.shuffle_seed, epoch)) {
            const PreferencePair& pair = result.pairs[pos];
            const LoggedExample& winner =
                dataset.examples[static_cast<std::size_t>(pair.winner_index)];
            const LoggedExample& loser =
                dataset.examples[static_cast<std::size_t>(pair.loser_index)];
            const double z = beta * ((action_score_sum(result.params, winner) -
                                      action_score_sum(theta_ref, winner)) -
                                     (action_score_sum(result.params, loser) -
                                      action_score_sum(theta_ref, loser)));
            const double coeff = beta * logistic(-z);
            std::vector<double> grad(static_cast<std::size_t>(result.params.dim()), 0.0);
            for (std::size_t t = 0; t < winner.trajectory.steps.size(); ++t) {
                const HistoryState state = history_prefix(winner.task, winner.trajectory, t);
                const std::vector<double> g = grad_action_logprob(
                    result.params, state, winner.trajectory.steps[t].action);
                for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += coeff * g[k];
            }
            for (std::size_t t = 0; t < loser.trajectory.steps.size(); ++t) {
                const HistoryState state = history_prefix(loser.task, loser.trajectory, t);
                const std::vector<double> g = grad_action_logprob(
                    result.params, state, loser.trajectory.steps[t].action);
                for (std::size_t k = 0; k < grad.size(); ++k) grad[k] -= coeff * g[k];
            }
            ascender.apply(result.params, grad);
        }
        record_epoch(result, dataset, false, trace);
    }
    result.update_count = ascender.updates();
    return result;
}

TrainResult train_step_dpo(const PolicyParams& theta_init, const PolicyParams& theta_ref,
                           const PolicyParams& theta0, const EnvSpec& env,
                           const RewardSpec& reward_spec, const Dataset& dataset,
                           const TrainConfig& cfg, std::uint64_t counterfactual_seed,
                           const ExactTraceSpec* trace) {
    cfg.validate();
    require_dataset(dataset);
    TrainResult result;
    result.params = theta_init;
    materialize_dataset_states(result.params, dataset);
    Ascender ascender(cfg, static_cast<std::size_t>(result.params.dim()));
    const double beta = cfg.dpo_beta;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const std::uint64_t epoch_seed =
            derive_seed(counterfactual_seed, static_cast<std::uint64_t>(epoch));
        for (const std::size_t e :
             epoch_order(dataset.examples.size(), cfg.shuffle_seed, epoch)) {
            const LoggedExample& example = dataset.examples[e];
            for (std::size_t t = 0; t < example.trajectory.steps.size(); ++t) {
                // Stream keyed by the stable dataset index, not the shuffled
                // position, so counterfactuals are shuffle-invariant.
                Rng stream(derive_seed(epoch_seed, static_cast<std::uint64_t>(e),
                                       static_cast<std::uint64_t>(t)));
                const HistoryState state = history_prefix(example.task, example.trajectory, t);
                const ActionId logged = example.trajectory.steps[t].action;

                ActionId alt = logged;
                SampledAction alt_sample{};
                for (int redraw = 0; redraw < 5 && alt == logged; ++redraw) {
                    alt_sample = sample_action(theta0, state, example.temperature, stream);
                    alt = alt_sample.action;
                }
                if (alt == logged) continue;

                const UserResponse response = user_response(env, example.task, state, alt,
                                                            stream);
                Trajectory partial;
                partial.steps.assign(example.trajectory.steps.begin(),
                                     example.trajectory.steps.begin() +
                                         static_cast<std::ptrdiff_t>(t));
                partial.steps.push_back(
                    Step{alt, alt_sample.logprob, response.observation, response.logprob});
                const double alt_reward =
                    complete_rollout(theta0, env, reward_spec, example.task,
                                     std::move(partial), example.temperature, true, stream)
                        .second;
                if (alt_reward == example.reward_raw) continue;

                const ActionId w_action = alt_reward > example.reward_raw ? alt : logged;
                const ActionId l_action = alt_reward > example.reward_raw ? logged : alt;
                const double z =
                    beta * ((action_logprob(result.params, state, w_action) -
                             action_logprob(theta_ref, state, w_action)) -
                            (action_logprob(result.params, state, l_action) -
                             action_logprob(theta_ref, state, l_action)));
                const double coeff = beta * logistic(-z);
                const std::vector<double> gw =
                    grad_action_logprob(result.params, state, w_action);
                const std::vector<double> gl =
                    grad_action_logprob(result.params, state, l_action);
                std::vector<double> grad(gw.size());
                for (std::size_t k = 0; k < grad.size(); ++k) {
                    grad[k] = coeff * (gw[k] - gl[k]);
                }
                ascender.apply(result.params, grad);

                PreferencePair pair;
                pair.group_id = example.group_id;
                pair.winner_index = alt_reward > example.reward_raw ? -1 : static_cast<int>(e);
                pair.loser_index = alt_reward > example.reward_raw ? static_cast<int>(e) : -1;
                pair.step = static_cast<int>(t);
                pair.winner_action = w_action;
                pair.loser_action = l_action;
                result.pairs.push_back(std::move(pair));
            }
        }
        record_epoch(result, dataset, false, trace);
    }
    result.update_count = ascender.updates();
    return result;
}

}  // namespace convopt
