#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "convopt/datagen.hpp"
#include "convopt/env.hpp"
#include "convopt/objectives.hpp"
#include "convopt/policy.hpp"
#include "convopt/reward.hpp"
#include "convopt/types.hpp"

namespace convopt {

struct TrainConfig {
    enum class Schedule { constant, inverse_sqrt };
    enum class RewardMode { raw, standardized };

    int epochs = 1;
    double lr = 0.5;
    Schedule schedule = Schedule::inverse_sqrt;  // alpha_i = lr / sqrt(i)
    std::uint64_t shuffle_seed = 0;
    RewardMode reward_mode = RewardMode::raw;
    double clip_norm = 0.0;  // 0 disables gradient-norm clipping
    double dpo_beta = 1.0;
    // Adam instead of plain SGD ascent. Off by default: adaptivity rescales
    // poorly scaled rewards and would mask the raw-vs-standardized contrast.
    bool adaptive = false;

    void validate() const;
};

struct PreferencePair {
    std::string group_id;
    // Dataset indices of the compared rollouts; -1 marks a counterfactual
    // completion that exists only inside the trainer.
    int winner_index = -1;
    int loser_index = -1;
    std::optional<int> step;  // set for per-step pairs
    ActionId winner_action = -1;
    ActionId loser_action = -1;
};

struct TrainResult {
    PolicyParams params;
    std::vector<double> offline_objective_by_epoch;
    std::vector<double> exact_value_by_epoch;  // filled only when a trace is requested
    std::size_t update_count = 0;
    std::vector<PreferencePair> pairs;  // DPO-family diagnostics
};

/// When supplied to a trainer, exact_value over these tasks is recorded after
/// every epoch (raw rewards, the true online objective).
struct ExactTraceSpec {
    EnvSpec env;
    RewardSpec reward_spec;
    std::vector<TaskInstance> tasks;
};

/// The epoch's example visit order: Fisher-Yates driven by a stream derived
/// from (shuffle_seed, epoch). Exposed so the update sequence is replayable.
std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t shuffle_seed, int epoch);

/// Reward-weighted fine-tuning: ascent on per-example
/// r * sum_t grad log pi(a_t | ...), one pass per epoch in shuffled order.
TrainResult train_refit(const PolicyParams& theta_init, const Dataset& dataset,
                        const TrainConfig& cfg, const ExactTraceSpec* trace = nullptr);

/// Same loop weighted by the per-group standardized reward.
TrainResult train_swift(const PolicyParams& theta_init, const Dataset& dataset,
                        const TrainConfig& cfg, const ExactTraceSpec* trace = nullptr);

/// Keeps only the best rollout per group (ties: lowest dataset index), then
/// fine-tunes on the kept set with unit weight.
TrainResult train_threshold_sft(const PolicyParams& theta_init, const Dataset& dataset,
                                const TrainConfig& cfg, const ExactTraceSpec* trace = nullptr);

/// Trajectory-level preference ascent: per group, best-vs-worst rollout pair
/// (all-equal groups skipped), update along grad log sigma(beta * margin of
/// reference-adjusted action scores).
TrainResult train_dpo(const PolicyParams& theta_init, const PolicyParams& theta_ref,
                      const Dataset& dataset, const TrainConfig& cfg,
                      const ExactTraceSpec* trace = nullptr);

/// Per-step preference ascent: at every logged step, draw an alternative
/// action from the behavior policy (at the logged temperature, <= 5 redraws),
/// complete the counterfactual episode under the behavior policy, and apply
/// the preference update to that single step's action. Ties skip the step.
TrainResult train_step_dpo(const PolicyParams& theta_init, const PolicyParams& theta_ref,
                           const PolicyParams& theta0, const EnvSpec& env,
                           const RewardSpec& reward_spec, const Dataset& dataset,
                           const TrainConfig& cfg, std::uint64_t counterfactual_seed,
                           const ExactTraceSpec* trace = nullptr);

}  // namespace convopt
