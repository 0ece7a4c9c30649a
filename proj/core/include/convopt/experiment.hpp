#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "convopt/datagen.hpp"
#include "convopt/env.hpp"
#include "convopt/evalreport.hpp"
#include "convopt/policy.hpp"
#include "convopt/reward.hpp"
#include "convopt/trainers.hpp"

namespace convopt {

/// Everything a run needs, loadable from a JSON file. Defaults describe the
/// reference instance: 3 intents with 2 binary attributes, 3-step episodes,
/// deterministic user, exact-match reward, tabular policies, 500 tasks with a
/// 400-task logging split.
struct ExperimentConfig {
    std::string output_dir = "out";
    std::uint64_t master_seed = 0;
    int jobs = 1;

    EnvSpec env = EnvSpec::hidden_intent(3, 2, 2, 4, 3);
    RewardSpec reward;
    PolicyParams::Family policy_family = PolicyParams::Family::tabular;
    int tasks_total = 500;
    int tasks_train = 400;

    DatagenConfig datagen;
    TrainConfig train;

    int eval_episodes_per_task = 100;
    bool eval_greedy = false;

    int verify_tasks = 6;
    int verify_theta_count = 100;
    int verify_theta0_count = 5;
    double verify_theta_scale = 0.5;

    void validate() const;
};

/// Strict parse: unknown keys anywhere reject the file.
ExperimentConfig load_config(const std::string& path);

/// Canonical JSON of every effective setting (defaults filled in).
std::string effective_config_json(const ExperimentConfig& cfg);

/// Hash of the canonical form, hex-encoded; stamped into manifests.
std::string config_hash_hex(const ExperimentConfig& cfg);

/// The full task list (tasks_total long) derived from master_seed; the first
/// tasks_train are logged, the rest are held out for evaluation.
std::vector<TaskInstance> experiment_tasks(const ExperimentConfig& cfg);

/// The behavior/init policy: uniform over actions in the configured family.
PolicyParams behavior_policy(const ExperimentConfig& cfg);

inline constexpr const char* kAlgoNames[] = {"refit", "swift", "threshold-sft", "dpo",
                                             "step-dpo"};

// Commands return a process exit code: 0 ok, 1 validation (or unsatisfied
// bounds from verify), 2 I/O, 3 capability. They throw the matching exception
// types from errors.hpp; the CLI maps them.
int cmd_datagen(const ExperimentConfig& cfg);
int cmd_train(const ExperimentConfig& cfg, const std::string& algo,
              const std::string& dataset_path = "");
int cmd_eval(const ExperimentConfig& cfg);
int cmd_verify_bounds(const ExperimentConfig& cfg);
int cmd_report(const ExperimentConfig& cfg);

}  // namespace convopt
