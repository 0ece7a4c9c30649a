#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "convopt/env.hpp"
#include "convopt/policy.hpp"
#include "convopt/reward.hpp"
#include "convopt/types.hpp"

namespace convopt {

struct EvalMetrics {
    double accuracy = 0.0;
    double accuracy_se = 0.0;
    double mean_reward = 0.0;
    double mean_reward_se = 0.0;
    double mean_len = 0.0;
    int episodes = 0;
};

struct ColumnMarkers {
    int best = -1;
    int second = -1;
};

struct ComparisonTable {
    std::vector<std::string> methods;
    std::vector<EvalMetrics> rows;  // aligned with methods
    ColumnMarkers accuracy;         // higher is better
    ColumnMarkers mean_reward;      // higher is better
    ColumnMarkers mean_len;         // lower is better
};

struct CompareConfig {
    int episodes_per_task = 100;
    std::uint64_t seed = 0;
    bool greedy = false;  // argmax actions instead of temperature-1 sampling
    int jobs = 1;
};

/// Monte Carlo evaluation: episodes_per_task rollouts per task at temperature 1
/// (or greedy). Rollout streams are derived from (seed, task_id, episode), so
/// results are identical for any iteration order and any jobs count. jobs > 1
/// splits tasks across that many worker threads.
EvalMetrics evaluate(const PolicyParams& theta, const EnvSpec& env,
                     const RewardSpec& reward_spec, const std::vector<TaskInstance>& tasks,
                     int episodes_per_task, std::uint64_t seed, bool greedy = false,
                     int jobs = 1);

/// One evaluate per method on the shared task set; each method's stream is
/// derived from its name, so reordering methods permutes rows without changing
/// any number. Markers pick best and second-best per column, ties resolved by
/// method name.
ComparisonTable compare(const std::vector<std::pair<std::string, PolicyParams>>& methods,
                        const EnvSpec& env, const RewardSpec& reward_spec,
                        const std::vector<TaskInstance>& tasks, const CompareConfig& cfg);

enum class ReportFormat { csv, markdown };

/// CSV: fixed header method,accuracy,accuracy_se,mean_reward,mean_reward_se,
/// mean_len,episodes with full-precision numbers. Markdown: mean +/- SE cells,
/// best bold, second-best italic.
void emit_report(const ComparisonTable& table, const std::string& path, ReportFormat format);

/// Reads back a CSV written by emit_report (markers recomputed).
ComparisonTable parse_report_csv(const std::string& path);

}  // namespace convopt
