#include "convopt/evalreport.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "convopt/errors.hpp"
#include "convopt/numeric.hpp"
#include "convopt/rng.hpp"

namespace convopt {

namespace {

// One task's episodes, written into slices of the shared result arrays; the
// slice layout is what makes the thread split order-independent.
void run_task_episodes(const PolicyParams& theta, const EnvSpec& env,
                       const RewardSpec& reward_spec, const TaskInstance& task,
                       int episodes_per_task, std::uint64_t seed, bool greedy,
                       std::size_t offset, std::vector<double>& hits,
                       std::vector<double>& rewards, std::vector<double>& lengths) {
    const std::uint64_t task_key = fnv1a64(task.task_id);
    for (int ep = 0; ep < episodes_per_task; ++ep) {
        Rng stream(derive_seed(seed, task_key, static_cast<std::uint64_t>(ep)));
        HistoryState state{task.context_id, {}};
        Trajectory trajectory;
        while (!is_terminal(env, task, state)) {
            const ActionId a = greedy ? greedy_action(theta, state)
                                      : sample_action(theta, state, 1.0, stream).action;
            const UserResponse response = user_response(env, task, state, a, stream);
            trajectory.steps.push_back(Step{a, 0.0, response.observation, response.logprob});
            state.prefix.emplace_back(a, response.observation);
        }
        trajectory.terminated_early =
            static_cast<int>(trajectory.steps.size()) < task.horizon;
        const std::size_t slot = offset + static_cast<std::size_t>(ep);
        hits[slot] = env.final_answer_matches(task, trajectory) ? 1.0 : 0.0;
        rewards[slot] = episode_reward(reward_spec, env, task, trajectory);
        lengths[slot] = static_cast<double>(trajectory.steps.size());
    }
}

}  // namespace

EvalMetrics evaluate(const PolicyParams& theta, const EnvSpec& env,
                     const RewardSpec& reward_spec, const std::vector<TaskInstance>& tasks,
                     int episodes_per_task, std::uint64_t seed, bool greedy, int jobs) {
    if (tasks.empty()) throw validation_error("evaluate: task list must be non-empty");
    if (episodes_per_task < 1) {
        throw validation_error("evaluate: episodes_per_task must be >= 1");
    }
    if (jobs < 1) throw validation_error("evaluate: jobs must be >= 1");
    const std::size_t total = tasks.size() * static_cast<std::size_t>(episodes_per_task);
    std::vector<double> hits(total), rewards(total), lengths(total);
    const auto worker = [&](std::size_t first, std::size_t last) {
        for (std::size_t ti = first; ti < last; ++ti) {
            run_task_episodes(theta, env, reward_spec, tasks[ti], episodes_per_task, seed,
                              greedy, ti * static_cast<std::size_t>(episodes_per_task), hits,
                              rewards, lengths);
        }
    };
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(jobs), tasks.size());
    if (workers <= 1) {
        worker(0, tasks.size());
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (tasks.size() + workers - 1) / workers;
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t first = w * chunk;
            const std::size_t last = std::min(tasks.size(), first + chunk);
            if (first >= last) break;
            pool.emplace_back(worker, first, last);
        }
        for (std::thread& t : pool) t.join();
    }
    EvalMetrics metrics;
    metrics.episodes = static_cast<int>(total);
    metrics.accuracy = mean_of(hits);
    metrics.mean_reward = mean_of(rewards);
    metrics.mean_len = mean_of(lengths);
    const double root = std::sqrt(static_cast<double>(total));
    metrics.accuracy_se = total >= 2 ? sample_std(hits) / root : 0.0;
    metrics.mean_reward_se = total >= 2 ? sample_std(rewards) / root : 0.0;
    return metrics;
}

namespace {

// Best and second-best row for one column; ties go to the lexicographically
// smaller method name.
ColumnMarkers column_markers(const std::vector<std::string>& methods,
                             const std::vector<double>& values, bool higher_is_better) {
    std::vector<int> order(methods.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const std::size_t ia = static_cast<std::size_t>(a);
        const std::size_t ib = static_cast<std::size_t>(b);
        if (values[ia] != values[ib]) {
            return higher_is_better ? values[ia] > values[ib] : values[ia] < values[ib];
        }
        return methods[ia] < methods[ib];
    });
    ColumnMarkers markers;
    markers.best = order.empty() ? -1 : order[0];
    markers.second = order.size() >= 2 ? order[1] : -1;
    return markers;
}

void compute_markers(ComparisonTable& table) {
    std::vector<double> accuracy, reward, length;
    for (const EvalMetrics& m : table.rows) {
        accuracy.push_back(m.accuracy);
        reward.push_back(m.mean_reward);
        length.push_back(m.mean_len);
    }
    table.accuracy = column_markers(table.methods, accuracy, true);
    table.mean_reward = column_markers(table.methods, reward, true);
    table.mean_len = column_markers(table.methods, length, false);
}

}  // namespace

ComparisonTable compare(const std::vector<std::pair<std::string, PolicyParams>>& methods,
                        const EnvSpec& env, const RewardSpec& reward_spec,
                        const std::vector<TaskInstance>& tasks, const CompareConfig& cfg) {
    if (methods.size() < 2) throw validation_error("compare: need at least two methods");
    std::set<std::string> names;
    for (const auto& [name, theta] : methods) {
        if (!names.insert(name).second) {
            throw validation_error("compare: duplicate method name \"" + name + "\"");
        }
    }
    ComparisonTable table;
    for (const auto& [name, theta] : methods) {
        table.methods.push_back(name);
        table.rows.push_back(evaluate(theta, env, reward_spec, tasks, cfg.episodes_per_task,
                                      derive_seed(cfg.seed, fnv1a64(name)), cfg.greedy,
                                      cfg.jobs));
    }
    compute_markers(table);
    return table;
}

namespace {

std::string pm_cell(double mean, double se) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f ± %.4f", mean, se);
    return buf;
}

std::string decorate(std::string cell, int row, const ColumnMarkers& markers) {
    if (row == markers.best) return "**" + cell + "**";
    if (row == markers.second) return "*" + cell + "*";
    return cell;
}

}  // namespace

void emit_report(const ComparisonTable& table, const std::string& path, ReportFormat format) {
    if (table.rows.empty()) throw validation_error("emit_report: table has no rows");
    if (table.rows.size() != table.methods.size()) {
        throw validation_error("emit_report: methods/rows size mismatch");
    }
    std::ostringstream out;
    if (format == ReportFormat::csv) {
        out << "method,accuracy,accuracy_se,mean_reward,mean_reward_se,mean_len,episodes\n";
        for (std::size_t i = 0; i < table.rows.size(); ++i) {
            const EvalMetrics& m = table.rows[i];
            out << table.methods[i] << ',' << format_g17(m.accuracy) << ','
                << format_g17(m.accuracy_se) << ',' << format_g17(m.mean_reward) << ','
                << format_g17(m.mean_reward_se) << ',' << format_g17(m.mean_len) << ','
                << m.episodes << '\n';
        }
    } else {
        out << "Paired evaluation: all methods share one task set; per-method rollout "
               "streams are derived from the method name.\n\n";
        out << "| method | accuracy | mean reward | mean length | episodes |\n";
        out << "| --- | --- | --- | --- | --- |\n";
        for (std::size_t i = 0; i < table.rows.size(); ++i) {
            const EvalMetrics& m = table.rows[i];
            const int row = static_cast<int>(i);
            char len_buf[32];
            std::snprintf(len_buf, sizeof(len_buf), "%.4f", m.mean_len);
            out << "| " << table.methods[i] << " | "
                << decorate(pm_cell(m.accuracy, m.accuracy_se), row, table.accuracy) << " | "
                << decorate(pm_cell(m.mean_reward, m.mean_reward_se), row, table.mean_reward)
                << " | " << decorate(len_buf, row, table.mean_len) << " | " << m.episodes
                << " |\n";
        }
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw io_error("emit_report: cannot open " + path);
    file << out.str();
    if (!file) throw io_error("emit_report: write failed for " + path);
}

ComparisonTable parse_report_csv(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw io_error("parse_report_csv: cannot open " + path);
    std::string line;
    if (!std::getline(file, line) ||
        line != "method,accuracy,accuracy_se,mean_reward,mean_reward_se,mean_len,episodes") {
        throw validation_error("parse_report_csv: bad header in " + path);
    }
    ComparisonTable table;
    while (std::getline(file, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(row, field, ',')) fields.push_back(field);
        if (fields.size() != 7) {
            throw validation_error("parse_report_csv: bad row in " + path + ": " + line);
        }
        EvalMetrics m;
        try {
            m.accuracy = std::stod(fields[1]);
            m.accuracy_se = std::stod(fields[2]);
            m.mean_reward = std::stod(fields[3]);
            m.mean_reward_se = std::stod(fields[4]);
            m.mean_len = std::stod(fields[5]);
            m.episodes = std::stoi(fields[6]);
        } catch (const std::exception&) {
            throw validation_error("parse_report_csv: bad number in " + path + ": " + line);
        }
        table.methods.push_back(fields[0]);
        table.rows.push_back(m);
    }
    if (table.rows.empty()) throw validation_error("parse_report_csv: no rows in " + path);
    compute_markers(table);
    return table;
}

}  // namespace convopt
