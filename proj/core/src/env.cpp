#include "convopt/env.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "convopt/errors.hpp"

namespace convopt {

namespace {
constexpr double kLeafGuard = 1e6;
}

EnvSpec EnvSpec::hidden_intent(int intents, int attributes, int values, int contexts,
                               int horizon, bool adaptive, double noise) {
    EnvSpec spec;
    spec.family = Family::hidden_intent;
    spec.intent_count = intents;
    spec.attribute_count = attributes;
    spec.value_count = values;
    spec.context_count = contexts;
    spec.horizon = horizon;
    spec.adaptive = adaptive;
    spec.user_noise = noise;
    spec.validate();
    return spec;
}

EnvSpec EnvSpec::scripted_exam(int choices, int styles, int contexts, int horizon) {
    EnvSpec spec;
    spec.family = Family::scripted_exam;
    spec.intent_count = choices;
    spec.style_count = styles;
    spec.context_count = contexts;
    spec.horizon = horizon;
    spec.validate();
    return spec;
}

int EnvSpec::action_count() const {
    return family == Family::hidden_intent ? attribute_count + intent_count
                                           : intent_count * style_count;
}

int EnvSpec::observation_count() const {
    return family == Family::hidden_intent ? value_count + 1 : 3;
}

bool EnvSpec::is_answer_action(ActionId a) const {
    return family == Family::hidden_intent ? a >= attribute_count : true;
}

int EnvSpec::answer_intent(ActionId a) const {
    if (family == Family::hidden_intent) {
        return a >= attribute_count ? a - attribute_count : -1;
    }
    return a / style_count;
}

int EnvSpec::action_style(ActionId a) const {
    if (family == Family::hidden_intent) return a < attribute_count ? 1 : 0;
    return a % style_count;
}

int EnvSpec::attribute_value(int intent, int attribute) const {
    int v = intent;
    for (int j = 0; j < attribute; ++j) v /= value_count;
    return v % value_count;
}

bool EnvSpec::final_answer_matches(const TaskInstance& task,
                                   const Trajectory& trajectory) const {
    if (trajectory.steps.empty()) return false;
    const ActionId last = trajectory.steps.back().action;
    return is_answer_action(last) && answer_intent(last) == task.hidden_intent;
}

void EnvSpec::validate() const {
    if (intent_count < 1) throw validation_error("env: intent_count must be >= 1");
    if (context_count < 1) throw validation_error("env: context_count must be >= 1");
    if (horizon < 1) throw validation_error("env: horizon must be >= 1");
    if (user_noise < 0.0 || user_noise >= 1.0) {
        throw validation_error("env: user_noise must be in [0, 1)");
    }
    if (family == Family::hidden_intent) {
        if (attribute_count < 0) throw validation_error("env: attribute_count must be >= 0");
        if (value_count < 1) throw validation_error("env: value_count must be >= 1");
        if (user_noise > 0.0 && value_count < 2) {
            throw validation_error("env: noisy users need value_count >= 2");
        }
    } else {
        if (style_count < 1) throw validation_error("env: style_count must be >= 1");
        if (user_noise != 0.0) throw validation_error("env: scripted users are noise-free");
    }
    if (action_count() < 1) throw validation_error("env: action_count must be >= 1");
}

std::vector<TaskInstance> make_tasks(const EnvSpec& spec, int count, Rng& rng) {
    if (count < 1) throw validation_error("make_tasks: count must be >= 1");
    std::vector<TaskInstance> tasks;
    tasks.reserve(count);
    for (int i = 0; i < count; ++i) {
        TaskInstance task;
        char buf[24];
        std::snprintf(buf, sizeof(buf), "task-%06d", i);
        task.task_id = buf;
        task.context_id = static_cast<int>(rng.uniform_int(spec.context_count));
        task.hidden_intent = static_cast<int>(rng.uniform_int(spec.intent_count));
        task.horizon = spec.horizon;
        tasks.push_back(task);
    }
    return tasks;
}

std::vector<std::pair<ObservationId, double>> observation_support(
    const EnvSpec& spec, const TaskInstance& task, const HistoryState& history,
    ActionId action) {
    if (action < 0 || action >= spec.action_count()) {
        throw validation_error("observation_support: action out of range");
    }
    std::vector<std::pair<ObservationId, double>> support;
    if (spec.family == EnvSpec::Family::scripted_exam) {
        const int line = std::min<int>(static_cast<int>(history.prefix.size()), 2);
        support.emplace_back(line, 1.0);
        return support;
    }
    if (spec.is_answer_action(action)) {
        support.emplace_back(spec.value_count, 1.0);  // terminal acknowledgment
        return support;
    }
    const int truth = spec.attribute_value(task.hidden_intent, action);
    if (spec.user_noise == 0.0) {
        support.emplace_back(truth, 1.0);
        return support;
    }
    const double wrong = spec.user_noise / static_cast<double>(spec.value_count - 1);
    for (int v = 0; v < spec.value_count; ++v) {
        support.emplace_back(v, v == truth ? 1.0 - spec.user_noise : wrong);
    }
    return support;
}

UserResponse user_response(const EnvSpec& spec, const TaskInstance& task,
                           const HistoryState& history, ActionId action, Rng& rng) {
    const auto support = observation_support(spec, task, history, action);
    if (support.size() == 1) {
        return {support[0].first, std::log(support[0].second)};
    }
    std::vector<double> probs;
    probs.reserve(support.size());
    for (const auto& [obs, p] : support) probs.push_back(p);
    const std::size_t pick = rng.categorical(probs);
    return {support[pick].first, std::log(support[pick].second)};
}

double observation_logprob(const EnvSpec& spec, const TaskInstance& task,
                           const HistoryState& history, ActionId action,
                           ObservationId observation) {
    for (const auto& [obs, p] : observation_support(spec, task, history, action)) {
        if (obs == observation) return std::log(p);
    }
    return -std::numeric_limits<double>::infinity();
}

bool is_terminal(const EnvSpec& spec, const TaskInstance& task, const HistoryState& history) {
    if (static_cast<int>(history.prefix.size()) >= task.horizon) return true;
    if (spec.adaptive && !history.prefix.empty() &&
        spec.is_answer_action(history.prefix.back().first)) {
        return true;
    }
    return false;
}

double enumeration_leaf_bound(const EnvSpec& spec, const TaskInstance& task) {
    double branch = 1.0;
    if (spec.family == EnvSpec::Family::hidden_intent && spec.user_noise > 0.0 &&
        spec.attribute_count > 0) {
        branch = spec.value_count;
    }
    return std::pow(spec.action_count() * branch, task.horizon);
}

namespace {

void enumerate_rec(const EnvSpec& spec, const TaskInstance& task, const PolicyParams* theta,
                   HistoryState& history, Trajectory& partial, double obs_prob,
                   std::vector<EnumeratedTrajectory>& out) {
    if (is_terminal(spec, task, history)) {
        EnumeratedTrajectory e;
        e.trajectory = partial;
        e.trajectory.terminated_early =
            static_cast<int>(partial.steps.size()) < task.horizon;
        e.obs_prob_product = obs_prob;
        out.push_back(std::move(e));
        return;
    }
    const int actions = spec.action_count();
    for (ActionId a = 0; a < actions; ++a) {
        const double lp_a = theta ? action_logprob(*theta, history, a) : 0.0;
        for (const auto& [obs, p] : observation_support(spec, task, history, a)) {
            partial.steps.push_back(Step{a, lp_a, obs, std::log(p)});
            history.prefix.emplace_back(a, obs);
            enumerate_rec(spec, task, theta, history, partial, obs_prob * p, out);
            history.prefix.pop_back();
            partial.steps.pop_back();
        }
    }
}

}  // namespace

std::vector<EnumeratedTrajectory> enumerate_trajectories(const EnvSpec& spec,
                                                         const TaskInstance& task,
                                                         const PolicyParams* theta) {
    const double bound = enumeration_leaf_bound(spec, task);
    if (bound > kLeafGuard) {
        char msg[96];
        std::snprintf(msg, sizeof(msg), "enumeration guard: leaf bound %.0f exceeds 1e6",
                      bound);
        throw capability_error(msg);
    }
    std::vector<EnumeratedTrajectory> out;
    HistoryState history{task.context_id, {}};
    Trajectory partial;
    enumerate_rec(spec, task, theta, history, partial, 1.0, out);
    return out;
}

HistoryState history_prefix(const TaskInstance& task, const Trajectory& trajectory,
                            std::size_t steps) {
    HistoryState state{task.context_id, {}};
    state.prefix.reserve(steps);
    for (std::size_t t = 0; t < steps && t < trajectory.steps.size(); ++t) {
        state.prefix.emplace_back(trajectory.steps[t].action, trajectory.steps[t].observation);
    }
    return state;
}

}  // namespace convopt
