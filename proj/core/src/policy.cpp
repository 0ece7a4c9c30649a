#include "convopt/policy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "convopt/dataset_io.hpp"
#include "convopt/env.hpp"
#include "convopt/errors.hpp"
#include "convopt/numeric.hpp"

namespace convopt {

std::string state_key(const HistoryState& state) {
    std::ostringstream out;
    out << state.context_id << '|';
    bool first = true;
    for (const auto& [a, y] : state.prefix) {
        if (!first) out << ',';
        first = false;
        out << a << ':' << y;
    }
    return out.str();
}

PolicyParams uniform_policy(const EnvSpec& env, PolicyParams::Family family) {
    PolicyParams params;
    params.family = family;
    params.action_count = env.action_count();
    params.context_count = env.context_count;
    params.observation_count = env.observation_count();
    if (family == PolicyParams::Family::linear) {
        params.values.assign(
            static_cast<std::size_t>(params.action_count * params.feature_dim()), 0.0);
    }
    return params;
}

PolicyParams random_linear_policy(const EnvSpec& env, Rng& rng, double scale) {
    PolicyParams params = uniform_policy(env, PolicyParams::Family::linear);
    for (double& v : params.values) v = scale * rng.normal();
    return params;
}

std::vector<double> feature_vector(const PolicyParams& params, const HistoryState& state) {
    if (params.family != PolicyParams::Family::linear) {
        throw validation_error("feature_vector: only linear policies have features");
    }
    std::vector<double> phi(static_cast<std::size_t>(params.feature_dim()), 0.0);
    if (state.context_id < 0 || state.context_id >= params.context_count) {
        throw validation_error("feature_vector: context_id out of range");
    }
    phi[static_cast<std::size_t>(state.context_id)] = 1.0;
    // Bag of (action, observation) pairs seen so far; counts, not indicators,
    // so repeated asks remain visible to the policy.
    for (const auto& [a, y] : state.prefix) {
        if (a < 0 || a >= params.action_count || y < 0 || y >= params.observation_count) {
            throw validation_error("feature_vector: history entry out of range");
        }
        phi[static_cast<std::size_t>(params.context_count + a * params.observation_count +
                                     y)] += 1.0;
    }
    return phi;
}

namespace {

// Tabular rows are lazily materialized; a state without a row behaves as all-zero
// logits (uniform policy) and contributes no gradient.
const double* tabular_row(const PolicyParams& params, const HistoryState& state) {
    const auto it = params.state_rows.find(state_key(state));
    if (it == params.state_rows.end()) return nullptr;
    return params.values.data() +
           static_cast<std::size_t>(it->second) * params.action_count;
}

}  // namespace

std::vector<double> action_logits(const PolicyParams& params, const HistoryState& state) {
    const std::size_t n = static_cast<std::size_t>(params.action_count);
    std::vector<double> logits(n, 0.0);
    if (params.family == PolicyParams::Family::linear) {
        const std::vector<double> phi = feature_vector(params, state);
        const std::size_t f = phi.size();
        for (std::size_t a = 0; a < n; ++a) {
            double z = 0.0;
            const double* row = params.values.data() + a * f;
            for (std::size_t k = 0; k < f; ++k) z += row[k] * phi[k];
            logits[a] = z;
        }
    } else if (const double* row = tabular_row(params, state)) {
        logits.assign(row, row + n);
    }
    return logits;
}

namespace {

std::vector<double> tempered_logprobs(const PolicyParams& params, const HistoryState& state,
                                      double temperature) {
    if (!(temperature > 0.0)) {
        throw validation_error("policy: temperature must be > 0");
    }
    std::vector<double> logits = action_logits(params, state);
    if (temperature != 1.0) {
        for (double& z : logits) z /= temperature;
    }
    const double lse = logsumexp(logits);
    for (double& z : logits) z -= lse;
    return logits;
}

}  // namespace

std::vector<double> action_logprobs(const PolicyParams& params, const HistoryState& state) {
    return tempered_logprobs(params, state, 1.0);
}

double action_logprob(const PolicyParams& params, const HistoryState& state, ActionId action) {
    if (action < 0 || action >= params.action_count) {
        throw validation_error("action_logprob: action out of range");
    }
    return action_logprobs(params, state)[static_cast<std::size_t>(action)];
}

SampledAction sample_action(const PolicyParams& params, const HistoryState& state,
                            double temperature, Rng& rng) {
    const std::vector<double> lps = tempered_logprobs(params, state, temperature);
    std::vector<double> probs(lps.size());
    for (std::size_t a = 0; a < lps.size(); ++a) probs[a] = std::exp(lps[a]);
    const std::size_t pick = rng.categorical(probs);
    return {static_cast<ActionId>(pick), lps[pick]};
}

ActionId greedy_action(const PolicyParams& params, const HistoryState& state) {
    const std::vector<double> logits = action_logits(params, state);
    return static_cast<ActionId>(
        std::max_element(logits.begin(), logits.end()) - logits.begin());
}

std::vector<double> grad_action_logprob(const PolicyParams& params, const HistoryState& state,
                                        ActionId action) {
    if (action < 0 || action >= params.action_count) {
        throw validation_error("grad_action_logprob: action out of range");
    }
    std::vector<double> grad(static_cast<std::size_t>(params.dim()), 0.0);
    const std::vector<double> probs =
        softmax_from_logits(action_logits(params, state));
    if (params.family == PolicyParams::Family::linear) {
        const std::vector<double> phi = feature_vector(params, state);
        const std::size_t f = phi.size();
        for (int a = 0; a < params.action_count; ++a) {
            const double coeff = (a == action ? 1.0 : 0.0) - probs[static_cast<std::size_t>(a)];
            if (coeff == 0.0) continue;
            double* row = grad.data() + static_cast<std::size_t>(a) * f;
            for (std::size_t k = 0; k < f; ++k) row[k] = coeff * phi[k];
        }
        return grad;
    }
    const auto it = params.state_rows.find(state_key(state));
    if (it == params.state_rows.end()) return grad;  // unmaterialized: zero gradient
    double* row = grad.data() + static_cast<std::size_t>(it->second) * params.action_count;
    for (int a = 0; a < params.action_count; ++a) {
        row[a] = (a == action ? 1.0 : 0.0) - probs[static_cast<std::size_t>(a)];
    }
    return grad;
}

double trajectory_logprob(const PolicyParams& params, const EnvSpec& env,
                          const TaskInstance& task, const Trajectory& trajectory,
                          bool include_observations) {
    double total = 0.0;
    for (std::size_t t = 0; t < trajectory.steps.size(); ++t) {
        const HistoryState state = history_prefix(task, trajectory, t);
        const Step& step = trajectory.steps[t];
        total += action_logprob(params, state, step.action);
        if (include_observations) {
            total += convopt::observation_logprob(env, task, state, step.action,
                                                  step.observation);
        }
    }
    return total;
}

double trajectory_action_logprob(const PolicyParams& params, const TaskInstance& task,
                                 const Trajectory& trajectory) {
    double total = 0.0;
    for (std::size_t t = 0; t < trajectory.steps.size(); ++t) {
        const HistoryState state = history_prefix(task, trajectory, t);
        total += action_logprob(params, state, trajectory.steps[t].action);
    }
    return total;
}

int ensure_state(PolicyParams& params, const HistoryState& state) {
    if (params.family != PolicyParams::Family::tabular) {
        throw validation_error("ensure_state: only tabular policies have state rows");
    }
    const std::string key = state_key(state);
    const auto it = params.state_rows.find(key);
    if (it != params.state_rows.end()) return it->second;
    const int row = static_cast<int>(params.state_rows.size());
    params.state_rows.emplace(key, row);
    params.values.resize(params.values.size() + static_cast<std::size_t>(params.action_count),
                         0.0);
    return row;
}

void materialize_dataset_states(PolicyParams& params, const Dataset& dataset) {
    if (params.family != PolicyParams::Family::tabular) return;
    for (const LoggedExample& example : dataset.examples) {
        for (std::size_t t = 0; t < example.trajectory.steps.size(); ++t) {
            ensure_state(params, history_prefix(example.task, example.trajectory, t));
        }
    }
}

void save_policy(const PolicyParams& params, const std::filesystem::path& path) {
    std::ostringstream out;
    out << "{\"family\":\""
        << (params.family == PolicyParams::Family::linear ? "linear" : "tabular")
        << "\",\"action_count\":" << params.action_count
        << ",\"context_count\":" << params.context_count
        << ",\"observation_count\":" << params.observation_count << ",\"state_rows\":{";
    // std::map iteration gives a canonical key order, keeping saves byte-stable.
    bool first = true;
    for (const auto& [key, row] : params.state_rows) {
        if (!first) out << ',';
        first = false;
        out << nlohmann::json(key).dump() << ':' << row;
    }
    out << "},\"values\":[";
    first = true;
    for (const double v : params.values) {
        if (!first) out << ',';
        first = false;
        out << format_g17(v);
    }
    out << "]}\n";
    std::ofstream file(path, std::ios::binary);
    if (!file) throw io_error("save_policy: cannot open " + path.string());
    file << out.str();
    if (!file) throw io_error("save_policy: write failed for " + path.string());
}

PolicyParams load_policy(const std::filesystem::path& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw io_error("load_policy: cannot open " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(file);
    } catch (const nlohmann::json::exception& e) {
        throw validation_error("load_policy: " + path.string() + ": " + e.what());
    }
    PolicyParams params;
    try {
        const std::string family = doc.at("family").get<std::string>();
        if (family == "linear") {
            params.family = PolicyParams::Family::linear;
        } else if (family == "tabular") {
            params.family = PolicyParams::Family::tabular;
        } else {
            throw validation_error("load_policy: unknown family \"" + family + "\"");
        }
        params.action_count = doc.at("action_count").get<int>();
        params.context_count = doc.at("context_count").get<int>();
        params.observation_count = doc.at("observation_count").get<int>();
        for (const auto& [key, row] : doc.at("state_rows").items()) {
            params.state_rows.emplace(key, row.get<int>());
        }
        params.values = doc.at("values").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw validation_error("load_policy: " + path.string() + ": " + e.what());
    }
    if (params.action_count < 1) {
        throw validation_error("load_policy: action_count must be >= 1");
    }
    const std::size_t expected =
        params.family == PolicyParams::Family::linear
            ? static_cast<std::size_t>(params.action_count * params.feature_dim())
            : params.state_rows.size() * static_cast<std::size_t>(params.action_count);
    if (params.values.size() != expected) {
        throw validation_error("load_policy: values length does not match declared shape");
    }
    std::vector<bool> seen(params.state_rows.size(), false);
    for (const auto& [key, row] : params.state_rows) {
        if (row < 0 || row >= static_cast<int>(params.state_rows.size()) ||
            seen[static_cast<std::size_t>(row)]) {
            throw validation_error("load_policy: state_rows must be a dense permutation");
        }
        seen[static_cast<std::size_t>(row)] = true;
    }
    return params;
}

}  // namespace convopt
