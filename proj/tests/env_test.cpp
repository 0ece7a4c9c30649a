#include <doctest.h>

#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "convopt/env.hpp"
#include "convopt/errors.hpp"
#include "convopt/policy.hpp"
#include "test_support.hpp"

using namespace convopt;

TEST_SUITE("env") {

TEST_CASE("factories populate counts for both families") {
    const EnvSpec hi = EnvSpec::hidden_intent(3, 2, 2, 4, 3);
    CHECK(hi.action_count() == 5);       // 2 asks + 3 answers
    CHECK(hi.observation_count() == 3);  // values 0, 1 and the acknowledgment
    CHECK(!hi.adaptive);

    const EnvSpec se = EnvSpec::scripted_exam(4, 2, 2, 2);
    CHECK(se.action_count() == 8);  // choice x style
    CHECK(se.observation_count() == 3);

    CHECK_THROWS_AS(EnvSpec::hidden_intent(0, 1, 1, 1, 1), validation_error);
    CHECK_THROWS_AS(EnvSpec::hidden_intent(2, 1, 2, 1, 0), validation_error);
    CHECK_THROWS_AS(EnvSpec::hidden_intent(2, 1, 2, 1, 3, false, 1.0), validation_error);
    CHECK_THROWS_AS(EnvSpec::hidden_intent(2, 1, 1, 1, 3, false, 0.1), validation_error);
    CHECK_THROWS_AS(EnvSpec::scripted_exam(2, 0, 1, 2), validation_error);
}

TEST_CASE("action roles: asks vs answers, styles, base-V attribute digits") {
    const EnvSpec hi = EnvSpec::hidden_intent(3, 2, 2, 1, 3);
    CHECK(!hi.is_answer_action(0));
    CHECK(!hi.is_answer_action(1));
    for (int a = 2; a < 5; ++a) {
        CHECK(hi.is_answer_action(a));
        CHECK(hi.answer_intent(a) == a - 2);
        CHECK(hi.action_style(a) == 0);
    }
    CHECK(hi.answer_intent(0) == -1);
    CHECK(hi.action_style(0) == 1);  // clarifying actions carry the style bit

    // Intent g has attribute j = digit j of g in base V. G=3, V=2:
    // g=0 -> (0,0), g=1 -> (1,0), g=2 -> (0,1).
    CHECK(hi.attribute_value(0, 0) == 0);
    CHECK(hi.attribute_value(0, 1) == 0);
    CHECK(hi.attribute_value(1, 0) == 1);
    CHECK(hi.attribute_value(1, 1) == 0);
    CHECK(hi.attribute_value(2, 0) == 0);
    CHECK(hi.attribute_value(2, 1) == 1);

    // Base-3 digits for a wider instance: g=7 in base 3 is (1,2).
    const EnvSpec wide = EnvSpec::hidden_intent(9, 2, 3, 1, 3);
    CHECK(wide.attribute_value(7, 0) == 1);
    CHECK(wide.attribute_value(7, 1) == 2);

    const EnvSpec se = EnvSpec::scripted_exam(4, 2, 1, 2);
    CHECK(se.answer_intent(5) == 2);  // a = choice*styles + style
    CHECK(se.action_style(5) == 1);
    CHECK(se.is_answer_action(0));
}

TEST_CASE("final_answer_matches keys on the last action only") {
    const EnvSpec hi = EnvSpec::hidden_intent(3, 2, 2, 1, 3);
    const TaskInstance task{"t", 0, 1, 3};
    Trajectory traj;
    CHECK(!hi.final_answer_matches(task, traj));
    traj.steps = {{0, 0.0, 1, 0.0}, {1, 0.0, 0, 0.0}, {3, 0.0, 2, 0.0}};  // answer-1 last
    CHECK(hi.final_answer_matches(task, traj));
    traj.steps.back().action = 4;  // answer-2
    CHECK(!hi.final_answer_matches(task, traj));
    traj.steps.back().action = 0;  // clarifier last
    CHECK(!hi.final_answer_matches(task, traj));
}

TEST_CASE("make_tasks is deterministic with valid uniform draws") {
    const EnvSpec env = test_support::reference_env(4);
    Rng a(11);
    Rng b(11);
    const auto t1 = make_tasks(env, 200, a);
    const auto t2 = make_tasks(env, 200, b);
    CHECK(t1 == t2);
    CHECK(t1.size() == 200);
    CHECK(t1[0].task_id == "task-000000");
    CHECK(t1[42].task_id == "task-000042");
    std::set<int> contexts, intents;
    for (const TaskInstance& t : t1) {
        CHECK(t.horizon == env.horizon);
        CHECK(t.context_id >= 0);
        CHECK(t.context_id < env.context_count);
        CHECK(t.hidden_intent >= 0);
        CHECK(t.hidden_intent < env.intent_count);
        contexts.insert(t.context_id);
        intents.insert(t.hidden_intent);
    }
    CHECK(contexts.size() == 4);  // all cells hit at n=200
    CHECK(intents.size() == 3);
    CHECK_THROWS_AS(make_tasks(env, 0, a), validation_error);
}

TEST_CASE("noise-free users answer truthfully with log-probability zero") {
    const EnvSpec hi = EnvSpec::hidden_intent(3, 2, 2, 1, 3);
    const TaskInstance task{"t", 0, 2, 3};  // intent 2 -> attributes (0, 1)
    const HistoryState h{0, {}};
    Rng rng(5);

    const UserResponse r0 = user_response(hi, task, h, 0, rng);
    CHECK(r0.observation == 0);
    CHECK(r0.logprob == 0.0);
    const UserResponse r1 = user_response(hi, task, h, 1, rng);
    CHECK(r1.observation == 1);
    CHECK(r1.logprob == 0.0);

    // Answer actions return the acknowledgment observation, id V.
    const UserResponse ack = user_response(hi, task, h, 4, rng);
    CHECK(ack.observation == 2);
    CHECK(ack.logprob == 0.0);

    CHECK(observation_logprob(hi, task, h, 0, 0) == 0.0);
    CHECK(observation_logprob(hi, task, h, 0, 1) ==
          -std::numeric_limits<double>::infinity());
}

TEST_CASE("noisy users flip answers at the specified rate") {
    const EnvSpec noisy = EnvSpec::hidden_intent(16, 1, 4, 1, 2, false, 0.2);
    const TaskInstance task{"t", 0, 9, 2};  // attribute 0 of intent 9 in base 4 is 1
    const HistoryState h{0, {}};

    const auto support = observation_support(noisy, task, h, 0);
    REQUIRE(support.size() == 4);
    double total = 0.0;
    for (const auto& [obs, p] : support) {
        total += p;
        if (obs == 1) {
            CHECK(p == doctest::Approx(0.8).epsilon(1e-15));
        } else {
            CHECK(p == doctest::Approx(0.2 / 3.0).epsilon(1e-15));
        }
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(observation_logprob(noisy, task, h, 0, 1) ==
          doctest::Approx(std::log(0.8)).epsilon(1e-15));
    CHECK(observation_logprob(noisy, task, h, 0, 3) ==
          doctest::Approx(std::log(0.2 / 3.0)).epsilon(1e-15));

    Rng rng(606);
    std::vector<long> counts(4, 0);
    std::vector<double> probs(4, 0.2 / 3.0);
    probs[1] = 0.8;
    const int n = 30000;
    for (int i = 0; i < n; ++i) {
        const UserResponse r = user_response(noisy, task, h, 0, rng);
        counts[static_cast<std::size_t>(r.observation)]++;
        CHECK(r.logprob == std::log(probs[static_cast<std::size_t>(r.observation)]));
    }
    // chi-square with 3 degrees of freedom; 16.3 is the 0.999 quantile.
    CHECK(test_support::chi_square(counts, probs) < 16.3);
}

TEST_CASE("scripted users follow the three-line script") {
    const EnvSpec se = EnvSpec::scripted_exam(4, 2, 1, 4);
    const TaskInstance task{"t", 0, 3, 4};
    Rng rng(2);
    HistoryState h{0, {}};
    for (int t = 0; t < 4; ++t) {
        const UserResponse r = user_response(se, task, h, 5, rng);
        CHECK(r.observation == std::min(t, 2));  // script sticks at its last line
        CHECK(r.logprob == 0.0);
        h.prefix.emplace_back(5, r.observation);
    }
}

TEST_CASE("termination: fixed horizon, and early stop for adaptive answers") {
    const EnvSpec fixed = EnvSpec::hidden_intent(3, 2, 2, 1, 3);
    const TaskInstance task{"t", 0, 0, 3};
    CHECK(!is_terminal(fixed, task, {0, {}}));
    CHECK(!is_terminal(fixed, task, {0, {{3, 2}}}));  // answers do not stop a fixed env
    CHECK(!is_terminal(fixed, task, {0, {{0, 0}, {3, 2}}}));
    CHECK(is_terminal(fixed, task, {0, {{0, 0}, {1, 0}, {3, 2}}}));

    const EnvSpec adaptive = EnvSpec::hidden_intent(3, 2, 2, 1, 3, true);
    CHECK(!is_terminal(adaptive, task, {0, {{0, 0}}}));
    CHECK(is_terminal(adaptive, task, {0, {{3, 2}}}));
    CHECK(is_terminal(adaptive, task, {0, {{0, 0}, {4, 2}}}));
}

TEST_CASE("enumeration covers every trajectory exactly once") {
    const EnvSpec env = test_support::reference_env(1);
    const TaskInstance task{"t", 0, 1, 3};
    const auto leaves = enumerate_trajectories(env, task);
    CHECK(leaves.size() == 125);  // 5^3 with a deterministic user
    CHECK(enumeration_leaf_bound(env, task) == 125.0);

    std::set<std::string> keys;
    for (const EnumeratedTrajectory& e : leaves) {
        CHECK(e.trajectory.steps.size() == 3);
        CHECK(!e.trajectory.terminated_early);
        CHECK(e.obs_prob_product == 1.0);
        // Observations are the deterministic user's responses.
        HistoryState h{task.context_id, {}};
        for (const Step& s : e.trajectory.steps) {
            CHECK(s.observation == observation_support(env, task, h, s.action)[0].first);
            CHECK(s.observation_logprob == 0.0);
            CHECK(s.behavior_action_logprob == 0.0);  // no policy passed
            h.prefix.emplace_back(s.action, s.observation);
        }
        keys.insert(state_key(history_prefix(task, e.trajectory, 3)));
    }
    CHECK(keys.size() == 125);  // all distinct
}

TEST_CASE("enumeration probabilities sum to one under any policy") {
    // Noisy user: leaves carry observation probabilities; with a policy the
    // entries carry full trajectory probabilities that must total 1.
    const EnvSpec noisy = EnvSpec::hidden_intent(3, 2, 2, 2, 3, false, 0.25);
    const TaskInstance task{"t", 1, 2, 3};
    Rng rng(99);
    const PolicyParams theta = random_linear_policy(noisy, rng, 0.9);

    const auto leaves = enumerate_trajectories(noisy, task, &theta);
    CHECK(leaves.size() > 125);  // ask branches widen the tree
    double total = 0.0;
    for (const EnumeratedTrajectory& e : leaves) {
        double lp_actions = 0.0;
        double obs = 1.0;
        for (const Step& s : e.trajectory.steps) {
            lp_actions += s.behavior_action_logprob;
            obs *= std::exp(s.observation_logprob);
        }
        CHECK(obs == doctest::Approx(e.obs_prob_product).epsilon(1e-12));
        total += std::exp(lp_actions) * e.obs_prob_product;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

    // The recorded propensities are the policy's own log-probabilities.
    const EnumeratedTrajectory& probe = leaves[17];
    for (std::size_t t = 0; t < probe.trajectory.steps.size(); ++t) {
        const HistoryState h = history_prefix(task, probe.trajectory, t);
        CHECK(probe.trajectory.steps[t].behavior_action_logprob ==
              action_logprob(theta, h, probe.trajectory.steps[t].action));
    }
}

TEST_CASE("adaptive enumeration prunes episodes after an answer") {
    const EnvSpec adaptive = EnvSpec::hidden_intent(3, 2, 2, 1, 3, true);
    const TaskInstance task{"t", 0, 0, 3};
    const auto leaves = enumerate_trajectories(adaptive, task);
    // Episode grammar: ask*, then either an answer (early stop) or a full
    // 3-ask episode. Leaves: 3 + 2*3 + 4*3 + 8 = 29.
    CHECK(leaves.size() == 29);
    std::size_t early = 0;
    for (const EnumeratedTrajectory& e : leaves) {
        const bool ended_by_answer =
            adaptive.is_answer_action(e.trajectory.steps.back().action);
        if (e.trajectory.steps.size() < 3) {
            CHECK(ended_by_answer);
            CHECK(e.trajectory.terminated_early);
            ++early;
        } else {
            CHECK(!e.trajectory.terminated_early);
        }
        // No answer action may appear before the final step.
        for (std::size_t t = 0; t + 1 < e.trajectory.steps.size(); ++t) {
            CHECK(!adaptive.is_answer_action(e.trajectory.steps[t].action));
        }
    }
    CHECK(early == 9);
}

TEST_CASE("enumeration guard refuses oversized instances") {
    const EnvSpec big = EnvSpec::hidden_intent(20, 3, 3, 1, 5, false, 0.1);
    const TaskInstance task{"t", 0, 0, 5};
    CHECK(enumeration_leaf_bound(big, task) > 1e6);
    CHECK_THROWS_WITH_AS(enumerate_trajectories(big, task),
                         doctest::Contains("enumeration guard"), capability_error);
}

TEST_CASE("history_prefix replays the first t steps") {
    const TaskInstance task{"t", 3, 0, 3};
    Trajectory traj;
    traj.steps = {{0, -1.0, 1, 0.0}, {4, -1.0, 2, 0.0}, {1, -1.0, 0, 0.0}};
    CHECK(history_prefix(task, traj, 0) == HistoryState{3, {}});
    CHECK(history_prefix(task, traj, 2) == HistoryState{3, {{0, 1}, {4, 2}}});
    CHECK(history_prefix(task, traj, 3) == HistoryState{3, {{0, 1}, {4, 2}, {1, 0}}});
    CHECK(history_prefix(task, traj, 9) == history_prefix(task, traj, 3));
}

}  // TEST_SUITE
