#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "convopt/dataset_io.hpp"
#include "convopt/errors.hpp"
#include "convopt/numeric.hpp"
#include "convopt/rng.hpp"
#include "convopt/types.hpp"
#include "test_support.hpp"

using namespace convopt;

namespace {

LoggedExample small_example() {
    LoggedExample ex;
    ex.task = {"task-000007", 2, 1, 3};
    ex.trajectory.steps = {{0, -1.6094379124341003, 1, 0.0},
                           {3, -1.6094379124341003, 2, -0.5}};
    ex.trajectory.terminated_early = true;
    ex.reward_raw = 0.719;
    ex.reward_std = 1.25;
    ex.group_id = "task-000007";
    ex.temperature = 0.7;
    ex.seed = 42;
    return ex;
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST_SUITE("core") {

TEST_CASE("fnv1a64 matches published test vectors") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("derive_seed separates streams and ignores draw order") {
    CHECK(derive_seed(1, 2) != derive_seed(1, 3));
    CHECK(derive_seed(1, 2) != derive_seed(2, 2));
    CHECK(derive_seed(1, 2, 3) != derive_seed(1, 2, 4));
    CHECK(derive_seed(1, 2, 3, 4) != derive_seed(1, 2, 3, 5));
    CHECK(derive_seed(5, 6, 7) == derive_seed(5, 6, 7));

    // child() keys off the construction seed, not the stream position.
    Rng a(99);
    Rng b(99);
    (void)a.uniform();
    (void)a.normal();
    Rng ca = a.child(11, 12);
    Rng cb = b.child(11, 12);
    for (int i = 0; i < 16; ++i) CHECK(ca.uniform() == cb.uniform());
}

TEST_CASE("rng draws are deterministic and in range") {
    Rng a(2024);
    Rng b(2024);
    for (int i = 0; i < 256; ++i) {
        const double u = a.uniform();
        CHECK(u == b.uniform());
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    Rng c(2024);
    Rng d(2025);
    int differing = 0;
    for (int i = 0; i < 64; ++i) {
        if (c.uniform() != d.uniform()) ++differing;
    }
    CHECK(differing > 60);

    Rng e(7);
    for (int i = 0; i < 1000; ++i) {
        const std::uint64_t k = e.uniform_int(5);
        CHECK(k < 5);
    }
    Rng f(7);
    for (int i = 0; i < 1000; ++i) {
        const double x = f.uniform_in(-2.0, 3.0);
        CHECK(x >= -2.0);
        CHECK(x < 3.0);
    }
}

TEST_CASE("rng categorical matches its probabilities") {
    const std::vector<double> probs = {0.5, 0.3, 0.2};
    Rng rng(314159);
    std::vector<long> counts(probs.size(), 0);
    const int n = 40000;
    for (int i = 0; i < n; ++i) counts[rng.categorical(probs)]++;
    // chi-square, 2 degrees of freedom; 13.8 is the 0.999 quantile.
    CHECK(test_support::chi_square(counts, probs) < 13.8);
}

TEST_CASE("rng normal has the right first two moments") {
    Rng rng(271828);
    const int n = 200000;
    double s1 = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        s1 += x;
        s2 += x * x;
    }
    const double mean = s1 / n;
    const double var = s2 / n - mean * mean;
    CHECK(std::abs(mean) < 0.01);
    CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("logsumexp is exact on small inputs and stable on large ones") {
    const std::vector<double> v = {std::log(1.0), std::log(2.0), std::log(3.0)};
    CHECK(std::abs(logsumexp(v) - std::log(6.0)) < 1e-14);

    const std::vector<double> big = {1000.0, 1000.0};
    CHECK(std::abs(logsumexp(big) - (1000.0 + std::log(2.0))) < 1e-12);

    const std::vector<double> shifted = {-1000.0, -1000.0, -1000.0};
    CHECK(std::abs(logsumexp(shifted) - (-1000.0 + std::log(3.0))) < 1e-12);
}

TEST_CASE("softmax normalizes and logistic is symmetric") {
    const std::vector<double> logits = {0.3, -1.2, 2.0, 0.0};
    const std::vector<double> p = softmax_from_logits(logits);
    double s = 0.0;
    for (double x : p) s += x;
    CHECK(std::abs(s - 1.0) < 1e-14);
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
        const double want = std::exp(logits[i] - logits[i + 1]);
        CHECK(std::abs(p[i] / p[i + 1] - want) < 1e-12 * want);
    }
    CHECK(logistic(0.0) == 0.5);
    CHECK(std::abs(logistic(3.0) + logistic(-3.0) - 1.0) < 1e-15);
    CHECK(logistic(800.0) == 1.0);
    CHECK(logistic(-800.0) == 0.0);
}

TEST_CASE("format_g17 round-trips doubles bit-exactly") {
    Rng rng(5150);
    for (int i = 0; i < 200; ++i) {
        double x = std::exp(rng.uniform_in(-30.0, 30.0));
        if (rng.uniform() < 0.5) x = -x;
        const std::string s = format_g17(x);
        const double back = std::strtod(s.c_str(), nullptr);
        CHECK(back == x);
        CHECK(format_g17(back) == s);  // stable under re-serialization
    }
    CHECK(format_g17(0.0) == "0");
    CHECK(format_g17(1.0) == "1");
    CHECK(format_g17(0.1) == "0.10000000000000001");
}

TEST_CASE("mean and sample std on a known triple") {
    const std::vector<double> v = {1.0, 2.0, 3.0};
    CHECK(mean_of(v) == 2.0);
    CHECK(sample_std(v) == 1.0);
    CHECK(mean_of(std::vector<double>{}) == 0.0);
    CHECK(sample_std(std::vector<double>{4.0}) == 0.0);
}

TEST_CASE("validate_dataset accepts a well-formed record") {
    Dataset d;
    d.examples.push_back(small_example());
    CHECK_NOTHROW(validate_dataset(d));
}

TEST_CASE("validate_dataset rejects each malformed field") {
    auto expect_reject = [](auto mutate, const char* fragment) {
        Dataset d;
        d.examples.push_back(small_example());
        mutate(d.examples[0]);
        CHECK_THROWS_WITH_AS(validate_dataset(d), doctest::Contains(fragment),
                             validation_error);
    };
    expect_reject([](LoggedExample& e) { e.task.horizon = 0; }, "horizon");
    expect_reject([](LoggedExample& e) { e.task.task_id.clear(); }, "task_id");
    expect_reject([](LoggedExample& e) { e.group_id.clear(); }, "group_id");
    expect_reject([](LoggedExample& e) { e.temperature = 0.0; }, "temperature");
    expect_reject([](LoggedExample& e) { e.trajectory.steps.clear(); }, "empty trajectory");
    expect_reject([](LoggedExample& e) { e.task.horizon = 1; }, "longer than horizon");
    expect_reject([](LoggedExample& e) { e.reward_raw = std::nan(""); }, "reward_raw");
    expect_reject([](LoggedExample& e) { e.reward_raw = 1.5; }, "outside [0, 1]");
    expect_reject([](LoggedExample& e) { e.reward_std = std::nan(""); }, "reward_std");
    expect_reject([](LoggedExample& e) { e.trajectory.steps[0].action = -1; },
                  "negative action");
    expect_reject([](LoggedExample& e) { e.trajectory.steps[1].observation = -2; },
                  "negative observation");
    expect_reject(
        [](LoggedExample& e) { e.trajectory.steps[0].behavior_action_logprob = 0.25; },
        "behavior_action_logprob");
    expect_reject([](LoggedExample& e) {
        e.trajectory.steps[0].observation_logprob = std::numeric_limits<double>::infinity();
    }, "observation_logprob");

    // Lenient mode waives only the reward range, nothing else.
    Dataset diag;
    diag.examples.push_back(small_example());
    diag.examples[0].reward_raw = 9.4;
    CHECK_THROWS_AS(validate_dataset(diag), validation_error);
    CHECK_NOTHROW(validate_dataset(diag, false));
}

TEST_CASE("validate_dataset rejects groups that mix tasks") {
    Dataset d;
    d.examples.push_back(small_example());
    d.examples.push_back(small_example());
    d.examples[1].task.task_id = "task-000008";  // same group_id, different task
    CHECK_THROWS_WITH_AS(validate_dataset(d), doctest::Contains("mixes task ids"),
                         validation_error);
}

TEST_CASE("group_by_task partitions indices in order") {
    Dataset d;
    for (int i = 0; i < 6; ++i) {
        LoggedExample ex = small_example();
        ex.task.task_id = (i % 2 == 0) ? "task-000001" : "task-000002";
        ex.group_id = ex.task.task_id;
        d.examples.push_back(ex);
    }
    const auto groups = group_by_task(d);
    REQUIRE(groups.size() == 2);
    CHECK(groups.at("task-000001") == std::vector<std::size_t>{0, 2, 4});
    CHECK(groups.at("task-000002") == std::vector<std::size_t>{1, 3, 5});
}

TEST_CASE("jsonl line has the documented layout and round-trips") {
    const LoggedExample ex = small_example();
    const std::string line = to_jsonl_line(ex);
    CHECK(line ==
          "{\"task_id\": \"task-000007\", \"context_id\": 2, \"hidden_intent\": 1, "
          "\"horizon\": 3, \"group_id\": \"task-000007\", \"temperature\": "
          "0.69999999999999996, \"seed\": 42, \"steps\": [{\"a\": 0, \"lp_a\": "
          "-1.6094379124341003, \"y\": 1, \"lp_y\": 0}, {\"a\": 3, \"lp_a\": "
          "-1.6094379124341003, \"y\": 2, \"lp_y\": -0.5}], \"reward_raw\": "
          "0.71899999999999997, \"reward_std\": 1.25}");

    const LoggedExample back = from_jsonl_line(line, 1);
    CHECK(back == ex);
    CHECK(to_jsonl_line(back) == line);

    LoggedExample no_std = ex;
    no_std.reward_std.reset();
    const std::string line2 = to_jsonl_line(no_std);
    CHECK(line2.find("\"reward_std\": null") != std::string::npos);
    CHECK(from_jsonl_line(line2, 3) == no_std);
}

TEST_CASE("from_jsonl_line reports the offending line") {
    CHECK_THROWS_WITH_AS(from_jsonl_line("not json", 12), doctest::Contains("line 12"),
                         validation_error);
    const std::string missing =
        "{\"task_id\": \"t\", \"context_id\": 0, \"hidden_intent\": 0, \"horizon\": 1}";
    CHECK_THROWS_WITH_AS(from_jsonl_line(missing, 5), doctest::Contains("group_id"),
                         validation_error);
    CHECK_THROWS_WITH_AS(from_jsonl_line("[1, 2]", 2), doctest::Contains("malformed"),
                         validation_error);
}

TEST_CASE("dataset files are byte-stable across write-read-write") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "convopt_core_io_test";
    fs::create_directories(dir);
    const fs::path p1 = dir / "a.jsonl";
    const fs::path p2 = dir / "b.jsonl";

    const EnvSpec env = test_support::reference_env();
    const Dataset d = test_support::logged_dataset(env, 8);
    write_dataset(d, p1);
    const Dataset back = read_dataset(p1);
    CHECK(back == d);
    write_dataset(back, p2);
    CHECK(read_file(p1) == read_file(p2));
    CHECK(!read_file(p1).empty());

    fs::remove_all(dir);
}

TEST_CASE("read_dataset validates and write_dataset refuses bad data") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "convopt_core_io_bad";
    fs::create_directories(dir);

    const fs::path bad = dir / "bad.jsonl";
    {
        LoggedExample ex = small_example();
        ex.reward_std.reset();
        std::string line = to_jsonl_line(ex);
        const std::string from = "\"reward_raw\": 0.71899999999999997";
        line.replace(line.find(from), from.size(), "\"reward_raw\": 2.5");
        std::ofstream out(bad, std::ios::binary);
        out << line << '\n';
    }
    CHECK_THROWS_AS(read_dataset(bad), validation_error);

    Dataset invalid;
    invalid.examples.push_back(small_example());
    invalid.examples[0].task.horizon = 0;
    const fs::path target = dir / "never.jsonl";
    CHECK_THROWS_AS(write_dataset(invalid, target), validation_error);
    CHECK(!fs::exists(target));  // validation happens before the file is opened

    CHECK_THROWS_AS(read_dataset(dir / "missing.jsonl"), io_error);

    fs::remove_all(dir);
}

}  // TEST_SUITE
