#include "convopt/dataset_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "convopt/errors.hpp"
#include "convopt/numeric.hpp"

namespace convopt {

namespace {

using nlohmann::json;

std::string quote(const std::string& s) { return json(s).dump(); }

[[noreturn]] void line_error(std::size_t line_number, const std::string& what) {
    throw validation_error("dataset line " + std::to_string(line_number) + ": " + what);
}

const json& require(const json& obj, const char* key, std::size_t line_number) {
    auto it = obj.find(key);
    if (it == obj.end()) line_error(line_number, std::string("missing field '") + key + "'");
    return *it;
}

}  // namespace

std::string to_jsonl_line(const LoggedExample& ex) {
    std::ostringstream out;
    out << "{\"task_id\": " << quote(ex.task.task_id)
        << ", \"context_id\": " << ex.task.context_id
        << ", \"hidden_intent\": " << ex.task.hidden_intent
        << ", \"horizon\": " << ex.task.horizon
        << ", \"group_id\": " << quote(ex.group_id)
        << ", \"temperature\": " << format_g17(ex.temperature)
        << ", \"seed\": " << ex.seed
        << ", \"steps\": [";
    for (std::size_t t = 0; t < ex.trajectory.steps.size(); ++t) {
        const Step& s = ex.trajectory.steps[t];
        if (t > 0) out << ", ";
        out << "{\"a\": " << s.action
            << ", \"lp_a\": " << format_g17(s.behavior_action_logprob)
            << ", \"y\": " << s.observation
            << ", \"lp_y\": " << format_g17(s.observation_logprob) << "}";
    }
    out << "], \"reward_raw\": " << format_g17(ex.reward_raw)
        << ", \"reward_std\": "
        << (ex.reward_std ? format_g17(*ex.reward_std) : std::string("null")) << "}";
    return out.str();
}

LoggedExample from_jsonl_line(const std::string& line, std::size_t line_number) {
    json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) line_error(line_number, "malformed JSON");

    LoggedExample ex;
    try {
        ex.task.task_id = require(obj, "task_id", line_number).get<std::string>();
        ex.task.context_id = require(obj, "context_id", line_number).get<int>();
        ex.task.hidden_intent = require(obj, "hidden_intent", line_number).get<int>();
        ex.task.horizon = require(obj, "horizon", line_number).get<int>();
        ex.group_id = require(obj, "group_id", line_number).get<std::string>();
        ex.temperature = require(obj, "temperature", line_number).get<double>();
        ex.seed = require(obj, "seed", line_number).get<std::uint64_t>();
        const json& steps = require(obj, "steps", line_number);
        if (!steps.is_array()) line_error(line_number, "'steps' must be an array");
        for (const json& js : steps) {
            Step s;
            s.action = require(js, "a", line_number).get<int>();
            s.behavior_action_logprob = require(js, "lp_a", line_number).get<double>();
            s.observation = require(js, "y", line_number).get<int>();
            s.observation_logprob = require(js, "lp_y", line_number).get<double>();
            ex.trajectory.steps.push_back(s);
        }
        ex.reward_raw = require(obj, "reward_raw", line_number).get<double>();
        const json& rstd = require(obj, "reward_std", line_number);
        if (!rstd.is_null()) ex.reward_std = rstd.get<double>();
    } catch (const json::exception& e) {
        line_error(line_number, e.what());
    }
    ex.trajectory.terminated_early =
        static_cast<int>(ex.trajectory.steps.size()) < ex.task.horizon;
    return ex;
}

void write_dataset(const Dataset& dataset, const std::filesystem::path& path) {
    validate_dataset(dataset);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open for writing: " + path.string());
    for (const LoggedExample& ex : dataset.examples) {
        out << to_jsonl_line(ex) << '\n';
    }
    if (!out) throw io_error("write failed: " + path.string());
}

Dataset read_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open for reading: " + path.string());
    Dataset dataset;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        dataset.examples.push_back(from_jsonl_line(line, line_number));
    }
    validate_dataset(dataset);
    return dataset;
}

}  // namespace convopt
