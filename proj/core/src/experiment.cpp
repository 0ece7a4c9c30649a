#include "convopt/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "convopt/dataset_io.hpp"
#include "convopt/errors.hpp"
#include "convopt/numeric.hpp"
#include "convopt/objectives.hpp"

namespace convopt {

namespace fs = std::filesystem;
using nlohmann::json;

void ExperimentConfig::validate() const {
    env.validate();
    reward.validate();
    datagen.validate();
    train.validate();
    if (jobs < 1) throw validation_error("config: jobs must be >= 1");
    if (tasks_total < 1) throw validation_error("config: tasks.total must be >= 1");
    if (tasks_train < 1 || tasks_train > tasks_total) {
        throw validation_error("config: tasks.train must be in [1, tasks.total]");
    }
    if (eval_episodes_per_task < 1) {
        throw validation_error("config: eval.episodes_per_task must be >= 1");
    }
    if (verify_tasks < 1) throw validation_error("config: verify.tasks must be >= 1");
    if (verify_theta_count < 1) {
        throw validation_error("config: verify.theta_count must be >= 1");
    }
    if (verify_theta0_count < 1) {
        throw validation_error("config: verify.theta0_count must be >= 1");
    }
    if (!(verify_theta_scale > 0.0)) {
        throw validation_error("config: verify.theta_scale must be > 0");
    }
    if (output_dir.empty()) throw validation_error("config: output_dir must be non-empty");
}

namespace {

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        if (std::find_if(allowed.begin(), allowed.end(),
                         [&](const char* k) { return key == k; }) == allowed.end()) {
            throw validation_error("config: unknown key \"" + key + "\" in " + where);
        }
    }
}

template <typename T>
T field(const json& obj, const char* key, T fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw validation_error("config: bad value for \"" + std::string(key) + "\" in " +
                               where);
    }
}

EnvSpec parse_env(const json& obj) {
    const std::string family = field<std::string>(obj, "family", "hidden_intent", "env");
    if (family == "hidden_intent") {
        check_keys(obj,
                   {"family", "intents", "attributes", "values", "contexts", "horizon",
                    "adaptive", "user_noise"},
                   "env");
        return EnvSpec::hidden_intent(
            field<int>(obj, "intents", 3, "env"), field<int>(obj, "attributes", 2, "env"),
            field<int>(obj, "values", 2, "env"), field<int>(obj, "contexts", 4, "env"),
            field<int>(obj, "horizon", 3, "env"), field<bool>(obj, "adaptive", false, "env"),
            field<double>(obj, "user_noise", 0.0, "env"));
    }
    if (family == "scripted_exam") {
        check_keys(obj, {"family", "choices", "styles", "contexts", "horizon"}, "env");
        return EnvSpec::scripted_exam(
            field<int>(obj, "choices", 4, "env"), field<int>(obj, "styles", 2, "env"),
            field<int>(obj, "contexts", 4, "env"), field<int>(obj, "horizon", 3, "env"));
    }
    throw validation_error("config: env.family must be hidden_intent or scripted_exam");
}

RewardSpec parse_reward(const json& obj) {
    check_keys(obj, {"mode", "gamma", "weights"}, "reward");
    RewardSpec spec;
    const std::string mode = field<std::string>(obj, "mode", "exact_match", "reward");
    if (mode == "exact_match") {
        spec.mode = RewardSpec::Mode::exact_match;
    } else if (mode == "judge_stub") {
        spec.mode = RewardSpec::Mode::judge_stub;
    } else {
        throw validation_error("config: reward.mode must be exact_match or judge_stub");
    }
    spec.gamma = field<double>(obj, "gamma", 1.0, "reward");
    if (obj.contains("weights")) {
        const json& w = obj.at("weights");
        check_keys(w, {"accuracy", "style", "brevity"}, "reward.weights");
        spec.weight_accuracy = field<double>(w, "accuracy", 1.0, "reward.weights");
        spec.weight_style = field<double>(w, "style", 0.0, "reward.weights");
        spec.weight_brevity = field<double>(w, "brevity", 0.0, "reward.weights");
    }
    return spec;
}

}  // namespace

ExperimentConfig load_config(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw io_error("config: cannot open " + path);
    json doc;
    try {
        doc = json::parse(file);
    } catch (const json::exception& e) {
        throw validation_error("config: " + path + ": " + e.what());
    }
    if (!doc.is_object()) throw validation_error("config: top level must be an object");
    check_keys(doc,
               {"output_dir", "master_seed", "jobs", "env", "reward", "policy_family",
                "tasks", "datagen", "train", "eval", "verify"},
               "top level");
    ExperimentConfig cfg;
    cfg.output_dir = field<std::string>(doc, "output_dir", cfg.output_dir, "top level");
    cfg.master_seed =
        field<std::uint64_t>(doc, "master_seed", cfg.master_seed, "top level");
    cfg.jobs = field<int>(doc, "jobs", cfg.jobs, "top level");
    if (doc.contains("env")) cfg.env = parse_env(doc.at("env"));
    if (doc.contains("reward")) cfg.reward = parse_reward(doc.at("reward"));
    const std::string family =
        field<std::string>(doc, "policy_family", "tabular", "top level");
    if (family == "tabular") {
        cfg.policy_family = PolicyParams::Family::tabular;
    } else if (family == "linear") {
        cfg.policy_family = PolicyParams::Family::linear;
    } else {
        throw validation_error("config: policy_family must be tabular or linear");
    }
    if (doc.contains("tasks")) {
        const json& t = doc.at("tasks");
        check_keys(t, {"total", "train"}, "tasks");
        cfg.tasks_total = field<int>(t, "total", cfg.tasks_total, "tasks");
        cfg.tasks_train = field<int>(t, "train", cfg.tasks_train, "tasks");
    }
    if (doc.contains("datagen")) {
        const json& d = doc.at("datagen");
        check_keys(d, {"m", "temperatures", "record_tempered_propensity", "standardize"},
                   "datagen");
        cfg.datagen.m = field<int>(d, "m", cfg.datagen.m, "datagen");
        cfg.datagen.temperatures = field<std::vector<double>>(
            d, "temperatures", cfg.datagen.temperatures, "datagen");
        cfg.datagen.record_tempered_propensity =
            field<bool>(d, "record_tempered_propensity",
                        cfg.datagen.record_tempered_propensity, "datagen");
        cfg.datagen.standardize =
            field<bool>(d, "standardize", cfg.datagen.standardize, "datagen");
    }
    if (doc.contains("train")) {
        const json& t = doc.at("train");
        check_keys(t, {"epochs", "lr", "schedule", "clip_norm", "dpo_beta", "adaptive"},
                   "train");
        cfg.train.epochs = field<int>(t, "epochs", cfg.train.epochs, "train");
        cfg.train.lr = field<double>(t, "lr", cfg.train.lr, "train");
        const std::string schedule =
            field<std::string>(t, "schedule", "inverse_sqrt", "train");
        if (schedule == "constant") {
            cfg.train.schedule = TrainConfig::Schedule::constant;
        } else if (schedule == "inverse_sqrt") {
            cfg.train.schedule = TrainConfig::Schedule::inverse_sqrt;
        } else {
            throw validation_error("config: train.schedule must be constant or inverse_sqrt");
        }
        cfg.train.clip_norm = field<double>(t, "clip_norm", cfg.train.clip_norm, "train");
        cfg.train.dpo_beta = field<double>(t, "dpo_beta", cfg.train.dpo_beta, "train");
        cfg.train.adaptive = field<bool>(t, "adaptive", cfg.train.adaptive, "train");
    }
    if (doc.contains("eval")) {
        const json& e = doc.at("eval");
        check_keys(e, {"episodes_per_task", "greedy"}, "eval");
        cfg.eval_episodes_per_task =
            field<int>(e, "episodes_per_task", cfg.eval_episodes_per_task, "eval");
        cfg.eval_greedy = field<bool>(e, "greedy", cfg.eval_greedy, "eval");
    }
    if (doc.contains("verify")) {
        const json& v = doc.at("verify");
        check_keys(v, {"tasks", "theta_count", "theta0_count", "theta_scale"}, "verify");
        cfg.verify_tasks = field<int>(v, "tasks", cfg.verify_tasks, "verify");
        cfg.verify_theta_count =
            field<int>(v, "theta_count", cfg.verify_theta_count, "verify");
        cfg.verify_theta0_count =
            field<int>(v, "theta0_count", cfg.verify_theta0_count, "verify");
        cfg.verify_theta_scale =
            field<double>(v, "theta_scale", cfg.verify_theta_scale, "verify");
    }
    cfg.validate();
    return cfg;
}

namespace {

json env_json(const EnvSpec& env) {
    json out;
    if (env.family == EnvSpec::Family::hidden_intent) {
        out["family"] = "hidden_intent";
        out["intents"] = env.intent_count;
        out["attributes"] = env.attribute_count;
        out["values"] = env.value_count;
        out["adaptive"] = env.adaptive;
        out["user_noise"] = env.user_noise;
    } else {
        out["family"] = "scripted_exam";
        out["choices"] = env.intent_count;
        out["styles"] = env.style_count;
    }
    out["contexts"] = env.context_count;
    out["horizon"] = env.horizon;
    return out;
}

}  // namespace

std::string effective_config_json(const ExperimentConfig& cfg) {
    json doc;
    doc["output_dir"] = cfg.output_dir;
    doc["master_seed"] = cfg.master_seed;
    doc["jobs"] = cfg.jobs;
    doc["env"] = env_json(cfg.env);
    doc["reward"] = {
        {"mode",
         cfg.reward.mode == RewardSpec::Mode::exact_match ? "exact_match" : "judge_stub"},
        {"gamma", cfg.reward.gamma},
        {"weights",
         {{"accuracy", cfg.reward.weight_accuracy},
          {"style", cfg.reward.weight_style},
          {"brevity", cfg.reward.weight_brevity}}}};
    doc["policy_family"] =
        cfg.policy_family == PolicyParams::Family::tabular ? "tabular" : "linear";
    doc["tasks"] = {{"total", cfg.tasks_total}, {"train", cfg.tasks_train}};
    doc["datagen"] = {{"m", cfg.datagen.m},
                      {"temperatures", cfg.datagen.temperatures},
                      {"record_tempered_propensity", cfg.datagen.record_tempered_propensity},
                      {"standardize", cfg.datagen.standardize}};
    doc["train"] = {
        {"epochs", cfg.train.epochs},
        {"lr", cfg.train.lr},
        {"schedule",
         cfg.train.schedule == TrainConfig::Schedule::constant ? "constant" : "inverse_sqrt"},
        {"clip_norm", cfg.train.clip_norm},
        {"dpo_beta", cfg.train.dpo_beta},
        {"adaptive", cfg.train.adaptive}};
    doc["eval"] = {{"episodes_per_task", cfg.eval_episodes_per_task},
                   {"greedy", cfg.eval_greedy}};
    doc["verify"] = {{"tasks", cfg.verify_tasks},
                     {"theta_count", cfg.verify_theta_count},
                     {"theta0_count", cfg.verify_theta0_count},
                     {"theta_scale", cfg.verify_theta_scale}};
    return doc.dump(2) + "\n";
}

std::string config_hash_hex(const ExperimentConfig& cfg) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(effective_config_json(cfg))));
    return buf;
}

std::vector<TaskInstance> experiment_tasks(const ExperimentConfig& cfg) {
    Rng rng(derive_seed(cfg.master_seed, fnv1a64("tasks")));
    return make_tasks(cfg.env, cfg.tasks_total, rng);
}

PolicyParams behavior_policy(const ExperimentConfig& cfg) {
    return uniform_policy(cfg.env, cfg.policy_family);
}

namespace {

fs::path out_path(const ExperimentConfig& cfg, const std::string& name) {
    return fs::path(cfg.output_dir) / name;
}

void ensure_output_dir(const ExperimentConfig& cfg) {
    std::error_code ec;
    fs::create_directories(cfg.output_dir, ec);
    if (ec) throw io_error("cannot create output directory " + cfg.output_dir);
}

void write_text(const fs::path& path, const std::string& body) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw io_error("cannot open " + path.string());
    file << body;
    if (!file) throw io_error("write failed for " + path.string());
}

void write_manifest(const ExperimentConfig& cfg, const std::string& command, json extra) {
    extra["command"] = command;
    extra["config_hash"] = config_hash_hex(cfg);
    extra["master_seed"] = cfg.master_seed;
    std::string name = command;
    std::replace(name.begin(), name.end(), '-', '_');
    write_text(out_path(cfg, name + "_manifest.json"), extra.dump(2) + "\n");
}

std::vector<TaskInstance> train_split(const std::vector<TaskInstance>& tasks,
                                      const ExperimentConfig& cfg) {
    return {tasks.begin(), tasks.begin() + cfg.tasks_train};
}

std::vector<TaskInstance> eval_split(const std::vector<TaskInstance>& tasks,
                                     const ExperimentConfig& cfg) {
    return {tasks.begin() + cfg.tasks_train, tasks.end()};
}

bool enumerable(const EnvSpec& env, const std::vector<TaskInstance>& tasks) {
    for (const TaskInstance& task : tasks) {
        if (enumeration_leaf_bound(env, task) > 1e6) return false;
    }
    return true;
}

std::string trace_csv(const TrainResult& result) {
    std::ostringstream out;
    out << "epoch,offline_objective,exact_value\n";
    for (std::size_t e = 0; e < result.offline_objective_by_epoch.size(); ++e) {
        out << (e + 1) << ',' << format_g17(result.offline_objective_by_epoch[e]) << ',';
        if (e < result.exact_value_by_epoch.size()) {
            out << format_g17(result.exact_value_by_epoch[e]);
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace

int cmd_datagen(const ExperimentConfig& cfg) {
    cfg.validate();
    const std::vector<TaskInstance> tasks = experiment_tasks(cfg);
    const std::vector<TaskInstance> logged = train_split(tasks, cfg);
    const PolicyParams theta0 = behavior_policy(cfg);
    const Dataset dataset =
        generate_dataset(theta0, cfg.env, cfg.reward, logged, cfg.datagen);
    ensure_output_dir(cfg);
    write_dataset(dataset, out_path(cfg, "dataset.jsonl"));
    write_manifest(cfg, "datagen",
                   {{"output", "dataset.jsonl"},
                    {"examples", dataset.examples.size()},
                    {"tasks_total", cfg.tasks_total},
                    {"tasks_train", cfg.tasks_train}});
    return 0;
}

namespace {

bool known_algo(const std::string& algo) {
    for (const char* name : kAlgoNames) {
        if (algo == name) return true;
    }
    return false;
}

}  // namespace

int cmd_train(const ExperimentConfig& cfg, const std::string& algo,
              const std::string& dataset_path) {
    cfg.validate();
    if (!known_algo(algo)) {
        std::string valid;
        for (const char* name : kAlgoNames) {
            valid += valid.empty() ? name : std::string(", ") + name;
        }
        throw validation_error("train: unknown algo \"" + algo + "\" (valid: " + valid + ")");
    }
    const std::string path =
        dataset_path.empty() ? out_path(cfg, "dataset.jsonl").string() : dataset_path;
    const Dataset dataset = read_dataset(path);

    const PolicyParams theta0 = behavior_policy(cfg);
    TrainConfig tc = cfg.train;
    tc.shuffle_seed = derive_seed(cfg.master_seed, fnv1a64("shuffle"), fnv1a64(algo));
    tc.reward_mode = algo == "swift" ? TrainConfig::RewardMode::standardized
                                     : TrainConfig::RewardMode::raw;

    const std::vector<TaskInstance> tasks = experiment_tasks(cfg);
    std::vector<TaskInstance> trace_tasks = eval_split(tasks, cfg);
    if (trace_tasks.empty()) trace_tasks = train_split(tasks, cfg);
    ExactTraceSpec trace{cfg.env, cfg.reward, trace_tasks};
    const ExactTraceSpec* trace_ptr =
        enumerable(cfg.env, trace_tasks) ? &trace : nullptr;

    TrainResult result;
    if (algo == "refit") {
        result = train_refit(theta0, dataset, tc, trace_ptr);
    } else if (algo == "swift") {
        for (const LoggedExample& example : dataset.examples) {
            if (!example.reward_std) {
                throw validation_error(
                    "train: swift needs standardized rewards; regenerate the dataset with "
                    "datagen.standardize=true (attach_standardized)");
            }
        }
        result = train_swift(theta0, dataset, tc, trace_ptr);
    } else if (algo == "threshold-sft") {
        result = train_threshold_sft(theta0, dataset, tc, trace_ptr);
    } else if (algo == "dpo") {
        result = train_dpo(theta0, theta0, dataset, tc, trace_ptr);
    } else {
        const std::uint64_t seed =
            derive_seed(cfg.master_seed, fnv1a64("counterfactual"), fnv1a64(algo));
        result = train_step_dpo(theta0, theta0, theta0, cfg.env, cfg.reward, dataset, tc,
                                seed, trace_ptr);
    }

    ensure_output_dir(cfg);
    save_policy(result.params, out_path(cfg, algo + "_checkpoint.json").string());
    write_text(out_path(cfg, algo + "_trace.csv"), trace_csv(result));
    write_manifest(cfg, "train-" + algo,
                   {{"algo", algo},
                    {"dataset", path},
                    {"update_count", result.update_count},
                    {"pairs", result.pairs.size()}});
    return 0;
}

namespace {

std::vector<std::pair<std::string, PolicyParams>> discover_methods(
    const ExperimentConfig& cfg) {
    std::vector<std::pair<std::string, PolicyParams>> methods;
    methods.emplace_back("base", behavior_policy(cfg));
    const std::string suffix = "_checkpoint.json";
    std::vector<std::string> names;
    if (fs::is_directory(cfg.output_dir)) {
        for (const fs::directory_entry& entry : fs::directory_iterator(cfg.output_dir)) {
            const std::string file = entry.path().filename().string();
            if (file.size() > suffix.size() &&
                file.compare(file.size() - suffix.size(), suffix.size(), suffix) == 0) {
                names.push_back(file.substr(0, file.size() - suffix.size()));
            }
        }
    }
    std::sort(names.begin(), names.end());
    for (const std::string& name : names) {
        methods.emplace_back(name,
                             load_policy(out_path(cfg, name + suffix).string()));
    }
    return methods;
}

ComparisonTable build_comparison(const ExperimentConfig& cfg) {
    const std::vector<TaskInstance> tasks = experiment_tasks(cfg);
    const std::vector<TaskInstance> held_out = eval_split(tasks, cfg);
    if (held_out.empty()) {
        throw validation_error(
            "eval: no held-out tasks (tasks.train equals tasks.total)");
    }
    CompareConfig cc;
    cc.episodes_per_task = cfg.eval_episodes_per_task;
    cc.seed = derive_seed(cfg.master_seed, fnv1a64("eval"));
    cc.greedy = cfg.eval_greedy;
    cc.jobs = cfg.jobs;
    return compare(discover_methods(cfg), cfg.env, cfg.reward, held_out, cc);
}

}  // namespace

int cmd_eval(const ExperimentConfig& cfg) {
    cfg.validate();
    const ComparisonTable table = build_comparison(cfg);
    ensure_output_dir(cfg);
    emit_report(table, out_path(cfg, "report.csv").string(), ReportFormat::csv);
    write_manifest(cfg, "eval",
                   {{"output", "report.csv"}, {"methods", table.methods.size()}});
    return 0;
}

int cmd_report(const ExperimentConfig& cfg) {
    cfg.validate();
    ComparisonTable table;
    const fs::path csv = out_path(cfg, "report.csv");
    if (fs::exists(csv)) {
        table = parse_report_csv(csv.string());
    } else {
        table = build_comparison(cfg);
        ensure_output_dir(cfg);
        emit_report(table, csv.string(), ReportFormat::csv);
    }
    ensure_output_dir(cfg);
    emit_report(table, out_path(cfg, "report.md").string(), ReportFormat::markdown);
    write_manifest(cfg, "report",
                   {{"output", "report.md"}, {"methods", table.methods.size()}});
    return 0;
}

namespace {

json report_json(const char* check, const std::string& theta_label,
                 const std::string& theta0_label, const BoundReport& report) {
    return {{"check", check},
            {"theta", theta_label},
            {"theta0", theta0_label},
            {"v_online", report.v_online},
            {"j_offline_full", report.j_offline_full},
            {"c1", report.c1},
            {"c2", report.c2},
            {"b", report.b},
            {"gap", report.gap},
            {"satisfied", report.satisfied}};
}

}  // namespace

int cmd_verify_bounds(const ExperimentConfig& cfg) {
    cfg.validate();
    Rng task_rng(derive_seed(cfg.master_seed, fnv1a64("verify-tasks")));
    const std::vector<TaskInstance> tasks = make_tasks(cfg.env, cfg.verify_tasks, task_rng);
    if (!enumerable(cfg.env, tasks)) {
        throw capability_error("verify-bounds: instance is not enumerable");
    }
    if (cfg.datagen.m < 2) {
        throw validation_error("verify-bounds: datagen.m must be >= 2 for standardization");
    }

    const PolicyParams uniform = behavior_policy(cfg);
    std::vector<std::pair<std::string, PolicyParams>> theta0s;
    theta0s.emplace_back("uniform", uniform);
    for (int i = 1; i < cfg.verify_theta0_count; ++i) {
        char label[32];
        std::snprintf(label, sizeof(label), "behavior-%03d", i);
        Rng rng(derive_seed(cfg.master_seed, fnv1a64("verify-theta0"),
                            static_cast<std::uint64_t>(i)));
        theta0s.emplace_back(label, random_linear_policy(cfg.env, rng, cfg.verify_theta_scale));
    }
    std::vector<std::pair<std::string, PolicyParams>> thetas;
    for (int i = 0; i < cfg.verify_theta_count; ++i) {
        char label[32];
        std::snprintf(label, sizeof(label), "random-%03d", i);
        Rng rng(derive_seed(cfg.master_seed, fnv1a64("verify-theta"),
                            static_cast<std::uint64_t>(i)));
        thetas.emplace_back(label, random_linear_policy(cfg.env, rng, cfg.verify_theta_scale));
    }
    for (const auto& [name, params] : discover_methods(cfg)) {
        if (name != "base") thetas.emplace_back("checkpoint-" + name, params);
    }

    json reports = json::array();
    bool all_satisfied = true;
    for (const auto& [label0, theta0] : theta0s) {
        const BoundReport tight = verify_lemma1(theta0, theta0, cfg.env, cfg.reward, tasks);
        all_satisfied = all_satisfied && tight.satisfied && std::abs(tight.gap) <= 1e-9;
        reports.push_back(report_json("lemma1", label0 + " (tight)", label0, tight));
        for (const auto& [label, theta] : thetas) {
            const BoundReport r = verify_lemma1(theta, theta0, cfg.env, cfg.reward, tasks);
            all_satisfied = all_satisfied && r.satisfied;
            reports.push_back(report_json("lemma1", label, label0, r));
        }
    }

    DatagenConfig dg = cfg.datagen;
    dg.master_seed = derive_seed(cfg.master_seed, fnv1a64("verify-data"));
    dg.standardize = true;
    const Dataset dataset = generate_dataset(uniform, cfg.env, cfg.reward, tasks, dg);
    const StandardizationMap stats = standardization_by_group(dataset);
    {
        const BoundReport tight =
            verify_lemma3(uniform, uniform, cfg.env, cfg.reward, tasks, stats);
        all_satisfied = all_satisfied && tight.satisfied && tight.c2 == 0.0;
        reports.push_back(report_json("lemma3", "uniform (tight)", "uniform", tight));
    }
    for (const auto& [label, theta] : thetas) {
        const BoundReport r = verify_lemma3(theta, uniform, cfg.env, cfg.reward, tasks, stats);
        all_satisfied = all_satisfied && r.satisfied;
        reports.push_back(report_json("lemma3", label, "uniform", r));
    }

    ensure_output_dir(cfg);
    json doc = {{"config_hash", config_hash_hex(cfg)},
                {"master_seed", cfg.master_seed},
                {"all_satisfied", all_satisfied},
                {"reports", reports}};
    write_text(out_path(cfg, "bound_reports.json"), doc.dump(2) + "\n");
    write_manifest(cfg, "verify-bounds",
                   {{"output", "bound_reports.json"},
                    {"reports", reports.size()},
                    {"all_satisfied", all_satisfied}});
    return all_satisfied ? 0 : 1;
}

}  // namespace convopt
