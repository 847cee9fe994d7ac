// SPDX-License-Identifier: Apache-2.0
// Command-line front end: run, replay, report, tools list, session.
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "caporch/config.hpp"
#include "caporch/evaluation.hpp"
#include "caporch/orchestrator.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace caporch;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitTaskCrash = 2;
constexpr int kExitConfig = 3;

// Input problem the user has to fix; maps to exit code 3.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

AppConfig load_app_config(const std::string& path) {
    if (path.empty()) throw UsageError("--config is required");
    AppConfig cfg = load_config(path);
    spdlog::set_level(spdlog::level::from_str(cfg.log_level));
    return cfg;
}

Registry load_registry(const AppConfig* cfg) { return cfg ? Registry::load(cfg->registry_path) : Registry::load_default(); }

AliasTable load_aliases(const AppConfig* cfg) {
    return cfg && cfg->aliases_path ? AliasTable::load(*cfg->aliases_path) : AliasTable::load_default();
}

// Everything a benchmark or session run shares.
struct Runtime {
    AppConfig cfg;
    Registry registry;
    AliasTable aliases;
    fs::path run_dir;
    std::shared_ptr<ImageStore> store;
    std::unique_ptr<ProviderSet> providers;
    ToolExecutor executor;
    std::vector<TaskInstance> tasks;

    Runtime(const std::string& config_path, const std::string& tasks_path, const std::string& run_root)
        : cfg(load_app_config(config_path)), registry(load_registry(&cfg)), aliases(load_aliases(&cfg)) {
        run_dir = create_run_dir(run_root.empty() ? cfg.run_dir : fs::path(run_root));
        write_snapshot(cfg, run_dir);
        store = std::make_shared<ImageStore>(run_dir / "images");
        try {
            tasks = load_tasks(tasks_path, *store);
        } catch (const EvalError& e) {
            throw UsageError(std::string(to_string(e.kind())) + ": " + e.what());
        }
        providers = std::make_unique<ProviderSet>(cfg, store);
        executor.set_endpoints(cfg.endpoints);
        if (!cfg.endpoints.empty()) {
            executor.set_availability(verify_remote_tools(registry, cfg.endpoints));
        }
        executor.set_model_resolver([this](const ToolSpec& spec) -> std::shared_ptr<ModelProvider> {
            const auto it = cfg.routing.find(spec.name);
            return it == cfg.routing.end() ? nullptr : providers->shared(it->second.provider);
        });
        spdlog::info("run directory: {}", run_dir.string());
    }

    ProviderFactory factory() const {
        return [this](const TaskInstance& t) { return providers->for_task(cfg.global_provider, t); };
    }

    BenchmarkEnv env(int parallel) {
        BenchmarkEnv e;
        e.store = store.get();
        e.executor = &executor;
        e.aliases = &aliases;
        e.parallelism = parallel;
        e.out_dir = run_dir;
        return e;
    }
};

int cmd_run(const std::string& config, const std::string& tasks, const std::string& mode, int parallel,
            const std::string& ablation, const std::string& run_root) {
    std::optional<RunMode> mode_override;
    if (!mode.empty()) {
        try {
            mode_override = RunMode::parse(mode);
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
    }
    if (!ablation.empty() && ablation != "flat" && ablation != "removal") {
        throw UsageError("--ablation takes 'removal' or 'flat'");
    }
    Runtime rt(config, tasks, run_root);
    RunConfig run = rt.cfg.run;
    if (mode_override) run.mode = *mode_override;
    std::vector<EvalReport> reports;
    if (ablation.empty()) {
        reports.push_back(run_benchmark(rt.tasks, rt.factory(), rt.registry, run, rt.env(parallel)));
        std::cout << reports.back().to_table();
    } else {
        const AblationSuite suite = ablation == "flat" ? AblationSuite::FlatSelection : AblationSuite::PerCapabilityRemoval;
        BenchmarkEnv base_env = rt.env(parallel);
        base_env.out_dir = rt.run_dir / mode_dir_name(run.mode);
        reports.push_back(run_benchmark(rt.tasks, rt.factory(), rt.registry, run, base_env));
        const auto more = run_ablation(rt.tasks, rt.factory(), rt.registry, run, suite, rt.env(parallel));
        reports.insert(reports.end(), more.begin(), more.end());
        std::cout << comparison_table(reports);
    }
    std::cout << "\nrun directory: " << rt.run_dir.string() << "\n";
    const bool crashed = std::any_of(reports.begin(), reports.end(), [](const EvalReport& r) { return r.crashed > 0; });
    return crashed ? kExitTaskCrash : kExitOk;
}

int cmd_session(const std::string& config, const std::string& tasks, const std::string& task_id, bool interactive,
                const std::string& run_root) {
    Runtime rt(config, tasks, run_root);
    const auto it = std::find_if(rt.tasks.begin(), rt.tasks.end(), [&](const TaskInstance& t) { return t.id == task_id; });
    if (it == rt.tasks.end()) throw UsageError("no task with id '" + task_id + "'");
    SessionEnv env{rt.store.get(), &rt.executor, &rt.aliases, nullptr, {}};
    if (interactive) {
        env.on_turn = [](const TurnRecord& t) {
            std::cout << "=== turn " << t.index << " ===\n" << t.raw << "\n";
            if (!t.observation_kind.empty()) std::cout << "--- " << t.observation_kind << " ---\n" << t.observation_text << "\n";
            for (const auto& n : t.notes) std::cout << "note: " << n << "\n";
            std::cout.flush();
        };
    }
    const auto provider = rt.providers->for_task(rt.cfg.global_provider, *it);
    const SessionResult res = run_session(*it, *provider, rt.registry, rt.cfg.run, env);
    const fs::path trace_path = rt.run_dir / "traces" / (it->id + ".json");
    res.trace.save(trace_path);
    std::cout << "termination: " << to_string(res.termination) << "\nturns: " << res.turns_used
              << "\nanswer: " << res.answer.value_or("<none>") << "\ncorrect: " << (score_answer(res.answer, *it) ? "yes" : "no")
              << "\ntrace: " << trace_path.string() << "\n";
    return res.termination == Termination::ProviderError || res.termination == Termination::Aborted ? kExitTaskCrash
                                                                                                      : kExitOk;
}

int cmd_replay(const std::string& config, const std::string& trace_path, const std::string& images_dir) {
    std::optional<AppConfig> cfg;
    if (!config.empty()) cfg = load_app_config(config);
    const Registry registry = load_registry(cfg ? &*cfg : nullptr);
    const AliasTable aliases = load_aliases(cfg ? &*cfg : nullptr);
    const TraceRecord trace = TraceRecord::load(trace_path);
    ImageStore store;
    // traces live in <run>/traces, images in <run>/images
    const fs::path dir = images_dir.empty() ? fs::path(trace_path).parent_path().parent_path() / "images" : fs::path(images_dir);
    if (fs::is_directory(dir)) store.load_dir(dir);
    try {
        const SessionResult res = replay_trace(trace, registry, store, &aliases);
        std::cout << "replay ok: " << trace.task_id << " answer=" << res.answer.value_or("<none>")
                  << " termination=" << to_string(res.termination) << "\n";
        return kExitOk;
    } catch (const ReplayDivergence& e) {
        std::cout << "replay diverged: " << e.what() << "\n";
        return kExitTaskCrash;
    }
}

int cmd_report(const std::string& runs, const std::string& format) {
    std::vector<fs::path> files;
    if (fs::is_regular_file(runs)) {
        files.push_back(runs);
    } else if (fs::is_directory(runs)) {
        for (const auto& e : fs::recursive_directory_iterator(runs)) {
            if (e.is_regular_file() && e.path().filename() == "report.json") files.push_back(e.path());
        }
    }
    if (files.empty()) throw UsageError("no report.json found under " + runs);
    std::sort(files.begin(), files.end());
    std::vector<EvalReport> reports;
    for (const auto& f : files) {
        std::ifstream in(f);
        reports.push_back(EvalReport::from_json(json::parse(in)));
    }
    if (format == "json") {
        json out = json::array();
        for (std::size_t i = 0; i < reports.size(); ++i) {
            json r = reports[i].to_json();
            r["path"] = files[i].string();
            out.push_back(std::move(r));
        }
        std::cout << out.dump(2) << "\n";
    } else if (reports.size() == 1) {
        std::cout << reports.front().to_table();
    } else {
        for (std::size_t i = 0; i < files.size(); ++i) std::cout << "[" << i << "] " << files[i].string() << "\n";
        std::cout << "\n" << comparison_table(reports);
    }
    return kExitOk;
}

int cmd_tools_list(const std::string& config) {
    std::optional<AppConfig> cfg;
    if (!config.empty()) cfg = load_app_config(config);
    const Registry registry = load_registry(cfg ? &*cfg : nullptr);
    std::optional<RemoteAvailability> availability;
    if (cfg && !cfg->endpoints.empty()) availability = verify_remote_tools(registry, cfg->endpoints);
    for (Capability c : kAllCapabilities) {
        std::cout << display_name(c) << " [" << short_name(c) << "]\n";
        for (const auto& t : registry.tools_for(c)) {
            std::cout << "  " << t.name << "  (" << t.backend.to_string();
            if (cfg) {
                const auto r = cfg->routing.find(t.name);
                if (r != cfg->routing.end() && t.backend.kind == Backend::Kind::Model) {
                    std::cout << " -> " << r->second.provider << " via " << r->second.level;
                }
            }
            if (availability && t.backend.kind == Backend::Kind::Remote) {
                std::cout << (availability->is_available(t.name) ? ", available" : ", UNAVAILABLE");
            }
            std::cout << ")  " << t.description << "\n";
        }
    }
    if (availability) {
        for (const auto& w : availability->warnings) std::cout << "warning: " << w << "\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"caporch: capability-first multimodal reasoning engine and benchmark harness"};
    app.require_subcommand(1);
    spdlog::set_level(spdlog::level::warn);

    std::string config, tasks, mode, ablation, trace, runs, format = "table", task_id, run_root, images_dir;
    int parallel = 1;
    bool interactive = false;

    auto* run = app.add_subcommand("run", "Run a task set and write a report");
    run->add_option("--tasks", tasks, "Task file (JSON lines)")->required();
    run->add_option("--config", config, "Config file")->required();
    run->add_option("--mode", mode, "full | flat | drop:<capability>");
    run->add_option("--parallel", parallel, "Concurrent sessions")->check(CLI::PositiveNumber);
    run->add_option("--ablation", ablation, "Also run an ablation suite: removal | flat");
    run->add_option("--run-root", run_root, "Override the config's run directory root");

    auto* replay = app.add_subcommand("replay", "Re-execute a trace and check it reproduces");
    replay->add_option("--trace", trace, "Trace file")->required();
    replay->add_option("--config", config, "Config file (registry and aliases)");
    replay->add_option("--images", images_dir, "Image directory (default: <run>/images)");

    auto* report = app.add_subcommand("report", "Summarize one or more runs");
    report->add_option("--runs", runs, "Run directory, a directory of runs, or a report.json")->required();
    report->add_option("--format", format, "table | json")->check(CLI::IsMember({"table", "json"}));
    report->add_option("--config", config, "Config file (unused; accepted everywhere)");

    auto* tools = app.add_subcommand("tools", "Inspect the tool registry");
    tools->require_subcommand(1);
    auto* list = tools->add_subcommand("list", "List tools grouped by capability");
    list->add_option("--config", config, "Config file");

    auto* session = app.add_subcommand("session", "Run a single task");
    session->add_option("--task-id", task_id, "Task id")->required();
    session->add_option("--tasks", tasks, "Task file (JSON lines)")->required();
    session->add_option("--config", config, "Config file")->required();
    session->add_flag("--interactive-log", interactive, "Print every turn as it happens");
    session->add_option("--run-root", run_root, "Override the config's run directory root");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config, tasks, mode, parallel, ablation, run_root);
        if (replay->parsed()) return cmd_replay(config, trace, images_dir);
        if (report->parsed()) return cmd_report(runs, format);
        if (list->parsed()) return cmd_tools_list(config);
        if (session->parsed()) return cmd_session(config, tasks, task_id, interactive, run_root);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << to_string(e.kind()) << ": " << e.what() << "\n";
        return kExitConfig;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitOk;
}
