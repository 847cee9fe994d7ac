// SPDX-License-Identifier: Apache-2.0
#include "caporch/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <fstream>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "caporch/util.hpp"

namespace caporch {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(EvalErrorKind k) {
    switch (k) {
        case EvalErrorKind::SchemaError: return "SchemaError";
        case EvalErrorKind::MissingImage: return "MissingImage";
        case EvalErrorKind::DuplicateId: return "DuplicateId";
        case EvalErrorKind::EmptyTaskSet: return "EmptyTaskSet";
    }
    return "?";
}

namespace {

inline constexpr double kDefaultNumericTolerance = 1e-6;

std::optional<AnswerMode::Kind> answer_kind_from_string(std::string_view s) {
    using K = AnswerMode::Kind;
    for (K k : {K::MultipleChoice, K::ExactText, K::Numeric, K::ActionSequence}) {
        if (AnswerMode{k, 0}.name() == s) return k;
    }
    return std::nullopt;
}

std::string required_string(const json& doc, const char* key) {
    if (!doc.contains(key) || !doc[key].is_string()) {
        throw std::invalid_argument(std::string("missing or non-string \"") + key + "\"");
    }
    return doc[key].get<std::string>();
}

std::optional<double> parse_real(std::string_view text) {
    const std::string t = trim(text);
    if (t.empty()) return std::nullopt;
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::string normalize_choice(std::string_view s) {
    std::string t = to_upper(trim(s));
    while (!t.empty() && (t.front() == '(' || t.front() == '[')) t.erase(t.begin());
    while (!t.empty() && std::string_view(".,;:!?)]").find(t.back()) != std::string_view::npos) t.pop_back();
    return trim(t);
}

std::string normalize_text(std::string_view s) {
    std::string out;
    bool space = false;
    for (char c : trim(s)) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            space = true;
            continue;
        }
        if (space && !out.empty()) out += ' ';
        space = false;
        out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

std::vector<std::string> action_tokens(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
            if (!cur.empty()) out.push_back(to_upper(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(to_upper(cur));
    return out;
}

json group_json(const GroupScore& g) {
    return {{"correct", g.correct}, {"total", g.total}, {"accuracy", g.accuracy()}};
}

GroupScore group_from_json(const json& j) { return {j.at("correct").get<int>(), j.at("total").get<int>()}; }

std::string file_safe(std::string_view id) {
    std::string out;
    for (char c : id) {
        out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.') ? c : '_';
    }
    return out;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

}  // namespace

TaskInstance task_from_json(const json& doc, const fs::path& base_dir, ImageStore& store) {
    if (!doc.is_object()) throw std::invalid_argument("task must be a JSON object");
    TaskInstance t;
    t.id = required_string(doc, "id");
    if (t.id.empty()) throw std::invalid_argument("\"id\" is empty");
    t.instruction = required_string(doc, "instruction");
    t.gold = required_string(doc, "gold");
    if (trim(t.gold).empty()) throw std::invalid_argument("\"gold\" is empty");
    const std::string mode = required_string(doc, "answer_mode");
    const auto kind = answer_kind_from_string(mode);
    if (!kind) throw std::invalid_argument("unknown answer_mode '" + mode + "'");
    t.answer_mode.kind = *kind;
    if (*kind == AnswerMode::Kind::Numeric) {
        const json tol = doc.value("tolerance", json(kDefaultNumericTolerance));
        if (!tol.is_number() || tol.get<double>() < 0) throw std::invalid_argument("\"tolerance\" must be >= 0");
        t.answer_mode.tolerance = tol.get<double>();
        if (!parse_real(t.gold)) throw std::invalid_argument("numeric gold '" + t.gold + "' is not a number");
    }
    t.family = doc.contains("family") ? required_string(doc, "family") : "default";
    if (doc.contains("capability_labels")) {
        if (!doc["capability_labels"].is_array()) throw std::invalid_argument("\"capability_labels\" must be an array");
        for (const auto& c : doc["capability_labels"]) {
            const auto cap = c.is_string() ? capability_from_short_name(c.get<std::string>()) : std::nullopt;
            if (!cap) throw std::invalid_argument("unknown capability label " + c.dump());
            t.capability_labels.insert(*cap);
        }
    }
    if (doc.contains("images")) {
        if (!doc["images"].is_array()) throw std::invalid_argument("\"images\" must be an array of paths");
        for (const auto& p : doc["images"]) {
            if (!p.is_string()) throw std::invalid_argument("\"images\" must be an array of paths");
            const fs::path path = base_dir / p.get<std::string>();
            if (!fs::exists(path)) throw EvalError(EvalErrorKind::MissingImage, "image not found: " + path.string());
            t.images.push_back(store.put_file(path));
        }
    }
    return t;
}

json task_to_json(const TaskInstance& task, const std::vector<std::string>& image_paths) {
    json j = {
        {"id", task.id},
        {"instruction", task.instruction},
        {"images", image_paths},
        {"gold", task.gold},
        {"answer_mode", task.answer_mode.name()},
        {"family", task.family},
        {"capability_labels", capability_set_to_json(task.capability_labels)},
    };
    if (task.answer_mode.kind == AnswerMode::Kind::Numeric) j["tolerance"] = task.answer_mode.tolerance;
    return j;
}

std::vector<TaskInstance> load_tasks(const fs::path& path, ImageStore& store) {
    std::ifstream in(path);
    if (!in) throw EvalError(EvalErrorKind::SchemaError, "cannot open task file " + path.string());
    const fs::path base = path.parent_path();
    std::vector<TaskInstance> tasks;
    std::set<std::string> ids;
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (trim(line).empty()) continue;
        TaskInstance t;
        try {
            t = task_from_json(json::parse(line), base, store);
        } catch (const EvalError&) {
            throw;
        } catch (const std::exception& e) {
            throw EvalError(EvalErrorKind::SchemaError, "line " + std::to_string(n) + ": " + e.what(), n);
        }
        if (!ids.insert(t.id).second) {
            throw EvalError(EvalErrorKind::DuplicateId, "line " + std::to_string(n) + ": duplicate task id '" + t.id + "'", n);
        }
        tasks.push_back(std::move(t));
    }
    return tasks;
}

ScoreDetail score_answer_detailed(const std::optional<std::string>& pred, const TaskInstance& task) {
    if (!pred) return {};
    switch (task.answer_mode.kind) {
        case AnswerMode::Kind::MultipleChoice: {
            const std::string p = normalize_choice(*pred);
            return {!p.empty() && p == normalize_choice(task.gold), false};
        }
        case AnswerMode::Kind::ExactText: return {normalize_text(*pred) == normalize_text(task.gold), false};
        case AnswerMode::Kind::Numeric: {
            const auto p = parse_real(*pred);
            const auto g = parse_real(task.gold);
            if (!p || !g) return {false, true};
            return {std::fabs(*p - *g) <= task.answer_mode.tolerance, false};
        }
        case AnswerMode::Kind::ActionSequence: {
            const auto p = action_tokens(*pred);
            return {!p.empty() && p == action_tokens(task.gold), false};
        }
    }
    return {};
}

bool score_answer(const std::optional<std::string>& pred, const TaskInstance& task) {
    return score_answer_detailed(pred, task).correct;
}

EvalReport aggregate(std::string mode, std::vector<TaskRow> rows) {
    EvalReport r;
    r.mode = std::move(mode);
    std::sort(rows.begin(), rows.end(), [](const TaskRow& a, const TaskRow& b) { return a.id < b.id; });
    for (const auto& row : rows) {
        const int c = row.correct ? 1 : 0;
        r.overall.correct += c;
        ++r.overall.total;
        auto& fam = r.per_family[row.family];
        fam.correct += c;
        ++fam.total;
        for (Capability cap : row.capability_labels) {
            auto& g = r.per_capability[cap];
            g.correct += c;
            ++g.total;
        }
        if (row.termination == Termination::ProviderError || row.termination == Termination::Aborted) ++r.crashed;
    }
    r.rows = std::move(rows);
    r.created_at = utc_timestamp();
    return r;
}

json EvalReport::to_json(bool include_timestamp) const {
    json fam = json::object();
    for (const auto& [k, g] : per_family) fam[k] = group_json(g);
    json caps = json::object();
    for (const auto& [c, g] : per_capability) caps[std::string(short_name(c))] = group_json(g);
    json rows_j = json::array();
    for (const auto& row : rows) {
        rows_j.push_back({
            {"id", row.id},
            {"family", row.family},
            {"capability_labels", capability_set_to_json(row.capability_labels)},
            {"correct", row.correct},
            {"unparsable", row.unparsable},
            {"turns", row.turns},
            {"termination", to_string(row.termination)},
            {"answer", row.answer ? json(*row.answer) : json(nullptr)},
        });
    }
    json j = {
        {"mode", mode},
        {"overall", group_json(overall)},
        {"per_family", fam},
        {"per_capability", caps},
        {"crashed", crashed},
        {"rows", rows_j},
    };
    if (include_timestamp) j["created_at"] = created_at;
    return j;
}

EvalReport EvalReport::from_json(const json& j) {
    EvalReport r;
    r.mode = j.at("mode").get<std::string>();
    r.overall = group_from_json(j.at("overall"));
    for (const auto& [k, v] : j.at("per_family").items()) r.per_family[k] = group_from_json(v);
    for (const auto& [k, v] : j.at("per_capability").items()) {
        const auto c = capability_from_short_name(k);
        if (!c) throw std::invalid_argument("unknown capability '" + k + "' in report");
        r.per_capability[*c] = group_from_json(v);
    }
    r.crashed = j.value("crashed", 0);
    for (const auto& row : j.at("rows")) {
        TaskRow t;
        t.id = row.at("id").get<std::string>();
        t.family = row.value("family", "");
        for (const auto& c : row.value("capability_labels", json::array())) {
            if (auto cap = capability_from_short_name(c.get<std::string>())) t.capability_labels.insert(*cap);
        }
        t.correct = row.at("correct").get<bool>();
        t.unparsable = row.value("unparsable", false);
        t.turns = row.value("turns", 0);
        t.termination = termination_from_string(row.value("termination", "TurnLimit")).value_or(Termination::TurnLimit);
        if (row.contains("answer") && !row["answer"].is_null()) t.answer = row["answer"].get<std::string>();
        r.rows.push_back(std::move(t));
    }
    r.created_at = j.value("created_at", "");
    return r;
}

std::string EvalReport::to_table() const {
    std::string out;
    out += fmt::format("mode: {}\n", mode);
    out += fmt::format("overall: {}/{} = {:.4f}\n", overall.correct, overall.total, overall.accuracy());
    out += fmt::format("crashed sessions: {}\n\n", crashed);
    out += fmt::format("{:<16} {:>7} {:>5} {:>8}\n", "family", "correct", "total", "accuracy");
    for (const auto& [k, g] : per_family) {
        out += fmt::format("{:<16} {:>7} {:>5} {:>8.4f}\n", k, g.correct, g.total, g.accuracy());
    }
    out += fmt::format("\n{:<16} {:>7} {:>5} {:>8}\n", "capability", "correct", "total", "accuracy");
    for (const auto& [c, g] : per_capability) {
        out += fmt::format("{:<16} {:>7} {:>5} {:>8.4f}\n", short_name(c), g.correct, g.total, g.accuracy());
    }
    out += fmt::format("\n{:<24} {:<8} {:>5} {:<14} {}\n", "task", "correct", "turns", "termination", "answer");
    for (const auto& row : rows) {
        out += fmt::format("{:<24} {:<8} {:>5} {:<14} {}\n", row.id, row.correct ? "yes" : "no", row.turns,
                           to_string(row.termination), row.answer.value_or("-"));
    }
    return out;
}

std::string comparison_table(const std::vector<EvalReport>& reports) {
    std::set<std::string> families;
    std::set<Capability> caps;
    for (const auto& r : reports) {
        for (const auto& [k, _] : r.per_family) families.insert(k);
        for (const auto& [c, _] : r.per_capability) caps.insert(c);
    }
    std::string out = fmt::format("{:<20}", "");
    for (const auto& r : reports) out += fmt::format(" {:>16}", r.mode);
    out += '\n';
    auto line = [&](const std::string& label, auto&& pick) {
        out += fmt::format("{:<20}", label);
        for (const auto& r : reports) {
            const std::optional<GroupScore> g = pick(r);
            out += g ? fmt::format(" {:>16.4f}", g->accuracy()) : fmt::format(" {:>16}", "-");
        }
        out += '\n';
    };
    line("overall", [](const EvalReport& r) { return std::optional<GroupScore>(r.overall); });
    for (Capability c : caps) {
        line(std::string("cap:") + std::string(short_name(c)), [c](const EvalReport& r) {
            const auto it = r.per_capability.find(c);
            return it == r.per_capability.end() ? std::nullopt : std::optional<GroupScore>(it->second);
        });
    }
    for (const auto& f : families) {
        line("family:" + f, [&f](const EvalReport& r) {
            const auto it = r.per_family.find(f);
            return it == r.per_family.end() ? std::nullopt : std::optional<GroupScore>(it->second);
        });
    }
    return out;
}

EvalReport run_benchmark(const std::vector<TaskInstance>& tasks, const ProviderFactory& providers,
                         const Registry& registry, const RunConfig& config, const BenchmarkEnv& env) {
    if (tasks.empty()) throw EvalError(EvalErrorKind::EmptyTaskSet, "no tasks to run");
    if (env.store == nullptr) throw std::invalid_argument("run_benchmark needs an image store");
    config.validate();
    if (env.out_dir) fs::create_directories(*env.out_dir / "traces");

    std::vector<TraceRecord> traces(tasks.size());
    std::vector<TaskRow> rows(tasks.size());
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) {
            const TaskInstance& task = tasks[i];
            SessionResult res;
            try {
                std::shared_ptr<ModelProvider> provider = providers(task);
                if (!provider) throw std::runtime_error("no provider for task '" + task.id + "'");
                SessionEnv senv{env.store, env.executor, env.aliases, nullptr, {}};
                res = run_session(task, *provider, registry, config, senv);
            } catch (const std::exception& e) {
                spdlog::error("task {}: {}", task.id, e.what());
                res.termination = Termination::Aborted;
                res.trace.task_id = task.id;
                res.trace.instruction = task.instruction;
                res.trace.images = task.images;
                res.trace.config = config.to_json();
                res.trace.termination = Termination::Aborted;
                res.trace.failure = e.what();
                res.trace.started_at = utc_timestamp();
            }
            const ScoreDetail score = score_answer_detailed(res.answer, task);
            rows[i] = TaskRow{task.id,        task.family,     task.capability_labels, score.correct,
                              score.unparsable, res.turns_used, res.termination,        res.answer};
            if (env.out_dir) res.trace.save(*env.out_dir / "traces" / (file_safe(task.id) + ".json"));
            traces[i] = std::move(res.trace);
        }
    };

    const std::size_t n = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(env.parallelism, 1)), 1, tasks.size());
    if (n == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t k = 0; k < n; ++k) pool.emplace_back(worker);
    }

    EvalReport report = aggregate(config.mode.label(), std::move(rows));
    if (env.out_dir) {
        write_text(*env.out_dir / "report.json", report.to_json(true).dump(2) + "\n");
        write_text(*env.out_dir / "report.txt", report.to_table());
    }
    if (env.traces) *env.traces = std::move(traces);
    return report;
}

std::string mode_dir_name(const RunMode& mode) {
    std::string s = mode.label();
    std::replace(s.begin(), s.end(), ':', '-');
    return s;
}

std::vector<EvalReport> run_ablation(const std::vector<TaskInstance>& tasks, const ProviderFactory& providers,
                                     const Registry& registry, const RunConfig& base, AblationSuite suite,
                                     const BenchmarkEnv& env) {
    std::vector<RunMode> modes;
    if (suite == AblationSuite::FlatSelection) {
        modes.push_back(RunMode::flat());
    } else {
        for (Capability c : kAllCapabilities) modes.push_back(RunMode::without({c}));
    }
    std::vector<EvalReport> reports;
    for (const auto& mode : modes) {
        RunConfig cfg = base;
        cfg.mode = mode;
        BenchmarkEnv e = env;
        e.traces = nullptr;
        if (env.out_dir) e.out_dir = *env.out_dir / mode_dir_name(mode);
        reports.push_back(run_benchmark(tasks, providers, registry, cfg, e));
    }
    return reports;
}

SessionResult replay_trace(const TraceRecord& trace, const Registry& registry, ImageStore& store,
                           const AliasTable* aliases) {
    ScriptedTranscript transcript;
    std::vector<RecordedOutput> recorded;
    for (const auto& t : trace.turns) {
        transcript.entries.push_back({std::nullopt, t.raw});
        if (t.executed && !t.backend.empty() && t.backend != "local") {
            if (t.observation_kind == "observation") {
                recorded.push_back({ToolOutput{t.observation_text, t.observation_images}, {}});
            } else {
                recorded.push_back({std::nullopt, t.error_message});
            }
        }
    }
    ToolExecutor executor;
    executor.set_recorded_outputs(std::move(recorded));
    ScriptedProvider provider(std::move(transcript), ProviderInfo{trace.provider, trace.max_context_tokens});

    TaskInstance task;
    task.id = trace.task_id;
    task.instruction = trace.instruction;
    task.images = trace.images;
    const RunConfig config = RunConfig::from_json(trace.config);

    SessionEnv env{&store, &executor, aliases, nullptr, {}};
    SessionResult result = run_session(task, provider, registry, config, env);

    const auto& got = result.trace.turns;
    const std::size_t common = std::min(got.size(), trace.turns.size());
    for (std::size_t i = 0; i < common; ++i) {
        if (got[i].observation_digest != trace.turns[i].observation_digest) {
            throw ReplayDivergence(static_cast<int>(i) + 1, "observation_digest",
                                   "recorded " + trace.turns[i].observation_digest + ", replayed " +
                                       got[i].observation_digest);
        }
    }
    const int last = static_cast<int>(common);
    if (got.size() != trace.turns.size()) {
        throw ReplayDivergence(last + 1, "turns",
                               "recorded " + std::to_string(trace.turns.size()) + " turns, replayed " +
                                   std::to_string(got.size()));
    }
    if (result.answer != trace.answer) {
        throw ReplayDivergence(last, "answer",
                               "recorded '" + trace.answer.value_or("<none>") + "', replayed '" +
                                   result.answer.value_or("<none>") + "'");
    }
    if (result.termination != trace.termination) {
        throw ReplayDivergence(last, "termination",
                               std::string("recorded ") + std::string(to_string(trace.termination)) + ", replayed " +
                                   std::string(to_string(result.termination)));
    }
    return result;
}

}  // namespace caporch
