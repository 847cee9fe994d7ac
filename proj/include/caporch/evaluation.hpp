// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "caporch/error.hpp"
#include "caporch/orchestrator.hpp"
#include "caporch/task.hpp"

namespace caporch {

enum class EvalErrorKind { SchemaError, MissingImage, DuplicateId, EmptyTaskSet };
std::string_view to_string(EvalErrorKind k);

class EvalError : public KindedError<EvalErrorKind> {
public:
    EvalError(EvalErrorKind kind, const std::string& detail, int line = 0)
        : KindedError(kind, detail), line_(line) {}
    // 1-based line of the task file, 0 when not applicable.
    int line() const { return line_; }

private:
    int line_;
};

// JSON-lines task file; image paths are relative to the file's directory.
// Images are ingested into `store`.
std::vector<TaskInstance> load_tasks(const std::filesystem::path& path, ImageStore& store);
TaskInstance task_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir, ImageStore& store);
// Inverse of task_from_json given the relative image paths.
nlohmann::json task_to_json(const TaskInstance& task, const std::vector<std::string>& image_paths);

struct ScoreDetail {
    bool correct = false;
    bool unparsable = false;  // Numeric mode: prediction is not a number
};

ScoreDetail score_answer_detailed(const std::optional<std::string>& pred, const TaskInstance& task);
bool score_answer(const std::optional<std::string>& pred, const TaskInstance& task);

struct TaskRow {
    std::string id;
    std::string family;
    std::set<Capability> capability_labels;
    bool correct = false;
    bool unparsable = false;
    int turns = 0;
    Termination termination = Termination::TurnLimit;
    std::optional<std::string> answer;
};

struct GroupScore {
    int correct = 0;
    int total = 0;
    double accuracy() const { return total == 0 ? 0.0 : static_cast<double>(correct) / total; }
    bool operator==(const GroupScore&) const = default;
};

struct EvalReport {
    std::string mode;
    std::vector<TaskRow> rows;  // sorted by task id
    std::map<std::string, GroupScore> per_family;
    std::map<Capability, GroupScore> per_capability;
    GroupScore overall;
    int crashed = 0;  // ProviderError or Aborted sessions
    std::string created_at;

    double overall_accuracy() const { return overall.accuracy(); }

    nlohmann::json to_json(bool include_timestamp = true) const;
    static EvalReport from_json(const nlohmann::json& doc);
    // Human-readable summary table.
    std::string to_table() const;
};

// Groups rows per family and per capability label (a task counts once per label).
EvalReport aggregate(std::string mode, std::vector<TaskRow> rows);

// Side-by-side table of several reports (one column per mode).
std::string comparison_table(const std::vector<EvalReport>& reports);

// One fresh provider per task (a scripted adapter holds a per-session cursor).
using ProviderFactory = std::function<std::shared_ptr<ModelProvider>(const TaskInstance&)>;

struct BenchmarkEnv {
    ImageStore* store = nullptr;  // required
    const ToolExecutor* executor = nullptr;
    const AliasTable* aliases = nullptr;
    int parallelism = 1;
    // When set: traces/<id>.json, report.json and report.txt are written here.
    std::optional<std::filesystem::path> out_dir;
    // When set, receives every trace in task order.
    std::vector<TraceRecord>* traces = nullptr;
};

// Runs every task under bounded parallelism and aggregates the results.
// Throws EvalError(EmptyTaskSet).
EvalReport run_benchmark(const std::vector<TaskInstance>& tasks, const ProviderFactory& providers,
                         const Registry& registry, const RunConfig& config, const BenchmarkEnv& env);

enum class AblationSuite { PerCapabilityRemoval, FlatSelection };

// Six single-capability removal reports, or one flat-selection report. With an
// out_dir, each report goes to its own subdirectory named after the mode.
std::vector<EvalReport> run_ablation(const std::vector<TaskInstance>& tasks, const ProviderFactory& providers,
                                     const Registry& registry, const RunConfig& base, AblationSuite suite,
                                     const BenchmarkEnv& env);

// Directory-safe form of a mode label ("drop:Logic" -> "drop-Logic").
std::string mode_dir_name(const RunMode& mode);

class ReplayDivergence : public std::runtime_error {
public:
    ReplayDivergence(int turn, std::string field, const std::string& detail)
        : std::runtime_error("replay diverged at turn " + std::to_string(turn) + " (" + field + "): " + detail),
          turn_(turn),
          field_(std::move(field)) {}
    int turn() const { return turn_; }
    const std::string& field() const { return field_; }

private:
    int turn_;
    std::string field_;
};

// Re-runs a session from the model outputs recorded in `trace`. Non-local tool
// results are served from the trace; local tools are re-executed. Throws
// ReplayDivergence on the first turn whose observation digest differs, or when
// answer or termination differ.
SessionResult replay_trace(const TraceRecord& trace, const Registry& registry, ImageStore& store,
                           const AliasTable* aliases = nullptr);

}  // namespace caporch
