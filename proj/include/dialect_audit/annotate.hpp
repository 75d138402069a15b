#pragma once

#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dialect_audit/corpus.hpp"
#include "dialect_audit/judgments.hpp"

namespace dialect_audit::annotate {

using Clock = std::function<std::chrono::system_clock::time_point()>;
using TimePoint = std::chrono::system_clock::time_point;

enum class TaskStatus { pending, assigned, done };

std::string_view to_string(TaskStatus status);

/// A false positive awaiting a native speaker's judgment. The original
/// label stays server-side; annotators only ever see a TaskView.
struct AnnotationTask {
  std::string sample_id;
  std::string sentence;  // raw text as it appeared in the dataset
  std::string predicted_dialect;
  std::string original_label;

  friend bool operator==(const AnnotationTask&, const AnnotationTask&) = default;
};

/// What an annotator is shown for one task.
struct TaskView {
  std::string sample_id;
  std::string sentence;
  std::string dialect;
  std::string lease_expires;  // ISO-8601 UTC
};

struct AnnotatorProfile {
  std::string annotator_id;
  std::string token;
  std::string native_dialect;
};

/// One task per sample whose prediction differs from its gold label.
std::vector<AnnotationTask> import_fps(const corpus::LabeledDataset& gold,
                                       std::span<const std::string> predicted);

/// `id<TAB>sentence<TAB>predicted<TAB>label`.
void write_tasks(std::ostream& out, std::span<const AnnotationTask> tasks);
std::vector<AnnotationTask> read_tasks(const std::filesystem::path& path);

/// `annotator_id<TAB>token<TAB>dialect`.
std::vector<AnnotatorProfile> read_annotators(const std::filesystem::path& path);

/// Instruction page then three worked examples, all markdown. Annotators
/// acknowledge them in this order before any task is served.
struct InstructionPages {
  std::string instructions;
  std::array<std::string, 3> examples;

  static InstructionPages defaults();
  /// Reads instructions.md and example-1.md .. example-3.md from `dir`.
  static InstructionPages load(const std::filesystem::path& dir);
};

inline constexpr std::array<std::string_view, 4> kInstructionPageIds = {
    "instructions", "example-1", "example-2", "example-3"};

std::string format_timestamp(TimePoint t, bool millis = false);
TimePoint parse_timestamp(std::string_view text);

struct DialectProgress {
  std::size_t pending = 0;
  std::size_t assigned = 0;
  std::size_t done = 0;

  std::size_t total() const noexcept { return pending + assigned + done; }
  friend bool operator==(const DialectProgress&, const DialectProgress&) = default;
};

using Progress = std::map<std::string, DialectProgress>;

/// Full persisted state, used to compare a live service with a replay.
struct StoreState {
  struct TaskState {
    std::string sample_id;
    std::string assignee;
    std::optional<TimePoint> lease_expires;
    bool done = false;

    friend bool operator==(const TaskState&, const TaskState&) = default;
  };

  std::vector<TaskState> tasks;
  std::map<std::string, std::set<std::string>> acknowledged;  // annotator -> page ids
  std::vector<JudgmentRecord> judgments;

  friend bool operator==(const StoreState&, const StoreState&) = default;
};

struct ServiceOptions {
  std::chrono::milliseconds lease = std::chrono::minutes(15);
  Clock clock = [] { return std::chrono::system_clock::now(); };
};

/// Serves false positives to annotators one at a time. The store directory
/// holds tasks.tsv (written once) and journal.jsonl, an append-only log of
/// acknowledgements, leases and judgments. Opening a store replays the
/// journal, so a restarted service resumes exactly where it stopped.
///
/// Thread-safe: mutations are serialized and each is journaled before it is
/// applied.
class AnnotationService {
 public:
  /// `tasks` may be empty when the store already has a task snapshot; if
  /// both exist they must agree (Error(consistency) otherwise).
  AnnotationService(std::filesystem::path store_dir, std::vector<AnnotationTask> tasks,
                    std::vector<AnnotatorProfile> annotators, ServiceOptions options = {});
  ~AnnotationService();

  AnnotationService(const AnnotationService&) = delete;
  AnnotationService& operator=(const AnnotationService&) = delete;

  /// Returns the annotator holding `token`, or throws Error(auth).
  const AnnotatorProfile& authenticate(std::string_view token) const;
  const AnnotatorProfile& annotator(std::string_view annotator_id) const;

  /// Records that the annotator viewed `page`; pages must be acknowledged
  /// in order. Returns the pages still outstanding.
  std::vector<std::string> acknowledge(std::string_view annotator_id, std::string_view page);
  bool passed_instructions(std::string_view annotator_id) const;

  /// Leases the next pending task in the annotator's native dialect. An
  /// annotator who already holds a live lease gets the same task back.
  /// Throws Error(gating) before the instructions are acknowledged.
  std::optional<TaskView> next_task(std::string_view annotator_id);

  /// Throws Error(conflict) for a repeat or for a task leased to someone
  /// else, Error(lease_expired) when the annotator's lease ran out.
  JudgmentRecord submit_judgment(std::string_view annotator_id, std::string_view sample_id,
                                 Verdict verdict);

  Progress progress() const;
  std::size_t done_by(std::string_view annotator_id) const;
  JudgmentSet judgments() const;
  void export_judgments(std::ostream& out) const;
  StoreState state() const;

  const std::vector<AnnotationTask>& tasks() const noexcept { return tasks_; }

  /// Rebuilds the state from the store files alone, without opening the
  /// journal for writing.
  static StoreState replay(const std::filesystem::path& store_dir);
  static JudgmentSet replay_judgments(const std::filesystem::path& store_dir);

 private:
  struct Live;
  struct FileCloser {
    void operator()(std::FILE* f) const noexcept;
  };

  void append(const std::string& line);
  TimePoint now() const { return options_.clock(); }

  std::filesystem::path store_dir_;
  std::vector<AnnotationTask> tasks_;
  std::vector<AnnotatorProfile> annotators_;
  ServiceOptions options_;
  std::unique_ptr<Live> live_;
  std::unique_ptr<std::FILE, FileCloser> journal_;
  mutable std::shared_mutex mutex_;
};

}  // namespace dialect_audit::annotate
