#include "dialect_audit/annotate.hpp"

#include <unistd.h>

#include <algorithm>
#include <ctime>
#include <fstream>
#include <json.hpp>
#include <mutex>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "dialect_audit/error.hpp"
#include "dialect_audit/tsv.hpp"

namespace dialect_audit::annotate {
namespace {

using ordered_json = nlohmann::ordered_json;

constexpr const char* kTasksFile = "tasks.tsv";
constexpr const char* kJournalFile = "journal.jsonl";

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Task/ack/judgment state shared by the live service and offline replay.
struct Ledger {
  std::vector<StoreState::TaskState> tasks;
  std::unordered_map<std::string, std::size_t> index;
  std::map<std::string, std::set<std::string>> acknowledged;
  JudgmentSet judgments;

  explicit Ledger(const std::vector<AnnotationTask>& source) {
    tasks.reserve(source.size());
    for (const auto& task : source) {
      if (!index.emplace(task.sample_id, tasks.size()).second) {
        throw Error(ErrorKind::format, "duplicate task id '" + task.sample_id + "'");
      }
      tasks.push_back({task.sample_id, {}, std::nullopt, false});
    }
  }

  StoreState::TaskState& task(const std::string& id) {
    const auto it = index.find(id);
    if (it == index.end()) throw Error(ErrorKind::consistency, "journal references unknown task '" + id + "'");
    return tasks[it->second];
  }

  void apply(const nlohmann::json& event) {
    const std::string type = event.at("event").get<std::string>();
    if (type == "ack") {
      acknowledged[event.at("annotator_id").get<std::string>()].insert(event.at("page").get<std::string>());
    } else if (type == "lease") {
      auto& t = task(event.at("sample_id").get<std::string>());
      t.assignee = event.at("annotator_id").get<std::string>();
      t.lease_expires = parse_timestamp(event.at("expires").get<std::string>());
    } else if (type == "judgment") {
      JudgmentRecord record{event.at("sample_id").get<std::string>(),
                            event.at("annotator_id").get<std::string>(),
                            event.at("dialect").get<std::string>(),
                            parse_verdict(event.at("verdict").get<std::string>()),
                            event.at("timestamp").get<std::string>()};
      auto& t = task(record.sample_id);
      t.done = true;
      t.assignee.clear();
      t.lease_expires.reset();
      judgments.add(std::move(record));
    } else {
      throw Error(ErrorKind::format, "unknown journal event '" + type + "'");
    }
  }

  StoreState snapshot() const { return {tasks, acknowledged, judgments.records()}; }
};

// Applies every complete journal line. A final line without a newline is a
// torn write from a crash: it is ignored and its offset returned so the
// caller can cut it off.
std::size_t replay_journal(const std::filesystem::path& path, Ledger& ledger) {
  if (!std::filesystem::exists(path)) return 0;
  const std::string text = read_text(path);
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    const std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) return pos;
    ++line_no;
    const std::string_view line(text.data() + pos, end - pos);
    if (!line.empty()) {
      try {
        ledger.apply(nlohmann::json::parse(line));
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::format, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
      } catch (const Error& e) {
        throw Error(e.kind(), path.string() + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
    pos = end + 1;
  }
  return pos;
}

bool lease_live(const StoreState::TaskState& t, TimePoint now) {
  return !t.done && !t.assignee.empty() && t.lease_expires && *t.lease_expires > now;
}

}  // namespace

struct AnnotationService::Live : Ledger {
  using Ledger::Ledger;
};

void AnnotationService::FileCloser::operator()(std::FILE* f) const noexcept {
  if (f != nullptr) std::fclose(f);
}

std::string_view to_string(TaskStatus status) {
  switch (status) {
    case TaskStatus::pending: return "pending";
    case TaskStatus::assigned: return "assigned";
    case TaskStatus::done: return "done";
  }
  return "pending";
}

std::vector<AnnotationTask> import_fps(const corpus::LabeledDataset& gold,
                                       std::span<const std::string> predicted) {
  if (gold.samples.size() != predicted.size()) {
    throw Error(ErrorKind::alignment, "gold has " + std::to_string(gold.samples.size()) +
                                          " samples but " + std::to_string(predicted.size()) +
                                          " predictions were given");
  }
  std::vector<AnnotationTask> tasks;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const auto& sample = gold.samples[i];
    if (predicted[i] == sample.label.code) continue;
    tasks.push_back({sample.id, sample.raw.empty() ? sample.sentence : sample.raw, predicted[i],
                     sample.label.code});
  }
  return tasks;
}

void write_tasks(std::ostream& out, std::span<const AnnotationTask> tasks) {
  tsv::write_row(out, {"id", "sentence", "predicted", "label"});
  for (const auto& task : tasks) {
    std::vector<std::string> fields{task.sample_id, task.sentence, task.predicted_dialect,
                                    task.original_label};
    for (const auto& f : fields) tsv::check_cell(f, "task '" + task.sample_id + "'");
    tsv::write_row(out, fields);
  }
}

std::vector<AnnotationTask> read_tasks(const std::filesystem::path& path) {
  const tsv::Table table = tsv::read_file(path);
  const std::string name = path.string();
  const std::size_t id = table.require_column("id", name);
  const std::size_t sentence = table.require_column("sentence", name);
  const std::size_t predicted = table.require_column("predicted", name);
  const std::size_t label = table.require_column("label", name);
  std::vector<AnnotationTask> tasks;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row[predicted] == row[label]) {
      throw Error(ErrorKind::validation, name + ":" + std::to_string(table.line_numbers[r]) +
                                             ": task '" + row[id] + "' is not a false positive");
    }
    tasks.push_back({row[id], row[sentence], row[predicted], row[label]});
  }
  return tasks;
}

std::vector<AnnotatorProfile> read_annotators(const std::filesystem::path& path) {
  const tsv::Table table = tsv::read_file(path);
  const std::string name = path.string();
  const std::size_t id = table.require_column("annotator_id", name);
  const std::size_t token = table.require_column("token", name);
  const std::size_t dialect = table.require_column("dialect", name);
  std::vector<AnnotatorProfile> out;
  std::set<std::string> ids;
  std::set<std::string> tokens;
  for (const auto& row : table.rows) {
    if (row[id].empty() || row[token].empty() || row[dialect].empty()) {
      throw Error(ErrorKind::format, name + ": annotator rows need id, token and dialect");
    }
    if (!ids.insert(row[id]).second || !tokens.insert(row[token]).second) {
      throw Error(ErrorKind::format, name + ": duplicate annotator id or token");
    }
    out.push_back({row[id], row[token], row[dialect]});
  }
  return out;
}

InstructionPages InstructionPages::defaults() {
  InstructionPages pages;
  pages.instructions =
      "# Is this sentence valid in your dialect?\n\n"
      "You will see short texts, mostly tweets, one at a time. For each one, decide whether a "
      "native speaker of your dialect could have written it exactly as shown.\n\n"
      "- **Yes**: the text is natural in your dialect.\n"
      "- **No**: someone from your region would not write it this way.\n"
      "- **Maybe / Not sure**: you cannot decide.\n\n"
      "Judge the wording, not the topic. Texts in Modern Standard Arabic can still be valid.\n";
  pages.examples = {
      "## Example 1\n\n> وين المحطة؟\n\n*Where is the station?* Many dialects use this exact "
      "wording. If yours does, answer **Yes**.\n",
      "## Example 2\n\nA text built around a word your dialect never uses should get **No**, "
      "even if you understand it.\n",
      "## Example 3\n\nIf the text is too short or too ambiguous to decide, answer "
      "**Maybe / Not sure**. It will not be counted as valid.\n"};
  return pages;
}

InstructionPages InstructionPages::load(const std::filesystem::path& dir) {
  InstructionPages pages;
  pages.instructions = read_text(dir / "instructions.md");
  for (std::size_t i = 0; i < pages.examples.size(); ++i) {
    pages.examples[i] = read_text(dir / ("example-" + std::to_string(i + 1) + ".md"));
  }
  return pages;
}

std::string format_timestamp(TimePoint t, bool millis) {
  using namespace std::chrono;
  const auto ms = duration_cast<milliseconds>(t.time_since_epoch()).count();
  auto secs = static_cast<std::time_t>(ms / 1000);
  long frac = static_cast<long>(ms % 1000);
  if (frac < 0) {
    frac += 1000;
    --secs;
  }
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[64];
  if (millis) {
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03ldZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, frac);
  } else {
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
  }
  return buf;
}

TimePoint parse_timestamp(std::string_view text) {
  std::tm tm{};
  int millis = 0;
  int consumed = 0;
  const std::string s(text);
  const int fields = std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%n", &tm.tm_year, &tm.tm_mon,
                                 &tm.tm_mday, &tm.tm_hour, &tm.tm_min, &tm.tm_sec, &consumed);
  if (fields != 6) throw Error(ErrorKind::format, "bad timestamp '" + s + "'");
  std::string_view rest = std::string_view(s).substr(static_cast<std::size_t>(consumed));
  if (!rest.empty() && rest.front() == '.') {
    if (rest.size() < 5 || std::sscanf(std::string(rest.substr(1, 3)).c_str(), "%3d", &millis) != 1) {
      throw Error(ErrorKind::format, "bad timestamp '" + s + "'");
    }
    rest.remove_prefix(4);
  }
  if (rest != "Z") throw Error(ErrorKind::format, "timestamp must be UTC ('Z'): '" + s + "'");
  tm.tm_year -= 1900;
  tm.tm_mon -= 1;
  const std::time_t secs = timegm(&tm);
  return TimePoint(std::chrono::seconds(secs)) + std::chrono::milliseconds(millis);
}

AnnotationService::AnnotationService(std::filesystem::path store_dir, std::vector<AnnotationTask> tasks,
                                     std::vector<AnnotatorProfile> annotators, ServiceOptions options)
    : store_dir_(std::move(store_dir)), annotators_(std::move(annotators)), options_(std::move(options)) {
  std::filesystem::create_directories(store_dir_);
  const auto snapshot_path = store_dir_ / kTasksFile;
  if (std::filesystem::exists(snapshot_path)) {
    tasks_ = read_tasks(snapshot_path);
    if (!tasks.empty() && tasks != tasks_) {
      throw Error(ErrorKind::consistency,
                  "task list differs from the snapshot in " + store_dir_.string() +
                      "; use a fresh store directory for a new task set");
    }
  } else {
    tasks_ = std::move(tasks);
    const auto tmp = store_dir_ / (std::string(kTasksFile) + ".tmp");
    {
      std::ofstream out(tmp, std::ios::binary);
      write_tasks(out, tasks_);
      if (!out) throw Error(ErrorKind::io, "cannot write " + tmp.string());
    }
    std::filesystem::rename(tmp, snapshot_path);
  }

  live_ = std::make_unique<Live>(tasks_);
  const auto journal_path = store_dir_ / kJournalFile;
  const std::size_t good = replay_journal(journal_path, *live_);
  if (std::filesystem::exists(journal_path) && std::filesystem::file_size(journal_path) != good) {
    std::filesystem::resize_file(journal_path, good);
  }
  journal_.reset(std::fopen(journal_path.c_str(), "ab"));
  if (!journal_) throw Error(ErrorKind::io, "cannot open " + journal_path.string() + " for append");
}

AnnotationService::~AnnotationService() = default;

void AnnotationService::append(const std::string& line) {
  const std::string data = line + '\n';
  if (std::fwrite(data.data(), 1, data.size(), journal_.get()) != data.size() ||
      std::fflush(journal_.get()) != 0 || ::fsync(::fileno(journal_.get())) != 0) {
    throw Error(ErrorKind::io, "failed to append to the judgment journal");
  }
}

const AnnotatorProfile& AnnotationService::authenticate(std::string_view token) const {
  for (const auto& profile : annotators_) {
    if (!token.empty() && profile.token == token) return profile;
  }
  throw Error(ErrorKind::auth, "unknown or missing annotator token");
}

const AnnotatorProfile& AnnotationService::annotator(std::string_view annotator_id) const {
  for (const auto& profile : annotators_) {
    if (profile.annotator_id == annotator_id) return profile;
  }
  throw Error(ErrorKind::auth, "unknown annotator '" + std::string(annotator_id) + "'");
}

std::vector<std::string> AnnotationService::acknowledge(std::string_view annotator_id,
                                                        std::string_view page) {
  const AnnotatorProfile& who = annotator(annotator_id);
  std::unique_lock lock(mutex_);
  auto& seen = live_->acknowledged[who.annotator_id];
  const auto page_it = std::find(kInstructionPageIds.begin(), kInstructionPageIds.end(), page);
  if (page_it == kInstructionPageIds.end()) {
    throw Error(ErrorKind::validation, "unknown instruction page '" + std::string(page) + "'");
  }
  for (auto it = kInstructionPageIds.begin(); it != page_it; ++it) {
    if (!seen.contains(std::string(*it))) {
      throw Error(ErrorKind::gating, "page '" + std::string(*it) + "' must be viewed before '" +
                                         std::string(page) + "'");
    }
  }
  if (!seen.contains(std::string(page))) {
    ordered_json event;
    event["event"] = "ack";
    event["annotator_id"] = who.annotator_id;
    event["page"] = page;
    event["at"] = format_timestamp(now());
    append(event.dump());
    live_->apply(event);
  }
  std::vector<std::string> remaining;
  for (std::string_view id : kInstructionPageIds) {
    if (!seen.contains(std::string(id))) remaining.emplace_back(id);
  }
  return remaining;
}

bool AnnotationService::passed_instructions(std::string_view annotator_id) const {
  std::shared_lock lock(mutex_);
  const auto it = live_->acknowledged.find(std::string(annotator_id));
  if (it == live_->acknowledged.end()) return false;
  return std::all_of(kInstructionPageIds.begin(), kInstructionPageIds.end(),
                     [&](std::string_view id) { return it->second.contains(std::string(id)); });
}

std::optional<TaskView> AnnotationService::next_task(std::string_view annotator_id) {
  const AnnotatorProfile& who = annotator(annotator_id);
  if (!passed_instructions(who.annotator_id)) {
    throw Error(ErrorKind::gating, "annotator '" + who.annotator_id +
                                       "' must go through the instruction and example pages first");
  }
  std::unique_lock lock(mutex_);
  const TimePoint t = now();
  const auto view = [&](std::size_t i) {
    const auto& state = live_->tasks[i];
    return TaskView{tasks_[i].sample_id, tasks_[i].sentence, tasks_[i].predicted_dialect,
                    format_timestamp(*state.lease_expires, true)};
  };

  for (std::size_t i = 0; i < tasks_.size(); ++i) {
    const auto& state = live_->tasks[i];
    if (state.assignee == who.annotator_id && lease_live(state, t)) return view(i);
  }
  for (std::size_t i = 0; i < tasks_.size(); ++i) {
    const auto& state = live_->tasks[i];
    if (state.done || lease_live(state, t) || tasks_[i].predicted_dialect != who.native_dialect) continue;
    ordered_json event;
    event["event"] = "lease";
    event["sample_id"] = tasks_[i].sample_id;
    event["annotator_id"] = who.annotator_id;
    event["expires"] = format_timestamp(t + options_.lease, true);
    event["at"] = format_timestamp(t);
    append(event.dump());
    live_->apply(event);
    return view(i);
  }
  return std::nullopt;
}

JudgmentRecord AnnotationService::submit_judgment(std::string_view annotator_id,
                                                  std::string_view sample_id, Verdict verdict) {
  const AnnotatorProfile& who = annotator(annotator_id);
  std::unique_lock lock(mutex_);
  const auto it = live_->index.find(std::string(sample_id));
  if (it == live_->index.end()) {
    throw Error(ErrorKind::not_found, "no task '" + std::string(sample_id) + "'");
  }
  const AnnotationTask& task = tasks_[it->second];
  const auto& state = live_->tasks[it->second];
  for (const auto& record : live_->judgments.records()) {
    if (record.sample_id == sample_id && record.annotator_id == who.annotator_id) {
      throw Error(ErrorKind::conflict, "annotator '" + who.annotator_id +
                                           "' already judged sample '" + task.sample_id + "'");
    }
  }
  if (state.done) {
    throw Error(ErrorKind::conflict, "sample '" + task.sample_id + "' was already judged");
  }
  const TimePoint t = now();
  if (state.assignee != who.annotator_id) {
    throw Error(ErrorKind::conflict,
                "sample '" + task.sample_id + "' is not leased to '" + who.annotator_id + "'");
  }
  if (!lease_live(state, t)) {
    throw Error(ErrorKind::lease_expired,
                "lease on sample '" + task.sample_id + "' expired; request the next task again");
  }

  ordered_json event;
  event["event"] = "judgment";
  event["sample_id"] = task.sample_id;
  event["annotator_id"] = who.annotator_id;
  event["dialect"] = task.predicted_dialect;
  event["verdict"] = to_string(verdict);
  event["timestamp"] = format_timestamp(t);
  append(event.dump());
  live_->apply(event);
  return live_->judgments.records().back();
}

Progress AnnotationService::progress() const {
  std::shared_lock lock(mutex_);
  const TimePoint t = now();
  Progress out;
  for (std::size_t i = 0; i < tasks_.size(); ++i) {
    auto& p = out[tasks_[i].predicted_dialect];
    const auto& state = live_->tasks[i];
    if (state.done) ++p.done;
    else if (lease_live(state, t)) ++p.assigned;
    else ++p.pending;
  }
  return out;
}

std::size_t AnnotationService::done_by(std::string_view annotator_id) const {
  std::shared_lock lock(mutex_);
  return static_cast<std::size_t>(
      std::count_if(live_->judgments.records().begin(), live_->judgments.records().end(),
                    [&](const JudgmentRecord& r) { return r.annotator_id == annotator_id; }));
}

JudgmentSet AnnotationService::judgments() const {
  std::shared_lock lock(mutex_);
  return live_->judgments;
}

void AnnotationService::export_judgments(std::ostream& out) const { write_jsonl(out, judgments()); }

StoreState AnnotationService::state() const {
  std::shared_lock lock(mutex_);
  return live_->snapshot();
}

StoreState AnnotationService::replay(const std::filesystem::path& store_dir) {
  Ledger ledger(read_tasks(store_dir / kTasksFile));
  replay_journal(store_dir / kJournalFile, ledger);
  return ledger.snapshot();
}

JudgmentSet AnnotationService::replay_judgments(const std::filesystem::path& store_dir) {
  return JudgmentSet(replay(store_dir).judgments);
}

}  // namespace dialect_audit::annotate
