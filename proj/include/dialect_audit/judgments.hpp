#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dialect_audit::annotate {

/// Annotator's answer to "is this sentence valid in <dialect>?".
enum class Verdict { valid, invalid, unsure };

std::string_view to_string(Verdict verdict);
Verdict parse_verdict(std::string_view text);

struct JudgmentRecord {
  std::string sample_id;
  std::string annotator_id;
  std::string dialect;  // the task's predicted dialect
  Verdict verdict = Verdict::unsure;
  std::string timestamp;  // UTC, ISO-8601

  friend bool operator==(const JudgmentRecord&, const JudgmentRecord&) = default;
};

/// Outcome for one sample after combining every annotator's vote.
struct ResolvedJudgment {
  std::string sample_id;
  std::string dialect;
  bool valid = false;
  std::size_t valid_votes = 0;
  std::size_t total_votes = 0;

  bool disputed() const noexcept { return valid_votes != 0 && valid_votes != total_votes; }
};

/// Judgments in arrival order, at most one per (sample, annotator).
class JudgmentSet {
 public:
  JudgmentSet() = default;
  explicit JudgmentSet(std::vector<JudgmentRecord> records);

  /// Throws Error(conflict) when the annotator already judged the sample.
  void add(JudgmentRecord record);

  const std::vector<JudgmentRecord>& records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }

  /// One entry per sample, ordered by sample id. `unsure` counts as not
  /// valid; a sample is valid only with a strict majority of valid votes.
  /// Throws Error(consistency) if a sample was judged under two dialects.
  std::vector<ResolvedJudgment> resolve() const;

 private:
  std::vector<JudgmentRecord> records_;
  std::map<std::pair<std::string, std::string>, std::size_t> index_;  // (sample, annotator)
};

inline constexpr std::string_view kJudgmentsHeader =
    "# judgments v1: sample_id annotator_id dialect verdict timestamp";

/// One compact JSON object, fields in the fixed order of JudgmentRecord.
std::string to_json_line(const JudgmentRecord& record);
JudgmentRecord parse_json_line(std::string_view line);

/// Header comment line then one record per line.
void write_jsonl(std::ostream& out, const JudgmentSet& judgments);
/// Skips blank lines and lines starting with '#'.
JudgmentSet read_jsonl(std::istream& in, std::string_view source_name);

}  // namespace dialect_audit::annotate
