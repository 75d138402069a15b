#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dialect_audit/judgments.hpp"

namespace dialect_audit::metrics {

/// Rows are gold labels, columns are predictions.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::vector<std::string> labels);
  ConfusionMatrix(std::vector<std::string> labels, std::vector<std::uint64_t> counts);

  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::size_t size() const noexcept { return labels_.size(); }
  std::optional<std::size_t> index_of(std::string_view label) const;

  std::uint64_t at(std::size_t gold, std::size_t pred) const { return counts_[gold * size() + pred]; }
  void add(std::size_t gold, std::size_t pred, std::uint64_t n = 1) { counts_[gold * size() + pred] += n; }

  std::uint64_t row_sum(std::size_t gold) const;
  std::uint64_t col_sum(std::size_t pred) const;
  std::uint64_t total() const;
  std::uint64_t trace() const;

  const std::vector<std::uint64_t>& counts() const noexcept { return counts_; }

 private:
  std::vector<std::string> labels_;
  std::vector<std::uint64_t> counts_;
};

/// Throws Error(alignment) on a length mismatch and Error(label) for a
/// label outside `labels`.
ConfusionMatrix confusion(std::span<const std::string> gold, std::span<const std::string> pred,
                          std::vector<std::string> labels);

/// A ratio with a zero denominator is reported as 0 and flagged.
struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool zero_division = false;
};

ClassMetrics metrics_from_counts(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn);

struct EvalCounts {
  std::string dialect;
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t support = 0;  // tp + fn
};

EvalCounts eval_counts(const ConfusionMatrix& cm, std::size_t label);

struct ClassReportRow {
  EvalCounts counts;
  ClassMetrics metrics;
};

struct ClassificationReport {
  std::vector<ClassReportRow> rows;
  ClassMetrics macro;
  ClassMetrics weighted;  // support-weighted
  double accuracy = 0.0;
  std::uint64_t total = 0;
};

/// Throws Error(validation) for an empty matrix.
ClassificationReport classification_report(const ConfusionMatrix& cm);

struct SampleOutcome {
  std::string id;
  std::string gold;
  std::string predicted;

  bool is_false_positive_for(std::string_view dialect) const {
    return predicted == dialect && gold != dialect;
  }
};

/// Per-sample gold/prediction pairs, addressable by id.
class Outcomes {
 public:
  explicit Outcomes(std::vector<SampleOutcome> samples);

  const std::vector<SampleOutcome>& samples() const noexcept { return samples_; }
  const SampleOutcome* find(std::string_view id) const;

 private:
  std::vector<SampleOutcome> samples_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Every judgment must name an existing sample that is a false positive of
/// the judgment's dialect; otherwise Error(consistency).
void check_judgments(const annotate::JudgmentSet& judgments, const Outcomes& outcomes);

struct CorrectedCounts {
  std::uint64_t tp_star = 0;
  std::uint64_t fp_star = 0;
  std::uint64_t incorrect_fp = 0;    // FPs judged valid in the predicted dialect
  std::uint64_t validated_fp = 0;
  std::uint64_t unvalidated_fp = 0;  // never judged; kept in fp_star
};

/// Moves FPs that annotators judged valid into TP. Only judgments whose
/// dialect is counts.dialect are used.
CorrectedCounts corrected_counts(const EvalCounts& counts, const annotate::JudgmentSet& judgments,
                                 const Outcomes& outcomes);

struct CorrectedRow {
  EvalCounts counts;
  CorrectedCounts corrected;
  ClassMetrics original;
  ClassMetrics corrected_metrics;
  bool in_macro = false;  // has at least one validated FP
};

struct CorrectedReport {
  std::vector<CorrectedRow> rows;
  std::vector<std::string> macro_scope;
  ClassMetrics macro_original;
  ClassMetrics macro_corrected;
};

/// P* = TP*/(TP*+FP*), R* = TP*/(TP*+FN). Macro averages (of unrounded
/// per-dialect values) cover only dialects with validated judgments.
CorrectedReport corrected_report(std::span<const std::pair<EvalCounts, CorrectedCounts>> counts);

struct FpTally {
  std::uint64_t correct_fp = 0;    // prediction judged invalid: a real error
  std::uint64_t incorrect_fp = 0;  // prediction judged valid: not a real error

  std::uint64_t total() const noexcept { return correct_fp + incorrect_fp; }
};

struct DialectFpBreakdown {
  std::string dialect;
  FpTally totals;
  std::map<std::string, FpTally> by_gold;
};

struct FpBreakdown {
  std::vector<DialectFpBreakdown> dialects;  // sorted by dialect
  FpTally overall;

  /// Percentage of validated FPs that were judged valid; 0 when empty.
  double incorrect_share() const noexcept;
};

FpBreakdown fp_breakdown(const annotate::JudgmentSet& judgments, const Outcomes& outcomes);

struct BinaryCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;
};

struct MultilabelRow {
  std::string dialect;
  BinaryCounts counts;
  ClassMetrics metrics;
  double accuracy = 0.0;
};

struct MultilabelReport {
  std::vector<MultilabelRow> rows;
  ClassMetrics macro;
  double macro_accuracy = 0.0;
};

using LabelSet = std::set<std::string>;

/// One binary problem per inventory dialect: is d in the gold set, is d in
/// the predicted set. Throws Error(validation) for an empty inventory or
/// mismatched lengths, Error(label) for a label outside the inventory.
MultilabelReport multilabel_report(std::span<const LabelSet> gold, std::span<const LabelSet> pred,
                                   std::span<const std::string> inventory);

/// {gold} plus the prediction when annotators judged that FP valid. The
/// result is a lower bound on each sample's true label set.
std::vector<LabelSet> derive_multilabel_gold(const Outcomes& outcomes,
                                             const annotate::JudgmentSet& judgments);

/// Cohen's kappa over two aligned annotations. When chance agreement is 1
/// (both annotators used one identical label) the result is 1.
double cohen_kappa(std::span<const std::string> a, std::span<const std::string> b);

}  // namespace dialect_audit::metrics
