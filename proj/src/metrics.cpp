#include "dialect_audit/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "dialect_audit/error.hpp"

namespace dialect_audit::metrics {
namespace {

double ratio(std::uint64_t num, std::uint64_t den, bool& zero_division) {
  if (den == 0) {
    zero_division = true;
    return 0.0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

double harmonic(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

ClassMetrics mean_of(const std::vector<ClassMetrics>& items) {
  ClassMetrics out;
  if (items.empty()) return out;
  for (const auto& m : items) {
    out.precision += m.precision;
    out.recall += m.recall;
    out.f1 += m.f1;
    out.zero_division = out.zero_division || m.zero_division;
  }
  const auto n = static_cast<double>(items.size());
  out.precision /= n;
  out.recall /= n;
  out.f1 /= n;
  return out;
}

}  // namespace

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> labels)
    : labels_(std::move(labels)), counts_(labels_.size() * labels_.size(), 0) {
  std::set<std::string> unique(labels_.begin(), labels_.end());
  if (unique.size() != labels_.size()) throw Error(ErrorKind::validation, "duplicate label in confusion matrix");
}

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> labels, std::vector<std::uint64_t> counts)
    : ConfusionMatrix(std::move(labels)) {
  if (counts.size() != counts_.size()) {
    throw Error(ErrorKind::validation, "confusion matrix needs " + std::to_string(counts_.size()) +
                                           " cells, got " + std::to_string(counts.size()));
  }
  counts_ = std::move(counts);
}

std::optional<std::size_t> ConfusionMatrix::index_of(std::string_view label) const {
  const auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - labels_.begin());
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t gold) const {
  std::uint64_t sum = 0;
  for (std::size_t p = 0; p < size(); ++p) sum += at(gold, p);
  return sum;
}

std::uint64_t ConfusionMatrix::col_sum(std::size_t pred) const {
  std::uint64_t sum = 0;
  for (std::size_t g = 0; g < size(); ++g) sum += at(g, pred);
  return sum;
}

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t sum = 0;
  for (auto c : counts_) sum += c;
  return sum;
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t sum = 0;
  for (std::size_t i = 0; i < size(); ++i) sum += at(i, i);
  return sum;
}

ConfusionMatrix confusion(std::span<const std::string> gold, std::span<const std::string> pred,
                          std::vector<std::string> labels) {
  if (gold.size() != pred.size()) {
    throw Error(ErrorKind::alignment, "gold has " + std::to_string(gold.size()) +
                                          " labels but predictions have " + std::to_string(pred.size()));
  }
  ConfusionMatrix cm(std::move(labels));
  std::unordered_map<std::string_view, std::size_t> index;
  for (std::size_t i = 0; i < cm.size(); ++i) index.emplace(cm.labels()[i], i);
  const auto lookup = [&](const std::string& label) {
    const auto it = index.find(label);
    if (it == index.end()) throw Error(ErrorKind::label, "label '" + label + "' is not in the inventory");
    return it->second;
  };
  for (std::size_t i = 0; i < gold.size(); ++i) cm.add(lookup(gold[i]), lookup(pred[i]));
  return cm;
}

ClassMetrics metrics_from_counts(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn) {
  ClassMetrics m;
  m.precision = ratio(tp, tp + fp, m.zero_division);
  m.recall = ratio(tp, tp + fn, m.zero_division);
  m.f1 = harmonic(m.precision, m.recall);
  return m;
}

EvalCounts eval_counts(const ConfusionMatrix& cm, std::size_t label) {
  EvalCounts ec;
  ec.dialect = cm.labels().at(label);
  ec.tp = cm.at(label, label);
  ec.support = cm.row_sum(label);
  ec.fn = ec.support - ec.tp;
  ec.fp = cm.col_sum(label) - ec.tp;
  return ec;
}

ClassificationReport classification_report(const ConfusionMatrix& cm) {
  ClassificationReport report;
  report.total = cm.total();
  if (cm.size() == 0 || report.total == 0) {
    throw Error(ErrorKind::validation, "confusion matrix is empty");
  }
  std::vector<ClassMetrics> per_label;
  ClassMetrics weighted;
  for (std::size_t i = 0; i < cm.size(); ++i) {
    ClassReportRow row{eval_counts(cm, i), {}};
    row.metrics = metrics_from_counts(row.counts.tp, row.counts.fp, row.counts.fn);
    const auto w = static_cast<double>(row.counts.support);
    weighted.precision += w * row.metrics.precision;
    weighted.recall += w * row.metrics.recall;
    weighted.f1 += w * row.metrics.f1;
    weighted.zero_division = weighted.zero_division || (row.metrics.zero_division && w > 0);
    per_label.push_back(row.metrics);
    report.rows.push_back(std::move(row));
  }
  const auto total = static_cast<double>(report.total);
  weighted.precision /= total;
  weighted.recall /= total;
  weighted.f1 /= total;
  report.weighted = weighted;
  report.macro = mean_of(per_label);
  report.accuracy = static_cast<double>(cm.trace()) / total;
  return report;
}

Outcomes::Outcomes(std::vector<SampleOutcome> samples) : samples_(std::move(samples)) {
  index_.reserve(samples_.size());
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!index_.emplace(samples_[i].id, i).second) {
      throw Error(ErrorKind::alignment, "duplicate sample id '" + samples_[i].id + "'");
    }
  }
}

const SampleOutcome* Outcomes::find(std::string_view id) const {
  const auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &samples_[it->second];
}

void check_judgments(const annotate::JudgmentSet& judgments, const Outcomes& outcomes) {
  for (const auto& record : judgments.records()) {
    const SampleOutcome* sample = outcomes.find(record.sample_id);
    if (sample == nullptr) {
      throw Error(ErrorKind::consistency, "judgment references unknown sample '" + record.sample_id + "'");
    }
    if (!sample->is_false_positive_for(record.dialect)) {
      throw Error(ErrorKind::consistency, "sample '" + record.sample_id + "' (gold " + sample->gold +
                                              ", predicted " + sample->predicted +
                                              ") is not a false positive of '" + record.dialect + "'");
    }
  }
}

CorrectedCounts corrected_counts(const EvalCounts& counts, const annotate::JudgmentSet& judgments,
                                 const Outcomes& outcomes) {
  CorrectedCounts out;
  for (const auto& resolved : judgments.resolve()) {
    if (resolved.dialect != counts.dialect) continue;
    const SampleOutcome* sample = outcomes.find(resolved.sample_id);
    if (sample == nullptr || !sample->is_false_positive_for(counts.dialect)) {
      throw Error(ErrorKind::consistency, "judgment for sample '" + resolved.sample_id +
                                              "' does not reference a false positive of '" +
                                              counts.dialect + "'");
    }
    ++out.validated_fp;
    if (resolved.valid) ++out.incorrect_fp;
  }
  if (out.validated_fp > counts.fp) {
    throw Error(ErrorKind::consistency, "'" + counts.dialect + "' has " + std::to_string(out.validated_fp) +
                                            " judged false positives but only " +
                                            std::to_string(counts.fp) + " false positives");
  }
  out.tp_star = counts.tp + out.incorrect_fp;
  out.fp_star = counts.fp - out.incorrect_fp;
  out.unvalidated_fp = counts.fp - out.validated_fp;
  return out;
}

CorrectedReport corrected_report(std::span<const std::pair<EvalCounts, CorrectedCounts>> counts) {
  CorrectedReport report;
  std::vector<ClassMetrics> original;
  std::vector<ClassMetrics> corrected;
  for (const auto& [ec, cc] : counts) {
    CorrectedRow row{ec, cc, metrics_from_counts(ec.tp, ec.fp, ec.fn),
                     metrics_from_counts(cc.tp_star, cc.fp_star, ec.fn), cc.validated_fp > 0};
    if (row.in_macro) {
      report.macro_scope.push_back(ec.dialect);
      original.push_back(row.original);
      corrected.push_back(row.corrected_metrics);
    }
    report.rows.push_back(std::move(row));
  }
  report.macro_original = mean_of(original);
  report.macro_corrected = mean_of(corrected);
  return report;
}

double FpBreakdown::incorrect_share() const noexcept {
  if (overall.total() == 0) return 0.0;
  return 100.0 * static_cast<double>(overall.incorrect_fp) / static_cast<double>(overall.total());
}

FpBreakdown fp_breakdown(const annotate::JudgmentSet& judgments, const Outcomes& outcomes) {
  std::map<std::string, DialectFpBreakdown> by_dialect;
  FpBreakdown out;
  for (const auto& resolved : judgments.resolve()) {
    const SampleOutcome* sample = outcomes.find(resolved.sample_id);
    if (sample == nullptr || !sample->is_false_positive_for(resolved.dialect)) {
      throw Error(ErrorKind::consistency, "judgment for sample '" + resolved.sample_id +
                                              "' does not reference a false positive of '" +
                                              resolved.dialect + "'");
    }
    auto& entry = by_dialect[resolved.dialect];
    entry.dialect = resolved.dialect;
    FpTally& sub = entry.by_gold[sample->gold];
    if (resolved.valid) {
      ++entry.totals.incorrect_fp;
      ++sub.incorrect_fp;
      ++out.overall.incorrect_fp;
    } else {
      ++entry.totals.correct_fp;
      ++sub.correct_fp;
      ++out.overall.correct_fp;
    }
  }
  for (auto& [dialect, entry] : by_dialect) out.dialects.push_back(std::move(entry));
  return out;
}

MultilabelReport multilabel_report(std::span<const LabelSet> gold, std::span<const LabelSet> pred,
                                   std::span<const std::string> inventory) {
  if (inventory.empty()) throw Error(ErrorKind::validation, "label inventory is empty");
  if (gold.size() != pred.size()) {
    throw Error(ErrorKind::validation, "gold and predicted label sets differ in length");
  }
  const std::set<std::string> known(inventory.begin(), inventory.end());
  const auto check = [&](const LabelSet& set) {
    for (const auto& label : set) {
      if (!known.contains(label)) throw Error(ErrorKind::label, "label '" + label + "' is not in the inventory");
    }
  };
  for (const auto& s : gold) check(s);
  for (const auto& s : pred) check(s);

  MultilabelReport report;
  std::vector<ClassMetrics> per_dialect;
  for (const auto& dialect : inventory) {
    MultilabelRow row{dialect, {}, {}, 0.0};
    for (std::size_t i = 0; i < gold.size(); ++i) {
      const bool in_gold = gold[i].contains(dialect);
      const bool in_pred = pred[i].contains(dialect);
      if (in_gold && in_pred) ++row.counts.tp;
      else if (in_pred) ++row.counts.fp;
      else if (in_gold) ++row.counts.fn;
      else ++row.counts.tn;
    }
    row.metrics = metrics_from_counts(row.counts.tp, row.counts.fp, row.counts.fn);
    row.accuracy = gold.empty() ? 0.0
                                : static_cast<double>(row.counts.tp + row.counts.tn) /
                                      static_cast<double>(gold.size());
    report.macro_accuracy += row.accuracy;
    per_dialect.push_back(row.metrics);
    report.rows.push_back(std::move(row));
  }
  report.macro = mean_of(per_dialect);
  report.macro_accuracy /= static_cast<double>(inventory.size());
  return report;
}

std::vector<LabelSet> derive_multilabel_gold(const Outcomes& outcomes,
                                             const annotate::JudgmentSet& judgments) {
  std::set<std::string> valid_ids;
  for (const auto& resolved : judgments.resolve()) {
    if (resolved.valid) valid_ids.insert(resolved.sample_id);
  }
  std::vector<LabelSet> sets;
  sets.reserve(outcomes.samples().size());
  for (const auto& sample : outcomes.samples()) {
    LabelSet set{sample.gold};
    if (sample.predicted != sample.gold && valid_ids.contains(sample.id)) set.insert(sample.predicted);
    sets.push_back(std::move(set));
  }
  return sets;
}

double cohen_kappa(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::alignment, "annotations differ in length (" + std::to_string(a.size()) +
                                          " vs " + std::to_string(b.size()) + ")");
  }
  if (a.empty()) throw Error(ErrorKind::validation, "no annotations to compare");
  std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> marginals;
  std::uint64_t agree = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++marginals[a[i]].first;
    ++marginals[b[i]].second;
    if (a[i] == b[i]) ++agree;
  }
  const auto n = static_cast<double>(a.size());
  const double observed = static_cast<double>(agree) / n;
  double chance = 0.0;
  for (const auto& [label, counts] : marginals) {
    chance += (static_cast<double>(counts.first) / n) * (static_cast<double>(counts.second) / n);
  }
  if (std::fabs(1.0 - chance) < 1e-12) {
    if (agree == a.size()) return 1.0;
    throw Error(ErrorKind::validation, "chance agreement is 1 but observed agreement is not");
  }
  return (observed - chance) / (1.0 - chance);
}

}  // namespace dialect_audit::metrics
