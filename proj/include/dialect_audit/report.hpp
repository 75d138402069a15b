#pragma once

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dialect_audit/audit.hpp"
#include "dialect_audit/metrics.hpp"

namespace dialect_audit::report {

using Json = nlohmann::ordered_json;

/// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// Embedded in every report so a run can be repeated exactly. Holds no
/// timestamps: identical inputs give identical bytes.
struct RunManifest {
  explicit RunManifest(std::string name) : subcommand(std::move(name)) {}

  std::string subcommand;
  std::vector<std::pair<std::string, Json>> config;
  std::vector<std::pair<std::string, std::string>> inputs;  // path, sha256
  std::string version = DIALECT_AUDIT_VERSION;
  std::optional<std::uint64_t> seed;

  void add_input(const std::filesystem::path& path);
  Json to_json() const;
};

Json group_json(const audit::ValidityGroup& group);
Json audit_json(const audit::AuditReport& report, const corpus::DatasetCounters& counters,
                std::size_t group_count, const RunManifest& manifest);

Json class_metrics_json(const metrics::ClassMetrics& m);

/// eval.json: confusion matrix, per-label counts and metrics, averages, and
/// the per-sample outcomes that `correct` needs.
Json eval_json(const metrics::ConfusionMatrix& cm, const metrics::ClassificationReport& report,
               const metrics::Outcomes& outcomes, const RunManifest& manifest);

/// What `correct` reads back from eval.json.
struct EvalInput {
  std::vector<std::string> labels;
  std::vector<metrics::EvalCounts> counts;
  metrics::Outcomes outcomes{{}};
};

/// Throws Error(format) on a malformed file and Error(consistency) when the
/// stored counts disagree with the stored outcomes.
EvalInput read_eval(const std::filesystem::path& path);

/// The bound from validated data alone: every TP of a dialect with
/// judgments counts once, every judged FP counts once, and an FP judged
/// valid is a sample valid in two dialects.
struct ValidatedBound {
  std::size_t samples;
  std::size_t multi_valid;
  audit::PercDistribution distribution;
  double expected_max_accuracy;
};

ValidatedBound validated_bound(const EvalInput& eval, const annotate::JudgmentSet& judgments);

/// corrected.json: corrected report, FP breakdown, multi-label report over
/// the derived gold sets, and the validated-subset bound.
Json corrected_json(const EvalInput& eval, const annotate::JudgmentSet& judgments,
                    const RunManifest& manifest);

/// `gold\pred,<labels...>` header then one row per gold label.
std::string confusion_csv(const metrics::ConfusionMatrix& cm);

}  // namespace dialect_audit::report
