#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "dialect_audit/corpus.hpp"

namespace dialect_audit::audit {

/// One normalized sentence and every distinct label it carries in a dataset.
struct ValidityGroup {
  std::string sentence;
  std::vector<std::string> labels;  // sorted, distinct
  std::size_t sample_count = 0;
  std::size_t first_sample = 0;     // index of the first sample with this sentence

  std::size_t multiplicity() const noexcept { return labels.size(); }

  friend bool operator==(const ValidityGroup&, const ValidityGroup&) = default;
};

/// Groups by exact sentence equality, in order of first appearance.
std::vector<ValidityGroup> group_validity(const corpus::LabeledDataset& dataset);

enum class Weighting { samples, sentences };

std::string_view to_string(Weighting weighting);
Weighting parse_weighting(std::string_view text);

/// Perc_1 .. Perc_N as percentages. perc()[n - 1] is Perc_n.
class PercDistribution {
 public:
  /// Throws Error(validation) on negative entries, mass beyond N, or a sum
  /// that is not 100 within 1e-9 relative tolerance.
  static PercDistribution from_percentages(std::size_t n_dialects, std::vector<double> perc,
                                           std::size_t sample_count = 0,
                                           Weighting weighting = Weighting::samples);

  std::size_t n_dialects() const noexcept { return perc_.size(); }
  const std::vector<double>& perc() const noexcept { return perc_; }
  double at(std::size_t n) const { return n >= 1 && n <= perc_.size() ? perc_[n - 1] : 0.0; }
  std::size_t sample_count() const noexcept { return sample_count_; }
  Weighting weighting() const noexcept { return weighting_; }

  /// Sum of Perc_n for n >= 2.
  double multi_validity_mass() const noexcept;

 private:
  PercDistribution() = default;
  std::vector<double> perc_;
  std::size_t sample_count_ = 0;
  Weighting weighting_ = Weighting::samples;
};

/// N is the dataset's label-inventory size. Sample weighting counts every
/// sample whose sentence falls in a group of multiplicity n; sentence
/// weighting counts each group once.
PercDistribution perc_distribution(const std::vector<ValidityGroup>& groups,
                                   const corpus::LabeledDataset& dataset,
                                   Weighting weighting = Weighting::samples);

/// Distribution over samples given each sample's known set of valid labels.
PercDistribution perc_from_label_sets(const std::vector<std::set<std::string>>& sets,
                                      std::size_t n_dialects);

/// Perc_1 + sum over n >= 2 of Perc_n / n.
double expected_max_accuracy(const PercDistribution& dist);

/// Monte-Carlo check of expected_max_accuracy. Each trial draws one sample
/// uniformly, lets an oracle that knows the sentence's full validity set
/// pick one of those labels uniformly, and scores the pick against the
/// sample's single label. Returns percent correct. Trial i uses a generator
/// derived from (seed, i) only, so the result does not depend on `threads`.
double simulate_oracle(const corpus::LabeledDataset& dataset, const std::vector<ValidityGroup>& groups,
                       std::uint64_t trials, std::uint64_t seed, unsigned threads = 0);

struct AuditReport {
  PercDistribution distribution;
  double multi_validity_mass = 0.0;
  double expected_max_accuracy = 0.0;
  std::vector<ValidityGroup> group_examples;
  std::vector<std::string> warnings;
};

AuditReport run_audit(const corpus::LabeledDataset& dataset, Weighting weighting, std::size_t top_k);

}  // namespace dialect_audit::audit
