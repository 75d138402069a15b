#include "dialect_audit/audit.hpp"

#include <algorithm>
#include <cmath>
#include <thread>
#include <unordered_map>

#include "dialect_audit/error.hpp"

namespace dialect_audit::audit {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

__extension__ using u128 = unsigned __int128;

// SplitMix64 stream keyed by (seed, trial).
class TrialRng {
 public:
  TrialRng(std::uint64_t seed, std::uint64_t trial) noexcept
      : state_(mix64(seed + kGolden) ^ mix64(trial * kGolden + 0x632BE59BD9B4E019ULL)) {}

  std::uint64_t next() noexcept {
    state_ += kGolden;
    return mix64(state_);
  }

  // Uniform in [0, bound), Lemire's multiply-and-reject.
  std::uint64_t below(std::uint64_t bound) noexcept {
    u128 product = static_cast<u128>(next()) * bound;
    auto low = static_cast<std::uint64_t>(product);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        product = static_cast<u128>(next()) * bound;
        low = static_cast<std::uint64_t>(product);
      }
    }
    return static_cast<std::uint64_t>(product >> 64);
  }

 private:
  std::uint64_t state_;
};

}  // namespace

std::vector<ValidityGroup> group_validity(const corpus::LabeledDataset& dataset) {
  std::vector<ValidityGroup> groups;
  std::unordered_map<std::string_view, std::size_t> index;
  index.reserve(dataset.samples.size());
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
    const auto& sample = dataset.samples[i];
    auto [it, inserted] = index.try_emplace(sample.sentence, groups.size());
    if (inserted) groups.push_back({sample.sentence, {}, 0, i});
    ValidityGroup& group = groups[it->second];
    ++group.sample_count;
    auto pos = std::lower_bound(group.labels.begin(), group.labels.end(), sample.label.code);
    if (pos == group.labels.end() || *pos != sample.label.code) group.labels.insert(pos, sample.label.code);
  }
  return groups;
}

std::string_view to_string(Weighting weighting) {
  return weighting == Weighting::samples ? "samples" : "sentences";
}

Weighting parse_weighting(std::string_view text) {
  if (text == "samples") return Weighting::samples;
  if (text == "sentences") return Weighting::sentences;
  throw Error(ErrorKind::validation,
              "unknown weighting '" + std::string(text) + "' (expected samples or sentences)");
}

PercDistribution PercDistribution::from_percentages(std::size_t n_dialects, std::vector<double> perc,
                                                    std::size_t sample_count, Weighting weighting) {
  if (n_dialects == 0) throw Error(ErrorKind::validation, "distribution needs at least one dialect");
  for (std::size_t n = n_dialects; n < perc.size(); ++n) {
    if (perc[n] != 0.0) {
      throw Error(ErrorKind::validation, "Perc_" + std::to_string(n + 1) +
                                             " is non-zero but only " + std::to_string(n_dialects) +
                                             " dialects are considered");
    }
  }
  perc.resize(n_dialects, 0.0);
  double sum = 0.0;
  for (std::size_t n = 0; n < perc.size(); ++n) {
    if (!(perc[n] >= 0.0) || !std::isfinite(perc[n])) {
      throw Error(ErrorKind::validation, "Perc_" + std::to_string(n + 1) + " is negative or not finite");
    }
    sum += perc[n];
  }
  if (std::fabs(sum - 100.0) > 1e-9 * 100.0) {
    throw Error(ErrorKind::validation,
                "distribution sums to " + std::to_string(sum) + "%, expected 100%");
  }
  PercDistribution dist;
  dist.perc_ = std::move(perc);
  dist.sample_count_ = sample_count;
  dist.weighting_ = weighting;
  return dist;
}

double PercDistribution::multi_validity_mass() const noexcept {
  double mass = 0.0;
  for (std::size_t n = 1; n < perc_.size(); ++n) mass += perc_[n];
  return mass;
}

PercDistribution perc_distribution(const std::vector<ValidityGroup>& groups,
                                   const corpus::LabeledDataset& dataset, Weighting weighting) {
  if (dataset.samples.empty()) throw Error(ErrorKind::validation, "dataset has no samples");
  const std::size_t n_dialects = std::max<std::size_t>(dataset.label_inventory.size(), 1);
  std::vector<std::size_t> counts(n_dialects, 0);
  std::size_t total = 0;
  for (const auto& group : groups) {
    const std::size_t n = group.multiplicity();
    if (n == 0 || n > n_dialects) {
      throw Error(ErrorKind::validation, "group multiplicity " + std::to_string(n) +
                                             " is outside [1, " + std::to_string(n_dialects) + "]");
    }
    const std::size_t weight = weighting == Weighting::samples ? group.sample_count : 1;
    counts[n - 1] += weight;
    total += weight;
  }
  std::vector<double> perc(n_dialects);
  for (std::size_t n = 0; n < n_dialects; ++n) {
    perc[n] = 100.0 * static_cast<double>(counts[n]) / static_cast<double>(total);
  }
  return PercDistribution::from_percentages(n_dialects, std::move(perc), dataset.samples.size(), weighting);
}

PercDistribution perc_from_label_sets(const std::vector<std::set<std::string>>& sets,
                                      std::size_t n_dialects) {
  if (sets.empty()) throw Error(ErrorKind::validation, "no samples");
  std::vector<std::size_t> counts(n_dialects, 0);
  for (const auto& set : sets) {
    if (set.empty() || set.size() > n_dialects) {
      throw Error(ErrorKind::validation, "label set size " + std::to_string(set.size()) +
                                             " is outside [1, " + std::to_string(n_dialects) + "]");
    }
    ++counts[set.size() - 1];
  }
  std::vector<double> perc(n_dialects);
  for (std::size_t n = 0; n < n_dialects; ++n) {
    perc[n] = 100.0 * static_cast<double>(counts[n]) / static_cast<double>(sets.size());
  }
  return PercDistribution::from_percentages(n_dialects, std::move(perc), sets.size());
}

double expected_max_accuracy(const PercDistribution& dist) {
  // A moved-from distribution is empty.
  if (dist.n_dialects() == 0) throw Error(ErrorKind::validation, "empty distribution");
  double accuracy = dist.at(1);
  for (std::size_t n = 2; n <= dist.n_dialects(); ++n) {
    accuracy += dist.at(n) / static_cast<double>(n);
  }
  return accuracy;
}

double simulate_oracle(const corpus::LabeledDataset& dataset, const std::vector<ValidityGroup>& groups,
                       std::uint64_t trials, std::uint64_t seed, unsigned threads) {
  if (trials == 0) throw Error(ErrorKind::validation, "trials must be at least 1");
  if (dataset.samples.empty()) throw Error(ErrorKind::validation, "dataset has no samples");

  // For each sample: the validity set it draws from and its own label's slot in it.
  struct Slot {
    const std::vector<std::string>* labels;
    std::size_t gold;
  };
  std::unordered_map<std::string_view, const ValidityGroup*> by_sentence;
  for (const auto& group : groups) by_sentence.emplace(group.sentence, &group);
  std::vector<Slot> slots;
  slots.reserve(dataset.samples.size());
  for (const auto& sample : dataset.samples) {
    const auto it = by_sentence.find(sample.sentence);
    if (it == by_sentence.end()) {
      throw Error(ErrorKind::consistency, "sample '" + sample.id + "' has no validity group");
    }
    const auto& labels = it->second->labels;
    const auto pos = std::find(labels.begin(), labels.end(), sample.label.code);
    if (pos == labels.end()) {
      throw Error(ErrorKind::consistency,
                  "sample '" + sample.id + "' label is missing from its validity group");
    }
    slots.push_back({&labels, static_cast<std::size_t>(pos - labels.begin())});
  }

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, trials));

  const auto run_range = [&](std::uint64_t begin, std::uint64_t end) {
    std::uint64_t correct = 0;
    for (std::uint64_t t = begin; t < end; ++t) {
      TrialRng rng(seed, t);
      const Slot& slot = slots[rng.below(slots.size())];
      correct += rng.below(slot.labels->size()) == slot.gold;
    }
    return correct;
  };

  std::vector<std::uint64_t> partial(threads, 0);
  {
    std::vector<std::jthread> workers;
    const std::uint64_t chunk = trials / threads;
    for (unsigned w = 0; w < threads; ++w) {
      const std::uint64_t begin = w * chunk;
      const std::uint64_t end = w + 1 == threads ? trials : begin + chunk;
      workers.emplace_back([&, w, begin, end] { partial[w] = run_range(begin, end); });
    }
  }
  std::uint64_t correct = 0;
  for (std::uint64_t c : partial) correct += c;
  return 100.0 * static_cast<double>(correct) / static_cast<double>(trials);
}

AuditReport run_audit(const corpus::LabeledDataset& dataset, Weighting weighting, std::size_t top_k) {
  const std::vector<ValidityGroup> groups = group_validity(dataset);
  AuditReport report{perc_distribution(groups, dataset, weighting), 0.0, 0.0, {}, {}};
  report.multi_validity_mass = report.distribution.multi_validity_mass();
  report.expected_max_accuracy = expected_max_accuracy(report.distribution);
  if (report.distribution.n_dialects() == 1) {
    report.warnings.emplace_back(
        "dataset has a single label; the expected maximal accuracy is trivially 100%");
  }

  std::vector<const ValidityGroup*> order;
  order.reserve(groups.size());
  for (const auto& group : groups) order.push_back(&group);
  const std::size_t keep = std::min(top_k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                    [](const ValidityGroup* a, const ValidityGroup* b) {
                      if (a->multiplicity() != b->multiplicity()) return a->multiplicity() > b->multiplicity();
                      return a->first_sample < b->first_sample;
                    });
  for (std::size_t i = 0; i < keep; ++i) report.group_examples.push_back(*order[i]);
  return report;
}

}  // namespace dialect_audit::audit
