#pragma once

// Random instance generators and brute-force reference implementations used
// by the unit tests and the acceptance runner. The oracles deliberately use
// the most direct formulation (pairwise comparison, explicit loops over
// dialects) and share no code with the library.

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "dialect_audit/corpus.hpp"
#include "dialect_audit/metrics.hpp"

namespace oracles {

inline const std::vector<std::string>& country_pool() {
  static const std::vector<std::string> pool = {"Algeria", "Egypt", "Iraq", "Jordan", "Lebanon",
                                                "Libya", "Morocco", "Oman", "Palestine", "Qatar"};
  return pool;
}

/// A dataset with (sentence, label) unique, as ingestion would produce.
/// Sentences come from a small pool so many are shared across labels.
inline dialect_audit::corpus::LabeledDataset random_dataset(std::mt19937_64& rng, std::size_t max_samples,
                                                            std::size_t max_labels) {
  using namespace dialect_audit::corpus;
  std::uniform_int_distribution<std::size_t> label_count(1, max_labels);
  std::uniform_int_distribution<std::size_t> sample_count(1, max_samples);
  const std::size_t n_labels = label_count(rng);
  const std::size_t target = sample_count(rng);
  const std::size_t pool = std::max<std::size_t>(1, target / (1 + rng() % 4));
  std::uniform_int_distribution<std::size_t> pick_sentence(0, pool - 1);
  std::uniform_int_distribution<std::size_t> pick_label(0, n_labels - 1);

  LabeledDataset ds;
  std::set<std::pair<std::size_t, std::size_t>> used;
  for (std::size_t attempt = 0; ds.samples.size() < target && attempt < target * 20; ++attempt) {
    const std::size_t s = pick_sentence(rng);
    const std::size_t l = pick_label(rng);
    if (!used.emplace(s, l).second) continue;
    const std::string& label = country_pool()[l];
    LabeledSample sample;
    sample.id = "r" + std::to_string(ds.samples.size());
    sample.sentence = "جملة " + std::to_string(s);
    sample.raw = sample.sentence;
    sample.label = {label, LabelLevel::country};
    ds.label_inventory.insert(label);
    ds.samples.push_back(std::move(sample));
  }
  return ds;
}

/// Pairwise O(m^2): the label set of every sample's sentence.
inline std::vector<std::set<std::string>> brute_label_sets(const dialect_audit::corpus::LabeledDataset& ds) {
  std::vector<std::set<std::string>> sets(ds.samples.size());
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    for (std::size_t j = 0; j < ds.samples.size(); ++j) {
      if (ds.samples[i].sentence == ds.samples[j].sentence) sets[i].insert(ds.samples[j].label.code);
    }
  }
  return sets;
}

/// Sentence -> (label set, sample count), by pairwise comparison.
inline std::map<std::string, std::pair<std::set<std::string>, std::size_t>> brute_groups(
    const dialect_audit::corpus::LabeledDataset& ds) {
  const auto sets = brute_label_sets(ds);
  std::map<std::string, std::pair<std::set<std::string>, std::size_t>> out;
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    std::size_t count = 0;
    for (std::size_t j = 0; j < ds.samples.size(); ++j) {
      count += ds.samples[i].sentence == ds.samples[j].sentence;
    }
    out[ds.samples[i].sentence] = {sets[i], count};
  }
  return out;
}

/// Sample-weighted Perc_n recount, n = 1..n_dialects.
inline std::vector<double> brute_perc(const dialect_audit::corpus::LabeledDataset& ds, std::size_t n_dialects) {
  const auto sets = brute_label_sets(ds);
  std::vector<double> perc(n_dialects, 0.0);
  for (std::size_t n = 1; n <= n_dialects; ++n) {
    std::size_t hits = 0;
    for (const auto& s : sets) hits += s.size() == n;
    perc[n - 1] = 100.0 * static_cast<double>(hits) / static_cast<double>(ds.samples.size());
  }
  return perc;
}

struct BinaryEval {
  double precision = 0, recall = 0, f1 = 0, accuracy = 0;
};

/// Per-dialect membership evaluation written out longhand.
inline std::vector<BinaryEval> brute_multilabel(const std::vector<std::set<std::string>>& gold,
                                                const std::vector<std::set<std::string>>& pred,
                                                const std::vector<std::string>& inventory) {
  std::vector<BinaryEval> out;
  for (const auto& d : inventory) {
    double tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      const bool g = gold[i].count(d) > 0;
      const bool p = pred[i].count(d) > 0;
      if (g && p) tp += 1;
      if (!g && p) fp += 1;
      if (g && !p) fn += 1;
      if (!g && !p) tn += 1;
    }
    BinaryEval e;
    e.precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    e.recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    e.f1 = e.precision + e.recall > 0 ? 2 * e.precision * e.recall / (e.precision + e.recall) : 0.0;
    e.accuracy = (tp + tn) / static_cast<double>(gold.size());
    out.push_back(e);
  }
  return out;
}

/// Random distribution over N buckets summing to 100, with mass in bucket
/// `from` so some of it can be moved to `from + 1`.
inline std::vector<double> random_distribution(std::mt19937_64& rng, std::size_t n_dialects, std::size_t from) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> w(n_dialects);
  double sum = 0;
  for (auto& x : w) sum += (x = u(rng));
  w[from - 1] += 0.5;
  sum += 0.5;
  for (auto& x : w) x = 100.0 * x / sum;
  // Re-balance rounding so the total is exactly representable as 100.
  double total = 0;
  for (std::size_t i = 1; i < w.size(); ++i) total += w[i];
  w[0] = 100.0 - total;
  return w;
}

}  // namespace oracles
