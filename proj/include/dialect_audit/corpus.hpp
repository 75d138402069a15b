#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dialect_audit/textnorm.hpp"

namespace dialect_audit::corpus {

enum class LabelLevel { city, country, region, msa };

std::string_view to_string(LabelLevel level);
LabelLevel parse_level(std::string_view text);

struct DialectLabel {
  std::string code;
  LabelLevel level = LabelLevel::country;

  friend bool operator==(const DialectLabel&, const DialectLabel&) = default;
  friend auto operator<=>(const DialectLabel&, const DialectLabel&) = default;
};

inline const std::string kMsa = "MSA";

/// The set of labels a dataset may carry. City labels never live here; they
/// are resolved through a CityCountryMap.
class LabelInventory {
 public:
  /// The 18 country-level dialects of the NADI 2023 / QADI label set, the
  /// five regional groups, and MSA.
  static LabelInventory defaults();
  /// TSV with columns `code`, `level`.
  static LabelInventory load(const std::filesystem::path& path);

  void add(DialectLabel label);
  const DialectLabel* find(std::string_view code) const;
  bool contains(std::string_view code) const { return find(code) != nullptr; }
  const std::vector<DialectLabel>& labels() const noexcept { return labels_; }

 private:
  std::vector<DialectLabel> labels_;
};

/// City (or corpus column code) to country. Loaded from a TSV with columns
/// `city`, `country`; a city listed under two countries is a format error.
class CityCountryMap {
 public:
  static CityCountryMap load(const std::filesystem::path& path);

  void add(const std::string& city, const std::string& country);
  std::optional<std::string> country_of(std::string_view city) const;
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  std::map<std::string, std::string, std::less<>> entries_;
};

enum class CorpusFormat { madar, padic, mpca, generic_tsv };

CorpusFormat parse_format(std::string_view name);

struct ParallelRow {
  std::string row_id;
  // (column label, raw sentence) in column order; one entry per label.
  std::vector<std::pair<std::string, std::string>> translations;
};

struct IngestWarning {
  std::size_t line = 0;
  std::string message;
};

struct ParallelCorpus {
  std::vector<ParallelRow> rows;
  std::vector<IngestWarning> warnings;
  std::size_t cells = 0;  // non-empty translation cells across accepted rows
};

/// Reads a wide TSV whose header names one dialect per column. Source-language
/// and bookkeeping columns known to the format are skipped. For `madar`, a
/// long-format file (`sentID.BTEC`, `lang`, `sent` columns) is pivoted into
/// rows. Rows with fewer than two non-empty cells are dropped with a warning.
ParallelCorpus ingest_parallel(const std::filesystem::path& path, CorpusFormat format);
ParallelCorpus ingest_parallel(std::istream& in, std::string_view source_name, CorpusFormat format);

struct LabeledSample {
  std::string id;
  std::string sentence;  // normalized
  DialectLabel label;
  std::optional<std::string> source_row;
  std::string raw;  // text as read, before normalization
  std::vector<std::string> metadata;  // parallel to LabeledDataset::metadata_columns

  friend bool operator==(const LabeledSample&, const LabeledSample&) = default;
};

struct DatasetCounters {
  std::size_t input_cells = 0;
  std::size_t dropped_empty = 0;
  std::size_t dropped_duplicate = 0;
  std::size_t dropped_msa = 0;

  friend bool operator==(const DatasetCounters&, const DatasetCounters&) = default;
};

/// Immutable once built. Within one dataset (sentence, label) is unique
/// unless it was ingested with collapse_duplicates = false.
struct LabeledDataset {
  std::vector<LabeledSample> samples;
  std::set<std::string> label_inventory;
  std::vector<std::string> metadata_columns;
  DatasetCounters counters;
};

struct TransformOptions {
  bool drop_msa = false;
  textnorm::NormalizeOptions normalize;
};

/// One sample per translation, city labels mapped to countries, one copy of
/// each (sentence, country) pair kept. Throws Error(mapping) listing every
/// column label that is neither an inventory label nor a mapped city.
LabeledDataset parallel_to_di(const std::vector<ParallelRow>& rows, const CityCountryMap& map,
                              const LabelInventory& inventory, const TransformOptions& options = {});

struct IngestOptions {
  bool collapse_duplicates = true;
  // Evaluation inputs keep every row so ids stay aligned with predictions.
  bool keep_empty = false;
  bool drop_msa = false;
  textnorm::NormalizeOptions normalize;
};

/// TSV with `sentence` and `label` columns, optional `id`; any other column
/// is carried as metadata. Throws Error(label) listing unknown labels and
/// Error(validation) when the file has no data rows.
LabeledDataset ingest_labeled(const std::filesystem::path& path, const LabelInventory& inventory,
                              const IngestOptions& options = {});
LabeledDataset ingest_labeled(std::istream& in, std::string_view source_name,
                              const LabelInventory& inventory, const IngestOptions& options = {});

/// `id<TAB>sentence<TAB>label` plus metadata columns, LF endings.
void write_dataset(std::ostream& out, const LabeledDataset& dataset);

/// Predictions aligned to gold.samples order. Throws Error(alignment) for a
/// duplicate, unknown or missing id and Error(label) for a prediction
/// outside the inventory.
std::vector<std::string> load_predictions(const std::filesystem::path& path,
                                          const LabeledDataset& gold,
                                          const LabelInventory& inventory);
std::vector<std::string> load_predictions(std::istream& in, std::string_view source_name,
                                          const LabeledDataset& gold,
                                          const LabelInventory& inventory);

}  // namespace dialect_audit::corpus
