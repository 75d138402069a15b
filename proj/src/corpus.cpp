#include "dialect_audit/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include "dialect_audit/error.hpp"
#include "dialect_audit/tsv.hpp"

namespace dialect_audit::corpus {
namespace {

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

std::string file_stem(std::string_view source_name) {
  return std::filesystem::path(source_name).stem().string();
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  return in;
}

struct FormatProfile {
  std::vector<std::string_view> id_columns;
  std::vector<std::string_view> skip_columns;
};

FormatProfile profile_for(CorpusFormat format) {
  switch (format) {
    case CorpusFormat::madar:
      return {{"sentID.BTEC", "id"}, {"split", "EN", "FR", "English", "French"}};
    case CorpusFormat::padic:
      return {{"id"}, {"EN", "FR", "English", "French"}};
    case CorpusFormat::mpca:
      return {{"id"}, {"EN", "English"}};
    case CorpusFormat::generic_tsv:
      return {{"id"}, {}};
  }
  return {};
}

bool contains(const std::vector<std::string_view>& names, std::string_view name) {
  return std::find(names.begin(), names.end(), name) != names.end();
}

void accept_row(ParallelCorpus& corpus, ParallelRow row, std::size_t line) {
  if (row.translations.size() < 2) {
    corpus.warnings.push_back(
        {line, "row '" + row.row_id + "' has " + std::to_string(row.translations.size()) +
                   " non-empty translation(s); at least 2 are required"});
    return;
  }
  corpus.cells += row.translations.size();
  corpus.rows.push_back(std::move(row));
}

ParallelCorpus pivot_long_format(const tsv::Table& table, std::string_view source_name) {
  const std::size_t id_col = table.require_column("sentID.BTEC", source_name);
  const std::size_t lang_col = table.require_column("lang", source_name);
  const std::size_t sent_col = table.require_column("sent", source_name);

  std::vector<ParallelRow> rows;
  std::vector<std::size_t> first_line;
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& cells = table.rows[r];
    if (cells[sent_col].empty()) continue;
    const std::string& id = cells[id_col];
    if (id.empty()) {
      throw Error(ErrorKind::format, std::string(source_name) + ":" +
                                         std::to_string(table.line_numbers[r]) + ": empty sentence id");
    }
    auto [it, inserted] = index.try_emplace(id, rows.size());
    if (inserted) {
      rows.push_back({id, {}});
      first_line.push_back(table.line_numbers[r]);
    }
    auto& translations = rows[it->second].translations;
    const std::string& lang = cells[lang_col];
    const bool seen = std::any_of(translations.begin(), translations.end(),
                                  [&](const auto& t) { return t.first == lang; });
    if (seen) {
      throw Error(ErrorKind::format, std::string(source_name) + ": sentence '" + id +
                                         "' has two translations for '" + lang + "'");
    }
    translations.emplace_back(lang, cells[sent_col]);
  }

  ParallelCorpus corpus;
  for (std::size_t i = 0; i < rows.size(); ++i) accept_row(corpus, std::move(rows[i]), first_line[i]);
  return corpus;
}

}  // namespace

std::string_view to_string(LabelLevel level) {
  switch (level) {
    case LabelLevel::city: return "city";
    case LabelLevel::country: return "country";
    case LabelLevel::region: return "region";
    case LabelLevel::msa: return "MSA";
  }
  return "country";
}

LabelLevel parse_level(std::string_view text) {
  if (text == "city") return LabelLevel::city;
  if (text == "country") return LabelLevel::country;
  if (text == "region") return LabelLevel::region;
  if (text == "MSA" || text == "msa") return LabelLevel::msa;
  throw Error(ErrorKind::format, "unknown label level '" + std::string(text) + "'");
}

LabelInventory LabelInventory::defaults() {
  LabelInventory inv;
  for (const char* country :
       {"Algeria", "Bahrain", "Egypt", "Iraq", "Jordan", "Kuwait", "Lebanon", "Libya", "Morocco",
        "Oman", "Palestine", "Qatar", "Saudi Arabia", "Sudan", "Syria", "Tunisia", "UAE", "Yemen"}) {
    inv.add({country, LabelLevel::country});
  }
  for (const char* region : {"Gulf", "Gulf of Aden", "Levant", "Maghreb", "Nile Basin"}) {
    inv.add({region, LabelLevel::region});
  }
  inv.add({kMsa, LabelLevel::msa});
  return inv;
}

LabelInventory LabelInventory::load(const std::filesystem::path& path) {
  const tsv::Table table = tsv::read_file(path);
  const std::size_t code_col = table.require_column("code", path.string());
  const std::size_t level_col = table.require_column("level", path.string());
  LabelInventory inv;
  for (const auto& row : table.rows) {
    DialectLabel label{row[code_col], parse_level(row[level_col])};
    if (label.level == LabelLevel::city) {
      throw Error(ErrorKind::format,
                  path.string() + ": city label '" + label.code + "' belongs in the city map");
    }
    inv.add(std::move(label));
  }
  return inv;
}

void LabelInventory::add(DialectLabel label) {
  if (label.code.empty()) throw Error(ErrorKind::format, "empty label code");
  if (const DialectLabel* existing = find(label.code)) {
    if (existing->level != label.level) {
      throw Error(ErrorKind::format, "label '" + label.code + "' declared with two levels");
    }
    return;
  }
  labels_.push_back(std::move(label));
}

const DialectLabel* LabelInventory::find(std::string_view code) const {
  for (const auto& label : labels_) {
    if (label.code == code) return &label;
  }
  return nullptr;
}

CityCountryMap CityCountryMap::load(const std::filesystem::path& path) {
  const tsv::Table table = tsv::read_file(path);
  const std::size_t city_col = table.require_column("city", path.string());
  const std::size_t country_col = table.require_column("country", path.string());
  CityCountryMap map;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row[city_col].empty() || row[country_col].empty()) {
      throw Error(ErrorKind::format,
                  path.string() + ":" + std::to_string(table.line_numbers[r]) + ": empty cell");
    }
    map.add(row[city_col], row[country_col]);
  }
  return map;
}

void CityCountryMap::add(const std::string& city, const std::string& country) {
  auto [it, inserted] = entries_.try_emplace(city, country);
  if (!inserted && it->second != country) {
    throw Error(ErrorKind::format, "city '" + city + "' maps to both '" + it->second + "' and '" +
                                       country + "'");
  }
}

std::optional<std::string> CityCountryMap::country_of(std::string_view city) const {
  if (auto it = entries_.find(city); it != entries_.end()) return it->second;
  return std::nullopt;
}

CorpusFormat parse_format(std::string_view name) {
  if (name == "madar") return CorpusFormat::madar;
  if (name == "padic") return CorpusFormat::padic;
  if (name == "mpca") return CorpusFormat::mpca;
  if (name == "generic-tsv" || name == "generic") return CorpusFormat::generic_tsv;
  throw Error(ErrorKind::validation, "unknown corpus format '" + std::string(name) +
                                         "' (expected madar, padic, mpca or generic-tsv)");
}

ParallelCorpus ingest_parallel(const std::filesystem::path& path, CorpusFormat format) {
  auto in = open_input(path);
  return ingest_parallel(in, path.string(), format);
}

ParallelCorpus ingest_parallel(std::istream& in, std::string_view source_name, CorpusFormat format) {
  const tsv::Table table = tsv::read(in, source_name);
  if (format == CorpusFormat::madar && table.column("lang") && table.column("sent")) {
    return pivot_long_format(table, source_name);
  }

  const FormatProfile profile = profile_for(format);
  std::optional<std::size_t> id_col;
  for (std::string_view name : profile.id_columns) {
    if ((id_col = table.column(name))) break;
  }
  std::vector<std::size_t> dialect_cols;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (id_col && c == *id_col) continue;
    if (contains(profile.skip_columns, table.header[c])) continue;
    dialect_cols.push_back(c);
  }
  if (dialect_cols.size() < 2) {
    throw Error(ErrorKind::format,
                std::string(source_name) + ": header must name at least two dialect columns");
  }

  const std::string stem = file_stem(source_name);
  ParallelCorpus corpus;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& cells = table.rows[r];
    ParallelRow row;
    row.row_id = id_col && !cells[*id_col].empty() ? cells[*id_col]
                                                   : stem + ":" + std::to_string(r + 1);
    for (std::size_t c : dialect_cols) {
      if (!cells[c].empty()) row.translations.emplace_back(table.header[c], cells[c]);
    }
    accept_row(corpus, std::move(row), table.line_numbers[r]);
  }
  return corpus;
}

LabeledDataset parallel_to_di(const std::vector<ParallelRow>& rows, const CityCountryMap& map,
                              const LabelInventory& inventory, const TransformOptions& options) {
  // Resolve every column label up front so all unmapped labels are reported at once.
  std::map<std::string, DialectLabel, std::less<>> resolved;
  std::vector<std::string> unmapped;
  for (const auto& row : rows) {
    for (const auto& [column, text] : row.translations) {
      if (resolved.contains(column) ||
          std::find(unmapped.begin(), unmapped.end(), column) != unmapped.end()) {
        continue;
      }
      if (const DialectLabel* label = inventory.find(column)) {
        resolved.emplace(column, *label);
      } else if (auto country = map.country_of(column)) {
        const DialectLabel* target = inventory.find(*country);
        if (target == nullptr || target->level != LabelLevel::country) {
          throw Error(ErrorKind::mapping, "city '" + column + "' maps to '" + *country +
                                              "', which is not a country label in the inventory");
        }
        resolved.emplace(column, *target);
      } else {
        unmapped.push_back(column);
      }
    }
  }
  if (!unmapped.empty()) {
    std::sort(unmapped.begin(), unmapped.end());
    throw Error(ErrorKind::mapping, "no city-to-country mapping for label(s): " + join(unmapped, ", "));
  }

  LabeledDataset ds;
  std::unordered_set<std::string> seen;  // sentence + '\t' + label
  for (const auto& row : rows) {
    for (const auto& [column, text] : row.translations) {
      const DialectLabel& label = resolved.at(column);
      ++ds.counters.input_cells;
      if (label.level == LabelLevel::msa && options.drop_msa) {
        ++ds.counters.dropped_msa;
        continue;
      }
      ds.label_inventory.insert(label.code);
      std::optional<std::string> sentence;
      try {
        sentence = textnorm::normalize(text, options.normalize);
      } catch (const Error& e) {
        throw Error(e.kind(), "row '" + row.row_id + "', column '" + column + "': " + e.what());
      }
      if (!sentence) {
        ++ds.counters.dropped_empty;
        continue;
      }
      if (!seen.insert(*sentence + '\t' + label.code).second) {
        ++ds.counters.dropped_duplicate;
        continue;
      }
      ds.samples.push_back({row.row_id + ":" + column, std::move(*sentence), label, row.row_id,
                            text, {}});
    }
  }
  return ds;
}

LabeledDataset ingest_labeled(const std::filesystem::path& path, const LabelInventory& inventory,
                              const IngestOptions& options) {
  auto in = open_input(path);
  return ingest_labeled(in, path.string(), inventory, options);
}

LabeledDataset ingest_labeled(std::istream& in, std::string_view source_name,
                              const LabelInventory& inventory, const IngestOptions& options) {
  const tsv::Table table = tsv::read(in, source_name);
  const std::size_t sentence_col = table.require_column("sentence", source_name);
  const std::size_t label_col = table.require_column("label", source_name);
  const std::optional<std::size_t> id_col = table.column("id");
  if (table.rows.empty()) {
    throw Error(ErrorKind::validation, std::string(source_name) + ": dataset has no samples");
  }

  LabeledDataset ds;
  std::vector<std::size_t> meta_cols;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c == sentence_col || c == label_col || (id_col && c == *id_col)) continue;
    meta_cols.push_back(c);
    ds.metadata_columns.push_back(table.header[c]);
  }

  std::set<std::string> unknown;
  for (const auto& row : table.rows) {
    if (!inventory.contains(row[label_col])) unknown.insert(row[label_col]);
  }
  if (!unknown.empty()) {
    throw Error(ErrorKind::label, std::string(source_name) + ": label(s) not in inventory: " +
                                      join({unknown.begin(), unknown.end()}, ", "));
  }

  const std::string stem = file_stem(source_name);
  std::unordered_set<std::string> ids;
  std::unordered_set<std::string> seen;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string where = std::string(source_name) + ":" + std::to_string(table.line_numbers[r]);
    std::string id = id_col && !row[*id_col].empty() ? row[*id_col] : stem + ":" + std::to_string(r + 1);
    if (!ids.insert(id).second) throw Error(ErrorKind::format, where + ": duplicate id '" + id + "'");

    const DialectLabel& label = *inventory.find(row[label_col]);
    ++ds.counters.input_cells;
    if (label.level == LabelLevel::msa && options.drop_msa) {
      ++ds.counters.dropped_msa;
      continue;
    }
    std::optional<std::string> sentence;
    try {
      sentence = textnorm::normalize(row[sentence_col], options.normalize);
    } catch (const Error& e) {
      throw Error(e.kind(), where + ": " + e.what());
    }
    if (!sentence) {
      ++ds.counters.dropped_empty;
      if (!options.keep_empty) continue;
      sentence.emplace();
    }
    if (options.collapse_duplicates && !seen.insert(*sentence + '\t' + label.code).second) {
      ++ds.counters.dropped_duplicate;
      continue;
    }
    LabeledSample sample{std::move(id), std::move(*sentence), label, std::nullopt, row[sentence_col], {}};
    for (std::size_t c : meta_cols) sample.metadata.push_back(row[c]);
    ds.label_inventory.insert(label.code);
    ds.samples.push_back(std::move(sample));
  }
  if (ds.samples.empty()) {
    throw Error(ErrorKind::validation,
                std::string(source_name) + ": no samples left after normalization");
  }
  return ds;
}

void write_dataset(std::ostream& out, const LabeledDataset& dataset) {
  std::vector<std::string> header{"id", "sentence", "label"};
  header.insert(header.end(), dataset.metadata_columns.begin(), dataset.metadata_columns.end());
  tsv::write_row(out, header);
  for (const auto& sample : dataset.samples) {
    std::vector<std::string> fields{sample.id, sample.sentence, sample.label.code};
    fields.insert(fields.end(), sample.metadata.begin(), sample.metadata.end());
    for (const auto& f : fields) tsv::check_cell(f, "sample '" + sample.id + "'");
    tsv::write_row(out, fields);
  }
}

std::vector<std::string> load_predictions(const std::filesystem::path& path,
                                          const LabeledDataset& gold,
                                          const LabelInventory& inventory) {
  auto in = open_input(path);
  return load_predictions(in, path.string(), gold, inventory);
}

std::vector<std::string> load_predictions(std::istream& in, std::string_view source_name,
                                          const LabeledDataset& gold,
                                          const LabelInventory& inventory) {
  const tsv::Table table = tsv::read(in, source_name);
  const std::size_t id_col = table.require_column("id", source_name);
  const std::size_t pred_col = table.require_column("prediction", source_name);

  std::unordered_map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < gold.samples.size(); ++i) position.emplace(gold.samples[i].id, i);

  std::vector<std::optional<std::string>> aligned(gold.samples.size());
  std::set<std::string> bad_labels;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto it = position.find(row[id_col]);
    if (it == position.end()) {
      throw Error(ErrorKind::alignment, std::string(source_name) + ": prediction for unknown id '" +
                                            row[id_col] + "'");
    }
    if (aligned[it->second]) {
      throw Error(ErrorKind::alignment,
                  std::string(source_name) + ": duplicate prediction for id '" + row[id_col] + "'");
    }
    if (!inventory.contains(row[pred_col])) bad_labels.insert(row[pred_col]);
    aligned[it->second] = row[pred_col];
  }
  if (!bad_labels.empty()) {
    throw Error(ErrorKind::label, std::string(source_name) + ": predicted label(s) not in inventory: " +
                                      join({bad_labels.begin(), bad_labels.end()}, ", "));
  }

  std::vector<std::string> missing;
  std::vector<std::string> out;
  out.reserve(aligned.size());
  for (std::size_t i = 0; i < aligned.size(); ++i) {
    if (!aligned[i]) {
      missing.push_back(gold.samples[i].id);
      continue;
    }
    out.push_back(std::move(*aligned[i]));
  }
  if (!missing.empty()) {
    if (missing.size() > 10) {
      const std::size_t extra = missing.size() - 10;
      missing.resize(10);
      missing.push_back("... (" + std::to_string(extra) + " more)");
    }
    throw Error(ErrorKind::alignment,
                std::string(source_name) + ": no prediction for id(s): " + join(missing, ", "));
  }
  return out;
}

}  // namespace dialect_audit::corpus
