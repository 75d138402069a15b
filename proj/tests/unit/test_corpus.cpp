#include <map>
#include <random>
#include <set>

#include "dialect_audit/audit.hpp"
#include "dialect_audit/corpus.hpp"
#include "dialect_audit/textnorm.hpp"
#include "dialect_audit/tsv.hpp"
#include "test_util.hpp"

using namespace dialect_audit;
using namespace dialect_audit::corpus;

namespace {

LabeledDataset from_text(const std::string& text, const IngestOptions& opts = {}) {
  std::istringstream in(text);
  return ingest_labeled(in, "mem.tsv", LabelInventory::defaults(), opts);
}

ParallelCorpus parallel_from_text(const std::string& text, CorpusFormat format = CorpusFormat::generic_tsv) {
  std::istringstream in(text);
  return ingest_parallel(in, "par.tsv", format);
}

}  // namespace

TEST(Tsv, ReadsHeaderRowsAndPadsShortRows) {
  std::istringstream in("a\tb\tc\r\n1\t2\t3\n\n4\t5\n");
  const tsv::Table t = tsv::read(in, "x");
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0][2], "3");
  EXPECT_EQ(t.rows[1][2], "");
  EXPECT_EQ(t.line_numbers[1], 4u);
}

TEST(Tsv, RejectsMalformedTables) {
  std::istringstream empty("");
  EXPECT_ERROR_KIND(tsv::read(empty, "x"), ErrorKind::format);
  std::istringstream dup("a\ta\n");
  EXPECT_ERROR_KIND(tsv::read(dup, "x"), ErrorKind::format);
  std::istringstream wide("a\tb\n1\t2\t3\n");
  EXPECT_ERROR_KIND(tsv::read(wide, "x"), ErrorKind::format);
  EXPECT_ERROR_KIND(tsv::check_cell("a\tb", "x"), ErrorKind::format);
}

TEST(Inventory, DefaultsAndShippedFileAgree) {
  const LabelInventory builtin = LabelInventory::defaults();
  const LabelInventory shipped = LabelInventory::load(testutil::data_file("labels.tsv"));
  EXPECT_EQ(builtin.labels(), shipped.labels());
  EXPECT_EQ(builtin.find("Egypt")->level, LabelLevel::country);
  EXPECT_EQ(builtin.find("Levant")->level, LabelLevel::region);
  EXPECT_EQ(builtin.find("MSA")->level, LabelLevel::msa);
  EXPECT_FALSE(builtin.contains("Cairo"));
}

TEST(CityMap, ShippedMapCoversMadarCities) {
  const CityCountryMap map = CityCountryMap::load(testutil::data_file("city_country.tsv"));
  const LabelInventory inventory = LabelInventory::defaults();
  for (const char* city : {"Aleppo", "Damascus", "Cairo", "Alexandria", "Aswan", "Baghdad", "Basra",
                           "Mosul", "Beirut", "Tunis", "Sfax", "Rabat", "Fes", "Jeddah", "Riyadh",
                           "Doha", "Muscat", "Sanaa", "Khartoum", "Amman", "Salt", "Jerusalem",
                           "Tripoli", "Benghazi", "Algiers"}) {
    const auto country = map.country_of(city);
    ASSERT_TRUE(country.has_value()) << city;
    EXPECT_EQ(inventory.find(*country)->level, LabelLevel::country) << city;
  }
  EXPECT_EQ(map.country_of("Aleppo"), "Syria");
  EXPECT_EQ(map.country_of("Cairo"), "Egypt");
}

TEST(CityMap, ConflictingEntriesAreRejected) {
  CityCountryMap map;
  map.add("Aleppo", "Syria");
  map.add("Aleppo", "Syria");
  EXPECT_ERROR_KIND(map.add("Aleppo", "Iraq"), ErrorKind::format);
}

TEST(ParallelToDi, CityColumnsCollapseToOneCountrySample) {
  const CityCountryMap map = CityCountryMap::load(testutil::data_file("city_country.tsv"));
  const auto corpus = ingest_parallel(testutil::fixture("madar_cities.tsv"), CorpusFormat::madar);
  const LabeledDataset ds = parallel_to_di(corpus.rows, map, LabelInventory::defaults());

  // Row 1: Aleppo and Damascus share a sentence, so Syria keeps one copy.
  std::map<std::string, std::set<std::string>> by_label;
  for (const auto& s : ds.samples) {
    by_label[s.label.code].insert(s.sentence);
    EXPECT_NE(s.label.level, LabelLevel::city);
  }
  EXPECT_TRUE(by_label["Syria"].contains("وين المحطة"));
  EXPECT_EQ(ds.counters.dropped_duplicate, 1u);
  EXPECT_EQ(ds.counters.dropped_empty, 1u);  // "!!!"
  EXPECT_TRUE(ds.label_inventory.contains("MSA"));
  EXPECT_FALSE(ds.label_inventory.contains("Aleppo"));

  const auto groups = audit::group_validity(ds);
  const auto station = std::find_if(groups.begin(), groups.end(),
                                    [](const auto& g) { return g.sentence == "وين المحطة"; });
  ASSERT_NE(station, groups.end());
  EXPECT_EQ(station->labels, (std::vector<std::string>{"Syria", "Tunisia"}));
}

TEST(ParallelToDi, DropMsa) {
  const CityCountryMap map = CityCountryMap::load(testutil::data_file("city_country.tsv"));
  const auto corpus = ingest_parallel(testutil::fixture("madar_cities.tsv"), CorpusFormat::madar);
  const LabeledDataset ds = parallel_to_di(corpus.rows, map, LabelInventory::defaults(), {true, {}});
  EXPECT_EQ(ds.counters.dropped_msa, 3u);
  EXPECT_FALSE(ds.label_inventory.contains("MSA"));
}

TEST(ParallelToDi, UnmappedLabelsAreListedTogether) {
  const auto corpus = parallel_from_text("id\tAtlantis\tEgypt\tGondor\n1\tوين\tفين\tمين\n");
  try {
    parallel_to_di(corpus.rows, CityCountryMap{}, LabelInventory::defaults());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::mapping);
    EXPECT_NE(std::string(e.what()).find("Atlantis, Gondor"), std::string::npos) << e.what();
  }
}

TEST(ParallelToDi, ParallelSentencesFormGroups) {
  const auto corpus = ingest_parallel(testutil::fixture("parallel_sample.tsv"), CorpusFormat::generic_tsv);
  const LabeledDataset ds = parallel_to_di(corpus.rows, CityCountryMap{}, LabelInventory::defaults());
  EXPECT_EQ(ds.label_inventory.size(), 15u);
  const auto groups = audit::group_validity(ds);
  std::map<std::string, std::vector<std::string>> by_sentence;
  for (const auto& g : groups) by_sentence[g.sentence] = g.labels;
  EXPECT_EQ(by_sentence["شنو رقم الرحلة"], (std::vector<std::string>{"Iraq", "Morocco", "Qatar"}));
  EXPECT_EQ(by_sentence["وين المحطة"].size(), 12u);
}

TEST(IngestParallel, MadarLongFormatIsPivoted) {
  const auto corpus = parallel_from_text(
      "sentID.BTEC\tlang\tsent\n7\tCairo\tفين\n7\tBeirut\tوين\n8\tCairo\tبس\n", CorpusFormat::madar);
  ASSERT_EQ(corpus.rows.size(), 1u);
  EXPECT_EQ(corpus.rows[0].row_id, "7");
  EXPECT_EQ(corpus.rows[0].translations.size(), 2u);
  ASSERT_EQ(corpus.warnings.size(), 1u);  // sentence 8 has one translation
}

TEST(IngestParallel, FormatProfilesSkipSourceLanguageColumns) {
  const auto padic = parallel_from_text("FR\tAlgeria\tSyria\nbonjour\tصباح\tصباح\n", CorpusFormat::padic);
  ASSERT_EQ(padic.rows.size(), 1u);
  EXPECT_EQ(padic.rows[0].row_id, "par:1");
  EXPECT_EQ(padic.rows[0].translations.size(), 2u);
  const auto mpca = parallel_from_text("EN\tEgypt\tSyria\nhi\tازيك\tكيفك\n", CorpusFormat::mpca);
  EXPECT_EQ(mpca.cells, 2u);
  EXPECT_ERROR_KIND(parse_format("xml"), ErrorKind::validation);
}

TEST(ParallelToDi, OutputSizeNeverExceedsCells) {
  std::mt19937_64 rng(5);
  const std::vector<std::string> words = {"وين", "فين", "شو", "ايش", "!!", "123", "المحطة"};
  const std::vector<std::string> cols = {"Egypt", "Syria", "Iraq", "Cairo", "Aleppo"};
  const CityCountryMap map = CityCountryMap::load(testutil::data_file("city_country.tsv"));
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<ParallelRow> rows;
    std::size_t cells = 0;
    bool clean = true;
    std::set<std::pair<std::string, std::string>> seen;
    for (int r = 0; r < 6; ++r) {
      ParallelRow row{std::to_string(r), {}};
      for (const auto& c : cols) {
        std::string text = words[rng() % words.size()] + " " + words[rng() % words.size()];
        row.translations.emplace_back(c, text);
        ++cells;
        const auto norm = textnorm::normalize(text);
        const std::string country = map.country_of(c).value_or(c);
        if (!norm || !seen.emplace(*norm, country).second) clean = false;
      }
      rows.push_back(row);
    }
    const LabeledDataset ds = parallel_to_di(rows, map, LabelInventory::defaults());
    EXPECT_LE(ds.samples.size(), cells);
    EXPECT_EQ(ds.samples.size() == cells, clean);
  }
}

TEST(IngestLabeled, MetadataAndGeneratedIds) {
  const LabeledDataset ds = from_text("sentence\tlabel\tsource\nوين؟\tEgypt\ttw\nفين\tSyria\tfb\n");
  ASSERT_EQ(ds.samples.size(), 2u);
  EXPECT_EQ(ds.samples[0].id, "mem:1");
  EXPECT_EQ(ds.samples[0].sentence, "وين");
  EXPECT_EQ(ds.samples[0].raw, "وين؟");
  EXPECT_EQ(ds.metadata_columns, std::vector<std::string>{"source"});
  EXPECT_EQ(ds.samples[1].metadata, std::vector<std::string>{"fb"});
}

TEST(IngestLabeled, Errors) {
  EXPECT_ERROR_KIND(from_text("sentence\tlabel\nوين\tNarnia\nفين\tOz\n"), ErrorKind::label);
  EXPECT_ERROR_KIND(from_text("sentence\tlabel\n"), ErrorKind::validation);
  EXPECT_ERROR_KIND(from_text("sentence\n"), ErrorKind::format);
  EXPECT_ERROR_KIND(from_text("id\tsentence\tlabel\n1\tوين\tEgypt\n1\tفين\tEgypt\n"), ErrorKind::format);
  EXPECT_ERROR_KIND(from_text("sentence\tlabel\n\xFF\tEgypt\n"), ErrorKind::decoding);
  EXPECT_ERROR_KIND(from_text("sentence\tlabel\n123\tEgypt\n"), ErrorKind::validation);
}

TEST(IngestLabeled, DuplicatesAndEmptyRows) {
  const std::string text = "id\tsentence\tlabel\na\tوين\tEgypt\nb\tوين!\tEgypt\nc\t123\tEgypt\nd\tوين\tSyria\n";
  const LabeledDataset collapsed = from_text(text);
  EXPECT_EQ(collapsed.samples.size(), 2u);
  EXPECT_EQ(collapsed.counters.dropped_duplicate, 1u);
  EXPECT_EQ(collapsed.counters.dropped_empty, 1u);

  IngestOptions keep;
  keep.collapse_duplicates = false;
  keep.keep_empty = true;
  const LabeledDataset all = from_text(text, keep);
  EXPECT_EQ(all.samples.size(), 4u);
  EXPECT_EQ(all.samples[2].sentence, "");
}

TEST(IngestLabeled, RoundTripIsByteIdentical) {
  const LabeledDataset ds = ingest_labeled(testutil::fixture("qadi_sample/gold.tsv"), LabelInventory::defaults());
  std::ostringstream first;
  write_dataset(first, ds);
  std::istringstream again(first.str());
  const LabeledDataset reread = ingest_labeled(again, "again.tsv", LabelInventory::defaults());
  std::ostringstream second;
  write_dataset(second, reread);
  EXPECT_EQ(first.str(), second.str());
  EXPECT_EQ(ds.samples.size(), reread.samples.size());
}

TEST(LoadPredictions, AlignsByIdAndReportsProblems) {
  IngestOptions keep;
  keep.collapse_duplicates = false;
  const LabeledDataset gold = from_text("id\tsentence\tlabel\na\tوين\tEgypt\nb\tفين\tSyria\n", keep);
  const LabelInventory inv = LabelInventory::defaults();
  std::istringstream ok("id\tprediction\nb\tEgypt\na\tEgypt\n");
  EXPECT_EQ(load_predictions(ok, "p", gold, inv), (std::vector<std::string>{"Egypt", "Egypt"}));
  std::istringstream missing("id\tprediction\na\tEgypt\n");
  EXPECT_ERROR_KIND(load_predictions(missing, "p", gold, inv), ErrorKind::alignment);
  std::istringstream unknown("id\tprediction\na\tEgypt\nb\tEgypt\nz\tEgypt\n");
  EXPECT_ERROR_KIND(load_predictions(unknown, "p", gold, inv), ErrorKind::alignment);
  std::istringstream dup("id\tprediction\na\tEgypt\na\tEgypt\nb\tEgypt\n");
  EXPECT_ERROR_KIND(load_predictions(dup, "p", gold, inv), ErrorKind::alignment);
  std::istringstream bad("id\tprediction\na\tMordor\nb\tEgypt\n");
  EXPECT_ERROR_KIND(load_predictions(bad, "p", gold, inv), ErrorKind::label);
}
