#include "dialect_audit/report.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include "dialect_audit/error.hpp"
#include "dialect_audit/rounding.hpp"

namespace dialect_audit::report {
namespace {

Json rounded_metrics(const metrics::ClassMetrics& m) {
  Json out;
  out["precision"] = round_half_away(m.precision, 2);
  out["recall"] = round_half_away(m.recall, 2);
  out["f1"] = round_half_away(m.f1, 2);
  return out;
}

Json metrics_with_rounding(const metrics::ClassMetrics& m) {
  Json out = class_metrics_json(m);
  out["rounded"] = rounded_metrics(m);
  return out;
}

Json tally_json(const metrics::FpTally& t) {
  Json out;
  out["correct_fp"] = t.correct_fp;
  out["incorrect_fp"] = t.incorrect_fp;
  out["validated_fp"] = t.total();
  return out;
}

template <typename T>
T field(const Json& j, const char* name, const std::string& where) {
  const auto it = j.find(name);
  if (it == j.end()) throw Error(ErrorKind::format, where + ": missing field '" + name + "'");
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorKind::format, where + ": field '" + name + "' has the wrong type");
  }
}

}  // namespace

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::io, "sha256 unavailable");
  }
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest.data(), &len);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex += kHex[digest[i] >> 4];
    hex += kHex[digest[i] & 0xF];
  }
  return hex;
}

void RunManifest::add_input(const std::filesystem::path& path) {
  inputs.emplace_back(path.string(), sha256_file(path));
}

Json RunManifest::to_json() const {
  Json out;
  out["subcommand"] = subcommand;
  Json cfg = Json::object();
  for (const auto& [key, value] : config) cfg[key] = value;
  out["config"] = std::move(cfg);
  Json digests = Json::array();
  for (const auto& [path, sha] : inputs) {
    Json d;
    d["path"] = path;
    d["sha256"] = sha;
    digests.push_back(std::move(d));
  }
  out["inputs"] = std::move(digests);
  out["version"] = version;
  out["seed"] = seed ? Json(*seed) : Json(nullptr);
  return out;
}

Json group_json(const audit::ValidityGroup& group) {
  Json out;
  out["sentence"] = group.sentence;
  out["labels"] = group.labels;
  out["multiplicity"] = group.multiplicity();
  out["sample_count"] = group.sample_count;
  return out;
}

Json audit_json(const audit::AuditReport& report, const corpus::DatasetCounters& counters,
                std::size_t group_count, const RunManifest& manifest) {
  const auto& dist = report.distribution;
  Json distribution;
  distribution["n_dialects"] = dist.n_dialects();
  distribution["perc"] = dist.perc();
  distribution["sample_count"] = dist.sample_count();
  distribution["weighting"] = audit::to_string(dist.weighting());

  Json rounded;
  std::vector<double> perc_1dp;
  for (double p : dist.perc()) perc_1dp.push_back(round_half_away(p, 1));
  rounded["perc"] = perc_1dp;
  rounded["multi_validity_mass"] = round_half_away(report.multi_validity_mass, 1);
  rounded["expected_max_accuracy"] = round_half_away(report.expected_max_accuracy, 1);

  Json examples = Json::array();
  for (const auto& g : report.group_examples) examples.push_back(group_json(g));

  Json ingest;
  ingest["input_cells"] = counters.input_cells;
  ingest["dropped_empty"] = counters.dropped_empty;
  ingest["dropped_duplicate"] = counters.dropped_duplicate;
  ingest["dropped_msa"] = counters.dropped_msa;

  Json out;
  out["manifest"] = manifest.to_json();
  out["distribution"] = std::move(distribution);
  out["multi_validity_mass"] = report.multi_validity_mass;
  out["expected_max_accuracy"] = report.expected_max_accuracy;
  out["group_examples"] = std::move(examples);
  out["warnings"] = report.warnings;
  out["rounded"] = std::move(rounded);
  out["group_count"] = group_count;
  out["ingest"] = std::move(ingest);
  return out;
}

Json class_metrics_json(const metrics::ClassMetrics& m) {
  Json out;
  out["precision"] = m.precision;
  out["recall"] = m.recall;
  out["f1"] = m.f1;
  out["zero_division"] = m.zero_division;
  return out;
}

Json eval_json(const metrics::ConfusionMatrix& cm, const metrics::ClassificationReport& report,
               const metrics::Outcomes& outcomes, const RunManifest& manifest) {
  Json matrix = Json::array();
  for (std::size_t g = 0; g < cm.size(); ++g) {
    std::vector<std::uint64_t> row;
    for (std::size_t p = 0; p < cm.size(); ++p) row.push_back(cm.at(g, p));
    matrix.push_back(row);
  }
  Json rows = Json::array();
  for (const auto& r : report.rows) {
    Json row;
    row["dialect"] = r.counts.dialect;
    row["tp"] = r.counts.tp;
    row["fp"] = r.counts.fp;
    row["fn"] = r.counts.fn;
    row["support"] = r.counts.support;
    row["metrics"] = metrics_with_rounding(r.metrics);
    rows.push_back(std::move(row));
  }
  Json samples = Json::array();
  for (const auto& s : outcomes.samples()) {
    Json o;
    o["id"] = s.id;
    o["gold"] = s.gold;
    o["predicted"] = s.predicted;
    samples.push_back(std::move(o));
  }
  Json out;
  out["manifest"] = manifest.to_json();
  out["labels"] = cm.labels();
  out["confusion"] = std::move(matrix);
  out["rows"] = std::move(rows);
  out["macro"] = metrics_with_rounding(report.macro);
  out["weighted"] = metrics_with_rounding(report.weighted);
  out["accuracy"] = report.accuracy;
  out["accuracy_rounded"] = round_half_away(report.accuracy, 4);
  out["total"] = report.total;
  out["outcomes"] = std::move(samples);
  return out;
}

EvalInput read_eval(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  const std::string where = path.string();
  Json doc = Json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw Error(ErrorKind::format, where + ": not a JSON object");

  EvalInput eval;
  eval.labels = field<std::vector<std::string>>(doc, "labels", where);
  std::vector<metrics::SampleOutcome> samples;
  for (const auto& o : field<Json>(doc, "outcomes", where)) {
    samples.push_back({field<std::string>(o, "id", where), field<std::string>(o, "gold", where),
                       field<std::string>(o, "predicted", where)});
  }
  for (const auto& r : field<Json>(doc, "rows", where)) {
    eval.counts.push_back({field<std::string>(r, "dialect", where), field<std::uint64_t>(r, "tp", where),
                           field<std::uint64_t>(r, "fp", where), field<std::uint64_t>(r, "fn", where),
                           field<std::uint64_t>(r, "support", where)});
  }

  std::vector<std::string> gold;
  std::vector<std::string> pred;
  for (const auto& s : samples) {
    gold.push_back(s.gold);
    pred.push_back(s.predicted);
  }
  const metrics::ConfusionMatrix cm = metrics::confusion(gold, pred, eval.labels);
  if (eval.counts.size() != cm.size()) {
    throw Error(ErrorKind::consistency, where + ": rows do not match labels");
  }
  for (std::size_t i = 0; i < cm.size(); ++i) {
    const metrics::EvalCounts recount = metrics::eval_counts(cm, i);
    const auto& stored = eval.counts[i];
    if (stored.dialect != recount.dialect || stored.tp != recount.tp || stored.fp != recount.fp ||
        stored.fn != recount.fn || stored.support != recount.support) {
      throw Error(ErrorKind::consistency,
                  where + ": counts for '" + stored.dialect + "' disagree with the stored outcomes");
    }
  }
  eval.outcomes = metrics::Outcomes(std::move(samples));
  return eval;
}

ValidatedBound validated_bound(const EvalInput& eval, const annotate::JudgmentSet& judgments) {
  std::map<std::string, bool> verdict;  // sample -> judged valid
  std::set<std::string> dialects;
  for (const auto& r : judgments.resolve()) {
    verdict[r.sample_id] = r.valid;
    dialects.insert(r.dialect);
  }
  std::vector<std::set<std::string>> sets;
  std::size_t multi = 0;
  for (const auto& s : eval.outcomes.samples()) {
    if (!dialects.contains(s.predicted)) continue;
    if (s.gold == s.predicted) {
      sets.push_back({s.gold});
      continue;
    }
    const auto it = verdict.find(s.id);
    if (it == verdict.end()) continue;
    if (it->second) {
      sets.push_back({s.gold, s.predicted});
      ++multi;
    } else {
      sets.push_back({s.gold});
    }
  }
  if (sets.empty()) throw Error(ErrorKind::validation, "no validated samples");
  audit::PercDistribution dist = audit::perc_from_label_sets(sets, std::max<std::size_t>(eval.labels.size(), 2));
  const double bound = audit::expected_max_accuracy(dist);
  return {sets.size(), multi, std::move(dist), bound};
}

Json corrected_json(const EvalInput& eval, const annotate::JudgmentSet& judgments,
                    const RunManifest& manifest) {
  metrics::check_judgments(judgments, eval.outcomes);

  std::vector<std::pair<metrics::EvalCounts, metrics::CorrectedCounts>> pairs;
  for (const auto& ec : eval.counts) {
    pairs.emplace_back(ec, metrics::corrected_counts(ec, judgments, eval.outcomes));
  }
  const metrics::CorrectedReport corrected = metrics::corrected_report(pairs);

  Json rows = Json::array();
  for (const auto& r : corrected.rows) {
    Json row;
    row["dialect"] = r.counts.dialect;
    row["tp"] = r.counts.tp;
    row["fp"] = r.counts.fp;
    row["fn"] = r.counts.fn;
    row["support"] = r.counts.support;
    row["validated_fp"] = r.corrected.validated_fp;
    row["incorrect_fp"] = r.corrected.incorrect_fp;
    row["unvalidated_fp"] = r.corrected.unvalidated_fp;
    row["tp_star"] = r.corrected.tp_star;
    row["fp_star"] = r.corrected.fp_star;
    row["original"] = metrics_with_rounding(r.original);
    row["corrected"] = metrics_with_rounding(r.corrected_metrics);
    row["in_macro"] = r.in_macro;
    rows.push_back(std::move(row));
  }

  Json macro;
  macro["scope"] = "dialects with at least one validated false positive";
  macro["dialects"] = corrected.macro_scope;
  macro["original"] = metrics_with_rounding(corrected.macro_original);
  macro["corrected"] = metrics_with_rounding(corrected.macro_corrected);

  const metrics::FpBreakdown breakdown = metrics::fp_breakdown(judgments, eval.outcomes);
  Json by_dialect = Json::array();
  for (const auto& d : breakdown.dialects) {
    Json entry;
    entry["dialect"] = d.dialect;
    entry["totals"] = tally_json(d.totals);
    Json by_gold = Json::object();
    for (const auto& [gold, tally] : d.by_gold) by_gold[gold] = tally_json(tally);
    entry["by_gold"] = std::move(by_gold);
    by_dialect.push_back(std::move(entry));
  }
  Json fps;
  fps["dialects"] = std::move(by_dialect);
  fps["overall"] = tally_json(breakdown.overall);
  fps["incorrect_share"] = breakdown.incorrect_share();
  fps["incorrect_share_rounded"] = round_half_away(breakdown.incorrect_share(), 1);

  std::size_t disputed = 0;
  const auto resolved = judgments.resolve();
  for (const auto& r : resolved) disputed += r.disputed() ? 1 : 0;
  Json judged;
  judged["records"] = judgments.size();
  judged["samples"] = resolved.size();
  judged["disputed"] = disputed;

  const std::vector<metrics::LabelSet> gold_sets = metrics::derive_multilabel_gold(eval.outcomes, judgments);
  std::vector<metrics::LabelSet> pred_sets;
  for (const auto& s : eval.outcomes.samples()) pred_sets.push_back({s.predicted});
  const metrics::MultilabelReport ml = metrics::multilabel_report(gold_sets, pred_sets, eval.labels);
  Json ml_rows = Json::array();
  for (const auto& r : ml.rows) {
    Json row;
    row["dialect"] = r.dialect;
    row["tp"] = r.counts.tp;
    row["fp"] = r.counts.fp;
    row["fn"] = r.counts.fn;
    row["tn"] = r.counts.tn;
    row["metrics"] = metrics_with_rounding(r.metrics);
    row["accuracy"] = r.accuracy;
    ml_rows.push_back(std::move(row));
  }
  Json multilabel;
  multilabel["gold_sets"] = "original label plus the prediction when judged valid (a lower bound)";
  multilabel["rows"] = std::move(ml_rows);
  multilabel["macro"] = metrics_with_rounding(ml.macro);
  multilabel["macro_accuracy"] = ml.macro_accuracy;

  Json out;
  out["manifest"] = manifest.to_json();
  out["judgments"] = std::move(judged);
  out["rows"] = std::move(rows);
  out["macro"] = std::move(macro);
  out["fp_breakdown"] = std::move(fps);
  out["multilabel"] = std::move(multilabel);

  if (!judgments.empty()) {
    const ValidatedBound bound = validated_bound(eval, judgments);
    Json b;
    b["samples"] = bound.samples;
    b["multi_valid"] = bound.multi_valid;
    b["perc"] = bound.distribution.perc();
    b["expected_max_accuracy"] = bound.expected_max_accuracy;
    Json rounded;
    rounded["perc_2"] = round_half_away(bound.distribution.at(2), 1);
    rounded["expected_max_accuracy"] = round_half_away(bound.expected_max_accuracy, 1);
    b["rounded"] = std::move(rounded);
    out["validated_bound"] = std::move(b);
  } else {
    out["validated_bound"] = nullptr;
  }
  return out;
}

std::string confusion_csv(const metrics::ConfusionMatrix& cm) {
  const auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + '"';
  };
  std::ostringstream out;
  out << "gold\\pred";
  for (const auto& l : cm.labels()) out << ',' << quote(l);
  out << '\n';
  for (std::size_t g = 0; g < cm.size(); ++g) {
    out << quote(cm.labels()[g]);
    for (std::size_t p = 0; p < cm.size(); ++p) out << ',' << cm.at(g, p);
    out << '\n';
  }
  return out.str();
}

}  // namespace dialect_audit::report
