#include "dialect_audit/judgments.hpp"

#include <istream>
#include <json.hpp>
#include <ostream>

#include "dialect_audit/error.hpp"

namespace dialect_audit::annotate {

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::valid: return "valid";
    case Verdict::invalid: return "invalid";
    case Verdict::unsure: return "unsure";
  }
  return "unsure";
}

Verdict parse_verdict(std::string_view text) {
  if (text == "valid") return Verdict::valid;
  if (text == "invalid") return Verdict::invalid;
  if (text == "unsure") return Verdict::unsure;
  throw Error(ErrorKind::validation,
              "verdict must be valid, invalid or unsure, got '" + std::string(text) + "'");
}

JudgmentSet::JudgmentSet(std::vector<JudgmentRecord> records) {
  for (auto& record : records) add(std::move(record));
}

void JudgmentSet::add(JudgmentRecord record) {
  auto key = std::make_pair(record.sample_id, record.annotator_id);
  if (index_.contains(key)) {
    throw Error(ErrorKind::conflict, "annotator '" + record.annotator_id +
                                         "' already judged sample '" + record.sample_id + "'");
  }
  index_.emplace(std::move(key), records_.size());
  records_.push_back(std::move(record));
}

std::vector<ResolvedJudgment> JudgmentSet::resolve() const {
  std::map<std::string, ResolvedJudgment> by_sample;
  for (const auto& record : records_) {
    auto [it, inserted] = by_sample.try_emplace(record.sample_id);
    ResolvedJudgment& resolved = it->second;
    if (inserted) {
      resolved.sample_id = record.sample_id;
      resolved.dialect = record.dialect;
    } else if (resolved.dialect != record.dialect) {
      throw Error(ErrorKind::consistency, "sample '" + record.sample_id +
                                              "' judged for both '" + resolved.dialect + "' and '" +
                                              record.dialect + "'");
    }
    ++resolved.total_votes;
    if (record.verdict == Verdict::valid) ++resolved.valid_votes;
  }
  std::vector<ResolvedJudgment> out;
  out.reserve(by_sample.size());
  for (auto& [id, resolved] : by_sample) {
    resolved.valid = 2 * resolved.valid_votes > resolved.total_votes;
    out.push_back(std::move(resolved));
  }
  return out;
}

std::string to_json_line(const JudgmentRecord& record) {
  nlohmann::ordered_json j;
  j["sample_id"] = record.sample_id;
  j["annotator_id"] = record.annotator_id;
  j["dialect"] = record.dialect;
  j["verdict"] = to_string(record.verdict);
  j["timestamp"] = record.timestamp;
  return j.dump();
}

JudgmentRecord parse_json_line(std::string_view line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::format, std::string("malformed judgment: ") + e.what());
  }
  const auto field = [&](const char* name) -> std::string {
    if (!j.is_object() || !j.contains(name) || !j[name].is_string()) {
      throw Error(ErrorKind::format, std::string("judgment is missing string field '") + name + "'");
    }
    return j[name].get<std::string>();
  };
  return {field("sample_id"), field("annotator_id"), field("dialect"), parse_verdict(field("verdict")),
          field("timestamp")};
}

void write_jsonl(std::ostream& out, const JudgmentSet& judgments) {
  out << kJudgmentsHeader << '\n';
  for (const auto& record : judgments.records()) out << to_json_line(record) << '\n';
}

JudgmentSet read_jsonl(std::istream& in, std::string_view source_name) {
  JudgmentSet set;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    try {
      set.add(parse_json_line(line));
    } catch (const Error& e) {
      throw Error(e.kind(), std::string(source_name) + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return set;
}

}  // namespace dialect_audit::annotate
