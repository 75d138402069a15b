#include <json.hpp>

#include "dialect_audit/cli.hpp"
#include "test_util.hpp"

using nlohmann::json;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = dialect_audit::cli::dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

std::string fx(const std::string& name) { return testutil::fixture(name).string(); }

}  // namespace

TEST(Cli, AuditSyntheticReport) {
  testutil::TempDir dir;
  const std::string report = (dir / "out.json").string();
  const Outcome r = run({"audit", "--input", fx("synthetic.tsv"), "--report", report});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(testutil::slurp(report));
  EXPECT_DOUBLE_EQ(j["expected_max_accuracy"].get<double>(), 80.0);
  EXPECT_DOUBLE_EQ(j["multi_validity_mass"].get<double>(), 40.0);
  EXPECT_EQ(j["manifest"]["subcommand"], "audit");
  EXPECT_EQ(j["manifest"]["inputs"][0]["sha256"].get<std::string>().size(), 64u);
}

TEST(Cli, UsageErrors) {
  Outcome r = run({"frobnicate"});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(json::parse(r.err)["error"], "usage");
  EXPECT_EQ(run({"audit"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
  r = run({"--version"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "dialect-audit 0.3.0\n");
}

TEST(Cli, MissingInputIsAnIoError) {
  const Outcome r = run({"audit", "--input", "/nonexistent/file.tsv"});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(json::parse(r.err)["error"], "io_error");
}

TEST(Cli, SimulateIsDeterministic) {
  const std::vector<std::string> args = {"--seed", "7", "simulate", "--input", fx("synthetic.tsv"),
                                         "--trials", "20000"};
  const Outcome a = run(args);
  std::vector<std::string> threaded = args;
  threaded.insert(threaded.end(), {"--threads", "3"});
  const Outcome b = run(threaded);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_NEAR(json::parse(a.out)["simulated_accuracy"].get<double>(), 80.0, 1.5);
}

TEST(Cli, TransformMadar) {
  const Outcome r = run({"transform", "--format", "madar", "--city-map", testutil::data_file("city_country.tsv").string(),
                     "--input", fx("madar_cities.tsv")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "id\tsentence\tlabel");
  EXPECT_NE(r.out.find("\tSyria\n"), std::string::npos);
  EXPECT_NE(r.out.find("\tMSA\n"), std::string::npos);
}

TEST(Cli, EvaluateThenCorrectEndToEnd) {
  testutil::TempDir dir;
  const std::string eval = (dir / "eval.json").string();
  const std::string fps = (dir / "fps.tsv").string();
  Outcome r = run({"evaluate", "--gold", fx("qadi_sample/gold.tsv"), "--pred", fx("qadi_sample/pred.tsv"),
               "--report", eval, "--fps", fps});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string corrected = (dir / "corrected.json").string();
  r = run({"correct", "--eval", eval, "--judgments", fx("qadi_sample/judgments.jsonl"), "--report", corrected});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(testutil::slurp(corrected));
  EXPECT_DOUBLE_EQ(j["macro"]["original"]["rounded"]["f1"].get<double>(), 0.56);
  EXPECT_DOUBLE_EQ(j["macro"]["corrected"]["rounded"]["f1"].get<double>(), 0.72);
}

TEST(Cli, CorrectRejectsJudgmentsForUnknownSamples) {
  testutil::TempDir dir;
  const std::string eval = (dir / "eval.json").string();
  ASSERT_EQ(run({"evaluate", "--gold", fx("qadi_sample/gold.tsv"), "--pred", fx("qadi_sample/pred.tsv"),
                 "--report", eval})
                .code,
            0);
  testutil::spit(dir / "j.jsonl",
                 R"({"sample_id":"ghost","annotator_id":"a","dialect":"Egypt","verdict":"valid","timestamp":"2023-06-05T00:00:00Z"})"
                 "\n");
  const Outcome r = run({"correct", "--eval", eval, "--judgments", (dir / "j.jsonl").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(json::parse(r.err)["error"], "consistency_error");
}

TEST(Cli, ExportFromMissingStoreFails) {
  testutil::TempDir dir;
  const Outcome r = run({"export-judgments", "--store", (dir / "missing").string()});
  EXPECT_EQ(r.code, 1);
}
