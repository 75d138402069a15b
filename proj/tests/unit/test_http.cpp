#include <httplib.h>

#include <json.hpp>
#include <thread>

#include "dialect_audit/http.hpp"
#include "test_util.hpp"

using namespace dialect_audit;
using namespace dialect_audit::annotate;
using nlohmann::json;

namespace {

class HttpTest : public ::testing::Test {
 protected:
  void SetUp() override {
    tasks_ = {{"q1", "وين المحطة؟", "Egypt", "Sudan"},
              {"q2", "فين المحطة؟", "Egypt", "Morocco"},
              {"q3", "شو بدك؟", "Syria", "Lebanon"}};
    service_ = std::make_unique<AnnotationService>(
        dir_.path(), tasks_,
        std::vector<AnnotatorProfile>{{"eg1", "tok-eg1", "Egypt"}, {"eg2", "tok-eg2", "Egypt"},
                                      {"sy1", "tok-sy1", "Syria"}});
    HttpOptions options;
    options.admin_token = "admin";
    server_ = std::make_unique<HttpServer>(*service_, options);
    port_ = server_->bind("127.0.0.1", 0);
    thread_ = std::jthread([this] { server_->run(); });
    server_->wait_until_ready();
  }

  void TearDown() override {
    server_->stop();
    thread_.join();
  }

  httplib::Client client(const std::string& token) {
    httplib::Client c("127.0.0.1", port_);
    c.set_bearer_token_auth(token);
    return c;
  }

  static json body(const httplib::Result& r) { return json::parse(r->body); }

  void pass(const std::string& token) {
    auto c = client(token);
    for (std::string_view page : kInstructionPageIds) {
      ASSERT_EQ(c.Post("/api/instructions/ack", json{{"page", page}}.dump(), "application/json")->status, 200);
    }
  }

  testutil::TempDir dir_;
  std::vector<AnnotationTask> tasks_;
  std::unique_ptr<AnnotationService> service_;
  std::unique_ptr<HttpServer> server_;
  std::jthread thread_;
  int port_ = 0;
};

}  // namespace

TEST_F(HttpTest, RequiresBearerToken) {
  httplib::Client anonymous("127.0.0.1", port_);
  auto r = anonymous.Get("/api/progress");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 401);
  EXPECT_EQ(body(r)["error"], "auth_error");
  EXPECT_EQ(client("wrong").Get("/api/instructions")->status, 401);
}

TEST_F(HttpTest, InstructionsThenTasks) {
  auto c = client("tok-eg1");
  auto r = c.Get("/api/instructions");
  ASSERT_EQ(r->status, 200);
  const json page = body(r);
  EXPECT_EQ(page["annotator_id"], "eg1");
  EXPECT_EQ(page["dialect"], "Egypt");
  EXPECT_EQ(page["pages"].size(), 4u);
  EXPECT_FALSE(page["passed"].get<bool>());

  r = c.Get("/api/tasks/next?annotator=eg1");
  EXPECT_EQ(r->status, 403);
  EXPECT_EQ(body(r)["error"], "instructions_required");

  r = c.Post("/api/instructions/ack", R"({"page":"example-2"})", "application/json");
  EXPECT_EQ(r->status, 403);
  r = c.Post("/api/instructions/ack", R"({"page":"instructions"})", "application/json");
  EXPECT_EQ(body(r)["remaining"].size(), 3u);
  r = c.Post("/api/instructions/ack", "not json", "application/json");
  EXPECT_EQ(r->status, 400);

  pass("tok-eg1");
  EXPECT_TRUE(body(c.Get("/api/instructions"))["passed"].get<bool>());
  r = c.Get("/api/tasks/next?annotator=eg1");
  ASSERT_EQ(r->status, 200);
  const json task = body(r)["task"];
  EXPECT_EQ(task["dialect"], "Egypt");
  EXPECT_EQ(task["sample_id"], "q1");
  EXPECT_EQ(task["sentence"], "وين المحطة؟");
  EXPECT_EQ(c.Get("/api/tasks/next?annotator=eg2")->status, 401);
}

TEST_F(HttpTest, JudgmentStatusCodes) {
  pass("tok-eg1");
  pass("tok-eg2");
  auto a = client("tok-eg1");
  auto b = client("tok-eg2");
  const std::string mine = body(a.Get("/api/tasks/next"))["task"]["sample_id"];
  const std::string theirs = body(b.Get("/api/tasks/next"))["task"]["sample_id"];
  EXPECT_NE(mine, theirs);

  const auto post = [](httplib::Client& c, const json& j) {
    return c.Post("/api/judgments", j.dump(), "application/json");
  };
  auto r = post(a, {{"sample_id", mine}, {"verdict", "maybe"}});
  EXPECT_EQ(r->status, 400);
  r = post(a, {{"sample_id", "nope"}, {"verdict", "valid"}});
  EXPECT_EQ(r->status, 404);
  r = post(a, {{"sample_id", theirs}, {"verdict", "valid"}});
  EXPECT_EQ(r->status, 409);
  EXPECT_EQ(body(r)["error"], "conflict");
  r = post(a, {{"sample_id", mine}, {"verdict", "valid"}, {"annotator_id", "eg2"}});
  EXPECT_EQ(r->status, 401);

  r = post(a, {{"sample_id", mine}, {"verdict", "unsure"}});
  ASSERT_EQ(r->status, 201);
  const json record = body(r);
  EXPECT_EQ(record["annotator_id"], "eg1");
  EXPECT_EQ(record["dialect"], "Egypt");
  EXPECT_EQ(record["verdict"], "unsure");
  EXPECT_EQ(post(a, {{"sample_id", mine}, {"verdict", "valid"}})->status, 409);

  const json progress = body(a.Get("/api/progress"));
  EXPECT_EQ(progress["dialects"]["Egypt"]["done"], 1);
  EXPECT_EQ(progress["dialects"]["Egypt"]["assigned"], 1);
  EXPECT_EQ(progress["total"]["total"], 3);
  EXPECT_EQ(body(a.Get("/api/tasks/next"))["done_by_you"], 1);
}

TEST_F(HttpTest, ExportNeedsAdminTokenAndMatchesService) {
  pass("tok-sy1");
  auto c = client("tok-sy1");
  const std::string id = body(c.Get("/api/tasks/next"))["task"]["sample_id"];
  c.Post("/api/judgments", json{{"sample_id", id}, {"verdict", "invalid"}}.dump(), "application/json");
  EXPECT_TRUE(body(c.Get("/api/tasks/next"))["task"].is_null());

  EXPECT_EQ(c.Get("/api/export")->status, 401);
  auto r = client("admin").Get("/api/export");
  ASSERT_EQ(r->status, 200);
  std::ostringstream direct;
  service_->export_judgments(direct);
  EXPECT_EQ(r->body, direct.str());
  std::istringstream in(r->body);
  const JudgmentSet parsed = read_jsonl(in, "export");
  ASSERT_EQ(parsed.size(), 1u);
  EXPECT_EQ(parsed.records()[0].verdict, Verdict::invalid);
}

TEST_F(HttpTest, GoldLabelNeverLeaks) {
  pass("tok-eg1");
  auto c = client("tok-eg1");
  std::string seen;
  for (const char* path : {"/api/instructions", "/api/tasks/next", "/api/progress"}) seen += c.Get(path)->body;
  const std::string id = body(c.Get("/api/tasks/next"))["task"]["sample_id"];
  seen += c.Post("/api/judgments", json{{"sample_id", id}, {"verdict", "valid"}}.dump(), "application/json")->body;
  seen += client("admin").Get("/api/export")->body;
  EXPECT_EQ(seen.find("original_label"), std::string::npos);
  EXPECT_EQ(seen.find("Sudan"), std::string::npos);
  EXPECT_EQ(seen.find("Morocco"), std::string::npos);
}
