#include "dialect_audit/http.hpp"

#include <httplib.h>

#include <json.hpp>
#include <sstream>

#include "dialect_audit/error.hpp"

namespace dialect_audit::annotate {
namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

int status_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::auth: return 401;
    case ErrorKind::gating: return 403;
    case ErrorKind::not_found: return 404;
    case ErrorKind::conflict:
    case ErrorKind::lease_expired: return 409;
    case ErrorKind::io: return 500;
    default: return 400;
  }
}

void send_json(httplib::Response& res, int status, const ordered_json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json; charset=utf-8");
}

void send_error(httplib::Response& res, ErrorKind kind, const std::string& message) {
  ordered_json body;
  body["error"] = to_string(kind);
  body["message"] = message;
  send_json(res, status_for(kind), body);
}

std::string bearer_token(const httplib::Request& req) {
  const std::string header = req.get_header_value("Authorization");
  constexpr std::string_view prefix = "Bearer ";
  if (header.size() <= prefix.size() || header.compare(0, prefix.size(), prefix) != 0) {
    throw Error(ErrorKind::auth, "missing bearer token");
  }
  return header.substr(prefix.size());
}

json parse_body(const httplib::Request& req) {
  json body = json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) {
    throw Error(ErrorKind::format, "request body must be a JSON object");
  }
  return body;
}

std::string string_field(const json& body, const char* name) {
  const auto it = body.find(name);
  if (it == body.end() || !it->is_string()) {
    throw Error(ErrorKind::format, std::string("missing string field '") + name + "'");
  }
  return it->get<std::string>();
}

ordered_json task_json(const TaskView& task) {
  ordered_json out;
  out["sample_id"] = task.sample_id;
  out["sentence"] = task.sentence;
  out["dialect"] = task.dialect;
  out["lease_expires"] = task.lease_expires;
  return out;
}

ordered_json progress_json(const DialectProgress& p) {
  ordered_json out;
  out["pending"] = p.pending;
  out["assigned"] = p.assigned;
  out["done"] = p.done;
  out["total"] = p.total();
  return out;
}

}  // namespace

struct HttpServer::Impl {
  AnnotationService& service;
  HttpOptions options;
  httplib::Server server;

  Impl(AnnotationService& s, HttpOptions o) : service(s), options(std::move(o)) { routes(); }

  template <typename Handler>
  httplib::Server::Handler guarded(Handler handler) {
    return [this, handler](const httplib::Request& req, httplib::Response& res) {
      try {
        handler(req, res);
      } catch (const Error& e) {
        send_error(res, e.kind(), e.what());
      } catch (const std::exception& e) {
        send_error(res, ErrorKind::io, e.what());
      }
    };
  }

  const AnnotatorProfile& caller(const httplib::Request& req) const {
    return service.authenticate(bearer_token(req));
  }

  ordered_json instructions_json(const AnnotatorProfile& who) const {
    const StoreState state = service.state();
    const auto acks = state.acknowledged.find(who.annotator_id);
    ordered_json pages = ordered_json::array();
    for (std::size_t i = 0; i < kInstructionPageIds.size(); ++i) {
      ordered_json page;
      page["id"] = kInstructionPageIds[i];
      page["markdown"] = i == 0 ? options.pages.instructions : options.pages.examples[i - 1];
      page["acknowledged"] =
          acks != state.acknowledged.end() && acks->second.contains(std::string(kInstructionPageIds[i]));
      pages.push_back(std::move(page));
    }
    ordered_json out;
    out["annotator_id"] = who.annotator_id;
    out["dialect"] = who.native_dialect;
    out["pages"] = std::move(pages);
    out["passed"] = service.passed_instructions(who.annotator_id);
    return out;
  }

  void routes() {
    server.Get("/api/instructions", guarded([this](const httplib::Request& req, httplib::Response& res) {
      send_json(res, 200, instructions_json(caller(req)));
    }));

    server.Post("/api/instructions/ack", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const AnnotatorProfile& who = caller(req);
      const std::vector<std::string> remaining =
          service.acknowledge(who.annotator_id, string_field(parse_body(req), "page"));
      ordered_json out;
      out["remaining"] = remaining;
      out["passed"] = remaining.empty();
      send_json(res, 200, out);
    }));

    server.Get("/api/tasks/next", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const AnnotatorProfile& who = caller(req);
      if (req.has_param("annotator") && req.get_param_value("annotator") != who.annotator_id) {
        throw Error(ErrorKind::auth, "token does not belong to annotator '" +
                                         req.get_param_value("annotator") + "'");
      }
      const std::optional<TaskView> task = service.next_task(who.annotator_id);
      ordered_json out;
      out["task"] = task ? task_json(*task) : ordered_json(nullptr);
      out["done_by_you"] = service.done_by(who.annotator_id);
      send_json(res, 200, out);
    }));

    server.Post("/api/judgments", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const AnnotatorProfile& who = caller(req);
      const json body = parse_body(req);
      if (body.contains("annotator_id") &&
          string_field(body, "annotator_id") != who.annotator_id) {
        throw Error(ErrorKind::auth, "token does not belong to the annotator in the body");
      }
      const JudgmentRecord record = service.submit_judgment(
          who.annotator_id, string_field(body, "sample_id"),
          parse_verdict(string_field(body, "verdict")));
      send_json(res, 201, ordered_json::parse(to_json_line(record)));
    }));

    server.Get("/api/progress", guarded([this](const httplib::Request& req, httplib::Response& res) {
      caller(req);
      DialectProgress total;
      ordered_json dialects = ordered_json::object();
      for (const auto& [dialect, p] : service.progress()) {
        dialects[dialect] = progress_json(p);
        total.pending += p.pending;
        total.assigned += p.assigned;
        total.done += p.done;
      }
      ordered_json out;
      out["dialects"] = std::move(dialects);
      out["total"] = progress_json(total);
      send_json(res, 200, out);
    }));

    server.Get("/api/export", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const std::string token = bearer_token(req);
      if (options.admin_token) {
        if (token != *options.admin_token) throw Error(ErrorKind::auth, "export needs the admin token");
      } else {
        service.authenticate(token);
      }
      std::ostringstream out;
      service.export_judgments(out);
      res.status = 200;
      res.set_content(out.str(), "application/x-ndjson; charset=utf-8");
    }));

    if (options.static_dir) {
      if (!server.set_mount_point("/", options.static_dir->string())) {
        throw Error(ErrorKind::io, "cannot serve static files from " + options.static_dir->string());
      }
    }
  }
};

HttpServer::HttpServer(AnnotationService& service, HttpOptions options)
    : impl_(std::make_unique<Impl>(service, std::move(options))) {}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound <= 0) throw Error(ErrorKind::io, "cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw Error(ErrorKind::io, "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void HttpServer::run() { impl_->server.listen_after_bind(); }

void HttpServer::stop() { impl_->server.stop(); }

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace dialect_audit::annotate
