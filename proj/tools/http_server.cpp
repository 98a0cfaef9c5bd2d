#include "http_server.hpp"

#include "httplib.h"
#include "json.hpp"

namespace rulebench {

namespace {

void reply(httplib::Response& res, const Response& r) {
  res.status = r.status;
  res.set_content(r.body, "application/json");
}

}  // namespace

void install_routes(httplib::Server& server, AnnotationService& service) {
  server.Get("/api/health", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"status":"ok"})", "application/json");
  });
  server.Get("/api/pairs/next", [&service](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.next_pair(req.get_param_value("annotator_id")));
  });
  server.Get("/api/realizations/:id", [&service](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.realization(req.path_params.at("id")));
  });
  server.Post("/api/annotations", [&service](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.submit(req.body));
  });
  server.Get("/api/stats", [&service](const httplib::Request& req, httplib::Response& res) {
    const auto q = req.get_param_value("qualified_only");
    reply(res, service.stats(q == "1" || q == "true"));
  });
  server.Get("/api/qualification", [&service](const httplib::Request&, httplib::Response& res) {
    reply(res, service.qualification());
  });
  server.Post("/api/qualification", [&service](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.grade_qualification(req.body));
  });
  server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string message = "unknown error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      message = e.what();
    } catch (...) {
    }
    res.status = 500;
    res.set_content(nlohmann::json{{"error", "internal_error"}, {"message", message}}.dump(), "application/json");
  });
}

}  // namespace rulebench
