#include "toy_server.hpp"

#include "ddrbench/error.hpp"
#include "httplib.h"
#include "json.hpp"

namespace ddrbench::toy {

ToyServer::ToyServer(ToyModel const& model, int port, Fault fault)
    : model_(model), server_(std::make_unique<httplib::Server>()) {
  server_->Post("/embed", [this, fault](httplib::Request const& req, httplib::Response& res) {
    ++requests_;
    if (fault == Fault::kServiceUnavailable) {
      res.status = 503;
      res.set_content("{\"error\":\"unavailable\"}", "application/json");
      return;
    }
    if (fault == Fault::kGarbage) {
      res.set_content("this is not json", "application/json");
      return;
    }
    nlohmann::json body;
    try {
      body = nlohmann::json::parse(req.body);
    } catch (nlohmann::json::parse_error const& e) {
      res.status = 400;
      res.set_content(nlohmann::json{{"error", e.what()}}.dump(), "application/json");
      return;
    }
    if (!body.is_object() || !body.contains("text") || !body["text"].is_string() ||
        body["text"].get<std::string>().empty()) {
      res.status = 400;
      res.set_content("{\"error\":\"request needs a nonempty string field 'text'\"}", "application/json");
      return;
    }
    try {
      auto response = model_.respond(body["text"].get<std::string>());
      if (fault == Fault::kMismatchedLengths) {
        auto j = nlohmann::json::parse(response);
        j["post"].erase(j["post"].size() - 1);
        response = j.dump();
      }
      res.set_content(response, "application/json");
    } catch (Error const& e) {
      res.status = 400;
      res.set_content(nlohmann::json{{"error", e.what()}}.dump(), "application/json");
    }
  });
  server_->Get("/stats", [this](httplib::Request const&, httplib::Response& res) {
    res.set_content(nlohmann::json{{"requests", requests_.load()}}.dump(), "application/json");
  });

  if (port == 0) {
    port_ = server_->bind_to_any_port("127.0.0.1");
  } else if (server_->bind_to_port("127.0.0.1", port)) {
    port_ = port;
  } else {
    port_ = -1;
  }
  if (port_ < 0) fail(ErrorCode::kIo, "toy provider cannot bind a port");
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

ToyServer::~ToyServer() { stop(); }

void ToyServer::wait() {
  if (thread_.joinable()) thread_.join();
}

void ToyServer::stop() {
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace ddrbench::toy
