#pragma once

#include <atomic>
#include <memory>
#include <string>
#include <thread>

#include "toy_model.hpp"

namespace httplib {
class Server;
}

namespace ddrbench::toy {

enum class Fault {
  kNone,
  kServiceUnavailable,  // every request answers 503
  kMismatchedLengths,   // post has one row fewer than pre
  kGarbage,             // body is not JSON
};

/// Provider protocol server around a ToyModel, bound to 127.0.0.1.
///   POST /embed  {"text": ...}  -> provider response
///   GET  /stats                 -> {"requests": n}
class ToyServer {
 public:
  explicit ToyServer(ToyModel const& model, int port = 0, Fault fault = Fault::kNone);
  ~ToyServer();
  ToyServer(ToyServer const&) = delete;
  ToyServer& operator=(ToyServer const&) = delete;

  int port() const noexcept { return port_; }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/embed"; }
  std::size_t requests() const noexcept { return requests_.load(); }

  // Blocks until stop() is called from elsewhere.
  void wait();
  void stop();

 private:
  ToyModel const& model_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  std::atomic<std::size_t> requests_{0};
  int port_ = 0;
};

}  // namespace ddrbench::toy
