#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "inspire/generators.hpp"

namespace inspire {

struct ServiceOptions {
  // Sessions are journalled here (seed + ballots) and replayed on start.
  std::optional<std::filesystem::path> journal_dir;
  std::int64_t max_optimize_budget = 20000;
};

// HTTP facade over generators, one-shot optimization and interactive
// sessions. Responses are JSON except image bytes.
class Service {
 public:
  explicit Service(GeneratorRegistry registry, ServiceOptions options = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Binds host:port (port 0 picks a free one) and returns the bound port.
  // Throws Error when the port is taken.
  int bind(const std::string& host, int port);
  // Serves until stop(). Requires bind().
  void listen();
  // bind + listen on a background thread; returns the bound port.
  int start(const std::string& host, int port);
  void stop();

  std::size_t session_count() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace inspire
