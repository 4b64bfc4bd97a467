// Scripted inference server for integration tests: answers every /infer
// POST with a fixed text after an optional delay, or misbehaves on demand
// (HTTP 500s, schema-violating bodies) to exercise client error paths.
#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <iostream>
#include <thread>

int main(int argc, char** argv) {
  CLI::App app{"Scripted stub inference server"};

  int port = 8077;
  std::string host = "127.0.0.1";
  std::string answer = "Normal";
  int delay_ms = 0;
  int tokens = 1;
  int fail_first = 0;      // 500s for the first N requests, then recover
  bool always_500 = false;
  bool malformed = false;  // omit the "text" field

  app.add_option("--port", port, "listen port");
  app.add_option("--host", host, "bind address");
  app.add_option("--answer", answer, "text returned for every inference");
  app.add_option("--delay-ms", delay_ms, "artificial inference delay");
  app.add_option("--tokens", tokens, "tokens_generated to report");
  app.add_option("--fail-first", fail_first, "HTTP 500 for the first N requests");
  app.add_flag("--always-500", always_500, "HTTP 500 for every request");
  app.add_flag("--malformed", malformed, "return a schema-violating body");
  CLI11_PARSE(app, argc, argv);

  httplib::Server server;
  std::atomic<int> requests{0};

  server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("ok", "text/plain");
  });

  server.Post("/infer", [&](const httplib::Request& req, httplib::Response& res) {
    const int n = ++requests;
    if (delay_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
    if (always_500 || n <= fail_first) {
      res.status = 500;
      res.set_content("scripted failure", "text/plain");
      return;
    }
    auto body = nlohmann::json::parse(req.body, nullptr, false);
    if (body.is_discarded()) {
      res.status = 400;
      res.set_content("bad request body", "text/plain");
      return;
    }
    nlohmann::json out;
    if (!malformed) out["text"] = answer;
    out["tokens_generated"] = tokens;
    out["infer_ms"] = static_cast<double>(delay_ms);
    res.set_content(out.dump(), "application/json");
  });

  std::cout << "stub server listening on " << host << ":" << port << std::endl;
  if (!server.listen(host, port)) {
    std::cerr << "failed to bind " << host << ":" << port << std::endl;
    return 1;
  }
  return 0;
}
