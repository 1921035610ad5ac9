#pragma once

// Local endpoint stub implementing the scorer wire protocol, with
// controllable failures and request accounting.

#include <atomic>
#include <chrono>
#include <mutex>
#include <string>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace testutil {

class StubServer {
 public:
  StubServer() {
    server_.Post("/classify", [this](const httplib::Request& req,
                                     httplib::Response& res) {
      const int current = 1 + in_flight_.fetch_add(1);
      int seen = high_water_.load();
      while (current > seen &&
             !high_water_.compare_exchange_weak(seen, current)) {
      }
      {
        std::lock_guard<std::mutex> lock(mu_);
        last_auth_ = req.get_header_value("Authorization");
      }
      classify_hits_.fetch_add(1);
      std::this_thread::sleep_for(std::chrono::milliseconds(hold_ms_.load()));
      if (take_failure()) {
        res.status = fail_status_.load();
        res.set_content("overloaded", "text/plain");
      } else {
        const auto body = nlohmann::json::parse(req.body, nullptr, false);
        const std::string prompt =
            body.is_object() && body.contains("prompt") ? body["prompt"] : "";
        const double yes = yes_probability(prompt);
        nlohmann::json out;
        if (omit_no_label_.load()) {
          out["probabilities"]["Yes"] = yes;
        } else if (garble_.load()) {
          res.set_content("{not json", "application/json");
          in_flight_.fetch_sub(1);
          return;
        } else {
          out["probabilities"]["Yes"] = yes;
          out["probabilities"]["No"] = 1.0 - yes;
        }
        res.set_content(out.dump(), "application/json");
      }
      in_flight_.fetch_sub(1);
    });

    server_.Post("/complete", [this](const httplib::Request& req,
                                     httplib::Response& res) {
      complete_hits_.fetch_add(1);
      const auto body = nlohmann::json::parse(req.body, nullptr, false);
      const std::string prompt =
          body.is_object() && body.contains("prompt") ? body["prompt"] : "";
      nlohmann::json out;
      out["text"] = completion_text(prompt);
      res.set_content(out.dump(), "application/json");
    });

    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~StubServer() {
    server_.stop();
    thread_.join();
  }
  StubServer(const StubServer&) = delete;
  StubServer& operator=(const StubServer&) = delete;

  std::string url() const {
    return "http://127.0.0.1:" + std::to_string(port_);
  }

  // Prompt markers select the canned behavior; anything else gets a
  // prompt-dependent deterministic probability.
  static double yes_probability(const std::string& prompt) {
    if (prompt.find("MATCH") != std::string::npos) return 0.93;
    if (prompt.find("TIE") != std::string::npos) return 0.5;
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : prompt) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    return static_cast<double>(h % 1000) / 1000.0;
  }

  static std::string completion_text(const std::string& prompt) {
    if (prompt.find("VERBOSE_YES") != std::string::npos) {
      return "Yes, these concepts are identical.";
    }
    if (prompt.find("PLAIN_NO") != std::string::npos) return "No.";
    if (prompt.find("BURIED") != std::string::npos) {
      return "After weighing the evidence, the answer is yes, they match.";
    }
    if (prompt.find("UNPARSEABLE") != std::string::npos) {
      return "These concepts are related but distinct.";
    }
    return "Yes.";
  }

  // The next n matching requests answer with fail_status.
  void fail_next(int n, int status = 503) {
    fail_status_.store(status);
    failures_left_.store(n);
  }
  void omit_no_label(bool on) { omit_no_label_.store(on); }
  void garble(bool on) { garble_.store(on); }
  void hold_ms(int ms) { hold_ms_.store(ms); }

  int classify_hits() const { return classify_hits_.load(); }
  int complete_hits() const { return complete_hits_.load(); }
  int high_water() const { return high_water_.load(); }
  void reset_counters() {
    classify_hits_.store(0);
    complete_hits_.store(0);
    high_water_.store(0);
  }
  std::string last_auth() const {
    std::lock_guard<std::mutex> lock(mu_);
    return last_auth_;
  }

 private:
  bool take_failure() {
    int left = failures_left_.load();
    while (left > 0) {
      if (failures_left_.compare_exchange_weak(left, left - 1)) return true;
    }
    return false;
  }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> classify_hits_{0};
  std::atomic<int> complete_hits_{0};
  std::atomic<int> in_flight_{0};
  std::atomic<int> high_water_{0};
  std::atomic<int> failures_left_{0};
  std::atomic<int> fail_status_{503};
  std::atomic<bool> omit_no_label_{false};
  std::atomic<bool> garble_{false};
  std::atomic<int> hold_ms_{0};
  mutable std::mutex mu_;
  std::string last_auth_;
};

}  // namespace testutil
