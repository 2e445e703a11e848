// Copyright 2026 The lecsettle Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <chrono>
#include <cstdlib>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>

#include <httplib.h>
#include <json.hpp>

#include "lec/errors.hpp"
#include "lec/metering.hpp"
#include "lec/report.hpp"
#include "lec/scenario.hpp"
#include "lec/sweep.hpp"
#include "lec/tariffs.hpp"

namespace lec::service {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::chrono::seconds session_ttl{3600};
  std::size_t max_upload_bytes = 64u << 20;
  /// Value of Access-Control-Allow-Origin; empty disables CORS headers.
  std::string cors_origin = "*";

  /// Reads LEC_BIND_ADDR (`host:port`), LEC_SESSION_TTL_SECS,
  /// LEC_MAX_UPLOAD_BYTES and LEC_CORS_ORIGIN.
  static ServiceConfig from_env() {
    ServiceConfig c;
    if (const char* v = std::getenv("LEC_BIND_ADDR")) {
      std::string addr(v);
      auto colon = addr.rfind(':');
      if (colon == std::string::npos)
        throw ConfigError("LEC_BIND_ADDR must be host:port, got '" + addr + "'");
      c.host = addr.substr(0, colon);
      c.port = parse_positive<int>("LEC_BIND_ADDR port", addr.substr(colon + 1));
    }
    if (const char* v = std::getenv("LEC_SESSION_TTL_SECS"))
      c.session_ttl = std::chrono::seconds{parse_positive<long long>("LEC_SESSION_TTL_SECS", v)};
    if (const char* v = std::getenv("LEC_MAX_UPLOAD_BYTES"))
      c.max_upload_bytes = parse_positive<std::size_t>("LEC_MAX_UPLOAD_BYTES", v);
    if (const char* v = std::getenv("LEC_CORS_ORIGIN")) c.cors_origin = v;
    return c;
  }

 private:
  template <class T>
  static T parse_positive(const char* what, const std::string& text) {
    T value{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || value <= 0)
      throw ConfigError(std::string(what) + " must be a positive integer, got '" + text + "'");
    return value;
  }
};

struct HttpResult {
  int status = 200;
  std::string body;
};

struct Upload {
  std::string name = "upload";
  std::string description;
  std::string meters_csv;
  /// JSON text of a tariffs block; defaults apply when absent.
  std::optional<std::string> tariffs_json;
};

using Params = std::map<std::string, std::string>;

/// Token of the bundled seven-unit scenario.
inline constexpr const char* kBundledToken = "table1";

inline std::string error_body(std::string_view kind, std::string_view message) {
  nlohmann::ordered_json j;
  j["error"] = kind;
  j["message"] = message;
  return render(j);
}

/// Request handlers over an in-memory session store. Handlers are plain
/// functions of (session, query) so they can be exercised without sockets;
/// `mount` wires them to an httplib server.
class EvalService {
 public:
  using Clock = std::chrono::steady_clock;

  explicit EvalService(ServiceConfig config = {},
                       std::function<Clock::time_point()> now = &Clock::now)
      : config_(std::move(config)), now_(std::move(now)), rng_(std::random_device{}()) {}

  const ServiceConfig& config() const { return config_; }

  /// Registers a scenario under a fixed token that never expires.
  void preload(const std::string& token, Scenario s) {
    auto settled = std::make_shared<const SettledScenario>(settle_scenario(std::move(s)));
    std::lock_guard lock(mutex_);
    sessions_[token] = Session{settled, now_(), now_(), true};
  }

  HttpResult create_scenario(const Upload& up) {
    if (up.meters_csv.size() > config_.max_upload_bytes)
      return {413, error_body("PayloadTooLarge", "upload exceeds " +
                                                     std::to_string(config_.max_upload_bytes) +
                                                     " bytes")};
    if (up.meters_csv.empty()) return {400, error_body("DataError", "meters_csv is empty")};
    std::shared_ptr<const SettledScenario> settled;
    try {
      std::istringstream in(up.meters_csv);
      auto community = load_community(in, LoadOptions{FillGaps::none, "meters_csv"});
      TariffSchedule tariffs;
      if (up.tariffs_json) {
        nlohmann::json tj;
        try {
          tj = nlohmann::json::parse(*up.tariffs_json);
        } catch (const nlohmann::json::parse_error& e) {
          return {400, error_body("ConfigError", std::string("tariffs: ") + e.what())};
        }
        tariffs = tariffs_from_json(tj);
      }
      settled = std::make_shared<const SettledScenario>(settle_scenario(
          Scenario{up.name, std::move(community), tariffs, up.description, "uploaded"}));
    } catch (const DataError& e) {
      return {400, error_body("DataError", e.what())};
    } catch (const ConfigError& e) {
      return {400, error_body("ConfigError", e.what())};
    }

    std::string token;
    {
      std::lock_guard lock(mutex_);
      purge_expired_locked();
      do token = new_token_locked();
      while (sessions_.count(token) != 0);
      sessions_[token] = Session{settled, now_(), now_(), false};
    }
    nlohmann::ordered_json j;
    j["token"] = token;
    j["name"] = settled->scenario.name;
    j["households"] = settled->scenario.community.size();
    j["intervals"] = settled->scenario.community.intervals();
    j["scenario_hash"] = settled->hash;
    return {201, render(j)};
  }

  /// Accepts `application/json` ({"name", "description", "meters_csv",
  /// "tariffs"}) or a bare `text/csv` meter file with default tariffs.
  HttpResult create_scenario_from_body(const std::string& body,
                                       const std::string& content_type) {
    if (body.size() > config_.max_upload_bytes)
      return {413, error_body("PayloadTooLarge", "upload exceeds " +
                                                     std::to_string(config_.max_upload_bytes) +
                                                     " bytes")};
    Upload up;
    if (content_type.find("json") != std::string::npos) {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(body);
      } catch (const nlohmann::json::parse_error& e) {
        return {400, error_body("DataError", std::string("invalid JSON body: ") + e.what())};
      }
      if (!j.is_object() || !j.contains("meters_csv") || !j["meters_csv"].is_string())
        return {400, error_body("DataError", "body must contain a meters_csv string")};
      up.meters_csv = j["meters_csv"].get<std::string>();
      if (j.contains("name") && j["name"].is_string()) up.name = j["name"].get<std::string>();
      if (j.contains("description") && j["description"].is_string())
        up.description = j["description"].get<std::string>();
      if (j.contains("tariffs")) up.tariffs_json = j["tariffs"].dump();
    } else {
      up.meters_csv = body;
    }
    return create_scenario(up);
  }

  HttpResult describe(const std::string& token) {
    auto s = find(token);
    if (!s) return not_found(token);
    nlohmann::ordered_json j;
    j["token"] = token;
    j["meta"] = report_meta(*s, s->scenario.tariffs);
    return {200, render(j)};
  }

  /// Reference and LEC metrics at one local price; identical to the batch
  /// `--mode both` report for the same parameters.
  HttpResult evaluate(const std::string& token, const Params& q) {
    auto s = find(token);
    if (!s) return not_found(token);
    auto tariffs = tariffs_from_query(s->scenario.tariffs, q);
    if (!tariffs) return {422, error_body("InvalidParameter", tariffs.error)};
    return {200, render(run_report(*s, tariffs.value))};
  }

  HttpResult sweep(const std::string& token, const Params& q) {
    auto s = find(token);
    if (!s) return not_found(token);
    auto tariffs = tariffs_from_query(s->scenario.tariffs, q);
    if (!tariffs) return {422, error_body("InvalidParameter", tariffs.error)};
    double bounds[3] = {kDefaultSweepMin, kDefaultSweepMax, kDefaultSweepStep};
    const char* keys[3] = {"min", "max", "step"};
    for (int k = 0; k < 3; ++k) {
      auto it = q.find(keys[k]);
      if (it == q.end()) continue;
      auto v = parse_double(it->second);
      if (!v || !std::isfinite(*v))
        return {422, error_body("InvalidParameter",
                                std::string(keys[k]) + " must be a number")};
      bounds[k] = *v;
    }
    try {
      auto result = sweep_ledgers(s->reference, s->lec, tariffs.value,
                                  make_price_grid(bounds[0], bounds[1], bounds[2]));
      return {200, render(sweep_report(*s, tariffs.value, result))};
    } catch (const UsageError& e) {
      return {422, error_body("InvalidParameter", e.what())};
    }
  }

  std::size_t session_count() {
    std::lock_guard lock(mutex_);
    purge_expired_locked();
    return sessions_.size();
  }

  void mount(httplib::Server& server) {
    server.set_payload_max_length(config_.max_upload_bytes);
    auto reply = [this](httplib::Response& res, const HttpResult& r) {
      res.status = r.status;
      res.set_content(r.body, "application/json");
    };
    server.Post("/scenarios", [this, reply](const httplib::Request& req, httplib::Response& res) {
      if (req.is_multipart_form_data()) {
        Upload up;
        if (req.has_file("meters")) up.meters_csv = req.get_file_value("meters").content;
        if (req.has_file("tariffs")) up.tariffs_json = req.get_file_value("tariffs").content;
        if (req.has_file("name")) up.name = req.get_file_value("name").content;
        reply(res, create_scenario(up));
      } else {
        reply(res, create_scenario_from_body(req.body, req.get_header_value("Content-Type")));
      }
    });
    server.Get(R"(/scenarios/([^/]+))", [this, reply](const httplib::Request& req,
                                                      httplib::Response& res) {
      reply(res, describe(req.matches[1]));
    });
    server.Get(R"(/scenarios/([^/]+)/evaluate)",
               [this, reply](const httplib::Request& req, httplib::Response& res) {
                 reply(res, evaluate(req.matches[1], to_params(req)));
               });
    server.Get(R"(/scenarios/([^/]+)/sweep)",
               [this, reply](const httplib::Request& req, httplib::Response& res) {
                 reply(res, sweep(req.matches[1], to_params(req)));
               });
    if (!config_.cors_origin.empty()) {
      server.set_default_headers({{"Access-Control-Allow-Origin", config_.cors_origin},
                                  {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                  {"Access-Control-Allow-Headers", "Content-Type"}});
      server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
        res.status = 204;
      });
    }
  }

 private:
  struct Session {
    std::shared_ptr<const SettledScenario> settled;
    Clock::time_point created_at;
    Clock::time_point last_access;
    bool pinned = false;
  };

  struct TariffQuery {
    TariffSchedule value;
    std::string error;
    explicit operator bool() const { return error.empty(); }
  };

  static Params to_params(const httplib::Request& req) {
    Params p;
    for (const auto& [k, v] : req.params) p.emplace(k, v);
    return p;
  }

  static TariffQuery tariffs_from_query(TariffSchedule base, const Params& q) {
    TariffQuery out{base, {}};
    auto number = [&](const char* key, double& slot) {
      auto it = q.find(key);
      if (it == q.end() || !out.error.empty()) return;
      auto v = parse_double(it->second);
      if (!v || !std::isfinite(*v)) {
        out.error = std::string(key) + " must be a finite number";
        return;
      }
      slot = *v;
    };
    number("local_price", out.value.local_price);
    number("gamma", out.value.gamma);
    if (auto it = q.find("levies_on_local"); it != q.end() && out.error.empty()) {
      if (it->second == "true" || it->second == "1")
        out.value.levies_on_local = true;
      else if (it->second == "false" || it->second == "0")
        out.value.levies_on_local = false;
      else
        out.error = "levies_on_local must be true or false";
    }
    if (out.error.empty()) {
      try {
        out.value.validate();
      } catch (const ConfigError& e) {
        out.error = e.what();
      }
    }
    return out;
  }

  static HttpResult not_found(const std::string& token) {
    return {404, error_body("NotFound", "unknown scenario token '" + token + "'")};
  }

  std::shared_ptr<const SettledScenario> find(const std::string& token) {
    std::lock_guard lock(mutex_);
    purge_expired_locked();
    auto it = sessions_.find(token);
    if (it == sessions_.end()) return nullptr;
    it->second.last_access = now_();
    return it->second.settled;
  }

  void purge_expired_locked() {
    const auto now = now_();
    for (auto it = sessions_.begin(); it != sessions_.end();) {
      if (!it->second.pinned && now - it->second.last_access > config_.session_ttl)
        it = sessions_.erase(it);
      else
        ++it;
    }
  }

  std::string new_token_locked() {
    char buf[33];
    std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(rng_()),
                  static_cast<unsigned long long>(rng_()));
    return buf;
  }

  ServiceConfig config_;
  std::function<Clock::time_point()> now_;
  std::mutex mutex_;
  std::mt19937_64 rng_;
  std::map<std::string, Session> sessions_;
};

/// Blocks serving on config.host:config.port with the bundled scenario preloaded.
inline int serve(const ServiceConfig& config, std::uint64_t seed = 42) {
  EvalService svc(config);
  svc.preload(kBundledToken, synth_table1(seed));
  httplib::Server server;
  svc.mount(server);
  std::fprintf(stderr, "lec eval-service listening on %s:%d\n", config.host.c_str(), config.port);
  return server.listen(config.host, config.port) ? 0 : 1;
}

}  // namespace lec::service
