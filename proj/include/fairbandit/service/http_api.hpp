#pragma once

#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "fairbandit/config.hpp"
#include "fairbandit/error.hpp"
#include "fairbandit/policy.hpp"
#include "fairbandit/service/session.hpp"

namespace fairbandit::service {

inline int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownSession: return 404;
    case ErrorCode::SessionFinished:
    case ErrorCode::WrongPlayer: return 409;
    case ErrorCode::IoFailure: return 500;
    default: return 400;
  }
}

namespace detail {

inline void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

inline void send_error(httplib::Response& res, int status, std::string_view code, const std::string& detail) {
  send_json(res, status, {{"error", std::string(code)}, {"detail", detail}});
}

inline json parse_body(const httplib::Request& req, ErrorCode on_error = ErrorCode::ParseError) {
  if (req.body.empty()) return json::object();
  json body = json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) throw Error(on_error, "request body is not a JSON object");
  return body;
}

inline Rate rate_from(const json& j) {
  if (j.is_string()) return parse_rate(j.get<std::string>());
  if (j.is_number_unsigned() || j.is_number_integer()) return Rate{j.get<std::uint64_t>(), 1};
  throw Error(ErrorCode::InvalidRate, "rate must be a fraction string like \"1/3\" or 0");
}

inline SessionParams params_from(const json& body, double default_normalizer) {
  SessionParams p;
  p.normalizer = default_normalizer;
  try {
    p.players = body.value("players", std::size_t{2});
    if (body.contains("rate")) p.rate = rate_from(body.at("rate"));
    p.horizon = body.value("horizon", std::uint64_t{30});
    p.policy = parse_policy(body.value("policy", std::string("strict")));
    p.seed = body.value("seed", std::uint64_t{0});
    p.normalizer = body.value("normalizer", default_normalizer);
    if (body.contains("slots")) p.slots = body.at("slots").get<std::vector<std::uint64_t>>();
    if (body.contains("assign")) {
      std::vector<ArmIndex> arms;
      for (auto a : body.at("assign").get<std::vector<std::uint64_t>>()) {
        if (a == 0) throw Error(ErrorCode::NotBijective, "players are one-based");
        arms.push_back(a - 1);
      }
      p.assignment = std::move(arms);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  return p;
}

/// Wraps a handler so library errors become `{"error", "detail"}` bodies.
template <typename Fn>
auto guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const Error& e) {
      send_error(res, http_status(e.code()), to_string(e.code()), e.detail());
    } catch (const json::exception& e) {
      send_error(res, 400, "ParseError", e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "Internal", e.what());
    }
  };
}

}  // namespace detail

/// Registers the session API on `server`. `store` must outlive the server.
inline void mount(httplib::Server& server, SessionStore& store) {
  using detail::guarded;
  using detail::send_json;

  server.Post("/sessions", guarded([&store](const httplib::Request& req, httplib::Response& res) {
                const auto params = detail::params_from(detail::parse_body(req), store.options().default_normalizer);
                const auto id = store.create(params);
                send_json(res, 201, store.get_state(id));
              }));

  server.Post("/sessions/restore", guarded([&store](const httplib::Request& req, httplib::Response& res) {
                const json body = detail::parse_body(req, ErrorCode::CorruptSnapshot);
                std::string id;
                if (body.contains("snapshot")) {
                  id = store.restore(body.at("snapshot"));
                } else if (body.contains("version")) {
                  id = store.restore(body);
                } else if (body.contains("session_id")) {
                  id = store.restore_file(body.at("session_id").get<std::string>());
                } else {
                  throw Error(ErrorCode::CorruptSnapshot, "expected a snapshot blob");
                }
                send_json(res, 200, store.get_state(id));
              }));

  server.Get(R"(/sessions/([^/]+))", guarded([&store](const httplib::Request& req, httplib::Response& res) {
               send_json(res, 200, store.get_state(req.matches[1]));
             }));

  server.Post(R"(/sessions/([^/]+)/turn)", guarded([&store](const httplib::Request& req, httplib::Response& res) {
                const Turn turn = store.next_turn(req.matches[1]);
                send_json(res, 200,
                          {{"player", turn.player + 1},
                           {"round", turn.round},
                           {"provenance", std::string(to_string(turn.provenance))}});
              }));

  server.Post(R"(/sessions/([^/]+)/score)", guarded([&store](const httplib::Request& req, httplib::Response& res) {
                const json body = detail::parse_body(req);
                const auto player = body.at("player").get<std::int64_t>();
                const double points = body.at("points").get<double>();
                if (player < 1) throw Error(ErrorCode::WrongPlayer, "players are one-based");
                send_json(res, 200, store.report_score(req.matches[1], static_cast<ArmIndex>(player - 1), points));
              }));

  server.Post(R"(/sessions/([^/]+)/snapshot)", guarded([&store](const httplib::Request& req, httplib::Response& res) {
                send_json(res, 200, store.snapshot(req.matches[1]));
              }));
}

}  // namespace fairbandit::service
