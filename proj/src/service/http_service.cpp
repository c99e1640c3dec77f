#include "httplib.h"

#include "pambench/errors.hpp"
#include "pambench/json_io.hpp"
#include "pambench/service.hpp"
#include "pambench/util.hpp"

namespace pambench {
namespace fs = std::filesystem;

namespace {

void send_json(httplib::Response& res, const Json& j, int status = 200) {
  res.status = status;
  res.set_content(j.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& cls, const std::string& msg) {
  send_json(res, {{"error", cls}, {"message", msg}}, status);
}

Json cell_json(const ScoreCell& c) {
  return {{"label", c.label},
          {"n", c.n},
          {"correct", c.correct},
          {"accuracy_pct", 100.0 * c.p_hat()},
          {"se_pct", 100.0 * c.se()},
          {"display", c.format()}};
}

// Maps library errors onto status codes; anything else is a 500.
template <typename F>
void guarded(httplib::Response& res, F&& f) {
  try {
    f();
  } catch (const UnknownSession& e) {
    send_error(res, 404, "UnknownSession", e.what());
  } catch (const SessionComplete& e) {
    send_error(res, 409, "SessionComplete", e.what());
  } catch (const StaleTrial& e) {
    send_error(res, 409, "StaleTrial", e.what());
  } catch (const InvalidAnswer& e) {
    send_error(res, 400, "InvalidAnswer", e.what());
  } catch (const InvalidParams& e) {
    send_error(res, 400, "InvalidParams", e.what());
  } catch (const SchemaError& e) {
    send_error(res, 400, "SchemaError", e.what());
  } catch (const NoData& e) {
    send_error(res, 404, "NoData", e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, "InternalError", e.what());
  }
}

Json body_json(const httplib::Request& req) {
  Json j = parse_json_text(req.body, "request body");
  if (!j.is_object()) throw SchemaError("request body", "", "expected a JSON object");
  return j;
}

}  // namespace

struct HttpService::Impl {
  SessionStore& store;
  httplib::Server srv;
  explicit Impl(SessionStore& s) : store(s) {}
};

HttpService::HttpService(SessionStore& store, std::optional<fs::path> ui_dir) : impl_(std::make_unique<Impl>(store)) {
  auto& srv = impl_->srv;
  SessionStore* st = &store;

  srv.Get("/api/datasets", [st](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { send_json(res, {{"datasets", st->dataset_names()}}); });
  });

  srv.Post("/api/sessions", [st](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const Json b = body_json(req);
      const std::string subject = require_string(b, "subject", "request body");
      const std::string dataset = require_string(b, "dataset", "request body");
      const std::uint64_t seed = b.contains("seed") ? require_uint(b, "seed", "request body") : 0;
      send_json(res, {{"session_id", st->create(subject, dataset, seed)}}, 201);
    });
  });

  srv.Get(R"(/api/sessions/([A-Za-z0-9_-]+))", [st](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const Session s = st->get(req.matches[1]);
      send_json(res, {{"session_id", s.id},
                      {"subject", s.subject},
                      {"dataset", s.dataset},
                      {"progress", s.cursor},
                      {"total", s.queue.size()},
                      {"status", s.complete() ? "complete" : "active"}});
    });
  });

  srv.Get(R"(/api/sessions/([A-Za-z0-9_-]+)/next)", [st](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const TrialPayload p = st->next(req.matches[1]);
      send_json(res, {{"trial_ref", p.trial_ref},
                      {"trial_number", p.trial_number},
                      {"total", p.total},
                      {"instruction", p.instruction},
                      {"frames", p.frame_urls},
                      {"possible_answers", p.possible_answers}});
    });
  });

  srv.Post(R"(/api/sessions/([A-Za-z0-9_-]+)/answers)", [st](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const Json b = body_json(req);
      const SubmitAck ack = st->submit(req.matches[1], require_string(b, "trial_ref", "request body"),
                                       require_string(b, "answer", "request body"),
                                       require_int(b, "rt_ms", "request body"));
      send_json(res, {{"ok", ack.ok}, {"progress", ack.progress}, {"total", ack.total}, {"complete", ack.complete}});
    });
  });

  srv.Get(R"(/api/sessions/([A-Za-z0-9_-]+)/report)", [st](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const std::string id = req.matches[1];
      st->get(id);  // UnknownSession
      const ScoreTable t = session_report({st->log_path(id)}, true);
      Json groups = Json::array(), tasks = Json::array();
      for (const auto& c : t.groups) groups.push_back(cell_json(c));
      for (const auto& c : t.tasks) tasks.push_back(cell_json(c));
      send_json(res, {{"groups", std::move(groups)}, {"tasks", std::move(tasks)}});
    });
  });

  srv.Get(R"(/api/frames/(.+)/(\d+))", [st](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto path = st->frame_file(req.matches[1], std::stoul(req.matches[2]));
      if (!path) {
        send_error(res, 404, "NotFound", "no such frame");
        return;
      }
      const auto bytes = read_file_bytes(*path);
      res.set_content(std::string(bytes.begin(), bytes.end()), "image/png");
    });
  });

  if (ui_dir && fs::is_directory(*ui_dir)) srv.set_mount_point("/", ui_dir->string());
}

HttpService::~HttpService() = default;

int HttpService::bind(const std::string& host, int port) {
  if (port == 0) return impl_->srv.bind_to_any_port(host);
  if (!impl_->srv.bind_to_port(host, port)) throw IoError("cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void HttpService::listen() { impl_->srv.listen_after_bind(); }

void HttpService::stop() { impl_->srv.stop(); }

}  // namespace pambench
