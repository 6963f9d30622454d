// Copyright 2026 The Instructkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "httplib.h"

#include "instructkit/annotate.h"
#include "instructkit/error.h"
#include "json.hpp"

namespace instructkit {
namespace {

using ordered_json = nlohmann::ordered_json;

void SendError(httplib::Response& res, int status, const std::string& message) {
  ordered_json j;
  j["error"] = message;
  res.status = status;
  res.set_content(j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace),
                  "application/json");
}

template <typename F>
httplib::Server::Handler Guarded(F fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const NotFoundError& e) {
      SendError(res, 404, e.what());
    } catch (const ConflictError& e) {
      SendError(res, 409, e.what());
    } catch (const ValidationError& e) {
      SendError(res, 400, e.what());
    } catch (const std::exception& e) {
      SendError(res, 500, e.what());
    }
  };
}

}  // namespace

struct AnnotateServer::Impl {
  AnnotationService& service;
  ServiceConfig config;
  httplib::Server server;
};

AnnotateServer::AnnotateServer(AnnotationService& service, ServiceConfig config)
    : impl_(new Impl{service, std::move(config), {}}) {
  httplib::Server& srv = impl_->server;
  AnnotationService& svc = impl_->service;
  const std::string token = impl_->config.auth_token;

  srv.set_pre_routing_handler([token](const httplib::Request& req,
                                      httplib::Response& res) {
    if (token.empty() || !StartsWith(req.path, "/api/")) {
      return httplib::Server::HandlerResponse::Unhandled;
    }
    if (req.get_header_value("Authorization") != "Bearer " + token) {
      SendError(res, 401, "missing or wrong bearer token");
      return httplib::Server::HandlerResponse::Handled;
    }
    return httplib::Server::HandlerResponse::Unhandled;
  });

  srv.Get("/api/campaign", Guarded([&svc](const httplib::Request&,
                                           httplib::Response& res) {
            res.set_content(svc.CampaignJson(), "application/json");
          }));

  srv.Get("/api/next", Guarded([&svc](const httplib::Request& req,
                                       httplib::Response& res) {
            if (!req.has_param("annotator")) {
              throw ValidationError("query parameter 'annotator' is required");
            }
            auto item = svc.NextItemJson(req.get_param_value("annotator"));
            res.set_content(item ? *item : R"({"done":true,"remaining":0})",
                            "application/json");
          }));

  srv.Post("/api/annotations", Guarded([&svc](const httplib::Request& req,
                                               httplib::Response& res) {
             ordered_json j = ordered_json::parse(req.body, nullptr, false);
             if (j.is_discarded() || !j.is_object()) {
               throw ValidationError("body must be a JSON object");
             }
             auto field = [&](const char* key) {
               if (!j.contains(key) || !j[key].is_string()) {
                 throw ValidationError(std::string("'") + key +
                                       "' must be a string");
               }
               return j[key].get<std::string>();
             };
             if (!j.contains("labels") || !j["labels"].is_object()) {
               throw ValidationError("'labels' must be an object");
             }
             std::map<std::string, std::string> labels;
             for (auto it = j["labels"].begin(); it != j["labels"].end(); ++it) {
               if (!it.value().is_string()) {
                 throw ValidationError("dimension '" + it.key() +
                                       "': label must be a string");
               }
               labels[it.key()] = it.value().get<std::string>();
             }
             res.set_content(svc.Submit(field("annotator_id"), field("item_id"),
                                        field("blinded_key"), labels),
                             "application/json");
           }));

  srv.Get("/api/progress", Guarded([&svc](const httplib::Request&,
                                           httplib::Response& res) {
            res.set_content(svc.ProgressJson(), "application/json");
          }));

  srv.Get("/api/export", Guarded([&svc](const httplib::Request&,
                                         httplib::Response& res) {
            res.set_content(svc.ExportJsonl(), "text/jsonl");
          }));

  if (!impl_->config.static_dir.empty()) {
    if (!srv.set_mount_point("/", impl_->config.static_dir.string())) {
      throw ConfigError("static_dir " + impl_->config.static_dir.string() +
                        " is not a directory");
    }
  }
}

AnnotateServer::~AnnotateServer() { Stop(); }

int AnnotateServer::Bind() {
  const ServiceConfig& c = impl_->config;
  if (c.port == 0) {
    int port = impl_->server.bind_to_any_port(c.bind_address);
    if (port < 0) throw IoError(c.bind_address, "cannot bind");
    return port;
  }
  if (!impl_->server.bind_to_port(c.bind_address, c.port)) {
    throw IoError(c.bind_address + ":" + std::to_string(c.port), "cannot bind");
  }
  return c.port;
}

void AnnotateServer::Serve() { impl_->server.listen_after_bind(); }

void AnnotateServer::Stop() { impl_->server.stop(); }

}  // namespace instructkit
