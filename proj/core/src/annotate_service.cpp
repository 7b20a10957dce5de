// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The covmis Authors

#include "covmis/annotate_service.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <fstream>

#include <httplib.h>
#include <json.hpp>

namespace covmis {

using json = nlohmann::json;

class AnnotationService::Server {
 public:
  httplib::Server http;
  std::atomic<int> port{0};
};

namespace {

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

HttpResponse json_response(int status, const json& body) {
  return HttpResponse{status, body.dump(), "application/json"};
}

HttpResponse error_response(int status, std::string_view code, const std::string& message,
                            const std::vector<std::string>& details = {}) {
  json j{{"code", code}, {"message", message}};
  if (!details.empty()) j["pairs"] = details;
  return json_response(status, j);
}

int status_for(AnnotationError::Code code) {
  using C = AnnotationError::Code;
  switch (code) {
    case C::UnknownAnnotator:
    case C::UnknownPair:
    case C::NoSuchBatch: return 404;
    case C::NotAssigned:
    case C::NotDisagreement: return 400;
    case C::BatchFrozen:
    case C::BatchIncomplete:
    case C::NoData: return 409;
  }
  return 400;
}

std::optional<std::size_t> parse_index(std::string_view s) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

json report_json(const AgreementReport& r) {
  json confusion = json::array();
  for (const auto& row : r.confusion) confusion.push_back(row);
  return json{{"n", r.n},
              {"observed", r.observed},
              {"expected", r.expected},
              {"kappa", r.kappa},
              {"degenerate", r.degenerate},
              {"confusion", confusion}};
}

std::string annotator_of(const HttpRequest& req, const json* body) {
  if (body && body->contains("annotator") && (*body)["annotator"].is_string()) {
    return (*body)["annotator"].get<std::string>();
  }
  if (auto it = req.query.find("annotator"); it != req.query.end()) return it->second;
  for (const auto& [k, v] : req.headers) {
    std::string lower = k;
    for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (lower == "x-annotator") return v;
  }
  return {};
}

}  // namespace

AnnotationService::AnnotationService(AnnotationStore store, TaskTexts texts,
                                     std::optional<std::filesystem::path> log_path)
    : state_(std::make_shared<const AnnotationStore>(std::move(store))),
      texts_(std::move(texts)),
      log_path_(std::move(log_path)),
      server_(std::make_unique<Server>()) {}

AnnotationService::~AnnotationService() { stop(); }

std::shared_ptr<const AnnotationStore> AnnotationService::snapshot() const {
  return std::atomic_load(&state_);
}

template <typename Fn>
void AnnotationService::write(Fn&& fn) {
  std::lock_guard lock(write_mutex_);
  auto next = std::make_shared<AnnotationStore>(*std::atomic_load(&state_));
  const std::size_t before = next->log().size();
  fn(*next);
  if (log_path_) {
    std::ofstream out(*log_path_, std::ios::app | std::ios::binary);
    for (std::size_t i = before; i < next->log().size(); ++i) out << to_json_line(next->log()[i]) << '\n';
  }
  std::atomic_store(&state_, std::shared_ptr<const AnnotationStore>(std::move(next)));
}

HttpResponse AnnotationService::handle(const HttpRequest& req) {
  try {
    const std::string& p = req.path;
    if (req.method == "GET" && p == "/tasks/next") return next_task(req);
    if (req.method == "POST" && p == "/labels") return post_label(req);
    if (req.method == "GET" && p == "/agreement") return agreement(req);
    if (req.method == "GET" && p == "/guidelines") {
      return HttpResponse{200, std::string(annotation_guidelines()), "text/plain; charset=utf-8"};
    }
    if (p.rfind("/review/", 0) == 0) {
      std::string_view rest(p);
      rest.remove_prefix(8);
      const bool is_resolve = rest.size() > 8 && rest.substr(rest.size() - 8) == "/resolve";
      if (is_resolve) rest.remove_suffix(8);
      const auto k = parse_index(rest);
      if (!k) return error_response(404, "not_found", "no route for " + p);
      if (req.method == "GET" && !is_resolve) return review(*k);
      if (req.method == "POST" && is_resolve) return resolve(*k, req);
    }
    return error_response(404, "not_found", "no route for " + req.method + " " + p);
  } catch (const AnnotationError& e) {
    return error_response(status_for(e.code()), to_string(e.code()), e.what(), e.details());
  } catch (const json::exception& e) {
    return error_response(400, "bad_request", e.what());
  } catch (const DataError& e) {
    return error_response(400, "bad_request", e.what());
  } catch (const std::exception& e) {
    return error_response(500, "internal", e.what());
  }
}

HttpResponse AnnotationService::next_task(const HttpRequest& req) {
  const auto annotator = annotator_of(req, nullptr);
  if (annotator.empty()) return error_response(400, "bad_request", "missing annotator");
  const auto state = snapshot();
  const auto task = state->next_task(annotator);
  if (!task) return json_response(200, json{{"done", true}});
  const auto& pair = state->pair(*task);
  json j{{"done", false},
         {"pair_id", *task},
         {"misinfo_id", pair.misinfo_id},
         {"tweet_id", pair.tweet_id},
         {"query_type", to_string(pair.query_type)},
         {"batch", state->batch_of(*task)}};
  auto m = texts_.misinfo.find(pair.misinfo_id);
  j["misinfo_text"] = m == texts_.misinfo.end() ? json(nullptr) : json(m->second);
  auto t = texts_.tweets.find(pair.tweet_id);
  j["tweet_text"] = t == texts_.tweets.end() ? json(nullptr) : json(t->second);
  return json_response(200, j);
}

HttpResponse AnnotationService::post_label(const HttpRequest& req) {
  const json body = json::parse(req.body);
  const auto annotator = annotator_of(req, &body);
  if (annotator.empty()) return error_response(400, "bad_request", "missing annotator");
  const auto pair_id = body.at("pair_id").get<std::string>();
  const auto label = parse_label(body.at("label").get<std::string>());
  write([&](AnnotationStore& s) { s.submit_label(annotator, pair_id, label, now_ms()); });
  return json_response(200, json{{"ok", true}, {"pair_id", pair_id}, {"label", to_string(label)}});
}

HttpResponse AnnotationService::agreement(const HttpRequest& req) {
  const auto state = snapshot();
  auto batch_summary = [&](std::size_t k) {
    json j{{"batch", k},
           {"complete", state->batch_complete(k)},
           {"resolved", state->batch_resolved(k)}};
    try {
      j["agreement"] = report_json(state->agreement(k));
    } catch (const AnnotationError&) {
      j["agreement"] = nullptr;
    }
    if (state->batch_complete(k)) {
      const auto rb = state->review_batch(k);
      std::size_t open = 0;
      for (const auto& d : rb.disagreements) open += d.resolution ? 0 : 1;
      j["disagreements"] = rb.disagreements.size();
      j["unresolved"] = open;
    } else {
      j["disagreements"] = nullptr;
      j["unresolved"] = nullptr;
    }
    json progress = json::object();
    for (const auto& a : state->annotators()) {
      const auto pr = state->progress(a, k);
      progress[a] = {{"labeled", pr.labeled}, {"total", pr.total}};
    }
    j["progress"] = progress;
    return j;
  };

  if (auto it = req.query.find("batch"); it != req.query.end()) {
    const auto k = parse_index(it->second);
    if (!k) return error_response(400, "bad_request", "batch must be a non-negative integer");
    if (*k >= state->batch_count()) {
      return error_response(404, "no_such_batch", "no batch " + it->second);
    }
    return json_response(200, batch_summary(*k));
  }

  json j;
  try {
    j["overall"] = report_json(state->agreement());
  } catch (const AnnotationError&) {
    j["overall"] = nullptr;
  }
  json batches = json::array();
  for (std::size_t k = 0; k < state->batch_count(); ++k) batches.push_back(batch_summary(k));
  j["batches"] = batches;
  json progress = json::object();
  for (const auto& a : state->annotators()) {
    const auto pr = state->progress(a);
    progress[a] = {{"labeled", pr.labeled}, {"total", pr.total}};
  }
  j["progress"] = progress;
  return json_response(200, j);
}

HttpResponse AnnotationService::review(std::size_t batch) {
  const auto state = snapshot();
  const auto rb = state->review_batch(batch);
  json dis = json::array();
  for (const auto& d : rb.disagreements) {
    dis.push_back({{"pair_id", d.pair_id},
                   {"labels",
                    {{state->annotators()[0], to_string(d.labels[0])},
                     {state->annotators()[1], to_string(d.labels[1])}}},
                   {"resolution", d.resolution ? json(to_string(*d.resolution)) : json(nullptr)},
                   {"escalated", d.escalated}});
  }
  return json_response(200, json{{"batch", rb.index},
                                 {"items", rb.items},
                                 {"auto_labeled", rb.auto_labeled},
                                 {"disagreements", dis},
                                 {"resolved", rb.resolved}});
}

HttpResponse AnnotationService::resolve(std::size_t batch, const HttpRequest& req) {
  const json body = json::parse(req.body);
  const auto pair_id = body.at("pair_id").get<std::string>();
  const auto label = parse_label(body.at("label").get<std::string>());
  const bool escalated = body.value("escalated", false);
  write([&](AnnotationStore& s) { s.resolve(batch, pair_id, label, escalated, now_ms()); });
  const auto state = snapshot();
  return json_response(200, json{{"ok", true},
                                 {"pair_id", pair_id},
                                 {"label", to_string(label)},
                                 {"batch_resolved", state->batch_resolved(batch)}});
}

void AnnotationService::serve(const std::string& host, int port) {
  auto& http = server_->http;
  auto adapt = [this](const httplib::Request& in, httplib::Response& out) {
    HttpRequest req;
    req.method = in.method;
    req.path = in.path;
    for (const auto& [k, v] : in.params) req.query.emplace(k, v);
    for (const auto& [k, v] : in.headers) req.headers.emplace(k, v);
    req.body = in.body;
    const auto res = handle(req);
    out.status = res.status;
    out.set_content(res.body, res.content_type);
  };
  http.Get(".*", adapt);
  http.Post(".*", adapt);
  const int bound = port == 0 ? http.bind_to_any_port(host) : (http.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  server_->port = bound;
  http.listen_after_bind();
}

void AnnotationService::stop() {
  if (server_) server_->http.stop();
}

bool AnnotationService::listening() const { return server_ && server_->http.is_running(); }

int AnnotationService::bound_port() const { return server_ ? server_->port.load() : 0; }

AnnotationStore replay_log(AnnotationStore store, const std::filesystem::path& log_path) {
  std::ifstream in(log_path);
  if (!in) return store;
  for (const auto& e : parse_events(in, log_path.string())) store.apply(e);
  return store;
}

}  // namespace covmis
