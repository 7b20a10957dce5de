// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The covmis Authors

#include <doctest.h>

#include <chrono>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "covmis/annotate_service.hpp"
#include "support.hpp"

using namespace covmis;
using json = nlohmann::json;

namespace {

AnnotationStore store() {
  std::vector<StancePair> pairs;
  for (int m = 0; m < 2; ++m) {
    const auto id = "m" + std::to_string(m);
    for (int t = 0; t < 2; ++t) pairs.push_back({id, id + "t" + std::to_string(t), QueryType::Title, {}, false, {}});
  }
  pairs.push_back({"m0", "fc", QueryType::FactCheckUrl, {}, false, {}});
  return AnnotationStore(auto_label(pairs), {"ann", "bob"});
}

HttpRequest get(std::string path, std::map<std::string, std::string> query = {}) {
  return {"GET", std::move(path), std::move(query), {}, ""};
}

HttpRequest post(std::string path, const json& body) { return {"POST", std::move(path), {}, {}, body.dump()}; }

json body(const HttpResponse& r) { return json::parse(r.body); }

}  // namespace

TEST_CASE("task, label, agreement and review routes") {
  AnnotationService svc(store(), TaskTexts{{{"m0", "claim zero"}}, {{"m0t0", "tweet text"}}});

  auto r = svc.handle(get("/tasks/next", {{"annotator", "ann"}}));
  CHECK(r.status == 200);
  auto j = body(r);
  CHECK(j["done"] == false);
  CHECK(j["pair_id"] == "m0:m0t0");
  CHECK(j["misinfo_text"] == "claim zero");
  CHECK(j["tweet_text"] == "tweet text");

  HttpRequest by_header = get("/tasks/next");
  by_header.headers["X-Annotator"] = "bob";
  CHECK(body(svc.handle(by_header))["pair_id"] == "m0:m0t0");
  CHECK(svc.handle(get("/tasks/next")).status == 400);
  CHECK(svc.handle(get("/tasks/next", {{"annotator", "eve"}})).status == 404);

  const std::vector<std::tuple<std::string, std::string, std::string>> labels = {
      {"ann", "m0:m0t0", "favor"},   {"ann", "m0:m0t1", "against"}, {"ann", "m1:m1t0", "neither"},
      {"ann", "m1:m1t1", "favor"},   {"bob", "m0:m0t0", "favor"},   {"bob", "m0:m0t1", "favor"},
      {"bob", "m1:m1t0", "neither"},
  };
  for (const auto& [a, p, l] : labels) {
    r = svc.handle(post("/labels", {{"annotator", a}, {"pair_id", p}, {"label", l}}));
    CHECK(r.status == 200);
  }

  r = svc.handle(get("/review/0"));
  CHECK(r.status == 409);
  j = body(r);
  CHECK(j["code"] == "batch_incomplete");
  CHECK(j["pairs"] == json::array({"m1:m1t1"}));

  CHECK(svc.handle(post("/labels", {{"annotator", "bob"}, {"pair_id", "m1:m1t1"}, {"label", "favor"}})).status == 200);
  CHECK(body(svc.handle(get("/tasks/next", {{"annotator", "bob"}})))["done"] == true);

  j = body(svc.handle(get("/agreement", {{"batch", "0"}})));
  CHECK(j["complete"] == true);
  CHECK(j["disagreements"] == 1);
  CHECK(j["unresolved"] == 1);
  CHECK(j["agreement"]["n"] == 4);
  // JSON doubles round-trip exactly.
  CHECK(j["agreement"]["kappa"].get<double>() == svc.snapshot()->agreement().kappa);

  j = body(svc.handle(get("/review/0")));
  REQUIRE(j["disagreements"].size() == 1);
  CHECK(j["disagreements"][0]["pair_id"] == "m0:m0t1");
  CHECK(j["auto_labeled"] == json::array({"m0:fc"}));

  r = svc.handle(post("/review/0/resolve", {{"pair_id", "m0:m0t0"}, {"label", "favor"}}));
  CHECK(r.status == 400);
  CHECK(body(r)["code"] == "not_disagreement");
  r = svc.handle(post("/review/0/resolve", {{"pair_id", "m0:m0t1"}, {"label", "against"}}));
  CHECK(r.status == 200);
  CHECK(body(r)["batch_resolved"] == true);
  CHECK(body(svc.handle(get("/agreement", {{"batch", "0"}})))["unresolved"] == 0);

  r = svc.handle(post("/labels", {{"annotator", "ann"}, {"pair_id", "m0:m0t0"}, {"label", "against"}}));
  CHECK(r.status == 409);
  CHECK(body(r)["code"] == "batch_frozen");
}

TEST_CASE("malformed requests get 4xx JSON errors") {
  AnnotationService svc(store(), {});
  CHECK(svc.handle(get("/nowhere")).status == 404);
  CHECK(svc.handle(get("/review/x")).status == 404);
  CHECK(svc.handle(get("/review/7")).status == 404);
  CHECK(svc.handle(get("/agreement", {{"batch", "-1"}})).status == 400);
  CHECK(svc.handle(get("/agreement", {{"batch", "3"}})).status == 404);
  CHECK(svc.handle(HttpRequest{"POST", "/labels", {}, {}, "{not json"}).status == 400);
  auto r = svc.handle(post("/labels", {{"annotator", "ann"}, {"pair_id", "m0:m0t0"}, {"label", "maybe"}}));
  CHECK(r.status == 400);
  CHECK(body(r).contains("message"));
  r = svc.handle(post("/labels", {{"annotator", "ann"}, {"pair_id", "m0:fc"}, {"label", "favor"}}));
  CHECK(r.status == 400);
  CHECK(body(svc.handle(get("/agreement")))["overall"].is_null());
  r = svc.handle(get("/guidelines"));
  CHECK(r.status == 200);
  CHECK(r.content_type.rfind("text/plain", 0) == 0);
}

TEST_CASE("accepted events are appended to the log and replay") {
  test::TempDir dir;
  const auto log = dir / "events.jsonl";
  {
    AnnotationService svc(store(), {}, log);
    svc.handle(post("/labels", {{"annotator", "ann"}, {"pair_id", "m0:m0t0"}, {"label", "favor"}}));
    svc.handle(post("/labels", {{"annotator", "ann"}, {"pair_id", "bogus"}, {"label", "favor"}}));
    svc.handle(post("/labels", {{"annotator", "bob"}, {"pair_id", "m0:m0t0"}, {"label", "neither"}}));
  }
  const auto replayed = replay_log(store(), log);
  CHECK(replayed.log().size() == 2);
  CHECK(replayed.label_of("bob", "m0:m0t0") == Label::Neither);
}

TEST_CASE("serves over a real socket") {
  AnnotationService svc(store(), {});
  std::thread th([&] { svc.serve("127.0.0.1", 0); });
  for (int i = 0; i < 500 && !svc.listening(); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(10));
  REQUIRE(svc.listening());
  const int port = svc.bound_port();
  CHECK(port > 0);

  httplib::Client cli("127.0.0.1", port);
  auto res = cli.Get("/tasks/next?annotator=ann");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(json::parse(res->body)["pair_id"] == "m0:m0t0");

  res = cli.Post("/labels", R"({"annotator":"ann","pair_id":"m0:m0t0","label":"against"})", "application/json");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(svc.snapshot()->label_of("ann", "m0:m0t0") == Label::Against);

  res = cli.Get("/tasks/next", httplib::Headers{{"X-Annotator", "ann"}});
  REQUIRE(res);
  CHECK(json::parse(res->body)["pair_id"] == "m0:m0t1");

  res = cli.Get("/agreement");
  REQUIRE(res);
  CHECK(json::parse(res->body)["progress"]["ann"]["labeled"] == 1);

  svc.stop();
  th.join();
}
