#include "doctest.h"
#include "helpers.hpp"
#include "hwnet/error.hpp"

using namespace hwnet;
using nlohmann::json;

namespace {

json n_doc() {
  return json::parse(R"({"classes": 2, "pools": 2, "edges": [[1,1],[2,1],[1,2]],
    "lambda": [1.5, 0.5], "mu": {"1-1": 1, "2-1": 1, "1-2": 2}, "nu": [1, 0.5], "nu_hat": [1, 0]})");
}

ErrorCode parse_error(const json& doc) {
  try {
    parse_config(doc);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("parsed");
  return ErrorCode::Inconsistent;
}

}  // namespace

TEST_CASE("config parsing maps 1-based labels") {
  const NetworkConfig cfg = parse_config(n_doc());
  CHECK(cfg.topology.classes() == 2);
  CHECK(cfg.params.mu[*cfg.topology.edge_index(0, 1)] == 2.0);
  CHECK(cfg.params.nu_hat[0] == 1.0);
  CHECK(cfg.params.lambda_hat.isZero());
  CHECK(cfg.digest.size() == 16);
}

TEST_CASE("round trip keeps the digest") {
  const NetworkConfig a = parse_config(n_doc());
  const NetworkConfig b = parse_config(to_json(a));
  CHECK(a.digest == b.digest);
  CHECK(a.params.mu == b.params.mu);
  CHECK(a.digest == testing::config("n_network").digest);

  json changed = n_doc();
  changed["lambda"][0] = 1.25;
  CHECK(parse_config(changed).digest != a.digest);
}

TEST_CASE("fnv1a reference values") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}

TEST_CASE("config errors") {
  json d = n_doc();
  d.erase("lambda");
  CHECK(parse_error(d) == ErrorCode::InvalidInput);
  d = n_doc();
  d["mu"].erase("1-2");
  CHECK(parse_error(d) == ErrorCode::InvalidInput);
  d = n_doc();
  d["mu"]["2-2"] = 1.0;
  CHECK(parse_error(d) == ErrorCode::InvalidInput);
  d = n_doc();
  d["nu"] = {1.0};
  CHECK(parse_error(d) == ErrorCode::InvalidInput);
  d = n_doc();
  d["edges"].push_back({2, 2});
  CHECK(parse_error(d) == ErrorCode::NotATree);
  d = n_doc();
  d["mu"]["1-1"] = -1.0;
  CHECK(parse_error(d) == ErrorCode::InvalidInput);
  d = n_doc();
  d["classes"] = "two";
  CHECK(parse_error(d) == ErrorCode::InvalidInput);
  CHECK_THROWS_AS(load_config("/nonexistent.json"), Error);
}

TEST_CASE("all shipped configs load") {
  for (const char* name : {"n_network", "n_network_transient", "star3", "v_model", "general_tree"})
    CHECK_NOTHROW(testing::statics(name));
}
