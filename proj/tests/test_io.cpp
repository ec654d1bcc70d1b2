#include <catch2/catch_amalgamated.hpp>

#include <json.hpp>

#include "qpulse/io.hpp"

using namespace qpulse;

TEST_CASE("g17 formatting round trips doubles exactly", "[io]") {
  for (double v : {0.1, -1.0 / 3.0, 2.718281828459045, 1e-300, -0.0, 0.9991234567890123}) {
    CHECK(parse_double(format_g17(v)) == v);
  }
}

TEST_CASE("csv line splitting", "[io]") {
  auto f = split_csv_line("a,b,,d");
  REQUIRE(f.size() == 4);
  CHECK(f[0] == "a");
  CHECK(f[2] == "");
  CHECK(split_csv_line("single").size() == 1);
}

TEST_CASE("json writer output parses and preserves numbers", "[io]") {
  JsonWriter w;
  w.begin_object();
  w.key("name").value("qpulse \"quoted\"\n");
  w.key("count").value(42);
  w.key("scale").value(0.1);
  w.key("flag").value(true);
  w.key("values").begin_array();
  for (double v : {1.0, -2.5, 1e-17}) w.value(v);
  w.end_array();
  w.key("nested").begin_object();
  w.key("deep").begin_array();
  w.begin_object();
  w.key("x").value(1);
  w.end_object();
  w.end_array();
  w.end_object();
  w.end_object();

  nlohmann::json j = nlohmann::json::parse(w.str());
  CHECK(j["name"] == "qpulse \"quoted\"\n");
  CHECK(j["count"] == 42);
  CHECK(j["scale"].get<double>() == 0.1);
  CHECK(j["flag"] == true);
  CHECK(j["values"].size() == 3);
  CHECK(j["values"][2].get<double>() == 1e-17);
  CHECK(j["nested"]["deep"][0]["x"] == 1);
}

TEST_CASE("fnv1a is stable", "[io]") {
  CHECK(fnv1a64("") == 14695981039346656037ull);
  CHECK(fnv1a64("a") == 12638187200555641996ull);
  CHECK(to_hex(fnv1a64("qpulse")).size() == 16);
}

TEST_CASE("file io errors carry the path", "[io]") {
  try {
    read_file("/nonexistent/q/p/file.txt");
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("/nonexistent/q/p/file.txt") != std::string::npos);
  }
}
