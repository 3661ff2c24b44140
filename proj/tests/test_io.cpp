#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "support.hpp"

using namespace rigidity;

namespace {

const char* kTriangle = R"({
  "dimension": 2,
  "vertices": [
    {"id": "A", "coords": [0, 0], "pinned": true},
    {"id": "B", "coords": [1, 0], "pinned": true},
    {"id": "C", "coords": [0.5, 0.8], "pinned": false}
  ],
  "edges": [{"u": "A", "v": "C"}, {"u": "B", "v": "C", "length": 0.9433981132056603}]
})";

std::vector<ViolationKind> kinds_of(const std::string& text) {
  try {
    parse_framework_json(text);
  } catch (const ValidationError& e) {
    std::vector<ViolationKind> out;
    for (const auto& v : e.violations()) out.push_back(v.kind);
    return out;
  }
  return {};
}

}  // namespace

TEST(ParseFramework, AcceptsSchema) {
  const auto f = parse_framework_json(kTriangle);
  EXPECT_EQ(f.vertex_count(), 3);
  EXPECT_EQ(f.edge_count(), 2);
  EXPECT_EQ(f.free_coordinate_count(), 2);
  EXPECT_NEAR(f.edges()[0].length, std::sqrt(0.25 + 0.64), 1e-15);
}

TEST(ParseFramework, RejectsUnknownKeys) {
  std::string text = kTriangle;
  text.replace(text.find("\"pinned\": false"), 15, "\"pinned\": false, \"mass\": 1");
  try {
    parse_framework_json(text);
    FAIL();
  } catch (const ValidationError& e) {
    ASSERT_EQ(e.violations().size(), 1u);
    EXPECT_EQ(e.violations()[0].kind, ViolationKind::schema);
    EXPECT_NE(e.violations()[0].message.find("'mass'"), std::string::npos);
  }
  EXPECT_EQ(kinds_of(R"({"dimension": 2, "vertices": [], "edges": [], "name": "x"})").front(), ViolationKind::schema);
}

TEST(ParseFramework, MalformedJsonIsSchemaViolation) {
  EXPECT_EQ(kinds_of("{\"dimension\": 2,"), std::vector<ViolationKind>{ViolationKind::schema});
  EXPECT_EQ(kinds_of("[1, 2]"), std::vector<ViolationKind>{ViolationKind::schema});
}

TEST(ParseFramework, CollectsEveryViolation) {
  const auto kinds = kinds_of(R"({
    "dimension": 4,
    "vertices": [{"id": "A", "coords": ["x"], "pinned": 1}],
    "edges": [{"u": 3, "v": "A"}, {"u": "A", "v": "B", "length": "one"}]
  })");
  // dimension, coords, pinned, edge 0 "u", edge 1 "length"
  EXPECT_EQ(kinds.size(), 5u);
  for (auto k : kinds) EXPECT_EQ(k, ViolationKind::schema);
}

TEST(ParseFramework, StructuralViolationsAfterSchema) {
  const auto kinds = kinds_of(R"({
    "dimension": 2,
    "vertices": [{"id": "A", "coords": [0, 0], "pinned": true}, {"id": "A", "coords": [1, 0], "pinned": false},
                 {"id": "B", "coords": [0, 1], "pinned": false}],
    "edges": [{"u": "A", "v": "A"}, {"u": "A", "v": "Z"}, {"u": "A", "v": "B", "length": -1}]
  })");
  auto has = [&](ViolationKind k) { return std::find(kinds.begin(), kinds.end(), k) != kinds.end(); };
  EXPECT_TRUE(has(ViolationKind::duplicate_vertex));
  EXPECT_TRUE(has(ViolationKind::self_loop));
  EXPECT_TRUE(has(ViolationKind::dangling_vertex));
  EXPECT_TRUE(has(ViolationKind::nonpositive_length));
}

TEST(LoadFramework, MissingFileIsIoError) {
  EXPECT_THROW(load_framework("/nonexistent/framework.json"), IoError);
}

TEST(LoadFramework, ShippedFixturesMatchBuilders) {
  const std::string dir = RIGIDITY_DATA_DIR;
  const std::pair<const char*, Framework> cases[] = {
      {"triangle.json", make_triangle()},
      {"collinear_chain.json", make_collinear_chain()},
      {"fourbar.json", make_fourbar()},
      {"double_watt.json", make_double_watt()},
      {"double_watt_unit.json", make_double_watt(1.0)},
  };
  for (const auto& [file, expected] : cases) {
    const auto f = load_framework(dir + "/" + file);
    EXPECT_EQ(dump_json(framework_to_json(f)), dump_json(framework_to_json(expected))) << file;
  }
}

// Property: writing and re-reading a framework is lossless.
TEST(FrameworkJsonProperty, RoundTrip) {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = trial % 2 ? 3 : 2;
    const auto f = testing_support::random_framework(rng, d, 4 + trial % 5);
    const std::string text = dump_json(framework_to_json(f));
    const auto g = parse_framework_json(text);
    EXPECT_EQ(dump_json(framework_to_json(g)), text);
    EXPECT_EQ(g.rest().values(), f.rest().values());
    for (Eigen::Index e = 0; e < f.edge_count(); ++e)
      EXPECT_EQ(g.edges()[static_cast<std::size_t>(e)].length, f.edges()[static_cast<std::size_t>(e)].length);
  }
}

TEST(DumpJson, Format) {
  Json j;
  j["x"] = 0.1;
  j["n"] = 3;
  j["bad"] = std::numeric_limits<double>::quiet_NaN();
  j["list"] = Json::array({1.5, true, "s"});
  j["empty"] = Json::object();
  EXPECT_EQ(dump_json(j, 0), R"({"x":0.10000000000000001,"n":3,"bad":null,"list":[1.5,true,"s"],"empty":{}})");
  EXPECT_EQ(dump_json(Json::array({1, 2})), "[\n  1,\n  2\n]");
  EXPECT_EQ(Json::parse(dump_json(j))["x"].get<double>(), 0.1);
}
