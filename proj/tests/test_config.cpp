#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "coupled_hover/config.hpp"

using namespace coupled_hover;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

const std::string kReferencePath = std::string(COUPLED_HOVER_CONFIG_DIR) + "/reference_platform.cfg";

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  EXPECT_NE(pos, std::string::npos) << from;
  return text.replace(pos, from.size(), to);
}

void expect_same(const RunConfig& a, const RunConfig& b) {
  EXPECT_EQ(config_to_json(a), config_to_json(b));
  EXPECT_EQ(a.platform.mass, b.platform.mass);
  EXPECT_EQ(a.platform.spurious_alloc, b.platform.spurious_alloc);
  EXPECT_EQ(a.reference.R_r.matrix(), b.reference.R_r.matrix());
  EXPECT_EQ(a.initial.R.matrix(), b.initial.R.matrix());
  EXPECT_EQ(a.auto_c1, b.auto_c1);
  EXPECT_EQ(a.auto_c2, b.auto_c2);
  EXPECT_EQ(a.seed, b.seed);
}

}  // namespace

TEST(LoadConfig, ReferencePlatform) {
  const RunConfig c = load_config(kReferencePath);
  EXPECT_EQ(classify(c.platform).label(), "PC-D1");
  EXPECT_EQ(c.platform.inertia, Vec3(0.01, 0.01, 0.02).asDiagonal().toDenseMatrix());
  EXPECT_EQ(c.platform.spurious_alloc(0, 2), 0.05);
  EXPECT_TRUE(c.auto_c1);
  EXPECT_TRUE(c.auto_c2);
  EXPECT_EQ(c.gains.k_R, 0.5);
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.search.k_p.count, 7);
  EXPECT_NEAR((c.initial.p - Vec3(0.05, -0.03, 1.02)).norm(), 0.0, 1e-15);
  EXPECT_NEAR(log_so3(c.initial.R).norm(), 0.1, 1e-14);
  const GainSet g = c.resolved_gains();
  EXPECT_GT(g.c1, 0.0);
  EXPECT_GT(g.c2, 0.0);
}

TEST(LoadConfig, DecoupledAndJsonVariants) {
  const RunConfig d = load_config(std::string(COUPLED_HOVER_CONFIG_DIR) + "/decoupled.cfg");
  EXPECT_EQ(spurious_gain(d.platform), 0.0);
  const RunConfig j = load_config(std::string(COUPLED_HOVER_CONFIG_DIR) + "/reference_platform.json");
  expect_same(j, load_config(kReferencePath));
}

TEST(LoadConfig, MissingFile) {
  try {
    load_config("/nonexistent/run.cfg");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParseError);
  }
}

TEST(ParseConfig, NegativeMassNamesFieldAndLine) {
  const std::string text = replace(read_file(kReferencePath), "mass: 1.0", "mass: -1.0");
  try {
    parse_config(text, false);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "platform.mass");
    EXPECT_NE(e.reason().find("(line 4)"), std::string::npos) << e.what();
  }
}

TEST(ParseConfig, ImproperAttitudeMatrix) {
  const std::string text = replace(read_file(kReferencePath), "attitude: {axis: [0, 0, 1], angle: 0.0}",
                                   "attitude: {matrix: [[1, 0, 0], [0, 1, 0], [0, 0, -1]]}");
  try {
    parse_config(text, false);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "reference.attitude.matrix");
  }
}

TEST(ParseConfig, RejectsUnknownField) {
  const std::string text = replace(read_file(kReferencePath), "k_Omega: 0.1", "k_Omega: 0.1\n  k_i: 1.0");
  try {
    parse_config(text, false);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "gains.k_i");
  }
}

TEST(ParseConfig, MissingSectionAndBadValues) {
  EXPECT_THROW(parse_config(R"({"gains": {}})", true), ValidationError);
  const std::string base = read_file(kReferencePath);
  EXPECT_THROW(parse_config(replace(base, "format: csv", "format: hdf5"), false), ValidationError);
  EXPECT_THROW(parse_config(replace(base, "step: 0.001", "step: 0"), false), ValidationError);
  EXPECT_THROW(parse_config(replace(base, "psi: 0.05", "psi: 2.5"), false), ValidationError);
  EXPECT_THROW(parse_config(replace(base, "k_p: 4.0", "k_p: fast"), false), ValidationError);
  EXPECT_THROW(parse_config(replace(base, "- [0, 0, 0.04]", "- [0, 0, 0]"), false),
               ValidationError);
}

TEST(ParseConfig, SyntaxErrorsAreParseErrors) {
  for (const auto& [text, json] : std::vector<std::pair<std::string, bool>>{
           {"{\"platform\": ", true}, {"platform: [1, 2", false}, {"[1, 2, 3]", true}}) {
    try {
      parse_config(text, json);
      FAIL() << text;
    } catch (const ValidationError&) {
      FAIL() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kParseError) << text;
    }
  }
}

TEST(RoundTrip, JsonIsFieldIdentical) {
  const RunConfig a = load_config(kReferencePath);
  const RunConfig b = parse_config(config_to_json(a).dump(), true);
  expect_same(a, b);
  EXPECT_EQ(config_to_json(b).dump(), config_to_json(a).dump());
}

TEST(RoundTrip, YamlIsFieldIdentical) {
  for (const char* name : {"/reference_platform.cfg", "/decoupled.cfg"}) {
    const RunConfig a = load_config(std::string(COUPLED_HOVER_CONFIG_DIR) + name);
    const RunConfig b = parse_config(config_to_yaml(a), false);
    expect_same(a, b);
    expect_same(b, parse_config(config_to_yaml(b), false));
  }
}

TEST(RoundTrip, ExplicitCrossWeightsSurvive) {
  RunConfig a = load_config(kReferencePath);
  a.auto_c1 = false;
  a.gains.c1 = 0.123456789012345;
  const RunConfig b = parse_config(config_to_yaml(a), false);
  EXPECT_FALSE(b.auto_c1);
  EXPECT_TRUE(b.auto_c2);
  EXPECT_EQ(b.gains.c1, a.gains.c1);
  EXPECT_EQ(b.resolved_gains().c1, a.gains.c1);
}
