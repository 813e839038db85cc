#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "qlab/cli/checks.hpp"
#include "qlab/cli/config.hpp"
#include "qlab/cli/output.hpp"

using namespace qlab::cli;

TEST(Config, DefaultsAndOverrides) {
  std::istringstream in("# comment\nscenario = gaussian_packet\nsigma = 0.5  # trailing\nstates = gaussian, sech\n");
  ScenarioConfig c = ScenarioConfig::parse(in);
  EXPECT_EQ(c.str("scenario"), "gaussian_packet");
  EXPECT_DOUBLE_EQ(c.num("sigma"), 0.5);
  EXPECT_DOUBLE_EQ(c.num("hbar"), 1.0);
  EXPECT_EQ(c.count("n"), 1001u);
  EXPECT_EQ(c.list("states"), (std::vector<std::string>{"gaussian", "sech"}));
}

TEST(Config, UnknownKeyIsNamed) {
  std::istringstream in("hbarr = 2\n");
  try {
    ScenarioConfig::parse(in);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("hbarr"), std::string::npos);
  }
}

TEST(Config, BadValuesRejected) {
  ScenarioConfig c;
  c.set("n", "-3");
  EXPECT_THROW(c.count("n"), ConfigError);
  c.set("sigma", "abc");
  EXPECT_THROW(c.num("sigma"), ConfigError);
  std::istringstream in("no equals sign\n");
  EXPECT_THROW(ScenarioConfig::parse(in), ConfigError);
}

TEST(Output, CsvUsesShortestRoundTrip) {
  std::string s = format_csv({"x", "label"}, {{0.1, std::string("a")}, {1.0 / 3.0, std::string("b")}});
  EXPECT_EQ(s, "x,label\n0.1,a\n0.3333333333333333,b\n");
}

TEST(Output, AtomicWriteLeavesNoTemporary) {
  std::filesystem::path dir = std::filesystem::temp_directory_path() / "qlab_test_atomic";
  std::filesystem::create_directories(dir);
  write_atomic(dir / "a.txt", "hello\n");
  EXPECT_TRUE(std::filesystem::exists(dir / "a.txt"));
  EXPECT_FALSE(std::filesystem::exists(dir / "a.txt.tmp"));
  std::ifstream f(dir / "a.txt");
  std::string line;
  std::getline(f, line);
  EXPECT_EQ(line, "hello");
  std::filesystem::remove_all(dir);
}

TEST(Checks, RegistryHasSeventeenUniqueIds) {
  const auto& reg = check_registry();
  ASSERT_EQ(reg.size(), 17u);
  std::set<std::string> ids;
  for (const CheckSpec& s : reg) {
    ids.insert(s.id);
    EXPECT_GT(s.tolerance, 0.0);
  }
  EXPECT_EQ(ids.size(), 17u);
  EXPECT_EQ(reg.front().id, "c01");
  EXPECT_EQ(reg.back().id, "c17");
}

TEST(Checks, FilterMatchesIdOrName) {
  std::vector<std::string> hit;
  for (const CheckSpec& s : check_registry())
    if (matches_filter(s, "weyl")) hit.push_back(s.id);
  EXPECT_EQ(hit, (std::vector<std::string>{"c04", "c05"}));
  EXPECT_TRUE(matches_filter(check_registry()[2], ""));
  EXPECT_TRUE(matches_filter(check_registry()[2], "c03"));
}

TEST(Checks, EnvironmentOverridesTolerance) {
  const CheckSpec& s = check_registry().front();
  unsetenv("QLAB_TOL_C01");
  EXPECT_DOUBLE_EQ(effective_tolerance(s), s.tolerance);
  setenv("QLAB_TOL_C01", "1e-3", 1);
  EXPECT_DOUBLE_EQ(effective_tolerance(s), 1e-3);
  unsetenv("QLAB_TOL_C01");
}

TEST(Checks, ConditionDirections) {
  EXPECT_TRUE((Condition{"a", 1.0, 2.0, true}).passed());
  EXPECT_FALSE((Condition{"a", 2.0, 2.0, true}).passed());
  EXPECT_TRUE((Condition{"a", 3.0, 2.0, false}).passed());
  CheckResult r;
  r.conditions.push_back({"a", 1.0, 2.0, true});
  r.budget_s = 1.0;
  r.seconds = 2.0;
  EXPECT_FALSE(r.passed());
  r.seconds = 0.5;
  EXPECT_TRUE(r.passed());
  r.error = "boom";
  EXPECT_FALSE(r.passed());
}

TEST(Checks, FastCheckPassesInProcess) {
  const CheckSpec& s = check_registry()[12];  // c13
  CheckResult r = run_check(s, CheckContext{});
  EXPECT_TRUE(r.passed()) << r.to_json().dump(2);
  EXPECT_FALSE(r.to_json().contains("seconds"));
}
