#include <doctest.h>

#include <fstream>
#include <sstream>

#include "tscopf/network.hpp"
#include "tscopf/textio.hpp"

using namespace tscopf;

namespace {
std::string read_file(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}
const std::string kFixtures = TSCOPF_FIXTURE_DIR;
}  // namespace

TEST_CASE("parse bundled 2-bus case") {
  auto c = parse_case(read_file(kFixtures + "/case2.case"));
  CHECK(c.n() == 2);
  CHECK(c.m() == 1);
  CHECK(c.base_mva == 100.0);
  CHECK(c.min_hz == 58.5);
  CHECK(c.M()(0, 0) == 1.0);
  CHECK(c.M()(1, 0) == 0.0);
}

TEST_CASE("parse bundled 9-bus case") {
  auto c = parse_case(read_file(kFixtures + "/case9.case"));
  CHECK(c.n() == 9);
  CHECK(c.m() == 4);
  CHECK(c.num_zones() == 1);
  for (int j = 0; j < c.m(); ++j) CHECK(c.M().col(j).sum() == doctest::Approx(1.0));
  CHECK(validate_case(c).empty());
}

TEST_CASE("generator referencing missing bus is a semantic error") {
  std::string text = R"(
base_mva 100
bus { id 1 vmin 0.9 vmax 1.1 }
gen { id 1 bus 7 gmin 0 gmax 10 rmin 0 rmax 0 c2 0 c1 1 c0 0 droop 0.05 inertia_s 1 damping 0 tgov_s 0.5 }
)";
  CHECK_THROWS_WITH_AS(parse_case(text), doctest::Contains("unknown bus"), SemanticError);
}

TEST_CASE("syntax errors carry line numbers") {
  std::string text = "base_mva 100\nbus { id 1 vmin 0.9 vmax oops }\n";
  try {
    parse_case(text);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("validate flags inverted generator bounds") {
  auto c = parse_case_lenient(read_file(kFixtures + "/case2.case"));
  c.gens[0].gmin = 200.0;  // above gmax
  auto v = validate_case(c);
  REQUIRE(v.size() == 1);
  CHECK(v[0].find("gen 1") != std::string::npos);
  CHECK(v[0].find("gmin") != std::string::npos);
}

TEST_CASE("validate detects islands") {
  auto c = parse_case_lenient(read_file(kFixtures + "/case9.case"));
  c.branches.erase(c.branches.begin() + 2);  // cut 3-9, isolating bus 3? (meshed: check)
  c.buses.push_back({99, 0.9, 1.1, 1});
  c.finalize();
  auto v = validate_case(c);
  bool found = false;
  for (const auto& s : v) found = found || s.find("island detected") != std::string::npos;
  CHECK(found);
}

TEST_CASE("round trip is bit-exact") {
  std::string raw = read_file(kFixtures + "/case9.case");
  auto c1 = parse_case(raw);
  std::string s1 = serialize_case(c1);
  auto c2 = parse_case(s1);
  std::string s2 = serialize_case(c2);
  CHECK(s1 == s2);
}

TEST_CASE("admittance of a single reactance line") {
  std::string text = R"(
base_mva 100
bus { id 1 vmin 0.9 vmax 1.1 }
bus { id 2 vmin 0.9 vmax 1.1 }
branch { from 1 to 2 r 0 x 0.1 b 0 smax 1 }
)";
  auto Y = admittance_matrix(parse_case(text));
  CHECK(Y(0, 1).imag() == doctest::Approx(10.0));
  CHECK(Y(0, 1).real() == doctest::Approx(0.0));
  CHECK(Y(0, 0).imag() == doctest::Approx(-10.0));
  CHECK(Y(1, 0) == Y(0, 1));
}

TEST_CASE("admittance with no branches is zero") {
  std::string text = R"(
base_mva 100
bus { id 1 vmin 0.9 vmax 1.1 }
)";
  auto Y = admittance_matrix(parse_case(text));
  CHECK(Y.norm() == 0.0);
}

TEST_CASE("parallel identical lines double the admittance") {
  std::string one = R"(
base_mva 100
bus { id 1 vmin 0.9 vmax 1.1 }
bus { id 2 vmin 0.9 vmax 1.1 }
branch { from 1 to 2 r 0.01 x 0.1 b 0.04 smax 1 }
)";
  std::string two = one + "branch { from 1 to 2 r 0.01 x 0.1 b 0.04 smax 1 }\n";
  auto Y1 = admittance_matrix(parse_case(one));
  auto Y2 = admittance_matrix(parse_case(two));
  CHECK((Y2 - 2.0 * Y1).norm() == doctest::Approx(0.0));
}

TEST_CASE("admittance is additive over branch sets") {
  std::string base = R"(
base_mva 100
bus { id 1 vmin 0.9 vmax 1.1 }
bus { id 2 vmin 0.9 vmax 1.1 }
bus { id 3 vmin 0.9 vmax 1.1 }
)";
  std::string brA = "branch { from 1 to 2 r 0.01 x 0.1 b 0.02 smax 1 }\n";
  std::string brB = "branch { from 2 to 3 r 0.02 x 0.2 b 0.01 smax 1 tap 1.05 shift 0.02 }\n";
  auto YA = admittance_matrix(parse_case_lenient(base + brA));
  auto YB = admittance_matrix(parse_case_lenient(base + brB));
  auto YAB = admittance_matrix(parse_case_lenient(base + brA + brB));
  CHECK((YAB - YA - YB).norm() == doctest::Approx(0.0));
}

TEST_CASE("M aggregates generator output to buses") {
  auto c = parse_case(read_file(kFixtures + "/case9.case"));
  Eigen::VectorXd g(4);
  g << 1.0, 0.5, 0.25, 0.125;
  Eigen::VectorXd pg = c.M() * g;
  CHECK(pg(c.bus_index(1)) == doctest::Approx(1.0));
  CHECK(pg(c.bus_index(6)) == doctest::Approx(0.125));
  CHECK(pg.sum() == doctest::Approx(g.sum()));
}

TEST_CASE("zero-reactance branch rejected by admittance construction") {
  std::string text = R"(
base_mva 100
bus { id 1 vmin 0.9 vmax 1.1 }
bus { id 2 vmin 0.9 vmax 1.1 }
branch { from 1 to 2 r 0.01 x 0 b 0 smax 1 }
)";
  auto c = parse_case_lenient(text);
  CHECK_THROWS_AS(admittance_matrix(c), SemanticError);
}
