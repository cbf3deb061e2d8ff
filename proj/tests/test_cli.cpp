#include "doctest.h"
#include "feshbach/config.hpp"
#include "feshbach/error.hpp"
#include "feshbach/lab.hpp"

using namespace feshbach;
using namespace feshbach::cli;

TEST_CASE("minimal configuration takes the reference defaults") {
  const RunConfig c = parse_config("[model]\n");
  CHECK(c.grid.n == 600);
  CHECK(c.sweep.points == 200);
  CHECK_FALSE(c.lambda.has_value());
  CHECK(format_potential(c.U) == "square_well 4 1 attractive");
  CHECK_FALSE(c.field.has_value());
}

TEST_CASE("configuration keys and values") {
  const RunConfig c = parse_config(
      "[model]\nw = gaussian 4 1\nw2 = gaussian 1 2\nbeta = -1.5\nlambda = 0.57 # comment\n"
      "[scan]\nmin = 0.1\nmax = 2\npoints = 11\n[field]\nslope = 2\nb_min = 0\nb_max = 1\n");
  CHECK(*c.lambda == 0.57);
  CHECK(c.W.terms().size() == 2);
  CHECK(c.W.terms()[1].coefficient == -1.5);
  CHECK(*c.sweep.max == 2.0);
  REQUIRE(c.field.has_value());
  CHECK(c.field->slope == 2.0);
  const auto p = parse_potential("0.5 * gaussian 1 2 + exponential 1e+0 1 attractive");
  CHECK(p.terms().size() == 2);
}

TEST_CASE("configuration errors name the key and line") {
  auto kind_and_text = [](const std::string& text) -> std::pair<ErrorKind, std::string> {
    try {
      parse_config(text);
    } catch (const Error& e) {
      return {e.kind(), e.what()};
    }
    return {ErrorKind::InvalidArgument, "no error"};
  };
  const auto [k1, m1] = kind_and_text("[model]\nlamda = 1\n");
  CHECK(k1 == ErrorKind::Config);
  CHECK(m1.find("lamda") != std::string::npos);
  CHECK(m1.find("line 2") != std::string::npos);
  CHECK(kind_and_text("[model]\n[scan]\nmin = 2\nmax = 1\n").first == ErrorKind::Config);
  CHECK(kind_and_text("[scan]\nmin = 1\n").first == ErrorKind::Config);
  CHECK(kind_and_text("[model]\nlambda = 1\nlambda = 2\n").first == ErrorKind::Config);
  CHECK(kind_and_text("[model]\nw = cubic 1 1\n").first == ErrorKind::Config);
  CHECK(exit_code(ErrorKind::Config) == 1);
}

TEST_CASE("scan rows format deterministically") {
  ScanRow r;
  r.lambda = 0.5;
  r.sigma_min = 1e-9;
  r.mu_max = 1.0;
  r.notes = "a, b";
  CHECK(format_row(r) == "0.5,POLE,1e-09,1,Generic,a; b");
  r.a_eff = -0.25;
  CHECK(format_row(r).rfind("0.5,-0.25,", 0) == 0);
  CHECK(format_number(1.0 / 3.0) == "0.333333333333");
}
