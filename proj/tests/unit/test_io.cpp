#include <cmath>
#include <stdexcept>
#include <sstream>

#include "doctest.h"
#include "drn/io.hpp"

using namespace drn;

TEST_CASE("shortest round-trip number formatting") {
  for (double v : {0.1, 1.0 / 3.0, 6e10, -2.5e-17, 0.0}) {
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(400.0) == "400");
}

TEST_CASE("FNV-1a") {
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(hex_hash(0x1f) == "000000000000001f");
}

TEST_CASE("key value parsing") {
  const auto c = KeyValueConfig::parse("# comment\nalpha = 1.5  # trailing\n\n beta=two \n");
  CHECK(c.get_double("alpha") == 1.5);
  CHECK(c.get("beta") == "two");
  CHECK(c.entries().size() == 2);
  CHECK_THROWS(KeyValueConfig::parse("a = 1\na = 2\n"));
  CHECK_THROWS(KeyValueConfig::parse("no equals sign\n"));
  CHECK_THROWS(c.get_double("beta"));
  CHECK_THROWS(c.get("gamma"));
  CHECK_THROWS(KeyValueConfig::parse("n = -3\n").get_uint("n"));
}

TEST_CASE("canonical form ignores order") {
  const auto a = KeyValueConfig::parse("x = 1\ny = 2\n");
  const auto b = KeyValueConfig::parse("y = 2\nx = 1\n");
  CHECK(a.canonical() == b.canonical());
  auto c = a;
  c.merge(KeyValueConfig::parse("y = 3\nz = 4\n"));
  CHECK(c.get("y") == "3");
  c.erase("z");
  CHECK_FALSE(c.has("z"));
}

TEST_CASE("lineshape csv round trip") {
  Lineshape s;
  s.detunings = symmetric_grid(2 * 3.141592653589793 * 100.0, 5);
  s.values = {0.5, 0.6, 0.9, 0.6, 0.5};
  s.background = 0.5;
  std::ostringstream out;
  write_lineshape_csv(out, s, {{"seed", "3"}});
  const std::string text = out.str();
  CHECK(text.find("# seed: 3\n") == 0);
  CHECK(text.find("detuning_hz,transmission\n") != std::string::npos);
  std::istringstream in(text);
  const auto f = read_lineshape_csv(in);
  CHECK(f.header.at("seed") == "3");
  CHECK(f.shape.background == 0.5);
  REQUIRE(f.shape.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(f.shape.detunings[i] == doctest::Approx(s.detunings[i]).epsilon(1e-15));
    CHECK(f.shape.values[i] == s.values[i]);
  }
  std::istringstream bad("detuning_hz,transmission\n1;2\n");
  CHECK_THROWS(read_lineshape_csv(bad));
}

TEST_CASE("distribution csv") {
  TimeDistribution d;
  d.bin_edges = {0.0, 1.0, 2.0};
  d.mass = {0.25, 0.5};
  d.escape_mass = 0.25;
  d.horizon = 2.0;
  std::ostringstream out;
  write_distribution_csv(out, d, 0.5, {});
  const std::string t = out.str();
  CHECK(t.find("# escape_mass: 0.25") != std::string::npos);
  CHECK(t.find("1,2,2,4,0.5\n") != std::string::npos);
}
