#include <doctest.h>

#include <array>
#include <cmath>
#include <cstring>
#include <limits>
#include <set>
#include <sstream>

#include "valvebench/common/archive.hpp"
#include "valvebench/common/errors.hpp"
#include "valvebench/common/rng.hpp"

using namespace valvebench;

TEST_CASE("counter rng is a pure function of key and cursor") {
  CounterRng a(10, 3);
  CounterRng b(10, 3);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  CounterRng c(10, 3);
  for (int i = 0; i < 37; ++i) c.next_u64();
  auto d = CounterRng::from_state(c.key(), c.cursor());
  for (int i = 0; i < 10; ++i) CHECK(c.next_u64() == d.next_u64());
}

TEST_CASE("streams and seeds give different sequences") {
  std::set<std::uint64_t> firsts;
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    for (std::uint64_t stream = 0; stream < 8; ++stream) {
      firsts.insert(CounterRng(seed, stream).next_u64());
    }
  }
  CHECK(firsts.size() == 64);
}

TEST_CASE("normal consumes two draws and below stays in range") {
  CounterRng r(1, 1);
  r.normal();
  CHECK(r.cursor() == 2);

  std::array<int, 3> hist{};
  for (int i = 0; i < 30000; ++i) {
    const auto v = r.below(3);
    REQUIRE(v < 3);
    ++hist[v];
  }
  for (int h : hist) CHECK(std::abs(h - 10000) < 400);
  CHECK_THROWS_AS(r.below(0), ContractViolation);
}

TEST_CASE("uniform draws lie in [0, 1) with plausible moments") {
  CounterRng r(5, 2);
  double sum = 0, sq = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
    sq += u * u;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(sq / n - (sum / n) * (sum / n) == doctest::Approx(1.0 / 12).epsilon(0.02));
}

TEST_CASE("format_exact round-trips every double bit pattern") {
  CounterRng r(2, 2);
  for (int i = 0; i < 20000; ++i) {
    std::uint64_t bits = r.next_u64();
    double v;
    std::memcpy(&v, &bits, sizeof v);
    if (!std::isfinite(v)) continue;
    const double back = parse_double(format_exact(v));
    std::uint64_t back_bits;
    std::memcpy(&back_bits, &back, sizeof back);
    REQUIRE(back_bits == bits);
  }
  CHECK(parse_double(format_exact(0.1)) == 0.1);
  CHECK(parse_double(format_exact(-0.0)) == 0.0);
  CHECK(std::signbit(parse_double(format_exact(-0.0))));
}

TEST_CASE("archive save/load/save is byte-identical") {
  std::ostringstream first;
  {
    ArchiveWriter w(first);
    w.text("name", "td3");
    w.integer("count", -42);
    w.unsigned_integer("key", std::numeric_limits<std::uint64_t>::max());
    w.scalar("pi", 3.141592653589793);
    const std::vector<double> v{1e-300, -2.5, 0.1 + 0.2};
    w.values("vec", v);
  }
  std::istringstream in(first.str());
  ArchiveReader r(in);
  const auto name = r.text("name");
  const auto count = r.integer("count");
  const auto key = r.unsigned_integer("key");
  const auto pi = r.scalar("pi");
  CHECK(r.peek_tag() == "vec");
  const auto v = r.values("vec");
  CHECK(r.peek_tag().empty());

  std::ostringstream second;
  ArchiveWriter w(second);
  w.text("name", name);
  w.integer("count", count);
  w.unsigned_integer("key", key);
  w.scalar("pi", pi);
  w.values("vec", v);
  CHECK(first.str() == second.str());
}

TEST_CASE("archive reader rejects wrong tags and short vectors") {
  std::istringstream in("alpha 1\nvec 3 1 2\n");
  ArchiveReader r(in);
  CHECK_THROWS_AS(r.scalar("beta"), FormatError);

  std::istringstream in2("vec 3 1 2\n");
  ArchiveReader r2(in2);
  CHECK_THROWS_AS(r2.values("vec"), FormatError);

  CHECK_THROWS_AS(parse_int("12x"), FormatError);
  CHECK_THROWS_AS(parse_double("nan?"), FormatError);
}
