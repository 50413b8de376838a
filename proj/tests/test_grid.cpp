// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <complex>
#include <filesystem>
#include <set>
#include <string>

#include "doctest.h"
#include "oracles.hpp"
#include "rmap/dft.hpp"
#include "rmap/error.hpp"
#include "rmap/grid.hpp"
#include "rmap/grid_io.hpp"
#include "rmap/rng.hpp"

using namespace rmap;
namespace fs = std::filesystem;

namespace {
fs::path temp_dir(const char* name) {
  const fs::path dir = fs::temp_directory_path() / "rmap_tests" / name;
  fs::create_directories(dir);
  return dir;
}

Grid random_grid(int h, int w, Rng& rng) {
  Grid g = Grid::zeros(h, w);
  for (double& v : g.values) v = rng.next_double();
  return g;
}
}  // namespace

TEST_CASE("grid layout and accessors") {
  Grid g = Grid::zeros(3, 4);
  CHECK(g.height == 3);
  CHECK(g.width == 4);
  CHECK(g.values.size() == 12);
  g.at(1, 2) = 0.5;
  CHECK(g.values[1 * 4 + 2] == 0.5);
  CHECK(Grid::constant(2, 2, 0.25).values == std::vector<double>(4, 0.25));
  CHECK(g.in_bounds({0, 0}));
  CHECK(g.in_bounds({2, 3}));
  CHECK_FALSE(g.in_bounds({3, 0}));
  CHECK_FALSE(g.in_bounds({0, -1}));
}

TEST_CASE("normalization maps the window to [0, 1] and clamps outside") {
  const double dmin = -70.0, dmax = 10.0;
  CHECK(normalize_db(-70.0, dmin, dmax) == doctest::Approx(0.0));
  CHECK(normalize_db(10.0, dmin, dmax) == doctest::Approx(1.0));
  CHECK(normalize_db(-30.0, dmin, dmax) == doctest::Approx(0.5));
  CHECK(normalize_db(-100.0, dmin, dmax) == 0.0);
  CHECK(normalize_db(50.0, dmin, dmax) == 1.0);
  CHECK(denormalize_db(0.5, dmin, dmax) == doctest::Approx(-30.0));
  // In-window values round-trip.
  for (double db : {-69.0, -35.5, 0.0, 9.75}) {
    CHECK(denormalize_db(normalize_db(db, dmin, dmax), dmin, dmax) ==
          doctest::Approx(db).epsilon(1e-12));
  }
}

TEST_CASE("rmg io round-trips float-representable values") {
  const fs::path dir = temp_dir("grid_io");
  Grid g = Grid::zeros(5, 3);
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    g.values[i] = static_cast<float>(0.0625 * static_cast<double>(i));
  }
  const fs::path path = dir / "g.rmg";
  write_grid(g, path);
  const Grid back = read_grid(path);
  REQUIRE(back.height == 5);
  REQUIRE(back.width == 3);
  CHECK(back.values == g.values);
  // Write-read-write is byte stable.
  const fs::path path2 = dir / "g2.rmg";
  write_grid(back, path2);
  CHECK(read_file_bytes(path) == read_file_bytes(path2));
}

TEST_CASE("pgm io quantizes to 8 bits") {
  const fs::path dir = temp_dir("grid_io");
  Grid g = Grid::zeros(2, 2);
  g.values = {0.0, 1.0, 0.5, 0.25};
  const fs::path path = dir / "g.pgm";
  write_grid(g, path);
  const Grid back = read_grid(path);
  CHECK(back.values[0] == doctest::Approx(0.0));
  CHECK(back.values[1] == doctest::Approx(1.0));
  CHECK(back.values[2] == doctest::Approx(std::round(0.5 * 255) / 255.0));
  CHECK(back.values[3] == doctest::Approx(std::round(0.25 * 255) / 255.0));
}

TEST_CASE("csv grid io round-trips doubles exactly") {
  const fs::path dir = temp_dir("grid_io");
  Rng rng(7);
  Grid g = random_grid(4, 6, rng);
  g.values[0] = 1.0 / 3.0;
  const fs::path path = dir / "g.csv";
  write_grid(g, path);
  CHECK(read_grid(path).values == g.values);
}

TEST_CASE("format_double parses back to the same double") {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double x = (rng.next_double() - 0.5) * std::pow(10.0, i % 17 - 8);
    CHECK(std::stod(format_double(x)) == x);
  }
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(1.0) == "1");
}

TEST_CASE("samples csv round-trips") {
  const fs::path dir = temp_dir("grid_io");
  SparseSamples s;
  s.coords = {{0, 0}, {3, 2}, {1, 7}};
  s.psd = {0.25, 1.0 / 3.0, 0.875};
  const fs::path path = dir / "s.csv";
  write_samples_csv(s, path);
  const SparseSamples back = read_samples_csv(path);
  CHECK(back.coords == s.coords);
  CHECK(back.psd == s.psd);
}

TEST_CASE("grid io errors are typed") {
  const fs::path dir = temp_dir("grid_io_err");
  CHECK_THROWS_AS(read_grid(dir / "absent.rmg"), Error);
  write_file_bytes(dir / "bad.rmg", "NOPE");
  CHECK_THROWS_AS(read_grid(dir / "bad.rmg"), Error);
  CHECK_THROWS_AS(format_from_extension("x.tiff"), Error);
}

TEST_CASE("rng streams are deterministic and decorrelated") {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    const std::uint64_t va = a.next_u64();
    CHECK(va == b.next_u64());
  }
  // Different seeds diverge immediately.
  Rng a2(42);
  CHECK(a2.next_u64() != c.next_u64());
  // Child streams differ from the parent and from each other.
  Rng c1 = Rng::child(42, 1), c2 = Rng::child(42, 2);
  CHECK(c1.next_u64() != c2.next_u64());

  Rng u(9);
  for (int i = 0; i < 1000; ++i) {
    const double x = u.next_double();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
    CHECK(u.next_below(17) < 17);
  }
}

TEST_CASE("dft2 matches the quadruple-loop reference") {
  Rng rng(11);
  for (const auto [h, w] : {std::pair{5, 7}, {4, 4}, {1, 6}, {8, 3}}) {
    const Grid g = random_grid(h, w, rng);
    const auto fast = dft2(g);
    const auto ref = oracle::dft2_reference(g);
    REQUIRE(fast.size() == ref.size());
    for (std::size_t i = 0; i < fast.size(); ++i) {
      CHECK(std::abs(fast[i] - ref[i]) < 1e-9 * (1.0 + std::abs(ref[i])));
    }
  }
}

TEST_CASE("dft2_adjoint satisfies the inner-product identity") {
  // <adjoint(z), x> = Re(sum_k z_k * conj(X_k)) for every bin subset.
  Rng rng(13);
  const Grid x = random_grid(6, 5, rng);
  const auto spectrum = dft2(x);
  std::vector<FreqBin> bins = {{0, 0}, {1, 4}, {3, 2}, {5, 0}};
  std::vector<std::complex<double>> z;
  for (std::size_t i = 0; i < bins.size(); ++i) {
    z.emplace_back(rng.next_double() - 0.5, rng.next_double() - 0.5);
  }
  const Grid back = dft2_adjoint(bins, z, x.height, x.width);
  double lhs = 0.0;
  for (std::size_t i = 0; i < x.values.size(); ++i) {
    lhs += back.values[i] * x.values[i];
  }
  double rhs = 0.0;
  for (std::size_t k = 0; k < bins.size(); ++k) {
    const auto xk =
        spectrum[static_cast<std::size_t>(bins[k].u) * x.width + bins[k].v];
    rhs += (z[k] * std::conj(xk)).real();
  }
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
}

TEST_CASE("folded_frequency is distance to the nearest multiple") {
  CHECK(folded_frequency(0, 8) == 0);
  CHECK(folded_frequency(1, 8) == 1);
  CHECK(folded_frequency(4, 8) == 4);
  CHECK(folded_frequency(5, 8) == 3);
  CHECK(folded_frequency(7, 8) == 1);
  CHECK(folded_frequency(3, 5) == 2);
  CHECK(folded_frequency(4, 5) == 1);
}

TEST_CASE("grid validation rejects malformed fields") {
  Grid g = Grid::zeros(2, 2);
  g.values[1] = 0.5;
  CHECK_NOTHROW(validate_normalized(g, "m"));
  g.values[1] = 1.5;
  CHECK_THROWS_AS(validate_normalized(g, "m"), Error);
  g.values[1] = 0.5;
  CHECK_THROWS_AS(validate_binary(g, "m"), Error);
  g.values[1] = 1.0;
  CHECK_NOTHROW(validate_binary(g, "m"));

  SparseSamples s;
  s.coords = {{0, 0}, {0, 0}};
  s.psd = {0.1, 0.2};
  CHECK_THROWS_AS(validate_samples(s, 2, 2), Error);  // duplicate cell
  s.coords = {{0, 0}, {5, 0}};
  CHECK_THROWS_AS(validate_samples(s, 2, 2), Error);  // out of bounds
}
