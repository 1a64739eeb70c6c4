#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "frequalize/error.hpp"
#include "frequalize/field_io.hpp"
#include "frequalize/grid.hpp"
#include "support.hpp"

using namespace frequalize;

TEST_CASE("wavenumber layout and frequencies") {
  TorusGrid g(2, 2.0 * M_PI, 8);
  CHECK(g.wavenumber(0) == 0);
  CHECK(g.wavenumber(3) == 3);
  CHECK(g.wavenumber(4) == -4);
  CHECK(g.wavenumber(7) == -1);
  CHECK(g.xi_min() == doctest::Approx(1.0));
  CHECK(g.xi_max() == doctest::Approx(4.0));
  const std::size_t i = g.flatten({1, 7, 0});
  const Vec3 xi = g.frequency(i);
  CHECK(xi[0] == doctest::Approx(1.0));
  CHECK(xi[1] == doctest::Approx(-1.0));
  CHECK(g.mirror(i) == g.flatten({7, 1, 0}));
  CHECK(g.on_nyquist(g.flatten({4, 0, 0})));
  CHECK_THROWS_AS(TorusGrid(4, 1.0, 8), InputError);
  CHECK_THROWS_AS(TorusGrid(2, -1.0, 8), InputError);
}

TEST_CASE("forward transform matches a direct DFT sum") {
  TorusGrid g(2, 3.0, 8);
  const PhysicalField f = fqt::noise(g, 1, 11);
  const SpectralField fh = forward_transform(f);
  const double h2 = g.cell_volume();
  double worst = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Vec3 xi = g.frequency(k);
    Complex s = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
      const Vec3 x = g.position(j);
      s += f.at(0, j) * std::exp(Complex(0.0, -(xi[0] * x[0] + xi[1] * x[1])));
    }
    worst = std::max(worst, std::abs(h2 * s - fh.at(0, k)));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("Parseval and round trip") {
  TorusGrid g(3, 5.0, 8);
  const PhysicalField f = fqt::noise(g, 3, 4);
  const SpectralField fh = forward_transform(f);
  CHECK(spectral_l2_norm(fh) == doctest::Approx(lp_norm(f, 2.0)).epsilon(1e-12));
  const PhysicalField back = inverse_transform(fh);
  double err = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i) err = std::max(err, std::abs(back.values[i] - f.values[i]));
  CHECK(err < 1e-12);
}

TEST_CASE("spectral derivative of a plane wave") {
  TorusGrid g(3, 2.0 * M_PI, 16);
  PhysicalField f(g, 1);
  for (std::size_t i = 0; i < g.size(); ++i) f.at(0, i) = std::sin(3.0 * g.position(i)[1]);
  const PhysicalField d =
      inverse_transform(spectral_derivative(forward_transform(f), DerivativeOp::Partial, 1));
  double err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    err = std::max(err, std::abs(d.at(0, i) - 3.0 * std::cos(3.0 * g.position(i)[1])));
  CHECK(err < 1e-11);
}

TEST_CASE("solenoidal projection removes divergence") {
  TorusGrid g(3, 4.0, 8);
  const SpectralField p = solenoidal_projection(forward_transform(fqt::noise(g, 3, 9)));
  const SpectralField div = spectral_derivative(p, DerivativeOp::Divergence);
  CHECK(spectral_l2_norm(div) < 1e-12 * spectral_l2_norm(p) + 1e-14);
}

TEST_CASE("non-Hermitian spectra are rejected") {
  TorusGrid g(1, 1.0, 8);
  SpectralField s(g, 1);
  s.at(0, 1) = Complex(1.0, 0.0);
  CHECK_THROWS_AS(inverse_transform(s), NumericalError);
}

TEST_CASE("lp norms") {
  TorusGrid g(2, 2.0, 8);
  PhysicalField f(g, 1);
  for (std::size_t i = 0; i < g.size(); ++i) f.at(0, i) = 2.0;
  CHECK(lp_norm(f, 1.0) == doctest::Approx(8.0));
  CHECK(lp_norm(f, 2.0) == doctest::Approx(4.0));
  CHECK(lp_norm(f, std::numeric_limits<double>::infinity()) == doctest::Approx(2.0));
  CHECK(spectral_mean(forward_transform(f))[0] == doctest::Approx(2.0));
}

TEST_CASE("FQLZ dump round trip and header") {
  const auto path = std::filesystem::temp_directory_path() / "fqlz_roundtrip.fqlz";
  TorusGrid g(3, 7.5, 8);
  const PhysicalField f = fqt::noise(g, 2, 3);
  write_field_dump(path, f);
  CHECK(std::filesystem::file_size(path) == 32 + 2 * 512 * 8);
  const PhysicalField r = read_field_dump(path);
  CHECK(r.grid == g);
  CHECK(r.components == 2);
  CHECK(r.values == f.values);

  std::ifstream in(path, std::ios::binary);
  char magic[4];
  in.read(magic, 4);
  CHECK(std::string(magic, 4) == "FQLZ");

  {
    std::fstream io(path, std::ios::binary | std::ios::in | std::ios::out);
    io.write("XXXX", 4);
  }
  CHECK_THROWS_AS(read_field_dump(path), InputError);
  std::filesystem::remove(path);
}
