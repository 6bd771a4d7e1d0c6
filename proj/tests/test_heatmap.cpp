#include <doctest.h>

#include <cmath>
#include <random>

#include "hmtraj/error.hpp"
#include "hmtraj/heatmap.hpp"
#include "oracles.hpp"

using namespace hmtraj;

namespace {

// Grid at `res` spanning mean +- extent on both axes, with a cell centered on the mean.
GridSpec grid_around(Point2 mean, double res, double extent) {
  const int half = static_cast<int>(std::ceil(extent / res));
  GridSpec g;
  g.resolution = res;
  g.width = g.height = 2 * half + 1;
  g.origin_x = mean.x - half * res;
  g.origin_y = mean.y - half * res;
  return g;
}

Heatmap gaussian(Point2 mean, double sigma, double res, double extent_sigmas = 6.0) {
  MixtureSpec m{{{1.0, mean, sigma}}};
  return render_mixture(m, grid_around(mean, res, extent_sigmas * sigma), extent_sigmas);
}

}  // namespace

TEST_CASE("heatmap construction validates cells") {
  GridSpec g{0, 0, 1.0, 3, 3};
  CHECK_THROWS_AS(Heatmap(g, {{9, 1.0}}), Error);
  CHECK_THROWS_AS(Heatmap(g, {{-1, 1.0}}), Error);
  CHECK_THROWS_AS(Heatmap(g, {{1, 1.0}, {1, 2.0}}), Error);
  CHECK_THROWS_AS(Heatmap(g, {{1, -0.5}}), Error);
  const Heatmap h(g, {{5, 1.0}, {2, 3.0}});
  CHECK(h.cells()[0].index == 2);
  CHECK(h.center(h.cells()[1]) == Point2{2.0, 1.0});
  CHECK_THROWS_AS(GridSpec({0, 0, 0.0, 3, 3}).validate(), Error);
}

TEST_CASE("normalize") {
  GridSpec g{0, 0, 1.0, 4, 1};
  const Heatmap h = normalize(Heatmap(g, {{0, 2.0}, {1, 2.0}, {3, 0.0}}));
  REQUIRE(h.size() == 2);
  CHECK(h.cells()[0].mass == 0.5);
  CHECK(h.cells()[1].mass == 0.5);

  const Heatmap again = normalize(h);
  for (std::size_t i = 0; i < h.size(); ++i) {
    CHECK(std::abs(again.cells()[i].mass - h.cells()[i].mass) <= 1e-12);
  }
  try {
    normalize(Heatmap(g, {{0, 0.0}}));
    FAIL("expected zero-mass error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ZeroMass);
  }
}

TEST_CASE("expectation and uncertainty of small heatmaps") {
  GridSpec g{0, 0, 1.0, 10, 10};
  const Heatmap single(g, {{g.index(4, 3), 1.0}});
  CHECK(expectation(single) == Point2{3.0, 4.0});
  CHECK(uncertainty(single).spread == 0.0);

  const Heatmap pair(g, {{0, 0.5}, {1, 0.5}});
  const Point2 e = expectation(pair);
  CHECK(e.x == doctest::Approx(0.5));
  CHECK(e.y == 0.0);
  CHECK(uncertainty(pair).spread == doctest::Approx(0.25));
}

TEST_CASE("rendered Gaussian: expectation and 2 sigma^2") {
  const Heatmap h = gaussian({5.0, -2.0}, 2.0, 0.25);
  const Point2 e = expectation(h);
  CHECK(std::abs(e.x - 5.0) <= 0.01);
  CHECK(std::abs(e.y + 2.0) <= 0.01);

  const Heatmap h3 = gaussian({0.0, 0.0}, 3.0, 0.25);
  CHECK(std::abs(uncertainty(h3).spread - 18.0) <= 0.03 * 18.0);

  // sigma >= 4 * resolution stays within 3% at the default truncation too.
  for (double sigma : {2.0, 3.5, 5.0}) {
    const double res = sigma / 4.0;
    const Heatmap hd = render_mixture(MixtureSpec{{{1.0, {1.0, 2.0}, sigma}}},
                                      grid_around({1.0, 2.0}, res, 5.0 * sigma));
    CHECK(std::abs(uncertainty(hd).spread - 2 * sigma * sigma) <= 0.03 * 2 * sigma * sigma);
  }
}

TEST_CASE("uncertainty matches the two-pass oracle") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    const Heatmap h = oracle::random_heatmap(rng);
    const auto est = uncertainty(h);
    const auto ref = oracle::two_pass(h);
    CHECK(std::abs(est.spread - static_cast<double>(ref.trace)) <= 1e-9 * std::max(1.0, est.spread));
    CHECK(std::abs(est.expectation.x - static_cast<double>(ref.ex)) <= 1e-9);
    CHECK(std::abs(est.expectation.y - static_cast<double>(ref.ey)) <= 1e-9);
    CHECK(est.spread >= 0.0);
  }
}

TEST_CASE("uncertainty is translation invariant") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> shift(-1000.0, 1000.0);
  for (int i = 0; i < 100; ++i) {
    const Heatmap h = oracle::random_heatmap(rng);
    GridSpec g = h.grid();
    const double dx = shift(rng), dy = shift(rng);
    g.origin_x += dx;
    g.origin_y += dy;
    const Heatmap moved(g, std::vector<Cell>(h.cells().begin(), h.cells().end()));
    const auto a = uncertainty(h);
    const auto b = uncertainty(moved);
    CHECK(std::abs(a.spread - b.spread) <= 1e-9);
    CHECK(std::abs((b.expectation.x - a.expectation.x) - dx) <= 1e-9);
    CHECK(std::abs((b.expectation.y - a.expectation.y) - dy) <= 1e-9);
  }
}

TEST_CASE("uncertainty is rotation invariant") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> angle(-3.2, 3.2);
  for (int i = 0; i < 100; ++i) {
    const Heatmap h = oracle::random_heatmap(rng);
    const auto base = uncertainty(h);
    const double a = angle(rng);
    std::vector<WeightedPoint> pts;
    for (const auto& c : h.cells()) {
      pts.push_back({rotate_about(h.center(c), base.expectation, a), c.mass});
    }
    const auto rotated = weighted_spread(pts);
    CHECK(std::abs(rotated.spread - base.spread) <= 1e-9 * std::max(1.0, base.spread));
  }
}

TEST_CASE("render_mixture") {
  // Narrow mode on a cell center keeps essentially all mass in that cell.
  GridSpec g{-5, -5, 0.5, 21, 21};
  const Heatmap narrow = render_mixture(MixtureSpec{{{1.0, {0.0, 0.0}, 0.05}}}, g);
  double peak = 0.0;
  for (const auto& c : narrow.cells()) peak = std::max(peak, c.mass);
  CHECK(peak >= 0.99);

  // Symmetric pair about the origin.
  GridSpec wide{-20, -20, 0.5, 81, 81};
  const Heatmap pair = render_mixture(
      MixtureSpec{{{0.5, {-6.0, 1.0}, 1.5}, {0.5, {6.0, -1.0}, 1.5}}}, wide);
  const Point2 e = expectation(pair);
  CHECK(std::abs(e.x) <= 0.25);
  CHECK(std::abs(e.y) <= 0.25);

  // Far-apart 0.7 / 0.3 modes keep their mass ratio.
  const Heatmap split = render_mixture(
      MixtureSpec{{{0.7, {-10.0, 0.0}, 1.0}, {0.3, {10.0, 0.0}, 1.0}}}, wide);
  double left = 0.0, right = 0.0;
  for (const auto& c : split.cells()) (split.center(c).x < 0.0 ? left : right) += c.mass;
  CHECK(std::abs(left / right - 0.7 / 0.3) <= 0.01 * (0.7 / 0.3));

  double total = 0.0;
  for (const auto& c : split.cells()) total += c.mass;
  CHECK(std::abs(total - 1.0) <= 1e-6);

  // No mass beyond the truncation disk.
  for (const auto& c : narrow.cells()) CHECK(norm(narrow.center(c)) <= 4.0 * 0.05 + 1e-12);

  CHECK_THROWS_AS(render_mixture(MixtureSpec{{{1.0, {0, 0}, 1.0}}}, g, 2.0), Error);
  CHECK_THROWS_AS(render_mixture(MixtureSpec{{{0.5, {0, 0}, 1.0}}}, g), Error);
  // A mode entirely off the grid leaves nothing to normalize.
  CHECK_THROWS_AS(render_mixture(MixtureSpec{{{1.0, {500, 500}, 1.0}}}, g), Error);
}

TEST_CASE("threshold_sparsify") {
  std::mt19937_64 rng(9);
  const Heatmap h = oracle::random_heatmap(rng);
  const auto same = threshold_sparsify(h, 0.0);
  REQUIRE(same.heatmap.size() == h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    CHECK(same.heatmap.cells()[i].index == h.cells()[i].index);
    CHECK(std::abs(same.heatmap.cells()[i].mass - h.cells()[i].mass) <= 1e-15);
  }
  CHECK(same.dropped_mass == 0.0);

  GridSpec g{0, 0, 1.0, 2, 1};
  const auto one = threshold_sparsify(Heatmap(g, {{0, 0.99}, {1, 0.01}}), 0.05);
  REQUIRE(one.heatmap.size() == 1);
  CHECK(one.heatmap.cells()[0].mass == 1.0);
  CHECK(one.dropped_mass == doctest::Approx(0.01));

  CHECK_THROWS_AS(threshold_sparsify(Heatmap(g, {{0, 0.5}, {1, 0.5}}), 0.5), Error);
  CHECK_THROWS_AS(threshold_sparsify(h, -0.1), Error);

  for (int i = 0; i < 50; ++i) {
    const Heatmap r = oracle::random_heatmap(rng);
    const double before = uncertainty(r).spread;
    const double after = uncertainty(threshold_sparsify(r, 1e-6).heatmap).spread;
    CHECK(std::abs(after - before) <= 0.005 * std::max(before, 1e-12));
  }
}
