#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "qhd/diagnostics.hpp"
#include "qhd/errors.hpp"
#include "support.hpp"

using namespace qhd;
using qhd::test::max_abs_diff;

namespace {

UniformGrid step_grid(double hx = 0.05, double L = 5.0) {
  return build_grid(StepGeometry{1.0, 0.5, L, 0.0}, hx);
}

FlowState frame(const UniformGrid& g, double t, double ux, double uy = 0.0) {
  FlowState s(g.nx(), g.ny());
  s.ux.fill(ux);
  s.uy.fill(uy);
  s.t = t;
  return s;
}

/// Near-wall row u = tanh((x - xr) / 0.3) downstream of the step, zero on the wall.
Field2D bubble(const UniformGrid& g, double xr) {
  Field2D u(g.nx(), g.ny());
  for (int j = 1; j < g.ny() - 1; ++j)
    for (int i = 1; i < g.nx(); ++i) u(i, j) = j <= 3 ? std::tanh((g.x(i) - xr) / 0.3) : 1.0;
  return u;
}

}  // namespace

TEST_CASE("time averaging") {
  const auto g = step_grid(0.1);
  SUBCASE("constant field is a fixed point") {
    std::vector<FlowState> s = {frame(g, 1, 0.7, 0.2), frame(g, 1.5, 0.7, 0.2), frame(g, 2, 0.7, 0.2)};
    const auto avg = accumulate_average(s);
    CHECK(max_abs_diff(avg.ux_av, Field2D(g.nx(), g.ny(), 0.7)) < 1e-15);
    CHECK(max_abs_diff(avg.uy_av, Field2D(g.nx(), g.ny(), 0.2)) < 1e-15);
    CHECK(avg.n_frames == 3);
    CHECK(avg.t1 == 1.0);
    CHECK(avg.t2 == 2.0);
  }
  SUBCASE("trapezoid is exact for linear time dependence") {
    std::vector<FlowState> s = {frame(g, 0, 0), frame(g, 0.5, 0.5), frame(g, 1, 1)};
    CHECK(max_abs_diff(accumulate_average(s).ux_av, Field2D(g.nx(), g.ny(), 0.5)) < 1e-15);
  }
  SUBCASE("two frames give the two-point quadrature") {
    std::vector<FlowState> s = {frame(g, 60, 0.2), frame(g, 61, 0.6)};
    CHECK(max_abs_diff(accumulate_average(s).ux_av, Field2D(g.nx(), g.ny(), 0.4)) < 1e-15);
  }
  SUBCASE("averaging is linear") {
    std::mt19937_64 rng(1);
    std::vector<FlowState> s, scaled;
    for (int n = 0; n < 5; ++n) {
      FlowState f(g.nx(), g.ny());
      f.ux = qhd::test::random_field(g.nx(), g.ny(), rng);
      f.t = 0.5 * n;
      FlowState f2 = f;
      for (double& v : f2.ux.values()) v *= -3.5;
      s.push_back(f);
      scaled.push_back(f2);
    }
    const auto a = accumulate_average(s), b = accumulate_average(scaled);
    for (std::size_t k = 0; k < a.ux_av.size(); ++k) CHECK(b.ux_av[k] == doctest::Approx(-3.5 * a.ux_av[k]));
  }
  SUBCASE("short snapshot windows at solver step multiples") {
    std::vector<FlowState> s;
    for (int n = 0; n <= 150; ++n) s.push_back(frame(g, 60 + n * 1e-4, 1.0 + n * 1e-4));
    const auto avg = accumulate_average(s);
    CHECK(avg.t2 - avg.t1 == doctest::Approx(0.015));
    CHECK(avg.ux_av(3, 3) == doctest::Approx(1.0075).epsilon(1e-9));
  }
  SUBCASE("preconditions") {
    std::vector<FlowState> one = {frame(g, 0, 1)};
    CHECK_THROWS_AS(accumulate_average(one), UsageError);
    std::vector<FlowState> uneven = {frame(g, 0, 1), frame(g, 0.5, 1), frame(g, 1.5, 1)};
    CHECK_THROWS_AS(accumulate_average(uneven), UsageError);
  }
}

TEST_CASE("stream function") {
  SUBCASE("uniform flow gives psi = y") {
    const auto g = build_grid(StepGeometry{1.0, 0.0, 2.0, 0.0}, 0.05);
    const Field2D psi = stream_function(Field2D(g.nx(), g.ny(), 1.0), g);
    for (int j = 0; j < g.ny(); ++j) CHECK(psi(7, j) == doctest::Approx(g.y(j)).epsilon(1e-13));
  }
  SUBCASE("Poiseuille profile against its antiderivative, second order") {
    auto err = [](double h) {
      const auto g = build_grid(StepGeometry{1.0, 0.0, 2.0, 0.0}, h);
      const double H = g.y(g.ny() - 1);
      Field2D u(g.nx(), g.ny());
      for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) {
          const double s = g.y(j) / H;
          u(i, j) = 6 * s * (1 - s);
        }
      const Field2D psi = stream_function(u, g);
      double e = 0.0;
      for (int j = 0; j < g.ny(); ++j) {
        const double s = g.y(j) / H;
        e = std::max(e, std::abs(psi(3, j) - H * (3 * s * s - 2 * s * s * s)));
      }
      CHECK(psi(3, g.ny() - 1) == doctest::Approx(H).epsilon(2 * h * h));
      return e;
    };
    const double r = err(0.05) / err(0.025);
    CHECK(r > 3.5);
    CHECK(r < 4.5);
  }
  SUBCASE("d psi / dy recovers ux at second order") {
    auto err = [](double h) {
      const auto g = build_grid(StepGeometry{1.0, 0.0, 2.0, 0.0}, h);
      Field2D u(g.nx(), g.ny());
      for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) u(i, j) = std::sin(3 * g.y(j)) + g.x(i);
      const Field2D psi = stream_function(u, g);
      double e = 0.0;
      for (int j = 1; j < g.ny() - 1; ++j)
        e = std::max(e, std::abs((psi(4, j + 1) - psi(4, j - 1)) / (2 * h) - u(4, j)));
      return e;
    };
    const double r = err(0.05) / err(0.025);
    CHECK(r > 3.5);
    CHECK(r < 4.5);
  }
  SUBCASE("psi is zero on the stepped wall and on the step crest") {
    const auto g = step_grid(0.05);
    std::mt19937_64 rng(2);
    const Field2D psi = stream_function(qhd::test::random_field(g.nx(), g.ny(), rng), g);
    for (int i = 0; i < g.nx(); ++i) CHECK(psi(i, 0) == 0.0);
  }
}

TEST_CASE("averaging commutes with the stream function") {
  const auto g = build_grid(StepGeometry{1.0, 0.5, 3.0, 1.0}, 0.05);
  std::mt19937_64 rng(99);
  for (int set = 0; set < 5; ++set) {
    std::vector<FlowState> frames;
    std::vector<FlowState> psis;
    for (int n = 0; n < 4 + set; ++n) {
      FlowState f(g.nx(), g.ny());
      f.ux = qhd::test::random_field(g.nx(), g.ny(), rng);
      f.t = 0.5 * n;
      FlowState p(g.nx(), g.ny());
      p.ux = stream_function(f.ux, g);
      p.t = f.t;
      frames.push_back(std::move(f));
      psis.push_back(std::move(p));
    }
    const Field2D a = stream_function(accumulate_average(frames), g);
    const Field2D b = accumulate_average(psis).ux_av;
    CHECK(max_abs_diff(a, b) < 1e-10);
  }
}

TEST_CASE("reattachment length") {
  const auto g = step_grid(0.0125);
  SUBCASE("uniform forward flow") {
    Field2D u(g.nx(), g.ny(), 1.0);
    const auto r = reattachment_length(u, g);
    CHECK(r.kind == Reattachment::Kind::Attached);
    CHECK(r.length_over_h == 0.0);
  }
  SUBCASE("sign change located by interpolation") {
    const auto r = reattachment_length(bubble(g, 3.0), g);
    CHECK(r.kind == Reattachment::Kind::Bounded);
    CHECK(r.x == doctest::Approx(3.0).epsilon(1e-4));
    CHECK(r.length_over_h == doctest::Approx(6.0).epsilon(1e-4));
  }
  SUBCASE("the most downstream crossing after a negative run wins") {
    Field2D u = bubble(g, 3.0);
    for (int i = 0; i < g.nx(); ++i)
      if (g.x(i) > 1.0 && g.x(i) < 1.03) u(i, 1) = 0.5;  // short positive blip inside the bubble
    CHECK(reattachment_length(u, g).x == doctest::Approx(3.0).epsilon(1e-4));
  }
  SUBCASE("reversal reaching the outlet band") {
    Field2D u = bubble(g, 9.0);
    const int n = g.nx();
    for (int i = n - 4; i < n; ++i) u(i, 1) = 0.01;  // outflow lifts the last columns
    CHECK(reattachment_length(u, g).unbounded());
    u(n - 5, 1) = 0.01;
    const auto r = reattachment_length(u, g);
    CHECK(r.kind == Reattachment::Kind::Bounded);
    CHECK(r.x < g.x(n - 5));
  }
  SUBCASE("recirculation through the outlet") {
    const auto r = reattachment_length(bubble(g, 9.0), g);
    CHECK(r.unbounded());
    CHECK(std::isnan(r.length_over_h));
  }
  SUBCASE("mirrored field gives the same length") {
    const auto gm = build_grid(StepGeometry{1.0, 0.5, 5.0, 0.0}.mirrored(), 0.0125);
    const Field2D u = bubble(g, 2.2);
    Field2D um(g.nx(), g.ny());
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) um(i, g.ny() - 1 - j) = u(i, j);
    CHECK(reattachment_length(um, gm).length_over_h == reattachment_length(u, g).length_over_h);
  }
}

TEST_CASE("dividing streamline of a smooth bubble meets the wall regularly") {
  const auto g = step_grid(0.025);
  // closed bubble psi = -a * y (h - y) ... built from a velocity field whose
  // near-wall layer reverses until x = 2
  Field2D u(g.nx(), g.ny());
  const double xr = 2.0, h = 0.5;
  for (int j = 1; j < g.ny() - 1; ++j)
    for (int i = 1; i < g.nx(); ++i) {
      const double y = g.y(j), x = g.x(i);
      const double depth = x < xr ? h * (1.0 - x / xr) : 0.0;  // bubble height above the wall
      u(i, j) = y < depth ? -0.2 * std::sin(std::numbers::pi * y / depth) : 1.0 - std::exp(-(y - depth) / 0.05);
    }
  const Field2D psi = stream_function(u, g);
  const auto ra = reattachment_length(u, g);
  REQUIRE(ra.kind == Reattachment::Kind::Bounded);
  const auto line = dividing_streamline(psi, g);
  CHECK(line.size() == static_cast<std::size_t>(g.nx()));
  CHECK(dividing_streamline_regular(psi, g, ra.x));
}

TEST_CASE("probe recording and series invariants") {
  const auto g = step_grid(0.05);
  ProbeRecorder rec(g, {{1.0, 0.75}, {2.0, 0.75}}, 0.05, 1e-4);
  CHECK(rec.stride() == 500);
  FlowState s(g.nx(), g.ny());
  s.ux.fill(1.0);
  for (std::int64_t step = 0; step <= 2000; ++step) {
    s.step = step;
    s.t = step * 1e-4;
    rec.observe(s);
  }
  REQUIRE(rec.series().size() == 2);
  const auto& p = rec.series()[0];
  CHECK(p.samples.size() == 5);
  CHECK_NOTHROW(p.validate());
  CHECK(p.samples.back().t == doctest::Approx(0.2));
  CHECK(p.component(Component::Ux, 0.1).size() == 3);
  ProbeSeries bad = p;
  bad.samples[2].t += 1e-6;
  CHECK_THROWS_AS(bad.validate(), UsageError);
}

TEST_CASE("bilinear sampling reproduces bilinear fields") {
  const auto g = step_grid(0.05);
  Field2D f(g.nx(), g.ny());
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) f(i, j) = 2 * g.x(i) - 3 * g.y(j) + g.x(i) * g.y(j);
  for (auto [x, y] : {std::pair{1.013, 0.412}, {3.3, 0.77}, {0.01, 0.51}})
    CHECK(sample_bilinear(g, f, x, y) == doctest::Approx(2 * x - 3 * y + x * y).epsilon(1e-12));
}

TEST_CASE("particle tracing") {
  const auto g = step_grid(0.05);
  SUBCASE("uniform stream carries particles straight to the outlet") {
    std::vector<FlowState> s;
    for (int n = 0; n <= 12; ++n) s.push_back(frame(g, 0.5 * n, 1.0));
    const std::vector<Point> seeds = {{0.0, 0.75}};
    const auto tr = trace_particles(s, g, seeds);
    REQUIRE(tr.size() == 1);
    CHECK(tr[0].stop == Trajectory::Stop::Outlet);
    for (const auto& p : tr[0].points) {
      CHECK(p[2] == doctest::Approx(0.75));
      CHECK(p[1] == doctest::Approx(p[0]).epsilon(1e-9));
    }
  }
  SUBCASE("zero field leaves particles in place") {
    std::vector<FlowState> s = {frame(g, 0, 0), frame(g, 0.5, 0)};
    const std::vector<Point> seeds = {{1.0, 0.3}};
    const auto tr = trace_particles(s, g, seeds);
    CHECK(tr[0].stop == Trajectory::Stop::EndOfData);
    CHECK(tr[0].points.back()[1] == 1.0);
    CHECK(tr[0].points.back()[2] == 0.3);
  }
  SUBCASE("solid-body rotation keeps its radius") {
    const auto gr = build_grid(StepGeometry{1.0, 0.0, 2.0, 0.0}, 0.025);
    const double cx = 1.0, cy = 0.5;
    FlowState f(gr.nx(), gr.ny());
    for (int j = 0; j < gr.ny(); ++j)
      for (int i = 0; i < gr.nx(); ++i) {
        f.ux(i, j) = -(gr.y(j) - cy);
        f.uy(i, j) = gr.x(i) - cx;
      }
    std::vector<FlowState> s;
    const double period = 2 * std::numbers::pi;
    for (int n = 0; 0.5 * (n - 1) < period; ++n) {
      s.push_back(f);
      s.back().t = 0.5 * n;
    }
    const std::vector<Point> seeds = {{cx + 0.3, cy}};
    const auto tr = trace_particles(s, gr, seeds, 1e-3);
    const double t_end = s.back().t;
    // radius after one revolution
    for (const auto& p : tr[0].points) {
      if (p[0] < period) continue;
      const double r = std::hypot(p[1] - cx, p[2] - cy);
      CHECK(std::abs(r - 0.3) / 0.3 < 0.01);
      break;
    }
    CHECK(tr[0].points.back()[0] == doctest::Approx(t_end).epsilon(1e-6));
  }
  SUBCASE("seeds outside the fluid are rejected") {
    const auto gs = build_grid(StepGeometry{1.0, 0.5, 3.0, 1.0}, 0.05);
    std::vector<FlowState> s = {frame(gs, 0, 1)};
    const std::vector<Point> seeds = {{0.5, 0.2}};
    CHECK_THROWS_AS(trace_particles(s, gs, seeds), UsageError);
    std::vector<FlowState> gap = {frame(gs, 0, 1), frame(gs, 1.0, 1)};
    const std::vector<Point> ok = {{2.0, 0.7}};
    CHECK_THROWS_AS(trace_particles(gap, gs, ok), UsageError);
  }
}
