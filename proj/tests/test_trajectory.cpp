#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "onramp/trajectory.hpp"

using namespace onramp;

namespace {

const RoadGeometry kG = paper_geometry();

// Composite Simpson on [a, b] with n (even) panels.
template <typename F>
double simpson(F f, double a, double b, int n = 2000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

Platoon make(int id, double v0, double arrival) {
  PlatoonParams p;
  p.id = id;
  p.size = 2;
  p.initial_speed = v0;
  p.arrival_time = arrival;
  return Platoon(p, kG);
}

}  // namespace

TEST(TimeOptimal, CruiseAtTopSpeed) {
  const auto plan = time_optimal_plan(25.0, kG, 3.0);
  EXPECT_EQ(plan.segments().size(), 1u);
  EXPECT_NEAR(plan.tm(), 9.0, 1e-12);
  EXPECT_NEAR(plan.eval(9.0).position, 150.0, 1e-12);
  EXPECT_EQ(plan.control_effort(), 0.0);
}

TEST(TimeOptimal, AccelerateThenCruise) {
  const auto plan = time_optimal_plan(20.0, kG, 0.0);
  ASSERT_EQ(plan.segments().size(), 2u);
  const double t_a = 5.0 / 3.0;
  EXPECT_NEAR(plan.segments()[0].t_end, t_a, 1e-12);
  EXPECT_NEAR(plan.tm(), 6.0 + 1.0 / 6.0, 1e-12);
  EXPECT_NEAR(plan.eval(plan.tm()).position, 150.0, 1e-9);
  EXPECT_NEAR(plan.eval(plan.tm()).speed, 25.0, 1e-12);
  EXPECT_DOUBLE_EQ(plan.eval(0.5).accel, 3.0);
  EXPECT_DOUBLE_EQ(plan.eval(3.0).accel, 0.0);
  EXPECT_NEAR(plan.control_effort(), 0.5 * 9.0 * t_a, 1e-12);
}

TEST(TimeOptimal, NoAdmissibleControlArrivesSooner) {
  // Forward-integrate full throttle with a fine step, clipping at v_max.
  for (double v0 : {0.0, 8.0, 17.5, 24.0}) {
    const double dt = 1e-5;
    double p = 0.0, v = v0, t = 0.0;
    while (p < kG.control_zone_length) {
      const double u = v < kG.v_max ? kG.u_max : 0.0;
      const double v_next = std::min(v + u * dt, kG.v_max);
      p += 0.5 * (v + v_next) * dt;
      v = v_next;
      t += dt;
    }
    EXPECT_NEAR(time_optimal_plan(v0, kG, 0.0).tm(), t, 1e-4) << "v0 = " << v0;
  }
}

TEST(TimeOptimal, Errors) {
  EXPECT_THROW(time_optimal_plan(26.0, kG, 0.0), PlanError);
  auto g = kG;
  g.control_zone_length = 50.0;
  EXPECT_THROW(time_optimal_plan(5.0, g, 0.0), PlanError);
}

TEST(EnergyOptimal, BoundaryConditions) {
  const auto plan = energy_optimal_plan(21.0, kG, 4.0, 4.0 + 7.5);
  const auto a = plan.eval(4.0);
  const auto b = plan.eval(11.5);
  EXPECT_NEAR(a.position, 0.0, 1e-12);
  EXPECT_NEAR(a.speed, 21.0, 1e-12);
  EXPECT_NEAR(b.position, 150.0, 1e-9);
  EXPECT_NEAR(b.speed, 25.0, 1e-9);
  EXPECT_EQ(plan.kind(), PlanKind::EnergyOptimal);
}

TEST(EnergyOptimal, ConstantsMatchDirectSolve) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> v0d(20.0, 25.0), t0d(0.0, 40.0), slack(0.05, 1.0);
  for (int k = 0; k < 50; ++k) {
    const double v0 = v0d(rng), t0 = t0d(rng);
    const double tm = t0 + entry_time(v0, kG) + slack(rng);
    Eigen::Matrix4d m;
    Eigen::Vector4d rhs;
    const auto row_p = [](double t) { return Eigen::RowVector4d(t * t * t / 6.0, t * t / 2.0, t, 1.0); };
    const auto row_v = [](double t) { return Eigen::RowVector4d(t * t / 2.0, t, 1.0, 0.0); };
    m << row_p(t0), row_v(t0), row_p(tm), row_v(tm);
    rhs << 0.0, v0, kG.control_zone_length, kG.v_max;
    const Eigen::Vector4d x = m.fullPivLu().solve(rhs);
    const auto k4 = energy_constants(v0, kG, t0, tm);
    const double scale = 1e-6;
    EXPECT_NEAR(k4.a, x(0), scale * std::max(1.0, std::abs(x(0))));
    EXPECT_NEAR(k4.b, x(1), scale * std::max(1.0, std::abs(x(1))));
    EXPECT_NEAR(k4.c, x(2), scale * std::max(1.0, std::abs(x(2))));
    EXPECT_NEAR(k4.d, x(3), scale * std::max(1.0, std::abs(x(3))));
  }
}

TEST(EnergyOptimal, ClosedFormCostMatchesQuadrature) {
  const auto plan = energy_optimal_plan(20.0, kG, 0.0, 7.2);
  const double numeric =
      simpson([&](double t) { return 0.5 * std::pow(plan.eval(t).accel, 2); }, 0.0, 7.2);
  EXPECT_NEAR(plan.control_effort(), numeric, 1e-9);
}

TEST(EnergyOptimal, DerivativesAreConsistent) {
  const auto plan = energy_optimal_plan(22.0, kG, 1.0, 8.0);
  const double h = 1e-5;
  for (double t : {1.5, 3.0, 5.5, 7.5}) {
    const auto s = plan.eval(t);
    EXPECT_NEAR((plan.eval(t + h).position - plan.eval(t - h).position) / (2 * h), s.speed, 1e-6);
    EXPECT_NEAR((plan.eval(t + h).speed - plan.eval(t - h).speed) / (2 * h), s.accel, 1e-6);
  }
}

TEST(EnergyOptimal, PerturbationsCostMore) {
  const double t0 = 0.0, tm = 7.0;
  const auto plan = energy_optimal_plan(21.0, kG, t0, tm);
  const double base = plan.control_effort();
  // Bumps that keep both boundary positions and speeds.
  for (double eps : {-1e-3, -1e-4, 1e-4, 1e-3}) {
    for (int shape = 0; shape < 2; ++shape) {
      const auto bump_acc = [&](double t) {
        const double x = t - t0, y = tm - t;
        if (shape == 0) return eps * (2 * y * y - 8 * x * y + 2 * x * x);  // (x^2 y^2)''
        return eps * (6 * x * y * y - 12 * x * x * y + 2 * x * x * x);  // (x^3 y^2)''
      };
      const double cost = simpson(
          [&](double t) { return 0.5 * std::pow(plan.eval(t).accel + bump_acc(t), 2); }, t0, tm);
      EXPECT_GT(cost, base) << "eps " << eps << " shape " << shape;
    }
  }
}

TEST(EnergyOptimal, ViolationsAreErrors) {
  try {
    energy_optimal_plan(20.0, kG, 0.0, 40.0);  // would have to nearly stop and reverse
    FAIL();
  } catch (const PlanError& e) {
    EXPECT_EQ(e.reason(), PlanError::Reason::ConstraintViolation);
  }
  try {
    energy_optimal_plan(20.0, kG, 0.0, 4.0);  // faster than physically possible
    FAIL();
  } catch (const PlanError& e) {
    EXPECT_EQ(e.reason(), PlanError::Reason::ConstraintViolation);
  }
  try {
    energy_optimal_plan(20.0, kG, 5.0, 5.0);
    FAIL();
  } catch (const PlanError& e) {
    EXPECT_EQ(e.reason(), PlanError::Reason::Singular);
  }
}

TEST(EnergyOptimal, SpeedVertexIsChecked) {
  // Ends are within limits; the speed dips below zero mid-horizon.
  const Segment s = linear_control_segment({0.0, 0.0, 2.0}, {30.0, 10.0, 2.0});
  EXPECT_FALSE(limit_violations(s, kG).empty());
}

TEST(Plan, EvalDomainAndJoins) {
  const auto plan = time_optimal_plan(20.0, kG, 0.0);
  EXPECT_NO_THROW(plan.eval(-1e-10));
  EXPECT_THROW(plan.eval(-1e-3), PlanError);
  EXPECT_THROW(plan.eval(plan.end() + 1.0), PlanError);
  EXPECT_THROW(TrajectoryPlan(PlanKind::Baseline, {}, 0.0), PlanError);
  const std::vector<Segment> gap{constant_accel_segment(0, 1, 0, 10, 0),
                                 constant_accel_segment(1.5, 2, 10, 10, 0)};
  EXPECT_THROW(TrajectoryPlan(PlanKind::Baseline, gap, 0.0), PlanError);
  const std::vector<Segment> jump{constant_accel_segment(0, 1, 0, 10, 0),
                                  constant_accel_segment(1, 2, 11, 10, 0)};
  EXPECT_THROW(TrajectoryPlan(PlanKind::Baseline, jump, 0.0), PlanError);
}

TEST(Plan, TimeAtPosition) {
  const auto plan = time_optimal_plan(20.0, kG, 2.0);
  EXPECT_NEAR(*plan.time_at_position(150.0), plan.tm(), 1e-9);
  EXPECT_NEAR(*plan.time_at_position(0.0), 2.0, 1e-12);
  EXPECT_FALSE(plan.time_at_position(151.0).has_value());
}

TEST(Plan, SpliceKeepsHistory) {
  const auto plan = time_optimal_plan(20.0, kG, 0.0);
  const double t = 1.0;
  const auto s = plan.eval(t);
  const auto cruise = constant_accel_segment(t, 10.0, s.position, s.speed, 0.0);
  const auto spliced = plan.spliced(t, {cruise}, PlanKind::Baseline, 0.0);
  EXPECT_EQ(spliced.eval(0.5).position, plan.eval(0.5).position);
  EXPECT_DOUBLE_EQ(spliced.eval(2.0).accel, 0.0);
  EXPECT_NEAR(spliced.eval(2.0).speed, s.speed, 1e-12);
  EXPECT_EQ(spliced.kind(), PlanKind::Baseline);

  const auto head = constant_accel_segment(-4.0, 0.0, -80.0, 20.0, 0.0);
  const auto longer = plan.prepended(head);
  EXPECT_EQ(longer.t0(), -4.0);
  EXPECT_NEAR(longer.eval(-2.0).position, -40.0, 1e-12);
}

TEST(PlanForSchedule, PicksKindBySlot) {
  const std::vector<Platoon> ps{make(1, 20.0, 2.0), make(2, 25.0, 0.0)};
  const auto s = build_schedule(ps, kG, 1.0, 0.0, 0.0);
  for (const auto& p : ps) {
    const auto plan = plan_for_schedule(p, s, kG);
    const auto& slot = s.at(p.id());
    EXPECT_NEAR(plan.tm(), slot.t_m, 1e-9);
    EXPECT_NEAR(plan.end(), slot.t_l, 1e-9);
    EXPECT_NEAR(plan.eval(slot.t_m).position, 150.0, 1e-9);
    EXPECT_NEAR(plan.eval(slot.t_l).speed, 25.0, 1e-9);
    const bool earliest = std::abs(slot.t_m - slot.earliest_entry) < 1e-9;
    EXPECT_EQ(plan.kind(), earliest ? PlanKind::TimeOptimal : PlanKind::EnergyOptimal);
  }
  EXPECT_THROW(plan_for_schedule(make(3, 25.0, 0.0), s, kG), PlanError);
}

TEST(PlanCsv, SamplesAtStep) {
  std::ostringstream out;
  write_plan_csv(out, time_optimal_plan(25.0, kG, 0.0), 0.5);
  std::istringstream in(out.str());
  std::string line;
  int rows = -1;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(out.str().substr(0, 22), "t,position,speed,accel");
  EXPECT_EQ(rows, 13);  // 0, 0.5, ..., 6.0
}
