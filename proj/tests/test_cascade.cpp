#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "psta/cascade.hpp"

using namespace psta;

namespace {

CascadeGains psta_gains(double h = 1e-3) {
  CascadeGains g;
  g.kind = ControllerKind::Psta;
  for (int i = 0; i < 3; ++i) g.psta[i] = PstaGains{20.0, 200.0, 0.5, 0.5, 2.0, 30.0, h};
  for (int i = 3; i < 6; ++i) g.psta[i] = PstaGains{60.0, 1500.0, 0.05, 20.0, 20.0, 400.0, h};
  return g;
}

QuadParams heavy_quad() {
  QuadParams p;
  p.m = 3.81;
  p.J = Vec3(0.1, 0.1, 0.1);
  return p;
}

void expect_rotation(const Mat3& R) {
  EXPECT_LE((R.transpose() * R - Mat3::Identity()).norm(), 1e-12);
  EXPECT_NEAR(R.determinant(), 1.0, 1e-12);
}

}  // namespace

TEST(DesiredAttitude, Upright) {
  const DesiredAttitude d = desired_attitude(Vec3(0, 0, 9.81), 0.0);
  EXPECT_LE((d.R_d - Mat3::Identity()).norm(), 1e-12);
  EXPECT_FALSE(d.held_previous);
}

TEST(DesiredAttitude, YawQuarterTurn) {
  const DesiredAttitude d = desired_attitude(Vec3(0, 0, 9.81), 0.5 * std::numbers::pi);
  EXPECT_LE((d.R_d - rot_z(0.5 * std::numbers::pi)).norm(), 1e-12);
}

TEST(DesiredAttitude, TiltedThrust) {
  const Vec3 a(1.0, 0.0, 9.81);
  const DesiredAttitude d = desired_attitude(a, 0.0);
  expect_rotation(d.R_d);
  EXPECT_LE((d.R_d.col(2) - a.normalized()).norm(), 1e-12);
  // body x stays in the vertical plane containing the heading
  EXPECT_NEAR(d.R_d.col(0).y(), 0.0, 1e-12);
  EXPECT_GT(d.R_d.col(0).x(), 0.0);
}

TEST(DesiredAttitude, YawMatchesHeadingForSmallTilt) {
  for (double psi : {-2.5, -1.0, 0.3, 1.7, 3.0}) {
    const DesiredAttitude d = desired_attitude(Vec3(0.2, -0.1, 9.81), psi);
    expect_rotation(d.R_d);
    EXPECT_NEAR(std::remainder(to_rpy(d.R_d).z() - psi, 2.0 * std::numbers::pi), 0.0, 1e-2);
  }
}

TEST(DesiredAttitude, HeadingFallback) {
  const DesiredAttitude d = desired_attitude(Vec3(1.0, 0.0, 0.0), 0.0);
  EXPECT_TRUE(d.heading_fallback);
  expect_rotation(d.R_d);
  EXPECT_LE((d.R_d.col(2) - Vec3::UnitX()).norm(), 1e-12);
}

TEST(DesiredAttitude, HoldsPreviousOnZeroDemand) {
  const Mat3 prev = rot_x(0.3);
  const DesiredAttitude d = desired_attitude(Vec3::Zero(), 0.0, prev);
  EXPECT_TRUE(d.held_previous);
  EXPECT_EQ(d.R_d, prev);
}

TEST(AttitudeErrors, SmallAngle) {
  const double a = 1e-3;
  const AttitudeErrors e = attitude_errors(rot_x(a), Mat3::Identity(), Vec3::Zero(), Vec3::Zero());
  EXPECT_NEAR(e.e_R.x(), a, a * a * a);
  EXPECT_NEAR(e.e_R.y(), 0.0, 1e-15);
  EXPECT_NEAR(e.e_R.z(), 0.0, 1e-15);
}

TEST(AttitudeErrors, SkewSymmetric) {
  const Mat3 R = from_rpy(0.3, -0.2, 1.1);
  const Mat3 Rd = from_rpy(-0.1, 0.4, 0.2);
  const AttitudeErrors a = attitude_errors(R, Rd, Vec3::Zero(), Vec3::Zero());
  const AttitudeErrors b = attitude_errors(Rd, R, Vec3::Zero(), Vec3::Zero());
  EXPECT_LE((a.e_R + b.e_R).norm(), 1e-14);
  EXPECT_LE(attitude_errors(R, R, Vec3::Zero(), Vec3::Zero()).e_R.norm(), 1e-15);
}

TEST(AttitudeErrors, AngularVelocity) {
  const Mat3 R = rot_z(0.5 * std::numbers::pi);
  const AttitudeErrors e = attitude_errors(R, Mat3::Identity(), Vec3(1, 2, 3), Vec3(1, 0, 0));
  // omega_d expressed in the body frame: R^T (1,0,0) = (0,-1,0)
  EXPECT_LE((e.e_omega - Vec3(1, 3, 3)).norm(), 1e-12);
}

TEST(PositionLoop, SlidingVariable) {
  RigidBodyState s;
  ReferenceSample ref;
  ref.p_d = Vec3(0, 0, 1);
  const Vec3 sigma = translational_sliding(s, ref, Vec3::Constant(0.1));
  EXPECT_DOUBLE_EQ(sigma.z(), 1.0);
  EXPECT_EQ(sigma.x(), 0.0);
}

TEST(Cascade, HoverEquilibrium) {
  const QuadParams q = heavy_quad();
  CascadeController c(psta_gains(), q);
  RigidBodyState s;
  s.p = Vec3(0.0, 0.0, 1.0);
  ReferenceSample ref;
  ref.p_d = s.p;
  const ControlInput u = c.update(s, ref);
  EXPECT_NEAR(u.f_u, q.m * q.g, 1e-12);
  EXPECT_LE(u.M_u.norm(), 1e-12);

  const RigidBodyState start = s;
  for (int k = 0; k < 1000; ++k) {
    s = integrate_step(s, c.update(s, ref), Wrench{}, q, k * 1e-3, 1e-3);
  }
  EXPECT_LE((s.p - start.p).norm(), 1e-6);
  EXPECT_LE((s.R - start.R).norm(), 1e-6);
}

TEST(Cascade, ThreadsKernelStateAcrossSteps) {
  const QuadParams q = heavy_quad();
  const CascadeGains g = psta_gains();
  CascadeController c(g, q);

  std::array<AxisKernel, 3> pos{make_axis(g, 0), make_axis(g, 1), make_axis(g, 2)};
  std::array<AxisKernel, 3> att{make_axis(g, 3), make_axis(g, 4), make_axis(g, 5)};
  const Vec3 Ht = Vec3::Constant(g.psta[0].H);
  const Vec3 Hr = Vec3::Constant(g.psta[3].H);

  RigidBodyState s;
  s.p = Vec3(0.1, -0.2, 0.3);
  s.R = from_rpy(0.05, -0.02, 0.1);
  s.omega = Vec3(0.1, 0.0, -0.1);
  ReferenceSample ref;
  ref.p_d = Vec3(0.0, 0.0, 1.0);
  ref.psi_d = 0.2;

  Mat3 R_prev = Mat3::Identity();
  for (int k = 0; k < 2; ++k) {
    const ControlInput u = c.update(s, ref);
    const PositionLoopResult p = position_loop(s, ref, Ht, pos, q, CascadeOptions{});
    const DesiredAttitude d = desired_attitude(p.a_desired, ref.psi_d, R_prev);
    R_prev = d.R_d;
    const AttitudeLoopResult a = attitude_loop(attitude_errors(s.R, d.R_d, s.omega, Vec3::Zero()), Hr, att, q.J);
    EXPECT_EQ(u.f_u, p.f_u);
    EXPECT_EQ(u.M_u, a.M_u);
    s = integrate_step(s, u, Wrench{}, q, k * 1e-3, 1e-3);
  }
}

TEST(Cascade, AttitudeLoopScalesByInertia) {
  CascadeGains g = psta_gains();
  const Vec3 J(0.007, 0.007, 0.012);
  std::array<AxisKernel, 3> a1{make_axis(g, 3), make_axis(g, 4), make_axis(g, 5)};
  std::array<AxisKernel, 3> a2{make_axis(g, 3), make_axis(g, 4), make_axis(g, 5)};
  AttitudeErrors e;
  e.e_R = Vec3(0.01, -0.02, 0.03);
  const AttitudeLoopResult r = attitude_loop(e, Vec3::Constant(0.05), a1, J);
  const AttitudeLoopResult unit = attitude_loop(e, Vec3::Constant(0.05), a2, Vec3::Ones());
  EXPECT_LE((r.M_u - J.cwiseProduct(unit.M_u)).norm(), 1e-15);
  // restoring: positive attitude error gives negative moment
  EXPECT_LT(r.M_u.x(), 0.0);
  EXPECT_GT(r.M_u.y(), 0.0);
}

TEST(Cascade, ThrustClamp) {
  const QuadParams q = heavy_quad();
  CascadeController c(psta_gains(), q);
  RigidBodyState s;
  ReferenceSample ref;
  ref.p_d = Vec3(0.0, 0.0, -100.0);
  ref.pd_dot = Vec3(0.0, 0.0, -100.0);
  EXPECT_GE(c.update(s, ref).f_u, 0.0);
  ref.p_d = Vec3(0.0, 0.0, 100.0);
  ref.pd_dot = Vec3(0.0, 0.0, 100.0);
  CascadeController c2(psta_gains(), q);
  EXPECT_LE(c2.update(s, ref).f_u, 2.0 * q.m * q.g + 1e-12);
}

TEST(Cascade, RejectsMixedPeriods) {
  CascadeGains g = psta_gains();
  g.psta[4].h = 2e-3;
  EXPECT_THROW(CascadeController(g, heavy_quad()), std::invalid_argument);
}
