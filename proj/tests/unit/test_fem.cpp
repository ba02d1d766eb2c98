#include "crossvec/fem/element.hpp"
#include "crossvec/fem/operator.hpp"
#include "crossvec/ir/interpret.hpp"
#include "crossvec/ir/validate.hpp"

#include "symbolic.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace crossvec;
using namespace crossvec::fem;
using oracle::Q;

namespace {

const CellKind kCells[] = {CellKind::triangle, CellKind::quadrilateral};
const Form kForms[] = {Form::mass, Form::helmholtz, Form::laplacian, Form::elasticity};

struct LocalRun {
  std::vector<double> A;
  ir::FlopCount flops;
};

LocalRun run_local(const OperatorSpec& spec, const QuadratureRule& rule, const std::vector<double>& coords,
                   const std::vector<double>& w)
{
  auto k = build_local_kernel(spec, rule);
  LocalRun r;
  r.A.assign(static_cast<std::size_t>(spec.element.ndofs()), 0.0);
  ir::Bindings b{{"A", std::span<double>(r.A)},
                 {"coords", std::span<const double>(coords)},
                 {"w_0", std::span<const double>(w)}};
  r.flops = ir::interpret(k, b, {});
  return r;
}

std::vector<double> reference_coords(CellKind cell)
{
  std::vector<double> c;
  for (auto p : ReferenceCell{cell}.vertices()) {
    c.push_back(p[0]);
    c.push_back(p[1]);
  }
  return c;
}

double max_rel(const std::vector<double>& a, const std::vector<double>& b)
{
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num = std::max(num, std::abs(a[i] - b[i]));
    den = std::max(den, std::abs(b[i]));
  }
  return den > 0 ? num / den : num;
}

} // namespace

TEST(Element, DofCounts)
{
  EXPECT_EQ(reference_element({CellKind::triangle}, 1).ndof_scalar, 3);
  EXPECT_EQ(reference_element({CellKind::triangle}, 2).ndof_scalar, 6);
  EXPECT_EQ(reference_element({CellKind::quadrilateral}, 2).ndof_scalar, 9);
  for (int k = 1; k <= kMaxElementDegree; ++k) {
    EXPECT_EQ(reference_element({CellKind::triangle}, k).ndof_scalar, (k + 1) * (k + 2) / 2);
    EXPECT_EQ(reference_element({CellKind::quadrilateral}, k, 2).ndofs(), 2 * (k + 1) * (k + 1));
  }
}

TEST(Element, Errors)
{
  EXPECT_THROW(reference_element({CellKind::triangle}, 0), InvalidArgument);
  EXPECT_THROW(reference_element({CellKind::triangle}, 5), InvalidArgument);
  EXPECT_THROW(reference_element({CellKind::quadrilateral}, 1, 3), InvalidArgument);
  EXPECT_THROW(parse_cell_kind("hex"), InvalidArgument);
  EXPECT_EQ(parse_cell_kind("tri"), CellKind::triangle);
  EXPECT_EQ(parse_cell_kind("quadrilateral"), CellKind::quadrilateral);
}

TEST(Element, NodeOrdering)
{
  auto e = reference_element({CellKind::triangle}, 3);
  // Vertices, then two nodes per edge from lower to higher vertex, then the centroid.
  EXPECT_EQ(e.nodes[0], (Point{0, 0}));
  EXPECT_EQ(e.nodes[1], (Point{1, 0}));
  EXPECT_EQ(e.nodes[2], (Point{0, 1}));
  EXPECT_NEAR(e.nodes[3][0], 1.0 / 3, 1e-15);
  EXPECT_NEAR(e.nodes[4][0], 2.0 / 3, 1e-15);
  EXPECT_NEAR(e.nodes[9][0], 1.0 / 3, 1e-15);
  EXPECT_NEAR(e.nodes[9][1], 1.0 / 3, 1e-15);
  EXPECT_EQ(e.interior_nodes(), 1);
}

TEST(Element, KroneckerAtNodes)
{
  for (auto cell : kCells) {
    for (int k = 1; k <= kMaxElementDegree; ++k) {
      auto e = reference_element({cell}, k);
      for (int i = 0; i < e.ndof_scalar; ++i) {
        auto v = e.evaluate(e.nodes[i]);
        for (int j = 0; j < e.ndof_scalar; ++j) {
          EXPECT_NEAR(v[j], i == j ? 1.0 : 0.0, 1e-12);
        }
      }
    }
  }
}

TEST(Element, PartitionOfUnityAndGradientSum)
{
  for (auto cell : kCells) {
    for (int k = 1; k <= kMaxElementDegree; ++k) {
      auto e = reference_element({cell}, k);
      auto rule = quadrature_rule({cell}, 2 * k);
      auto t = tabulate(e, rule);
      for (int q = 0; q < t.npoints; ++q) {
        double sum = 0.0;
        double g0 = 0.0;
        double g1 = 0.0;
        for (int i = 0; i < t.ndof; ++i) {
          sum += t.value(q, i);
          g0 += t.grad(q, i, 0);
          g1 += t.grad(q, i, 1);
        }
        EXPECT_NEAR(sum, 1.0, 1e-13);
        EXPECT_NEAR(g0, 0.0, 1e-12);
        EXPECT_NEAR(g1, 0.0, 1e-12);
      }
    }
  }
}

TEST(Element, P1Tabulation)
{
  auto e = reference_element({CellKind::triangle}, 1);
  auto t = tabulate(e, std::vector<Point>{{1.0 / 3, 1.0 / 3}});
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(t.value(0, i), 1.0 / 3, 1e-15);
  }
  EXPECT_DOUBLE_EQ(t.grad(0, 0, 0), -1.0);
  EXPECT_DOUBLE_EQ(t.grad(0, 0, 1), -1.0);
  EXPECT_DOUBLE_EQ(t.grad(0, 1, 0), 1.0);
  EXPECT_DOUBLE_EQ(t.grad(0, 1, 1), 0.0);
  EXPECT_DOUBLE_EQ(t.grad(0, 2, 0), 0.0);
  EXPECT_DOUBLE_EQ(t.grad(0, 2, 1), 1.0);
}

TEST(Element, MatchesExactBasis)
{
  for (auto cell : kCells) {
    for (int k = 1; k <= 3; ++k) {
      auto e = reference_element({cell}, k);
      auto exact = oracle::lagrange_basis(cell, k, oracle::rational_nodes(e));
      for (Point p : {Point{0.1, 0.2}, Point{0.3, 0.05}, Point{0.25, 0.5}}) {
        auto v = e.evaluate(p);
        auto g = e.evaluate_gradients(p);
        Q x(static_cast<long>(std::lround(p[0] * 100)), 100);
        Q y(static_cast<long>(std::lround(p[1] * 100)), 100);
        for (int j = 0; j < e.ndof_scalar; ++j) {
          EXPECT_NEAR(v[j], oracle::to_double(exact[j](x, y)), 1e-12);
          EXPECT_NEAR(g[2 * j], oracle::to_double(exact[j].derivative(0)(x, y)), 1e-11);
          EXPECT_NEAR(g[2 * j + 1], oracle::to_double(exact[j].derivative(1)(x, y)), 1e-11);
        }
      }
    }
  }
}

TEST(Quadrature, WeightSums)
{
  auto t = quadrature_rule({CellKind::triangle}, 1);
  EXPECT_NEAR(std::accumulate(t.weights.begin(), t.weights.end(), 0.0), 0.5, 1e-15);
  for (int d = 0; d <= max_quadrature_degree(CellKind::triangle); ++d) {
    auto r = quadrature_rule({CellKind::triangle}, d);
    EXPECT_NEAR(std::accumulate(r.weights.begin(), r.weights.end(), 0.0), 0.5, 1e-14) << d;
    EXPECT_TRUE(std::all_of(r.weights.begin(), r.weights.end(), [](double w) { return w > 0; })) << d;
  }
  auto q = quadrature_rule({CellKind::quadrilateral}, 3);
  EXPECT_EQ(q.size(), 4u);
  EXPECT_NEAR(std::accumulate(q.weights.begin(), q.weights.end(), 0.0), 1.0, 1e-15);
}

TEST(Quadrature, XSquaredYSquared)
{
  auto rule = quadrature_rule({CellKind::triangle}, 4);
  double sum = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    sum += rule.weights[q] * std::pow(rule.points[q][0], 2) * std::pow(rule.points[q][1], 2);
  }
  EXPECT_EQ(oracle::integrate(CellKind::triangle, oracle::Poly::monomial(2, 2)), Q(1, 180));
  EXPECT_NEAR(sum, 1.0 / 180, 1e-15);
}

TEST(Quadrature, ExactForAllMonomials)
{
  for (auto cell : kCells) {
    // Every distinct rule: tensor rules only change at even degrees.
    for (int d = 0; d <= max_quadrature_degree(cell); d += cell == CellKind::quadrilateral ? 2 : 1) {
      auto rule = quadrature_rule({cell}, d);
      EXPECT_GE(rule.exactness_degree, d);
      const int e = rule.exactness_degree;
      for (int a = 0; a <= e; ++a) {
        for (int b = 0; b <= (cell == CellKind::triangle ? e - a : e); ++b) {
          double sum = 0.0;
          for (std::size_t q = 0; q < rule.size(); ++q) {
            sum += rule.weights[q] * std::pow(rule.points[q][0], a) * std::pow(rule.points[q][1], b);
          }
          double exact = oracle::to_double(oracle::integrate(cell, oracle::Poly::monomial(a, b)));
          EXPECT_NEAR(sum, exact, 1e-13) << to_string(cell) << " degree " << d << " x^" << a << " y^" << b;
        }
      }
      for (const auto& p : rule.points) {
        EXPECT_TRUE(ReferenceCell{cell}.contains(p));
      }
    }
  }
}

TEST(Quadrature, DegreeTooHigh)
{
  try {
    quadrature_rule({CellKind::triangle}, max_quadrature_degree(CellKind::triangle) + 1);
    FAIL();
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find(std::to_string(max_quadrature_degree(CellKind::triangle))),
              std::string::npos);
  }
  EXPECT_THROW(quadrature_rule({CellKind::triangle}, -1), InvalidArgument);
}

TEST(Quadrature, GaussLegendre)
{
  std::vector<double> x;
  std::vector<double> w;
  gauss_legendre(3, x, w);
  ASSERT_EQ(x.size(), 3u);
  EXPECT_NEAR(x[0], 0.5 - std::sqrt(0.15), 1e-15);
  EXPECT_NEAR(w[1], 4.0 / 9, 1e-15);
}

TEST(Operator, ValueSizes)
{
  EXPECT_EQ(form_value_size(Form::mass), 1);
  EXPECT_EQ(form_value_size(Form::elasticity), 2);
  auto spec = make_operator(Form::mass, CellKind::triangle, 1);
  spec.element = reference_element({CellKind::triangle}, 1, 2);
  EXPECT_THROW(check_operator(spec), InvalidArgument);
  try {
    parse_form("stokes");
    FAIL();
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("mass, helmholtz, laplacian, elasticity"), std::string::npos);
  }
}

TEST(Operator, TriangleJacobianHoisted)
{
  auto spec = make_operator(Form::helmholtz, CellKind::triangle, 2);
  auto k = build_local_kernel(spec, quadrature_rule({CellKind::triangle}, quadrature_degree(spec)));
  EXPECT_TRUE(ir::validate(k).empty());
  EXPECT_EQ(k.iname("i").upper, std::vector<ir::Expr>{ir::integer(6)});
  EXPECT_EQ(k.iname("j").upper, std::vector<ir::Expr>{ir::integer(6)});
  int jacobian = 0;
  for (const auto& s : k.statements) {
    if (s.lhs.array.rfind("jac", 0) == 0 || s.lhs.array == "det") {
      ++jacobian;
      EXPECT_FALSE(s.is_within("ip")) << s.id;
    }
  }
  EXPECT_GT(jacobian, 0);
}

TEST(Operator, QuadJacobianPerPoint)
{
  auto spec = make_operator(Form::helmholtz, CellKind::quadrilateral, 1);
  auto k = build_local_kernel(spec, quadrature_rule({CellKind::quadrilateral}, quadrature_degree(spec)));
  int jacobian = 0;
  for (const auto& s : k.statements) {
    if (s.lhs.array.rfind("jac", 0) == 0 || s.lhs.array == "det") {
      ++jacobian;
      EXPECT_TRUE(s.is_within("ip")) << s.id;
    }
  }
  EXPECT_GT(jacobian, 0);
}

TEST(Operator, MassP1Reference)
{
  auto spec = make_operator(Form::mass, CellKind::triangle, 1);
  auto rule = quadrature_rule({CellKind::triangle}, quadrature_degree(spec));
  auto r = run_local(spec, rule, reference_coords(CellKind::triangle), {1, 1, 1});
  for (double a : r.A) {
    EXPECT_NEAR(a, 1.0 / 6, 1e-15);
  }
  // Counted by hand from the kernel statements; the wrapper adds one
  // increment per scattered entry.
  EXPECT_EQ(r.flops.total(), 70);
}

TEST(Operator, HelmholtzP1ReferenceWithUEqualsY)
{
  auto exact = oracle::local_residual(Form::helmholtz, CellKind::triangle, 1, {{0, 0}, {1, 0}, {0, 1}}, {0, 0, 1});
  ASSERT_EQ(exact, (std::vector<Q>{Q(-11, 24), Q(1, 24), Q(7, 12)}));
  auto spec = make_operator(Form::helmholtz, CellKind::triangle, 1);
  auto rule = quadrature_rule({CellKind::triangle}, quadrature_degree(spec));
  auto r = run_local(spec, rule, reference_coords(CellKind::triangle), {0, 0, 1});
  EXPECT_NEAR(r.A[0], -11.0 / 24, 1e-13);
  EXPECT_NEAR(r.A[1], 1.0 / 24, 1e-13);
  EXPECT_NEAR(r.A[2], 7.0 / 12, 1e-13);
}

// Interpreted kernel, straight-line evaluation and the exact rational
// integral agree on random affine cells.
TEST(Operator, AllFormsMatchExactIntegrals)
{
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> coord(-6, 6);
  std::uniform_int_distribution<int> coef(-8, 8);
  for (auto form : kForms) {
    for (auto cell : kCells) {
      for (int k = 1; k <= 3; ++k) {
        auto spec = make_operator(form, cell, k);
        auto rule = quadrature_rule(spec.element.cell, quadrature_degree(spec));
        // Integer corners with a positive, non-degenerate Jacobian.
        std::vector<oracle::QPoint> verts;
        for (;;) {
          verts.clear();
          Q x0 = coord(rng), y0 = coord(rng);
          Q ax = coord(rng) + 7, ay = coord(rng), bx = coord(rng), by = coord(rng) + 7;
          if (ax * by - ay * bx <= 0) {
            continue;
          }
          verts.push_back({x0 / 4, y0 / 4});
          verts.push_back({(x0 + ax) / 4, (y0 + ay) / 4});
          if (cell == CellKind::quadrilateral) {
            verts.push_back({(x0 + ax + bx) / 4, (y0 + ay + by) / 4});
          }
          verts.push_back({(x0 + bx) / 4, (y0 + by) / 4});
          break;
        }
        std::vector<Q> u;
        std::vector<double> ud;
        for (int i = 0; i < spec.element.ndofs(); ++i) {
          u.push_back(Q(coef(rng), 8));
          ud.push_back(oracle::to_double(u.back()));
        }
        std::vector<double> coords;
        for (const auto& v : verts) {
          coords.push_back(oracle::to_double(v[0]));
          coords.push_back(oracle::to_double(v[1]));
        }
        auto exact = oracle::local_residual(form, cell, k, verts, u);
        std::vector<double> exact_d;
        for (const auto& q : exact) {
          exact_d.push_back(oracle::to_double(q));
        }
        auto r = run_local(spec, rule, coords, ud);
        auto direct = evaluate_local(spec, rule, tabulate(spec.element, rule), tabulate(spec.geometry, rule), coords, ud);
        EXPECT_LE(max_rel(r.A, exact_d), 1e-13) << to_string(form) << " " << to_string(cell) << " P" << k;
        EXPECT_LE(max_rel(direct, exact_d), 1e-13) << to_string(form) << " " << to_string(cell) << " P" << k;
      }
    }
  }
}

TEST(Operator, HelmholtzWithUnitCoefficientIsMass)
{
  for (auto cell : kCells) {
    for (int k = 1; k <= 3; ++k) {
      auto h = make_operator(Form::helmholtz, cell, k);
      auto m = make_operator(Form::mass, cell, k);
      auto rule = quadrature_rule(h.element.cell, quadrature_degree(h));
      std::vector<double> ones(h.element.ndofs(), 1.0);
      std::vector<double> coords = reference_coords(cell);
      for (double& c : coords) {
        c *= 0.7;
      }
      auto a = run_local(h, rule, coords, ones);
      auto b = run_local(m, rule, coords, ones);
      EXPECT_LE(max_rel(a.A, b.A), 1e-13);
    }
  }
}

TEST(Operator, RuleCellMismatch)
{
  auto spec = make_operator(Form::mass, CellKind::triangle, 1);
  EXPECT_THROW(build_local_kernel(spec, quadrature_rule({CellKind::quadrilateral}, 2)), InvalidArgument);
}
