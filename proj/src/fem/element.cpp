#include "crossvec/fem/element.hpp"

#include "crossvec/error.hpp"
#include "triangle_rules.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

namespace crossvec::fem {

const char* to_string(CellKind kind)
{
  return kind == CellKind::triangle ? "triangle" : "quadrilateral";
}

CellKind parse_cell_kind(std::string_view text)
{
  if (text == "triangle" || text == "tri") {
    return CellKind::triangle;
  }
  if (text == "quadrilateral" || text == "quad") {
    return CellKind::quadrilateral;
  }
  throw InvalidArgument("unknown cell kind '" + std::string(text) + "' (expected tri or quad)");
}

std::vector<Point> ReferenceCell::vertices() const
{
  if (kind == CellKind::triangle) {
    return {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
  }
  return {{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}};
}

std::vector<std::array<int, 2>> ReferenceCell::edges() const
{
  if (kind == CellKind::triangle) {
    return {{0, 1}, {0, 2}, {1, 2}};
  }
  return {{0, 1}, {0, 3}, {1, 2}, {2, 3}};
}

bool ReferenceCell::contains(const Point& p, double tol) const
{
  if (p[0] < -tol || p[1] < -tol) {
    return false;
  }
  if (kind == CellKind::triangle) {
    return p[0] + p[1] <= 1.0 + tol;
  }
  return p[0] <= 1.0 + tol && p[1] <= 1.0 + tol;
}

std::vector<std::array<int, 2>> monomial_exponents(CellKind kind, int degree)
{
  std::vector<std::array<int, 2>> out;
  for (int total = 0; total <= (kind == CellKind::triangle ? degree : 2 * degree); ++total) {
    for (int b = 0; b <= total; ++b) {
      int a = total - b;
      if (kind == CellKind::quadrilateral && (a > degree || b > degree)) {
        continue;
      }
      out.push_back({a, b});
    }
  }
  return out;
}

namespace {

std::vector<Point> lagrange_nodes(const ReferenceCell& cell, int k)
{
  auto verts = cell.vertices();
  std::vector<Point> nodes = verts;
  for (auto [a, b] : cell.edges()) {
    for (int t = 1; t < k; ++t) {
      double s = static_cast<double>(t) / k;
      nodes.push_back({verts[a][0] + s * (verts[b][0] - verts[a][0]), verts[a][1] + s * (verts[b][1] - verts[a][1])});
    }
  }
  for (int j = 1; j < k; ++j) {
    for (int i = 1; i < k; ++i) {
      if (cell.kind == CellKind::triangle && i + j >= k) {
        continue;
      }
      nodes.push_back({static_cast<double>(i) / k, static_cast<double>(j) / k});
    }
  }
  return nodes;
}

double ipow(double x, int n)
{
  double r = 1.0;
  for (int i = 0; i < n; ++i) {
    r *= x;
  }
  return r;
}

/// Monomials are taken in 2x - 1 so that they range over [-1, 1] on the
/// reference cells. In raw x the degree-4 quadrilateral basis has
/// coefficients near 2e4 and loses four digits to cancellation.
double centered(double x)
{
  return 2.0 * x - 1.0;
}

} // namespace

ReferenceElement reference_element(ReferenceCell cell, int degree, int value_size)
{
  if (degree < 1 || degree > kMaxElementDegree) {
    throw InvalidArgument("unsupported element degree " + std::to_string(degree) + " (supported: 1 to " +
                          std::to_string(kMaxElementDegree) + ")");
  }
  if (value_size != 1 && value_size != 2) {
    throw InvalidArgument("unsupported value size " + std::to_string(value_size) + " (expected 1 or 2)");
  }
  ReferenceElement e;
  e.cell = cell;
  e.degree = degree;
  e.value_size = value_size;
  e.nodes = lagrange_nodes(cell, degree);
  auto exps = monomial_exponents(cell.kind, degree);
  const int n = static_cast<int>(e.nodes.size());
  if (static_cast<int>(exps.size()) != n) {
    throw Error("internal: node and monomial counts differ");
  }
  e.ndof_scalar = n;

  Eigen::MatrixXd V(n, n);
  for (int i = 0; i < n; ++i) {
    for (int m = 0; m < n; ++m) {
      V(i, m) = ipow(centered(e.nodes[i][0]), exps[m][0]) * ipow(centered(e.nodes[i][1]), exps[m][1]);
    }
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(V);
  if (!lu.isInvertible()) {
    throw Error("Vandermonde matrix is singular");
  }
  Eigen::MatrixXd C = lu.solve(Eigen::MatrixXd::Identity(n, n));
  double residual = (V * C - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().rowwise().sum().maxCoeff();
  if (residual >= 1e-10) {
    throw Error("Vandermonde solve residual " + std::to_string(residual) + " exceeds 1e-10");
  }
  e.coefficients.resize(static_cast<std::size_t>(n) * n);
  for (int m = 0; m < n; ++m) {
    for (int j = 0; j < n; ++j) {
      e.coefficients[static_cast<std::size_t>(m) * n + j] = C(m, j);
    }
  }
  return e;
}

std::vector<double> ReferenceElement::evaluate(const Point& p) const
{
  auto exps = monomial_exponents(cell.kind, degree);
  std::vector<double> out(ndof_scalar, 0.0);
  for (std::size_t m = 0; m < exps.size(); ++m) {
    double mono = ipow(centered(p[0]), exps[m][0]) * ipow(centered(p[1]), exps[m][1]);
    for (int j = 0; j < ndof_scalar; ++j) {
      out[j] += coefficients[m * ndof_scalar + j] * mono;
    }
  }
  return out;
}

std::vector<double> ReferenceElement::evaluate_gradients(const Point& p) const
{
  auto exps = monomial_exponents(cell.kind, degree);
  std::vector<double> out(static_cast<std::size_t>(ndof_scalar) * 2, 0.0);
  for (std::size_t m = 0; m < exps.size(); ++m) {
    auto [a, b] = exps[m];
    const double s = centered(p[0]);
    const double t = centered(p[1]);
    // d/dx = 2 d/ds under s = 2x - 1.
    double dx = a == 0 ? 0.0 : 2.0 * a * ipow(s, a - 1) * ipow(t, b);
    double dy = b == 0 ? 0.0 : 2.0 * b * ipow(s, a) * ipow(t, b - 1);
    for (int j = 0; j < ndof_scalar; ++j) {
      double c = coefficients[m * ndof_scalar + j];
      out[2 * j] += c * dx;
      out[2 * j + 1] += c * dy;
    }
  }
  return out;
}

void gauss_legendre(int npoints, std::vector<double>& points, std::vector<double>& weights)
{
  if (npoints < 1) {
    throw InvalidArgument("Gauss-Legendre rule needs at least one point");
  }
  points.assign(npoints, 0.0);
  weights.assign(npoints, 0.0);
  const int n = npoints;
  if (n == 1) {
    points[0] = 0.5;
    weights[0] = 1.0;
    return;
  }
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) {
        break;
      }
    }
    // Recompute the derivative at the converged root for the weight.
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // Map [-1, 1] to [0, 1]; the root near +1 goes first in ascending order.
    points[i] = 0.5 * (1.0 - x);
    points[n - 1 - i] = 0.5 * (1.0 + x);
    weights[i] = weights[n - 1 - i] = 0.5 * w;
  }
  if (n % 2 == 1) {
    points[n / 2] = 0.5;
  }
}

int max_quadrature_degree(CellKind kind)
{
  return kind == CellKind::triangle ? detail::kMaxTriangleRuleDegree : 63;
}

QuadratureRule quadrature_rule(ReferenceCell cell, int required_degree)
{
  if (required_degree < 0) {
    throw InvalidArgument("quadrature degree must be non-negative");
  }
  if (required_degree > max_quadrature_degree(cell.kind)) {
    throw InvalidArgument("no " + std::string(to_string(cell.kind)) + " quadrature rule of degree " +
                          std::to_string(required_degree) + " (maximum is " +
                          std::to_string(max_quadrature_degree(cell.kind)) + ")");
  }
  QuadratureRule rule;
  rule.cell = cell;
  if (cell.kind == CellKind::triangle) {
    int degree = std::max(required_degree, 1);
    for (const auto& p : detail::triangle_rule_table(degree)) {
      rule.points.push_back({p.x, p.y});
      rule.weights.push_back(p.weight);
    }
    rule.exactness_degree = degree;
    return rule;
  }
  int n = (required_degree + 2) / 2;
  std::vector<double> x;
  std::vector<double> w;
  gauss_legendre(n, x, w);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      rule.points.push_back({x[i], x[j]});
      rule.weights.push_back(w[i] * w[j]);
    }
  }
  rule.exactness_degree = 2 * n - 1;
  return rule;
}

Tabulation tabulate(const ReferenceElement& element, const std::vector<Point>& points)
{
  Tabulation t;
  t.npoints = static_cast<int>(points.size());
  t.ndof = element.ndof_scalar;
  t.values.reserve(points.size() * t.ndof);
  t.grads.reserve(points.size() * t.ndof * 2);
  for (const auto& p : points) {
    auto v = element.evaluate(p);
    auto g = element.evaluate_gradients(p);
    t.values.insert(t.values.end(), v.begin(), v.end());
    t.grads.insert(t.grads.end(), g.begin(), g.end());
  }
  return t;
}

Tabulation tabulate(const ReferenceElement& element, const QuadratureRule& rule)
{
  if (!(element.cell == rule.cell)) {
    throw InvalidArgument("element and quadrature rule are defined on different cells");
  }
  return tabulate(element, rule.points);
}

} // namespace crossvec::fem
