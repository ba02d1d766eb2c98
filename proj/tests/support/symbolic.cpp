#include "symbolic.hpp"

#include <cmath>
#include <stdexcept>

namespace oracle {

using crossvec::fem::CellKind;
using crossvec::fem::Form;

Poly Poly::constant(const Q& c)
{
  return monomial(0, 0, c);
}

Poly Poly::monomial(int a, int b, const Q& c)
{
  Poly p;
  p.add({a, b}, c);
  return p;
}

void Poly::add(std::pair<int, int> e, const Q& c)
{
  if (c == 0) {
    return;
  }
  auto [it, inserted] = terms_.emplace(e, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) {
      terms_.erase(it);
    }
  }
}

Poly Poly::operator+(const Poly& o) const
{
  Poly r = *this;
  for (const auto& [e, c] : o.terms_) {
    r.add(e, c);
  }
  return r;
}

Poly Poly::operator-(const Poly& o) const
{
  return *this + o * Q(-1);
}

Poly Poly::operator*(const Poly& o) const
{
  Poly r;
  for (const auto& [e1, c1] : terms_) {
    for (const auto& [e2, c2] : o.terms_) {
      r.add({e1.first + e2.first, e1.second + e2.second}, c1 * c2);
    }
  }
  return r;
}

Poly Poly::operator*(const Q& s) const
{
  Poly r;
  for (const auto& [e, c] : terms_) {
    r.add(e, c * s);
  }
  return r;
}

Poly Poly::derivative(int axis) const
{
  Poly r;
  for (const auto& [e, c] : terms_) {
    int k = axis == 0 ? e.first : e.second;
    if (k > 0) {
      r.add(axis == 0 ? std::pair{k - 1, e.second} : std::pair{e.first, k - 1}, c * k);
    }
  }
  return r;
}

Q Poly::operator()(const Q& x, const Q& y) const
{
  Q sum = 0;
  for (const auto& [e, c] : terms_) {
    Q t = c;
    for (int i = 0; i < e.first; ++i) {
      t *= x;
    }
    for (int i = 0; i < e.second; ++i) {
      t *= y;
    }
    sum += t;
  }
  return sum;
}

namespace {

Q factorial(int n)
{
  Q f = 1;
  for (int i = 2; i <= n; ++i) {
    f *= i;
  }
  return f;
}

} // namespace

Q integrate(CellKind cell, const Poly& p)
{
  Q sum = 0;
  for (const auto& [e, c] : p.terms()) {
    auto [a, b] = e;
    if (cell == CellKind::triangle) {
      sum += c * factorial(a) * factorial(b) / factorial(a + b + 2);
    } else {
      sum += c / Q((a + 1) * (b + 1));
    }
  }
  return sum;
}

std::vector<Poly> lagrange_basis(CellKind cell, int degree, const std::vector<QPoint>& nodes)
{
  std::vector<std::pair<int, int>> exps;
  for (int a = 0; a <= degree; ++a) {
    for (int b = 0; b <= degree; ++b) {
      if (cell == CellKind::quadrilateral || a + b <= degree) {
        exps.emplace_back(a, b);
      }
    }
  }
  const std::size_t n = exps.size();
  if (nodes.size() != n) {
    throw std::invalid_argument("node count does not match the polynomial space");
  }
  // Gauss-Jordan on [V | I] with V(i, m) = monomial m at node i. The inverse
  // holds the basis coefficients column by column.
  std::vector<std::vector<Q>> M(n, std::vector<Q>(2 * n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t m = 0; m < n; ++m) {
      M[i][m] = Poly::monomial(exps[m].first, exps[m].second)(nodes[i][0], nodes[i][1]);
    }
    M[i][n + i] = 1;
  }
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    while (piv < n && M[piv][col] == 0) {
      ++piv;
    }
    if (piv == n) {
      throw std::runtime_error("singular Vandermonde matrix");
    }
    std::swap(M[piv], M[col]);
    Q inv = 1 / M[col][col];
    for (auto& v : M[col]) {
      v *= inv;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r != col && M[r][col] != 0) {
        Q f = M[r][col];
        for (std::size_t k = 0; k < 2 * n; ++k) {
          M[r][k] -= f * M[col][k];
        }
      }
    }
  }
  std::vector<Poly> basis(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t m = 0; m < n; ++m) {
      basis[j] = basis[j] + Poly::monomial(exps[m].first, exps[m].second, M[m][n + j]);
    }
  }
  return basis;
}

std::vector<QPoint> rational_nodes(const crossvec::fem::ReferenceElement& element)
{
  std::vector<QPoint> out;
  const int k = element.degree;
  for (const auto& p : element.nodes) {
    out.push_back({Q(static_cast<long>(std::lround(p[0] * k)), k), Q(static_cast<long>(std::lround(p[1] * k)), k)});
  }
  return out;
}

std::vector<Q> local_residual(Form form, CellKind cell, int degree, const std::vector<QPoint>& vertices,
                              const std::vector<Q>& u)
{
  const auto element = crossvec::fem::reference_element({cell}, degree);
  const auto phi = lagrange_basis(cell, degree, rational_nodes(element));
  const std::size_t nd = phi.size();
  const int vs = crossvec::fem::form_value_size(form);
  if (u.size() != nd * vs) {
    throw std::invalid_argument("coefficient size mismatch");
  }

  // x = v0 + J xi with the columns of J along the first two edges.
  const std::size_t second = cell == CellKind::triangle ? 2 : 3;
  if (cell == CellKind::quadrilateral) {
    for (int a = 0; a < 2; ++a) {
      if (vertices[2][a] != vertices[1][a] + vertices[3][a] - vertices[0][a]) {
        throw std::invalid_argument("quadrilateral is not a parallelogram");
      }
    }
  }
  Q J[2][2];
  for (int a = 0; a < 2; ++a) {
    J[a][0] = vertices[1][a] - vertices[0][a];
    J[a][1] = vertices[second][a] - vertices[0][a];
  }
  const Q det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
  const Q K[2][2] = {{J[1][1] / det, -J[0][1] / det}, {-J[1][0] / det, J[0][0] / det}};
  const Q dx = det < 0 ? Q(-det) : det;

  // Physical gradients: d/dx_d = sum_c K[c][d] d/dxi_c.
  std::vector<std::array<Poly, 2>> grad(nd);
  for (std::size_t i = 0; i < nd; ++i) {
    for (int d = 0; d < 2; ++d) {
      grad[i][d] = phi[i].derivative(0) * K[0][d] + phi[i].derivative(1) * K[1][d];
    }
  }

  std::vector<Q> A(nd * vs);
  if (vs == 1) {
    Poly uh;
    std::array<Poly, 2> gu;
    for (std::size_t j = 0; j < nd; ++j) {
      uh = uh + phi[j] * u[j];
      gu[0] = gu[0] + grad[j][0] * u[j];
      gu[1] = gu[1] + grad[j][1] * u[j];
    }
    for (std::size_t i = 0; i < nd; ++i) {
      Poly integrand = uh * phi[i];
      if (form == Form::helmholtz) {
        integrand = integrand + gu[0] * grad[i][0] + gu[1] * grad[i][1];
      }
      A[i] = dx * integrate(cell, integrand);
    }
    return A;
  }

  // G[c][d] = d u_c / d x_d.
  std::array<std::array<Poly, 2>, 2> G;
  for (std::size_t j = 0; j < nd; ++j) {
    for (int c = 0; c < 2; ++c) {
      for (int d = 0; d < 2; ++d) {
        G[c][d] = G[c][d] + grad[j][d] * u[2 * j + c];
      }
    }
  }
  for (std::size_t i = 0; i < nd; ++i) {
    for (int c = 0; c < 2; ++c) {
      Poly integrand;
      for (int d = 0; d < 2; ++d) {
        Poly flux = form == Form::laplacian ? G[c][d] : (G[c][d] + G[d][c]) * Q(1, 2);
        integrand = integrand + flux * grad[i][d];
      }
      A[2 * i + c] = dx * integrate(cell, integrand);
    }
  }
  return A;
}

double to_double(const Q& q)
{
  return q.convert_to<double>();
}

} // namespace oracle
