#include "crossvec/fem/operator.hpp"

#include "crossvec/error.hpp"

#include <cmath>

namespace crossvec::fem {

using namespace crossvec::ir;

const char* to_string(Form form)
{
  switch (form) {
  case Form::mass: return "mass";
  case Form::helmholtz: return "helmholtz";
  case Form::laplacian: return "laplacian";
  case Form::elasticity: return "elasticity";
  }
  return "?";
}

Form parse_form(std::string_view text)
{
  for (Form f : {Form::mass, Form::helmholtz, Form::laplacian, Form::elasticity}) {
    if (text == to_string(f)) {
      return f;
    }
  }
  throw InvalidArgument("unknown operator '" + std::string(text) +
                        "' (expected one of mass, helmholtz, laplacian, elasticity)");
}

int form_value_size(Form form)
{
  return (form == Form::mass || form == Form::helmholtz) ? 1 : 2;
}

void check_operator(const OperatorSpec& spec)
{
  if (spec.element.value_size != form_value_size(spec.form)) {
    throw InvalidArgument(std::string(to_string(spec.form)) + " requires value size " +
                          std::to_string(form_value_size(spec.form)) + ", got " +
                          std::to_string(spec.element.value_size));
  }
  if (spec.geometry.degree != 1 || spec.geometry.value_size != 1) {
    throw InvalidArgument("geometry element must be scalar degree 1");
  }
  if (!(spec.geometry.cell == spec.element.cell)) {
    throw InvalidArgument("geometry and solution elements live on different cells");
  }
}

OperatorSpec make_operator(Form form, CellKind cell, int degree)
{
  OperatorSpec spec;
  spec.form = form;
  spec.element = reference_element(ReferenceCell{cell}, degree, form_value_size(form));
  spec.geometry = reference_element(ReferenceCell{cell}, 1, 1);
  return spec;
}

int quadrature_degree(const OperatorSpec& spec)
{
  int d = 2 * spec.degree();
  return spec.cell() == CellKind::quadrilateral ? d + 2 : d;
}

namespace {

/// Accumulates declarations and statements in program order.
class KernelBuilder {
public:
  explicit KernelBuilder(std::string name) { k_.name = std::move(name); }

  void domain(const std::string& name, std::int64_t extent)
  {
    IndexVar d;
    d.name = name;
    d.lower = {integer(0)};
    d.upper = {integer(extent)};
    k_.domains.push_back(std::move(d));
  }

  void array(const std::string& name, ArrayKind kind, std::vector<std::int64_t> shape, std::vector<double> data = {})
  {
    ArrayDecl a;
    a.name = name;
    a.kind = kind;
    for (auto s : shape) {
      a.shape.emplace_back(s);
    }
    a.strides = row_major_strides(a.shape);
    a.data = std::move(data);
    k_.arrays.push_back(std::move(a));
  }

  Expr scalar(const std::string& name)
  {
    if (!k_.find_array(name)) {
      array(name, ArrayKind::temporary, {});
    }
    return read(name);
  }

  void emit(std::string id, Access lhs, AssignMode mode, Expr rhs, std::vector<std::string> within)
  {
    Statement s;
    s.id = std::move(id);
    s.lhs = std::move(lhs);
    s.mode = mode;
    s.rhs = std::move(rhs);
    s.within = std::move(within);
    k_.statements.push_back(std::move(s));
  }

  /// Assign a fresh rank-0 temporary and return a read of it.
  Expr let(const std::string& name, Expr rhs, std::vector<std::string> within)
  {
    scalar(name);
    emit(name, Access{name, {}}, AssignMode::assign, std::move(rhs), std::move(within));
    return read(name);
  }

  void accumulate(const std::string& id, const std::string& name, Expr rhs, std::vector<std::string> within)
  {
    emit(id, Access{name, {}}, AssignMode::increment, std::move(rhs), std::move(within));
  }

  LoopKernel finish()
  {
    infer_dependencies(k_);
    return std::move(k_);
  }

private:
  LoopKernel k_;
};

std::vector<double> component(const std::vector<double>& grads, int d)
{
  std::vector<double> out(grads.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = grads[2 * i + d];
  }
  return out;
}

} // namespace

LoopKernel build_local_kernel(const OperatorSpec& spec, const QuadratureRule& rule)
{
  check_operator(spec);
  if (!(rule.cell == spec.element.cell)) {
    throw InvalidArgument("quadrature rule cell does not match the operator's cell");
  }
  const bool affine = spec.cell() == CellKind::triangle;
  const int nv = spec.geometry.ndof_scalar;
  const int nd = spec.element.ndof_scalar;
  const int vs = spec.element.value_size;
  const int nq = static_cast<int>(rule.size());

  KernelBuilder b(to_string(spec.form));
  b.domain("iv", nv);
  b.domain("ip", nq);
  b.domain("i", nd);
  b.domain("j", nd);
  if (vs == 2) {
    b.domain("c", 2);
  }

  b.array("A", ArrayKind::argument, {nd * vs});
  b.array("coords", ArrayKind::argument, {nv, 2});
  b.array("w_0", ArrayKind::argument, {nd * vs});

  Tabulation basis = tabulate(spec.element, rule);
  b.array("weights", ArrayKind::constant, {nq}, rule.weights);
  b.array("phi", ArrayKind::constant, {nq, nd}, basis.values);
  b.array("dphi0", ArrayKind::constant, {nq, nd}, component(basis.grads, 0));
  b.array("dphi1", ArrayKind::constant, {nq, nd}, component(basis.grads, 1));

  // An affine map has a constant Jacobian: tabulate the geometry gradients
  // once and hoist the whole geometry block out of the quadrature loop.
  std::vector<std::string> geo = affine ? std::vector<std::string>{} : std::vector<std::string>{"ip"};
  auto with = [&](std::vector<std::string> inner) {
    std::vector<std::string> w = geo;
    w.insert(w.end(), inner.begin(), inner.end());
    return w;
  };
  Expr iv = var("iv");
  Expr ip = var("ip");
  std::array<Expr, 2> gd;
  if (affine) {
    Tabulation g = tabulate(spec.geometry, std::vector<Point>{{1.0 / 3.0, 1.0 / 3.0}});
    b.array("gd0", ArrayKind::constant, {nv}, component(g.grads, 0));
    b.array("gd1", ArrayKind::constant, {nv}, component(g.grads, 1));
    gd = {read("gd0", {iv}), read("gd1", {iv})};
  } else {
    Tabulation g = tabulate(spec.geometry, rule);
    b.array("gd0", ArrayKind::constant, {nq, nv}, component(g.grads, 0));
    b.array("gd1", ArrayKind::constant, {nq, nv}, component(g.grads, 1));
    gd = {read("gd0", {ip, iv}), read("gd1", {ip, iv})};
  }

  // J[a][c] = sum_v coords[v][a] dphi_v/dX_c
  Expr J[2][2];
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      std::string name = "jac" + std::to_string(r) + std::to_string(c);
      J[r][c] = b.let(name, real(0.0), with({}));
    }
  }
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      std::string name = "jac" + std::to_string(r) + std::to_string(c);
      b.accumulate(name + "_sum", name, read("coords", {iv, integer(r)}) * gd[c], with({"iv"}));
    }
  }
  Expr det = b.let("det", J[0][0] * J[1][1] - J[0][1] * J[1][0], with({}));
  Expr K[2][2];
  if (spec.form != Form::mass) {
    Expr idet = b.let("idet", real(1.0) / det, with({}));
    K[0][0] = b.let("k00", J[1][1] * idet, with({}));
    K[0][1] = b.let("k01", -J[0][1] * idet, with({}));
    K[1][0] = b.let("k10", -J[1][0] * idet, with({}));
    K[1][1] = b.let("k11", J[0][0] * idet, with({}));
  }
  Expr adet = b.let("adet", abs(det), with({}));

  Expr i = var("i");
  Expr j = var("j");
  const std::vector<std::string> q = {"ip"};
  const std::vector<std::string> qi = {"ip", "i"};
  Expr phi_i = read("phi", {ip, i});
  Expr d0_i = read("dphi0", {ip, i});
  Expr d1_i = read("dphi1", {ip, i});
  Expr phi_j = read("phi", {ip, j});
  Expr d0_j = read("dphi0", {ip, j});
  Expr d1_j = read("dphi1", {ip, j});

  if (vs == 1) {
    Expr wi = read("w_0", {i});
    Expr u = b.let("u", real(0.0), q);
    Expr g0;
    Expr g1;
    if (spec.form == Form::helmholtz) {
      g0 = b.let("gu0", real(0.0), q);
      g1 = b.let("gu1", real(0.0), q);
    }
    b.accumulate("u_sum", "u", phi_i * wi, qi);
    if (spec.form == Form::helmholtz) {
      b.accumulate("gu0_sum", "gu0", d0_i * wi, qi);
      b.accumulate("gu1_sum", "gu1", d1_i * wi, qi);
    }
    if (spec.form == Form::mass) {
      Expr cm = b.let("cm", read("weights", {ip}) * adet * u, q);
      b.emit("A_sum", Access{"A", {j}}, AssignMode::increment, phi_j * cm, {"ip", "j"});
    } else {
      Expr wdet = b.let("wdet", read("weights", {ip}) * adet, q);
      // Physical gradient of u: K^T times the reference gradient.
      Expr p0 = b.let("p0", K[0][0] * g0 + K[1][0] * g1, q);
      Expr p1 = b.let("p1", K[0][1] * g0 + K[1][1] * g1, q);
      Expr c0 = b.let("c0", wdet * (K[0][0] * p0 + K[0][1] * p1), q);
      Expr c1 = b.let("c1", wdet * (K[1][0] * p0 + K[1][1] * p1), q);
      Expr cm = b.let("cm", wdet * u, q);
      b.emit("A_sum", Access{"A", {j}}, AssignMode::increment, d0_j * c0 + d1_j * c1 + phi_j * cm, {"ip", "j"});
    }
    return b.finish();
  }

  // Vector-valued forms: gu[c][b] is the reference gradient of component c.
  Expr gu[2][2];
  for (int c = 0; c < 2; ++c) {
    for (int r = 0; r < 2; ++r) {
      gu[c][r] = b.let("gu" + std::to_string(c) + std::to_string(r), real(0.0), q);
    }
  }
  for (int c = 0; c < 2; ++c) {
    Expr wi = read("w_0", {integer(2) * i + integer(c)});
    b.accumulate("gu" + std::to_string(c) + "0_sum", "gu" + std::to_string(c) + "0", d0_i * wi, qi);
    b.accumulate("gu" + std::to_string(c) + "1_sum", "gu" + std::to_string(c) + "1", d1_i * wi, qi);
  }
  Expr wdet = b.let("wdet", read("weights", {ip}) * adet, q);
  Expr p[2][2];
  for (int c = 0; c < 2; ++c) {
    for (int d = 0; d < 2; ++d) {
      p[c][d] = b.let("p" + std::to_string(c) + std::to_string(d), K[0][d] * gu[c][0] + K[1][d] * gu[c][1], q);
    }
  }
  // cc[c][b] multiplies the reference derivative b of the test function in
  // component c; the flux is grad(u) for laplacian and eps(u) for elasticity.
  Expr flux[2][2] = {{p[0][0], p[0][1]}, {p[1][0], p[1][1]}};
  if (spec.form == Form::elasticity) {
    Expr e01 = b.let("e01", real(0.5) * (p[0][1] + p[1][0]), q);
    flux[0][1] = e01;
    flux[1][0] = e01;
  }
  b.array("cc", ArrayKind::temporary, {2, 2});
  for (int c = 0; c < 2; ++c) {
    for (int r = 0; r < 2; ++r) {
      b.emit("cc" + std::to_string(c) + std::to_string(r), Access{"cc", {integer(c), integer(r)}}, AssignMode::assign,
             wdet * (K[r][0] * flux[c][0] + K[r][1] * flux[c][1]), q);
    }
  }
  Expr c = var("c");
  b.emit("A_sum", Access{"A", {integer(2) * j + c}}, AssignMode::increment,
         d0_j * read("cc", {c, integer(0)}) + d1_j * read("cc", {c, integer(1)}), {"ip", "j", "c"});
  return b.finish();
}

std::vector<double> evaluate_local(const OperatorSpec& spec, const QuadratureRule& rule, const Tabulation& basis,
                                   const Tabulation& geometry, std::span<const double> coords,
                                   std::span<const double> w)
{
  check_operator(spec);
  const int nv = spec.geometry.ndof_scalar;
  const int nd = spec.element.ndof_scalar;
  const int vs = spec.element.value_size;
  if (coords.size() != static_cast<std::size_t>(2 * nv) || w.size() != static_cast<std::size_t>(nd * vs)) {
    throw InvalidArgument("evaluate_local: input sizes do not match the operator");
  }
  std::vector<double> A(static_cast<std::size_t>(nd) * vs, 0.0);
  std::vector<double> grad(2 * static_cast<std::size_t>(nd));
  for (int q = 0; q < static_cast<int>(rule.size()); ++q) {
    double J[2][2] = {{0, 0}, {0, 0}};
    for (int v = 0; v < nv; ++v) {
      for (int a = 0; a < 2; ++a) {
        for (int c = 0; c < 2; ++c) {
          J[a][c] += coords[2 * v + a] * geometry.grad(q, v, c);
        }
      }
    }
    double det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
    double Kinv[2][2] = {{J[1][1] / det, -J[0][1] / det}, {-J[1][0] / det, J[0][0] / det}};
    double dx = rule.weights[q] * std::abs(det);
    for (int i = 0; i < nd; ++i) {
      for (int d = 0; d < 2; ++d) {
        grad[2 * i + d] = Kinv[0][d] * basis.grad(q, i, 0) + Kinv[1][d] * basis.grad(q, i, 1);
      }
    }
    if (vs == 1) {
      double u = 0.0;
      double gu[2] = {0.0, 0.0};
      for (int i = 0; i < nd; ++i) {
        u += w[i] * basis.value(q, i);
        gu[0] += w[i] * grad[2 * i];
        gu[1] += w[i] * grad[2 * i + 1];
      }
      for (int jj = 0; jj < nd; ++jj) {
        double integrand = basis.value(q, jj) * u;
        if (spec.form == Form::helmholtz) {
          integrand += grad[2 * jj] * gu[0] + grad[2 * jj + 1] * gu[1];
        }
        A[jj] += dx * integrand;
      }
      continue;
    }
    double G[2][2] = {{0, 0}, {0, 0}};
    for (int i = 0; i < nd; ++i) {
      for (int c = 0; c < 2; ++c) {
        for (int d = 0; d < 2; ++d) {
          G[c][d] += w[2 * i + c] * grad[2 * i + d];
        }
      }
    }
    double eu[2][2];
    for (int a = 0; a < 2; ++a) {
      for (int bb = 0; bb < 2; ++bb) {
        eu[a][bb] = 0.5 * (G[a][bb] + G[bb][a]);
      }
    }
    for (int jj = 0; jj < nd; ++jj) {
      for (int c = 0; c < 2; ++c) {
        // Gradient of the test function phi_j e_c: only row c is non-zero.
        double gv[2][2] = {{0, 0}, {0, 0}};
        gv[c][0] = grad[2 * jj];
        gv[c][1] = grad[2 * jj + 1];
        double integrand = 0.0;
        for (int a = 0; a < 2; ++a) {
          for (int bb = 0; bb < 2; ++bb) {
            if (spec.form == Form::laplacian) {
              integrand += G[a][bb] * gv[a][bb];
            } else {
              integrand += eu[a][bb] * 0.5 * (gv[a][bb] + gv[bb][a]);
            }
          }
        }
        A[2 * jj + c] += dx * integrand;
      }
    }
  }
  return A;
}

} // namespace crossvec::fem
