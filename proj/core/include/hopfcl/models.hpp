#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hopfcl/linear_analysis.hpp"
#include "hopfcl/spectral.hpp"

namespace hopfcl {

// c * u_1^{p_1} ... u_d^{p_d} v^{p_{d+1}}
struct Monomial {
  double coeff = 0.0;
  std::vector<int> powers;

  int degree() const;
  int u_degree() const;
};

struct Polynomial {
  std::vector<Monomial> terms;

  double eval(const double* z) const;
  int degree() const;
  Polynomial homogeneous_part(int degree) const;
  // Terms of total degree one that do not involve v.
  Polynomial linear_u_part() const;
  Polynomial without_linear_u_part() const;
  void add(double coeff, std::vector<int> powers);
};

struct RDModel {
  std::string name;
  int d = 2;
  std::vector<double> diffusion;
  double d_v = 1.0;
  std::vector<Polynomial> f;
  Polynomial g;
  double parameter = 0.0;
  double critical_parameter = 0.0;
  // Ansatz vector U with u = delta A e^{i w0 t} U + c.c.; empty means the unit
  // critical eigenvector.
  Eigen::VectorXcd ansatz_vector;
  // Components 0 and 1 are (Re u_1, Im u_1) of a complex model.
  bool complex_pair = false;
  // Treat the constant Jacobian exactly inside the exponential integrator.
  bool jacobian_in_symbol = true;

  int variables() const { return d + 1; }
  void validate() const;
  Eigen::MatrixXd jacobian() const;
  ModelLinearization linearization() const;
  Eigen::VectorXcd critical_vector() const;
};

RDModel toy_model(double omega0, double eps);

double b_hopf(double a);
Polynomial default_brusselator_coupling();
RDModel brusselator_cl(double a, double b_tilde, double d1, double d2, double d_v,
                       const Polynomial& g = default_brusselator_coupling());
double brusselator_eps2(double a, double b_tilde);

struct RhsFields {
  std::vector<Field> du;
  Field dv;
};

RhsFields evaluate_rhs(const RDModel& model, const std::vector<Field>& u, const Field& v, bool dealiased = true);

// Pointwise f and g on physical grid data (no derivatives, no dealiasing).
void evaluate_pointwise(const RDModel& model, const std::vector<const cplx*>& u, const cplx* v,
                        std::size_t n, std::vector<CVec>& f_out, CVec& g_out, bool nonlinear_only);

RDModel parse_model(std::istream& is);
RDModel load_model_file(const std::string& path);

}  // namespace hopfcl
