#include "hopfcl/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>

namespace hopfcl {

int Monomial::degree() const {
  int s = 0;
  for (int p : powers) s += p;
  return s;
}

int Monomial::u_degree() const {
  int s = 0;
  for (std::size_t i = 0; i + 1 < powers.size(); ++i) s += powers[i];
  return s;
}

double Polynomial::eval(const double* z) const {
  double acc = 0.0;
  for (const auto& t : terms) {
    double m = t.coeff;
    for (std::size_t i = 0; i < t.powers.size(); ++i)
      for (int p = 0; p < t.powers[i]; ++p) m *= z[i];
    acc += m;
  }
  return acc;
}

int Polynomial::degree() const {
  int d = 0;
  for (const auto& t : terms) d = std::max(d, t.degree());
  return d;
}

Polynomial Polynomial::homogeneous_part(int degree) const {
  Polynomial p;
  for (const auto& t : terms)
    if (t.degree() == degree) p.terms.push_back(t);
  return p;
}

Polynomial Polynomial::linear_u_part() const {
  Polynomial p;
  for (const auto& t : terms)
    if (t.degree() == 1 && t.u_degree() == 1) p.terms.push_back(t);
  return p;
}

Polynomial Polynomial::without_linear_u_part() const {
  Polynomial p;
  for (const auto& t : terms)
    if (!(t.degree() == 1 && t.u_degree() == 1)) p.terms.push_back(t);
  return p;
}

void Polynomial::add(double coeff, std::vector<int> powers) {
  if (coeff == 0.0) return;
  terms.push_back(Monomial{coeff, std::move(powers)});
}

void RDModel::validate() const {
  if (d < 2) throw std::invalid_argument("RDModel: d must be >= 2");
  if (static_cast<int>(diffusion.size()) != d) throw std::invalid_argument("RDModel: diffusion needs d entries");
  for (double D : diffusion)
    if (!(D > 0.0)) throw std::invalid_argument("RDModel: diffusion must be positive");
  if (!(d_v > 0.0)) throw std::invalid_argument("RDModel: d_v must be positive");
  if (static_cast<int>(f.size()) != d) throw std::invalid_argument("RDModel: f needs d components");
  auto check_terms = [&](const Polynomial& p, const std::string& what) {
    for (const auto& t : p.terms) {
      if (static_cast<int>(t.powers.size()) != variables())
        throw std::invalid_argument("RDModel: " + what + " exponent vector has wrong length");
      for (int e : t.powers)
        if (e < 0) throw std::invalid_argument("RDModel: negative exponent in " + what);
      if (t.degree() > 3) throw std::invalid_argument("RDModel: " + what + " exceeds degree 3");
    }
  };
  for (int i = 0; i < d; ++i) {
    check_terms(f[static_cast<std::size_t>(i)], "f" + std::to_string(i + 1));
    for (const auto& t : f[static_cast<std::size_t>(i)].terms)
      if (t.u_degree() == 0) throw std::invalid_argument("RDModel: f(0, v) must vanish for all v");
  }
  check_terms(g, "g");
  for (const auto& t : g.terms) {
    if (t.u_degree() < 2) throw std::invalid_argument("RDModel: g must be at least quadratic in u");
    if (t.powers.back() != 0) throw std::invalid_argument("RDModel: g may not depend on v");
  }
  if (ansatz_vector.size() != 0 && ansatz_vector.size() != d)
    throw std::invalid_argument("RDModel: ansatz vector has wrong length");
}

Eigen::MatrixXd RDModel::jacobian() const {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (const auto& t : f[static_cast<std::size_t>(i)].linear_u_part().terms)
      for (int c = 0; c < d; ++c)
        if (t.powers[static_cast<std::size_t>(c)] == 1) J(i, c) += t.coeff;
  return J;
}

ModelLinearization RDModel::linearization() const {
  ModelLinearization lin;
  lin.d = d;
  lin.diffusion = diffusion;
  lin.d_v = d_v;
  lin.jacobian = jacobian().cast<cplx>();
  lin.parameter = parameter;
  return lin;
}

Eigen::VectorXcd RDModel::critical_vector() const {
  if (ansatz_vector.size() == d) return ansatz_vector;
  return critical_eigenvector(linearization());
}

RDModel toy_model(double omega0, double eps) {
  if (!(omega0 > 0.0)) throw std::invalid_argument("toy_model: omega0 must be positive");
  if (eps < 0.0) throw std::invalid_argument("toy_model: eps must be non-negative");
  const double e2 = eps * eps;
  RDModel m;
  m.name = "toy";
  m.d = 2;
  m.diffusion = {1.0, 1.0};
  m.d_v = 1.0;
  m.f.resize(2);
  // powers over (p, q, v) with u_1 = p + i q
  auto& fp = m.f[0];
  fp.add(e2, {1, 0, 0});
  fp.add(-omega0, {0, 1, 0});
  fp.add(3.0, {2, 0, 0});
  fp.add(-1.0, {0, 2, 0});
  fp.add(2.0, {1, 0, 1});
  fp.add(-1.0, {3, 0, 0});
  fp.add(-1.0, {1, 2, 0});
  auto& fq = m.f[1];
  fq.add(omega0, {1, 0, 0});
  fq.add(e2, {0, 1, 0});
  fq.add(-1.0, {2, 1, 0});
  fq.add(-1.0, {0, 3, 0});
  m.g.add(1.0, {2, 0, 0});
  m.g.add(1.0, {0, 2, 0});
  m.parameter = e2;
  m.critical_parameter = 0.0;
  m.ansatz_vector = Eigen::VectorXcd(2);
  m.ansatz_vector << cplx(0.5, 0.0), cplx(0.0, -0.5);
  m.complex_pair = true;
  return m;
}

double b_hopf(double a) { return 1.0 + a * a; }

double brusselator_eps2(double a, double b_tilde) { return (b_tilde - b_hopf(a)) / b_hopf(a); }

Polynomial default_brusselator_coupling() {
  Polynomial g;
  g.add(1.0, {2, 0, 0});
  return g;
}

RDModel brusselator_cl(double a, double b_tilde, double d1, double d2, double d_v, const Polynomial& g) {
  if (!(a > 0.0)) throw std::invalid_argument("brusselator_cl: a must be positive");
  RDModel m;
  m.name = "brusselator";
  m.d = 2;
  m.diffusion = {d1, d2};
  m.d_v = d_v;
  m.f.resize(2);
  const double sgn[2] = {1.0, -1.0};
  for (int i = 0; i < 2; ++i) {
    auto& f = m.f[static_cast<std::size_t>(i)];
    const double s = sgn[i];
    f.add(i == 0 ? b_tilde - 1.0 : -b_tilde, {1, 0, 0});
    f.add(i == 0 ? a * a : -a * a, {0, 1, 0});
    f.add(s, {1, 0, 1});
    f.add(s * b_tilde / a, {2, 0, 0});
    f.add(s / a, {2, 0, 1});
    f.add(s * 2.0 * a, {1, 1, 0});
    f.add(s, {2, 1, 0});
  }
  m.g = g;
  m.parameter = b_tilde;
  m.critical_parameter = b_hopf(a);
  m.validate();
  return m;
}

void evaluate_pointwise(const RDModel& model, const std::vector<const cplx*>& u, const cplx* v, std::size_t n,
                        std::vector<CVec>& f_out, CVec& g_out, bool nonlinear_only) {
  const int d = model.d;
  std::vector<Polynomial> f;
  for (const auto& p : model.f) f.push_back(nonlinear_only ? p.without_linear_u_part() : p);
  f_out.assign(static_cast<std::size_t>(d), CVec(n));
  g_out.assign(n, 0.0);
  std::vector<double> z(static_cast<std::size_t>(d + 1));
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < d; ++c) z[static_cast<std::size_t>(c)] = u[static_cast<std::size_t>(c)][i].real();
    z[static_cast<std::size_t>(d)] = v[i].real();
    for (int c = 0; c < d; ++c) f_out[static_cast<std::size_t>(c)][i] = f[static_cast<std::size_t>(c)].eval(z.data());
    g_out[i] = model.g.eval(z.data());
  }
}

RhsFields evaluate_rhs(const RDModel& model, const std::vector<Field>& u, const Field& v, bool dealiased) {
  model.validate();
  if (static_cast<int>(u.size()) != model.d) throw std::invalid_argument("evaluate_rhs: component count");
  const SpectralGrid& g = v.grid();
  for (const auto& f : u)
    if (!(f.grid() == g)) throw std::invalid_argument("evaluate_rhs: grid mismatch");
  const auto n = static_cast<std::size_t>(g.size());
  const Eigen::MatrixXd J = model.jacobian();

  std::vector<Field> uh;
  for (const auto& f : u) uh.push_back(f.to_fourier());
  const Field vh = v.to_fourier();

  std::vector<CVec> phys(u.size(), CVec(n));
  CVec vphys(n);
  for (std::size_t c = 0; c < u.size(); ++c) {
    CVec tmp(uh[c].values().begin(), uh[c].values().end());
    if (dealiased) dealias(tmp);
    fft_inverse(tmp, phys[c]);
  }
  {
    CVec tmp(vh.values().begin(), vh.values().end());
    if (dealiased) dealias(tmp);
    fft_inverse(tmp, vphys);
  }
  std::vector<const cplx*> ptr;
  for (const auto& p : phys) ptr.push_back(p.data());
  std::vector<CVec> fnl;
  CVec gval;
  evaluate_pointwise(model, ptr, vphys.data(), n, fnl, gval, true);

  RhsFields out;
  for (int c = 0; c < model.d; ++c) {
    Field du = Field::zeros(g, Space::fourier);
    fft_forward(fnl[static_cast<std::size_t>(c)], du.values());
    if (dealiased) dealias(du.values());
    for (std::size_t i = 0; i < n; ++i) {
      const double k = g.wavenumber(static_cast<int>(i));
      cplx lin = -model.diffusion[static_cast<std::size_t>(c)] * k * k * uh[static_cast<std::size_t>(c)][i];
      for (int e = 0; e < model.d; ++e) lin += J(c, e) * uh[static_cast<std::size_t>(e)][i];
      du[i] += lin;
    }
    out.du.push_back(du.to_physical());
  }
  Field dv = Field::zeros(g, Space::fourier);
  fft_forward(gval, dv.values());
  if (dealiased) dealias(dv.values());
  for (std::size_t i = 0; i < n; ++i) {
    const double k = g.wavenumber(static_cast<int>(i));
    dv[i] = -k * k * (dv[i] + model.d_v * vh[i]);
  }
  out.dv = dv.to_physical();
  return out;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

cplx parse_complex(const std::string& tok) {
  std::string t = tok;
  std::replace(t.begin(), t.end(), ',', ' ');
  t.erase(std::remove(t.begin(), t.end(), '('), t.end());
  t.erase(std::remove(t.begin(), t.end(), ')'), t.end());
  std::istringstream is(t);
  double re = 0.0, im = 0.0;
  is >> re;
  if (!(is >> im)) im = 0.0;
  return {re, im};
}

}  // namespace

RDModel parse_model(std::istream& is) {
  RDModel m;
  m.name = "user";
  m.f.clear();
  std::string section;
  std::vector<std::pair<std::string, std::vector<std::string>>> tables;
  std::string line;
  int lineno = 0;
  bool have_d = false;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw std::invalid_argument("model file line " + std::to_string(lineno) + ": bad section");
      section = trim(line.substr(1, line.size() - 2));
      tables.emplace_back(section, std::vector<std::string>{});
      continue;
    }
    if (!section.empty()) {
      tables.back().second.push_back(line);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("model file line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    std::istringstream vs(value);
    if (key == "name") {
      m.name = value;
    } else if (key == "d") {
      vs >> m.d;
      have_d = true;
    } else if (key == "diffusion") {
      m.diffusion.clear();
      double x;
      while (vs >> x) m.diffusion.push_back(x);
    } else if (key == "d_v") {
      vs >> m.d_v;
    } else if (key == "parameter") {
      vs >> m.parameter;
    } else if (key == "critical_parameter") {
      vs >> m.critical_parameter;
    } else if (key == "complex_pair") {
      m.complex_pair = value == "true" || value == "1";
    } else if (key == "ansatz_vector") {
      std::vector<cplx> vals;
      std::string tok;
      std::istringstream ts(value);
      while (ts >> tok) vals.push_back(parse_complex(tok));
      m.ansatz_vector = Eigen::Map<Eigen::VectorXcd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
    } else {
      throw std::invalid_argument("model file line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  if (!have_d) throw std::invalid_argument("model file: missing d");
  m.f.assign(static_cast<std::size_t>(m.d), Polynomial{});
  for (const auto& [name, rows] : tables) {
    Polynomial* target = nullptr;
    if (name == "g") {
      target = &m.g;
    } else if (name.size() > 1 && name[0] == 'f') {
      const int idx = std::stoi(name.substr(1));
      if (idx < 1 || idx > m.d) throw std::invalid_argument("model file: section [" + name + "] out of range");
      target = &m.f[static_cast<std::size_t>(idx - 1)];
    } else {
      throw std::invalid_argument("model file: unknown section [" + name + "]");
    }
    for (const auto& row : rows) {
      std::istringstream rs(row);
      double c;
      if (!(rs >> c)) throw std::invalid_argument("model file: bad coefficient row in [" + name + "]");
      std::vector<int> p;
      int e;
      while (rs >> e) p.push_back(e);
      if (static_cast<int>(p.size()) != m.d + 1)
        throw std::invalid_argument("model file: row in [" + name + "] needs d+1 exponents");
      target->add(c, p);
    }
  }
  m.validate();
  return m;
}

RDModel load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open model file " + path);
  return parse_model(in);
}

}  // namespace hopfcl
