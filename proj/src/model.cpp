#include "deom/model.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "deom/quadrature.hpp"

namespace deom {

namespace {

bool is_hermitian(const Matrix& a, double tol) {
  return (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace

SystemSpec::SystemSpec(Matrix h, std::vector<Matrix> q)
    : dim(static_cast<int>(h.rows())), h_sys(std::move(h)), q_modes(std::move(q)) {
  if (h_sys.rows() != h_sys.cols() || dim <= 0)
    throw ConfigError("SystemSpec: h_sys must be square and non-empty");
  if (!is_hermitian(h_sys, 1e-12))
    throw ConfigError("SystemSpec: h_sys is not Hermitian (tol 1e-12)");
  for (const auto& qm : q_modes) {
    if (qm.rows() != dim || qm.cols() != dim)
      throw ConfigError("SystemSpec: q_modes dimension mismatch");
    if (!is_hermitian(qm, 1e-12))
      throw ConfigError("SystemSpec: q_mode is not Hermitian (tol 1e-12)");
  }
}

Matrix sigma_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}
Matrix sigma_y() {
  Matrix m(2, 2);
  m << 0, -I, I, 0;
  return m;
}
Matrix sigma_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

SystemSpec SystemSpec::spin_boson(double epsilon, double delta) {
  Matrix h = epsilon * sigma_z() + delta * sigma_x();
  return SystemSpec(h, {sigma_z()});
}

DrudeSpec::DrudeSpec(double eta_, double gamma_) : eta(eta_), gamma(gamma_) {
  if (eta < 0.0) throw ConfigError("DrudeSpec: eta must be >= 0");
  if (gamma <= 0.0) throw ConfigError("DrudeSpec: gamma must be > 0");
}

PairingReport ModeSet::check_pairing(double tol) const {
  PairingReport r;
  for (int k = 0; k < K(); ++k) {
    const int kb = poles[k].conj_index;
    if (kb < 0 || kb >= K() || poles[kb].conj_index != k) {
      r.involution_ok = false;
      continue;
    }
    if (std::abs(poles[kb].gamma - std::conj(poles[k].gamma)) > tol)
      r.conjugate_ok = false;
    const bool real_gamma = std::abs(poles[k].gamma.imag()) <= tol;
    if (real_gamma != (kb == k)) r.conjugate_ok = false;
    if (poles[k].gamma.real() <= 0.0) r.re_gamma_ok = false;
    if (poles[k].eta.rows() != n_u || poles[k].eta.cols() != n_u)
      r.involution_ok = false;
  }
  return r;
}

void ModeSet::require_valid() const {
  if (beta <= 0.0) throw ConfigError("ModeSet: beta must be > 0");
  const auto r = check_pairing();
  if (!r.ok())
    throw ConfigError("ModeSet: conjugate-pairing checks failed (involution " +
                      std::to_string(r.involution_ok) + ", conjugate " +
                      std::to_string(r.conjugate_ok) + ", Re gamma " +
                      std::to_string(r.re_gamma_ok) + ")");
}

ModeSet ModeSet::scaled_coupling(double lambda) const {
  ModeSet out = *this;
  for (auto& p : out.poles) p.eta *= lambda * lambda;
  return out;
}

cplx ModeSet::reconstruct(double t, int u, int v) const {
  cplx acc = 0.0;
  for (const auto& p : poles) acc += p.eta(u, v) * std::exp(-p.gamma * t);
  return acc;
}

// --- decompositions -------------------------------------------------------

ModeSet build_drude_matsubara(const DrudeSpec& spec, double beta, int n_matsubara) {
  if (beta <= 0.0) throw ConfigError("build_drude_matsubara: beta must be > 0");
  if (n_matsubara < 0) throw ConfigError("build_drude_matsubara: n_matsubara >= 0");
  ModeSet m;
  m.beta = beta;
  m.n_u = 1;
  const double eg = spec.eta * spec.gamma;

  const double half = 0.5 * beta * spec.gamma;
  if (std::abs(std::sin(half)) < 1e-12)
    throw ConfigError("build_drude_matsubara: beta*gamma/2 at a Bose pole");
  Pole drude;
  drude.gamma = spec.gamma;
  drude.eta = Matrix::Constant(1, 1, 0.5 * eg * cplx(std::cos(half) / std::sin(half), -1.0));
  drude.conj_index = 0;
  m.poles.push_back(drude);

  for (int j = 1; j <= n_matsubara; ++j) {
    const double nu = 2.0 * M_PI * j / beta;
    if (std::abs(nu - spec.gamma) < 1e-12 * spec.gamma)
      throw ConfigError("build_drude_matsubara: Matsubara pole degenerate with gamma");
    Pole p;
    p.gamma = nu;
    p.eta = Matrix::Constant(1, 1, 2.0 * eg / beta * nu / (nu * nu - spec.gamma * spec.gamma));
    p.conj_index = j;
    m.poles.push_back(p);
  }
  m.require_valid();
  return m;
}

double PadeBose::eval(double x) const {
  double acc = 1.0 / x + 0.5;
  for (std::size_t j = 0; j < xi.size(); ++j)
    acc += 2.0 * kappa[j] * x / (x * x + xi[j] * xi[j]);
  return acc;
}

cplx PadeBose::eval(cplx x) const {
  cplx acc = 1.0 / x + 0.5;
  for (std::size_t j = 0; j < xi.size(); ++j)
    acc += 2.0 * kappa[j] * x / (x * x + xi[j] * xi[j]);
  return acc;
}

namespace {

// Positive eigenvalues of the symmetric tridiagonal matrix with off-diagonal
// 1/sqrt(b_m b_{m+1}); the Bose poles/zeros are 2/lambda.
std::vector<double> jacobi_positive_inverse(const std::vector<double>& b) {
  const int n = static_cast<int>(b.size());
  Eigen::MatrixXd lam = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) {
    const double v = 1.0 / std::sqrt(b[i] * b[i + 1]);
    lam(i, i + 1) = v;
    lam(i + 1, i) = v;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lam);
  if (es.info() != Eigen::Success)
    throw ConvergenceError("pade_bose: eigen decomposition failed");
  std::vector<double> out;
  for (int i = 0; i < n; ++i) {
    const double ev = es.eigenvalues()(i);
    if (ev > 1e-13) out.push_back(2.0 / ev);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

PadeBose pade_bose(int n_pade) {
  if (n_pade < 1) throw ConfigError("pade_bose: n_pade must be >= 1");
  std::vector<double> b(2 * n_pade);
  for (int m = 0; m < 2 * n_pade; ++m) b[m] = 2.0 * (m + 1) + 1.0;
  auto xi = jacobi_positive_inverse(b);
  if (static_cast<int>(xi.size()) != n_pade)
    throw ConvergenceError("pade_bose: degenerate pole eigenproblem (n_pade too large)");

  std::vector<double> zeta;
  if (n_pade > 1) {
    std::vector<double> bt(2 * n_pade - 1);
    for (int m = 0; m < 2 * n_pade - 1; ++m) bt[m] = 2.0 * (m + 1) + 3.0;
    zeta = jacobi_positive_inverse(bt);
    if (static_cast<int>(zeta.size()) != n_pade - 1)
      throw ConvergenceError("pade_bose: degenerate zero eigenproblem (n_pade too large)");
  }

  // kappa_j proportional to prod_k (zeta_k^2 - xi_j^2) / prod_{k != j} (xi_k^2 - xi_j^2),
  // normalized by the leading Taylor moment sum_j 8 kappa_j / xi_j^2 = 1/3.
  std::vector<double> kappa(n_pade);
  for (int j = 0; j < n_pade; ++j) {
    double r = 1.0;
    const double xj2 = xi[j] * xi[j];
    for (int k = 0; k + 1 < n_pade; ++k) r *= zeta[k] * zeta[k] - xj2;
    for (int k = 0; k < n_pade; ++k) {
      if (k == j) continue;
      const double d = xi[k] * xi[k] - xj2;
      if (d == 0.0) throw ConvergenceError("pade_bose: repeated poles");
      r /= d;
    }
    kappa[j] = r;
  }
  double moment = 0.0;
  for (int j = 0; j < n_pade; ++j) moment += 8.0 * kappa[j] / (xi[j] * xi[j]);
  if (!std::isfinite(moment) || moment == 0.0)
    throw ConvergenceError("pade_bose: residue normalization failed");
  const double scale = (1.0 / 3.0) / moment;
  for (auto& k : kappa) k *= scale;

  PadeBose out;
  out.xi = std::move(xi);
  out.kappa = std::move(kappa);
  return out;
}

ModeSet build_drude_pade(const DrudeSpec& spec, double beta, int n_pade) {
  if (beta <= 0.0) throw ConfigError("build_drude_pade: beta must be > 0");
  const PadeBose pb = pade_bose(n_pade);
  ModeSet m;
  m.beta = beta;
  m.n_u = 1;
  const double eg = spec.eta * spec.gamma;

  for (double xij : pb.xi)
    if (std::abs(xij - beta * spec.gamma) < 1e-12 * xij)
      throw ConfigError("build_drude_pade: Pade pole degenerate with gamma");

  Pole drude;
  drude.gamma = spec.gamma;
  drude.eta = Matrix::Constant(1, 1, -I * eg * pb.eval(cplx(0.0, -beta * spec.gamma)));
  drude.conj_index = 0;
  m.poles.push_back(drude);

  for (int j = 0; j < n_pade; ++j) {
    const double nu = pb.xi[j] / beta;
    Pole p;
    p.gamma = nu;
    p.eta = Matrix::Constant(
        1, 1, 2.0 * pb.kappa[j] * eg / beta * nu / (nu * nu - spec.gamma * spec.gamma));
    p.conj_index = j + 1;
    m.poles.push_back(p);
  }
  m.require_valid();
  return m;
}

int choose_pade_count(const DrudeSpec& spec, double beta, double t_min, double t_max,
                      double tol, int n_max) {
  for (int n = 1; n <= n_max; ++n) {
    auto m = build_drude_pade(spec, beta, n);
    auto rep = validate_modeset(m, spec, t_max, 160, t_min);
    if (rep.max_rel_err < tol) return n;
  }
  throw ConvergenceError("choose_pade_count: tolerance not reached by n_max poles");
}

// --- quadrature oracles ----------------------------------------------------

namespace {

// Tail-corrected Int_0^infty g(w) cos/sin(w t) dw where g -> eta*gamma/w for
// large w.  Beyond Omega the integrand is replaced by its 1/w asymptote whose
// cosine/sine integrals are known; the neglected remainder is O(gamma^2/Omega^2).
struct DrudeQuad {
  const DrudeSpec& spec;
  double beta;

  double coth_half(double w) const {
    const double x = 0.5 * beta * w;
    if (std::abs(x) < 1e-8) return 1.0 / x + x / 3.0;
    return 1.0 / std::tanh(x);
  }

  double omega_cut(double t) const {
    double om = std::max({50.0 * spec.gamma, 45.0 / beta, 60.0 / std::max(t, 1e-300)});
    return om;
  }

  double re_c(double t) const {
    if (spec.eta == 0.0) return 0.0;
    if (t <= 0.0)
      throw QuadratureError(
          "bath_correlation_quadrature: Re c(t) is UV log-divergent at t = 0 "
          "for the Drude model; quadrature does not converge");
    const double om = omega_cut(t);
    quad::Options opt;
    opt.abs_tol = 1e-12 * std::max(1.0, spec.eta * spec.gamma);
    opt.rel_tol = 1e-11;
    opt.seed_panels = std::max(8, static_cast<int>(om * t / M_PI));
    opt.max_panels = 400000;
    const double body = quad::gk15_adaptive(
        [&](double w) {
          // w -> 0 removable: J coth -> 2 eta / (beta gamma)
          const double c = w == 0.0 ? 2.0 * spec.eta / (beta * spec.gamma)
                                    : spec.J(w) * coth_half(w);
          return c * std::cos(w * t);
        },
        0.0, om, opt);
    const double tail = -spec.eta * spec.gamma * quad::cosine_integral(om * t);
    return (body + tail) / M_PI;
  }

  double im_c(double t) const {
    if (spec.eta == 0.0) return 0.0;
    if (t < 0.0) throw QuadratureError("bath_correlation_quadrature: t >= 0 required");
    if (t == 0.0) return 0.0;  // one-sided limit is -eta*gamma/2; exact t=0 value is 0
    const double om = omega_cut(t);
    quad::Options opt;
    opt.abs_tol = 1e-12 * std::max(1.0, spec.eta * spec.gamma);
    opt.rel_tol = 1e-11;
    opt.seed_panels = std::max(8, static_cast<int>(om * t / M_PI));
    opt.max_panels = 400000;
    const double body = quad::gk15_adaptive(
        [&](double w) { return spec.J(w) * std::sin(w * t); }, 0.0, om, opt);
    const double tail =
        spec.eta * spec.gamma * (M_PI / 2 - quad::sine_integral(om * t));
    return -(body + tail) / M_PI;
  }
};

}  // namespace

cplx bath_correlation_quadrature(const DrudeSpec& spec, double beta, double t) {
  if (beta <= 0.0) throw ConfigError("bath_correlation_quadrature: beta must be > 0");
  DrudeQuad q{spec, beta};
  return {q.re_c(t), q.im_c(t)};
}

cplx bath_correlation_quadrature_reversed(const DrudeSpec& spec, double beta, double t) {
  // conj of (1/pi) Int_{-inf}^{inf} e^{+iwt} J(w) n_+(w) dw, integrated
  // two-sided with the raw Bose factor instead of the folded coth form.
  if (beta <= 0.0) throw ConfigError("bath_correlation_quadrature_reversed: beta > 0");
  if (spec.eta == 0.0) return 0.0;
  if (t <= 0.0)
    throw QuadratureError("bath_correlation_quadrature_reversed: requires t > 0");
  const auto jnp = [&](double w) {
    if (w == 0.0) return spec.eta / (beta * spec.gamma);
    return spec.J(w) / (1.0 - std::exp(-beta * w));
  };
  const double om_pos = std::max({50.0 * spec.gamma, 45.0 / beta, 60.0 / t});
  const double om_neg = 45.0 / beta + 5.0 * spec.gamma;
  quad::Options opt;
  opt.abs_tol = 1e-12 * std::max(1.0, spec.eta * spec.gamma);
  opt.rel_tol = 1e-11;
  opt.seed_panels = std::max(8, static_cast<int>((om_pos + om_neg) * t / M_PI));
  opt.max_panels = 400000;
  const double eg = spec.eta * spec.gamma;
  const double re = quad::gk15_adaptive(
                        [&](double w) { return jnp(w) * std::cos(w * t); }, -om_neg,
                        om_pos, opt) -
                    eg * quad::cosine_integral(om_pos * t);
  const double im = quad::gk15_adaptive(
                        [&](double w) { return jnp(w) * std::sin(w * t); }, -om_neg,
                        om_pos, opt) +
                    eg * (M_PI / 2 - quad::sine_integral(om_pos * t));
  return std::conj(cplx{re, im} / M_PI);
}

double decoherence_integral_quadrature(const DrudeSpec& spec, double beta, double t) {
  if (t <= 0.0) return 0.0;
  if (spec.eta == 0.0) return 0.0;
  DrudeQuad q{spec, beta};
  const double om = std::max({60.0 * spec.gamma, 45.0 / beta, 60.0 / t, 1e4});
  quad::Options opt;
  opt.abs_tol = 1e-13 * std::max(1.0, spec.eta * spec.gamma) * t;
  opt.rel_tol = 1e-11;
  opt.seed_panels = std::max(8, static_cast<int>(om * t / M_PI));
  opt.max_panels = 400000;
  const double body = quad::gk15_adaptive(
      [&](double w) {
        if (w == 0.0) return 2.0 / beta * spec.eta / spec.gamma * 0.5 * t * t;
        const double s = std::sin(0.5 * w * t);
        return spec.J(w) * q.coth_half(w) * 2.0 * s * s / (w * w);
      },
      0.0, om, opt);
  return body / M_PI;  // tail bounded by 2 eta gamma / om^2
}

double theta_quadrature(const DrudeSpec& spec) {
  if (spec.eta == 0.0) return 0.0;
  const double om = 2e5 * spec.gamma;
  quad::Options opt;
  opt.abs_tol = 1e-13 * std::max(1.0, spec.eta);
  opt.rel_tol = 1e-12;
  opt.seed_panels = 64;
  const double g2 = spec.gamma * spec.gamma;
  const double body = quad::gk15_adaptive(
      [&](double w) { return spec.eta * spec.gamma / (w * w + g2); }, 0.0, om, opt);
  const double tail = spec.eta * spec.gamma / om;
  return 2.0 / M_PI * (body + tail);
}

double reorganization_energy_quadrature(const DrudeSpec& spec) {
  return 0.5 * theta_quadrature(spec);
}

// --- validation ------------------------------------------------------------

ValidationReport validate_modeset(const ModeSet& m, const CorrelationFn& oracle,
                                  double t_min, double t_max, int n_samples, int u,
                                  int v) {
  ValidationReport rep;
  rep.pairing = m.check_pairing();
  rep.t_min = t_min;
  rep.t_max = t_max;
  rep.n_samples = n_samples;
  double max_abs_c = 0.0, max_abs_err = 0.0;
  for (int i = 0; i < n_samples; ++i) {
    const double t =
        n_samples == 1 ? t_min : t_min + (t_max - t_min) * i / (n_samples - 1);
    const cplx ref = oracle(t);
    const cplx err = m.reconstruct(t, u, v) - ref;
    max_abs_c = std::max(max_abs_c, std::abs(ref));
    max_abs_err = std::max(max_abs_err, std::abs(err));
    if (i == 0 && std::abs(ref) > 0.0) rep.err_at_first = std::abs(err) / std::abs(ref);
  }
  rep.max_rel_err = max_abs_c > 0.0 ? max_abs_err / max_abs_c
                                    : (max_abs_err > 0.0 ? HUGE_VAL : 0.0);
  return rep;
}

ValidationReport validate_modeset(const ModeSet& m, const DrudeSpec& spec, double t_max,
                                  int n_samples, double t_min) {
  return validate_modeset(
      m, [&](double t) { return bath_correlation_quadrature(spec, m.beta, t); }, t_min,
      t_max, n_samples);
}

// --- mode table -------------------------------------------------------------

void write_mode_table(std::ostream& os, const ModeSet& m) {
  os << "u,k,re_gamma,im_gamma,re_eta,im_eta,kbar\n";
  char buf[512];
  for (int u = 0; u < m.n_u; ++u) {
    for (int k = 0; k < m.K(); ++k) {
      const auto& p = m.poles[k];
      std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g,%.17g,%.17g,%d\n", u, k,
                    p.gamma.real(), p.gamma.imag(), p.eta(u, u).real(),
                    p.eta(u, u).imag(), p.conj_index);
      os << buf;
    }
  }
}

ModeSet read_mode_table(std::istream& is, double beta) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("read_mode_table: empty input");
  std::map<std::pair<int, int>, std::tuple<cplx, cplx, int>> rows;
  int max_u = 0, max_k = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string tok;
    std::vector<std::string> f;
    while (std::getline(ss, tok, ',')) f.push_back(tok);
    if (f.size() != 7) throw ConfigError("read_mode_table: malformed row: " + line);
    const int u = std::stoi(f[0]), k = std::stoi(f[1]);
    rows[{u, k}] = {cplx(std::stod(f[2]), std::stod(f[3])),
                    cplx(std::stod(f[4]), std::stod(f[5])), std::stoi(f[6])};
    max_u = std::max(max_u, u);
    max_k = std::max(max_k, k);
  }
  ModeSet m;
  m.beta = beta;
  m.n_u = max_u + 1;
  m.poles.resize(max_k + 1);
  for (auto& p : m.poles) p.eta = Matrix::Zero(m.n_u, m.n_u);
  for (const auto& [uk, row] : rows) {
    auto& p = m.poles[uk.second];
    p.gamma = std::get<0>(row);
    p.eta(uk.first, uk.first) = std::get<1>(row);
    p.conj_index = std::get<2>(row);
  }
  m.require_valid();
  return m;
}

}  // namespace deom
