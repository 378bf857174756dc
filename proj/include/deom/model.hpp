#pragma once

#include <functional>
#include <iosfwd>
#include <optional>

#include "deom/types.hpp"

namespace deom {

// System Hamiltonian plus dissipative-mode coupling operators (hbar = 1,
// energies in a user-declared reference unit, time in its inverse).
struct SystemSpec {
  int dim = 0;
  Matrix h_sys;
  std::vector<Matrix> q_modes;

  SystemSpec() = default;
  SystemSpec(Matrix h, std::vector<Matrix> q);

  int n_modes() const { return static_cast<int>(q_modes.size()); }

  static SystemSpec spin_boson(double epsilon, double delta);
};

Matrix sigma_x();
Matrix sigma_y();
Matrix sigma_z();

// Drude spectral density J(w) = eta*gamma*w / (w^2 + gamma^2).
struct DrudeSpec {
  double eta = 0.0;
  double gamma = 1.0;

  DrudeSpec() = default;
  DrudeSpec(double eta_, double gamma_);

  double J(double w) const { return eta * gamma * w / (w * w + gamma * gamma); }
};

// One pole of the exponential decomposition c_uv(t) ~ sum_k eta_uvk e^{-gamma_k t}.
// All (u,v) share the pole structure; eta is the full coefficient matrix.
struct Pole {
  cplx gamma;
  Matrix eta;      // n_u x n_u
  int conj_index;  // kbar with gamma_kbar = conj(gamma_k)
};

// View of one (u, k) hierarchy slot.
struct DissipatonMode {
  int u = 0;
  int k = 0;
  cplx gamma_k;
  const Matrix* eta_fwd = nullptr;
  int conj_index = 0;
};

struct PairingReport {
  bool involution_ok = true;
  bool conjugate_ok = true;
  bool re_gamma_ok = true;
  bool ok() const { return involution_ok && conjugate_ok && re_gamma_ok; }
};

struct ModeSet {
  double beta = 1.0;
  int n_u = 1;
  std::vector<Pole> poles;

  int K() const { return static_cast<int>(poles.size()); }
  int n_slots() const { return n_u * K(); }
  int slot(int u, int k) const { return u * K() + k; }
  int slot_u(int m) const { return m / K(); }
  int slot_k(int m) const { return m % K(); }
  // Slot of the conjugate dissipaton, same u, pole kbar.
  int conj_slot(int m) const { return slot_u(m) * K() + poles[slot_k(m)].conj_index; }

  cplx eta_fwd(int u, int v, int k) const { return poles[k].eta(u, v); }
  cplx eta_bwd(int u, int v, int k) const {
    return std::conj(poles[poles[k].conj_index].eta(u, v));
  }

  DissipatonMode mode(int u, int k) const {
    return {u, k, poles[k].gamma, &poles[k].eta, poles[k].conj_index};
  }

  PairingReport check_pairing(double tol = 1e-12) const;
  void require_valid() const;  // throws if pairing checks fail

  // Coupling scaled by lambda: eta -> lambda^2 * eta, pole structure fixed.
  ModeSet scaled_coupling(double lambda) const;

  // sum_k eta_uvk e^{-gamma_k t}
  cplx reconstruct(double t, int u = 0, int v = 0) const;
};

// --- decompositions -------------------------------------------------------

// Drude pole + n_matsubara Matsubara poles (nu_j = 2 pi j / beta).
ModeSet build_drude_matsubara(const DrudeSpec& spec, double beta, int n_matsubara);

// Drude pole + n_pade poles of the [N-1/N] Pade approximant of the Bose
// function.  Strictly better low-temperature reconstruction than Matsubara
// at equal mode count.
ModeSet build_drude_pade(const DrudeSpec& spec, double beta, int n_pade);

// Smallest n_pade whose reconstruction error on [t_min, t_max] is below tol;
// throws ConvergenceError if n_max does not reach it.
int choose_pade_count(const DrudeSpec& spec, double beta, double t_min, double t_max,
                      double tol, int n_max = 24);

// [N-1/N] Pade data for the Bose function 1/(1-e^{-x}), poles xi_j and
// weights kappa_j of  1/x + 1/2 + sum_j 2 kappa_j x / (x^2 + xi_j^2).
struct PadeBose {
  std::vector<double> xi;
  std::vector<double> kappa;
  double eval(double x) const;
  cplx eval(cplx x) const;
};
PadeBose pade_bose(int n_pade);

// --- quadrature oracles ----------------------------------------------------

// c(t) = (1/pi) Int dw e^{-iwt} J(w)/(1 - e^{-beta w}), t > 0.  The Drude
// real part diverges logarithmically as t -> 0+; the oracle reports
// quadrature non-convergence there rather than a cutoff-dependent number.
cplx bath_correlation_quadrature(const DrudeSpec& spec, double beta, double t);

// Same via the time-reversal route, conj of (1/pi) Int e^{+iwt} J n_+.
cplx bath_correlation_quadrature_reversed(const DrudeSpec& spec, double beta, double t);

// Int_0^t ds (t-s) Re c(s)  =  (1/pi) Int dw J coth(beta w/2) (1-cos wt)/w^2.
double decoherence_integral_quadrature(const DrudeSpec& spec, double beta, double t);

// theta = Int_0^infty phi(t) dt = (2/pi) Int_0^infty J(w)/w dw  (= eta for Drude).
double theta_quadrature(const DrudeSpec& spec);

// Reorganization energy (1/pi) Int_0^infty J(w)/w dw = theta/2.
double reorganization_energy_quadrature(const DrudeSpec& spec);

// --- validation ------------------------------------------------------------

using CorrelationFn = std::function<cplx(double)>;

struct ValidationReport {
  double max_rel_err = 0.0;  // max_t |recon - c| / max_t |c|
  double err_at_first = 0.0;
  double t_min = 0.0, t_max = 0.0;
  int n_samples = 0;
  PairingReport pairing;
  bool ok(double tol) const { return pairing.ok() && max_rel_err < tol; }
};

// Reconstruction of mode (u,v) against an arbitrary reference correlation
// function on a uniform grid over [t_min, t_max].
ValidationReport validate_modeset(const ModeSet& m, const CorrelationFn& oracle,
                                  double t_min, double t_max, int n_samples,
                                  int u = 0, int v = 0);

// Against the Drude quadrature oracle.
ValidationReport validate_modeset(const ModeSet& m, const DrudeSpec& spec,
                                  double t_max, int n_samples,
                                  double t_min = 0.1);

// Mode table CSV: u, k, Re gamma, Im gamma, Re eta, Im eta, kbar.
void write_mode_table(std::ostream& os, const ModeSet& m);
ModeSet read_mode_table(std::istream& is, double beta);

}  // namespace deom
