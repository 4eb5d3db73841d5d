#include "ramsr/oracle.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "ramsr/error.hpp"

namespace ramsr::oracle {

using cplx = std::complex<double>;

void OracleSystem::validate() const {
  if (atoms.empty() || atoms.size() > kMaxAtoms) {
    throw std::invalid_argument("OracleSystem: need 1 to 4 atoms");
  }
  if (fock_cutoff < 1) throw std::invalid_argument("OracleSystem: fock_cutoff must be >= 1");
  if (dimension() > kMaxDimension) {
    throw std::invalid_argument("OracleSystem: Hilbert dimension exceeds 512");
  }
  if (!(params.kappa >= 0.0) || !(params.gamma >= 0.0)) {
    throw std::invalid_argument("OracleSystem: rates must be non-negative");
  }
  seq.validate();
}

namespace {

using Triplets = std::vector<Eigen::Triplet<cplx>>;

SparseOp from_triplets(std::size_t dim, const Triplets& t) {
  SparseOp op(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  op.setFromTriplets(t.begin(), t.end());
  op.makeCompressed();
  return op;
}

}  // namespace

LiouvillianAction::LiouvillianAction(const OracleSystem& sys) : sys_(sys), dim_(sys.dimension()) {
  sys_.validate();
  const std::size_t na = sys_.atom_states();
  const std::size_t nf = static_cast<std::size_t>(sys_.fock_cutoff) + 1;
  Triplets ta;
  Triplets tn;
  for (std::size_t n = 0; n < nf; ++n) {
    for (std::size_t b = 0; b < na; ++b) {
      const auto col = static_cast<Eigen::Index>(n * na + b);
      if (n > 0) ta.emplace_back(static_cast<Eigen::Index>((n - 1) * na + b), col, std::sqrt(double(n)));
      tn.emplace_back(col, col, double(n));
    }
  }
  a_ = from_triplets(dim_, ta);
  ada_ = from_triplets(dim_, tn);
  for (std::size_t j = 0; j < sys_.atoms.size(); ++j) {
    Triplets ts;
    Triplets tp;
    const std::size_t bit = std::size_t{1} << j;
    for (std::size_t n = 0; n < nf; ++n) {
      for (std::size_t b = 0; b < na; ++b) {
        if (!(b & bit)) continue;
        const auto col = static_cast<Eigen::Index>(n * na + b);
        ts.emplace_back(static_cast<Eigen::Index>(n * na + (b ^ bit)), col, 1.0);
        tp.emplace_back(col, col, 1.0);
      }
    }
    sm_.push_back(from_triplets(dim_, ts));
    pe_.push_back(from_triplets(dim_, tp));
  }
}

const SparseOp& LiouvillianAction::effective_hamiltonian(const Segment& seg) const {
  const auto key = std::make_tuple(seg.rabi, seg.phase, seg.delta_a);
  if (auto it = heff_cache_.find(key); it != heff_cache_.end()) return it->second;
  const PhysicalParams& p = sys_.params;
  const cplx om = std::polar(0.5 * seg.rabi, seg.phase);
  const cplx I{0.0, 1.0};
  SparseOp h = (-(seg.delta_a - p.delta_cavity)) * ada_;
  SparseOp loss = p.kappa * ada_;
  for (std::size_t j = 0; j < sys_.atoms.size(); ++j) {
    const Atom& at = sys_.atoms[j];
    const SparseOp sp = SparseOp(sm_[j].adjoint());
    const SparseOp ad = SparseOp(a_.adjoint());
    h += (-(seg.delta_a - at.delta_doppler)) * pe_[j];
    h += at.g * SparseOp(ad * sm_[j] + a_ * sp);
    h += om * sp + std::conj(om) * sm_[j];
    loss += p.gamma * pe_[j];
  }
  SparseOp heff = h - (0.5 * I) * loss;
  heff.makeCompressed();
  return heff_cache_.emplace(key, std::move(heff)).first->second;
}

void LiouvillianAction::apply(const Segment& seg, std::span<const cplx> rho,
                              std::span<cplx> drho) const {
  const auto n = static_cast<Eigen::Index>(dim_);
  Eigen::Map<const Eigen::MatrixXcd> r(rho.data(), n, n);
  Eigen::Map<Eigen::MatrixXcd> out(drho.data(), n, n);
  const SparseOp& heff = effective_hamiltonian(seg);
  const cplx I{0.0, 1.0};
  const Eigen::MatrixXcd hr = heff * r;
  const Eigen::MatrixXcd rh = r * SparseOp(heff.adjoint());
  out = -I * (hr - rh);
  if (sys_.params.kappa > 0.0) {
    out += sys_.params.kappa * (a_ * (a_ * r.adjoint()).adjoint());
  }
  if (sys_.params.gamma > 0.0) {
    for (const SparseOp& s : sm_) out += sys_.params.gamma * (s * (s * r.adjoint()).adjoint());
  }
}

Observables LiouvillianAction::observe(const DensityOperator& rho) const {
  Observables o;
  auto expect = [&](const SparseOp& op) {
    cplx acc{};
    for (int k = 0; k < op.outerSize(); ++k) {
      for (SparseOp::InnerIterator it(op, k); it; ++it) {
        acc += it.value() * rho(it.col(), it.row());
      }
    }
    return acc;
  };
  const double na = expect(ada_).real();
  o.intracavity_photons = na;
  o.photon_rate = sys_.params.kappa * na;
  double excited = 0.0;
  cplx coherence{};
  const double g_ref = sys_.params.g_max > 0.0 ? sys_.params.g_max : 1.0;
  for (std::size_t j = 0; j < sys_.atoms.size(); ++j) {
    excited += expect(pe_[j]).real();
    coherence += (sys_.atoms[j].g / g_ref) * expect(sm_[j]);
  }
  o.mean_inversion = excited / static_cast<double>(sys_.atoms.size());
  o.collective_coherence = std::abs(coherence);
  o.total_excitation = na + excited;
  return o;
}

DensityOperator ground_state(const OracleSystem& sys) {
  sys.validate();
  const auto n = static_cast<Eigen::Index>(sys.dimension());
  DensityOperator rho = DensityOperator::Zero(n, n);
  rho(0, 0) = 1.0;
  return rho;
}

DensityOperator product_state(const OracleSystem& sys, double theta, double drive_phase) {
  sys.validate();
  const std::size_t na = sys.atom_states();
  const cplx cg = std::cos(0.5 * theta);
  const cplx ce = cplx{0.0, -1.0} * std::polar(1.0, drive_phase) * std::sin(0.5 * theta);
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(sys.dimension()));
  for (std::size_t b = 0; b < na; ++b) {
    cplx amp = 1.0;
    for (std::size_t j = 0; j < sys.atoms.size(); ++j) amp *= (b >> j) & 1U ? ce : cg;
    psi(static_cast<Eigen::Index>(b)) = amp;
  }
  return psi * psi.adjoint();
}

DensityOperator single_excitation_state(const OracleSystem& sys,
                                        std::span<const cplx> amplitudes) {
  sys.validate();
  if (amplitudes.size() != sys.atoms.size()) {
    throw std::invalid_argument("single_excitation_state: one amplitude per atom required");
  }
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(sys.dimension()));
  for (std::size_t j = 0; j < amplitudes.size(); ++j) {
    psi(static_cast<Eigen::Index>(std::size_t{1} << j)) = amplitudes[j];
  }
  const double norm = psi.norm();
  if (norm == 0.0) throw std::invalid_argument("single_excitation_state: zero amplitudes");
  psi /= norm;
  return psi * psi.adjoint();
}

double trace_error(const DensityOperator& rho) { return std::abs(rho.trace() - 1.0); }

double hermiticity_error(const DensityOperator& rho) {
  return (rho - rho.adjoint()).cwiseAbs().maxCoeff();
}

double min_eigenvalue(const DensityOperator& rho) {
  const Eigen::MatrixXcd herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(herm, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

OracleRun evolve_density(const OracleSystem& sys, const DensityOperator& rho0,
                         std::span<const double> sample_times, const IntegratorConfig& cfg) {
  sys.validate();
  const auto n = static_cast<Eigen::Index>(sys.dimension());
  if (rho0.rows() != n || rho0.cols() != n) {
    throw std::invalid_argument("evolve_density: rho0 dimension mismatch");
  }
  if (trace_error(rho0) > 1e-8) throw std::invalid_argument("evolve_density: rho0 trace != 1");
  const std::vector<double> bounds = sys.seq.boundaries();
  for (std::size_t i = 0; i < sample_times.size(); ++i) {
    if (sample_times[i] < 0.0 || sample_times[i] > bounds.back() ||
        (i > 0 && !(sample_times[i] > sample_times[i - 1]))) {
      throw std::invalid_argument("evolve_density: sample times must increase within the sequence");
    }
  }

  const LiouvillianAction action(sys);
  OracleRun run;
  run.min_eigenvalue = min_eigenvalue(rho0);
  StateVector y(rho0.data(), rho0.data() + rho0.size());

  auto record = [&](double t, std::span<const cplx> state) {
    Eigen::Map<const Eigen::MatrixXcd> rho(state.data(), n, n);
    const DensityOperator r = rho;
    const double terr = trace_error(r);
    if (terr > 1e-6) {
      std::ostringstream os;
      os << "evolve_density: trace drift " << terr << " at t = " << t
         << " s (hermiticity error " << hermiticity_error(r) << ")";
      throw NumericalError(os.str());
    }
    run.max_trace_error = std::max(run.max_trace_error, terr);
    run.max_hermiticity_error = std::max(run.max_hermiticity_error, hermiticity_error(r));
    run.samples.push_back(OracleSample{t, action.observe(r)});
  };

  std::size_t cursor = 0;
  for (std::size_t k = 0; k < sys.seq.segments.size(); ++k) {
    const Segment& seg = sys.seq.segments[k];
    const std::size_t begin = cursor;
    while (cursor < sample_times.size() && sample_times[cursor] <= bounds[k + 1]) ++cursor;
    OdeRhs rhs = [&](double, std::span<const cplx> yy, std::span<cplx> dd) {
      action.apply(seg, yy, dd);
    };
    run.stats += solve_ode(rhs, y, bounds[k], bounds[k + 1],
                           sample_times.subspan(begin, cursor - begin), cfg, record);
    Eigen::Map<const Eigen::MatrixXcd> rho(y.data(), n, n);
    run.min_eigenvalue = std::min(run.min_eigenvalue, min_eigenvalue(rho));
  }
  run.final_state = Eigen::Map<const Eigen::MatrixXcd>(y.data(), n, n);
  return run;
}

namespace analytic {

double rabi_excitation(double rabi, double t) {
  const double s = std::sin(0.5 * rabi * t);
  return s * s;
}

double damped_rabi_excitation(double rabi, double gamma, double t) {
  // Torrey solution for T2 = 2 T1; lambda may be imaginary in the overdamped case.
  const cplx lambda = std::sqrt(cplx{rabi * rabi - gamma * gamma / 16.0, 0.0});
  const double steady = 0.5 * rabi * rabi / (rabi * rabi + 0.5 * gamma * gamma);
  cplx osc;
  if (std::abs(lambda) < 1e-12 * (rabi + gamma)) {
    osc = 1.0 + 0.75 * gamma * t;
  } else {
    osc = std::cos(lambda * t) + (0.75 * gamma / lambda) * std::sin(lambda * t);
  }
  return steady * (1.0 - std::exp(-0.75 * gamma * t) * osc.real());
}

std::pair<double, double> vacuum_rabi(double g, double kappa, double gamma, double t) {
  // d/dt (c_e, c_a) = M (c_e, c_a), M = [[-gamma/2, -i g], [-i g, -kappa/2]].
  const cplx I{0.0, 1.0};
  const cplx m11 = -0.5 * gamma;
  const cplx m12 = -I * g;
  const cplx m21 = -I * g;
  const cplx m22 = -0.5 * kappa;
  const cplx mu = 0.5 * (m11 + m22);
  const cplx nu = std::sqrt(0.25 * (m11 - m22) * (m11 - m22) + m12 * m21);
  const cplx ch = std::cosh(nu * t);
  const cplx sh_over = std::abs(nu) < 1e-14 ? cplx{t} : std::sinh(nu * t) / nu;
  const cplx e = std::exp(mu * t);
  const cplx ce = e * (ch + sh_over * (m11 - mu));
  const cplx ca = e * (sh_over * m21);
  return {std::norm(ce), std::norm(ca)};
}

}  // namespace analytic

}  // namespace ramsr::oracle
