#include "ramsr/cumulant_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ramsr {

StateLayout::StateLayout(std::size_t n_clusters) : m_(n_clusters) {
  if (m_ == 0) throw std::invalid_argument("StateLayout: need at least one cluster");
  pairs_ = m_ * (m_ + 1) / 2;
  c_base_ = 3 + 5 * m_;
  d_base_ = c_base_ + pairs_;
  f_base_ = d_base_ + pairs_;
  e_base_ = f_base_ + pairs_;
  size_ = e_base_ + m_ * m_;
}

CumulantModel::CumulantModel(ClusterGrid grid, PhysicalParams params)
    : grid_(std::move(grid)), params_(params), layout_(grid_.size()) {
  params_.validate(true);
  const std::size_t m = grid_.size();
  g_.resize(m);
  n_.resize(m);
  w_.resize(m);
  doppler_.resize(m);
  for (std::size_t c = 0; c < m; ++c) {
    g_[c] = grid_.clusters[c].g;
    n_[c] = grid_.clusters[c].multiplicity;
    w_[c] = n_[c] * g_[c];
    doppler_[c] = grid_.clusters[c].delta_doppler;
  }
  sum_c_.resize(m);
  sum_d_.resize(m);
  sum_e_.resize(m);
}

StateVector CumulantModel::ground_state() const { return StateVector(layout_.size(), cplx{}); }

StateVector CumulantModel::product_state(double theta, double drive_phase) const {
  const auto& L = layout_;
  const std::size_t m = L.clusters();
  StateVector y(L.size(), cplx{});
  const cplx s = cplx{0.0, -0.5 * std::sin(theta)} * std::polar(1.0, drive_phase);
  const double sh = std::sin(0.5 * theta);
  const cplx p = sh * sh;
  for (std::size_t c = 0; c < m; ++c) {
    y[L.s(c)] = s;
    y[L.p(c)] = p;
  }
  for (std::size_t c = 0; c < m; ++c) {
    for (std::size_t d = c; d < m; ++d) {
      y[L.c_pair(c, d)] = std::conj(s) * s;
      y[L.d_pair(c, d)] = s * s;
      y[L.f_pair(c, d)] = p * p;
    }
    for (std::size_t d = 0; d < m; ++d) y[L.e(c, d)] = p * s;
  }
  return y;
}

void CumulantModel::rhs(const Segment& segment, std::span<const cplx> y,
                        std::span<cplx> dy) const {
  const auto& L = layout_;
  const std::size_t m = L.clusters();
  if (y.size() != L.size() || dy.size() != L.size()) {
    throw std::invalid_argument("CumulantModel::rhs: state size does not match the layout");
  }
  constexpr cplx I{0.0, 1.0};
  const double kappa = params_.kappa;
  const double gamma = params_.gamma;
  const double det_cav = segment.delta_a - params_.delta_cavity;
  const cplx om = std::polar(0.5 * segment.rabi, segment.phase);
  const cplx omc = std::conj(om);

  const cplx al = y[L.alpha()];
  const cplx alc = std::conj(al);
  const cplx a2 = y[L.aa()];
  const cplx na = y[L.photons()];
  const double al_abs2 = std::norm(al);
  const cplx al2 = al * al;

  const cplx* s = y.data() + L.s(0);
  const cplx* p = y.data() + L.p(0);
  const cplx* X = y.data() + L.x(0);
  const cplx* Y = y.data() + L.y(0);
  const cplx* Z = y.data() + L.z(0);
  const cplx* C = y.data() + L.c_base();
  const cplx* D = y.data() + L.d_base();
  const cplx* F = y.data() + L.f_base();
  const cplx* E = y.data() + L.e_base();

  cplx* ds = dy.data() + L.s(0);
  cplx* dp = dy.data() + L.p(0);
  cplx* dX = dy.data() + L.x(0);
  cplx* dY = dy.data() + L.y(0);
  cplx* dZ = dy.data() + L.z(0);
  cplx* dC = dy.data() + L.c_base();
  cplx* dD = dy.data() + L.d_base();
  cplx* dF = dy.data() + L.f_base();
  cplx* dE = dy.data() + L.e_base();

  // Collective sums over partner atoms, excluding the atom itself:
  //   SC_c = sum_e n_e g_e C_ec - g_c C_cc, likewise for D and E.
  std::fill(sum_c_.begin(), sum_c_.end(), cplx{});
  std::fill(sum_d_.begin(), sum_d_.end(), cplx{});
  for (std::size_t c = 0; c < m; ++c) {
    const std::size_t row = L.pair(c, c);
    for (std::size_t d = c; d < m; ++d) {
      const cplx cv = C[row + d - c];
      const cplx dv = D[row + d - c];
      sum_c_[d] += w_[c] * cv;
      sum_d_[d] += w_[c] * dv;
      if (d != c) {
        sum_c_[c] += w_[d] * std::conj(cv);
        sum_d_[c] += w_[d] * dv;
      }
    }
  }
  for (std::size_t c = 0; c < m; ++c) {
    cplx acc{};
    const cplx* erow = E + c * m;
    for (std::size_t d = 0; d < m; ++d) acc += w_[d] * erow[d];
    sum_e_[c] = acc - g_[c] * erow[c];
    const std::size_t cc = L.pair(c, c);
    sum_c_[c] -= g_[c] * C[cc];
    sum_d_[c] -= g_[c] * D[cc];
  }

  // Cavity moments.
  cplx sum_ws{};
  cplx sum_wy{};
  double sum_wimx = 0.0;
  for (std::size_t c = 0; c < m; ++c) {
    sum_ws += w_[c] * s[c];
    sum_wy += w_[c] * Y[c];
    sum_wimx += w_[c] * X[c].imag();
  }
  dy[L.alpha()] = (I * det_cav - 0.5 * kappa) * al - I * sum_ws;
  dy[L.aa()] = (2.0 * I * det_cav - kappa) * a2 - 2.0 * I * sum_wy;
  dy[L.photons()] = 2.0 * sum_wimx - kappa * na;

  // Single-cluster moments.
  for (std::size_t c = 0; c < m; ++c) {
    const double g = g_[c];
    const double det = segment.delta_a - doppler_[c];
    const cplx sc = s[c];
    const cplx pc = p[c];
    const cplx xc = X[c];
    const cplx yc = Y[c];
    const cplx zc = Z[c];
    const cplx ada_p = na * pc + std::conj(zc) * al + zc * alc - 2.0 * al_abs2 * pc;
    const cplx aa_p = a2 * pc + 2.0 * zc * al - 2.0 * al2 * pc;
    const cplx ada_s = na * sc + xc * al + yc * alc - 2.0 * al_abs2 * sc;
    const cplx aa_sd =
        a2 * std::conj(sc) + 2.0 * std::conj(xc) * al - 2.0 * al2 * std::conj(sc);

    ds[c] = (I * det - 0.5 * gamma) * sc + I * g * (2.0 * zc - al) + I * om * (2.0 * pc - 1.0);
    dp[c] = -2.0 * g * xc.imag() - 2.0 * (omc * sc).imag() - gamma * pc;
    dX[c] = (I * (det - det_cav) - 0.5 * (kappa + gamma)) * xc + I * (g * pc + sum_c_[c]) +
            I * g * (2.0 * ada_p - na) + I * om * (2.0 * std::conj(zc) - alc);
    dY[c] = (I * (det + det_cav) - 0.5 * (kappa + gamma)) * yc - I * sum_d_[c] +
            I * g * (2.0 * aa_p - a2) + I * om * (2.0 * zc - al);
    dZ[c] = (I * det_cav - 0.5 * kappa - gamma) * zc - I * (g * sc + sum_e_[c]) +
            I * g * (ada_s + sc - aa_sd) + I * (omc * yc - om * std::conj(xc));
  }

  // Atom-atom pair moments.
  for (std::size_t c = 0; c < m; ++c) {
    const double gc = g_[c];
    const double det_c = segment.delta_a - doppler_[c];
    const cplx sc = s[c];
    const cplx scc = std::conj(sc);
    const cplx pc = p[c];
    const cplx xc = X[c];
    const cplx xcc = std::conj(xc);
    const cplx yc = Y[c];
    const cplx zc = Z[c];
    const std::size_t row = L.pair(c, c);
    for (std::size_t d = c; d < m; ++d) {
      const std::size_t k = row + d - c;
      const double gd = g_[d];
      const double det_d = segment.delta_a - doppler_[d];
      const cplx sd = s[d];
      const cplx sdc = std::conj(sd);
      const cplx pd = p[d];
      const cplx xd = X[d];
      const cplx yd = Y[d];
      const cplx zd = Z[d];
      const cplx cv = C[k];
      const cplx dv = D[k];
      const cplx fv = F[k];
      const cplx e_cd = E[c * m + d];
      const cplx e_dc = E[d * m + c];

      // <a^dag p_c s_d>, <a s^dag_c p_d>
      const cplx t1 = std::conj(zc) * sd + xd * pc + e_cd * alc - 2.0 * alc * pc * sd;
      const cplx t2 = xcc * pd + zd * scc + std::conj(e_dc) * al - 2.0 * al * scc * pd;
      dC[k] = (I * (det_d - det_c) - gamma) * cv - I * gc * (2.0 * t1 - xd) -
              I * omc * (2.0 * e_cd - sd) + I * gd * (2.0 * t2 - xcc) +
              I * om * (2.0 * std::conj(e_dc) - scc);

      // <a p_c s_d>, <a s_c p_d>
      const cplx t3 = zc * sd + yd * pc + e_cd * al - 2.0 * al * pc * sd;
      const cplx t4 = yc * pd + zd * sc + e_dc * al - 2.0 * al * sc * pd;
      dD[k] = (I * (det_c + det_d) - gamma) * dv + I * gc * (2.0 * t3 - yd) +
              I * om * (2.0 * e_cd - sd) + I * gd * (2.0 * t4 - yc) + I * om * (2.0 * e_dc - sc);

      // <a^dag s_c p_d>, <a^dag s_d p_c>
      const cplx t8_cd = xc * pd + std::conj(zd) * sc + e_dc * alc - 2.0 * alc * sc * pd;
      const cplx t8_dc = xd * pc + std::conj(zc) * sd + e_cd * alc - 2.0 * alc * sd * pc;
      dF[k] = -2.0 * gc * t8_cd.imag() - 2.0 * (omc * e_dc).imag() - 2.0 * gd * t8_dc.imag() -
              2.0 * (omc * e_cd).imag() - 2.0 * gamma * fv;

      // E_cd = <p_c s_d>
      {
        const cplx t5 = xc * sd + xd * sc + dv * alc - 2.0 * alc * sc * sd;
        const cplx t6 = xcc * sd + yd * scc + cv * al - 2.0 * al * scc * sd;
        const cplx t7 = zc * pd + zd * pc + fv * al - 2.0 * al * pc * pd;
        dE[c * m + d] = (I * det_d - 1.5 * gamma) * e_cd + I * gc * (t5 - t6) +
                        I * (omc * dv - om * cv) + I * gd * (2.0 * t7 - zc) +
                        I * om * (2.0 * fv - pc);
      }
      if (d != c) {
        // E_dc = <p_d s_c>, with C_dc = conj(C_cd).
        const cplx cv_dc = std::conj(cv);
        const cplx t5 = xd * sc + xc * sd + dv * alc - 2.0 * alc * sd * sc;
        const cplx t6 = std::conj(xd) * sc + yc * sdc + cv_dc * al - 2.0 * al * sdc * sc;
        const cplx t7 = zd * pc + zc * pd + fv * al - 2.0 * al * pd * pc;
        dE[d * m + c] = (I * det_c - 1.5 * gamma) * e_dc + I * gd * (t5 - t6) +
                        I * (omc * dv - om * cv_dc) + I * gc * (2.0 * t7 - zd) +
                        I * om * (2.0 * fv - pd);
      }
    }
  }
}

Observables CumulantModel::observe(std::span<const cplx> y) const {
  const auto& L = layout_;
  Observables o;
  const double na = y[L.photons()].real();
  o.intracavity_photons = na;
  o.photon_rate = params_.kappa * na;
  double excited = 0.0;
  cplx coherence{};
  const double g_ref = params_.g_max > 0.0 ? params_.g_max : 1.0;
  for (std::size_t c = 0; c < L.clusters(); ++c) {
    excited += n_[c] * y[L.p(c)].real();
    coherence += n_[c] * (g_[c] / g_ref) * y[L.s(c)];
  }
  o.mean_inversion = excited / grid_.total_multiplicity();
  o.collective_coherence = std::abs(coherence);
  o.total_excitation = na + excited;
  return o;
}

StateHealth CumulantModel::health(std::span<const cplx> y) const {
  const auto& L = layout_;
  StateHealth h;
  h.min_population = std::numeric_limits<double>::infinity();
  h.max_population = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < L.clusters(); ++c) {
    const cplx pc = y[L.p(c)];
    h.min_population = std::min(h.min_population, pc.real());
    h.max_population = std::max(h.max_population, pc.real());
    h.max_population_imag = std::max(h.max_population_imag, std::abs(pc.imag()));
  }
  h.photons = y[L.photons()].real();
  h.photon_imag = std::abs(y[L.photons()].imag());
  for (const cplx& v : y) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      h.finite = false;
      break;
    }
  }
  return h;
}

std::vector<double> CumulantModel::populations(std::span<const cplx> y) const {
  std::vector<double> out(layout_.clusters());
  for (std::size_t c = 0; c < out.size(); ++c) out[c] = y[layout_.p(c)].real();
  return out;
}

}  // namespace ramsr
