#pragma once

#include <random>

#include "darkpath/action.hpp"
#include "darkpath/operator_algebra.hpp"

namespace darkpath::testing {

inline std::mt19937_64 rng(uint64_t seed) { return std::mt19937_64(seed); }

inline Matrix random_complex(int d, std::mt19937_64& gen, double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, scale);
  Matrix m(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) m(r, c) = complexd(dist(gen), dist(gen));
  return m;
}

inline Matrix random_hermitian(int d, std::mt19937_64& gen, double scale = 1.0) {
  const Matrix m = random_complex(d, gen, scale);
  return 0.5 * (m + m.adjoint());
}

/// Random Hermitian matrix with a guaranteed minimum eigenvalue spacing,
/// built as V diag(E) V^+ from a random unitary.
inline Matrix random_hermitian_spaced(int d, std::mt19937_64& gen,
                                      double min_gap = 0.3) {
  std::uniform_real_distribution<double> u(0.2, 1.0);
  Eigen::VectorXd evals(d);
  double acc = u(gen);
  for (int i = 0; i < d; ++i) {
    evals[i] = acc;
    acc += min_gap + u(gen);
  }
  const Eigen::HouseholderQR<Matrix> qr(random_complex(d, gen));
  const Matrix q = qr.householderQ();
  return q * evals.asDiagonal() * q.adjoint();
}

inline Matrix random_density(int d, std::mt19937_64& gen) {
  const Matrix m = random_complex(d, gen);
  Matrix rho = m * m.adjoint();
  rho /= rho.trace().real();
  return rho;
}

inline Vector random_state(int d, std::mt19937_64& gen) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Vector v(d);
  for (int i = 0; i < d; ++i) v[i] = complexd(dist(gen), dist(gen));
  v.normalize();
  return v;
}

/// Direct evaluation of the kinetic loss rate: the literal double sum
///   K = sum_alpha rate_a sum_{l != ref} | c_l <E1|A|E1>
///         - sum_{m != ref} c_m <E_l|A|E_m> |^2
/// with c_n = -i sum_j Gdot_j <E_n|H_j|E_ref>/(E_n - E_ref)^2. Kept
/// independent of the production quadratic-form assembly on purpose.
inline double kinetic_direct_sum(const ActionModel& model, const SpectrumSnapshot& snap,
                                 const RealVector& gdot) {
  const int d = snap.dim();
  const int ref = model.ref_level;
  Vector c = Vector::Zero(d);
  for (int n = 0; n < d; ++n) {
    if (n == ref) continue;
    const double gap = snap.values[n] - snap.values[ref];
    complexd num = 0;
    for (int j = 0; j < model.fam.n_controls(); ++j)
      num += gdot[j] * snap.state(n).dot(model.fam.generators[j] * snap.state(ref));
    if (std::abs(gap) < 1e-9) {
      if (std::abs(num) > 1e-9)
        throw std::runtime_error("kinetic_direct_sum: coupled degenerate level");
      continue;
    }
    c[n] = complexd(0, -1) * num / (gap * gap);
  }
  double k = 0;
  for (int a : model.dark_channels) {
    const auto& ch = model.fam.channels[a];
    const complexd a11 = snap.state(ref).dot(ch.op * snap.state(ref));
    for (int l = 0; l < d; ++l) {
      if (l == ref) continue;
      complexd term = c[l] * a11;
      for (int m = 0; m < d; ++m) {
        if (m == ref) continue;
        term -= c[m] * snap.state(l).dot(ch.op * snap.state(m));
      }
      k += ch.rate * std::norm(term);
    }
  }
  return k;
}

/// Random ActionModel whose first `n_dark` channels are dark at the sampled
/// control point by construction: in the eigenbasis the reference column of a
/// dark channel is c * e_ref.
struct RandomDarkModel {
  ActionModel model;
  RealVector g;
  SpectrumSnapshot snap;
};

inline RandomDarkModel random_dark_model(int dim, int n_generators, int n_dark,
                                         std::mt19937_64& gen) {
  HamiltonianFamily fam;
  for (int j = 0; j < n_generators; ++j)
    fam.generators.push_back(random_hermitian_spaced(dim, gen));
  std::uniform_real_distribution<double> u(0.2, 1.0);
  RealVector g(n_generators);
  for (int j = 0; j < n_generators; ++j) g[j] = u(gen);

  const SpectrumSnapshot snap = eigendecompose(fam.hamiltonian(g));
  const int ref = 1;
  std::normal_distribution<double> dist(0.0, 1.0);
  for (int a = 0; a < n_dark; ++a) {
    Matrix in_basis = random_complex(dim, gen);
    for (int m = 0; m < dim; ++m)
      if (m != ref) in_basis(m, ref) = 0;  // <E_m|A|E_ref> = 0
    LindbladChannel ch;
    ch.op = snap.vectors * in_basis * snap.vectors.adjoint();
    ch.rate = u(gen);
    fam.channels.push_back(std::move(ch));
  }
  // One deliberately bright channel.
  LindbladChannel bright;
  bright.op = random_complex(dim, gen);
  bright.rate = u(gen);
  fam.channels.push_back(std::move(bright));

  RandomDarkModel out;
  out.model = make_action_model(std::move(fam), {g}, ref, 1e-10);
  out.g = g;
  out.snap = snap;
  return out;
}

}  // namespace darkpath::testing
