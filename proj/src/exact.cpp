#include "exhub/exact.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

namespace exhub {

namespace {

int popcount(std::uint32_t v) { return std::popcount(v); }

// Parity of occupied modes strictly below mode q (Jordan-Wigner string).
inline double jw_sign(std::uint32_t det, int q) {
  std::uint32_t below = det & ((1u << q) - 1);
  return (popcount(below) & 1) ? -1.0 : 1.0;
}

// Applies a_q; returns false when the mode is empty.
inline bool destroy_mode(std::uint32_t& det, int q, double& sign) {
  if (!((det >> q) & 1)) return false;
  sign *= jw_sign(det, q);
  det ^= 1u << q;
  return true;
}

inline bool create_mode(std::uint32_t& det, int q, double& sign) {
  if ((det >> q) & 1) return false;
  sign *= jw_sign(det, q);
  det ^= 1u << q;
  return true;
}

bool occupation_lex_less(std::uint32_t a, std::uint32_t b, int n) {
  for (int q = 0; q < n; ++q) {
    int ba = (a >> q) & 1, bb = (b >> q) & 1;
    if (ba != bb) return ba < bb;
  }
  return false;
}

}  // namespace

std::string occupation_string(std::uint32_t det, int n_spin_orbitals) {
  std::string s(n_spin_orbitals, '0');
  for (int q = 0; q < n_spin_orbitals; ++q)
    if ((det >> q) & 1) s[q] = '1';
  return s;
}

std::uint32_t occupation_from_string(const std::string& s) {
  std::uint32_t det = 0;
  for (std::size_t q = 0; q < s.size(); ++q) {
    if (s[q] == '1')
      det |= 1u << q;
    else if (s[q] != '0')
      throw std::invalid_argument("bad occupation string: " + s);
  }
  return det;
}

SectorBasis sector_basis(int K, int n_alpha, int n_beta) {
  if (n_alpha < 0 || n_alpha > K || n_beta < 0 || n_beta > K)
    throw std::invalid_argument("sector occupation counts out of range");
  SectorBasis basis;
  basis.K = K;
  basis.n_alpha = n_alpha;
  basis.n_beta = n_beta;

  const std::uint32_t alpha_mask = [&] {
    std::uint32_t m = 0;
    for (int i = 0; i < K; ++i) m |= 1u << (2 * i);
    return m;
  }();

  for (std::uint32_t det = 0; det < (1u << (2 * K)); ++det) {
    if (popcount(det & alpha_mask) != n_alpha) continue;
    if (popcount(det & ~alpha_mask) != n_beta) continue;
    basis.determinants.push_back(det);
  }
  std::sort(basis.determinants.begin(), basis.determinants.end(),
            [K](std::uint32_t a, std::uint32_t b) {
              return occupation_lex_less(a, b, 2 * K);
            });
  for (int i = 0; i < basis.size(); ++i)
    basis.index.emplace(basis.determinants[i], i);
  return basis;
}

FermionOp make_fermion_op(const SpinOrbitalHamiltonian& ham) {
  FermionOp op;
  op.n_modes = ham.n_spin_orbitals;
  op.constant = ham.constant;
  for (int p = 0; p < op.n_modes; ++p)
    for (int q = 0; q < op.n_modes; ++q)
      if (ham.h1(p, q) != 0.0) op.one_body.push_back({p, q, ham.h1(p, q)});

  for (const auto& [key, value] : ham.eri.all_tuples()) {
    auto [p, q, r, s] = key;
    for (int sigma = 0; sigma < 2; ++sigma)
      for (int rho = 0; rho < 2; ++rho) {
        int P = 2 * p + sigma, Q = 2 * q + sigma;
        int R = 2 * r + rho, S = 2 * s + rho;
        if (P == R || Q == S) continue;
        op.two_body.push_back({P, R, S, Q, 0.5 * value});
      }
  }
  return op;
}

void apply_fermion_op(const FermionOp& op, std::uint32_t det,
                      std::map<std::uint32_t, double>& out, double scale) {
  if (op.constant != 0.0) out[det] += scale * op.constant;

  for (const auto& t : op.one_body) {
    std::uint32_t d = det;
    double sign = 1.0;
    if (!destroy_mode(d, t.destroy, sign)) continue;
    if (!create_mode(d, t.create, sign)) continue;
    out[d] += scale * sign * t.coeff;
  }
  for (const auto& t : op.two_body) {
    std::uint32_t d = det;
    double sign = 1.0;
    if (!destroy_mode(d, t.destroy2, sign)) continue;
    if (!destroy_mode(d, t.destroy1, sign)) continue;
    if (!create_mode(d, t.create2, sign)) continue;
    if (!create_mode(d, t.create1, sign)) continue;
    out[d] += scale * sign * t.coeff;
  }
}

namespace {

void fill_sector_column(const FermionOp& op, const SectorBasis& basis, int j,
                        Eigen::MatrixXd& m) {
  std::map<std::uint32_t, double> action;
  apply_fermion_op(op, basis.determinants[j], action);
  for (const auto& [det, amp] : action) {
    auto it = basis.index.find(det);
    if (it == basis.index.end())
      throw std::logic_error("Hamiltonian left the particle sector");
    m(it->second, j) = amp;
  }
}

}  // namespace

Eigen::MatrixXd build_sector_matrix_serial(const SpinOrbitalHamiltonian& ham,
                                           const SectorBasis& basis) {
  FermionOp op = make_fermion_op(ham);
  const int dim = basis.size();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
  for (int j = 0; j < dim; ++j) fill_sector_column(op, basis, j, m);
  return m;
}

Eigen::MatrixXd build_sector_matrix(const SpinOrbitalHamiltonian& ham,
                                    const SectorBasis& basis) {
  FermionOp op = make_fermion_op(ham);
  const int dim = basis.size();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
#pragma omp parallel for schedule(dynamic, 8)
  for (int j = 0; j < dim; ++j) fill_sector_column(op, basis, j, m);
  return m;
}

EigenPairs diagonalize(const Eigen::MatrixXd& matrix, int k) {
  if (matrix.rows() != matrix.cols())
    throw std::invalid_argument("matrix must be square");
  if (k < 1 || k > matrix.rows())
    throw std::invalid_argument("eigenpair count out of range");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(matrix);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("symmetric eigensolver failed");
  EigenPairs out;
  out.energies.assign(solver.eigenvalues().data(),
                      solver.eigenvalues().data() + k);
  out.vectors = solver.eigenvectors().leftCols(k);
  return out;
}

namespace {

// ||S+ psi||^2 + <Sz(Sz+1)> over an amplitude map keyed by determinant.
template <typename Scalar>
double s_squared_of_amplitudes(
    const std::vector<std::pair<std::uint32_t, Scalar>>& amps, int n_modes) {
  const int K = n_modes / 2;
  std::map<std::uint32_t, Scalar> raised;
  double szsz = 0.0;
  for (const auto& [det, a] : amps) {
    int n_a = 0, n_b = 0;
    for (int i = 0; i < K; ++i) {
      n_a += (det >> (2 * i)) & 1;
      n_b += (det >> (2 * i + 1)) & 1;
    }
    double sz = 0.5 * (n_a - n_b);
    szsz += std::norm(a) * sz * (sz + 1.0);
    for (int i = 0; i < K; ++i) {  // S+ = sum_i a+_{i alpha} a_{i beta}
      std::uint32_t d = det;
      double sign = 1.0;
      if (!destroy_mode(d, 2 * i + 1, sign)) continue;
      if (!create_mode(d, 2 * i, sign)) continue;
      raised[d] += sign * a;
    }
  }
  double raised_norm = 0.0;
  for (const auto& [det, a] : raised) raised_norm += std::norm(a);
  return raised_norm + szsz;
}

}  // namespace

double s_squared_sector(const SectorBasis& basis,
                        const Eigen::VectorXd& state) {
  std::vector<std::pair<std::uint32_t, double>> amps;
  for (int i = 0; i < basis.size(); ++i)
    if (state(i) != 0.0) amps.emplace_back(basis.determinants[i], state(i));
  return s_squared_of_amplitudes(amps, 2 * basis.K);
}

double s_squared_full(const Eigen::VectorXcd& amps, int n_modes) {
  std::vector<std::pair<std::uint32_t, std::complex<double>>> pairs;
  for (Eigen::Index b = 0; b < amps.size(); ++b)
    if (amps(b) != std::complex<double>(0.0, 0.0))
      pairs.emplace_back(static_cast<std::uint32_t>(b), amps(b));
  return s_squared_of_amplitudes(pairs, n_modes);
}

ScfResult scf_rhf(const SpinOrbitalHamiltonian& ham, int n_electrons,
                  int max_iterations, double mixing) {
  if (n_electrons % 2 != 0)
    throw std::invalid_argument("scf_rhf requires an even electron count");
  const int K = ham.n_spatial();
  const int n_occ = n_electrons / 2;
  if (n_occ > K) throw std::invalid_argument("too many electrons");

  const Eigen::MatrixXd h = ham.h1_spatial();

  auto fock = [&](const Eigen::MatrixXd& D) {
    Eigen::MatrixXd F = h;
    for (int p = 0; p < K; ++p)
      for (int q = 0; q < K; ++q) {
        double v = 0.0;
        for (int r = 0; r < K; ++r)
          for (int s = 0; s < K; ++s) {
            double d = D(r, s);
            if (d == 0.0) continue;
            v += d * (ham.eri.get(p, q, r, s) - 0.5 * ham.eri.get(p, r, q, s));
          }
        F(p, q) += v;
      }
    return F;
  };

  auto density = [&](const Eigen::MatrixXd& C) {
    return 2.0 * C.leftCols(n_occ) * C.leftCols(n_occ).transpose();
  };

  ScfResult result;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> init(h);
  Eigen::MatrixXd C = init.eigenvectors();
  Eigen::MatrixXd D = n_occ > 0 ? density(C)
                                : Eigen::MatrixXd::Zero(K, K).eval();
  double last_delta = std::numeric_limits<double>::max();
  bool damping = false;

  Eigen::MatrixXd F;
  for (int iter = 1; iter <= max_iterations; ++iter) {
    F = fock(D);
    // Stationarity of the density that built this Fock matrix.
    double commutator = (F * D - D * F).norm();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(F);
    C = solver.eigenvectors();
    result.orbital_energies = solver.eigenvalues();
    Eigen::MatrixXd D_new = n_occ > 0 ? density(C)
                                      : Eigen::MatrixXd::Zero(K, K).eval();
    double delta = (D_new - D).cwiseAbs().maxCoeff();
    if (delta > last_delta) damping = true;
    if (damping) D_new = mixing * D_new + (1.0 - mixing) * D;
    last_delta = delta;
    D = D_new;
    result.iterations = iter;
    if (delta < 1e-10 || commutator < 1e-9) {
      result.converged = true;
      break;
    }
  }

  // Phase convention: largest-magnitude entry of each column positive.
  for (int j = 0; j < K; ++j) {
    int imax = 0;
    C.col(j).cwiseAbs().maxCoeff(&imax);
    if (C(imax, j) < 0) C.col(j) = -C.col(j);
  }
  result.C = C;

  F = fock(D);
  result.scf_energy = 0.5 * (D.cwiseProduct(h + F)).sum() + ham.constant;
  return result;
}

namespace {

struct LabelPatterns {
  std::uint32_t hf = 0;
  std::uint32_t single_alpha = 0;
  std::uint32_t single_beta = 0;
  std::uint32_t double_exc = 0;
};

LabelPatterns label_patterns(int n_electrons) {
  LabelPatterns p;
  p.hf = (n_electrons >= 32) ? ~0u : ((1u << n_electrons) - 1);
  int homo = n_electrons / 2 - 1;  // 0-based spatial
  int lumo = homo + 1;
  p.single_alpha = p.hf ^ (1u << (2 * homo)) ^ (1u << (2 * lumo));
  p.single_beta = p.hf ^ (1u << (2 * homo + 1)) ^ (1u << (2 * lumo + 1));
  p.double_exc = p.hf ^ (3u << (2 * homo)) ^ (3u << (2 * lumo));
  return p;
}

}  // namespace

CharacterTable characterize(EigenReport& report,
                            const SpinOrbitalHamiltonian& rotated) {
  if (rotated.basis_tag != BasisTag::Canonical)
    throw std::invalid_argument(
        "characterize requires the SCF-rotated Hamiltonian");
  const int n_states = static_cast<int>(report.energies.size());
  const LabelPatterns pat = label_patterns(rotated.n_electrons);

  CharacterTable table;
  table.states.resize(n_states);
  report.s2.assign(n_states, 0.0);
  report.labels.assign(n_states, "other");

  for (int k = 0; k < n_states; ++k) {
    Eigen::VectorXd v = report.states.col(k);
    report.s2[k] = s_squared_sector(report.basis, v);

    std::vector<CharacterEntry>& entries = table.states[k];
    for (int i = 0; i < report.basis.size(); ++i)
      entries.push_back({v(i), report.basis.determinants[i]});
    std::stable_sort(entries.begin(), entries.end(),
                     [](const CharacterEntry& a, const CharacterEntry& b) {
                       return std::abs(a.coeff) > std::abs(b.coeff);
                     });
    if (!entries.empty() && entries.front().coeff < 0.0)
      for (auto& e : entries) e.coeff = -e.coeff;
  }

  // Labels are assigned among singlets only, scanning upward in energy.
  bool have_ground = false, have_single = false, have_double = false;
  for (int k = 0; k < n_states; ++k) {
    if (report.s2[k] >= 0.1) continue;
    const auto& entries = table.states[k];
    if (entries.empty()) continue;
    const CharacterEntry& top = entries.front();
    if (std::abs(top.coeff) <= 0.3) continue;  // ambiguous -> other
    if (!have_ground) {
      if (top.det == pat.hf) {
        report.labels[k] = "1^1A_g";
        have_ground = true;
      }
      continue;  // nothing above the ground state is labeled before it
    }
    if (!have_single &&
        (top.det == pat.single_alpha || top.det == pat.single_beta)) {
      report.labels[k] = "1^1B_u";
      have_single = true;
    } else if (!have_double && top.det == pat.double_exc) {
      report.labels[k] = "2^1A_g";
      have_double = true;
    }
  }
  return table;
}

std::map<std::string, double> excitation_energies(const EigenReport& report) {
  int ground = -1;
  for (int k = 0; k < static_cast<int>(report.labels.size()); ++k)
    if (report.labels[k] == "1^1A_g") {
      ground = k;
      break;
    }
  if (ground < 0) throw std::runtime_error("no 1^1A_g state labeled");
  std::map<std::string, double> out;
  for (int k = 0; k < static_cast<int>(report.labels.size()); ++k) {
    const std::string& label = report.labels[k];
    if (label == "1^1B_u" || label == "2^1A_g")
      out[label] = report.energies[k] - report.energies[ground];
  }
  if (!out.count("1^1B_u") || !out.count("2^1A_g"))
    throw std::runtime_error("missing excited-state label");
  return out;
}

SpectrumResult solve_spectrum(const ModelParameters& params) {
  SpectrumResult result;
  SpinOrbitalHamiltonian ham = assemble_hamiltonian(params);
  result.scf = scf_rhf(ham, params.n_electrons);
  if (!result.scf.converged)
    throw std::runtime_error("SCF did not converge for " +
                             params.molecule_name);
  result.rotated = rotate_basis(ham, result.scf.C);

  const int n_half = params.n_electrons / 2;
  result.report.basis = sector_basis(params.n_orbitals, n_half, n_half);
  Eigen::MatrixXd m = build_sector_matrix(result.rotated, result.report.basis);
  EigenPairs pairs = diagonalize(m, result.report.basis.size());
  result.report.energies = pairs.energies;
  result.report.states = pairs.vectors;
  result.character = characterize(result.report, result.rotated);
  result.excitations_ev = excitation_energies(result.report);
  return result;
}

}  // namespace exhub
