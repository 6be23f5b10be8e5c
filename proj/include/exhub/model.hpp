#pragma once

#include <Eigen/Dense>

#include <array>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace exhub {

/// eV per hartree; applied only at FCIDUMP export and L1-norm reporting.
inline constexpr double kEvPerHartree = 27.211386245988;

enum class InteractionVariant { WithExchange, CoulombOnly };

std::string to_string(InteractionVariant v);
InteractionVariant variant_from_string(const std::string& s);

/// Downfolded extended-Hubbard parameters over K Wannier orbitals.
/// t, U, J, D are K x K symmetric; J has a zero diagonal; energies in eV.
struct ModelParameters {
  std::string molecule_name;
  int n_orbitals = 0;  // K
  int n_electrons = 0;
  Eigen::MatrixXd t;
  Eigen::MatrixXd U;
  Eigen::MatrixXd J;
  Eigen::MatrixXd D;  // one-body density matrix (dimensionless)
  double alpha = 1.0;
  InteractionVariant variant = InteractionVariant::WithExchange;

  // Throws std::invalid_argument on any invariant violation.
  void validate() const;
};

ModelParameters load_model_params(const std::string& config_text);
ModelParameters load_model_file(const std::string& path);

/// Sparse chemist-convention two-electron integrals (pq|rs) over spatial
/// orbitals, keyed by the canonical index representative under the 8-fold
/// real-integral symmetry. Indices are 0-based.
class EriTable {
 public:
  using Key = std::array<int, 4>;

  static Key canonical(int p, int q, int r, int s);

  void set(int p, int q, int r, int s, double value);
  double get(int p, int q, int r, int s) const;  // 0 if absent
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  const std::map<Key, double>& entries() const { return entries_; }

  // All distinct (p,q,r,s) tuples of every stored symmetry class, each with
  // its value. Used when contracting the tensor against operators.
  std::vector<std::pair<Key, double>> all_tuples() const;

  void prune(double threshold);

 private:
  std::map<Key, double> entries_;
};

enum class BasisTag { Wannier, Canonical };

/// Second-quantized Hamiltonian over 2K spin orbitals.
/// Spin orbital q = 2*i + s for spatial orbital i (0-based) and s = 0 (alpha),
/// 1 (beta), matching the interleaved occupation-vector convention
/// n_{1a} n_{1b} n_{2a} n_{2b} ...
struct SpinOrbitalHamiltonian {
  int n_spin_orbitals = 0;
  Eigen::MatrixXd h1;    // 2K x 2K, eV, spin-diagonal blocks
  EriTable eri;          // spatial chemist (pq|rs), eV
  double constant = 0.0;  // eV
  BasisTag basis_tag = BasisTag::Wannier;
  int n_electrons = 0;

  int n_spatial() const { return n_spin_orbitals / 2; }

  // Spatial one-body matrix (the alpha block of h1).
  Eigen::MatrixXd h1_spatial() const;
};

// Effective one-body matrix t - t_DC with the double-counting correction on
// the diagonal: t_DC[i][i] = alpha*U[i][i]*D[i][i] + sum_{k!=i} U[i][k]*D[k][k].
Eigen::MatrixXd build_one_body(const ModelParameters& params);

// (ii|jj) = U[i][j]; with exchange also (ij|ij) = J[i][j] for i != j, whose
// symmetry images supply both the exchange and pair-hopping terms.
EriTable build_two_body(const ModelParameters& params);

SpinOrbitalHamiltonian assemble_hamiltonian(const ModelParameters& params);

// Congruence transform by an orthogonal K x K matrix C; spectrum preserving.
// Throws std::invalid_argument if C is not orthogonal to 1e-10.
SpinOrbitalHamiltonian rotate_basis(const SpinOrbitalHamiltonian& ham,
                                    const Eigen::MatrixXd& C);

// Standard FCIDUMP text, hartree units, zero threshold 1e-12 hartree.
void export_fcidump(const SpinOrbitalHamiltonian& ham, std::ostream& out);
void export_fcidump_file(const SpinOrbitalHamiltonian& ham,
                         const std::string& path);

struct FcidumpData {
  int norb = 0;
  int nelec = 0;
  int ms2 = 0;
  Eigen::MatrixXd h1;  // hartree, spatial
  EriTable eri;        // hartree
  double core = 0.0;
};

FcidumpData read_fcidump(std::istream& in);

}  // namespace exhub
