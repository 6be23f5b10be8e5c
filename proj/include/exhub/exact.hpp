#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "exhub/model.hpp"

namespace exhub {

// Occupation strings print qubit 0 first, i.e. n_{1a} n_{1b} n_{2a} n_{2b}...
std::string occupation_string(std::uint32_t det, int n_spin_orbitals);
std::uint32_t occupation_from_string(const std::string& s);

/// Determinants of a fixed (n_alpha, n_beta) particle sector, ordered so the
/// printed occupation strings are lexicographically ascending.
struct SectorBasis {
  int K = 0;
  int n_alpha = 0;
  int n_beta = 0;
  std::vector<std::uint32_t> determinants;
  std::unordered_map<std::uint32_t, int> index;

  int size() const { return static_cast<int>(determinants.size()); }
};

SectorBasis sector_basis(int K, int n_alpha, int n_beta);

/// Cached second-quantized contraction lists for applying a Hamiltonian to
/// occupation-number determinants with Jordan-Wigner sign conventions.
struct FermionOp {
  int n_modes = 0;
  double constant = 0.0;
  struct OneBody {
    int create, destroy;
    double coeff;
  };
  struct TwoBody {
    int create1, create2, destroy1, destroy2;  // c+_{c1} c+_{c2} c_{d1} c_{d2}
    double coeff;                              // includes the 1/2 prefactor
  };
  std::vector<OneBody> one_body;
  std::vector<TwoBody> two_body;
};

FermionOp make_fermion_op(const SpinOrbitalHamiltonian& ham);

// H |det>, accumulated into out as det -> amplitude (scaled by scale).
void apply_fermion_op(const FermionOp& op, std::uint32_t det,
                      std::map<std::uint32_t, double>& out,
                      double scale = 1.0);

Eigen::MatrixXd build_sector_matrix_serial(const SpinOrbitalHamiltonian& ham,
                                           const SectorBasis& basis);
// OpenMP over columns; bit-identical to the serial reference.
Eigen::MatrixXd build_sector_matrix(const SpinOrbitalHamiltonian& ham,
                                    const SectorBasis& basis);

struct EigenPairs {
  std::vector<double> energies;  // ascending, eV
  Eigen::MatrixXd vectors;       // orthonormal columns
};

// k lowest eigenpairs of a symmetric matrix. Throws if k is out of range.
EigenPairs diagonalize(const Eigen::MatrixXd& matrix, int k);

// <state|S^2|state> for a real vector over a sector basis.
double s_squared_sector(const SectorBasis& basis, const Eigen::VectorXd& state);
// Same for a full-space complex statevector (2^n amplitudes).
double s_squared_full(const Eigen::VectorXcd& amps, int n_modes);

struct ScfResult {
  Eigen::MatrixXd C;       // orthogonal, columns by ascending orbital energy
  Eigen::VectorXd orbital_energies;
  double scf_energy = 0.0;  // eV
  bool converged = false;
  int iterations = 0;
};

// Restricted closed-shell HF in the model space (identity overlap).
ScfResult scf_rhf(const SpinOrbitalHamiltonian& ham, int n_electrons,
                  int max_iterations = 200, double mixing = 0.5);

struct EigenReport {
  SectorBasis basis;
  std::vector<double> energies;  // eV, ascending
  Eigen::MatrixXd states;
  std::vector<double> s2;            // filled by characterize
  std::vector<std::string> labels;   // 1^1A_g / 1^1B_u / 2^1A_g / other
};

struct CharacterEntry {
  double coeff;
  std::uint32_t det;
};

/// Per-state CI expansions sorted by descending |coefficient|, with the
/// global phase fixed so the leading coefficient is positive.
struct CharacterTable {
  std::vector<std::vector<CharacterEntry>> states;
};

// Assigns labels into the report (singlets only; S^2 < 0.1) and returns the
// CI character of every state. Requires the SCF-rotated basis.
CharacterTable characterize(EigenReport& report,
                            const SpinOrbitalHamiltonian& rotated);

// label -> E(label) - E(1^1A_g) in eV. Throws if a required label is absent.
std::map<std::string, double> excitation_energies(const EigenReport& report);

/// Full pipeline: SCF rotation, Sz=0 sector diagonalization, state
/// characterization. The report is in the SCF-rotated (canonical) basis.
struct SpectrumResult {
  ScfResult scf;
  SpinOrbitalHamiltonian rotated;
  EigenReport report;
  CharacterTable character;
  std::map<std::string, double> excitations_ev;
};

SpectrumResult solve_spectrum(const ModelParameters& params);

}  // namespace exhub
