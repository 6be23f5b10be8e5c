#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "exhub/model.hpp"

namespace exhub {

/// Pauli string over n qubits, stored as X/Z bit masks (qubit q = bit q).
/// Letter on qubit q: I, X (x bit), Z (z bit), Y (both).
class PauliString {
 public:
  PauliString() = default;
  PauliString(int n_qubits, std::uint64_t x_mask, std::uint64_t z_mask)
      : n_(n_qubits), x_(x_mask), z_(z_mask) {}

  // Parses e.g. "XZXI"; position 0 in the text is qubit 0.
  static PauliString from_string(const std::string& letters);

  int n_qubits() const { return n_; }
  std::uint64_t x_mask() const { return x_; }
  std::uint64_t z_mask() const { return z_; }
  std::uint64_t support() const { return x_ | z_; }

  char letter(int q) const;
  std::string str() const;
  bool is_identity() const { return (x_ | z_) == 0; }
  int weight() const;

  // Qubit-wise commutation: on every qubit the non-I letters agree.
  bool qubitwise_commutes(const PauliString& other) const;

  // i^{#Y}; the string acts as phase() * (-1)^{popcount(b & z)} |b ^ x>.
  std::complex<double> phase() const;

  bool operator==(const PauliString& o) const {
    return n_ == o.n_ && x_ == o.x_ && z_ == o.z_;
  }
  bool operator<(const PauliString& o) const;

 private:
  int n_ = 0;
  std::uint64_t x_ = 0;
  std::uint64_t z_ = 0;
};

/// Real linear combination of Pauli strings (eV coefficients).
struct PauliSum {
  int n_qubits = 0;
  std::map<PauliString, double> terms;

  static constexpr double kPruneThreshold = 1e-10;  // eV

  void add(const PauliString& p, double coeff);
  void prune();
  double identity_coefficient() const;
  std::size_t size() const { return terms.size(); }
};

PauliSum jordan_wigner(const SpinOrbitalHamiltonian& ham);

// Sum of |h_l| over non-identity terms, converted eV -> hartree.
double l1_norm_hartree(const PauliSum& psum);
double l1_norm_ev(const PauliSum& psum);

// Number of stored terms including the identity.
int term_count(const PauliSum& psum);

struct MeasurementGrouping {
  struct Group {
    std::vector<PauliString> members;
    std::vector<double> coefficients;  // eV, aligned with members
    std::string basis;                 // one letter per qubit, I where free
  };
  std::vector<Group> groups;
};

// Greedy first-fit over non-identity terms sorted by descending |coefficient|.
MeasurementGrouping abelian_group(const PauliSum& psum);

struct MeasurementBound {
  double m_bound = 0.0;  // (lambda / epsilon)^2
  std::vector<std::pair<PauliString, double>> allocation;  // shot fractions
};

// epsilon in hartree; allocation proportional to |h_l| with sigma_l = 1.
MeasurementBound measurement_bound(const PauliSum& psum, double epsilon);

// ceil(2 lambda^2 / epsilon^2); order-of-magnitude qDRIFT channel count.
double qdrift_cost(double lambda, double epsilon);

// Text serialization: one "coefficient_eV PAULISTRING" line per term.
std::string pauli_sum_to_text(const PauliSum& psum);
PauliSum pauli_sum_from_text(const std::string& text);

// ---- dense/statevector realization ----------------------------------------

struct Statevector {
  int n_qubits = 0;
  Eigen::VectorXcd amps;  // dimension 2^n, qubit 0 = least significant bit

  static Statevector basis_state(int n_qubits, std::uint64_t occupation);
  double norm() const { return amps.norm(); }
};

/// Mask/coefficient form of a PauliSum for tight evaluation loops.
struct CompiledSum {
  int n_qubits = 0;
  double identity = 0.0;  // eV
  struct Term {
    std::uint64_t x, z;
    double coeff;                 // eV
    std::complex<double> phase;   // i^{#Y}
  };
  std::vector<Term> terms;  // non-identity, deterministic order
};

CompiledSum compile(const PauliSum& psum);

Eigen::VectorXcd apply(const CompiledSum& h, const Eigen::VectorXcd& v);

// <v|H|v>; the _serial variant is the reference implementation, the other
// one evaluates terms in an OpenMP loop and reduces in fixed term order so
// both return bit-identical results.
double expectation_serial(const CompiledSum& h, const Eigen::VectorXcd& v);
double expectation(const CompiledSum& h, const Eigen::VectorXcd& v);
double expectation(const PauliSum& psum, const Statevector& sv);

// Column b of the dense matrix, as (row index, value) pairs; real because a
// Jordan-Wigner image of a real Hamiltonian has even Y count per string.
std::vector<std::pair<std::uint64_t, double>> dense_column(
    const CompiledSum& h, std::uint64_t b);

Eigen::MatrixXd dense_matrix(const PauliSum& psum);

}  // namespace exhub
