#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "exhub/pauli.hpp"

namespace exhub {

/// Particle-conserving two-qubit gate: identity on |00> and |11>, and
/// [[cos t, e^{i p} sin t], [e^{-i p} sin t, -cos t]] on span{|01>, |10>}.
/// Basis index convention: n_{q0} + 2 n_{q1}.
Eigen::Matrix4cd a_gate(double theta, double phi);

struct AnsatzCircuit {
  int n_qubits = 0;
  std::uint32_t initial_state = 0;  // HF occupation string
  struct Gate {
    int q0, q1;  // adjacent, q1 = q0 + 1
  };
  std::vector<Gate> gates;  // brick-wall order, 2 parameters each
  int parameter_count() const { return 2 * static_cast<int>(gates.size()); }
};

// Alternating even-pair / odd-pair A-gate layers on 2K qubits, starting from
// the HF occupation of n_electrons.
AnsatzCircuit build_ansatz(int K, int n_electrons, int layers);

// params = (theta_0, phi_0, theta_1, phi_1, ...) in gate order.
Statevector apply_circuit(const AnsatzCircuit& circuit,
                          const std::vector<double>& params);

// F = <psi|H|psi> + sum_i beta_i |<prior_i|psi>|^2.
double vqd_cost(const AnsatzCircuit& circuit, const std::vector<double>& params,
                const CompiledSum& h,
                const std::vector<Eigen::VectorXcd>& priors,
                const std::vector<double>& betas);

struct VqdOptions {
  int layers = 0;             // 0 -> 2K
  std::vector<double> betas;  // empty -> beta_i = L1 norm of H in eV
  std::uint64_t seed = 42;
  int restarts = 5;
  double tol = 1e-6;          // eV per optimization sweep
  int max_sweeps = 200;
  double overlap_tol = 1e-4;
  int max_internal_states = 24;
};

struct VqdState {
  std::vector<double> params;
  double energy_ev = 0.0;
  std::vector<double> cost_history;  // best cost after each sweep
  std::vector<double> overlaps;      // |<psi_k|psi_i>|^2, i < k
  double s2 = 0.0;
  std::string label;  // "S0", "S1", ... for singlets, empty otherwise
  bool converged = false;
  Statevector state;
};

struct VqdResult {
  std::vector<VqdState> states;     // deflation order
  std::vector<int> singlet_indices; // S0..S_{n-1}
  int layers = 0;
  bool all_converged = false;
};

/// Sequential VQD over the particle sector reachable from the HF string.
/// Deflation continues until n_states singlet (S^2 < 0.5) states are found
/// or the internal cap is hit; S0/S1/... labels go to singlets in energy
/// order, so triplet intruders are deflated through but not reported.
VqdResult optimize_vqd(const PauliSum& psum, int n_electrons, int n_states,
                       const VqdOptions& options);

enum class GroupingMode { Abelian, None };
enum class ShotBudget { PerGroup, TotalSplit };

std::string to_string(GroupingMode m);
GroupingMode grouping_from_string(const std::string& s);

/// One shot-based energy estimate: per measurement group, rotate to the group
/// basis, draw `shots` bitstrings (PerGroup budget) or an equal share of a
/// total budget (TotalSplit), and combine parity estimates with coefficients.
/// The identity coefficient enters exactly. Deterministic given the seed.
double sample_energy(const PauliSum& psum, const Statevector& sv, long shots,
                     GroupingMode grouping, std::uint64_t seed,
                     ShotBudget budget = ShotBudget::PerGroup);

struct SamplingReport {
  double mean_ev = 0.0;
  double mean_delta_ev = 0.0;  // mean - reference ground energy
  double std_ev = 0.0;
  long shots = 0;
  int repeats = 0;
  GroupingMode grouping = GroupingMode::Abelian;
  ShotBudget budget = ShotBudget::PerGroup;
  std::uint64_t seed = 0;
  int n_groups = 0;
};

// Repeat i draws from an independent stream seeded with seed + i; estimates
// are aggregated in repeat order. The OpenMP variant is bit-identical to the
// serial reference.
SamplingReport repeat_sampling_serial(const PauliSum& psum,
                                      const Statevector& sv, long shots,
                                      int repeats, GroupingMode grouping,
                                      std::uint64_t seed,
                                      double reference_ev = 0.0,
                                      ShotBudget budget = ShotBudget::PerGroup);
SamplingReport repeat_sampling(const PauliSum& psum, const Statevector& sv,
                               long shots, int repeats, GroupingMode grouping,
                               std::uint64_t seed, double reference_ev = 0.0,
                               ShotBudget budget = ShotBudget::PerGroup);

}  // namespace exhub
