#include "exhub/vqd.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "exhub/exact.hpp"

namespace exhub {

namespace {
constexpr double kPi = 3.14159265358979323846;

inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}
}  // namespace

Eigen::Matrix4cd a_gate(double theta, double phi) {
  using namespace std::complex_literals;
  Eigen::Matrix4cd u = Eigen::Matrix4cd::Zero();
  // Index n_{q0} + 2 n_{q1}: 0=|00>, 1=|10>, 2=|01>, 3=|11>.
  u(0, 0) = 1.0;
  u(3, 3) = 1.0;
  u(2, 2) = std::cos(theta);
  u(2, 1) = std::exp(1i * phi) * std::sin(theta);
  u(1, 2) = std::exp(-1i * phi) * std::sin(theta);
  u(1, 1) = -std::cos(theta);
  return u;
}

AnsatzCircuit build_ansatz(int K, int n_electrons, int layers) {
  if (layers < 1) throw std::invalid_argument("layers must be >= 1");
  if (n_electrons < 0 || n_electrons > 2 * K)
    throw std::invalid_argument("electron count out of range");
  AnsatzCircuit circuit;
  circuit.n_qubits = 2 * K;
  circuit.initial_state =
      n_electrons == 0 ? 0u : ((1u << n_electrons) - 1u);
  for (int layer = 0; layer < layers; ++layer) {
    int first = (layer % 2 == 0) ? 0 : 1;
    for (int q = first; q + 1 < circuit.n_qubits; q += 2)
      circuit.gates.push_back({q, q + 1});
  }
  return circuit;
}

namespace {

void apply_a_gate(Eigen::VectorXcd& amps, int q0, int q1, double theta,
                  double phi) {
  const std::uint64_t dim = static_cast<std::uint64_t>(amps.size());
  const std::uint64_t b0 = 1ULL << q0, b1 = 1ULL << q1;
  const double c = std::cos(theta), s = std::sin(theta);
  const std::complex<double> eip(std::cos(phi), std::sin(phi));
  const std::complex<double> eim = std::conj(eip);
  for (std::uint64_t b = 0; b < dim; ++b) {
    if (b & (b0 | b1)) continue;  // enumerate pair subspaces once
    const std::uint64_t i10 = b | b0, i01 = b | b1;
    const std::complex<double> a01 = amps(static_cast<Eigen::Index>(i01));
    const std::complex<double> a10 = amps(static_cast<Eigen::Index>(i10));
    amps(static_cast<Eigen::Index>(i01)) = c * a01 + eip * s * a10;
    amps(static_cast<Eigen::Index>(i10)) = eim * s * a01 - c * a10;
  }
}

}  // namespace

Statevector apply_circuit(const AnsatzCircuit& circuit,
                          const std::vector<double>& params) {
  if (static_cast<int>(params.size()) != circuit.parameter_count())
    throw std::invalid_argument("parameter count mismatch");
  Statevector sv = Statevector::basis_state(circuit.n_qubits,
                                            circuit.initial_state);
  for (std::size_t g = 0; g < circuit.gates.size(); ++g)
    apply_a_gate(sv.amps, circuit.gates[g].q0, circuit.gates[g].q1,
                 params[2 * g], params[2 * g + 1]);
  return sv;
}

double vqd_cost(const AnsatzCircuit& circuit, const std::vector<double>& params,
                const CompiledSum& h,
                const std::vector<Eigen::VectorXcd>& priors,
                const std::vector<double>& betas) {
  if (priors.size() != betas.size())
    throw std::invalid_argument("one beta per prior state is required");
  Statevector sv = apply_circuit(circuit, params);
  double cost = expectation_serial(h, sv.amps);
  for (std::size_t i = 0; i < priors.size(); ++i)
    cost += betas[i] * std::norm(priors[i].dot(sv.amps));
  return cost;
}

namespace {

// The optimizer spends nearly all its time evaluating the cost, so the
// circuit and Hamiltonian are compiled onto the fixed-particle-number
// subspace the ansatz actually explores (A-gates conserve total occupation,
// so amplitudes outside it stay exactly zero).
struct SectorEngine {
  std::vector<std::uint32_t> dets;  // ascending encodings, n_electrons set bits
  int dim = 0;
  int initial_index = -1;
  double identity = 0.0;

  struct Term {
    std::complex<double> scale;  // coeff * i^{#Y}
    std::vector<int> from, to;   // sector indices, b -> b ^ x
    std::vector<double> sign;    // (-1)^{|b & z|}
  };
  std::vector<Term> terms;

  struct Gate {
    std::vector<std::pair<int, int>> pairs;  // (index of |01>, index of |10>)
  };
  std::vector<Gate> gates;

  SectorEngine(const AnsatzCircuit& circuit, const CompiledSum& h) {
    const int n = circuit.n_qubits;
    const int n_electrons = std::popcount(circuit.initial_state);
    for (std::uint32_t b = 0; b < (1u << n); ++b)
      if (std::popcount(b) == n_electrons) dets.push_back(b);
    dim = static_cast<int>(dets.size());
    std::unordered_map<std::uint32_t, int> index;
    index.reserve(dets.size() * 2);
    for (int i = 0; i < dim; ++i) index.emplace(dets[i], i);
    initial_index = index.at(circuit.initial_state);

    identity = h.identity;
    for (const auto& t : h.terms) {
      Term ct;
      ct.scale = t.coeff * t.phase;
      for (int i = 0; i < dim; ++i) {
        auto it = index.find(dets[i] ^ static_cast<std::uint32_t>(t.x));
        if (it == index.end()) continue;  // image outside: amplitude is 0
        ct.from.push_back(i);
        ct.to.push_back(it->second);
        ct.sign.push_back((std::popcount(dets[i] & static_cast<std::uint32_t>(
                                                       t.z)) &
                           1)
                              ? -1.0
                              : 1.0);
      }
      if (!ct.from.empty()) terms.push_back(std::move(ct));
    }
    for (const auto& g : circuit.gates) {
      Gate cg;
      const std::uint32_t b0 = 1u << g.q0, b1 = 1u << g.q1;
      for (int i = 0; i < dim; ++i) {
        std::uint32_t d = dets[i];
        if ((d & (b0 | b1)) != b1) continue;  // want exactly |01>
        cg.pairs.emplace_back(i, index.at((d ^ b1) | b0));
      }
      gates.push_back(std::move(cg));
    }
  }

  void run_circuit(const std::vector<double>& params,
                   Eigen::VectorXcd& v) const {
    v.setZero(dim);
    v(initial_index) = 1.0;
    for (std::size_t g = 0; g < gates.size(); ++g) {
      const double c = std::cos(params[2 * g]), s = std::sin(params[2 * g]);
      const std::complex<double> eip(std::cos(params[2 * g + 1]),
                                     std::sin(params[2 * g + 1]));
      const std::complex<double> eim = std::conj(eip);
      for (const auto& [i01, i10] : gates[g].pairs) {
        const std::complex<double> a01 = v(i01), a10 = v(i10);
        v(i01) = c * a01 + eip * s * a10;
        v(i10) = eim * s * a01 - c * a10;
      }
    }
  }

  double energy(const Eigen::VectorXcd& v) const {
    double total = identity;
    for (const auto& t : terms) {
      std::complex<double> acc(0.0, 0.0);
      for (std::size_t p = 0; p < t.from.size(); ++p)
        acc += std::conj(v(t.to[p])) * t.sign[p] * v(t.from[p]);
      total += (t.scale * acc).real();
    }
    return total;
  }

  double cost(const std::vector<double>& params,
              const std::vector<Eigen::VectorXcd>& priors,
              const std::vector<double>& betas, Eigen::VectorXcd& scratch)
      const {
    run_circuit(params, scratch);
    double f = energy(scratch);
    for (std::size_t i = 0; i < priors.size(); ++i)
      f += betas[i] * std::norm(priors[i].dot(scratch));
    return f;
  }

  Statevector expand(const Eigen::VectorXcd& v, int n_qubits) const {
    Statevector sv;
    sv.n_qubits = n_qubits;
    sv.amps = Eigen::VectorXcd::Zero(1LL << n_qubits);
    for (int i = 0; i < dim; ++i) sv.amps(dets[i]) = v(i);
    return sv;
  }
};

struct CoordinateDescentResult {
  std::vector<double> params;
  double cost = 0.0;
  std::vector<double> history;
  bool converged = false;
};

struct HopSchedule {
  int hops = 12;
  double sigma = 0.45;
  int patience = 5;  // stop after this many non-improving hops
};

// The cost as a function of a single parameter is a degree-2 trigonometric
// polynomial, recovered exactly from 5 uniform samples and minimized on a
// fine grid with a Newton polish.
CoordinateDescentResult coordinate_descent(
    const AnsatzCircuit& circuit, const CompiledSum& h,
    const std::vector<Eigen::VectorXcd>& priors,
    const std::vector<double>& betas, std::vector<double> params, double tol,
    int max_sweeps) {
  auto cost_at = [&](const std::vector<double>& p) {
    return vqd_cost(circuit, p, h, priors, betas);
  };

  CoordinateDescentResult result;
  const int n_params = static_cast<int>(params.size());
  double current = cost_at(params);
  int calm_sweeps = 0;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double sweep_start = current;
    for (int m = 0; m < n_params; ++m) {
      double saved = params[m];
      double f[5];
      for (int j = 0; j < 5; ++j) {
        params[m] = 2.0 * kPi * j / 5.0;
        f[j] = cost_at(params);
      }
      double a0 = 0, a1 = 0, b1 = 0, a2 = 0, b2 = 0;
      for (int j = 0; j < 5; ++j) {
        double x = 2.0 * kPi * j / 5.0;
        a0 += f[j] / 5.0;
        a1 += 0.4 * f[j] * std::cos(x);
        b1 += 0.4 * f[j] * std::sin(x);
        a2 += 0.4 * f[j] * std::cos(2 * x);
        b2 += 0.4 * f[j] * std::sin(2 * x);
      }
      auto model = [&](double x) {
        return a0 + a1 * std::cos(x) + b1 * std::sin(x) +
               a2 * std::cos(2 * x) + b2 * std::sin(2 * x);
      };
      double best_x = saved, best_f = model(saved);
      for (int g = 0; g < 64; ++g) {
        double x = 2.0 * kPi * g / 64.0;
        double fx = model(x);
        if (fx < best_f) {
          best_f = fx;
          best_x = x;
        }
      }
      for (int it = 0; it < 8; ++it) {  // Newton refinement
        double d1 = -a1 * std::sin(best_x) + b1 * std::cos(best_x) -
                    2 * a2 * std::sin(2 * best_x) + 2 * b2 * std::cos(2 * best_x);
        double d2 = -a1 * std::cos(best_x) - b1 * std::sin(best_x) -
                    4 * a2 * std::cos(2 * best_x) - 4 * b2 * std::sin(2 * best_x);
        if (d2 <= 0.0 || std::abs(d1) < 1e-14) break;
        best_x -= d1 / d2;
      }
      params[m] = best_x;
      current = model(best_x);
    }
    current = cost_at(params);  // re-anchor against model drift
    result.history.push_back(current);
    if (sweep_start - current < tol) {
      if (++calm_sweeps >= 2) {
        result.converged = true;
        break;
      }
    } else {
      calm_sweeps = 0;
    }
  }
  result.params = std::move(params);
  result.cost = current;
  return result;
}

// Coordinate descent alone stalls at high-symmetry points (every single-angle
// slice of the cost is flat there), so interleave it with seeded Gaussian
// hops and keep monotone improvements.
CoordinateDescentResult hopping_descent(
    const AnsatzCircuit& circuit, const CompiledSum& h,
    const std::vector<Eigen::VectorXcd>& priors,
    const std::vector<double>& betas, std::vector<double> start, double tol,
    int max_sweeps, std::mt19937_64& rng, const HopSchedule& schedule) {
  CoordinateDescentResult best = coordinate_descent(
      circuit, h, priors, betas, std::move(start), tol, max_sweeps);
  std::normal_distribution<double> gauss(0.0, schedule.sigma);
  int stale = 0;
  for (int hop = 0; hop < schedule.hops && stale < schedule.patience; ++hop) {
    std::vector<double> trial = best.params;
    for (double& x : trial) x += gauss(rng);
    CoordinateDescentResult candidate = coordinate_descent(
        circuit, h, priors, betas, std::move(trial), tol, max_sweeps);
    if (candidate.cost < best.cost - 1e-9) {
      best = std::move(candidate);
      stale = 0;
    } else {
      ++stale;
    }
  }
  return best;
}

}  // namespace

VqdResult optimize_vqd(const PauliSum& psum, int n_electrons, int n_states,
                       const VqdOptions& options) {
  if (n_states < 1) throw std::invalid_argument("n_states must be >= 1");
  const int n_qubits = psum.n_qubits;
  const int K = n_qubits / 2;
  VqdResult result;
  result.layers = options.layers > 0 ? options.layers : n_qubits;

  const AnsatzCircuit circuit = build_ansatz(K, n_electrons, result.layers);
  const CompiledSum h = compile(psum);
  const double beta_default = l1_norm_ev(psum);

  const std::uint64_t sector_dim = [&] {
    // Number of particle-conserving basis states the ansatz can reach.
    std::uint64_t c = 1;
    for (int i = 0; i < n_electrons; ++i)
      c = c * (n_qubits - i) / (i + 1);
    return c;
  }();
  const int cap = static_cast<int>(
      std::min<std::uint64_t>(options.max_internal_states, sector_dim));

  std::vector<Eigen::VectorXcd> priors;
  std::vector<double> betas;
  int n_singlets = 0;

  for (int k = 0; k < cap && n_singlets < n_states; ++k) {
    std::vector<CoordinateDescentResult> candidates(options.restarts);
#pragma omp parallel for schedule(dynamic, 1)
    for (int r = 0; r < options.restarts; ++r) {
      std::mt19937_64 rng(options.seed + 1000003ULL * k + r);
      std::vector<double> start(circuit.parameter_count(), 0.0);
      if (r > 0)
        for (double& x : start) x = 2.0 * kPi * uniform01(rng) - kPi;
      candidates[r] = hopping_descent(circuit, h, priors, betas, start,
                                      options.tol, options.max_sweeps, rng,
                                      HopSchedule{});
    }
    int best = 0;
    for (int r = 1; r < options.restarts; ++r)
      if (candidates[r].cost < candidates[best].cost) best = r;

    VqdState state;
    state.params = candidates[best].params;
    state.cost_history = candidates[best].history;
    state.state = apply_circuit(circuit, state.params);
    state.energy_ev = expectation_serial(h, state.state.amps);
    state.converged = candidates[best].converged;
    for (std::size_t i = 0; i < priors.size(); ++i) {
      double overlap = std::norm(priors[i].dot(state.state.amps));
      state.overlaps.push_back(overlap);
      if (overlap >= options.overlap_tol) state.converged = false;
    }
    state.s2 = s_squared_full(state.state.amps, n_qubits);
    if (state.s2 < 0.5) {
      state.label = "S" + std::to_string(n_singlets);
      result.singlet_indices.push_back(k);
      ++n_singlets;
    }

    priors.push_back(state.state.amps);
    betas.push_back(options.betas.empty()
                        ? beta_default
                        : options.betas[std::min<std::size_t>(
                              k, options.betas.size() - 1)]);
    result.states.push_back(std::move(state));
  }

  result.all_converged =
      n_singlets == n_states &&
      std::all_of(result.states.begin(), result.states.end(),
                  [](const VqdState& s) { return s.converged; });
  return result;
}

std::string to_string(GroupingMode m) {
  return m == GroupingMode::Abelian ? "abelian" : "none";
}

GroupingMode grouping_from_string(const std::string& s) {
  if (s == "abelian") return GroupingMode::Abelian;
  if (s == "none") return GroupingMode::None;
  throw std::invalid_argument("unknown grouping mode '" + s + "'");
}

namespace {

struct SamplingPlan {
  double exact_part = 0.0;  // identity coefficient, eV
  struct Group {
    std::vector<double> cumulative;       // running probability mass
    std::vector<std::uint64_t> outcomes;  // bit patterns, aligned
    struct TermRef {
      std::uint64_t mask;
      double coeff;
    };
    std::vector<TermRef> terms;
    long shots = 0;
  };
  std::vector<Group> groups;
};

void rotate_to_basis(Eigen::VectorXcd& amps, const std::string& basis) {
  const std::uint64_t dim = static_cast<std::uint64_t>(amps.size());
  for (std::size_t q = 0; q < basis.size(); ++q) {
    char letter = basis[q];
    if (letter == 'I' || letter == 'Z') continue;
    const std::uint64_t bit = 1ULL << q;
    const double inv_sqrt2 = 0.7071067811865475244;
    for (std::uint64_t b = 0; b < dim; ++b) {
      if (b & bit) continue;
      std::complex<double> a0 = amps(static_cast<Eigen::Index>(b));
      std::complex<double> a1 = amps(static_cast<Eigen::Index>(b | bit));
      if (letter == 'Y') a1 *= std::complex<double>(0.0, -1.0);  // S-dagger
      amps(static_cast<Eigen::Index>(b)) = inv_sqrt2 * (a0 + a1);
      amps(static_cast<Eigen::Index>(b | bit)) = inv_sqrt2 * (a0 - a1);
    }
  }
}

SamplingPlan make_plan(const PauliSum& psum, const Statevector& sv, long shots,
                       GroupingMode grouping, ShotBudget budget) {
  if (shots < 1) throw std::invalid_argument("shots must be >= 1");
  if (psum.n_qubits != sv.n_qubits)
    throw std::invalid_argument("qubit count mismatch");

  SamplingPlan plan;
  plan.exact_part = psum.identity_coefficient();

  std::vector<MeasurementGrouping::Group> groups;
  if (grouping == GroupingMode::Abelian) {
    groups = abelian_group(psum).groups;
  } else {
    for (const auto& [p, c] : psum.terms) {
      if (p.is_identity()) continue;
      MeasurementGrouping::Group g;
      g.members = {p};
      g.coefficients = {c};
      g.basis = p.str();
      groups.push_back(std::move(g));
    }
  }

  const long n_groups = static_cast<long>(groups.size());
  for (long gi = 0; gi < n_groups; ++gi) {
    const auto& g = groups[gi];
    SamplingPlan::Group pg;
    if (budget == ShotBudget::PerGroup) {
      pg.shots = shots;
    } else {
      pg.shots = shots / n_groups + (gi < shots % n_groups ? 1 : 0);
    }
    Eigen::VectorXcd rotated = sv.amps;
    rotate_to_basis(rotated, g.basis);
    for (std::uint64_t b = 0; b < static_cast<std::uint64_t>(rotated.size());
         ++b) {
      double p = std::norm(rotated(static_cast<Eigen::Index>(b)));
      if (p <= 0.0) continue;
      double prev = pg.cumulative.empty() ? 0.0 : pg.cumulative.back();
      pg.cumulative.push_back(prev + p);
      pg.outcomes.push_back(b);
    }
    for (std::size_t m = 0; m < g.members.size(); ++m)
      pg.terms.push_back({g.members[m].support(), g.coefficients[m]});
    plan.groups.push_back(std::move(pg));
  }
  return plan;
}

double sample_from_plan(const SamplingPlan& plan, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double energy = plan.exact_part;
  std::vector<long> counts;
  for (const auto& g : plan.groups) {
    if (g.shots == 0 || g.cumulative.empty()) continue;
    counts.assign(g.outcomes.size(), 0);
    const double total = g.cumulative.back();
    for (long s = 0; s < g.shots; ++s) {
      double u = uniform01(rng) * total;
      auto it = std::upper_bound(g.cumulative.begin(), g.cumulative.end(), u);
      std::size_t idx = std::min<std::size_t>(
          static_cast<std::size_t>(it - g.cumulative.begin()),
          g.outcomes.size() - 1);
      ++counts[idx];
    }
    for (const auto& term : g.terms) {
      long parity_sum = 0;
      for (std::size_t i = 0; i < g.outcomes.size(); ++i) {
        if (counts[i] == 0) continue;
        bool odd = std::popcount(g.outcomes[i] & term.mask) & 1;
        parity_sum += odd ? -counts[i] : counts[i];
      }
      energy += term.coeff * static_cast<double>(parity_sum) /
                static_cast<double>(g.shots);
    }
  }
  return energy;
}

}  // namespace

double sample_energy(const PauliSum& psum, const Statevector& sv, long shots,
                     GroupingMode grouping, std::uint64_t seed,
                     ShotBudget budget) {
  return sample_from_plan(make_plan(psum, sv, shots, grouping, budget), seed);
}

namespace {

SamplingReport summarize(const std::vector<double>& estimates, long shots,
                         GroupingMode grouping, std::uint64_t seed,
                         double reference_ev, ShotBudget budget,
                         int n_groups) {
  SamplingReport report;
  report.shots = shots;
  report.repeats = static_cast<int>(estimates.size());
  report.grouping = grouping;
  report.budget = budget;
  report.seed = seed;
  report.n_groups = n_groups;
  double mean = 0.0;
  for (double e : estimates) mean += e;
  mean /= static_cast<double>(estimates.size());
  double ss = 0.0;
  for (double e : estimates) ss += (e - mean) * (e - mean);
  report.mean_ev = mean;
  report.mean_delta_ev = mean - reference_ev;
  report.std_ev = std::sqrt(ss / static_cast<double>(estimates.size() - 1));
  return report;
}

}  // namespace

SamplingReport repeat_sampling_serial(const PauliSum& psum,
                                      const Statevector& sv, long shots,
                                      int repeats, GroupingMode grouping,
                                      std::uint64_t seed, double reference_ev,
                                      ShotBudget budget) {
  if (repeats < 2) throw std::invalid_argument("repeats must be >= 2");
  SamplingPlan plan = make_plan(psum, sv, shots, grouping, budget);
  std::vector<double> estimates(repeats);
  for (int r = 0; r < repeats; ++r)
    estimates[r] = sample_from_plan(plan, seed + static_cast<std::uint64_t>(r));
  return summarize(estimates, shots, grouping, seed, reference_ev, budget,
                   static_cast<int>(plan.groups.size()));
}

SamplingReport repeat_sampling(const PauliSum& psum, const Statevector& sv,
                               long shots, int repeats, GroupingMode grouping,
                               std::uint64_t seed, double reference_ev,
                               ShotBudget budget) {
  if (repeats < 2) throw std::invalid_argument("repeats must be >= 2");
  SamplingPlan plan = make_plan(psum, sv, shots, grouping, budget);
  std::vector<double> estimates(repeats);
#pragma omp parallel for schedule(dynamic, 16)
  for (int r = 0; r < repeats; ++r)
    estimates[r] = sample_from_plan(plan, seed + static_cast<std::uint64_t>(r));
  return summarize(estimates, shots, grouping, seed, reference_ev, budget,
                   static_cast<int>(plan.groups.size()));
}

}  // namespace exhub
