#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "exhub/exact.hpp"
#include "exhub/fit.hpp"
#include "exhub/model.hpp"
#include "exhub/pauli.hpp"
#include "exhub/report.hpp"
#include "exhub/vqd.hpp"

using json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

struct ModelInput {
  exhub::ModelParameters params;
  std::string path;
  std::string hash;
};

ModelInput load_input(const std::string& path, const std::string& variant) {
  ModelInput input;
  input.path = path;
  std::string text = exhub::read_text_file(path);
  input.hash = exhub::fnv1a_hex(text);
  input.params = exhub::load_model_params(text);
  if (!variant.empty())
    input.params.variant = exhub::variant_from_string(variant);
  return input;
}

json base_report(const ModelInput& input, const json& config) {
  json report;
  report["version"] = exhub::kVersion;
  report["input"] = {{"path", input.path}, {"fnv1a", input.hash}};
  report["config"] = config;
  return report;
}

void emit(const json& report, const std::string& out_path) {
  std::string text = report.dump(2) + "\n";
  if (out_path.empty())
    std::cout << text;
  else
    exhub::write_text_file(out_path, text);
}

json spectrum_for_variant(exhub::ModelParameters params,
                          exhub::InteractionVariant variant,
                          double display_cutoff) {
  params.variant = variant;
  exhub::SpectrumResult spec = exhub::solve_spectrum(params);
  json out;
  out["variant"] = exhub::to_string(variant);
  out["scf_energy_ev"] = spec.scf.scf_energy;
  out["scf_iterations"] = spec.scf.iterations;
  out["ground_energy_ev"] = spec.report.energies.front();
  json excit;
  for (const auto& [label, de] : spec.excitations_ev) excit[label] = de;
  out["excitation_energies_ev"] = excit;

  json states = json::array();
  for (std::size_t k = 0; k < spec.report.energies.size(); ++k) {
    json st;
    st["energy_ev"] = spec.report.energies[k];
    st["s_squared"] = spec.report.s2[k];
    st["label"] = spec.report.labels[k];
    json leading = json::array();
    for (const auto& entry : spec.character.states[k]) {
      if (std::abs(entry.coeff) < display_cutoff) break;
      leading.push_back(
          {{"coefficient", entry.coeff},
           {"occupation", exhub::occupation_string(
                              entry.det, 2 * spec.report.basis.K)}});
    }
    st["leading_terms"] = leading;
    states.push_back(st);
  }
  out["states"] = states;
  return out;
}

int cmd_spectrum(const std::string& model_path, const std::string& variant,
                 double display_cutoff, const std::string& out_path) {
  ModelInput input = load_input(model_path, "");
  json config = {{"command", "spectrum"},
                 {"model", model_path},
                 {"variant", variant.empty() ? "file-default" : variant},
                 {"display_cutoff", display_cutoff}};
  json report = base_report(input, config);

  std::vector<exhub::InteractionVariant> variants;
  if (variant.empty()) {
    variants = {input.params.variant};
  } else if (variant == "both") {
    variants = {exhub::InteractionVariant::WithExchange,
                exhub::InteractionVariant::CoulombOnly};
  } else {
    variants = {exhub::variant_from_string(variant)};
  }

  json results = json::array();
  for (auto v : variants)
    results.push_back(spectrum_for_variant(input.params, v, display_cutoff));
  report["results"] = results;
  emit(report, out_path);
  return kExitOk;
}

json norm_for_variant(exhub::ModelParameters params,
                      exhub::InteractionVariant variant, double epsilon,
                      const std::string& pauli_out) {
  params.variant = variant;
  exhub::SpinOrbitalHamiltonian ham = exhub::assemble_hamiltonian(params);
  exhub::PauliSum psum = exhub::jordan_wigner(ham);
  double lambda = exhub::l1_norm_hartree(psum);
  exhub::MeasurementGrouping grouping = exhub::abelian_group(psum);
  exhub::MeasurementBound bound = exhub::measurement_bound(psum, epsilon);

  json out;
  out["variant"] = exhub::to_string(variant);
  out["n_qubits"] = psum.n_qubits;
  out["lambda_au"] = lambda;
  out["n_term"] = exhub::term_count(psum);
  out["n_groups"] = static_cast<int>(grouping.groups.size());
  out["epsilon_au"] = epsilon;
  out["measurement_bound"] = bound.m_bound;
  out["qdrift_cost"] = exhub::qdrift_cost(lambda, epsilon);
  if (!pauli_out.empty())
    exhub::write_text_file(pauli_out, exhub::pauli_sum_to_text(psum));
  return out;
}

int cmd_norm(const std::string& model_path, const std::string& variant,
             double epsilon, const std::string& pauli_in,
             const std::string& pauli_out, const std::string& out_path) {
  json config = {{"command", "norm"},
                 {"variant", variant.empty() ? "file-default" : variant},
                 {"epsilon_au", epsilon}};

  if (!pauli_in.empty()) {
    std::string text = exhub::read_text_file(pauli_in);
    exhub::PauliSum psum = exhub::pauli_sum_from_text(text);
    json report;
    report["version"] = exhub::kVersion;
    report["input"] = {{"path", pauli_in}, {"fnv1a", exhub::fnv1a_hex(text)}};
    config["pauli_in"] = pauli_in;
    report["config"] = config;
    json out;
    out["n_qubits"] = psum.n_qubits;
    out["lambda_au"] = exhub::l1_norm_hartree(psum);
    out["n_term"] = exhub::term_count(psum);
    out["n_groups"] =
        static_cast<int>(exhub::abelian_group(psum).groups.size());
    report["results"] = json::array({out});
    emit(report, out_path);
    return kExitOk;
  }

  ModelInput input = load_input(model_path, "");
  config["model"] = model_path;
  json report = base_report(input, config);
  std::vector<exhub::InteractionVariant> variants;
  if (variant.empty() || variant == "both") {
    variants = {exhub::InteractionVariant::WithExchange,
                exhub::InteractionVariant::CoulombOnly};
  } else {
    variants = {exhub::variant_from_string(variant)};
  }
  json results = json::array();
  for (auto v : variants)
    results.push_back(norm_for_variant(input.params, v, epsilon, pauli_out));
  report["results"] = results;
  emit(report, out_path);
  return kExitOk;
}

int cmd_vqd_sample(const std::string& model_path, const std::string& variant,
                   std::uint64_t seed, long shots, int repeats,
                   const std::string& grouping, int layers, int n_states,
                   const std::string& budget, const std::string& out_path) {
  ModelInput input = load_input(model_path, variant);
  json config = {{"command", "vqd-sample"},
                 {"model", model_path},
                 {"variant", exhub::to_string(input.params.variant)},
                 {"seed", seed},
                 {"shots", shots},
                 {"repeats", repeats},
                 {"grouping", grouping},
                 {"layers", layers},
                 {"n_states", n_states},
                 {"shot_budget", budget}};
  json report = base_report(input, config);

  exhub::SpinOrbitalHamiltonian ham =
      exhub::assemble_hamiltonian(input.params);
  exhub::ScfResult scf = exhub::scf_rhf(ham, input.params.n_electrons);
  if (!scf.converged) {
    std::cerr << "error: SCF did not converge\n";
    return kExitNumerical;
  }
  exhub::SpinOrbitalHamiltonian rotated = exhub::rotate_basis(ham, scf.C);
  exhub::PauliSum psum = exhub::jordan_wigner(rotated);

  const int n_half = input.params.n_electrons / 2;
  exhub::SectorBasis basis =
      exhub::sector_basis(input.params.n_orbitals, n_half, n_half);
  exhub::EigenPairs ground =
      exhub::diagonalize(exhub::build_sector_matrix(rotated, basis), 1);
  const double e0_exact = ground.energies.front();

  exhub::VqdOptions options;
  options.layers = layers;
  options.seed = seed;
  exhub::VqdResult vqd =
      exhub::optimize_vqd(psum, input.params.n_electrons, n_states, options);

  exhub::GroupingMode mode = exhub::grouping_from_string(grouping);
  exhub::ShotBudget shot_budget = budget == "total"
                                      ? exhub::ShotBudget::TotalSplit
                                      : exhub::ShotBudget::PerGroup;

  json states = json::array();
  for (int idx : vqd.singlet_indices) {
    const exhub::VqdState& st = vqd.states[idx];
    exhub::SamplingReport sr =
        exhub::repeat_sampling(psum, st.state, shots, repeats, mode,
                               seed + 7919 * (idx + 1), e0_exact, shot_budget);
    json js;
    js["label"] = st.label;
    js["vqd_energy_ev"] = st.energy_ev;
    js["vqd_delta_ev"] = st.energy_ev - e0_exact;
    js["vqd_converged"] = st.converged;
    js["s_squared"] = st.s2;
    js["sampled_mean_delta_ev"] = sr.mean_delta_ev;
    js["sampled_std_ev"] = sr.std_ev;
    js["sampling_seed"] = sr.seed;
    js["n_groups"] = sr.n_groups;
    states.push_back(js);
  }
  report["results"] = {{"exact_ground_ev", e0_exact},
                       {"layers", vqd.layers},
                       {"vqd_all_converged", vqd.all_converged},
                       {"states", states}};
  if (!vqd.all_converged)
    report["results"]["warning"] = "VQD did not fully converge";
  emit(report, out_path);
  return kExitOk;
}

int cmd_fit(const std::string& csv_path, const std::string& out_path) {
  std::string text = exhub::read_text_file(csv_path);
  exhub::BandSeries series = exhub::band_series_from_csv(text);
  exhub::FitResult fit = exhub::fit_band_extrapolation(series);

  json report;
  report["version"] = exhub::kVersion;
  report["input"] = {{"path", csv_path}, {"fnv1a", exhub::fnv1a_hex(text)}};
  report["config"] = {{"command", "fit"}, {"csv", csv_path}};
  report["results"] = {{"delta_e_inf_ev", fit.delta_e_inf},
                       {"b_ev", fit.b},
                       {"c_bands", fit.c},
                       {"residual_rms_ev", fit.residual_rms},
                       {"converged", fit.converged},
                       {"n_points", series.points.size()}};
  emit(report, out_path);
  return fit.converged ? kExitOk : kExitNumerical;
}

int cmd_export_fcidump(const std::string& model_path,
                       const std::string& variant,
                       const std::string& out_path) {
  ModelInput input = load_input(model_path, variant);
  exhub::SpinOrbitalHamiltonian ham =
      exhub::assemble_hamiltonian(input.params);
  if (out_path.empty()) {
    exhub::export_fcidump(ham, std::cout);
  } else {
    exhub::export_fcidump_file(ham, out_path);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ab initio extended-Hubbard model toolkit"};
  app.require_subcommand(1);

  std::string model_path, variant, out_path, csv_path;
  std::string grouping = "abelian";
  std::string budget = "per-group";
  std::string pauli_in, pauli_out;
  std::uint64_t seed = 42;
  long shots = 10000;
  int repeats = 1000;
  int layers = 0;
  int n_states = 3;
  double epsilon = 1.6e-3;
  double display_cutoff = 0.09;

  auto add_variant = [&](CLI::App* cmd, bool allow_both) {
    auto* opt = cmd->add_option("--variant", variant,
                                "interaction variant: with-exchange or "
                                "coulomb-only");
    if (allow_both)
      opt->check(CLI::IsMember({"with-exchange", "coulomb-only", "both"}));
    else
      opt->check(CLI::IsMember({"with-exchange", "coulomb-only"}));
  };

  auto* spectrum = app.add_subcommand(
      "spectrum", "exact excitation energies and state characters");
  spectrum->add_option("model", model_path, "model parameter file")
      ->required();
  add_variant(spectrum, true);
  spectrum->add_option("--display-cutoff", display_cutoff,
                       "smallest |CI coefficient| shown");
  spectrum->add_option("--out", out_path, "output JSON path");

  auto* norm = app.add_subcommand(
      "norm", "Jordan-Wigner L1 norm, term count and grouping");
  norm->add_option("model", model_path, "model parameter file");
  add_variant(norm, true);
  norm->add_option("--epsilon", epsilon, "target precision in a.u.");
  norm->add_option("--pauli-in", pauli_in, "analyze a serialized PauliSum");
  norm->add_option("--pauli-out", pauli_out, "write the PauliSum as text");
  norm->add_option("--out", out_path, "output JSON path");

  auto* vqd = app.add_subcommand("vqd-sample",
                                 "VQD states plus shot-based estimation");
  vqd->add_option("model", model_path, "model parameter file")->required();
  add_variant(vqd, false);
  vqd->add_option("--seed", seed, "RNG seed");
  vqd->add_option("--shots", shots, "shots per measurement group")
      ->check(CLI::PositiveNumber);
  vqd->add_option("--repeats", repeats, "sampling repetitions")
      ->check(CLI::Range(2, 1000000));
  vqd->add_option("--grouping", grouping, "abelian or none")
      ->check(CLI::IsMember({"abelian", "none"}));
  vqd->add_option("--layers", layers, "brick-wall layers (0 = 2K)");
  vqd->add_option("--n-states", n_states, "number of singlet states")
      ->check(CLI::PositiveNumber);
  vqd->add_option("--shot-budget", budget,
                  "per-group or total (split across groups)")
      ->check(CLI::IsMember({"per-group", "total"}));
  vqd->add_option("--out", out_path, "output JSON path");

  auto* fit = app.add_subcommand("fit", "band-count extrapolation fit");
  fit->add_option("csv", csv_path, "CSV with n_band,delta_e_ev")->required();
  fit->add_option("--out", out_path, "output JSON path");

  auto* fcidump = app.add_subcommand("export-fcidump",
                                     "write the Hamiltonian as FCIDUMP");
  fcidump->add_option("model", model_path, "model parameter file")
      ->required();
  add_variant(fcidump, false);
  fcidump->add_option("--out", out_path, "output path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitInput;
  }

  try {
    if (spectrum->parsed())
      return cmd_spectrum(model_path, variant, display_cutoff, out_path);
    if (norm->parsed()) {
      if (model_path.empty() && pauli_in.empty()) {
        std::cerr << "error: norm needs a model file or --pauli-in\n";
        return kExitInput;
      }
      return cmd_norm(model_path, variant, epsilon, pauli_in, pauli_out,
                      out_path);
    }
    if (vqd->parsed())
      return cmd_vqd_sample(model_path, variant, seed, shots, repeats,
                            grouping, layers, n_states, budget, out_path);
    if (fit->parsed()) return cmd_fit(csv_path, out_path);
    if (fcidump->parsed())
      return cmd_export_fcidump(model_path, variant, out_path);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitInput;
}
