// Timings for the OpenMP kernels against their serial reference paths.

#include <cstdio>
#include <random>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <Eigen/Dense>

#include "exhub/exact.hpp"
#include "exhub/model.hpp"
#include "exhub/pauli.hpp"
#include "exhub/vqd.hpp"

namespace {

double now() {
#ifdef _OPENMP
  return omp_get_wtime();
#else
  return static_cast<double>(clock()) / CLOCKS_PER_SEC;
#endif
}

void report(const char* name, double serial_s, double parallel_s) {
  std::printf("%-28s serial %8.3f ms   parallel %8.3f ms   speedup %.2fx\n",
              name, serial_s * 1e3, parallel_s * 1e3, serial_s / parallel_s);
}

}  // namespace

int main(int argc, char** argv) {
  std::string models_dir = argc > 1 ? argv[1] : "models";
#ifdef _OPENMP
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
  std::printf("OpenMP not enabled; both columns run serially\n");
#endif

  exhub::ModelParameters hexa =
      exhub::load_model_file(models_dir + "/hexatriene_6e6o.toml");
  exhub::ModelParameters buta =
      exhub::load_model_file(models_dir + "/butadiene.toml");

  // Sector-matrix assembly, hexatriene (6e, 6o): 400 x 400.
  {
    exhub::SpinOrbitalHamiltonian ham = exhub::assemble_hamiltonian(hexa);
    exhub::SectorBasis basis = exhub::sector_basis(6, 3, 3);
    auto run = [&](bool parallel) {
      double t0 = now();
      Eigen::MatrixXd m = parallel
                              ? exhub::build_sector_matrix(ham, basis)
                              : exhub::build_sector_matrix_serial(ham, basis);
      double t1 = now();
      volatile double sink = m(0, 0);
      (void)sink;
      return t1 - t0;
    };
    run(false);  // warm up
    report("sector matrix (400x400)", run(false), run(true));
  }

  // PauliSum expectation on a random state, hexatriene (6e, 6o).
  {
    exhub::PauliSum psum =
        exhub::jordan_wigner(exhub::assemble_hamiltonian(hexa));
    exhub::CompiledSum h = exhub::compile(psum);
    std::mt19937_64 rng(7);
    Eigen::VectorXcd v(1 << 12);
    std::normal_distribution<double> normal;
    for (Eigen::Index i = 0; i < v.size(); ++i)
      v(i) = std::complex<double>(normal(rng), normal(rng));
    v.normalize();
    const int reps = 200;
    auto run = [&](bool parallel) {
      double t0 = now();
      double acc = 0.0;
      for (int r = 0; r < reps; ++r)
        acc += parallel ? exhub::expectation(h, v)
                        : exhub::expectation_serial(h, v);
      double t1 = now();
      volatile double sink = acc;
      (void)sink;
      return t1 - t0;
    };
    run(false);
    report("expectation x200 (4096d)", run(false), run(true));
  }

  // Repeated sampling, butadiene ground state.
  {
    exhub::SpinOrbitalHamiltonian ham = exhub::assemble_hamiltonian(buta);
    exhub::PauliSum psum = exhub::jordan_wigner(ham);
    exhub::SectorBasis basis = exhub::sector_basis(4, 2, 2);
    exhub::EigenPairs lowest =
        exhub::diagonalize(exhub::build_sector_matrix(ham, basis), 1);
    exhub::Statevector sv;
    sv.n_qubits = 8;
    sv.amps = Eigen::VectorXcd::Zero(256);
    for (int i = 0; i < basis.size(); ++i)
      sv.amps(basis.determinants[i]) = lowest.vectors(i, 0);
    auto run = [&](bool parallel) {
      double t0 = now();
      exhub::SamplingReport r =
          parallel ? exhub::repeat_sampling(psum, sv, 10000, 200,
                                            exhub::GroupingMode::Abelian, 42)
                   : exhub::repeat_sampling_serial(
                         psum, sv, 10000, 200, exhub::GroupingMode::Abelian,
                         42);
      double t1 = now();
      volatile double sink = r.mean_ev;
      (void)sink;
      return t1 - t0;
    };
    run(false);
    report("sampling 200x10k shots", run(false), run(true));
  }
  return 0;
}
