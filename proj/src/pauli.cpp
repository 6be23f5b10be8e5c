#include "exhub/pauli.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace exhub {

namespace {

int popcount(std::uint64_t v) { return std::popcount(v); }

// Accumulator over X^x Z^z products with complex coefficients, used while
// multiplying out Jordan-Wigner ladder operators.
class XZAccumulator {
 public:
  explicit XZAccumulator(int n_qubits) : n_(n_qubits) {}

  static XZAccumulator identity(int n_qubits, std::complex<double> c = 1.0) {
    XZAccumulator acc(n_qubits);
    acc.terms_[0] = c;
    return acc;
  }

  // Lowering operator a_p = Z_0..Z_{p-1} (X_p + i Y_p)/2.
  static XZAccumulator annihilator(int n_qubits, int p) {
    XZAccumulator acc(n_qubits);
    std::uint64_t low = (p == 0) ? 0 : ((1ULL << p) - 1);
    std::uint64_t bit = 1ULL << p;
    acc.add(bit, low, 0.5);
    acc.add(bit, low | bit, -0.5);
    return acc;
  }

  static XZAccumulator creator(int n_qubits, int p) {
    XZAccumulator acc(n_qubits);
    std::uint64_t low = (p == 0) ? 0 : ((1ULL << p) - 1);
    std::uint64_t bit = 1ULL << p;
    acc.add(bit, low, 0.5);
    acc.add(bit, low | bit, 0.5);
    return acc;
  }

  void add(std::uint64_t x, std::uint64_t z, std::complex<double> c) {
    terms_[key(x, z)] += c;
  }

  void add_scaled(const XZAccumulator& other, std::complex<double> scale) {
    for (const auto& [k, c] : other.terms_) terms_[k] += scale * c;
  }

  XZAccumulator operator*(const XZAccumulator& rhs) const {
    XZAccumulator out(n_);
    for (const auto& [ka, ca] : terms_) {
      auto [xa, za] = unkey(ka);
      for (const auto& [kb, cb] : rhs.terms_) {
        auto [xb, zb] = unkey(kb);
        // Z^za past X^xb picks up (-1)^|za & xb|.
        double sign = (popcount(za & xb) & 1) ? -1.0 : 1.0;
        out.terms_[key(xa ^ xb, za ^ zb)] += ca * cb * sign;
      }
    }
    return out;
  }

  // Converts X^x Z^z terms to letter-string coefficients: a string with y
  // Y letters equals i^y X^x Z^z, so its coefficient is c * (-i)^y.
  void flush_into(int n_qubits, std::map<PauliString, double>& dest,
                  double imag_tol) const {
    const std::complex<double> minus_i(0.0, -1.0);
    for (const auto& [k, c] : terms_) {
      auto [x, z] = unkey(k);
      int y = popcount(x & z);
      std::complex<double> coeff = c;
      for (int t = 0; t < (y & 3); ++t) coeff *= minus_i;
      if (std::abs(coeff.imag()) > imag_tol)
        throw std::runtime_error(
            "Jordan-Wigner produced a non-real coefficient");
      if (coeff.real() == 0.0) continue;
      auto [it, inserted] =
          dest.emplace(PauliString(n_qubits, x, z), coeff.real());
      if (!inserted) it->second += coeff.real();
    }
  }

 private:
  static std::uint64_t key(std::uint64_t x, std::uint64_t z) {
    return x | (z << 32);
  }
  static std::pair<std::uint64_t, std::uint64_t> unkey(std::uint64_t k) {
    return {k & 0xffffffffULL, k >> 32};
  }

  int n_;
  std::unordered_map<std::uint64_t, std::complex<double>> terms_;
};

}  // namespace

PauliString PauliString::from_string(const std::string& letters) {
  std::uint64_t x = 0, z = 0;
  for (std::size_t q = 0; q < letters.size(); ++q) {
    switch (letters[q]) {
      case 'I':
        break;
      case 'X':
        x |= 1ULL << q;
        break;
      case 'Y':
        x |= 1ULL << q;
        z |= 1ULL << q;
        break;
      case 'Z':
        z |= 1ULL << q;
        break;
      default:
        throw std::invalid_argument("bad Pauli letter in '" + letters + "'");
    }
  }
  return PauliString(static_cast<int>(letters.size()), x, z);
}

char PauliString::letter(int q) const {
  bool x = (x_ >> q) & 1, z = (z_ >> q) & 1;
  if (x && z) return 'Y';
  if (x) return 'X';
  if (z) return 'Z';
  return 'I';
}

std::string PauliString::str() const {
  std::string s(n_, 'I');
  for (int q = 0; q < n_; ++q) s[q] = letter(q);
  return s;
}

int PauliString::weight() const { return popcount(x_ | z_); }

bool PauliString::qubitwise_commutes(const PauliString& other) const {
  std::uint64_t both = support() & other.support();
  // On shared support, letters must match exactly.
  return ((x_ ^ other.x_) & both) == 0 && ((z_ ^ other.z_) & both) == 0;
}

std::complex<double> PauliString::phase() const {
  static const std::complex<double> table[4] = {
      {1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  return table[popcount(x_ & z_) & 3];
}

bool PauliString::operator<(const PauliString& o) const {
  if (n_ != o.n_) return n_ < o.n_;
  for (int q = 0; q < n_; ++q) {
    char a = letter(q), b = o.letter(q);
    if (a != b) return a < b;
  }
  return false;
}

void PauliSum::add(const PauliString& p, double coeff) {
  auto [it, inserted] = terms.emplace(p, coeff);
  if (!inserted) it->second += coeff;
}

void PauliSum::prune() {
  for (auto it = terms.begin(); it != terms.end();)
    it = std::abs(it->second) < kPruneThreshold ? terms.erase(it)
                                                : std::next(it);
}

double PauliSum::identity_coefficient() const {
  auto it = terms.find(PauliString(n_qubits, 0, 0));
  return it == terms.end() ? 0.0 : it->second;
}

PauliSum jordan_wigner(const SpinOrbitalHamiltonian& ham) {
  const int n = ham.n_spin_orbitals;
  if (n > 32) throw std::invalid_argument("too many spin orbitals for JW");

  XZAccumulator acc = XZAccumulator::identity(n, ham.constant);

  std::vector<XZAccumulator> create, destroy;
  create.reserve(n);
  destroy.reserve(n);
  for (int p = 0; p < n; ++p) {
    create.push_back(XZAccumulator::creator(n, p));
    destroy.push_back(XZAccumulator::annihilator(n, p));
  }

  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) {
      double h = ham.h1(p, q);
      if (h == 0.0) continue;
      acc.add_scaled(create[p] * destroy[q], h);
    }

  // 1/2 sum (pq|rs) c+_{p sigma} c+_{r rho} c_{s rho} c_{q sigma}.
  for (const auto& [key, value] : ham.eri.all_tuples()) {
    auto [p, q, r, s] = key;
    for (int sigma = 0; sigma < 2; ++sigma)
      for (int rho = 0; rho < 2; ++rho) {
        int P = 2 * p + sigma, Q = 2 * q + sigma;
        int R = 2 * r + rho, S = 2 * s + rho;
        if (P == R || Q == S) continue;  // c+c+ or cc on the same mode
        acc.add_scaled(create[P] * create[R] * destroy[S] * destroy[Q],
                       0.5 * value);
      }
  }

  PauliSum psum;
  psum.n_qubits = n;
  acc.flush_into(n, psum.terms, 1e-9);
  psum.prune();
  return psum;
}

double l1_norm_ev(const PauliSum& psum) {
  double sum = 0.0;
  for (const auto& [p, c] : psum.terms)
    if (!p.is_identity()) sum += std::abs(c);
  return sum;
}

double l1_norm_hartree(const PauliSum& psum) {
  return l1_norm_ev(psum) / kEvPerHartree;
}

int term_count(const PauliSum& psum) {
  return static_cast<int>(psum.terms.size());
}

MeasurementGrouping abelian_group(const PauliSum& psum) {
  std::vector<std::pair<PauliString, double>> sorted;
  for (const auto& [p, c] : psum.terms)
    if (!p.is_identity()) sorted.emplace_back(p, c);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& a, const auto& b) {
                     if (std::abs(a.second) != std::abs(b.second))
                       return std::abs(a.second) > std::abs(b.second);
                     return a.first < b.first;
                   });

  MeasurementGrouping grouping;
  for (const auto& [p, c] : sorted) {
    bool placed = false;
    for (auto& g : grouping.groups) {
      bool fits = true;
      for (const auto& member : g.members)
        if (!p.qubitwise_commutes(member)) {
          fits = false;
          break;
        }
      if (fits) {
        g.members.push_back(p);
        g.coefficients.push_back(c);
        placed = true;
        break;
      }
    }
    if (!placed) {
      grouping.groups.push_back({{p}, {c}, {}});
    }
  }
  for (auto& g : grouping.groups) {
    std::string basis(psum.n_qubits, 'I');
    for (const auto& member : g.members)
      for (int q = 0; q < psum.n_qubits; ++q)
        if (member.letter(q) != 'I') basis[q] = member.letter(q);
    g.basis = basis;
  }
  return grouping;
}

MeasurementBound measurement_bound(const PauliSum& psum, double epsilon) {
  if (epsilon <= 0.0) throw std::invalid_argument("epsilon must be positive");
  MeasurementBound out;
  double lambda = l1_norm_hartree(psum);
  out.m_bound = (lambda / epsilon) * (lambda / epsilon);
  double lambda_ev = l1_norm_ev(psum);
  for (const auto& [p, c] : psum.terms) {
    if (p.is_identity()) continue;
    out.allocation.emplace_back(p, lambda_ev > 0 ? std::abs(c) / lambda_ev
                                                 : 0.0);
  }
  return out;
}

double qdrift_cost(double lambda, double epsilon) {
  if (lambda <= 0.0 || epsilon <= 0.0)
    throw std::invalid_argument("qdrift_cost needs positive inputs");
  return std::ceil(2.0 * lambda * lambda / (epsilon * epsilon));
}

std::string pauli_sum_to_text(const PauliSum& psum) {
  std::ostringstream out;
  out.precision(17);
  for (const auto& [p, c] : psum.terms) out << c << " " << p.str() << "\n";
  return out.str();
}

PauliSum pauli_sum_from_text(const std::string& text) {
  PauliSum psum;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    double c;
    std::string letters;
    if (!(row >> c >> letters))
      throw std::invalid_argument("bad PauliSum line: " + line);
    PauliString p = PauliString::from_string(letters);
    if (psum.n_qubits == 0)
      psum.n_qubits = p.n_qubits();
    else if (p.n_qubits() != psum.n_qubits)
      throw std::invalid_argument("inconsistent string length: " + line);
    psum.add(p, c);
  }
  psum.prune();
  return psum;
}

Statevector Statevector::basis_state(int n_qubits, std::uint64_t occupation) {
  Statevector sv;
  sv.n_qubits = n_qubits;
  sv.amps = Eigen::VectorXcd::Zero(1LL << n_qubits);
  sv.amps(static_cast<Eigen::Index>(occupation)) = 1.0;
  return sv;
}

CompiledSum compile(const PauliSum& psum) {
  CompiledSum h;
  h.n_qubits = psum.n_qubits;
  h.identity = psum.identity_coefficient();
  for (const auto& [p, c] : psum.terms) {
    if (p.is_identity()) continue;
    h.terms.push_back({p.x_mask(), p.z_mask(), c, p.phase()});
  }
  return h;
}

Eigen::VectorXcd apply(const CompiledSum& h, const Eigen::VectorXcd& v) {
  const std::uint64_t dim = static_cast<std::uint64_t>(v.size());
  Eigen::VectorXcd out = h.identity * v;
  for (const auto& t : h.terms) {
    for (std::uint64_t b = 0; b < dim; ++b) {
      std::complex<double> a = v(static_cast<Eigen::Index>(b));
      if (a == std::complex<double>(0.0, 0.0)) continue;
      double sign = (popcount(b & t.z) & 1) ? -1.0 : 1.0;
      out(static_cast<Eigen::Index>(b ^ t.x)) += t.coeff * t.phase * sign * a;
    }
  }
  return out;
}

namespace {

double term_expectation(const CompiledSum::Term& t, const Eigen::VectorXcd& v) {
  const std::uint64_t dim = static_cast<std::uint64_t>(v.size());
  std::complex<double> acc(0.0, 0.0);
  for (std::uint64_t b = 0; b < dim; ++b) {
    std::complex<double> a = v(static_cast<Eigen::Index>(b));
    if (a == std::complex<double>(0.0, 0.0)) continue;
    double sign = (popcount(b & t.z) & 1) ? -1.0 : 1.0;
    acc += std::conj(v(static_cast<Eigen::Index>(b ^ t.x))) * sign * a;
  }
  return (t.coeff * t.phase * acc).real();
}

}  // namespace

double expectation_serial(const CompiledSum& h, const Eigen::VectorXcd& v) {
  double total = h.identity;
  for (const auto& t : h.terms) total += term_expectation(t, v);
  return total;
}

double expectation(const CompiledSum& h, const Eigen::VectorXcd& v) {
  const int n_terms = static_cast<int>(h.terms.size());
  std::vector<double> per_term(n_terms);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n_terms; ++i)
    per_term[i] = term_expectation(h.terms[i], v);
  // Fixed-order reduction keeps the result identical to the serial path.
  double total = h.identity;
  for (double x : per_term) total += x;
  return total;
}

double expectation(const PauliSum& psum, const Statevector& sv) {
  if (psum.n_qubits != sv.n_qubits)
    throw std::invalid_argument("qubit count mismatch");
  return expectation(compile(psum), sv.amps);
}

std::vector<std::pair<std::uint64_t, double>> dense_column(
    const CompiledSum& h, std::uint64_t b) {
  std::map<std::uint64_t, double> col;
  if (h.identity != 0.0) col[b] += h.identity;
  for (const auto& t : h.terms) {
    double sign = (popcount(b & t.z) & 1) ? -1.0 : 1.0;
    std::complex<double> val = t.coeff * t.phase * sign;
    if (std::abs(val.imag()) > 1e-9 * (std::abs(val.real()) + 1.0))
      throw std::runtime_error("dense_column: non-real matrix element");
    col[b ^ t.x] += val.real();
  }
  return {col.begin(), col.end()};
}

Eigen::MatrixXd dense_matrix(const PauliSum& psum) {
  if (psum.n_qubits > 13)
    throw std::invalid_argument("dense_matrix limited to 13 qubits");
  const std::uint64_t dim = 1ULL << psum.n_qubits;
  CompiledSum h = compile(psum);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < static_cast<std::int64_t>(dim); ++b)
    for (const auto& [row, val] : dense_column(h, static_cast<std::uint64_t>(b)))
      m(static_cast<Eigen::Index>(row), b) = val;
  return m;
}

}  // namespace exhub
