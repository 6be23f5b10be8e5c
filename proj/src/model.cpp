#include "exhub/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace exhub {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& line) {
  auto pos = line.find('#');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

[[noreturn]] void parse_error(int line_no, const std::string& what) {
  throw std::invalid_argument("parameter file line " + std::to_string(line_no) +
                              ": " + what);
}

}  // namespace

std::string to_string(InteractionVariant v) {
  return v == InteractionVariant::WithExchange ? "with-exchange"
                                               : "coulomb-only";
}

InteractionVariant variant_from_string(const std::string& s) {
  if (s == "with-exchange") return InteractionVariant::WithExchange;
  if (s == "coulomb-only") return InteractionVariant::CoulombOnly;
  throw std::invalid_argument("unknown interaction variant '" + s +
                              "' (expected with-exchange or coulomb-only)");
}

void ModelParameters::validate() const {
  const int K = n_orbitals;
  if (K < 1) throw std::invalid_argument("K must be >= 1");
  if (n_electrons < 0 || n_electrons > 2 * K)
    throw std::invalid_argument("n_electrons out of range [0, 2K]");
  if (alpha < 0.0 || alpha > 1.0)
    throw std::invalid_argument("alpha out of range [0, 1]");
  auto check_sym = [&](const Eigen::MatrixXd& m, const char* name) {
    if (m.rows() != K || m.cols() != K)
      throw std::invalid_argument(std::string(name) + " has wrong shape");
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12)
      throw std::invalid_argument(std::string(name) + " is not symmetric");
  };
  check_sym(t, "t");
  check_sym(U, "U");
  check_sym(J, "J");
  check_sym(D, "D");
  if (U.minCoeff() < 0.0) throw std::invalid_argument("U has negative entries");
  for (int i = 0; i < K; ++i)
    if (J(i, i) != 0.0)
      throw std::invalid_argument("J diagonal must be zero");
}

ModelParameters load_model_params(const std::string& config_text) {
  ModelParameters p;
  int K = -1;
  bool in_model = false, in_params = false;
  bool variant_seen = false;

  struct Row {
    double t, U, J, D;
    bool has_J;
  };
  std::map<std::pair<int, int>, Row> rows;

  std::istringstream in(config_text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line == "[model]") {
      in_model = true;
      in_params = false;
      continue;
    }
    if (line == "[params]") {
      in_params = true;
      in_model = false;
      continue;
    }
    if (line.front() == '[') parse_error(line_no, "unknown section " + line);

    if (in_model) {
      auto eq = line.find('=');
      if (eq == std::string::npos) parse_error(line_no, "expected key = value");
      std::string key = trim(line.substr(0, eq));
      std::string val = trim(line.substr(eq + 1));
      if (val.empty()) parse_error(line_no, "empty value for " + key);
      try {
        if (key == "name") {
          p.molecule_name = val;
        } else if (key == "K") {
          K = std::stoi(val);
        } else if (key == "n_electrons") {
          p.n_electrons = std::stoi(val);
        } else if (key == "alpha") {
          p.alpha = std::stod(val);
        } else if (key == "variant") {
          p.variant = variant_from_string(val);
          variant_seen = true;
        } else {
          parse_error(line_no, "unknown key '" + key + "'");
        }
      } catch (const std::invalid_argument& e) {
        parse_error(line_no, e.what());
      }
    } else if (in_params) {
      std::istringstream row(line);
      int i = 0, j = 0;
      std::vector<double> vals;
      if (!(row >> i >> j)) parse_error(line_no, "expected 'i j t U [J] D'");
      double v;
      while (row >> v) vals.push_back(v);
      std::string rest;
      if (row.clear(), row >> rest)
        parse_error(line_no, "trailing junk '" + rest + "'");
      Row r{};
      if (vals.size() == 4) {
        r = {vals[0], vals[1], vals[2], vals[3], true};
      } else if (vals.size() == 3) {
        r = {vals[0], vals[1], 0.0, vals[2], false};  // J omitted
      } else {
        parse_error(line_no, "expected 4 values (t U J D) or 3 (t U D)");
      }
      if (i < 1 || j < 1) parse_error(line_no, "orbital indices are 1-based");
      std::pair<int, int> key = std::minmax(i, j);
      auto it = rows.find(key);
      if (it != rows.end()) {
        const Row& prev = it->second;
        if (prev.t != r.t || prev.U != r.U || prev.J != r.J || prev.D != r.D)
          parse_error(line_no, "asymmetric duplicate entry for pair (" +
                                   std::to_string(key.first) + "," +
                                   std::to_string(key.second) + ")");
        continue;
      }
      rows.emplace(key, r);
    } else {
      parse_error(line_no, "content outside of any section");
    }
  }

  if (K < 1) throw std::invalid_argument("parameter file: missing or bad K");
  if (!variant_seen) p.variant = InteractionVariant::WithExchange;
  p.n_orbitals = K;
  p.t = Eigen::MatrixXd::Zero(K, K);
  p.U = Eigen::MatrixXd::Zero(K, K);
  p.J = Eigen::MatrixXd::Zero(K, K);
  p.D = Eigen::MatrixXd::Zero(K, K);

  for (int i = 1; i <= K; ++i) {
    for (int j = i; j <= K; ++j) {
      auto it = rows.find({i, j});
      if (it == rows.end())
        throw std::invalid_argument("parameter file: missing pair (" +
                                    std::to_string(i) + "," +
                                    std::to_string(j) + ")");
      const Row& r = it->second;
      if (i == j && r.has_J && r.J != 0.0)
        throw std::invalid_argument("parameter file: nonzero diagonal J at (" +
                                    std::to_string(i) + "," +
                                    std::to_string(j) + ")");
      p.t(i - 1, j - 1) = p.t(j - 1, i - 1) = r.t;
      p.U(i - 1, j - 1) = p.U(j - 1, i - 1) = r.U;
      p.D(i - 1, j - 1) = p.D(j - 1, i - 1) = r.D;
      if (i != j) p.J(i - 1, j - 1) = p.J(j - 1, i - 1) = r.J;
    }
  }
  for (const auto& [key, row] : rows)
    if (key.second > K)
      throw std::invalid_argument("parameter file: orbital index " +
                                  std::to_string(key.second) + " exceeds K");

  p.validate();
  return p;
}

ModelParameters load_model_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open model file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return load_model_params(ss.str());
}

EriTable::Key EriTable::canonical(int p, int q, int r, int s) {
  // Representative: descending within each pair, then the larger pair first.
  if (p < q) std::swap(p, q);
  if (r < s) std::swap(r, s);
  if (p < r || (p == r && q < s)) {
    std::swap(p, r);
    std::swap(q, s);
  }
  return {p, q, r, s};
}

void EriTable::set(int p, int q, int r, int s, double value) {
  entries_[canonical(p, q, r, s)] = value;
}

double EriTable::get(int p, int q, int r, int s) const {
  auto it = entries_.find(canonical(p, q, r, s));
  return it == entries_.end() ? 0.0 : it->second;
}

std::vector<std::pair<EriTable::Key, double>> EriTable::all_tuples() const {
  std::vector<std::pair<Key, double>> out;
  for (const auto& [key, value] : entries_) {
    auto [p, q, r, s] = key;
    std::set<Key> images;
    for (int swap_pq : {0, 1})
      for (int swap_rs : {0, 1})
        for (int swap_pairs : {0, 1}) {
          int a = p, b = q, c = r, d = s;
          if (swap_pq) std::swap(a, b);
          if (swap_rs) std::swap(c, d);
          if (swap_pairs) {
            std::swap(a, c);
            std::swap(b, d);
          }
          images.insert({a, b, c, d});
        }
    for (const Key& k : images) out.emplace_back(k, value);
  }
  return out;
}

void EriTable::prune(double threshold) {
  for (auto it = entries_.begin(); it != entries_.end();)
    it = std::abs(it->second) < threshold ? entries_.erase(it) : std::next(it);
}

Eigen::MatrixXd SpinOrbitalHamiltonian::h1_spatial() const {
  const int K = n_spatial();
  Eigen::MatrixXd m(K, K);
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < K; ++j) m(i, j) = h1(2 * i, 2 * j);
  return m;
}

Eigen::MatrixXd build_one_body(const ModelParameters& params) {
  params.validate();
  const int K = params.n_orbitals;
  Eigen::MatrixXd t_eff = params.t;
  for (int i = 0; i < K; ++i) {
    double dc = params.alpha * params.U(i, i) * params.D(i, i);
    for (int k = 0; k < K; ++k)
      if (k != i) dc += params.U(i, k) * params.D(k, k);
    t_eff(i, i) -= dc;
  }
  return t_eff;
}

EriTable build_two_body(const ModelParameters& params) {
  params.validate();
  const int K = params.n_orbitals;
  EriTable eri;
  for (int i = 0; i < K; ++i)
    for (int j = i; j < K; ++j) eri.set(i, i, j, j, params.U(i, j));
  if (params.variant == InteractionVariant::WithExchange) {
    for (int i = 0; i < K; ++i)
      for (int j = i + 1; j < K; ++j)
        if (params.J(i, j) != 0.0) eri.set(i, j, i, j, params.J(i, j));
  }
  eri.prune(1e-14);
  return eri;
}

SpinOrbitalHamiltonian assemble_hamiltonian(const ModelParameters& params) {
  SpinOrbitalHamiltonian ham;
  const int K = params.n_orbitals;
  ham.n_spin_orbitals = 2 * K;
  ham.n_electrons = params.n_electrons;
  ham.constant = 0.0;
  ham.basis_tag = BasisTag::Wannier;
  Eigen::MatrixXd t_eff = build_one_body(params);
  ham.h1 = Eigen::MatrixXd::Zero(2 * K, 2 * K);
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < K; ++j)
      for (int s = 0; s < 2; ++s) ham.h1(2 * i + s, 2 * j + s) = t_eff(i, j);
  ham.eri = build_two_body(params);
  return ham;
}

SpinOrbitalHamiltonian rotate_basis(const SpinOrbitalHamiltonian& ham,
                                    const Eigen::MatrixXd& C) {
  const int K = ham.n_spatial();
  if (C.rows() != K || C.cols() != K)
    throw std::invalid_argument("rotation matrix has wrong shape");
  Eigen::MatrixXd ortho = C.transpose() * C -
                          Eigen::MatrixXd::Identity(K, K);
  if (ortho.cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("rotation matrix is not orthogonal");

  SpinOrbitalHamiltonian out;
  out.n_spin_orbitals = ham.n_spin_orbitals;
  out.n_electrons = ham.n_electrons;
  out.constant = ham.constant;
  out.basis_tag = BasisTag::Canonical;

  Eigen::MatrixXd h_rot = C.transpose() * ham.h1_spatial() * C;
  out.h1 = Eigen::MatrixXd::Zero(2 * K, 2 * K);
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < K; ++j)
      for (int s = 0; s < 2; ++s) out.h1(2 * i + s, 2 * j + s) = h_rot(i, j);

  // Four-index congruence; dense in general, so transform through a full
  // tensor and re-sparsify.
  std::vector<double> full(static_cast<std::size_t>(K) * K * K * K, 0.0);
  auto at = [K](std::vector<double>& v, int p, int q, int r, int s) -> double& {
    return v[((static_cast<std::size_t>(p) * K + q) * K + r) * K + s];
  };
  for (const auto& [key, value] : ham.eri.all_tuples())
    at(full, key[0], key[1], key[2], key[3]) = value;

  // Transform one index at a time: g'_{pqrs} = C_ap C_bq C_cr C_ds g_{abcd}.
  std::vector<double> tmp(full.size());
  for (int pass = 0; pass < 4; ++pass) {
    std::fill(tmp.begin(), tmp.end(), 0.0);
    for (int p = 0; p < K; ++p)
      for (int q = 0; q < K; ++q)
        for (int r = 0; r < K; ++r)
          for (int s = 0; s < K; ++s) {
            double acc = 0.0;
            // Always contract the first index, then rotate the tensor's
            // index order so each pass touches a fresh index.
            for (int a = 0; a < K; ++a)
              acc += C(a, p) * at(full, a, q, r, s);
            at(tmp, q, r, s, p) = acc;
          }
    std::swap(full, tmp);
  }

  for (int p = 0; p < K; ++p)
    for (int q = 0; q < K; ++q)
      for (int r = 0; r < K; ++r)
        for (int s = 0; s < K; ++s) {
          double v = at(full, p, q, r, s);
          if (std::abs(v) >= 1e-12) out.eri.set(p, q, r, s, v);
        }
  return out;
}

void export_fcidump(const SpinOrbitalHamiltonian& ham, std::ostream& out) {
  const int K = ham.n_spatial();
  const double to_ha = 1.0 / kEvPerHartree;
  const double thresh = 1e-12;

  out << "&FCI NORB=" << K << ",NELEC=" << ham.n_electrons << ",MS2=0,\n";
  out << " ORBSYM=";
  for (int i = 0; i < K; ++i) out << "1,";
  out << "\n ISYM=1,\n&END\n";

  char buf[96];
  auto emit = [&](double v, int i, int j, int k, int l) {
    std::snprintf(buf, sizeof(buf), "%21.12E %4d %4d %4d %4d\n", v, i, j, k, l);
    out << buf;
  };

  for (const auto& [key, value] : ham.eri.entries()) {
    double v = value * to_ha;
    if (std::abs(v) < thresh) continue;
    emit(v, key[0] + 1, key[1] + 1, key[2] + 1, key[3] + 1);
  }
  Eigen::MatrixXd h = ham.h1_spatial();
  for (int i = 0; i < K; ++i)
    for (int j = 0; j <= i; ++j) {
      double v = h(i, j) * to_ha;
      if (std::abs(v) < thresh) continue;
      emit(v, i + 1, j + 1, 0, 0);
    }
  emit(ham.constant * to_ha, 0, 0, 0, 0);
}

void export_fcidump_file(const SpinOrbitalHamiltonian& ham,
                         const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  export_fcidump(ham, f);
  if (!f) throw std::runtime_error("write failed: " + path);
}

FcidumpData read_fcidump(std::istream& in) {
  FcidumpData data;
  std::string line;
  std::string header;
  while (std::getline(in, line)) {
    header += line + " ";
    if (line.find("&END") != std::string::npos ||
        line.find("/") != std::string::npos)
      break;
  }
  auto grab_int = [&](const std::string& key) {
    auto pos = header.find(key);
    if (pos == std::string::npos)
      throw std::invalid_argument("FCIDUMP header missing " + key);
    pos += key.size();
    while (pos < header.size() && (header[pos] == '=' || header[pos] == ' '))
      ++pos;
    return std::stoi(header.substr(pos));
  };
  data.norb = grab_int("NORB");
  data.nelec = grab_int("NELEC");
  data.ms2 = grab_int("MS2");
  data.h1 = Eigen::MatrixXd::Zero(data.norb, data.norb);

  double v;
  int i, j, k, l;
  while (in >> v >> i >> j >> k >> l) {
    if (i == 0 && j == 0 && k == 0 && l == 0) {
      data.core = v;
    } else if (k == 0 && l == 0) {
      data.h1(i - 1, j - 1) = v;
      data.h1(j - 1, i - 1) = v;
    } else {
      data.eri.set(i - 1, j - 1, k - 1, l - 1, v);
    }
  }
  return data;
}

}  // namespace exhub
