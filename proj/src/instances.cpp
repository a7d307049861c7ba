#include "qcpulse/instances.hpp"

#include <cmath>
#include <complex>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "qcpulse/dynamics.hpp"
#include "qcpulse/rng.hpp"

namespace qcp {

using std::complex;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTargetUnitaryTol = 1e-8;

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Eigen::MatrixXcd embed_on_qubit(const Eigen::Matrix2cd& p, int site, int n_qubits) {
  if (n_qubits < 1 || site < 1 || site > n_qubits) {
    throw std::invalid_argument("qubit site " + std::to_string(site) + " outside 1.." +
                                std::to_string(n_qubits));
  }
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(1, 1);
  for (int i = 1; i <= n_qubits; ++i) {
    if (i == site) {
      out = kron(out, p);
    } else {
      out = kron(out, Eigen::Matrix2cd::Identity());
    }
  }
  return out;
}

Eigen::MatrixXcd random_hermitian(int dim, Rng& rng) {
  Eigen::MatrixXcd a(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      a(i, j) = complex<double>(rng.normal(), rng.normal());
    }
  }
  return 0.5 * (a + a.adjoint().eval());
}

}  // namespace

Eigen::Matrix2cd sigma_x() {
  Eigen::Matrix2cd m;
  m << 0, 1, 1, 0;
  return m;
}

Eigen::Matrix2cd sigma_y() {
  Eigen::Matrix2cd m;
  m << complex<double>(0, 0), complex<double>(0, -1), complex<double>(0, 1),
      complex<double>(0, 0);
  return m;
}

Eigen::Matrix2cd sigma_z() {
  Eigen::Matrix2cd m;
  m << 1, 0, 0, -1;
  return m;
}

Eigen::MatrixXcd pauli_embed(const Eigen::Matrix2cd& p, int site, int n_qubits) {
  return embed_on_qubit(p, site, n_qubits);
}

QuantumInstance build_energy_instance(int n_qubits, const Eigen::MatrixXd& coupling) {
  if (n_qubits < 1) {
    throw std::invalid_argument("energy instance needs at least one qubit");
  }
  if (coupling.rows() != n_qubits || coupling.cols() != n_qubits) {
    throw std::invalid_argument("coupling matrix must be q x q");
  }
  for (int i = 0; i < n_qubits; ++i) {
    if (coupling(i, i) != 0.0) {
      throw std::invalid_argument("coupling matrix must have a zero diagonal");
    }
    for (int j = 0; j < n_qubits; ++j) {
      if (coupling(i, j) != coupling(j, i)) {
        throw std::invalid_argument("coupling matrix must be symmetric");
      }
    }
  }
  const int dim = 1 << n_qubits;

  Eigen::MatrixXcd transverse = Eigen::MatrixXcd::Zero(dim, dim);
  for (int i = 1; i <= n_qubits; ++i) {
    transverse -= pauli_embed(sigma_x(), i, n_qubits);
  }
  Eigen::MatrixXcd ising = Eigen::MatrixXcd::Zero(dim, dim);
  for (int i = 1; i <= n_qubits; ++i) {
    for (int j = 1; j <= n_qubits; ++j) {
      if (i == j) continue;
      ising += coupling(i - 1, j - 1) *
               (pauli_embed(sigma_z(), i, n_qubits) * pauli_embed(sigma_z(), j, n_qubits));
    }
  }

  // The coupling Hamiltonian is diagonal in the computational basis, so its
  // ground energy is just the smallest diagonal entry.
  double e_min = ising(0, 0).real();
  for (int i = 1; i < dim; ++i) {
    e_min = std::min(e_min, ising(i, i).real());
  }
  if (e_min == 0.0) {
    throw std::invalid_argument("coupling matrix has a vanishing ground energy");
  }

  EnergySpec spec;
  spec.hbar = ising;
  spec.psi0 = Eigen::VectorXcd::Constant(dim, 1.0 / std::sqrt(static_cast<double>(dim)));
  spec.e_min = e_min;

  QuantumInstance inst;
  inst.name = "energy-q" + std::to_string(n_qubits);
  inst.dim = dim;
  inst.h_drift = Eigen::MatrixXcd::Zero(dim, dim);
  inst.h_controls = {transverse, ising};
  inst.x_init = Eigen::MatrixXcd::Identity(dim, dim);
  inst.objective = spec;
  inst.defaults = InstanceDefaults{2.0, 40, 0.01, 10, 5, 1.0};
  return inst;
}

QuantumInstance build_energy_instance(int n_qubits, std::uint64_t seed) {
  Eigen::MatrixXd coupling = Eigen::MatrixXd::Zero(n_qubits, n_qubits);
  if (n_qubits == 2) {
    // Two qubits leave a single independent coupling; pin it to one.
    coupling(0, 1) = coupling(1, 0) = 1.0;
  } else {
    Rng rng(seed);
    for (int i = 0; i < n_qubits; ++i) {
      for (int j = i + 1; j < n_qubits; ++j) {
        coupling(i, j) = coupling(j, i) = rng.uniform(-1.0, 1.0);
      }
    }
  }
  return build_energy_instance(n_qubits, coupling);
}

QuantumInstance build_cnot_instance(double t_f, int n_steps) {
  const Eigen::MatrixXcd sx1 = pauli_embed(sigma_x(), 1, 2);
  const Eigen::MatrixXcd sy1 = pauli_embed(sigma_y(), 1, 2);
  Eigen::MatrixXcd drift =
      pauli_embed(sigma_x(), 1, 2) * pauli_embed(sigma_x(), 2, 2) +
      pauli_embed(sigma_y(), 1, 2) * pauli_embed(sigma_y(), 2, 2) +
      pauli_embed(sigma_z(), 1, 2) * pauli_embed(sigma_z(), 2, 2);

  Eigen::MatrixXcd target = Eigen::MatrixXcd::Zero(4, 4);
  target(0, 0) = 1.0;
  target(1, 1) = 1.0;
  target(2, 3) = 1.0;
  target(3, 2) = 1.0;

  InfidelitySpec spec;
  spec.target = target;
  spec.norm_dim = 4.0;
  spec.unit_range = true;

  double alpha = 0.001;
  if (t_f <= 5.0) {
    alpha = 0.01;
  } else if (t_f >= 15.0) {
    alpha = 0.0001;
  }

  QuantumInstance inst;
  inst.name = "cnot-tf" + std::to_string(static_cast<int>(std::lround(t_f)));
  inst.dim = 4;
  inst.h_drift = drift;
  inst.h_controls = {sx1, sy1};
  inst.x_init = Eigen::MatrixXcd::Identity(4, 4);
  inst.objective = spec;
  inst.defaults = InstanceDefaults{t_f, n_steps, alpha, 10, 20, 1.0};
  return inst;
}

QuantumInstance build_not_instance(double t_f, int n_steps) {
  const double mu2 = 2.0 * kPi;
  const double omega1 = 1.0;
  const double omega2 = std::sqrt(2.0);

  Eigen::MatrixXcd drift = Eigen::MatrixXcd::Zero(3, 3);
  drift(2, 2) = mu2;  // the |1> level carries no detuning here

  Eigen::MatrixXcd drive_x = Eigen::MatrixXcd::Zero(3, 3);
  drive_x(0, 1) = drive_x(1, 0) = omega1;
  drive_x(1, 2) = drive_x(2, 1) = omega2;

  Eigen::MatrixXcd drive_y = Eigen::MatrixXcd::Zero(3, 3);
  drive_y(0, 1) = complex<double>(0, omega1);
  drive_y(1, 0) = complex<double>(0, -omega1);
  drive_y(1, 2) = complex<double>(0, omega2);
  drive_y(2, 1) = complex<double>(0, -omega2);

  // NOT on the computational subspace; the leakage row and column stay zero,
  // so the overlap trace only sees the 2x2 block and norm_dim is 2.
  Eigen::MatrixXcd target = Eigen::MatrixXcd::Zero(3, 3);
  target(0, 1) = 1.0;
  target(1, 0) = 1.0;

  InfidelitySpec spec;
  spec.target = target;
  spec.norm_dim = 2.0;
  spec.unit_range = false;

  int s_max = 4;
  if (t_f >= 10.0) {
    s_max = 20;
  } else if (t_f >= 6.0) {
    s_max = 12;
  }

  QuantumInstance inst;
  inst.name = "not-tf" + std::to_string(static_cast<int>(std::lround(t_f)));
  inst.dim = 3;
  inst.h_drift = drift;
  inst.h_controls = {drive_x, drive_y};
  inst.x_init = Eigen::MatrixXcd::Identity(3, 3);
  inst.objective = spec;
  inst.defaults = InstanceDefaults{t_f, n_steps, 0.001, 5, s_max, 1.0};
  return inst;
}

QuantumInstance build_circuit_instance(int n_qubits, const std::vector<CircuitEdge>& edges,
                                       const std::string& target_path, double t_f, int n_steps) {
  if (n_qubits < 1) {
    throw std::invalid_argument("circuit instance needs at least one qubit");
  }
  const int dim = 1 << n_qubits;
  const double j_charge = 0.2 * kPi;
  const double j_flux = 3.0 * kPi;
  const double j_edge = 0.1 * kPi;

  Eigen::Matrix2cd excited = Eigen::Matrix2cd::Zero();
  excited(1, 1) = 1.0;

  std::vector<Eigen::MatrixXcd> drives;
  for (int j = 1; j <= n_qubits; ++j) {
    drives.push_back(j_charge * pauli_embed(sigma_x(), j, n_qubits));
    drives.push_back(j_flux * embed_on_qubit(excited, j, n_qubits));
  }
  for (const CircuitEdge& edge : edges) {
    if (edge.a < 1 || edge.a > n_qubits || edge.b < 1 || edge.b > n_qubits || edge.a == edge.b) {
      throw std::invalid_argument("coupler edge " + std::to_string(edge.a) + "-" +
                                  std::to_string(edge.b) + " is not a pair of distinct qubits");
    }
    drives.push_back(j_edge * (pauli_embed(sigma_x(), edge.a, n_qubits) *
                               pauli_embed(sigma_x(), edge.b, n_qubits)));
  }

  Eigen::MatrixXcd target = read_target_unitary(target_path);
  if (target.rows() != dim) {
    throw std::invalid_argument("target unitary is " + std::to_string(target.rows()) + "x" +
                                std::to_string(target.cols()) + " but the circuit dimension is " +
                                std::to_string(dim));
  }

  InfidelitySpec spec;
  spec.target = target;
  spec.norm_dim = static_cast<double>(dim);
  spec.unit_range = true;

  QuantumInstance inst;
  inst.name = "circuit-q" + std::to_string(n_qubits);
  inst.dim = dim;
  inst.h_drift = Eigen::MatrixXcd::Zero(dim, dim);
  inst.h_controls = std::move(drives);
  inst.x_init = Eigen::MatrixXcd::Identity(dim, dim);
  inst.objective = spec;
  if (n_qubits <= 2) {
    inst.defaults = InstanceDefaults{t_f, n_steps, 0.001, 10, 8, 1.0};
  } else {
    inst.defaults = InstanceDefaults{t_f, n_steps, 0.001, 5, 40, 0.1};
  }
  return inst;
}

QuantumInstance build_random_instance(int n_qubits, int n_controllers, std::uint64_t seed,
                                      double t_f, int n_steps) {
  if (n_controllers < 1) {
    throw std::invalid_argument("random instance needs at least one controller");
  }
  const int dim = 1 << n_qubits;
  Rng rng(seed);
  std::vector<Eigen::MatrixXcd> drives;
  drives.reserve(static_cast<size_t>(n_controllers));
  for (int j = 0; j < n_controllers; ++j) {
    drives.push_back(random_hermitian(dim, rng));
  }

  InfidelitySpec spec;
  spec.target = random_unitary(dim, rng.next_u64());
  spec.norm_dim = static_cast<double>(dim);
  spec.unit_range = true;

  QuantumInstance inst;
  inst.name = "synthetic-q" + std::to_string(n_qubits) + "-n" + std::to_string(n_controllers);
  inst.dim = dim;
  inst.h_drift = Eigen::MatrixXcd::Zero(dim, dim);
  inst.h_controls = std::move(drives);
  inst.x_init = Eigen::MatrixXcd::Identity(dim, dim);
  inst.objective = spec;
  inst.defaults = InstanceDefaults{t_f, n_steps, 0.001, 5, 4, 1.0};
  return inst;
}

Eigen::MatrixXcd random_unitary(int dim, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXcd a(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      a(i, j) = complex<double>(rng.normal(), rng.normal());
    }
  }
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(a);
  Eigen::MatrixXcd q = qr.householderQ();
  const Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Fix the phase convention so the factorization is unique.
  for (int i = 0; i < dim; ++i) {
    const complex<double> rii = r(i, i);
    if (std::abs(rii) > 0.0) {
      q.col(i) *= rii / std::abs(rii);
    }
  }
  return q;
}

namespace {

complex<double> parse_complex_entry(const std::string& token, const std::string& path,
                                    int line_number) {
  const auto fail = [&]() {
    throw std::runtime_error(path + ":" + std::to_string(line_number) +
                             ": malformed complex entry '" + token + "'");
  };
  if (token.size() < 2 || token.back() != 'i') fail();
  const std::string body = token.substr(0, token.size() - 1);
  // Split at the sign of the imaginary part: the rightmost +/- that is
  // neither leading nor part of an exponent.
  size_t split = std::string::npos;
  for (size_t i = body.size(); i-- > 1;) {
    const char c = body[i];
    if ((c == '+' || c == '-') && body[i - 1] != 'e' && body[i - 1] != 'E') {
      split = i;
      break;
    }
  }
  if (split == std::string::npos) fail();
  const std::string real_part = body.substr(0, split);
  const std::string imag_part = body.substr(split);
  try {
    size_t used_real = 0;
    size_t used_imag = 0;
    const double re = std::stod(real_part, &used_real);
    const double im = std::stod(imag_part, &used_imag);
    if (used_real != real_part.size() || used_imag != imag_part.size()) fail();
    return {re, im};
  } catch (const std::logic_error&) {
    fail();
  }
  return {};  // unreachable
}

}  // namespace

Eigen::MatrixXcd read_target_unitary(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open target file: " + path);
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error(path + ":1: missing 'dim d' header");
  }
  std::istringstream header(line);
  std::string tag;
  int dim = 0;
  if (!(header >> tag >> dim) || tag != "dim" || dim < 1) {
    throw std::runtime_error(path + ":1: expected 'dim d', got '" + line + "'");
  }
  Eigen::MatrixXcd u(dim, dim);
  for (int row = 0; row < dim; ++row) {
    const int line_number = row + 2;
    if (!std::getline(in, line)) {
      throw std::runtime_error(path + ":" + std::to_string(line_number) + ": missing matrix row");
    }
    std::istringstream entries(line);
    std::string token;
    for (int col = 0; col < dim; ++col) {
      if (!(entries >> token)) {
        throw std::runtime_error(path + ":" + std::to_string(line_number) + ": expected " +
                                 std::to_string(dim) + " entries, got " + std::to_string(col));
      }
      u(row, col) = parse_complex_entry(token, path, line_number);
    }
    if (entries >> token) {
      throw std::runtime_error(path + ":" + std::to_string(line_number) + ": trailing content '" +
                               token + "'");
    }
  }
  const double err = unitarity_error(u);
  if (err > kTargetUnitaryTol) {
    throw std::runtime_error("target matrix is not unitary (max |U^dag U - I| = " +
                             std::to_string(err) + ")");
  }
  return u;
}

void write_target_unitary(const std::string& path, const Eigen::MatrixXcd& u) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write target file: " + path);
  }
  out << "dim " << u.rows() << "\n";
  char buffer[96];
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    for (Eigen::Index j = 0; j < u.cols(); ++j) {
      std::snprintf(buffer, sizeof(buffer), "%.17g%+.17gi", u(i, j).real(), u(i, j).imag());
      out << buffer << (j + 1 == u.cols() ? "" : " ");
    }
    out << "\n";
  }
}

}  // namespace qcp
