#pragma once

#include <limits>

#include <Eigen/Dense>

namespace peec {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kInfinitePrice = std::numeric_limits<double>::infinity();

/// One instance of the pursuit-evasion game with costly observations.
///
/// The relative state obeys dx = (A x + Bp up - Be ue) dt + C dw on [0, T].
/// The pursuer minimizes, the evader maximizes
///   E[ Op Np - Oe Ne + x(T)' QT x(T) + int x'Qx + up'Rp up - ue'Re ue dt ].
/// An observation price of +infinity means that player never observes.
struct GameSpec {
  Matrix A;
  Matrix Bp;
  Matrix Be;
  Matrix C;
  Matrix Q;
  Matrix QT;
  Matrix Rp;
  Matrix Re;
  double Op = 0.0;
  double Oe = 0.0;
  double T = 1.0;
  Vector x0;

  Eigen::Index state_dim() const { return A.rows(); }
  Eigen::Index pursuer_input_dim() const { return Bp.cols(); }
  Eigen::Index evader_input_dim() const { return Be.cols(); }
  Eigen::Index noise_dim() const { return C.cols(); }
};

/// Checks shapes, finiteness, definiteness and the horizon. Returns the spec
/// unchanged when every check passes; throws peec::Error otherwise.
GameSpec validate_spec(GameSpec raw);

enum class Dominance { PursuerDominant, Equal, NotDominant };

const char* to_string(Dominance d);

struct DominanceClass {
  Matrix gap;  // Bp Rp^-1 Bp' - Be Re^-1 Be'
  Dominance kind = Dominance::Equal;
  double tolerance = 0.0;
};

/// Bp Rp^-1 Bp' - Be Re^-1 Be', symmetrized.
Matrix maneuverability_gap(const GameSpec& spec);

DominanceClass classify_dominance(const GameSpec& spec);

}  // namespace peec
