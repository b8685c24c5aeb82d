#include "peec/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "peec/error.hpp"

namespace peec {
namespace {

constexpr double kDefinitenessTol = 1e-10;
constexpr double kSymmetryTol = 1e-10;
constexpr double kDominanceTol = 1e-9;

std::string shape(const Matrix& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

void require_finite(const Matrix& m, const char* name) {
  if (!m.allFinite()) {
    throw Error(ErrorCode::NonFiniteEntry, std::string(name) + " has a non-finite entry");
  }
}

void require_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols, const char* name) {
  if (m.rows() != rows || m.cols() != cols) {
    std::ostringstream os;
    os << name << " is " << shape(m) << ", expected " << rows << "x" << cols;
    throw Error(ErrorCode::DimensionMismatch, os.str());
  }
}

// Symmetric, and eigenvalues >= -tol*scale (semi) or > tol*scale (definite).
void require_definite(const Matrix& m, const char* name, bool strict) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * scale) {
    throw Error(ErrorCode::NotPositiveDefinite, std::string(name) + " is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  const Vector& ev = es.eigenvalues();
  const double largest = ev.cwiseAbs().maxCoeff();
  const double tol = kDefinitenessTol * largest;
  const double smallest = ev.minCoeff();
  const bool ok = strict ? (smallest > tol && largest > 0.0) : (smallest >= -tol);
  if (!ok) {
    std::ostringstream os;
    os << name << (strict ? " is not positive definite" : " is not positive semi-definite")
       << " (smallest eigenvalue " << smallest << ")";
    throw Error(ErrorCode::NotPositiveDefinite, os.str());
  }
}

}  // namespace

GameSpec validate_spec(GameSpec raw) {
  const Eigen::Index n = raw.A.rows();
  if (n == 0) {
    throw Error(ErrorCode::DimensionMismatch, "A is empty");
  }
  const Eigen::Index mp = raw.Bp.cols();
  const Eigen::Index me = raw.Be.cols();
  const Eigen::Index q = raw.C.cols();

  require_shape(raw.A, n, n, "A");
  require_shape(raw.Bp, n, mp, "Bp");
  require_shape(raw.Be, n, me, "Be");
  require_shape(raw.C, n, q, "C");
  require_shape(raw.Q, n, n, "Q");
  require_shape(raw.QT, n, n, "QT");
  require_shape(raw.Rp, mp, mp, "Rp");
  require_shape(raw.Re, me, me, "Re");
  if (raw.x0.size() != n) {
    std::ostringstream os;
    os << "x0 has length " << raw.x0.size() << ", expected " << n;
    throw Error(ErrorCode::DimensionMismatch, os.str());
  }

  require_finite(raw.A, "A");
  require_finite(raw.Bp, "Bp");
  require_finite(raw.Be, "Be");
  require_finite(raw.C, "C");
  require_finite(raw.Q, "Q");
  require_finite(raw.QT, "QT");
  require_finite(raw.Rp, "Rp");
  require_finite(raw.Re, "Re");
  require_finite(raw.x0, "x0");
  if (std::isnan(raw.Op) || std::isnan(raw.Oe)) {
    throw Error(ErrorCode::NonFiniteEntry, "observation price is NaN");
  }
  if (!std::isfinite(raw.T)) {
    throw Error(ErrorCode::NonFiniteEntry, "horizon T is not finite");
  }
  if (raw.T <= 0.0) {
    throw Error(ErrorCode::NonPositiveHorizon, "horizon T must be positive");
  }
  if (raw.Op < 0.0 || raw.Oe < 0.0) {
    throw Error(ErrorCode::NegativePrice, "observation prices must be nonnegative");
  }

  require_definite(raw.Q, "Q", false);
  require_definite(raw.QT, "QT", false);
  require_definite(raw.Rp, "Rp", true);
  require_definite(raw.Re, "Re", true);
  return raw;
}

const char* to_string(Dominance d) {
  switch (d) {
    case Dominance::PursuerDominant: return "PursuerDominant";
    case Dominance::Equal: return "Equal";
    case Dominance::NotDominant: return "NotDominant";
  }
  return "Unknown";
}

Matrix maneuverability_gap(const GameSpec& spec) {
  const Matrix pursuer = spec.Bp * spec.Rp.llt().solve(spec.Bp.transpose());
  const Matrix evader = spec.Be * spec.Re.llt().solve(spec.Be.transpose());
  const Matrix gap = pursuer - evader;
  return 0.5 * (gap + gap.transpose());
}

// The gap only has to be positive semi-definite for the Riccati solution to
// stay bounded; directions the controls cannot reach (positions of a double
// integrator, say) legitimately give zero eigenvalues.
DominanceClass classify_dominance(const GameSpec& spec) {
  DominanceClass out;
  out.gap = maneuverability_gap(spec);
  Eigen::SelfAdjointEigenSolver<Matrix> es(out.gap, Eigen::EigenvaluesOnly);
  const Vector& ev = es.eigenvalues();
  out.tolerance = kDominanceTol * (1.0 + ev.cwiseAbs().maxCoeff());
  if (ev.minCoeff() < -out.tolerance) {
    out.kind = Dominance::NotDominant;
  } else if (ev.maxCoeff() > out.tolerance) {
    out.kind = Dominance::PursuerDominant;
  } else {
    out.kind = Dominance::Equal;
  }
  return out;
}

}  // namespace peec
