#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "peec/error.hpp"
#include "peec/io.hpp"

namespace peec {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

[[noreturn]] void schema(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::SchemaError, field + ": " + what);
}

void reject_unknown(const json& obj, const std::string& where, const std::set<std::string>& known) {
  for (const auto& [key, _] : obj.items()) {
    if (!known.contains(key)) schema(where + "." + key, "unknown key");
  }
}

const json& require(const json& obj, const std::string& where, const std::string& key) {
  auto it = obj.find(key);
  if (it == obj.end()) schema(where + "." + key, "missing");
  return *it;
}

double number(const json& v, const std::string& field) {
  if (!v.is_number()) schema(field, "expected a number");
  return v.get<double>();
}

double price(const json& v, const std::string& field) {
  if (v.is_string()) {
    if (v.get<std::string>() == "inf") return kInfinitePrice;
    schema(field, "expected a number or \"inf\"");
  }
  return number(v, field);
}

Matrix matrix(const json& v, const std::string& field) {
  if (!v.is_array() || v.empty()) schema(field, "expected a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(v.size());
  Eigen::Index cols = -1;
  Matrix M;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = v[static_cast<std::size_t>(i)];
    if (!row.is_array() || row.empty()) schema(field, "expected a non-empty array of rows");
    if (cols < 0) {
      cols = static_cast<Eigen::Index>(row.size());
      M.resize(rows, cols);
    } else if (static_cast<Eigen::Index>(row.size()) != cols) {
      schema(field, "ragged rows");
    }
    for (Eigen::Index j = 0; j < cols; ++j) {
      M(i, j) = number(row[static_cast<std::size_t>(j)], field);
    }
  }
  return M;
}

Vector vector(const json& v, const std::string& field) {
  if (!v.is_array() || v.empty()) schema(field, "expected a non-empty array");
  Vector x(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) x(static_cast<Eigen::Index>(i)) = number(v[i], field);
  return x;
}

template <class Int>
Int integer(const json& v, const std::string& field, Int lo) {
  if (!v.is_number_integer()) schema(field, "expected an integer");
  if (v.is_number_unsigned()) {
    const auto u = v.get<std::uint64_t>();
    if (lo > 0 && u < static_cast<std::uint64_t>(lo)) schema(field, "out of range");
    return static_cast<Int>(u);
  }
  const auto s = v.get<std::int64_t>();
  if (s < static_cast<std::int64_t>(lo)) schema(field, "out of range");
  return static_cast<Int>(s);
}

ordered_json matrix_json(const Matrix& M) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

ordered_json price_json(double O) { return std::isinf(O) ? ordered_json("inf") : ordered_json(O); }

}  // namespace

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    std::size_t column = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::ostringstream os;
    os << "line " << line << ", column " << column << ": " << e.what();
    throw Error(ErrorCode::ParseError, os.str());
  }
  if (!root.is_object()) schema("(root)", "expected an object");
  reject_unknown(root, "(root)", {"game", "numerics", "experiment"});

  RunConfig cfg;
  const json& g = require(root, "(root)", "game");
  if (!g.is_object()) schema("game", "expected an object");
  reject_unknown(g, "game", {"A", "Bp", "Be", "C", "Q", "QT", "Rp", "Re", "Op", "Oe", "T", "x0"});
  GameSpec& s = cfg.game;
  s.A = matrix(require(g, "game", "A"), "game.A");
  s.Bp = matrix(require(g, "game", "Bp"), "game.Bp");
  s.Be = matrix(require(g, "game", "Be"), "game.Be");
  s.C = matrix(require(g, "game", "C"), "game.C");
  s.Q = matrix(require(g, "game", "Q"), "game.Q");
  s.QT = matrix(require(g, "game", "QT"), "game.QT");
  s.Rp = matrix(require(g, "game", "Rp"), "game.Rp");
  s.Re = matrix(require(g, "game", "Re"), "game.Re");
  s.Op = price(require(g, "game", "Op"), "game.Op");
  s.Oe = price(require(g, "game", "Oe"), "game.Oe");
  s.T = number(require(g, "game", "T"), "game.T");
  s.x0 = vector(require(g, "game", "x0"), "game.x0");

  if (auto it = root.find("numerics"); it != root.end()) {
    if (!it->is_object()) schema("numerics", "expected an object");
    reject_unknown(*it, "numerics", {"riccati_steps", "sim_steps", "eps", "seed"});
    if (it->contains("riccati_steps")) {
      cfg.numerics.riccati_steps = integer<int>((*it)["riccati_steps"], "numerics.riccati_steps", 2);
    }
    if (it->contains("sim_steps")) {
      cfg.numerics.sim_steps = integer<int>((*it)["sim_steps"], "numerics.sim_steps", 1);
    }
    if (it->contains("eps")) {
      cfg.numerics.eps = number((*it)["eps"], "numerics.eps");
      if (!(cfg.numerics.eps > 0.0)) schema("numerics.eps", "must be positive");
    }
    if (it->contains("seed")) {
      cfg.numerics.seed = integer<std::uint64_t>((*it)["seed"], "numerics.seed", 0);
    }
  }
  if (auto it = root.find("experiment"); it != root.end()) {
    if (!it->is_object()) schema("experiment", "expected an object");
    reject_unknown(*it, "experiment", {"monte_carlo_paths", "threads"});
    if (it->contains("monte_carlo_paths")) {
      cfg.experiment.monte_carlo_paths =
          integer<int>((*it)["monte_carlo_paths"], "experiment.monte_carlo_paths", 2);
    }
    if (it->contains("threads")) {
      cfg.experiment.threads = integer<int>((*it)["threads"], "experiment.threads", 0);
    }
  }
  cfg.game = validate_spec(std::move(cfg.game));
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string config_to_json(const RunConfig& c) {
  const GameSpec& s = c.game;
  ordered_json g;
  g["A"] = matrix_json(s.A);
  g["Bp"] = matrix_json(s.Bp);
  g["Be"] = matrix_json(s.Be);
  g["C"] = matrix_json(s.C);
  g["Q"] = matrix_json(s.Q);
  g["QT"] = matrix_json(s.QT);
  g["Rp"] = matrix_json(s.Rp);
  g["Re"] = matrix_json(s.Re);
  g["Op"] = price_json(s.Op);
  g["Oe"] = price_json(s.Oe);
  g["T"] = s.T;
  g["x0"] = ordered_json(std::vector<double>(s.x0.data(), s.x0.data() + s.x0.size()));
  ordered_json root;
  root["game"] = std::move(g);
  root["numerics"] = {{"riccati_steps", c.numerics.riccati_steps},
                      {"sim_steps", c.numerics.sim_steps},
                      {"eps", c.numerics.eps},
                      {"seed", c.numerics.seed}};
  root["experiment"] = {{"monte_carlo_paths", c.experiment.monte_carlo_paths},
                        {"threads", c.experiment.threads}};
  return root.dump(2) + "\n";
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

}  // namespace peec
