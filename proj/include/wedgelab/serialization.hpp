#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <utility>

#include <json.hpp>

#include "wedgelab/separability.hpp"
#include "wedgelab/states.hpp"
#include "wedgelab/stiefel.hpp"
#include "wedgelab/types.hpp"
#include "wedgelab/wedge.hpp"

// JSON wire formats. Matrices are serialized row-major as
//   {"rows": R, "cols": C, "data": [[re, im], ...]};
// parsers reject NaN/Inf entries and length mismatches.

namespace wedgelab {

using nlohmann::json;

inline json matrix_to_json(const Matrix& a) {
  json data = json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      data.push_back({a(i, j).real(), a(i, j).imag()});
    }
  }
  return json{{"rows", a.rows()}, {"cols", a.cols()}, {"data", std::move(data)}};
}

inline Matrix matrix_from_json(const json& j) {
  require(j.is_object() && j.contains("rows") && j.contains("cols") && j.contains("data"),
          "matrix JSON must have rows, cols and data");
  require(j["rows"].is_number_integer() && j["cols"].is_number_integer(),
          "matrix JSON: rows and cols must be integers");
  const auto rows = j["rows"].get<long>();
  const auto cols = j["cols"].get<long>();
  require(rows >= 0 && cols >= 0, "matrix JSON: negative dimensions");
  const json& data = j["data"];
  require(data.is_array() && static_cast<long>(data.size()) == rows * cols,
          "matrix JSON: data length does not match rows*cols");
  Matrix a(rows, cols);
  long flat = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j2 = 0; j2 < cols; ++j2, ++flat) {
      const json& entry = data[static_cast<std::size_t>(flat)];
      require(entry.is_array() && entry.size() == 2 && entry[0].is_number() && entry[1].is_number(),
              "matrix JSON: each entry must be a [re, im] pair");
      const double re = entry[0].get<double>();
      const double im = entry[1].get<double>();
      require(std::isfinite(re) && std::isfinite(im), "matrix JSON: non-finite entry");
      a(i, j2) = Complex(re, im);
    }
  }
  return a;
}

inline json vector_to_json(const Vector& v) {
  return matrix_to_json(Matrix(v));
}

inline Vector vector_from_json(const json& j) {
  const Matrix a = matrix_from_json(j);
  require(a.cols() == 1, "vector JSON must have a single column");
  return Vector(a.col(0));
}

inline json tuple_to_json(const IsometryTuple& v) {
  json components = json::array();
  for (const Matrix& c : v.components) components.push_back(matrix_to_json(c));
  return json{{"n", v.n}, {"m", v.m}, {"r", v.r}, {"components", std::move(components)}};
}

inline IsometryTuple tuple_from_json(const json& j) {
  require(j.is_object() && j.contains("n") && j.contains("m") && j.contains("r") &&
              j.contains("components"),
          "tuple JSON must have n, m, r and components");
  IsometryTuple v;
  v.n = j["n"].get<int>();
  v.m = j["m"].get<int>();
  v.r = j["r"].get<int>();
  require(j["components"].is_array() && static_cast<int>(j["components"].size()) == v.r,
          "tuple JSON: components length does not match r");
  for (const json& c : j["components"]) v.components.push_back(matrix_from_json(c));
  v.validate();
  return v;
}

/// Density matrix with optional bipartite structure: the matrix fields plus
/// {"dims": [m, n]} when the splitting matters.
inline json density_to_json(const DensityMatrix& rho,
                            std::optional<std::pair<int, int>> dims = std::nullopt) {
  json j = matrix_to_json(rho.matrix());
  if (dims) j["dims"] = {dims->first, dims->second};
  return j;
}

inline DensityMatrix density_from_json(const json& j) {
  return DensityMatrix::from_matrix(matrix_from_json(j));
}

inline std::optional<std::pair<int, int>> dims_from_json(const json& j) {
  if (!j.contains("dims")) return std::nullopt;
  const json& d = j["dims"];
  require(d.is_array() && d.size() == 2, "dims must be a [m, n] pair");
  return std::make_pair(d[0].get<int>(), d[1].get<int>());
}

inline json decomposition_to_json(const ProductDecomposition& d) {
  json terms = json::array();
  for (const ProductTerm& t : d.terms) {
    terms.push_back(json{{"weight", t.weight},
                         {"xi", vector_to_json(t.xi)},
                         {"eta", vector_to_json(t.eta)}});
  }
  return json{{"terms", std::move(terms)}};
}

inline ProductDecomposition decomposition_from_json(const json& j) {
  require(j.is_object() && j.contains("terms") && j["terms"].is_array(),
          "decomposition JSON must have a terms array");
  ProductDecomposition d;
  for (const json& t : j["terms"]) {
    require(t.contains("weight") && t.contains("xi") && t.contains("eta"),
            "decomposition term must have weight, xi and eta");
    ProductTerm term;
    term.weight = t["weight"].get<double>();
    require(std::isfinite(term.weight) && term.weight >= 0.0,
            "decomposition weight must be finite and nonnegative");
    term.xi = vector_from_json(t["xi"]);
    term.eta = vector_from_json(t["eta"]);
    d.terms.push_back(std::move(term));
  }
  return d;
}

inline json wedge_invariant_to_json(const WedgeInvariant& wi) {
  return json{{"w", wi.w},
              {"w_star", wi.w_star},
              {"singular_values_w", wi.sv_w},
              {"singular_values_w_star", wi.sv_w_star},
              {"margin_w", wi.margin_w()},
              {"margin_w_star", wi.margin_w_star()},
              {"rel_tol", wi.rel_tol}};
}

inline json verdict_to_json(const SeparabilityVerdict& verdict) {
  json tests = json::array();
  for (const TestEvidence& e : verdict.reasons) {
    tests.push_back(json{{"name", e.name}, {"value", e.value}});
  }
  return json{{"status", to_string(verdict.status)},
              {"tests", std::move(tests)},
              {"exact", verdict.exact}};
}

inline json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError("invalid JSON in " + path + ": " + e.what());
  }
  return j;
}

inline void save_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write file: " + path);
  out << text;
}

}  // namespace wedgelab
