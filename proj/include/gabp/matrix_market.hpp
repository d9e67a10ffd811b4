#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstddef>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gabp/sym_system.hpp"

namespace gabp {

/// A parsed Matrix Market file, before it is committed to a symmetric or
/// rectangular representation. For symmetric headers only one triangle is
/// present in `entries`.
struct MatrixMarketData {
  std::size_t rows = 0;
  std::size_t cols = 0;
  bool symmetric = false;
  std::map<std::pair<std::size_t, std::size_t>, double> entries;  // 0-based
};

namespace detail {

inline std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

inline double parse_real(const std::string& tok, std::size_t line_no) {
  try {
    std::size_t used = 0;
    double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw InputError("line " + std::to_string(line_no) + ": '" + tok + "' is not a real number");
  }
}

inline std::size_t parse_index(const std::string& tok, std::size_t line_no) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw InputError("line " + std::to_string(line_no) + ": '" + tok + "' is not an index");
  }
  return v;
}

inline std::string format_real(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace detail

/// Parses coordinate or array Matrix Market text holding real values.
/// Entry order does not matter; a repeated (i,j) is an error.
inline MatrixMarketData parse_matrix_market(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;

  if (!std::getline(in, line)) throw InputError("empty Matrix Market input");
  ++line_no;
  std::istringstream header(line);
  std::string banner, object, format, field, symmetry;
  header >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket") throw InputError("missing %%MatrixMarket banner");
  object = detail::lower(object);
  format = detail::lower(format);
  field = detail::lower(field);
  symmetry = detail::lower(symmetry);
  if (object != "matrix") throw InputError("unsupported Matrix Market object '" + object + "'");
  if (format != "coordinate" && format != "array") {
    throw InputError("unsupported Matrix Market format '" + format + "'");
  }
  if (field != "real" && field != "integer" && field != "double") {
    throw InputError("unsupported Matrix Market field '" + field + "'");
  }
  if (symmetry != "symmetric" && symmetry != "general") {
    throw InputError("unsupported Matrix Market symmetry '" + symmetry + "'");
  }

  MatrixMarketData data;
  data.symmetric = symmetry == "symmetric";
  const bool coordinate = format == "coordinate";

  auto next_data_line = [&](std::vector<std::string>& tokens) {
    while (std::getline(in, line)) {
      ++line_no;
      auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '%') continue;
      tokens.clear();
      std::istringstream ls(line);
      std::string tok;
      while (ls >> tok) tokens.push_back(tok);
      return true;
    }
    return false;
  };

  std::vector<std::string> tok;
  if (!next_data_line(tok)) throw InputError("missing size line");
  if (tok.size() != (coordinate ? 3u : 2u)) {
    throw InputError("line " + std::to_string(line_no) + ": malformed size line");
  }
  data.rows = detail::parse_index(tok[0], line_no);
  data.cols = detail::parse_index(tok[1], line_no);
  if (data.rows == 0 || data.cols == 0) throw InputError("matrix dimensions must be at least 1");
  if (data.symmetric && data.rows != data.cols) {
    throw InputError("symmetric header on a non-square matrix");
  }

  auto insert = [&](std::size_t i, std::size_t j, double v) {
    auto key = std::make_pair(i, j);
    if (data.symmetric && i < j) key = std::make_pair(j, i);
    if (!data.entries.emplace(key, v).second) {
      throw InputError("line " + std::to_string(line_no) + ": duplicate entry (" +
                       std::to_string(i + 1) + "," + std::to_string(j + 1) + ")");
    }
  };

  if (coordinate) {
    const std::size_t nnz = detail::parse_index(tok[2], line_no);
    for (std::size_t k = 0; k < nnz; ++k) {
      if (!next_data_line(tok)) throw InputError("expected " + std::to_string(nnz) + " entries");
      if (tok.size() != 3) throw InputError("line " + std::to_string(line_no) + ": malformed entry");
      std::size_t i = detail::parse_index(tok[0], line_no);
      std::size_t j = detail::parse_index(tok[1], line_no);
      if (i < 1 || j < 1 || i > data.rows || j > data.cols) {
        throw InputError("line " + std::to_string(line_no) + ": index out of range");
      }
      insert(i - 1, j - 1, detail::parse_real(tok[2], line_no));
    }
  } else {
    // Column-major; symmetric arrays list the lower triangle only.
    for (std::size_t j = 0; j < data.cols; ++j) {
      for (std::size_t i = data.symmetric ? j : 0; i < data.rows; ++i) {
        if (!next_data_line(tok) || tok.size() != 1) {
          throw InputError("line " + std::to_string(line_no) + ": malformed array entry");
        }
        insert(i, j, detail::parse_real(tok[0], line_no));
      }
    }
  }
  if (next_data_line(tok)) throw InputError("line " + std::to_string(line_no) + ": trailing data");
  return data;
}

/// Commits parsed data to a SymSystem with the given right-hand side (zero
/// when empty). A general-header file must be exactly symmetric.
inline SymSystem to_sym_system(const MatrixMarketData& data, Vector rhs = {}) {
  if (data.rows != data.cols) throw InputError("matrix is not square");
  if (rhs.empty()) rhs.assign(data.rows, 0.0);
  SymSystem s(Vector(data.rows, 0.0), std::move(rhs));
  for (const auto& [ij, v] : data.entries) {
    const auto [i, j] = ij;
    if (i == j) {
      s.set_diag(i, v);
      continue;
    }
    if (!data.symmetric) {
      auto mirror = data.entries.find({j, i});
      const double other = mirror == data.entries.end() ? 0.0 : mirror->second;
      if (other != v) {
        throw InputError("matrix is not symmetric at (" + std::to_string(i + 1) + "," +
                         std::to_string(j + 1) + ")");
      }
    }
    s.set(i, j, v);
  }
  return s;
}

inline RectMatrix to_rect_matrix(const MatrixMarketData& data) {
  RectMatrix m(data.rows, data.cols);
  for (const auto& [ij, v] : data.entries) {
    m.set(ij.first, ij.second, v);
    if (data.symmetric) m.set(ij.second, ij.first, v);
  }
  return m;
}

inline SymSystem parse_sym_system(std::string_view matrix_text, Vector rhs = {}) {
  return to_sym_system(parse_matrix_market(matrix_text), std::move(rhs));
}

/// Coordinate real symmetric, lower triangle, 17 significant digits.
inline std::string write_matrix_market(const SymSystem& s) {
  std::vector<std::pair<std::pair<std::size_t, std::size_t>, double>> lower;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.diag(i) != 0.0) lower.push_back({{i, i}, s.diag(i)});
  }
  for (const auto& [key, v] : s.offdiag()) lower.push_back({{key.hi, key.lo}, v});
  std::sort(lower.begin(), lower.end(), [](const auto& a, const auto& b) {
    return std::pair(a.first.second, a.first.first) < std::pair(b.first.second, b.first.first);
  });

  std::ostringstream os;
  os << "%%MatrixMarket matrix coordinate real symmetric\n";
  os << s.size() << ' ' << s.size() << ' ' << lower.size() << '\n';
  for (const auto& [ij, v] : lower) {
    os << ij.first + 1 << ' ' << ij.second + 1 << ' ' << detail::format_real(v) << '\n';
  }
  return os.str();
}

inline std::string write_matrix_market(const RectMatrix& m) {
  std::ostringstream os;
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << m.rows() << ' ' << m.cols() << ' ' << m.nonzeros() << '\n';
  for (const auto& [ij, v] : m.entries()) {
    os << ij.first + 1 << ' ' << ij.second + 1 << ' ' << detail::format_real(v) << '\n';
  }
  return os.str();
}

/// One decimal per line; blank lines are ignored.
inline Vector parse_vector(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  Vector v;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tok, extra;
    if (!(ls >> tok)) continue;
    if (ls >> extra) throw InputError("line " + std::to_string(line_no) + ": one value per line expected");
    v.push_back(detail::parse_real(tok, line_no));
  }
  return v;
}

inline std::string write_vector(const Vector& v) {
  std::ostringstream os;
  for (double x : v) os << detail::format_real(x) << '\n';
  return os.str();
}

}  // namespace gabp
