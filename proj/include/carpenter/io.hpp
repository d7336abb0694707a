#pragma once

#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "carpenter/carpenter.hpp"
#include "carpenter/diagonal.hpp"
#include "carpenter/matrix.hpp"
#include "carpenter/tetris.hpp"
#include "carpenter/verify.hpp"

namespace carpenter::io {

/// Malformed input text; `what()` includes the position.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// {"prefix":[...], "tail": null | {"kind":"constant","c":x}
///   | {"kind":"power","c":x,"p":y[,"offset":k,"complement":bool]}}
DiagonalSpec parse_spec(std::string_view text);
nlohmann::json spec_to_json(const DiagonalSpec& spec);

/// Infinite values are written as the string "infinity".
nlohmann::json to_json(const Extended& x);
nlohmann::json to_json(const KadisonReport& report);
nlohmann::json to_json(const VerificationReport& report);
nlohmann::json to_json(const OracleResult& result);
nlohmann::json to_json(const CompletedColumns& columns);

/// Shortest decimal with 17 significant digits; round-trips exactly.
std::string format_double(double x);

/// One row per line, comma-separated.
void write_csv(std::ostream& os, MatrixView m);
/// Reads a square matrix; throws ParseError with line and column. Symmetry is
/// not required, so the result is returned row-major with its dimension.
struct DenseMatrix {
  std::size_t n = 0;
  std::vector<double> data;
  MatrixView view() const { return {n, data}; }
};
DenseMatrix read_csv(std::istream& is);

/// A diagonal as either a JSON array or a spec object (prefix only).
std::vector<double> parse_diagonal(std::string_view text);

/// {"n":..,"support":[lo,hi],"values":[..],"indices":[..]} plus "block" when
/// `block` is non-negative.
nlohmann::json row_to_json(const SparseRow& row, long block = -1);

}  // namespace carpenter::io
