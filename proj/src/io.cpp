#include "carpenter/io.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include "carpenter/errors.hpp"

namespace carpenter::io {

using nlohmann::json;

namespace {

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("JSON parse error at byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

double number_in_unit(const json& v, const std::string& where) {
  if (!v.is_number()) throw ParseError(where + ": expected a number");
  const double x = v.get<double>();
  if (!(x >= 0.0 && x <= 1.0)) {
    throw ParseError(where + ": value " + format_double(x) + " outside [0,1]");
  }
  return x;
}

double positive_number(const json& obj, const char* key) {
  if (!obj.contains(key) || !obj[key].is_number()) {
    throw ParseError(std::string("tail.") + key + ": expected a number");
  }
  return obj[key].get<double>();
}

std::vector<double> parse_prefix(const json& arr) {
  if (!arr.is_array()) throw ParseError("prefix: expected an array");
  std::vector<double> out;
  out.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    out.push_back(number_in_unit(arr[i], "prefix[" + std::to_string(i) + "]"));
  }
  return out;
}

}  // namespace

DiagonalSpec parse_spec(std::string_view text) {
  const json doc = parse_json(text);
  if (!doc.is_object()) throw ParseError("spec: expected a JSON object");
  DiagonalSpec spec;
  spec.prefix = parse_prefix(doc.value("prefix", json::array()));
  if (doc.contains("tail") && !doc["tail"].is_null()) {
    const json& t = doc["tail"];
    if (!t.is_object() || !t.contains("kind") || !t["kind"].is_string()) {
      throw ParseError("tail: expected an object with a \"kind\" string");
    }
    const std::string kind = t["kind"];
    if (kind == "constant") {
      spec.tail = ConstantTail{number_in_unit(t.value("c", json()), "tail.c")};
    } else if (kind == "power") {
      PowerTail pt;
      pt.c = positive_number(t, "c");
      pt.p = positive_number(t, "p");
      if (!(pt.c > 0.0) || !(pt.p > 0.0)) throw ParseError("tail: c and p must be positive");
      if (t.contains("offset")) {
        if (!t["offset"].is_number_unsigned()) throw ParseError("tail.offset: expected a count");
        pt.offset = t["offset"].get<std::size_t>();
      }
      if (t.contains("complement")) {
        if (!t["complement"].is_boolean()) throw ParseError("tail.complement: expected a bool");
        pt.complement = t["complement"].get<bool>();
      }
      spec.tail = pt;
    } else {
      throw ParseError("tail.kind: unknown kind \"" + kind + "\"");
    }
  }
  try {
    spec.validate();
  } catch (const InvalidInput& e) {
    throw ParseError(e.what());
  }
  return spec;
}

json spec_to_json(const DiagonalSpec& spec) {
  json out{{"prefix", spec.prefix}, {"tail", nullptr}};
  if (const auto* ct = std::get_if<ConstantTail>(&spec.tail)) {
    out["tail"] = {{"kind", "constant"}, {"c", ct->c}};
  } else if (const auto* pt = std::get_if<PowerTail>(&spec.tail)) {
    out["tail"] = {{"kind", "power"}, {"c", pt->c}, {"p", pt->p}};
    if (pt->offset != 0) out["tail"]["offset"] = pt->offset;
    if (pt->complement) out["tail"]["complement"] = true;
  }
  return out;
}

json to_json(const Extended& x) {
  if (x.is_infinite()) return "infinity";
  return x.value();
}

namespace {

json to_json(const TrivialCount& c) {
  if (c.unbounded) return "infinity";
  return c.finite;
}

}  // namespace

json to_json(const KadisonReport& r) {
  json out{{"a", to_json(r.a)},
           {"b", to_json(r.b)},
           {"a_minus_b", nullptr},
           {"num_zeros", to_json(r.num_zeros)},
           {"num_ones", to_json(r.num_ones)},
           {"verdict", to_string(r.verdict)}};
  if (auto diff = r.difference()) {
    out["a_minus_b"] = *diff;
    out["nearest_integer"] = std::round(*diff);
    out["integrality_gap"] = std::abs(*diff - std::round(*diff));
  }
  return out;
}

json to_json(const VerificationReport& r) {
  return {{"dimension", r.dimension},
          {"symmetry_defect", r.symmetry_defect},
          {"idempotence_defect", r.idempotence_defect},
          {"diagonal_max_error", r.diagonal_max_error},
          {"trace", r.trace},
          {"estimated_rank", r.estimated_rank},
          {"tolerance", r.tolerance},
          {"diagonal_tolerance", r.diagonal_tolerance},
          {"symmetry_pass", r.symmetry_pass},
          {"idempotence_pass", r.idempotence_pass},
          {"diagonal_pass", r.diagonal_pass},
          {"pass", r.pass()}};
}

json to_json(const OracleResult& r) {
  return {{"passed", r.passed},
          {"trials", r.trials},
          {"failures", r.failures},
          {"worst_defect", r.worst_defect}};
}

json to_json(const CompletedColumns& c) {
  double worst = 0.0;
  for (std::size_t i = 0; i < c.count; ++i) {
    worst = std::max(worst, std::abs(c.norms_sq[i] - c.targets[i]));
  }
  return {{"count", c.count},
          {"indices", c.indices},
          {"norms_sq", c.norms_sq},
          {"targets", c.targets},
          {"max_error", worst}};
}

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void write_csv(std::ostream& os, MatrixView m) {
  std::string line;
  for (std::size_t i = 0; i < m.n; ++i) {
    line.clear();
    for (std::size_t j = 0; j < m.n; ++j) {
      if (j) line += ',';
      line += format_double(m(i, j));
    }
    line += '\n';
    os << line;
  }
}

DenseMatrix read_csv(std::istream& is) {
  DenseMatrix out;
  std::string line;
  std::size_t lineno = 0;
  std::size_t width = 0;
  std::size_t rows = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t count = 0;
    const char* begin = line.data();
    const char* end = begin + line.size();
    const char* p = begin;
    while (true) {
      while (p < end && *p == ' ') ++p;
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(p, end, v);
      if (ec != std::errc()) {
        throw ParseError("CSV line " + std::to_string(lineno) + ", column " +
                         std::to_string(p - begin + 1) + ": expected a number");
      }
      out.data.push_back(v);
      ++count;
      p = ptr;
      while (p < end && *p == ' ') ++p;
      if (p == end) break;
      if (*p != ',') {
        throw ParseError("CSV line " + std::to_string(lineno) + ", column " +
                         std::to_string(p - begin + 1) + ": expected ','");
      }
      ++p;
    }
    if (rows == 0) {
      width = count;
    } else if (count != width) {
      throw ParseError("CSV line " + std::to_string(lineno) + ": " + std::to_string(count) +
                       " fields, expected " + std::to_string(width));
    }
    ++rows;
  }
  if (rows != width) {
    throw ParseError("CSV: matrix is " + std::to_string(rows) + "x" + std::to_string(width) +
                     ", expected square");
  }
  out.n = rows;
  return out;
}

std::vector<double> parse_diagonal(std::string_view text) {
  const json doc = parse_json(text);
  if (doc.is_array()) return parse_prefix(doc);
  if (doc.is_object()) {
    if (doc.contains("tail") && !doc["tail"].is_null()) {
      throw ParseError("diagonal: a finite list is required (tail must be null)");
    }
    return parse_prefix(doc.value("prefix", json::array()));
  }
  throw ParseError("diagonal: expected an array or a spec object");
}

json row_to_json(const SparseRow& row, long block) {
  json out{{"n", row.n},
           {"support", {row.lo, row.hi()}},
           {"values", row.values},
           {"indices", row.indices}};
  if (block >= 0) out["block"] = block;
  return out;
}

}  // namespace carpenter::io
