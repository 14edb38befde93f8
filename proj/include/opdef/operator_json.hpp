#pragma once

// JSON (de)serialization for operator documents.
//
// Document shape:
//   { "field": "real" | "complex", "operator": <node> }
// where <node> is discriminated by "kind".  Real scalars are JSON numbers;
// complex scalars are two-element arrays [re, im] (a bare number is accepted
// on input as a real scalar).  Vectors are arrays of scalars.  Serialization
// uses shortest-round-trip number formatting, so parse(dump(x)) == x holds
// bit-for-bit.

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "core.hpp"
#include "operator_spec.hpp"
#include "vector.hpp"

namespace opdef {

using nlohmann::json;

namespace detail {

[[noreturn]] inline void bad_doc(const std::string& msg) {
  throw std::invalid_argument("operator document: " + msg);
}

inline double get_number(const json& j, const char* what) {
  if (!j.is_number()) bad_doc(std::string(what) + " must be a number");
  return j.get<double>();
}

inline std::size_t get_index(const json& j, const char* what) {
  if (!j.is_number_integer() || j.get<std::int64_t>() < 0)
    bad_doc(std::string(what) + " must be a non-negative integer");
  return static_cast<std::size_t>(j.get<std::int64_t>());
}

inline const json& get_field(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) bad_doc(std::string("missing \"") + key + "\"");
  return *it;
}

template <class T>
T get_scalar(const json& j, const char* what);

template <>
inline double get_scalar<double>(const json& j, const char* what) {
  return get_number(j, what);
}

template <>
inline cplx get_scalar<cplx>(const json& j, const char* what) {
  if (j.is_number()) return cplx(j.get<double>(), 0.0);
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return cplx(j[0].get<double>(), j[1].get<double>());
  bad_doc(std::string(what) + " must be a number or [re, im]");
}

inline json scalar_to_json(double v) { return json(v); }
inline json scalar_to_json(const cplx& v) { return json::array({v.real(), v.imag()}); }

template <class T>
DenseVector<T> get_vector(const json& j, const char* what) {
  if (!j.is_array()) bad_doc(std::string(what) + " must be an array");
  DenseVector<T> v = DenseVector<T>::zeros(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v.entries[i] = get_scalar<T>(j[i], what);
  return v;
}

template <class T>
json vector_to_json(const DenseVector<T>& v) {
  json a = json::array();
  for (const auto& x : v.entries) a.push_back(scalar_to_json(x));
  return a;
}

}  // namespace detail

template <class T>
SpecPtr<T> operator_from_json(const json& j) {
  using Spec = OperatorSpec<T>;
  if (!j.is_object()) detail::bad_doc("operator node must be an object");
  const std::string kind = detail::get_field(j, "kind").get<std::string>();

  if (kind == "identity") return Spec::identity();
  if (kind == "zero") return Spec::zero();
  if (kind == "shift_left") return Spec::shift_left();
  if (kind == "shift_right") return Spec::shift_right();

  if (kind == "diagonal") {
    DiagonalData<T> d;
    if (j.contains("prefix")) {
      const auto v = detail::get_vector<T>(j["prefix"], "diagonal prefix");
      d.prefix = v.entries;
    }
    const std::string tail = j.value("tail", std::string("zero"));
    if (tail == "zero") d.tail = DiagonalTailRule::zero;
    else if (tail == "constant") d.tail = DiagonalTailRule::constant;
    else if (tail == "reciprocal") d.tail = DiagonalTailRule::reciprocal;
    else detail::bad_doc("unknown diagonal tail rule \"" + tail + "\"");
    if (d.tail == DiagonalTailRule::constant)
      d.tail_constant = detail::get_scalar<T>(detail::get_field(j, "tail_constant"), "tail_constant");
    return Spec::diagonal(std::move(d));
  }

  if (kind == "coordinate_subsequence") {
    SubsequenceData s;
    if (j.contains("prefix")) {
      if (!j["prefix"].is_array()) detail::bad_doc("subsequence prefix must be an array");
      for (const auto& e : j["prefix"]) s.prefix.push_back(detail::get_index(e, "subsequence prefix entry"));
    }
    s.start = detail::get_index(detail::get_field(j, "start"), "start");
    s.step = detail::get_index(detail::get_field(j, "step"), "step");
    return Spec::subsequence(std::move(s));
  }

  if (kind == "finite_rank") {
    FiniteRankData<T> f;
    const json& pairs = detail::get_field(j, "pairs");
    if (!pairs.is_array()) detail::bad_doc("finite_rank pairs must be an array");
    for (const auto& p : pairs) {
      RankOnePair<T> pr;
      pr.z = detail::get_vector<T>(detail::get_field(p, "z"), "finite_rank z");
      pr.e = detail::get_vector<T>(detail::get_field(p, "e"), "finite_rank e");
      f.pairs.push_back(std::move(pr));
    }
    return Spec::finite_rank(std::move(f));
  }

  if (kind == "projection") {
    ProjectionData d;
    const std::string target = detail::get_field(j, "target").get<std::string>();
    if (target == "finite_set") {
      d.target = ProjectionTargetKind::finite_set;
      const json& idx = detail::get_field(j, "indices");
      if (!idx.is_array()) detail::bad_doc("projection indices must be an array");
      for (const auto& e : idx) d.indices.push_back(detail::get_index(e, "projection index"));
    } else if (target == "arithmetic_set" || target == "complement_of_arithmetic_set") {
      d.target = target == "arithmetic_set" ? ProjectionTargetKind::arithmetic_set
                                            : ProjectionTargetKind::complement_of_arithmetic_set;
      d.start = detail::get_index(detail::get_field(j, "start"), "start");
      d.step = detail::get_index(detail::get_field(j, "step"), "step");
    } else {
      detail::bad_doc("unknown projection target \"" + target + "\"");
    }
    return Spec::projection(std::move(d));
  }

  if (kind == "scale")
    return Spec::scale(detail::get_scalar<T>(detail::get_field(j, "factor"), "factor"),
                       operator_from_json<T>(detail::get_field(j, "inner")));
  if (kind == "sum")
    return Spec::sum(operator_from_json<T>(detail::get_field(j, "left")),
                     operator_from_json<T>(detail::get_field(j, "right")));
  if (kind == "compose")
    return Spec::compose(operator_from_json<T>(detail::get_field(j, "outer")),
                         operator_from_json<T>(detail::get_field(j, "inner")));
  if (kind == "adjoint") return Spec::adjoint(operator_from_json<T>(detail::get_field(j, "inner")));
  if (kind == "direct_sum")
    return Spec::direct_sum(operator_from_json<T>(detail::get_field(j, "left")),
                            operator_from_json<T>(detail::get_field(j, "right")));

  detail::bad_doc("unknown operator kind \"" + kind + "\"");
}

template <class T>
json operator_to_json(const OperatorSpec<T>& op) {
  json j;
  j["kind"] = op_kind_name(op.kind());
  switch (op.kind()) {
    case OpKind::identity:
    case OpKind::zero:
    case OpKind::shift_left:
    case OpKind::shift_right:
      break;
    case OpKind::diagonal: {
      const auto& d = op.diagonal_data();
      json prefix = json::array();
      for (const auto& v : d.prefix) prefix.push_back(detail::scalar_to_json(v));
      j["prefix"] = std::move(prefix);
      j["tail"] = d.tail == DiagonalTailRule::zero
                      ? "zero"
                      : d.tail == DiagonalTailRule::constant ? "constant" : "reciprocal";
      if (d.tail == DiagonalTailRule::constant)
        j["tail_constant"] = detail::scalar_to_json(d.tail_constant);
      break;
    }
    case OpKind::coordinate_subsequence: {
      const auto& s = op.subsequence_data();
      j["prefix"] = s.prefix;
      j["start"] = s.start;
      j["step"] = s.step;
      break;
    }
    case OpKind::finite_rank: {
      json pairs = json::array();
      for (const auto& pr : op.finite_rank_data().pairs) {
        json p;
        p["z"] = detail::vector_to_json(pr.z);
        p["e"] = detail::vector_to_json(pr.e);
        pairs.push_back(std::move(p));
      }
      j["pairs"] = std::move(pairs);
      break;
    }
    case OpKind::projection: {
      const auto& d = op.projection_data();
      switch (d.target) {
        case ProjectionTargetKind::finite_set:
          j["target"] = "finite_set";
          j["indices"] = d.indices;
          break;
        case ProjectionTargetKind::arithmetic_set:
          j["target"] = "arithmetic_set";
          j["start"] = d.start;
          j["step"] = d.step;
          break;
        case ProjectionTargetKind::complement_of_arithmetic_set:
          j["target"] = "complement_of_arithmetic_set";
          j["start"] = d.start;
          j["step"] = d.step;
          break;
      }
      break;
    }
    case OpKind::scale:
      j["factor"] = detail::scalar_to_json(op.factor());
      j["inner"] = operator_to_json(*op.child_a());
      break;
    case OpKind::sum:
      j["left"] = operator_to_json(*op.child_a());
      j["right"] = operator_to_json(*op.child_b());
      break;
    case OpKind::compose:
      j["outer"] = operator_to_json(*op.child_a());
      j["inner"] = operator_to_json(*op.child_b());
      break;
    case OpKind::adjoint:
      j["inner"] = operator_to_json(*op.child_a());
      break;
    case OpKind::direct_sum:
      j["left"] = operator_to_json(*op.child_a());
      j["right"] = operator_to_json(*op.child_b());
      break;
  }
  return j;
}

// A parsed document: exactly one of the two pointers is set.
struct ParsedOperator {
  Field field = Field::real;
  SpecPtr<double> real_spec;
  SpecPtr<cplx> complex_spec;
};

inline ParsedOperator parse_operator_document(const json& doc) {
  if (!doc.is_object()) detail::bad_doc("document must be an object");
  ParsedOperator out;
  const std::string field = doc.value("field", std::string("real"));
  if (field == "real") out.field = Field::real;
  else if (field == "complex") out.field = Field::complex;
  else detail::bad_doc("unknown field \"" + field + "\"");
  const json& node = detail::get_field(doc, "operator");
  if (out.field == Field::real) out.real_spec = operator_from_json<double>(node);
  else out.complex_spec = operator_from_json<cplx>(node);
  return out;
}

inline ParsedOperator parse_operator_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    detail::bad_doc(std::string("invalid JSON: ") + e.what());
  }
  return parse_operator_document(doc);
}

inline ParsedOperator parse_operator_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) detail::bad_doc("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_operator_text(ss.str());
}

template <class T>
json document_to_json(const OperatorSpec<T>& op) {
  json doc;
  doc["field"] = is_complex_v<T> ? "complex" : "real";
  doc["operator"] = operator_to_json(op);
  return doc;
}

}  // namespace opdef
