// Copyright 2026 The lqem Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lqem/pauli.hpp"

namespace lqem {

namespace {

using nlohmann::json;

PauliSum build(const std::vector<PauliTerm>& terms) {
  if (terms.empty()) throw ParseError("Pauli sum has no terms");
  const int n = terms.front().n_qubits();
  PauliSum s(n);
  for (const auto& t : terms) s.add(t);
  return s;
}

void check_width(const PauliTerm& t, const std::vector<PauliTerm>& seen,
                 const std::string& where) {
  if (!seen.empty() && seen.front().n_qubits() != t.n_qubits()) {
    throw ParseError(where + ": label length " + std::to_string(t.n_qubits()) +
                     " differs from " + std::to_string(seen.front().n_qubits()));
  }
}

PauliSum parse_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("Pauli JSON: ") + e.what());
  }
  if (doc.is_object() && doc.contains("terms")) doc = doc.at("terms");
  if (!doc.is_array()) throw ParseError("Pauli JSON: expected a list of records");
  std::vector<PauliTerm> terms;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const std::string where = "Pauli JSON record " + std::to_string(i);
    const auto& rec = doc[i];
    if (!rec.is_object() || !rec.contains("label") || !rec.contains("coeff_re")) {
      throw ParseError(where + ": needs \"label\" and \"coeff_re\"");
    }
    try {
      const double re = rec.at("coeff_re").get<double>();
      const double im = rec.value("coeff_im", 0.0);
      auto t = PauliTerm::from_label(rec.at("label").get<std::string>(), {re, im});
      check_width(t, terms, where);
      terms.push_back(t);
    } catch (const json::exception& e) {
      throw ParseError(where + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw ParseError(where + ": " + e.what());
    } catch (const ParseError& e) {
      throw ParseError(where + ": " + e.what());
    }
  }
  return build(terms);
}

PauliSum parse_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::vector<PauliTerm> terms;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string label;
    if (!(ls >> label)) continue;
    const std::string where = "line " + std::to_string(lineno);
    double re = 0.0;
    double im = 0.0;
    if (!(ls >> re)) throw ParseError(where + ": missing real coefficient");
    if (!(ls >> im)) {
      if (!ls.eof()) throw ParseError(where + ": bad imaginary coefficient");
      im = 0.0;
    }
    std::string extra;
    if (ls.clear(), ls >> extra) throw ParseError(where + ": trailing token '" + extra + "'");
    try {
      auto t = PauliTerm::from_label(label, {re, im});
      check_width(t, terms, where);
      terms.push_back(t);
    } catch (const DimensionError& e) {
      throw ParseError(where + ": " + e.what());
    } catch (const ParseError& e) {
      throw ParseError(where + ": " + e.what());
    }
  }
  return build(terms);
}

}  // namespace

std::string to_json_string(const PauliSum& s) {
  json doc = json::array();
  for (const auto& t : s.term_list()) {
    doc.push_back({{"label", t.label()},
                   {"coeff_re", t.coefficient().real()},
                   {"coeff_im", t.coefficient().imag()}});
  }
  return doc.dump(2) + "\n";
}

PauliSum parse_pauli_sum(std::string_view text) {
  for (const char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    if (c == '[' || c == '{') return parse_json(text);
    break;
  }
  return parse_text(text);
}

PauliSum read_pauli_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open Pauli file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_pauli_sum(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_pauli_file(const PauliSum& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write Pauli file '" + path + "'");
  out << to_json_string(s);
}

}  // namespace lqem
