// Copyright 2026 The Ignis Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "ignis/value.hpp"

namespace ignis::lambda {

using VarMap = std::map<std::string, Value>;

struct Node;

/// A parsed text lambda: up to two named parameters and an expression body.
///
/// Grammar (EBNF):
///   expr    = "if" expr "then" expr "else" expr | or ;
///   or      = and { "||" and } ;
///   and     = eq { "&&" eq } ;
///   eq      = rel { ( "==" | "!=" ) rel } ;
///   rel     = add { ( "<" | "<=" | ">" | ">=" ) add } ;
///   add     = mul { ( "+" | "-" ) mul } ;
///   mul     = unary { ( "*" | "/" | "%" ) unary } ;
///   unary   = ( "-" | "!" | "fst" | "snd" | "len" ) unary | primary ;
///   primary = INT | FLOAT | STRING | "true" | "false" | "null" | IDENT
///           | "$" IDENT | "(" expr ")" | "(" expr "," expr ")"
///           | "[" [ expr { "," expr } ] "]" ;
class Lambda {
 public:
  Lambda() = default;

  /// kParse with 1-based line and column on syntax errors; kArityMismatch
  /// for more than two parameters or an undeclared identifier in the body.
  static Lambda parse(std::vector<std::string> params, std::string_view body);

  int arity() const { return static_cast<int>(params_.size()); }
  const std::vector<std::string>& params() const { return params_; }
  const std::string& body() const { return body_; }

  /// Strict, side-effect free evaluation. `$name` reads vars. Errors:
  /// kArityMismatch, kType, kDivisionByZero, kUnknownContextVariable.
  Value eval(const std::vector<Value>& args, const VarMap& vars = {}) const;

  /// Wire form: Pair(List[Str param...], Str body).
  Value toValue() const;
  static Lambda fromValue(const Value& v);

 private:
  std::vector<std::string> params_;
  std::string body_;
  std::shared_ptr<const Node> root_;
};

}  // namespace ignis::lambda
