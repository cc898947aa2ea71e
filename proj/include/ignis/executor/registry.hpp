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

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ignis/executor/context.hpp"
#include "ignis/lambda/lambda.hpp"
#include "ignis/value.hpp"

namespace ignis::executor {

using Fn0 = std::function<Value(Context&)>;
using Fn1 = std::function<Value(Context&, const Value&)>;
using Fn2 = std::function<Value(Context&, const Value&, const Value&)>;
/// call/voidCall body. `input` is the executor's local elements when the call
/// has an input dataframe, nullptr otherwise. Returned elements form the
/// executor's output partition (ignored for void functions).
using CallFn = std::function<std::vector<Value>(Context&, const std::vector<Value>* input)>;

struct IterationStep {
  Value state;
  bool converged = false;
};
/// One resident iteration over the executor's local elements. Every executor
/// must return the same state and flag (typically derived from an allreduce).
using IterationFn = std::function<IterationStep(Context&, const std::vector<Value>& data, const Value& state)>;

struct FnEntry {
  enum class Kind { kFn0, kFn1, kFn2, kCall, kIteration };
  Kind kind = Kind::kFn1;
  /// kCall: 0 without input dataframe, 1 with one.
  int arity = 1;
  /// kCall: false for functions declared void.
  bool returnsValue = true;
  Fn0 fn0;
  Fn1 fn1;
  Fn2 fn2;
  CallFn call;
  IterationFn iteration;
};

/// Named executor functions. A worker's namespace preloads the built-in
/// bundle of the same name; loadLibrary adds further bundles or shared
/// objects exporting `extern "C" void ignis_register(ignis::executor::Registry&)`.
class Registry {
 public:
  void addFn0(const std::string& name, Fn0 fn);
  void addFn1(const std::string& name, Fn1 fn);
  void addFn2(const std::string& name, Fn2 fn);
  void addCall(const std::string& name, int arity, CallFn fn);
  void addVoidCall(const std::string& name, int arity, CallFn fn);
  void addIteration(const std::string& name, IterationFn fn);

  /// kUnknownFunction if absent.
  const FnEntry& get(const std::string& name) const;
  bool contains(const std::string& name) const { return entries_.count(name) != 0; }
  std::vector<std::string> names() const;

  /// Built-in bundle name or path to a shared object.
  void load(const std::string& library);

  static bool isBuiltinBundle(const std::string& name);

 private:
  std::map<std::string, FnEntry> entries_;
  std::vector<std::shared_ptr<void>> handles_;
};

using BundleInit = void (*)(Registry&);
void registerStdBundle(Registry& r);
void registerWorkloadsBundle(Registry& r);

/// Executor-side form of a driver ISource: a registered function or a text
/// lambda plus captured variables.
class UserFn {
 public:
  /// `sourceRef` is Pair(target, List[Pair(Str name, value)]) with target
  /// Str(registry name) or Pair(List[Str param], Str body). Raises
  /// kUnknownFunction or kArityMismatch when the target does not fit.
  static UserFn resolve(const Value& sourceRef, const Registry& registry, int arity);

  int arity() const { return arity_; }
  const lambda::VarMap& vars() const { return vars_; }
  std::string describe() const { return name_; }

  Value operator()(Context& ctx) const;
  Value operator()(Context& ctx, const Value& a) const;
  Value operator()(Context& ctx, const Value& a, const Value& b) const;

  static lambda::VarMap paramsOf(const Value& sourceRef);

 private:
  int arity_ = 1;
  std::string name_;
  lambda::VarMap vars_;
  std::shared_ptr<const lambda::Lambda> lambda_;
  const FnEntry* entry_ = nullptr;
};

}  // namespace ignis::executor
