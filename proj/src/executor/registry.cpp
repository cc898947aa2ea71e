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

#include "ignis/executor/registry.hpp"

#include <dlfcn.h>

#include <algorithm>

namespace ignis::executor {

namespace {

const std::map<std::string, BundleInit>& builtinBundles() {
  static const std::map<std::string, BundleInit> kBundles = {
      {"std", &registerStdBundle},
      {"workloads", &registerWorkloadsBundle},
  };
  return kBundles;
}

Value numericBinary(const Value& a, const Value& b, int64_t (*i)(int64_t, int64_t), double (*f)(double, double)) {
  if (a.isI64() && b.isI64()) return Value::i64(i(a.asI64(), b.asI64()));
  auto d = [](const Value& v) { return v.isI64() ? static_cast<double>(v.asI64()) : v.asF64(); };
  if ((a.isI64() || a.isF64()) && (b.isI64() || b.isF64())) return Value::f64(f(d(a), d(b)));
  fail(ErrorCode::kType, std::string("numeric operands expected, got ") + tagName(a.tag()) + " and " + tagName(b.tag()));
}

}  // namespace

void Registry::addFn0(const std::string& name, Fn0 fn) {
  FnEntry e;
  e.kind = FnEntry::Kind::kFn0;
  e.arity = 0;
  e.fn0 = std::move(fn);
  entries_[name] = std::move(e);
}

void Registry::addFn1(const std::string& name, Fn1 fn) {
  FnEntry e;
  e.kind = FnEntry::Kind::kFn1;
  e.arity = 1;
  e.fn1 = std::move(fn);
  entries_[name] = std::move(e);
}

void Registry::addFn2(const std::string& name, Fn2 fn) {
  FnEntry e;
  e.kind = FnEntry::Kind::kFn2;
  e.arity = 2;
  e.fn2 = std::move(fn);
  entries_[name] = std::move(e);
}

void Registry::addCall(const std::string& name, int arity, CallFn fn) {
  if (arity != 0 && arity != 1) fail(ErrorCode::kArityMismatch, "call functions take 0 or 1 inputs");
  FnEntry e;
  e.kind = FnEntry::Kind::kCall;
  e.arity = arity;
  e.call = std::move(fn);
  entries_[name] = std::move(e);
}

void Registry::addVoidCall(const std::string& name, int arity, CallFn fn) {
  addCall(name, arity, std::move(fn));
  entries_[name].returnsValue = false;
}

void Registry::addIteration(const std::string& name, IterationFn fn) {
  FnEntry e;
  e.kind = FnEntry::Kind::kIteration;
  e.iteration = std::move(fn);
  entries_[name] = std::move(e);
}

const FnEntry& Registry::get(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) fail(ErrorCode::kUnknownFunction, "function '" + name + "' is not registered");
  return it->second;
}

std::vector<std::string> Registry::names() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries_) out.push_back(k);
  return out;
}

bool Registry::isBuiltinBundle(const std::string& name) { return builtinBundles().count(name) != 0; }

void Registry::load(const std::string& library) {
  if (auto it = builtinBundles().find(library); it != builtinBundles().end()) {
    it->second(*this);
    return;
  }
  void* h = ::dlopen(library.c_str(), RTLD_NOW | RTLD_LOCAL);
  if (!h) {
    const char* err = ::dlerror();
    fail(ErrorCode::kUnknownFunction, "cannot load library '" + library + "': " + (err ? err : "unknown error"));
  }
  auto init = reinterpret_cast<BundleInit>(::dlsym(h, "ignis_register"));
  if (!init) {
    ::dlclose(h);
    fail(ErrorCode::kUnknownFunction, "library '" + library + "' does not export ignis_register");
  }
  init(*this);
  handles_.emplace_back(h, [](void*) {});
}

void registerStdBundle(Registry& r) {
  r.addFn1("identity", [](Context&, const Value& x) { return x; });
  r.addFn1("one", [](Context&, const Value&) { return Value::i64(1); });
  r.addFn1("swap", [](Context&, const Value& x) { return Value::pair(x.second(), x.first()); });
  r.addFn1("toString", [](Context&, const Value& x) { return Value::str(x.toString()); });
  r.addFn1("length", [](Context&, const Value& x) {
    return Value::i64(static_cast<int64_t>(x.isList() ? x.asList().size() : x.asStr().size()));
  });
  r.addFn1("words", [](Context&, const Value& x) {
    ValueList out;
    const std::string& s = x.asStr();
    size_t i = 0;
    while (i < s.size()) {
      while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
      size_t j = i;
      while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
      if (j > i) out.push_back(Value::str(s.substr(i, j - i)));
      i = j;
    }
    return Value::list(std::move(out));
  });
  r.addFn1("reverse", [](Context&, const Value& x) {
    ValueList items = x.asList();
    std::reverse(items.begin(), items.end());
    return Value::list(std::move(items));
  });
  r.addFn2("add", [](Context&, const Value& a, const Value& b) {
    return numericBinary(
        a, b, [](int64_t x, int64_t y) { return static_cast<int64_t>(static_cast<uint64_t>(x) + static_cast<uint64_t>(y)); },
        [](double x, double y) { return x + y; });
  });
  r.addFn2("mul", [](Context&, const Value& a, const Value& b) {
    return numericBinary(
        a, b, [](int64_t x, int64_t y) { return static_cast<int64_t>(static_cast<uint64_t>(x) * static_cast<uint64_t>(y)); },
        [](double x, double y) { return x * y; });
  });
  r.addFn2("min", [](Context&, const Value& a, const Value& b) { return compareValues(b, a) < 0 ? b : a; });
  r.addFn2("max", [](Context&, const Value& a, const Value& b) { return compareValues(b, a) > 0 ? b : a; });
  r.addFn2("concat", [](Context&, const Value& a, const Value& b) {
    if (a.isStr()) return Value::str(a.asStr() + b.asStr());
    ValueList items = a.asList();
    items.insert(items.end(), b.asList().begin(), b.asList().end());
    return Value::list(std::move(items));
  });
  r.addCall("executorRank", 0,
            [](Context& ctx, const std::vector<Value>*) { return std::vector<Value>{Value::i64(ctx.executorRank)}; });
  r.addVoidCall("barrier", 0, [](Context& ctx, const std::vector<Value>*) {
    ctx.base().barrier();
    return std::vector<Value>{};
  });
}

UserFn UserFn::resolve(const Value& sourceRef, const Registry& registry, int arity) {
  if (!sourceRef.isPair()) fail(ErrorCode::kType, "function reference must be a Pair, got " + sourceRef.toString());
  UserFn fn;
  fn.arity_ = arity;
  fn.vars_ = paramsOf(sourceRef);
  const Value& target = sourceRef.first();
  if (target.isStr()) {
    fn.name_ = target.asStr();
    fn.entry_ = &registry.get(fn.name_);
    bool fits = (arity == 0 && fn.entry_->kind == FnEntry::Kind::kFn0) ||
                (arity == 1 && fn.entry_->kind == FnEntry::Kind::kFn1) ||
                (arity == 2 && fn.entry_->kind == FnEntry::Kind::kFn2);
    if (!fits) {
      fail(ErrorCode::kArityMismatch, "function '" + fn.name_ + "' does not take " + std::to_string(arity) +
                                          " argument" + (arity == 1 ? "" : "s"));
    }
    return fn;
  }
  auto l = std::make_shared<lambda::Lambda>(lambda::Lambda::fromValue(target));
  if (l->arity() != arity) {
    fail(ErrorCode::kArityMismatch, "lambda '" + l->body() + "' takes " + std::to_string(l->arity()) +
                                        " parameters, operator needs " + std::to_string(arity));
  }
  fn.name_ = "lambda: " + l->body();
  fn.lambda_ = std::move(l);
  return fn;
}

lambda::VarMap UserFn::paramsOf(const Value& sourceRef) {
  lambda::VarMap vars;
  if (!sourceRef.isPair()) return vars;
  for (const Value& p : sourceRef.second().asList()) vars[p.first().asStr()] = p.second();
  return vars;
}

Value UserFn::operator()(Context& ctx) const {
  if (lambda_) return lambda_->eval({}, ctx.vars);
  return entry_->fn0(ctx);
}

Value UserFn::operator()(Context& ctx, const Value& a) const {
  if (lambda_) return lambda_->eval({a}, ctx.vars);
  return entry_->fn1(ctx, a);
}

Value UserFn::operator()(Context& ctx, const Value& a, const Value& b) const {
  if (lambda_) return lambda_->eval({a, b}, ctx.vars);
  return entry_->fn2(ctx, a, b);
}

}  // namespace ignis::executor
