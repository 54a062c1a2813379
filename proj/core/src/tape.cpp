#include "gnids/tape.hpp"

#include <set>

#include "gnids/error.hpp"

namespace gnids {

const Tensor& Var::value() const {
  if (!tape) throw UsageError("value() on unbound Var");
  return tape->value(id);
}

bool Var::requires_grad() const { return tape && tape->requires_grad(id); }

std::size_t ParameterStore::add(std::string group, std::string_view local_name, Tensor value) {
  std::string name = group + "." + std::string(local_name);
  if (find(name)) throw UsageError("duplicate parameter name: " + name);
  if (!value.all_finite()) throw NumericError("parameter " + name + " is not finite");
  entries_.push_back({std::move(group), std::move(name), std::move(value)});
  return entries_.size() - 1;
}

std::optional<std::size_t> ParameterStore::find(std::string_view name) const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name == name) return i;
  }
  return std::nullopt;
}

const Tensor& ParameterStore::at(std::string_view name) const {
  auto i = find(name);
  if (!i) throw UsageError("no parameter named " + std::string(name));
  return entries_[*i].value;
}

Tensor& ParameterStore::at(std::string_view name) {
  auto i = find(name);
  if (!i) throw UsageError("no parameter named " + std::string(name));
  return entries_[*i].value;
}

std::vector<std::string> ParameterStore::groups() const {
  std::vector<std::string> out;
  for (const auto& e : entries_) {
    if (out.empty() || out.back() != e.group) {
      bool seen = false;
      for (const auto& g : out) seen = seen || g == e.group;
      if (!seen) out.push_back(e.group);
    }
  }
  return out;
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.value.size();
  return n;
}

bool operator==(const NamedParameter& a, const NamedParameter& b) {
  return a.group == b.group && a.name == b.name && a.value == b.value;
}

bool ParameterStore::operator==(const ParameterStore& other) const {
  return entries_ == other.entries_;
}

Gradients zero_gradients(const ParameterStore& store) {
  Gradients g;
  g.reserve(store.size());
  for (const auto& e : store) g.push_back(Tensor::zeros_like(e.value));
  return g;
}

void accumulate(Gradients& g, const Gradients& other) {
  if (g.size() != other.size()) throw ShapeError("gradient slot count mismatch");
  for (std::size_t i = 0; i < g.size(); ++i) {
    kernel::axpy(1.0, other[i].data(), g[i].data());
  }
}

Var Tape::constant(Tensor value) {
  if (!value.all_finite()) throw NumericError("constant contains non-finite values");
  Node n;
  n.owned = std::move(value);
  nodes_.push_back(std::move(n));
  return {this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::parameter(const Tensor& value, std::size_t slot) {
  Node n;
  n.borrowed = &value;
  n.requires_grad = grad_enabled_;
  n.param_slot = static_cast<long>(slot);
  nodes_.push_back(std::move(n));
  return {this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::record(Tensor value, bool requires_grad, BackwardFn backward, std::string_view op) {
  if (!value.all_finite()) {
    throw NumericError(std::string(op) + " produced non-finite values (shape " +
                       value.shape_string() + ")");
  }
  Node n;
  n.owned = std::move(value);
  n.requires_grad = requires_grad && grad_enabled_;
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return {this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

const Tensor& Tape::value(std::uint32_t id) const {
  const Node& n = nodes_.at(id);
  return n.borrowed ? *n.borrowed : n.owned;
}

Tensor& Tape::grad(std::uint32_t id) {
  Node& n = nodes_[id];
  if (!n.has_grad) {
    n.grad = Tensor::zeros_like(n.borrowed ? *n.borrowed : n.owned);
    n.has_grad = true;
  }
  return n.grad;
}

const Tensor* Tape::grad_if_any(std::uint32_t id) const {
  const Node& n = nodes_[id];
  return n.has_grad ? &n.grad : nullptr;
}

void Tape::backward(Var loss, Gradients& out) {
  if (loss.tape != this) throw UsageError("backward: value does not belong to this tape");
  if (!grad_enabled_ || !nodes_.at(loss.id).requires_grad) {
    throw UsageError("backward: value was not produced by taped operations on parameters");
  }
  if (value(loss.id).size() != 1) {
    throw UsageError("backward: loss must be a scalar, got " + value(loss.id).shape_string());
  }
  grad(loss.id)[0] = 1.0;
  for (std::uint32_t id = loss.id + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.has_grad) continue;
    if (n.backward) n.backward(*this, id);
  }
  for (auto& n : nodes_) {
    if (n.param_slot >= 0 && n.has_grad) {
      auto slot = static_cast<std::size_t>(n.param_slot);
      if (slot >= out.size()) throw UsageError("backward: gradient buffer too small");
      kernel::axpy(1.0, n.grad.data(), out[slot].data());
    }
  }
}

std::vector<Var> bind(Tape& tape, const ParameterStore& store) {
  std::vector<Var> vars;
  vars.reserve(store.size());
  for (std::size_t i = 0; i < store.size(); ++i) vars.push_back(tape.parameter(store[i].value, i));
  return vars;
}

}  // namespace gnids
