#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gnids/tensor.hpp"

namespace gnids {

class Tape;

/// Handle to a value recorded on a Tape.
struct Var {
  Tape* tape = nullptr;
  std::uint32_t id = std::numeric_limits<std::uint32_t>::max();

  const Tensor& value() const;
  bool requires_grad() const;
};

struct NamedParameter {
  std::string group;  ///< msg_sf, msg_fd, upd_h, upd_f, readout, ...
  std::string name;   ///< unique, "<group>.<local>"
  Tensor value;
};

/// Ordered, uniquely named learnable tensors. The insertion order is the
/// canonical order for gradients, optimizer state and serialization.
class ParameterStore {
 public:
  std::size_t add(std::string group, std::string_view local_name, Tensor value);

  std::size_t size() const { return entries_.size(); }
  NamedParameter& operator[](std::size_t i) { return entries_[i]; }
  const NamedParameter& operator[](std::size_t i) const { return entries_[i]; }
  std::optional<std::size_t> find(std::string_view name) const;
  const Tensor& at(std::string_view name) const;
  Tensor& at(std::string_view name);
  std::vector<std::string> groups() const;
  std::size_t scalar_count() const;

  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  bool operator==(const ParameterStore&) const;

 private:
  std::vector<NamedParameter> entries_;
};

bool operator==(const NamedParameter& a, const NamedParameter& b);

/// One gradient tensor per parameter, in ParameterStore order.
using Gradients = std::vector<Tensor>;

Gradients zero_gradients(const ParameterStore& store);
/// g += other, slot by slot in canonical order.
void accumulate(Gradients& g, const Gradients& other);

/// Records operations for reverse-mode differentiation. Single-threaded;
/// one tape per graph in a batch.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::uint32_t self)>;

  explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool grad_enabled() const { return grad_enabled_; }

  Var constant(Tensor value);
  /// Leaf bound to parameter slot `slot`; the tensor is borrowed and must
  /// outlive the tape.
  Var parameter(const Tensor& value, std::size_t slot);
  /// Records an op result. `backward` is dropped when no input requires grad.
  Var record(Tensor value, bool requires_grad, BackwardFn backward, std::string_view op);

  const Tensor& value(std::uint32_t id) const;
  bool requires_grad(std::uint32_t id) const { return nodes_[id].requires_grad; }
  /// Gradient buffer of a node, zero-initialized on first access.
  Tensor& grad(std::uint32_t id);
  const Tensor* grad_if_any(std::uint32_t id) const;

  /// Reverse sweep from a scalar loss, in exact reverse recording order.
  /// Parameter gradients are added into `out` (sized by the caller).
  void backward(Var loss, Gradients& out);

  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor owned;
    const Tensor* borrowed = nullptr;
    Tensor grad;
    bool has_grad = false;
    bool requires_grad = false;
    long param_slot = -1;
    BackwardFn backward;
  };
  std::vector<Node> nodes_;
  bool grad_enabled_;
};

/// Binds every parameter of the store on the tape, in store order.
std::vector<Var> bind(Tape& tape, const ParameterStore& store);

}  // namespace gnids
