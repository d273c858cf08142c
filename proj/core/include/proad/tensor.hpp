#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace proad {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_to_string(const Shape& shape);

namespace detail {

// One vertex of the recorded graph. Data and grad live here; the Tensor
// handle is a shared reference to it.
struct Node {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until something flows into it
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> inputs;
  // Reads this->grad and accumulates into inputs[i]->grad.
  std::function<void(Node&)> backward;

  void accumulate_grad(std::span<const double> g);
  void accumulate_grad(std::size_t i, double g);
};

}  // namespace detail

// Dense row-major float64 tensor with optional participation in the
// reverse-mode tape. Copies are shallow: two handles to the same storage
// compare equal under same_storage().
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
  static Tensor scalar(double value);

  bool defined() const { return static_cast<bool>(node_); }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const;

  std::span<const double> data() const;
  // Direct write access. Only valid on leaves; mutating an interior node
  // after recording invalidates its backward.
  std::span<double> mutable_data();
  double item() const;
  double at(std::size_t flat) const { return data()[flat]; }

  bool requires_grad() const;
  void set_requires_grad(bool value);
  bool has_grad() const;
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();

  // Fresh leaf sharing no history; values copied.
  Tensor detach() const;
  Tensor clone() const { return detach(); }
  bool same_storage(const Tensor& other) const { return node_ == other.node_; }
  bool is_leaf() const;

  // Construction helper for ops.
  static Tensor make_result(Shape shape, std::vector<double> values,
                            std::vector<Tensor> inputs,
                            std::function<void(detail::Node&)> backward);

  const std::shared_ptr<detail::Node>& node() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  std::shared_ptr<detail::Node> node_;
};

// Disables graph recording on the current thread while alive.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_mode_enabled();

// Reverse pass from a scalar loss. Gradients accumulate (call zero_grad
// between steps); every node reached keeps its grad so intermediate
// gradients can be inspected afterwards.
void backward(const Tensor& loss);

}  // namespace proad
