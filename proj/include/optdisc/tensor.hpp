// Dense row-major tensors (rank 1 or 2) of doubles. Value type: copyable,
// no views, no aliasing.
#ifndef OPTDISC_TENSOR_HPP
#define OPTDISC_TENSOR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace optdisc {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when a forward/backward pass or the trainer hits a non-finite
// value; `component` names the objective part that produced it.
struct NumericError : Error {
  explicit NumericError(const std::string& what, std::string comp = "")
      : Error(what), component(std::move(comp)) {}
  std::string component;
};

struct IoError : Error {
  using Error::Error;
};

struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::vector<int> s, double fill = 0.0) : shape(std::move(s)) {
    data.assign(numel(shape), fill);
  }
  Tensor(std::vector<int> s, std::vector<double> values)
      : shape(std::move(s)), data(std::move(values)) {
    if (data.size() != numel(shape))
      throw Error("tensor: " + std::to_string(data.size()) +
                  " values for shape " + shape_str(shape));
  }

  static std::size_t numel(const std::vector<int>& s) {
    std::size_t n = 1;
    for (int e : s) {
      if (e <= 0) throw Error("tensor: non-positive extent in " + shape_str(s));
      n *= static_cast<std::size_t>(e);
    }
    return n;
  }

  static std::string shape_str(const std::vector<int>& s) {
    std::string out = "[";
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (i) out += "x";
      out += std::to_string(s[i]);
    }
    return out + "]";
  }

  std::size_t size() const { return data.size(); }
  int rank() const { return static_cast<int>(shape.size()); }
  bool is_scalar() const { return data.size() == 1; }
  double scalar() const {
    if (!is_scalar()) throw Error("tensor: scalar() on " + shape_str(shape));
    return data[0];
  }

  int rows() const { return rank() == 2 ? shape[0] : (rank() == 1 ? 1 : 0); }
  int cols() const { return rank() == 2 ? shape[1] : (rank() == 1 ? shape[0] : 0); }

  double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols() + c]; }
  double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols() + c]; }
  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

inline Tensor zeros_like(const Tensor& t) { return Tensor(t.shape, 0.0); }

}  // namespace optdisc

#endif
