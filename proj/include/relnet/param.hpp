#pragma once

#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "relnet/tensor.hpp"

namespace relnet {

/// A named trainable array. The gradient buffer always matches the value
/// buffer in size; backward passes accumulate into it until zero_grad().
struct Parameter {
    std::string name;
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;

    int64_t numel() const { return static_cast<int64_t>(value.size()); }
    void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }
};

// Owns parameters and keeps their creation order, which fixes the iteration
// order used by optimizers, checkpoints, and gradient checks.
class ParameterStore {
  public:
    Parameter& create(const std::string& name, Shape shape);
    Parameter& at(const std::string& name);
    const Parameter& at(const std::string& name) const;
    bool contains(const std::string& name) const { return index_.count(name) > 0; }

    std::vector<Parameter*> all();
    std::vector<const Parameter*> all() const;
    size_t size() const { return params_.size(); }

    void zero_grad();
    int64_t total_entries() const;

  private:
    std::vector<std::unique_ptr<Parameter>> params_;
    std::unordered_map<std::string, Parameter*> index_;
};

}  // namespace relnet
