#include "relnet/param.hpp"

#include "relnet/errors.hpp"

namespace relnet {

Parameter& ParameterStore::create(const std::string& name, Shape shape) {
    if (index_.count(name) > 0) {
        throw ContractError("duplicate parameter name: " + name);
    }
    auto n = static_cast<size_t>(shape_numel(shape));
    auto p = std::make_unique<Parameter>();
    p->name = name;
    p->shape = std::move(shape);
    p->value.assign(n, 0.0);
    p->grad.assign(n, 0.0);
    Parameter* raw = p.get();
    params_.push_back(std::move(p));
    index_[name] = raw;
    return *raw;
}

Parameter& ParameterStore::at(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) {
        throw ContractError("unknown parameter: " + name);
    }
    return *it->second;
}

const Parameter& ParameterStore::at(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) {
        throw ContractError("unknown parameter: " + name);
    }
    return *it->second;
}

std::vector<Parameter*> ParameterStore::all() {
    std::vector<Parameter*> out;
    out.reserve(params_.size());
    for (auto& p : params_) {
        out.push_back(p.get());
    }
    return out;
}

std::vector<const Parameter*> ParameterStore::all() const {
    std::vector<const Parameter*> out;
    out.reserve(params_.size());
    for (auto& p : params_) {
        out.push_back(p.get());
    }
    return out;
}

void ParameterStore::zero_grad() {
    for (auto& p : params_) {
        p->zero_grad();
    }
}

int64_t ParameterStore::total_entries() const {
    int64_t n = 0;
    for (const auto& p : params_) {
        n += p->numel();
    }
    return n;
}

}  // namespace relnet
