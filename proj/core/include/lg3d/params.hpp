#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "lg3d/tensor.hpp"

namespace lg3d {

// Named parameter tensors. Names are dotted paths ("main.f.l1.w"); the
// leading segment selects the parameter group for masking and stripping.
class ParamStore {
public:
    void insert(const std::string& name, Tensor value);
    bool contains(const std::string& name) const;
    const Tensor& at(const std::string& name) const;
    Tensor& at(const std::string& name);

    std::vector<std::string> names() const;
    std::size_t size() const { return params_.size(); }
    std::size_t total_entries() const;

    const std::map<std::string, Tensor>& map() const { return params_; }

    bool operator==(const ParamStore& o) const { return params_ == o.params_; }

private:
    std::map<std::string, Tensor> params_;
};

using GradMap = std::map<std::string, Tensor>;

// into += from, inserting missing entries
void accumulate_grads(GradMap& into, const GradMap& from);
void scale_grads(GradMap& grads, double s);

inline bool name_has_prefix(std::string_view name, std::string_view prefix) {
    return name.size() >= prefix.size() && name.substr(0, prefix.size()) == prefix;
}

// FNV-1a over the raw bit patterns; used for freeze checks and config hashes.
std::uint64_t hash_bytes(const void* data, std::size_t n, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t hash_tensor(const Tensor& t, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t hash_params(const ParamStore& store, std::string_view prefix = "");

}  // namespace lg3d
