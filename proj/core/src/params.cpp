#include "lg3d/params.hpp"

#include <cstring>

#include "lg3d/error.hpp"

namespace lg3d {

void ParamStore::insert(const std::string& name, Tensor value) {
    auto [it, inserted] = params_.emplace(name, std::move(value));
    if (!inserted) throw_error(ErrorKind::contract, "parameter already exists: " + name);
}

bool ParamStore::contains(const std::string& name) const {
    return params_.find(name) != params_.end();
}

const Tensor& ParamStore::at(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end()) throw_error(ErrorKind::contract, "unknown parameter: " + name);
    return it->second;
}

Tensor& ParamStore::at(const std::string& name) {
    auto it = params_.find(name);
    if (it == params_.end()) throw_error(ErrorKind::contract, "unknown parameter: " + name);
    return it->second;
}

std::vector<std::string> ParamStore::names() const {
    std::vector<std::string> out;
    out.reserve(params_.size());
    for (const auto& [name, _] : params_) out.push_back(name);
    return out;
}

std::size_t ParamStore::total_entries() const {
    std::size_t n = 0;
    for (const auto& [_, t] : params_) n += t.numel();
    return n;
}

void accumulate_grads(GradMap& into, const GradMap& from) {
    for (const auto& [name, g] : from) {
        auto it = into.find(name);
        if (it == into.end()) {
            into.emplace(name, g);
        } else {
            it->second += g;
        }
    }
}

void scale_grads(GradMap& grads, double s) {
    for (auto& [_, g] : grads)
        for (std::size_t i = 0; i < g.numel(); ++i) g[i] *= s;
}

std::uint64_t hash_bytes(const void* data, std::size_t n, std::uint64_t seed) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t hash_tensor(const Tensor& t, std::uint64_t seed) {
    std::uint64_t h = hash_bytes(t.data(), t.numel() * sizeof(double), seed);
    auto shape = t.shape();
    return hash_bytes(shape.data(), sizeof(shape), h);
}

std::uint64_t hash_params(const ParamStore& store, std::string_view prefix) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& [name, t] : store.map()) {
        if (!name_has_prefix(name, prefix)) continue;
        h = hash_bytes(name.data(), name.size(), h);
        h = hash_tensor(t, h);
    }
    return h;
}

}  // namespace lg3d
