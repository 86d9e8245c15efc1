#pragma once

#include <initializer_list>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "lg3d/params.hpp"

namespace lg3d {

// Parameter-group mask: a parameter is selected when its name starts with any
// of the prefixes.
struct ParamFilter {
    std::vector<std::string> prefixes;

    bool matches(std::string_view name) const {
        for (const auto& p : prefixes)
            if (name_has_prefix(name, p)) return true;
        return false;
    }

    static ParamFilter none() { return {}; }
    static ParamFilter all() { return {{""}}; }
    static ParamFilter groups(std::initializer_list<std::string> prefixes) {
        ParamFilter f;
        f.prefixes.assign(prefixes.begin(), prefixes.end());
        return f;
    }
};

// SGD with momentum. A step touches only masked parameters; everything else,
// including the corresponding velocity accumulators, stays bit-identical.
class SgdOptimizer {
public:
    explicit SgdOptimizer(double learning_rate, double momentum = 0.9);

    double learning_rate() const { return lr_; }
    void set_learning_rate(double lr);
    double momentum() const { return momentum_; }

    void step(ParamStore& store, const GradMap& grads, const ParamFilter& mask);

private:
    double lr_;
    double momentum_;
    std::map<std::string, Tensor> velocity_;
};

}  // namespace lg3d
