#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "lg3d/params.hpp"
#include "lg3d/tensor.hpp"

namespace lg3d {

struct Node {
    int id = -1;
    bool valid() const { return id >= 0; }
};

// Define-by-run reverse-mode tape. A tape records one forward pass; backward
// may run once. Parameters bind by name against a ParamStore and are
// deduplicated, so a twice-used parameter accumulates both gradient paths.
class Tape {
public:
    explicit Tape(ParamStore* store = nullptr) : store_(store) {}

    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    // leaves
    Node param(const std::string& name);
    Node constant(Tensor value);

    // arithmetic
    Node add(Node a, Node b);
    Node sub(Node a, Node b);
    Node mul(Node a, Node b);  // elementwise
    Node scale(Node a, double s);
    Node matmul(Node a, Node b);
    Node transpose(Node a);
    Node add_rowvec(Node m, Node row);  // broadcast a 1xC row over all rows of m

    // elementwise nonlinearities
    Node tanh_(Node a);
    Node sigmoid(Node a);
    Node exp_(Node a);
    Node log_(Node a);
    Node abs_(Node a);
    Node softmax_rows(Node a);

    // shape ops
    Node slice_cols(Node a, std::size_t c0, std::size_t c1);  // [c0, c1)
    Node gather_rows(Node a, std::vector<std::size_t> rows);
    Node concat_rows(const std::vector<Node>& parts);
    Node concat_cols(Node a, Node b);
    // column-wise max over each consecutive segment of rows; one output row
    // per segment
    Node segment_max_rows(Node a, std::vector<std::size_t> segment_sizes);

    // reductions
    Node sum(Node a);
    Node mean(Node a);
    Node frobenius_norm(Node a);

    // fused losses (targets are data, not differentiated)
    Node bce_with_logits(Node logits, Tensor targets);
    Node bce_probs(Node probs, Tensor targets);  // clamps probs to [1e-12, 1-1e-12]
    Node softmax_xent_rows(Node logits, std::vector<int> labels);

    // stop-gradient: value passes through, no gradient flows to `a`
    Node detach(Node a);

    const Tensor& value(Node n) const;
    std::size_t node_count() const { return recs_.size(); }

    // Reverse sweep from `loss` (must be 1x1). Populates gradients for every
    // node reachable from the loss; may be called once per tape.
    void backward(Node loss);
    bool backward_ran() const { return backward_ran_; }

    const Tensor& grad_at(Node n) const;
    // One entry per parameter in the bound store; zeros for parameters the
    // loss does not reach.
    GradMap param_grads() const;
    // Names of store parameters bound on this tape (the instrumentation used
    // to show a forward pass never reads a parameter group).
    std::vector<std::string> touched_params() const;

private:
    using BackFn = std::function<void(Tape&, int)>;

    struct Rec {
        Tensor value;
        std::vector<int> parents;
        BackFn back;            // accumulates grads_[parent] from grads_[self]
        std::string param_name; // nonempty for store-bound leaves
    };

    Node emplace(Tensor value, std::vector<int> parents, BackFn back,
                 std::string param_name = {});
    const Tensor& val(int id) const { return recs_[static_cast<std::size_t>(id)].value; }
    Tensor& grd(int id) { return grads_[static_cast<std::size_t>(id)]; }
    void check(Node n, const char* op) const;

    ParamStore* store_ = nullptr;
    std::vector<Rec> recs_;
    std::vector<Tensor> grads_;
    std::map<std::string, int> bound_;  // param name -> leaf id
    bool backward_ran_ = false;
};

}  // namespace lg3d
