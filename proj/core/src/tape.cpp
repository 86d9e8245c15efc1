#include "lg3d/tape.hpp"

#include <algorithm>
#include <cmath>

#include "lg3d/error.hpp"

namespace lg3d {

namespace {

double stable_sigmoid(double x) {
    if (x >= 0.0) {
        const double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

}  // namespace

Node Tape::emplace(Tensor value, std::vector<int> parents, BackFn back, std::string param_name) {
    recs_.push_back(Rec{std::move(value), std::move(parents), std::move(back), std::move(param_name)});
    return Node{static_cast<int>(recs_.size()) - 1};
}

void Tape::check(Node n, const char* op) const {
    if (!n.valid() || n.id >= static_cast<int>(recs_.size()))
        throw_error(ErrorKind::contract, std::string(op) + ": node does not belong to this tape");
}

Node Tape::param(const std::string& name) {
    if (store_ == nullptr)
        throw_error(ErrorKind::contract, "param() on a tape without a bound ParamStore");
    auto it = bound_.find(name);
    if (it != bound_.end()) return Node{it->second};
    Node n = emplace(store_->at(name), {}, {}, name);
    bound_.emplace(name, n.id);
    return n;
}

Node Tape::constant(Tensor value) { return emplace(std::move(value), {}, {}); }

Node Tape::add(Node a, Node b) {
    check(a, "add");
    check(b, "add");
    const Tensor& va = val(a.id);
    const Tensor& vb = val(b.id);
    if (!va.same_shape(vb))
        throw_error(ErrorKind::shape, "add: shape mismatch " + va.shape_str() + " vs " + vb.shape_str());
    Tensor out = va;
    out += vb;
    return emplace(std::move(out), {a.id, b.id}, [](Tape& t, int self) {
        const Tensor& g = t.grd(self);
        t.grd(t.recs_[self].parents[0]) += g;
        t.grd(t.recs_[self].parents[1]) += g;
    });
}

Node Tape::sub(Node a, Node b) {
    check(a, "sub");
    check(b, "sub");
    const Tensor& va = val(a.id);
    const Tensor& vb = val(b.id);
    if (!va.same_shape(vb))
        throw_error(ErrorKind::shape, "sub: shape mismatch " + va.shape_str() + " vs " + vb.shape_str());
    Tensor out = va;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] -= vb[i];
    return emplace(std::move(out), {a.id, b.id}, [](Tape& t, int self) {
        const Tensor& g = t.grd(self);
        Tensor& ga = t.grd(t.recs_[self].parents[0]);
        Tensor& gb = t.grd(t.recs_[self].parents[1]);
        for (std::size_t i = 0; i < g.numel(); ++i) {
            ga[i] += g[i];
            gb[i] -= g[i];
        }
    });
}

Node Tape::mul(Node a, Node b) {
    check(a, "mul");
    check(b, "mul");
    const Tensor& va = val(a.id);
    const Tensor& vb = val(b.id);
    if (!va.same_shape(vb))
        throw_error(ErrorKind::shape, "mul: shape mismatch " + va.shape_str() + " vs " + vb.shape_str());
    Tensor out = va;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= vb[i];
    return emplace(std::move(out), {a.id, b.id}, [](Tape& t, int self) {
        const Tensor& g = t.grd(self);
        const Tensor& va = t.val(t.recs_[self].parents[0]);
        const Tensor& vb = t.val(t.recs_[self].parents[1]);
        Tensor& ga = t.grd(t.recs_[self].parents[0]);
        Tensor& gb = t.grd(t.recs_[self].parents[1]);
        for (std::size_t i = 0; i < g.numel(); ++i) {
            ga[i] += g[i] * vb[i];
            gb[i] += g[i] * va[i];
        }
    });
}

Node Tape::scale(Node a, double s) {
    check(a, "scale");
    Tensor out = val(a.id);
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= s;
    return emplace(std::move(out), {a.id}, [s](Tape& t, int self) {
        const Tensor& g = t.grd(self);
        Tensor& ga = t.grd(t.recs_[self].parents[0]);
        for (std::size_t i = 0; i < g.numel(); ++i) ga[i] += s * g[i];
    });
}

Node Tape::matmul(Node a, Node b) {
    check(a, "matmul");
    check(b, "matmul");
    Tensor out = matmul_value(val(a.id), val(b.id));
    return emplace(std::move(out), {a.id, b.id}, [](Tape& t, int self) {
        const Tensor& g = t.grd(self);
        const int pa = t.recs_[self].parents[0];
        const int pb = t.recs_[self].parents[1];
        add_matmul_nt(t.grd(pa), g, t.val(pb));  // dA += g * B^T
        add_matmul_tn(t.grd(pb), t.val(pa), g);  // dB += A^T * g
    });
}

Node Tape::transpose(Node a) {
    check(a, "transpose");
    const Tensor& va = val(a.id);
    Tensor out(va.cols(), va.rows());
    for (std::size_t i = 0; i < va.rows(); ++i)
        for (std::size_t j = 0; j < va.cols(); ++j) out.at(j, i) = va.at(i, j);
    return emplace(std::move(out), {a.id}, [](Tape& t, int self) {
        const Tensor& g = t.grd(self);
        Tensor& ga = t.grd(t.recs_[self].parents[0]);
        for (std::size_t i = 0; i < g.rows(); ++i)
            for (std::size_t j = 0; j < g.cols(); ++j) ga.at(j, i) += g.at(i, j);
    });
}

Node Tape::add_rowvec(Node m, Node row) {
    check(m, "add_rowvec");
    check(row, "add_rowvec");
    const Tensor& vm = val(m.id);
    const Tensor& vr = val(row.id);
    if (vr.rows() != 1 || vr.cols() != vm.cols())
        throw_error(ErrorKind::shape,
                    "add_rowvec: bias must be 1x" + std::to_string(vm.cols()) + ", got " + vr.shape_str());
    Tensor out = vm;
    for (std::size_t i = 0; i < out.rows(); ++i)
        for (std::size_t j = 0; j < out.cols(); ++j) out.at(i, j) += vr.at(0, j);
    return emplace(std::move(out), {m.id, row.id}, [](Tape& t, int self) {
        const Tensor& g = t.grd(self);
        Tensor& gm = t.grd(t.recs_[self].parents[0]);
        Tensor& gr = t.grd(t.recs_[self].parents[1]);
        gm += g;
        for (std::size_t i = 0; i < g.rows(); ++i)
            for (std::size_t j = 0; j < g.cols(); ++j) gr.at(0, j) += g.at(i, j);
    });
}

Node Tape::tanh_(Node a) {
    check(a, "tanh");
    Tensor out = val(a.id);
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] = std::tanh(out[i]);
    return emplace(std::move(out), {a.id}, [](Tape& t, int self) {
        const Tensor& g = t.grd(self);
        const Tensor& y = t.val(self);
        Tensor& ga = t.grd(t.recs_[self].parents[0]);
        for (std::size_t i = 0; i < g.numel(); ++i) ga[i] += g[i] * (1.0 - y[i] * y[i]);
    });
}

Node Tape::sigmoid(Node a) {
    check(a, "sigmoid");
    Tensor out = val(a.id);
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] = stable_sigmoid(out[i]);
    return emplace(std::move(out), {a.id}, [](Tape& t, int self) {
        const Tensor& g = t.grd(self);
        const Tensor& y = t.val(self);
        Tensor& ga = t.grd(t.recs_[self].parents[0]);
        for (std::size_t i = 0; i < g.numel(); ++i) ga[i] += g[i] * y[i] * (1.0 - y[i]);
    });
}

Node Tape::exp_(Node a) {
    check(a, "exp");
    Tensor out = val(a.id);
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] = std::exp(out[i]);
    return emplace(std::move(out), {a.id}, [](Tape& t, int self) {
        const Tensor& g = t.grd(self);
        const Tensor& y = t.val(self);
        Tensor& ga = t.grd(t.recs_[self].parents[0]);
        for (std::size_t i = 0; i < g.numel(); ++i) ga[i] += g[i] * y[i];
    });
}

Node Tape::log_(Node a) {
    check(a, "log");
    const Tensor& va = val(a.id);
    Tensor out = va;
    for (std::size_t i = 0; i < out.numel(); ++i) {
        if (!(out[i] > 0.0))
            throw_error(ErrorKind::numeric, "log: non-positive input " + std::to_string(out[i]));
        out[i] = std::log(out[i]);
    }
    return emplace(std::move(out), {a.id}, [](Tape& t, int self) {
        const Tensor& g = t.grd(self);
        const Tensor& x = t.val(t.recs_[self].parents[0]);
        Tensor& ga = t.grd(t.recs_[self].parents[0]);
        for (std::size_t i = 0; i < g.numel(); ++i) ga[i] += g[i] / x[i];
    });
}

Node Tape::abs_(Node a) {
    check(a, "abs");
    Tensor out = val(a.id);
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] = std::fabs(out[i]);
    return emplace(std::move(out), {a.id}, [](Tape& t, int self) {
        const Tensor& g = t.grd(self);
        const Tensor& x = t.val(t.recs_[self].parents[0]);
        Tensor& ga = t.grd(t.recs_[self].parents[0]);
        for (std::size_t i = 0; i < g.numel(); ++i) {
            const double s = x[i] > 0.0 ? 1.0 : (x[i] < 0.0 ? -1.0 : 0.0);
            ga[i] += g[i] * s;
        }
    });
}

Node Tape::softmax_rows(Node a) {
    check(a, "softmax_rows");
    const Tensor& va = val(a.id);
    if (!va.all_finite()) throw_error(ErrorKind::numeric, "softmax_rows: non-finite input");
    Tensor out(va.rows(), va.cols());
    for (std::size_t i = 0; i < va.rows(); ++i) {
        double m = va.at(i, 0);
        for (std::size_t j = 1; j < va.cols(); ++j) m = std::max(m, va.at(i, j));
        double denom = 0.0;
        for (std::size_t j = 0; j < va.cols(); ++j) {
            const double e = std::exp(va.at(i, j) - m);
            out.at(i, j) = e;
            denom += e;
        }
        for (std::size_t j = 0; j < va.cols(); ++j) out.at(i, j) /= denom;
    }
    return emplace(std::move(out), {a.id}, [](Tape& t, int self) {
        const Tensor& g = t.grd(self);
        const Tensor& y = t.val(self);
        Tensor& ga = t.grd(t.recs_[self].parents[0]);
        for (std::size_t i = 0; i < g.rows(); ++i) {
            double dot = 0.0;
            for (std::size_t j = 0; j < g.cols(); ++j) dot += g.at(i, j) * y.at(i, j);
            for (std::size_t j = 0; j < g.cols(); ++j)
                ga.at(i, j) += y.at(i, j) * (g.at(i, j) - dot);
        }
    });
}

Node Tape::slice_cols(Node a, std::size_t c0, std::size_t c1) {
    check(a, "slice_cols");
    const Tensor& va = val(a.id);
    if (c0 >= c1 || c1 > va.cols())
        throw_error(ErrorKind::contract, "slice_cols: bad range [" + std::to_string(c0) + ", " +
                                             std::to_string(c1) + ") of " + va.shape_str());
    Tensor out(va.rows(), c1 - c0);
    for (std::size_t i = 0; i < va.rows(); ++i)
        for (std::size_t j = c0; j < c1; ++j) out.at(i, j - c0) = va.at(i, j);
    return emplace(std::move(out), {a.id}, [c0](Tape& t, int self) {
        const Tensor& g = t.grd(self);
        Tensor& ga = t.grd(t.recs_[self].parents[0]);
        for (std::size_t i = 0; i < g.rows(); ++i)
            for (std::size_t j = 0; j < g.cols(); ++j) ga.at(i, c0 + j) += g.at(i, j);
    });
}

Node Tape::gather_rows(Node a, std::vector<std::size_t> rows) {
    check(a, "gather_rows");
    const Tensor& va = val(a.id);
    for (std::size_t r : rows)
        if (r >= va.rows())
            throw_error(ErrorKind::contract, "gather_rows: row " + std::to_string(r) +
                                                 " out of range for " + va.shape_str());
    Tensor out(rows.size(), va.cols());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < va.cols(); ++j) out.at(i, j) = va.at(rows[i], j);
    return emplace(std::move(out), {a.id}, [rows = std::move(rows)](Tape& t, int self) {
        const Tensor& g = t.grd(self);
        Tensor& ga = t.grd(t.recs_[self].parents[0]);
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (std::size_t j = 0; j < g.cols(); ++j) ga.at(rows[i], j) += g.at(i, j);
    });
}

Node Tape::concat_rows(const std::vector<Node>& parts) {
    if (parts.empty()) throw_error(ErrorKind::contract, "concat_rows: no parts");
    std::size_t total = 0;
    const std::size_t cols = val(parts[0].id).cols();
    std::vector<int> parents;
    for (Node p : parts) {
        check(p, "concat_rows");
        const Tensor& v = val(p.id);
        if (v.cols() != cols)
            throw_error(ErrorKind::shape, "concat_rows: column mismatch " + v.shape_str());
        total += v.rows();
        parents.push_back(p.id);
    }
    Tensor out(total, cols);
    std::size_t r = 0;
    std::vector<std::size_t> offsets;
    for (Node p : parts) {
        const Tensor& v = val(p.id);
        offsets.push_back(r);
        for (std::size_t i = 0; i < v.rows(); ++i)
            for (std::size_t j = 0; j < cols; ++j) out.at(r + i, j) = v.at(i, j);
        r += v.rows();
    }
    return emplace(std::move(out), std::move(parents),
                   [offsets = std::move(offsets)](Tape& t, int self) {
                       const Tensor& g = t.grd(self);
                       const auto& parents = t.recs_[self].parents;
                       for (std::size_t k = 0; k < parents.size(); ++k) {
                           Tensor& gp = t.grd(parents[k]);
                           for (std::size_t i = 0; i < gp.rows(); ++i)
                               for (std::size_t j = 0; j < gp.cols(); ++j)
                                   gp.at(i, j) += g.at(offsets[k] + i, j);
                       }
                   });
}

Node Tape::concat_cols(Node a, Node b) {
    check(a, "concat_cols");
    check(b, "concat_cols");
    const Tensor& va = val(a.id);
    const Tensor& vb = val(b.id);
    if (va.rows() != vb.rows())
        throw_error(ErrorKind::shape,
                    "concat_cols: row mismatch " + va.shape_str() + " vs " + vb.shape_str());
    Tensor out(va.rows(), va.cols() + vb.cols());
    for (std::size_t i = 0; i < va.rows(); ++i) {
        for (std::size_t j = 0; j < va.cols(); ++j) out.at(i, j) = va.at(i, j);
        for (std::size_t j = 0; j < vb.cols(); ++j) out.at(i, va.cols() + j) = vb.at(i, j);
    }
    const std::size_t split = va.cols();
    return emplace(std::move(out), {a.id, b.id}, [split](Tape& t, int self) {
        const Tensor& g = t.grd(self);
        Tensor& ga = t.grd(t.recs_[self].parents[0]);
        Tensor& gb = t.grd(t.recs_[self].parents[1]);
        for (std::size_t i = 0; i < g.rows(); ++i) {
            for (std::size_t j = 0; j < split; ++j) ga.at(i, j) += g.at(i, j);
            for (std::size_t j = split; j < g.cols(); ++j) gb.at(i, j - split) += g.at(i, j);
        }
    });
}

Node Tape::segment_max_rows(Node a, std::vector<std::size_t> segment_sizes) {
    check(a, "segment_max_rows");
    const Tensor& va = val(a.id);
    std::size_t total = 0;
    for (std::size_t s : segment_sizes) {
        if (s == 0) throw_error(ErrorKind::contract, "segment_max_rows: empty segment");
        total += s;
    }
    if (total != va.rows())
        throw_error(ErrorKind::shape, "segment_max_rows: segments cover " + std::to_string(total) +
                                          " rows, input has " + std::to_string(va.rows()));
    Tensor out(segment_sizes.size(), va.cols());
    std::vector<std::size_t> argmax(segment_sizes.size() * va.cols());
    std::size_t row = 0;
    for (std::size_t s = 0; s < segment_sizes.size(); ++s) {
        for (std::size_t j = 0; j < va.cols(); ++j) {
            double best = va.at(row, j);
            std::size_t best_row = row;
            for (std::size_t i = 1; i < segment_sizes[s]; ++i) {
                const double v = va.at(row + i, j);
                if (v > best) {
                    best = v;
                    best_row = row + i;
                }
            }
            out.at(s, j) = best;
            argmax[s * va.cols() + j] = best_row;
        }
        row += segment_sizes[s];
    }
    return emplace(std::move(out), {a.id},
                   [argmax = std::move(argmax)](Tape& t, int self) {
                       const Tensor& g = t.grd(self);
                       Tensor& ga = t.grd(t.recs_[self].parents[0]);
                       for (std::size_t s = 0; s < g.rows(); ++s)
                           for (std::size_t j = 0; j < g.cols(); ++j)
                               ga.at(argmax[s * g.cols() + j], j) += g.at(s, j);
                   });
}

Node Tape::sum(Node a) {
    check(a, "sum");
    const Tensor& va = val(a.id);
    double s = 0.0;
    for (std::size_t i = 0; i < va.numel(); ++i) s += va[i];
    return emplace(Tensor::scalar(s), {a.id}, [](Tape& t, int self) {
        const double g = t.grd(self)[0];
        Tensor& ga = t.grd(t.recs_[self].parents[0]);
        for (std::size_t i = 0; i < ga.numel(); ++i) ga[i] += g;
    });
}

Node Tape::mean(Node a) {
    check(a, "mean");
    const Tensor& va = val(a.id);
    if (va.numel() == 0) throw_error(ErrorKind::contract, "mean: empty tensor");
    double s = 0.0;
    for (std::size_t i = 0; i < va.numel(); ++i) s += va[i];
    const double inv = 1.0 / static_cast<double>(va.numel());
    return emplace(Tensor::scalar(s * inv), {a.id}, [inv](Tape& t, int self) {
        const double g = t.grd(self)[0] * inv;
        Tensor& ga = t.grd(t.recs_[self].parents[0]);
        for (std::size_t i = 0; i < ga.numel(); ++i) ga[i] += g;
    });
}

Node Tape::frobenius_norm(Node a) {
    check(a, "frobenius_norm");
    const Tensor& va = val(a.id);
    double ss = 0.0;
    for (std::size_t i = 0; i < va.numel(); ++i) ss += va[i] * va[i];
    const double norm = std::sqrt(ss);
    return emplace(Tensor::scalar(norm), {a.id}, [norm](Tape& t, int self) {
        if (norm < 1e-300) return;  // subgradient 0 at the origin
        const double g = t.grd(self)[0] / norm;
        const Tensor& x = t.val(t.recs_[self].parents[0]);
        Tensor& ga = t.grd(t.recs_[self].parents[0]);
        for (std::size_t i = 0; i < ga.numel(); ++i) ga[i] += g * x[i];
    });
}

Node Tape::bce_with_logits(Node logits, Tensor targets) {
    check(logits, "bce_with_logits");
    const Tensor& z = val(logits.id);
    if (!z.same_shape(targets))
        throw_error(ErrorKind::shape, "bce_with_logits: logits " + z.shape_str() +
                                          " vs targets " + targets.shape_str());
    if (z.numel() == 0) throw_error(ErrorKind::contract, "bce_with_logits: empty input");
    double loss = 0.0;
    for (std::size_t i = 0; i < z.numel(); ++i) {
        // max(z,0) - z*t + log(1 + exp(-|z|))
        loss += std::max(z[i], 0.0) - z[i] * targets[i] + std::log1p(std::exp(-std::fabs(z[i])));
    }
    const double inv = 1.0 / static_cast<double>(z.numel());
    return emplace(Tensor::scalar(loss * inv), {logits.id},
                   [targets = std::move(targets), inv](Tape& t, int self) {
                       const double g = t.grd(self)[0] * inv;
                       const Tensor& z = t.val(t.recs_[self].parents[0]);
                       Tensor& gz = t.grd(t.recs_[self].parents[0]);
                       for (std::size_t i = 0; i < z.numel(); ++i)
                           gz[i] += g * (stable_sigmoid(z[i]) - targets[i]);
                   });
}

Node Tape::bce_probs(Node probs, Tensor targets) {
    check(probs, "bce_probs");
    const Tensor& p = val(probs.id);
    if (!p.same_shape(targets))
        throw_error(ErrorKind::shape,
                    "bce_probs: probs " + p.shape_str() + " vs targets " + targets.shape_str());
    if (p.numel() == 0) throw_error(ErrorKind::contract, "bce_probs: empty input");
    constexpr double kClamp = 1e-12;
    double loss = 0.0;
    for (std::size_t i = 0; i < p.numel(); ++i) {
        const double pc = std::clamp(p[i], kClamp, 1.0 - kClamp);
        loss -= targets[i] * std::log(pc) + (1.0 - targets[i]) * std::log(1.0 - pc);
    }
    const double inv = 1.0 / static_cast<double>(p.numel());
    return emplace(Tensor::scalar(loss * inv), {probs.id},
                   [targets = std::move(targets), inv](Tape& t, int self) {
                       constexpr double kClamp = 1e-12;
                       const double g = t.grd(self)[0] * inv;
                       const Tensor& p = t.val(t.recs_[self].parents[0]);
                       Tensor& gp = t.grd(t.recs_[self].parents[0]);
                       for (std::size_t i = 0; i < p.numel(); ++i) {
                           if (p[i] <= kClamp || p[i] >= 1.0 - kClamp) continue;  // flat
                           gp[i] += g * (p[i] - targets[i]) / (p[i] * (1.0 - p[i]));
                       }
                   });
}

Node Tape::softmax_xent_rows(Node logits, std::vector<int> labels) {
    check(logits, "softmax_xent_rows");
    const Tensor& z = val(logits.id);
    if (labels.size() != z.rows())
        throw_error(ErrorKind::shape, "softmax_xent_rows: " + std::to_string(labels.size()) +
                                          " labels for " + z.shape_str());
    if (z.rows() == 0) throw_error(ErrorKind::contract, "softmax_xent_rows: empty input");
    for (int c : labels)
        if (c < 0 || static_cast<std::size_t>(c) >= z.cols())
            throw_error(ErrorKind::contract, "softmax_xent_rows: label " + std::to_string(c) +
                                                 " out of range for " + z.shape_str());
    double loss = 0.0;
    for (std::size_t i = 0; i < z.rows(); ++i) {
        double m = z.at(i, 0);
        for (std::size_t j = 1; j < z.cols(); ++j) m = std::max(m, z.at(i, j));
        double lse = 0.0;
        for (std::size_t j = 0; j < z.cols(); ++j) lse += std::exp(z.at(i, j) - m);
        loss += m + std::log(lse) - z.at(i, static_cast<std::size_t>(labels[i]));
    }
    const double inv = 1.0 / static_cast<double>(z.rows());
    return emplace(Tensor::scalar(loss * inv), {logits.id},
                   [labels = std::move(labels), inv](Tape& t, int self) {
                       const double g = t.grd(self)[0] * inv;
                       const Tensor& z = t.val(t.recs_[self].parents[0]);
                       Tensor& gz = t.grd(t.recs_[self].parents[0]);
                       for (std::size_t i = 0; i < z.rows(); ++i) {
                           double m = z.at(i, 0);
                           for (std::size_t j = 1; j < z.cols(); ++j) m = std::max(m, z.at(i, j));
                           double denom = 0.0;
                           for (std::size_t j = 0; j < z.cols(); ++j) denom += std::exp(z.at(i, j) - m);
                           for (std::size_t j = 0; j < z.cols(); ++j) {
                               const double soft = std::exp(z.at(i, j) - m) / denom;
                               const double onehot =
                                   j == static_cast<std::size_t>(labels[i]) ? 1.0 : 0.0;
                               gz.at(i, j) += g * (soft - onehot);
                           }
                       }
                   });
}

Node Tape::detach(Node a) {
    check(a, "detach");
    return emplace(val(a.id), {}, {});
}

const Tensor& Tape::value(Node n) const {
    check(n, "value");
    return recs_[static_cast<std::size_t>(n.id)].value;
}

void Tape::backward(Node loss) {
    check(loss, "backward");
    if (backward_ran_) throw_error(ErrorKind::contract, "backward already ran on this tape");
    const Tensor& lv = val(loss.id);
    if (!lv.is_scalar())
        throw_error(ErrorKind::contract, "backward: loss must be 1x1, got " + lv.shape_str());

    grads_.clear();
    grads_.reserve(recs_.size());
    for (const Rec& r : recs_) grads_.emplace_back(r.value.rows(), r.value.cols());

    // restrict the sweep to ancestors of the loss
    std::vector<char> reachable(recs_.size(), 0);
    std::vector<int> stack = {loss.id};
    reachable[static_cast<std::size_t>(loss.id)] = 1;
    while (!stack.empty()) {
        const int id = stack.back();
        stack.pop_back();
        for (int p : recs_[static_cast<std::size_t>(id)].parents) {
            if (!reachable[static_cast<std::size_t>(p)]) {
                reachable[static_cast<std::size_t>(p)] = 1;
                stack.push_back(p);
            }
        }
    }

    grads_[static_cast<std::size_t>(loss.id)][0] = 1.0;
    for (int id = loss.id; id >= 0; --id) {
        if (!reachable[static_cast<std::size_t>(id)]) continue;
        const Rec& r = recs_[static_cast<std::size_t>(id)];
        if (r.back) r.back(*this, id);
    }
    backward_ran_ = true;
}

const Tensor& Tape::grad_at(Node n) const {
    check(n, "grad_at");
    if (!backward_ran_) throw_error(ErrorKind::contract, "grad_at before backward");
    return grads_[static_cast<std::size_t>(n.id)];
}

GradMap Tape::param_grads() const {
    if (store_ == nullptr) throw_error(ErrorKind::contract, "param_grads without a bound store");
    if (!backward_ran_) throw_error(ErrorKind::contract, "param_grads before backward");
    GradMap out;
    for (const auto& [name, value] : store_->map()) {
        auto it = bound_.find(name);
        if (it != bound_.end()) {
            out.emplace(name, grads_[static_cast<std::size_t>(it->second)]);
        } else {
            out.emplace(name, Tensor(value.rows(), value.cols()));
        }
    }
    return out;
}

std::vector<std::string> Tape::touched_params() const {
    std::vector<std::string> out;
    out.reserve(bound_.size());
    for (const auto& [name, _] : bound_) out.push_back(name);
    return out;
}

}  // namespace lg3d
