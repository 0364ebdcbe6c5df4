#pragma once

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "ptblockade/linalg/matrix.hpp"
#include "ptblockade/linalg/sparse.hpp"
#include "ptblockade/model/hamiltonian.hpp"
#include "ptblockade/model/operators.hpp"
#include "ptblockade/model/params.hpp"

namespace ptb {

/// One dissipator term rate * D[op], D[o]rho = o rho o' - (o'o rho + rho o'o)/2.
/// The rate may be negative.
struct JumpChannel {
    std::string name;
    ComplexMatrix op;
    double rate = 0.0;
};

/// rho -> -i[H, rho] + sum_k rate_k D[o_k] rho, stored in the split form
/// A rho + rho A' + sum_k rate_k o_k rho o_k' with A = -iH - 1/2 sum_k rate_k o_k'o_k.
/// Immutable after construction; apply() may run concurrently.
class Liouvillian {
public:
    Liouvillian(ComplexMatrix hamiltonian, std::vector<JumpChannel> jumps)
        : h_(std::move(hamiltonian)), jumps_(std::move(jumps))
    {
        if (!h_.is_square()) throw UsageError("Liouvillian: Hamiltonian not square " + h_.shape());
        a_ = complex{0.0, -1.0} * h_;
        for (const auto& j : jumps_) {
            if (j.op.rows() != h_.rows() || !j.op.is_square()) {
                throw UsageError("Liouvillian: jump '" + j.name + "' has shape " + j.op.shape());
            }
            a_ -= (0.5 * j.rate) * (dagger(j.op) * j.op);
            jump_sparse_.push_back(SparseMatrix::from_dense(j.op));
        }
        a_sparse_ = SparseMatrix::from_dense(a_);
        a_adj_sparse_ = SparseMatrix::from_dense(dagger(a_));
    }

    std::size_t dimension() const noexcept { return h_.rows(); }
    const ComplexMatrix& hamiltonian() const noexcept { return h_; }
    const std::vector<JumpChannel>& jumps() const noexcept { return jumps_; }

    /// The jump-free part A of the generator.
    const ComplexMatrix& effective_generator() const noexcept { return a_; }

    /// out = L(rho); out must already have rho's shape.
    void apply(const ComplexMatrix& rho, ComplexMatrix& out) const
    {
        rho.require_same_shape(h_, "Liouvillian::apply");
        out.require_same_shape(h_, "Liouvillian::apply");
        std::fill(out.storage().begin(), out.storage().end(), complex{0.0, 0.0});
        a_sparse_.multiply_add(rho, 1.0, out);
        a_adj_sparse_.right_multiply_add(rho, 1.0, out);
        for (std::size_t k = 0; k < jumps_.size(); ++k)
            jump_sparse_[k].sandwich_add(rho, jumps_[k].rate, out);
    }

    ComplexMatrix operator()(const ComplexMatrix& rho) const
    {
        ComplexMatrix out(rho.rows(), rho.cols());
        apply(rho, out);
        return out;
    }

private:
    ComplexMatrix h_;
    std::vector<JumpChannel> jumps_;
    ComplexMatrix a_;
    SparseMatrix a_sparse_;
    SparseMatrix a_adj_sparse_;
    std::vector<SparseMatrix> jump_sparse_;
};

/// Jump channels for the given gain model. negative_loss is the literal signed form
/// kappa1 D[a1] - kappa2 D[a2]; pumped replaces a gain (kappa2 > 0) by kappa2 D[a2'].
inline std::vector<JumpChannel> jump_channels(const SystemParams& p, const OperatorSet& ops)
{
    std::vector<JumpChannel> jumps;
    jumps.push_back({"a1", ops.a1, p.kappa1});
    if (p.gain_model == GainModel::pumped && p.kappa2 > 0.0) {
        jumps.push_back({"a2_dag", dagger(ops.a2), p.kappa2});
    } else if (p.kappa2 != 0.0) {
        jumps.push_back({"a2", ops.a2, -p.kappa2});
    }
    if (p.gamma_m > 0.0) {
        jumps.push_back({"b", ops.b, p.gamma_m * (p.n_th + 1.0)});
        if (p.n_th > 0.0) jumps.push_back({"b_dag", dagger(ops.b), p.gamma_m * p.n_th});
    }
    return jumps;
}

inline Liouvillian make_liouvillian(const SystemParams& p, const OperatorSet& ops)
{
    return Liouvillian(build_H1(p, ops), jump_channels(p, ops));
}

} // namespace ptb
