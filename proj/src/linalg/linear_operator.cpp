#include "bqpg/linalg/linear_operator.hpp"

namespace bqpg::linalg {

Mat dense_materialize(const LinearOperator& op, Index cap) {
    if (op.dim() > cap)
        throw OracleCapExceeded("dense_materialize: dim " + std::to_string(op.dim()) +
                                " exceeds oracle cap " + std::to_string(cap));
    Mat full = op.apply_block(Mat::Identity(op.dim(), op.dim()));
    return full;
}

}  // namespace bqpg::linalg
