#include "bqpg/kernels/kernel_model.hpp"

namespace bqpg::kernels {

CompositeKernel composite_kernel_operator(const KernelModel& model,
                                          const policy::PolicyNetwork& pol,
                                          const policy::SampleBatch& batch,
                                          const FisherKernelConfig& fisher_config, Rng& rng) {
    model.validate();
    return CompositeKernel{
        SkiOperator::build(model.state_kernel, batch.states, model.grid),
        fisher_kernel_operator(pol, batch, fisher_config, rng),
        model.c1,
        model.c2,
    };
}

}  // namespace bqpg::kernels
