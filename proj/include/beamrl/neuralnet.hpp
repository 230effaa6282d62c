#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "beamrl/rng.hpp"

namespace beamrl {

enum class OutputActivation {
    Linear,
    /// low + (high - low) * (tanh(z) + 1) / 2, per output.
    ScaledTanh,
};

struct DenseLayer {
    Eigen::MatrixXd weight;  // out x in
    Eigen::VectorXd bias;    // out
};

/// Feed-forward network: tanh on every hidden layer, configurable output head.
struct MlpParams {
    std::vector<DenseLayer> layers;
    OutputActivation output = OutputActivation::Linear;
    Eigen::VectorXd out_low;
    Eigen::VectorXd out_high;

    int input_size() const;
    int output_size() const;
    std::size_t num_parameters() const;
    /// Layer-order, row-major weights followed by bias, per layer.
    Eigen::VectorXd flat() const;
    void set_flat(const Eigen::VectorXd& values);
    bool all_finite() const;
    bool same_shape(const MlpParams& other) const;
};

struct MlpShape {
    int input = 1;
    int width = 28;
    int depth = 4;  // hidden layers
    int output = 1;
};

/// Weights and biases uniform in +-1/sqrt(fan_in).
MlpParams make_mlp(const MlpShape& shape, Rng& rng);
MlpParams make_mlp(const MlpShape& shape, Rng& rng, const Eigen::VectorXd& low,
                   const Eigen::VectorXd& high);

/// Activations recorded by a forward pass; one column per sample.
struct ForwardCache {
    std::vector<Eigen::MatrixXd> activations;  // input, then each hidden layer's tanh output
    Eigen::MatrixXd pre_output;                // output layer before the head
    bool empty() const { return activations.empty(); }
};

Eigen::MatrixXd forward(const MlpParams& params, const Eigen::MatrixXd& input);
Eigen::MatrixXd forward(const MlpParams& params, const Eigen::MatrixXd& input, ForwardCache& cache);
Eigen::VectorXd forward_one(const MlpParams& params, const Eigen::VectorXd& input);

struct GradientSet {
    std::vector<DenseLayer> layers;
    Eigen::MatrixXd input;  // d(upstream . output)/d(input), one column per sample

    static GradientSet zeros_like(const MlpParams& params);
    Eigen::VectorXd flat() const;
    bool same_shape(const MlpParams& params) const;
};

/// Gradients of sum(upstream .* output) over the cached batch.
GradientSet backward(const MlpParams& params, const ForwardCache& cache,
                     const Eigen::MatrixXd& upstream);

void sgd_update(MlpParams& params, const GradientSet& grads, double lr);

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

class Adam {
public:
    Adam(const MlpParams& params, AdamConfig config);
    void step(MlpParams& params, const GradientSet& grads);

    const AdamConfig& config() const { return config_; }
    std::int64_t steps() const { return t_; }
    const GradientSet& first_moment() const { return m_; }
    const GradientSet& second_moment() const { return v_; }

private:
    AdamConfig config_;
    GradientSet m_;
    GradientSet v_;
    std::int64_t t_ = 0;
};

enum class OptimizerKind { Adam, Sgd };

/// Either Adam or plain SGD behind one call.
class Optimizer {
public:
    Optimizer(const MlpParams& params, OptimizerKind kind, double lr);
    void step(MlpParams& params, const GradientSet& grads);

private:
    OptimizerKind kind_;
    double lr_;
    Adam adam_;
};

/// target <- tau*source + (1-tau)*target.
void soft_update(MlpParams& target, const MlpParams& source, double tau);

void save_params(const MlpParams& params, std::ostream& out);
MlpParams load_params(std::istream& in);
void save_params(const MlpParams& params, const std::string& path);
MlpParams load_params(const std::string& path);

}  // namespace beamrl
