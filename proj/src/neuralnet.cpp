#include "beamrl/neuralnet.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "beamrl/errors.hpp"

namespace beamrl {

int MlpParams::input_size() const {
    return layers.empty() ? 0 : static_cast<int>(layers.front().weight.cols());
}

int MlpParams::output_size() const {
    return layers.empty() ? 0 : static_cast<int>(layers.back().weight.rows());
}

std::size_t MlpParams::num_parameters() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
    return n;
}

namespace {

Eigen::VectorXd flatten(const std::vector<DenseLayer>& layers) {
    std::size_t n = 0;
    for (const auto& l : layers) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
    Eigen::VectorXd out(static_cast<Eigen::Index>(n));
    Eigen::Index k = 0;
    for (const auto& l : layers) {
        for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
            for (Eigen::Index c = 0; c < l.weight.cols(); ++c) out[k++] = l.weight(r, c);
        for (Eigen::Index r = 0; r < l.bias.size(); ++r) out[k++] = l.bias[r];
    }
    return out;
}

}  // namespace

Eigen::VectorXd MlpParams::flat() const { return flatten(layers); }

void MlpParams::set_flat(const Eigen::VectorXd& values) {
    require(static_cast<std::size_t>(values.size()) == num_parameters(),
            "MlpParams::set_flat: size mismatch");
    Eigen::Index k = 0;
    for (auto& l : layers) {
        for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
            for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = values[k++];
        for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias[r] = values[k++];
    }
}

bool MlpParams::all_finite() const {
    for (const auto& l : layers)
        if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
    return true;
}

bool MlpParams::same_shape(const MlpParams& other) const {
    if (layers.size() != other.layers.size()) return false;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        if (layers[i].weight.rows() != other.layers[i].weight.rows() ||
            layers[i].weight.cols() != other.layers[i].weight.cols())
            return false;
    }
    return true;
}

MlpParams make_mlp(const MlpShape& shape, Rng& rng) {
    require(shape.input >= 1 && shape.output >= 1 && shape.width >= 1 && shape.depth >= 0,
            "make_mlp: invalid shape");
    MlpParams p;
    std::vector<int> sizes{shape.input};
    for (int i = 0; i < shape.depth; ++i) sizes.push_back(shape.width);
    sizes.push_back(shape.output);
    for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(sizes[i]));
        std::uniform_real_distribution<double> u(-bound, bound);
        DenseLayer layer{Eigen::MatrixXd(sizes[i + 1], sizes[i]), Eigen::VectorXd(sizes[i + 1])};
        for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
            for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = u(rng);
        for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias[r] = u(rng);
        p.layers.push_back(std::move(layer));
    }
    return p;
}

MlpParams make_mlp(const MlpShape& shape, Rng& rng, const Eigen::VectorXd& low,
                   const Eigen::VectorXd& high) {
    require(low.size() == shape.output && high.size() == shape.output,
            "make_mlp: output bounds must match output width");
    require((high.array() > low.array()).all(), "make_mlp: output bounds must satisfy low < high");
    MlpParams p = make_mlp(shape, rng);
    p.output = OutputActivation::ScaledTanh;
    p.out_low = low;
    p.out_high = high;
    return p;
}

namespace {

Eigen::MatrixXd apply_head(const MlpParams& params, const Eigen::MatrixXd& z) {
    if (params.output == OutputActivation::Linear) return z;
    const Eigen::VectorXd half = (params.out_high - params.out_low) / 2.0;
    Eigen::MatrixXd y = (z.array().tanh() + 1.0).matrix();
    y = half.asDiagonal() * y;
    y.colwise() += params.out_low;
    return y;
}

}  // namespace

Eigen::MatrixXd forward(const MlpParams& params, const Eigen::MatrixXd& input, ForwardCache& cache) {
    require(!params.layers.empty(), "forward: empty network");
    require(input.rows() == params.input_size(), "forward: input width mismatch");
    cache.activations.clear();
    cache.activations.push_back(input);
    const std::size_t n = params.layers.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        Eigen::MatrixXd z = params.layers[i].weight * cache.activations.back();
        z.colwise() += params.layers[i].bias;
        cache.activations.push_back(z.array().tanh().matrix());
    }
    cache.pre_output = params.layers.back().weight * cache.activations.back();
    cache.pre_output.colwise() += params.layers.back().bias;
    return apply_head(params, cache.pre_output);
}

Eigen::MatrixXd forward(const MlpParams& params, const Eigen::MatrixXd& input) {
    ForwardCache cache;
    return forward(params, input, cache);
}

Eigen::VectorXd forward_one(const MlpParams& params, const Eigen::VectorXd& input) {
    return forward(params, Eigen::MatrixXd(input)).col(0);
}

GradientSet GradientSet::zeros_like(const MlpParams& params) {
    GradientSet g;
    for (const auto& l : params.layers)
        g.layers.push_back({Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()),
                            Eigen::VectorXd::Zero(l.bias.size())});
    return g;
}

Eigen::VectorXd GradientSet::flat() const { return flatten(layers); }

bool GradientSet::same_shape(const MlpParams& params) const {
    if (layers.size() != params.layers.size()) return false;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        if (layers[i].weight.rows() != params.layers[i].weight.rows() ||
            layers[i].weight.cols() != params.layers[i].weight.cols())
            return false;
    }
    return true;
}

GradientSet backward(const MlpParams& params, const ForwardCache& cache,
                     const Eigen::MatrixXd& upstream) {
    if (cache.empty() || cache.activations.size() != params.layers.size())
        throw UsageError("backward: no cached forward pass for this network");
    require(upstream.rows() == params.output_size() && upstream.cols() == cache.pre_output.cols(),
            "backward: upstream gradient shape mismatch");

    Eigen::MatrixXd delta = upstream;
    if (params.output == OutputActivation::ScaledTanh) {
        const Eigen::VectorXd half = (params.out_high - params.out_low) / 2.0;
        const Eigen::ArrayXXd t = cache.pre_output.array().tanh();
        delta = (half.asDiagonal() * upstream).cwiseProduct((1.0 - t.square()).matrix());
    }

    GradientSet g;
    g.layers.resize(params.layers.size());
    for (std::size_t i = params.layers.size(); i-- > 0;) {
        const Eigen::MatrixXd& a_in = cache.activations[i];
        g.layers[i].weight = delta * a_in.transpose();
        g.layers[i].bias = delta.rowwise().sum();
        Eigen::MatrixXd back = params.layers[i].weight.transpose() * delta;
        if (i > 0)
            delta = back.cwiseProduct((1.0 - a_in.array().square()).matrix());
        else
            g.input = std::move(back);
    }
    return g;
}

void sgd_update(MlpParams& params, const GradientSet& grads, double lr) {
    require(grads.same_shape(params), "sgd_update: gradient shape mismatch");
    for (std::size_t i = 0; i < params.layers.size(); ++i) {
        params.layers[i].weight -= lr * grads.layers[i].weight;
        params.layers[i].bias -= lr * grads.layers[i].bias;
    }
}

Adam::Adam(const MlpParams& params, AdamConfig config)
    : config_(config), m_(GradientSet::zeros_like(params)), v_(GradientSet::zeros_like(params)) {}

void Adam::step(MlpParams& params, const GradientSet& grads) {
    require(grads.same_shape(params) && m_.same_shape(params), "Adam::step: gradient shape mismatch");
    ++t_;
    const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
        m = config_.beta1 * m + (1.0 - config_.beta1) * g;
        v = config_.beta2 * v + (1.0 - config_.beta2) * g.cwiseAbs2();
        param.array() -= config_.lr * (m.array() / c1) / ((v.array() / c2).sqrt() + config_.eps);
    };
    for (std::size_t i = 0; i < params.layers.size(); ++i) {
        update(params.layers[i].weight, m_.layers[i].weight, v_.layers[i].weight, grads.layers[i].weight);
        update(params.layers[i].bias, m_.layers[i].bias, v_.layers[i].bias, grads.layers[i].bias);
    }
}

Optimizer::Optimizer(const MlpParams& params, OptimizerKind kind, double lr)
    : kind_(kind), lr_(lr), adam_(params, AdamConfig{lr}) {}

void Optimizer::step(MlpParams& params, const GradientSet& grads) {
    if (kind_ == OptimizerKind::Adam)
        adam_.step(params, grads);
    else
        sgd_update(params, grads, lr_);
}

void soft_update(MlpParams& target, const MlpParams& source, double tau) {
    require(tau >= 0.0 && tau <= 1.0, "soft_update: tau must lie in [0, 1]");
    require(target.same_shape(source), "soft_update: shape mismatch");
    if (tau == 1.0) {
        for (std::size_t i = 0; i < target.layers.size(); ++i) target.layers[i] = source.layers[i];
        return;
    }
    for (std::size_t i = 0; i < target.layers.size(); ++i) {
        target.layers[i].weight = tau * source.layers[i].weight + (1.0 - tau) * target.layers[i].weight;
        target.layers[i].bias = tau * source.layers[i].bias + (1.0 - tau) * target.layers[i].bias;
    }
}

// Text checkpoint:
//   beamrl-mlp 1
//   <n_layers> <linear|scaled_tanh>
//   per layer: <rows> <cols>, then weights row-major, then bias
//   scaled_tanh only: low values, high values
void save_params(const MlpParams& params, std::ostream& out) {
    out << "beamrl-mlp 1\n"
        << params.layers.size() << ' '
        << (params.output == OutputActivation::Linear ? "linear" : "scaled_tanh") << '\n';
    out << std::setprecision(17);
    for (const auto& l : params.layers) {
        out << l.weight.rows() << ' ' << l.weight.cols() << '\n';
        for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
            for (Eigen::Index c = 0; c < l.weight.cols(); ++c) out << (c ? " " : "") << l.weight(r, c);
            out << '\n';
        }
        for (Eigen::Index r = 0; r < l.bias.size(); ++r) out << (r ? " " : "") << l.bias[r];
        out << '\n';
    }
    if (params.output == OutputActivation::ScaledTanh) {
        for (Eigen::Index r = 0; r < params.out_low.size(); ++r) out << (r ? " " : "") << params.out_low[r];
        out << '\n';
        for (Eigen::Index r = 0; r < params.out_high.size(); ++r) out << (r ? " " : "") << params.out_high[r];
        out << '\n';
    }
}

MlpParams load_params(std::istream& in) {
    auto fail = [](const std::string& what) { detail::throw_config("checkpoint: " + what); };
    std::string magic;
    int version = 0;
    if (!(in >> magic >> version) || magic != "beamrl-mlp" || version != 1) fail("bad header");
    std::size_t n_layers = 0;
    std::string head;
    if (!(in >> n_layers >> head)) fail("bad layer count");
    MlpParams p;
    if (head == "linear")
        p.output = OutputActivation::Linear;
    else if (head == "scaled_tanh")
        p.output = OutputActivation::ScaledTanh;
    else
        fail("unknown output head '" + head + "'");
    for (std::size_t i = 0; i < n_layers; ++i) {
        Eigen::Index rows = 0, cols = 0;
        if (!(in >> rows >> cols) || rows < 1 || cols < 1) fail("bad layer shape");
        DenseLayer l{Eigen::MatrixXd(rows, cols), Eigen::VectorXd(rows)};
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index c = 0; c < cols; ++c)
                if (!(in >> l.weight(r, c))) fail("truncated weights");
        for (Eigen::Index r = 0; r < rows; ++r)
            if (!(in >> l.bias[r])) fail("truncated bias");
        p.layers.push_back(std::move(l));
    }
    if (p.output == OutputActivation::ScaledTanh) {
        const int out = p.output_size();
        p.out_low.resize(out);
        p.out_high.resize(out);
        for (int r = 0; r < out; ++r)
            if (!(in >> p.out_low[r])) fail("truncated output bounds");
        for (int r = 0; r < out; ++r)
            if (!(in >> p.out_high[r])) fail("truncated output bounds");
    }
    return p;
}

void save_params(const MlpParams& params, const std::string& path) {
    std::ofstream out(path);
    if (!out) detail::throw_config("cannot write checkpoint '" + path + "'");
    save_params(params, out);
}

MlpParams load_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) detail::throw_config("cannot read checkpoint '" + path + "'");
    return load_params(in);
}

}  // namespace beamrl
