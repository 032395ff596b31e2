#pragma once

#include <cstddef>
#include <filesystem>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace mrta {

enum class Activation { identity, relu, sigmoid, tanh };

std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view name);

Eigen::MatrixXd activate(Activation a, const Eigen::MatrixXd& pre);
/// d(activation)/d(pre) evaluated element-wise, given both pre and post values.
Eigen::MatrixXd activation_derivative(Activation a, const Eigen::MatrixXd& pre,
                                      const Eigen::MatrixXd& post);

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
};

/// Values kept from a batched forward pass. Column k is sample k.
struct ForwardCache {
  std::vector<Eigen::MatrixXd> pre;   // per layer, before activation
  std::vector<Eigen::MatrixXd> post;  // post[0] is the input
};

struct MlpGradients {
  std::vector<DenseLayer> layers;

  MlpGradients& operator+=(const MlpGradients& other);
  MlpGradients& operator*=(double s);
  double squared_norm() const;
};

/// Fully connected feed-forward network with one activation for every hidden
/// layer and a separate one for the output layer.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::vector<std::size_t> layer_sizes, Activation hidden, Activation output);

  /// Uniform fan-in initialisation (He-style bound for ReLU hidden layers,
  /// a smaller bound on the last layer so initial outputs sit near the
  /// activation's centre).
  static Mlp initialized(std::vector<std::size_t> layer_sizes, Activation hidden,
                         Activation output, std::mt19937_64& rng);

  std::size_t input_size() const { return sizes_.front(); }
  std::size_t output_size() const { return sizes_.back(); }
  const std::vector<std::size_t>& layer_sizes() const { return sizes_; }
  Activation hidden_activation() const { return hidden_; }
  Activation output_activation() const { return output_; }
  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

  Eigen::VectorXd forward(const Eigen::VectorXd& input) const;
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& inputs, ForwardCache* cache = nullptr) const;

  /// Reverse-mode pass. `upstream` is dL/d(output) with the same shape as the
  /// batch output; gradients are summed over the batch. When `input_grad` is
  /// given it receives dL/d(input).
  MlpGradients backward(const ForwardCache& cache, const Eigen::MatrixXd& upstream,
                        Eigen::MatrixXd* input_grad = nullptr) const;

  MlpGradients zero_gradients() const;
  std::size_t parameter_count() const;
  std::vector<double> flatten() const;
  void assign_flat(std::span<const double> values);

  /// this = tau * online + (1 - tau) * this
  void soft_update_from(const Mlp& online, double tau);
  bool finite() const;

  bool operator==(const Mlp& other) const;

 private:
  std::vector<std::size_t> sizes_;
  Activation hidden_ = Activation::relu;
  Activation output_ = Activation::identity;
  std::vector<DenseLayer> layers_;
};

/// JSON checkpoint: a header with layer sizes and activations, then each
/// layer's weights in row-major order followed by its bias.
void save_checkpoint(const Mlp& net, const std::filesystem::path& path);
Mlp load_checkpoint(const std::filesystem::path& path);

}  // namespace mrta
