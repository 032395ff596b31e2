#include "mrta/nn.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

#include "json.hpp"

namespace mrta {

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
    case Activation::tanh: return "tanh";
  }
  return "identity";
}

Activation activation_from_string(std::string_view name) {
  if (name == "identity" || name == "linear") return Activation::identity;
  if (name == "relu") return Activation::relu;
  if (name == "sigmoid" || name == "logistic") return Activation::sigmoid;
  if (name == "tanh") return Activation::tanh;
  throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

Eigen::MatrixXd activate(Activation a, const Eigen::MatrixXd& pre) {
  switch (a) {
    case Activation::identity: return pre;
    case Activation::relu: return pre.cwiseMax(0.0);
    case Activation::sigmoid: return pre.unaryExpr([](double z) { return 1.0 / (1.0 + std::exp(-z)); });
    case Activation::tanh: return pre.array().tanh().matrix();
  }
  return pre;
}

Eigen::MatrixXd activation_derivative(Activation a, const Eigen::MatrixXd& pre,
                                      const Eigen::MatrixXd& post) {
  switch (a) {
    case Activation::identity: return Eigen::MatrixXd::Ones(pre.rows(), pre.cols());
    case Activation::relu: return pre.unaryExpr([](double z) { return z > 0.0 ? 1.0 : 0.0; });
    case Activation::sigmoid: return (post.array() * (1.0 - post.array())).matrix();
    case Activation::tanh: return (1.0 - post.array().square()).matrix();
  }
  return Eigen::MatrixXd::Ones(pre.rows(), pre.cols());
}

MlpGradients& MlpGradients::operator+=(const MlpGradients& other) {
  if (other.layers.size() != layers.size()) throw std::invalid_argument("gradient shape mismatch");
  for (std::size_t k = 0; k < layers.size(); ++k) {
    layers[k].weight += other.layers[k].weight;
    layers[k].bias += other.layers[k].bias;
  }
  return *this;
}

MlpGradients& MlpGradients::operator*=(double s) {
  for (auto& l : layers) {
    l.weight *= s;
    l.bias *= s;
  }
  return *this;
}

double MlpGradients::squared_norm() const {
  double total = 0.0;
  for (const auto& l : layers) total += l.weight.squaredNorm() + l.bias.squaredNorm();
  return total;
}

Mlp::Mlp(std::vector<std::size_t> layer_sizes, Activation hidden, Activation output)
    : sizes_(std::move(layer_sizes)), hidden_(hidden), output_(output) {
  if (sizes_.size() < 2) throw std::invalid_argument("an MLP needs at least input and output sizes");
  for (auto s : sizes_) {
    if (s == 0) throw std::invalid_argument("layer sizes must be positive");
  }
  for (std::size_t k = 0; k + 1 < sizes_.size(); ++k) {
    const auto in = static_cast<Eigen::Index>(sizes_[k]);
    const auto out = static_cast<Eigen::Index>(sizes_[k + 1]);
    layers_.push_back({Eigen::MatrixXd::Zero(out, in), Eigen::VectorXd::Zero(out)});
  }
}

Mlp Mlp::initialized(std::vector<std::size_t> layer_sizes, Activation hidden, Activation output,
                     std::mt19937_64& rng) {
  Mlp net(std::move(layer_sizes), hidden, output);
  for (std::size_t k = 0; k < net.layers_.size(); ++k) {
    auto& layer = net.layers_[k];
    const double fan_in = static_cast<double>(layer.weight.cols());
    const bool last = k + 1 == net.layers_.size();
    const double bound = last ? 0.1 * std::sqrt(3.0 / fan_in) : std::sqrt(6.0 / fan_in);
    std::uniform_real_distribution<double> u(-bound, bound);
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = u(rng);
    }
    layer.bias.setZero();
  }
  return net;
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& input) const {
  return forward_batch(input, nullptr).col(0);
}

Eigen::MatrixXd Mlp::forward_batch(const Eigen::MatrixXd& inputs, ForwardCache* cache) const {
  if (static_cast<std::size_t>(inputs.rows()) != input_size()) {
    throw std::invalid_argument("input has " + std::to_string(inputs.rows()) +
                                " rows, network expects " + std::to_string(input_size()));
  }
  if (cache) {
    cache->pre.clear();
    cache->post.clear();
    cache->post.push_back(inputs);
  }
  Eigen::MatrixXd x = inputs;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    Eigen::MatrixXd z = layers_[k].weight * x;
    z.colwise() += layers_[k].bias;
    x = activate(k + 1 == layers_.size() ? output_ : hidden_, z);
    if (cache) {
      cache->pre.push_back(std::move(z));
      cache->post.push_back(x);
    }
  }
  return x;
}

MlpGradients Mlp::backward(const ForwardCache& cache, const Eigen::MatrixXd& upstream,
                           Eigen::MatrixXd* input_grad) const {
  if (cache.pre.size() != layers_.size() || cache.post.size() != layers_.size() + 1) {
    throw std::invalid_argument("forward cache does not match network depth");
  }
  const auto& out = cache.post.back();
  if (upstream.rows() != out.rows() || upstream.cols() != out.cols()) {
    throw std::invalid_argument("upstream gradient shape does not match network output");
  }
  MlpGradients grads;
  grads.layers.resize(layers_.size());
  Eigen::MatrixXd delta = upstream;
  for (std::size_t k = layers_.size(); k-- > 0;) {
    const Activation act = k + 1 == layers_.size() ? output_ : hidden_;
    delta = delta.cwiseProduct(activation_derivative(act, cache.pre[k], cache.post[k + 1]));
    grads.layers[k].weight = delta * cache.post[k].transpose();
    grads.layers[k].bias = delta.rowwise().sum();
    delta = layers_[k].weight.transpose() * delta;
  }
  if (input_grad) *input_grad = std::move(delta);
  return grads;
}

MlpGradients Mlp::zero_gradients() const {
  MlpGradients g;
  for (const auto& l : layers_) {
    g.layers.push_back({Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()),
                        Eigen::VectorXd::Zero(l.bias.size())});
  }
  return g;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

std::vector<double> Mlp::flatten() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (const auto& l : layers_) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) out.push_back(l.weight(r, c));
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) out.push_back(l.bias(r));
  }
  return out;
}

void Mlp::assign_flat(std::span<const double> values) {
  if (values.size() != parameter_count()) {
    throw std::invalid_argument("flat parameter vector has wrong length");
  }
  std::size_t i = 0;
  for (auto& l : layers_) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = values[i++];
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias(r) = values[i++];
  }
}

void Mlp::soft_update_from(const Mlp& online, double tau) {
  if (online.sizes_ != sizes_) throw std::invalid_argument("soft update between different shapes");
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    layers_[k].weight = tau * online.layers_[k].weight + (1.0 - tau) * layers_[k].weight;
    layers_[k].bias = tau * online.layers_[k].bias + (1.0 - tau) * layers_[k].bias;
  }
}

bool Mlp::finite() const {
  for (const auto& l : layers_) {
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  }
  return true;
}

bool Mlp::operator==(const Mlp& other) const {
  if (sizes_ != other.sizes_ || hidden_ != other.hidden_ || output_ != other.output_) return false;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    if (layers_[k].weight != other.layers_[k].weight || layers_[k].bias != other.layers_[k].bias) {
      return false;
    }
  }
  return true;
}

void save_checkpoint(const Mlp& net, const std::filesystem::path& path) {
  nlohmann::json doc;
  doc["format"] = "mrta-mlp";
  doc["version"] = 1;
  doc["layer_sizes"] = net.layer_sizes();
  doc["hidden_activation"] = std::string(to_string(net.hidden_activation()));
  doc["output_activation"] = std::string(to_string(net.output_activation()));
  auto& layers = doc["layers"] = nlohmann::json::array();
  for (const auto& l : net.layers()) {
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(l.weight.size()));
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) w.push_back(l.weight(r, c));
    }
    std::vector<double> b(l.bias.data(), l.bias.data() + l.bias.size());
    layers.push_back({{"weights", w}, {"bias", b}});
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path.string());
  out << doc.dump() << '\n';
  if (!out) throw std::runtime_error("failed writing checkpoint: " + path.string());
}

Mlp load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed checkpoint " + path.string() + ": " + e.what());
  }
  if (doc.value("format", "") != "mrta-mlp" || doc.value("version", 0) != 1) {
    throw std::runtime_error("unsupported checkpoint format in " + path.string());
  }
  Mlp net(doc.at("layer_sizes").get<std::vector<std::size_t>>(),
          activation_from_string(doc.at("hidden_activation").get<std::string>()),
          activation_from_string(doc.at("output_activation").get<std::string>()));
  const auto& layers = doc.at("layers");
  if (layers.size() != net.layers().size()) throw std::runtime_error("checkpoint layer count mismatch");
  std::vector<double> flat;
  for (std::size_t k = 0; k < layers.size(); ++k) {
    auto w = layers[k].at("weights").get<std::vector<double>>();
    auto b = layers[k].at("bias").get<std::vector<double>>();
    const auto& l = net.layers()[k];
    if (w.size() != static_cast<std::size_t>(l.weight.size()) ||
        b.size() != static_cast<std::size_t>(l.bias.size())) {
      throw std::runtime_error("checkpoint layer " + std::to_string(k) + " has wrong shape");
    }
    flat.insert(flat.end(), w.begin(), w.end());
    flat.insert(flat.end(), b.begin(), b.end());
  }
  net.assign_flat(flat);
  return net;
}

}  // namespace mrta
