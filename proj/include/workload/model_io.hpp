#pragma once

#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "workload/nnet.hpp"
#include "workload/series.hpp"

namespace wl::nnet {

inline constexpr const char* kModelFormat = "workload-lab-model/1";

struct Model {
  NetworkSpec spec;
  NetworkParams params;
  series::Scaler scaler;
  std::vector<EpochLoss> history;
};

namespace io_detail {

inline nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  auto& data = j["data"] = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  return j;
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  Eigen::MatrixXd m(j.at("rows").get<Eigen::Index>(), j.at("cols").get<Eigen::Index>());
  const auto& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != m.size())
    throw std::runtime_error("model: matrix data size mismatch");
  Eigen::Index i = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = data[static_cast<std::size_t>(i++)];
  return m;
}

inline nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  return matrix_to_json(v);
}

inline Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  Eigen::MatrixXd m = matrix_from_json(j);
  return Eigen::VectorXd(m);
}

}  // namespace io_detail

inline nlohmann::json to_json(const Model& model) {
  using namespace io_detail;
  const auto& spec = model.spec;
  nlohmann::json j;
  j["format"] = kModelFormat;
  j["spec"] = {
      {"variant", spec.variant == Variant::kUnivariate ? "univariate" : "multivariate"},
      {"lookback", spec.lookback},
      {"hidden", {spec.hidden[0], spec.hidden[1]}},
      {"activation", spec.activation == Activation::kRelu
                         ? "relu"
                         : spec.activation == Activation::kTanh ? "tanh" : "identity"},
      {"dropout_rate", spec.dropout_rate},
      {"conv_kernel_width", spec.conv_kernel_width},
      {"conv_channels", spec.conv_channels},
      {"input_dims", spec.input_dims},
      {"output_dims", spec.output_dims},
  };
  j["scaler"] = {{"mins", vector_to_json(model.scaler.mins)},
                 {"maxs", vector_to_json(model.scaler.maxs)}};
  nlohmann::json params;
  if (spec.variant == Variant::kMultivariate) {
    params["conv_kernel"] = matrix_to_json(model.params.conv.kernel);
    params["conv_bias"] = vector_to_json(model.params.conv.bias);
  }
  params["lstm1_w"] = matrix_to_json(model.params.lstm1.w);
  params["lstm1_b"] = vector_to_json(model.params.lstm1.b);
  params["lstm2_w"] = matrix_to_json(model.params.lstm2.w);
  params["lstm2_b"] = vector_to_json(model.params.lstm2.b);
  params["dense_w"] = matrix_to_json(model.params.dense.w);
  params["dense_b"] = vector_to_json(model.params.dense.b);
  j["params"] = std::move(params);
  nlohmann::json train = nlohmann::json::array(), val = nlohmann::json::array();
  for (const auto& e : model.history) {
    train.push_back(e.train);
    val.push_back(e.val);
  }
  j["history"] = {{"train", std::move(train)}, {"val", std::move(val)}};
  return j;
}

inline Model from_json(const nlohmann::json& j) {
  using namespace io_detail;
  if (j.at("format").get<std::string>() != kModelFormat)
    throw std::runtime_error("model: unknown format tag");
  Model model;
  const auto& s = j.at("spec");
  const std::string variant = s.at("variant").get<std::string>();
  model.spec.variant = variant == "univariate" ? Variant::kUnivariate : Variant::kMultivariate;
  model.spec.lookback = s.at("lookback").get<int>();
  model.spec.hidden = {s.at("hidden")[0].get<int>(), s.at("hidden")[1].get<int>()};
  const std::string act = s.at("activation").get<std::string>();
  model.spec.activation = act == "relu" ? Activation::kRelu
                          : act == "tanh" ? Activation::kTanh : Activation::kIdentity;
  model.spec.dropout_rate = s.at("dropout_rate").get<double>();
  model.spec.conv_kernel_width = s.at("conv_kernel_width").get<int>();
  model.spec.conv_channels = s.at("conv_channels").get<int>();
  model.spec.input_dims = s.at("input_dims").get<int>();
  model.spec.output_dims = s.at("output_dims").get<int>();
  validate(model.spec);

  model.scaler.mins = vector_from_json(j.at("scaler").at("mins"));
  model.scaler.maxs = vector_from_json(j.at("scaler").at("maxs"));

  const auto& p = j.at("params");
  if (model.spec.variant == Variant::kMultivariate) {
    model.params.conv.kernel = matrix_from_json(p.at("conv_kernel"));
    model.params.conv.bias = vector_from_json(p.at("conv_bias"));
    model.params.conv.kernel_width = model.spec.conv_kernel_width;
    model.params.conv.in_channels = model.spec.input_dims;
    model.params.conv.out_channels = model.spec.conv_channels;
  }
  model.params.lstm1.w = matrix_from_json(p.at("lstm1_w"));
  model.params.lstm1.b = vector_from_json(p.at("lstm1_b"));
  model.params.lstm1.hidden_size = model.spec.hidden[0];
  model.params.lstm1.input_size =
      static_cast<int>(model.params.lstm1.w.cols()) - model.spec.hidden[0];
  model.params.lstm2.w = matrix_from_json(p.at("lstm2_w"));
  model.params.lstm2.b = vector_from_json(p.at("lstm2_b"));
  model.params.lstm2.hidden_size = model.spec.hidden[1];
  model.params.lstm2.input_size = model.spec.hidden[0];
  model.params.dense.w = matrix_from_json(p.at("dense_w"));
  model.params.dense.b = vector_from_json(p.at("dense_b"));

  const auto& h = j.at("history");
  for (std::size_t i = 0; i < h.at("train").size(); ++i)
    model.history.push_back({h.at("train")[i].get<double>(), h.at("val")[i].get<double>()});
  return model;
}

inline void save_model(const std::string& path, const Model& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  out << to_json(model).dump(2) << '\n';
}

inline Model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read model file: " + path);
  nlohmann::json j;
  in >> j;
  return from_json(j);
}

}  // namespace wl::nnet
