#include <json.hpp>

#include "pcup/error.hpp"
#include "pcup/persistence.hpp"

namespace pcup {
namespace {

using nlohmann::json;

template <class T>
T get_as(const json& value, const std::string& key) {
  try {
    return value.get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::Config, "config key '" + key + "' has the wrong type");
  }
}

}  // namespace

ExperimentConfig parse_config_json(const std::string& text, ExperimentConfig c) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Config, std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::Config, "config must be a JSON object");

  auto& t = c.training;
  for (const auto& [key, value] : doc.items()) {
    if (key == "learning_rate") t.learning_rate = get_as<double>(value, key);
    else if (key == "batch_size") t.batch_size = get_as<int>(value, key);
    else if (key == "epochs") t.epochs = get_as<int>(value, key);
    else if (key == "beta1") t.beta1 = get_as<double>(value, key);
    else if (key == "beta2") t.beta2 = get_as<double>(value, key);
    else if (key == "epsilon") t.epsilon = get_as<double>(value, key);
    else if (key == "seed") t.seed = get_as<std::uint64_t>(value, key);
    else if (key == "af") t.af = get_as<int>(value, key);
    else if (key == "validate_every") t.validate_every = get_as<int>(value, key);
    else if (key == "n_out") t.shape.n_out = get_as<int>(value, key);
    else if (key == "input_dim") t.shape.input_dim = get_as<int>(value, key);
    else if (key == "encoder_widths") t.shape.encoder_widths = get_as<std::vector<int>>(value, key);
    else if (key == "decoder_hidden") t.shape.decoder_hidden = get_as<std::vector<int>>(value, key);
    else if (key == "data_dir") c.data_dir = get_as<std::string>(value, key);
    else if (key == "out_dir") c.out_dir = get_as<std::string>(value, key);
    else if (key == "rho") c.rho = get_as<double>(value, key);
    else if (key == "categories") c.categories = get_as<std::vector<std::string>>(value, key);
    else if (key == "models_per_category") c.models_per_category = get_as<int>(value, key);
    else throw Error(ErrorCode::Config, "unknown config key '" + key + "'");
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig defaults) {
  return parse_config_json(read_text_file(path), std::move(defaults));
}

std::string config_to_json(const ExperimentConfig& c) {
  const auto& t = c.training;
  json doc = {
      {"learning_rate", t.learning_rate},
      {"batch_size", t.batch_size},
      {"epochs", t.epochs},
      {"beta1", t.beta1},
      {"beta2", t.beta2},
      {"epsilon", t.epsilon},
      {"seed", t.seed},
      {"af", t.af},
      {"validate_every", t.validate_every},
      {"n_out", t.shape.n_out},
      {"input_dim", t.shape.input_dim},
      {"encoder_widths", t.shape.encoder_widths},
      {"decoder_hidden", t.shape.decoder_hidden},
      {"data_dir", c.data_dir},
      {"out_dir", c.out_dir},
      {"rho", c.rho},
      {"categories", c.categories},
      {"models_per_category", c.models_per_category},
  };
  return doc.dump(2) + "\n";
}

}  // namespace pcup
