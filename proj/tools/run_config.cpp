// Copyright 2026 The TCN Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "run_config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>
#include <utility>

namespace tcn::cli {
namespace {

namespace pt = boost::property_tree;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) parts.push_back(trim(item));
  if (parts.empty() || (parts.size() == 1 && parts[0].empty())) return {};
  return parts;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const std::string t = trim(text);
  const char* end = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(t.data(), end, value);
  if (ec != std::errc() || ptr != end || t.empty()) {
    throw ConfigError("invalid value '" + text + "' for " + key);
  }
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError("invalid boolean '" + text + "' for " + key);
}

template <typename T>
std::vector<T> parse_numbers(const std::string& key, const std::string& text) {
  std::vector<T> out;
  for (const auto& part : split_list(text)) {
    out.push_back(parse_number<T>(key, part));
  }
  return out;
}

template <typename T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    if constexpr (std::is_floating_point_v<T>) {
      out += format_double(values[i]);
    } else {
      out += std::to_string(values[i]);
    }
  }
  return out;
}

// One readable/writable key.
struct Field {
  std::function<void(RunConfig&, const std::string&)> read;
  std::function<std::string(const RunConfig&)> write;
};

using FieldTable = std::vector<std::pair<std::string, Field>>;

template <typename T>
Field number_field(T RunConfig::*member, const std::string& key) {
  return {[member, key](RunConfig& c, const std::string& v) {
            c.*member = parse_number<T>(key, v);
          },
          [member](const RunConfig& c) {
            if constexpr (std::is_floating_point_v<T>) {
              return format_double(c.*member);
            } else {
              return std::to_string(c.*member);
            }
          }};
}

Field bool_field(bool RunConfig::*member, const std::string& key) {
  return {[member, key](RunConfig& c, const std::string& v) {
            c.*member = parse_bool(key, v);
          },
          [member](const RunConfig& c) {
            return std::string(c.*member ? "true" : "false");
          }};
}

Field string_field(std::string RunConfig::*member) {
  return {[member](RunConfig& c, const std::string& v) { c.*member = trim(v); },
          [member](const RunConfig& c) { return c.*member; }};
}

template <typename T>
Field list_field(std::vector<T> RunConfig::*member, const std::string& key) {
  return {[member, key](RunConfig& c, const std::string& v) {
            c.*member = parse_numbers<T>(key, v);
          },
          [member](const RunConfig& c) { return join(c.*member); }};
}

// section.key -> accessor, in the order written by write_config.
const FieldTable& fields() {
  static const FieldTable table = [] {
    FieldTable t;
    auto add = [&t](const std::string& key, Field f) {
      t.emplace_back(key, std::move(f));
    };
    add("paths.input", string_field(&RunConfig::input));
    add("paths.train", string_field(&RunConfig::train));
    add("paths.valid", string_field(&RunConfig::valid));
    add("paths.test", string_field(&RunConfig::test));
    add("paths.checkpoint", string_field(&RunConfig::checkpoint));
    add("paths.output_dir", string_field(&RunConfig::output_dir));
    add("paths.index_base",
        number_field(&RunConfig::index_base, "paths.index_base"));
    add("paths.order", number_field(&RunConfig::order, "paths.order"));
    add("run.seed", number_field(&RunConfig::seed, "run.seed"));
    add("split.ratios",
        {[](RunConfig& c, const std::string& v) {
           auto r = parse_numbers<double>("split.ratios", v);
           if (r.size() != 3) {
             throw ConfigError("split.ratios needs three values");
           }
           c.ratios = {r[0], r[1], r[2]};
         },
         [](const RunConfig& c) {
           return join(std::vector<double>(c.ratios.begin(), c.ratios.end()));
         }});
    add("graph.include_valid",
        bool_field(&RunConfig::include_valid, "graph.include_valid"));
    add("model.rank", number_field(&RunConfig::rank, "model.rank"));
    add("model.layers", number_field(&RunConfig::layers, "model.layers"));
    add("model.feature_transform",
        bool_field(&RunConfig::feature_transform, "model.feature_transform"));
    add("model.nonlinearity",
        bool_field(&RunConfig::nonlinearity, "model.nonlinearity"));
    add("model.fusion", string_field(&RunConfig::fusion));
    add("model.predictor", string_field(&RunConfig::predictor));
    add("model.hidden", number_field(&RunConfig::hidden, "model.hidden"));
    add("model.mlp_depth",
        number_field(&RunConfig::mlp_depth, "model.mlp_depth"));
    add("model.channels", number_field(&RunConfig::channels, "model.channels"));
    add("train.epochs", number_field(&RunConfig::epochs, "train.epochs"));
    add("train.batch_size",
        number_field(&RunConfig::batch_size, "train.batch_size"));
    add("train.learning_rate",
        list_field(&RunConfig::learning_rates, "train.learning_rate"));
    add("train.weight_decay",
        list_field(&RunConfig::weight_decays, "train.weight_decay"));
    add("train.negatives",
        number_field(&RunConfig::negatives, "train.negatives"));
    add("train.valid_every",
        number_field(&RunConfig::valid_every, "train.valid_every"));
    add("train.valid_k", number_field(&RunConfig::valid_k, "train.valid_k"));
    add("train.checkpoint_every",
        number_field(&RunConfig::checkpoint_every, "train.checkpoint_every"));
    add("train.audit_negatives",
        bool_field(&RunConfig::audit_negatives, "train.audit_negatives"));
    add("eval.candidates", string_field(&RunConfig::candidates));
    add("eval.multiplier",
        number_field(&RunConfig::multiplier, "eval.multiplier"));
    add("eval.k", list_field(&RunConfig::ks, "eval.k"));
    add("eval.runs", number_field(&RunConfig::runs, "eval.runs"));
    add("eval.exclude_valid",
        bool_field(&RunConfig::exclude_valid, "eval.exclude_valid"));
    add("eval.budget", number_field(&RunConfig::budget, "eval.budget"));
    add("eval.threads", number_field(&RunConfig::threads, "eval.threads"));
    add("synth.dims", list_field(&RunConfig::dims, "synth.dims"));
    add("synth.rank", number_field(&RunConfig::synth_rank, "synth.rank"));
    add("synth.observations",
        number_field(&RunConfig::observations, "synth.observations"));
    add("synth.noise", number_field(&RunConfig::noise, "synth.noise"));
    return t;
  }();
  return table;
}

const Field* find_field(const std::string& key) {
  for (const auto& [name, field] : fields()) {
    if (name == key) return &field;
  }
  return nullptr;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

RunConfig parse_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  RunConfig config;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError("config key '" + section + "' is outside a section");
    }
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      const Field* field = find_field(full);
      if (field == nullptr) throw ConfigError("unknown config key " + full);
      field->read(config, value.data());
    }
  }
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  return parse_config(in);
}

void write_config(const RunConfig& config, std::ostream& out) {
  std::string section;
  for (const auto& [name, field] : fields()) {
    const auto dot = name.find('.');
    const std::string sec = name.substr(0, dot);
    if (sec != section) {
      if (!section.empty()) out << '\n';
      out << '[' << sec << "]\n";
      section = sec;
    }
    out << name.substr(dot + 1) << " = " << field.write(config) << '\n';
  }
}

void validate(const RunConfig& c) {
  if (c.index_base != 0 && c.index_base != 1) {
    throw ConfigError("paths.index_base must be 0 or 1");
  }
  for (double r : c.ratios) {
    if (!(r > 0.0)) throw ConfigError("split.ratios must be positive");
  }
  if (std::abs(c.ratios[0] + c.ratios[1] + c.ratios[2] - 1.0) > 1e-9) {
    throw ConfigError("split.ratios must sum to 1");
  }
  if (c.ks.empty()) throw ConfigError("eval.k needs at least one value");
  for (std::size_t k : c.ks) {
    if (k == 0) throw ConfigError("eval.k values must be positive");
  }
  if (c.runs < 1) throw ConfigError("eval.runs must be at least 1");
  if (c.learning_rates.empty() || c.weight_decays.empty()) {
    throw ConfigError("train.learning_rate and train.weight_decay need values");
  }
  if (c.checkpoint_every < 0) {
    throw ConfigError("train.checkpoint_every must be non-negative");
  }
  if (c.epochs < 0) throw ConfigError("train.epochs must be non-negative");
  if (c.threads == 0) throw ConfigError("eval.threads must be positive");
  if (!(c.noise >= 0.0 && c.noise <= 1.0)) {
    throw ConfigError("synth.noise must lie in [0, 1]");
  }
}

}  // namespace tcn::cli
