// Copyright 2026 The tocrs Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TOCRS_TOOLS_JSON_CONFIG_H_
#define TOCRS_TOOLS_JSON_CONFIG_H_

#include <istream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

namespace tocrs::cli {

// Reads CLI11 configuration from a JSON object. Top-level keys name global
// options; a nested object configures the subcommand of the same name.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App* app, bool default_also, bool,
                        std::string) const override {
    nlohmann::json doc = nlohmann::json::object();
    for (const CLI::Option* opt : app->get_options({})) {
      if (opt->get_configurable() && !opt->get_lnames().empty() &&
          (opt->count() > 0 || default_also)) {
        const auto values = opt->count() > 0 ? opt->results() : std::vector<std::string>{};
        if (values.size() == 1) doc[opt->get_lnames().front()] = values.front();
        else if (!values.empty()) doc[opt->get_lnames().front()] = values;
      }
    }
    return doc.dump(2);
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    nlohmann::json doc;
    try {
      input >> doc;
    } catch (const nlohmann::json::exception& e) {
      throw CLI::ConversionError(std::string("config file is not valid JSON: ") + e.what());
    }
    std::vector<CLI::ConfigItem> items;
    Flatten(doc, {}, &items);
    return items;
  }

 private:
  static std::string Scalar(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    return v.dump();
  }

  static void Flatten(const nlohmann::json& doc, const std::vector<std::string>& parents,
                      std::vector<CLI::ConfigItem>* items) {
    if (!doc.is_object()) throw CLI::ConversionError("config must be a JSON object");
    for (const auto& [key, value] : doc.items()) {
      if (value.is_object()) {
        auto nested = parents;
        nested.push_back(key);
        Flatten(value, nested, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(Scalar(v));
      } else {
        item.inputs.push_back(Scalar(value));
      }
      items->push_back(std::move(item));
    }
  }
};

}  // namespace tocrs::cli

#endif  // TOCRS_TOOLS_JSON_CONFIG_H_
