/*
 * Copyright 2026 The seduq Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef SEDUQ_CLI_CONFIG_HPP
#define SEDUQ_CLI_CONFIG_HPP

#include <string>
#include <vector>

#include "seduq/pipeline.hpp"

namespace seduq::cli {

/// A run configuration: the pipeline settings plus the file paths they
/// apply to. Loaded from a TOML-style file with sections mirroring the
/// module names; command-line flags may override individual values.
struct CliConfig {
    pipeline::PipelineConfig pipe;
    std::vector<std::string> wind_paths;
    std::string case_path;
    std::string out_dir = "out";
};

/// Parses config text. Accepted grammar: `[section]` headers, `key =
/// value` lines, `#` comments, values being "strings", booleans,
/// numbers, or flat arrays of those. Unknown sections or keys are an
/// InvalidConfig error, not a warning.
CliConfig parse_config_text(const std::string& text);

/// parse_config_text on the file's contents, then verifies every
/// referenced input path exists.
CliConfig load_config(const std::string& path);

} // namespace seduq::cli

#endif // SEDUQ_CLI_CONFIG_HPP
