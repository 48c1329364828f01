#pragma once

#include <string>
#include <variant>

#include "esback/sim.hpp"

namespace esback {

// Kind-discriminated experiment configuration parsed from a key=value file.
using ExperimentConfig =
    std::variant<SizePowerConfig, StaticBacktestConfig, DynamicBacktestConfig>;

// Parses a plain-text configuration document. Lines are `key = value`; blank
// lines and lines starting with `#` are ignored. The mandatory `kind` key
// selects the experiment (size_power | static | dynamic). Unknown keys,
// unknown names and invalid values raise ParseError naming the field.
ExperimentConfig parse_experiment_config(const std::string& text);

// Model names: normal, t<nu>, st<nu> (skewness 1.2) or st<nu>:<gamma>.
LossModel parse_model(const std::string& name);

std::optional<TestMethod> parse_test_method(const std::string& name);

// Runs whichever experiment the config describes.
ExperimentReport run_experiment(const ExperimentConfig& config);

}  // namespace esback
