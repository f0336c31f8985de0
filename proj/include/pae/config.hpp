#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pae/model.hpp"
#include "pae/training.hpp"

// Run configuration: a versioned, sectioned key = value file. Parsing is
// strict (unknown sections or keys are errors with file:line diagnostics)
// and serialize(parse(x)) is a fixed point of parse/serialize.

namespace pae::cfg {

enum class Precision { f64, f32 };

struct EvalConfig {
    std::vector<double> snr_db;
    std::uint64_t min_block_errors = 100;
    std::uint64_t max_blocks = 1'000'000;
    std::size_t workers = 1;
};

struct PathsConfig {
    std::string checkpoint_dir = "runs/default";
    std::string results_csv = "runs/default/results.csv";
    std::string log_csv = "runs/default/train_log.csv";
};

struct RunConfig {
    int version = 1;
    CodeGeometry code;
    ModelHyper model;
    TrainingConfig train;
    Precision precision = Precision::f64;
    EvalConfig eval;
    PathsConfig paths;

    void validate() const;
};

// "a:b:step" (inclusive range), "x,y,z", or a single value.
std::vector<double> parse_snr_spec(const std::string& spec);

RunConfig parse_config(const std::string& text, const std::string& origin = "<config>");
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& cfg);

// Shortest decimal text that parses back to exactly v.
std::string format_double(double v);

}  // namespace pae::cfg
