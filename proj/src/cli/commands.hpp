#pragma once

#include <deque>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "io.hpp"

namespace qbm::cli {

inline constexpr const char* kVersion = "0.1.0";

struct FlagSpec {
    std::string name;           // long flag without dashes, also the config key
    std::string default_value;  // empty: unset
    std::string unit;
    std::string help;
    std::vector<std::string> choices;
    bool positional = false;
    bool required = false;
};

class Run;

struct CommandSpec {
    std::string name;
    std::string summary;
    std::vector<FlagSpec> flags;
    void (*execute)(Run&);
};

const std::vector<CommandSpec>& command_specs();

/// State of one invocation: resolved flags, digested inputs and staged outputs.
class Run {
public:
    Run(std::string command, Config cfg, std::ostream& progress)
        : command(std::move(command)), cfg(std::move(cfg)), progress(progress) {}

    std::string command;
    Config cfg;
    std::ostream& progress;

    /// Reads an input file and records its digest.
    const std::string& read_input(const std::string& path);
    /// Digest of the flags that determine the results (output paths and
    /// thread count excluded).
    std::string config_digest() const;
    /// Header comment for data files: tool version and input digests.
    std::string header() const;
    void stage(std::string path, std::string content) { outputs_.add(std::move(path), std::move(content)); }
    /// Adds the manifest and writes every staged file.
    void finish();

private:
    std::vector<std::pair<std::string, std::string>> inputs_;  // path, sha256
    std::deque<std::string> input_bytes_;
    OutputSet outputs_;
};

}  // namespace qbm::cli
