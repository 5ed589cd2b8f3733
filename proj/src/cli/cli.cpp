#include "cli.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <ostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "qbm/errors.hpp"

namespace qbm::cli {

namespace {

std::string describe(const FlagSpec& f) {
    std::string d = f.help + " [" + f.unit + "]";
    if (!f.choices.empty()) {
        d += " {";
        for (std::size_t i = 0; i < f.choices.size(); ++i) d += (i ? "|" : "") + f.choices[i];
        d += "}";
    }
    if (!f.default_value.empty()) d += " (default " + f.default_value + ")";
    return d;
}

// Removes `--config PATH` / `--config=PATH` from args and loads the file.
std::optional<ConfigFile> take_config(std::vector<std::string>& args) {
    std::optional<std::string> path;
    for (std::size_t i = 0; i < args.size();) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw std::invalid_argument("--config needs a path");
            path = args[i + 1];
            args.erase(args.begin() + long(i), args.begin() + long(i) + 2);
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            args.erase(args.begin() + long(i));
        } else {
            ++i;
        }
    }
    if (!path) return std::nullopt;
    return load_config_file(*path);
}

int dispatch(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    const auto& specs = command_specs();
    const auto file = take_config(args);
    const auto is_command = [&](const std::string& a) {
        return std::any_of(specs.begin(), specs.end(), [&](const CommandSpec& s) { return s.name == a; });
    };
    if (file && file->command && std::none_of(args.begin(), args.end(), is_command))
        args.insert(args.begin(), *file->command);

    CLI::App app{"Quantum Brownian motion model of a stock index: closed forms, dynamics, market statistics "
                 "and calibration.\nExit codes: 0 success, 1 usage, 2 data, 3 numerical.",
                 "qbm"};
    app.set_version_flag("--version", std::string("qbm ") + kVersion);
    std::string config_path;
    app.add_option("--config", config_path, "key = value file or JSON run manifest; flags override it [path]");
    app.require_subcommand(1);
    app.fallthrough();

    std::map<std::string, std::map<std::string, std::string>> given;
    std::map<std::string, std::vector<CLI::Option*>> options;
    for (const auto& spec : specs) {
        auto* sub = app.add_subcommand(spec.name, spec.summary);
        for (const auto& f : spec.flags) {
            const std::string name = f.positional ? f.name + ",--" + f.name : "--" + f.name;
            auto* o = sub->add_option(name, given[spec.name][f.name], describe(f));
            o->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
            options[spec.name].push_back(o);
        }
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? exit_ok : exit_usage;
    }

    const auto* sub = app.get_subcommands().front();
    const auto& spec = *std::find_if(specs.begin(), specs.end(),
                                     [&](const CommandSpec& s) { return s.name == sub->get_name(); });
    Config cfg;
    for (const auto& f : spec.flags) cfg.set(f.name, f.default_value);
    if (file) {
        if (file->command && *file->command != spec.name)
            throw std::invalid_argument("config file is for '" + *file->command + "', not '" + spec.name + "'");
        for (const auto& [k, v] : file->entries) {
            if (!cfg.values.count(k)) throw std::invalid_argument("config key '" + k + "' is not a flag of " + spec.name);
            cfg.set(k, v);
        }
    }
    for (std::size_t i = 0; i < spec.flags.size(); ++i)
        if (options[spec.name][i]->count() > 0) cfg.set(spec.flags[i].name, given[spec.name][spec.flags[i].name]);
    for (const auto& f : spec.flags) {
        if (f.required && !cfg.has(f.name)) throw std::invalid_argument("--" + f.name + " is required");
        if (!f.choices.empty() && cfg.has(f.name) &&
            std::find(f.choices.begin(), f.choices.end(), cfg.text(f.name)) == f.choices.end())
            throw std::invalid_argument("--" + f.name + ": '" + cfg.text(f.name) + "' is not one of " +
                                        describe(FlagSpec{"", "", "", "", f.choices}).substr(4));
    }

    Run r(spec.name, std::move(cfg), out);
    spec.execute(r);
    return exit_ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    try {
        return dispatch(args, out, err);
    } catch (const std::invalid_argument& e) {
        err << "usage error: " << e.what() << "\n";
        return exit_usage;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << "\n";
        return exit_data;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << " (t = " << e.time() << ")\n";
        return exit_numerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_data;
    }
}

}  // namespace qbm::cli
