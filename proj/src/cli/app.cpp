// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#include <chrono>
#include <ctime>
#include <iostream>
#include <sstream>

#include "context.hpp"
#include "tomo/cli.hpp"
#include "tomo/error.hpp"
#include "tomo/study.hpp"

namespace tomo::cli {

namespace {

/// JSON config files: nested objects address subcommands, e.g.
/// {"density": {"train": {"seed": 7}}}.
class JsonConfig : public CLI::Config {
public:
    std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}"; }

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        nlohmann::json j;
        try {
            input >> j;
        } catch (const nlohmann::json::exception& e) {
            throw CLI::ConversionError(std::string("config file is not valid JSON: ") + e.what());
        }
        if (!j.is_object()) throw CLI::ConversionError("config file must hold a JSON object");
        std::vector<CLI::ConfigItem> items;
        collect(j, {}, items);
        return items;
    }

private:
    static std::string scalar(const nlohmann::json& v) {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
        if (v.is_number()) return v.dump();
        throw CLI::ConversionError("unsupported config value " + v.dump());
    }

    static void collect(const nlohmann::json& obj, const std::vector<std::string>& parents,
                        std::vector<CLI::ConfigItem>& items) {
        for (const auto& [key, value] : obj.items()) {
            if (value.is_object()) {
                auto p = parents;
                p.push_back(key);
                collect(value, p, items);
                continue;
            }
            CLI::ConfigItem item;
            item.parents = parents;
            item.name = key;
            if (value.is_array()) {
                for (const auto& v : value) item.inputs.push_back(scalar(v));
            } else {
                item.inputs.push_back(scalar(value));
            }
            items.push_back(std::move(item));
        }
    }
};

nlohmann::json resolved_options(const CLI::App* app) {
    nlohmann::json j = nlohmann::json::object();
    for (const CLI::Option* opt : app->get_options()) {
        const std::string name = opt->get_single_name();
        if (name.empty() || name == "help" || name == "config" || name == "version") continue;
        if (opt->get_expected_max() == 0) {
            j[name] = opt->count() > 0;
        } else if (opt->count() > 0) {
            const auto& res = opt->results();
            j[name] = res.size() == 1 ? nlohmann::json(res.front()) : nlohmann::json(res);
        } else {
            j[name] = opt->get_default_str();
        }
    }
    return j;
}

}  // namespace

void Context::log(const std::string& message) const {
    if (err) *err << "tomo: " << message << '\n';
}

nlohmann::json Context::stamp() const {
    nlohmann::json config = nlohmann::json::object();
    for (const CLI::App* a = active; a != nullptr; a = a->get_parent()) {
        config[a->get_parent() == nullptr ? std::string("global") : a->get_name()] = resolved_options(a);
    }
    nlohmann::json s = {{"tool", "tomo"}, {"version", TOMO_VERSION}, {"command", command}, {"config", config}};
    if (!deterministic) {
        const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        std::tm tm{};
        gmtime_r(&now, &tm);
        char buf[32];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
        s["created_at"] = buf;
    }
    return s;
}

void Context::record(const std::filesystem::path& path) { produced.push_back(path.generic_string()); }

void Context::write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
    write_json_file(path, doc);
    record(path);
}

void Context::write_text(const std::filesystem::path& path, const std::string& text) {
    write_file_atomic(path, text);
    record(path);
}

void on_run(CLI::App* sub, Context& ctx, std::function<void()> fn) {
    sub->callback([sub, &ctx, fn = std::move(fn)] {
        ctx.active = sub;
        std::string name;
        for (const CLI::App* a = sub; a != nullptr && a->get_parent() != nullptr; a = a->get_parent()) {
            name = name.empty() ? a->get_name() : a->get_name() + " " + name;
        }
        ctx.command = name;
        ctx.action = fn;
    });
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            fail(ErrorKind::Usage, "not a number list: '" + text + "'");
        }
    }
    if (out.empty()) fail(ErrorKind::Usage, "empty number list");
    return out;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    Context ctx;
    ctx.out = &out;
    ctx.err = &err;

    CLI::App app{"Linear-probe training and evaluation toolkit for tomosynthesis foundation-model features", "tomo"};
    app.set_version_flag("--version", std::string("tomo ") + TOMO_VERSION);
    app.config_formatter(std::make_shared<JsonConfig>());
    app.set_config("--config", "", "JSON config file (flags take precedence)");
    app.require_subcommand(1);
    app.add_flag("--deterministic", ctx.deterministic, "Omit timestamps so identical runs are byte-identical");
    app.add_option("--threads", ctx.threads, "Upper bound on worker threads")->check(CLI::Range(1u, 1024u))->capture_default_str();
    app.add_flag("-v,--verbose", ctx.verbose, "Verbose logging");

    register_data_commands(app, ctx);
    register_density_commands(app, ctx);
    register_risk_commands(app, ctx);
    register_detect_commands(app, ctx);
    register_stats_commands(app, ctx);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }
    if (!ctx.action) {
        err << app.help();
        return kExitUsage;
    }
    try {
        ctx.action();
    } catch (const Error& e) {
        err << "tomo: error [" << to_string(e.kind()) << "]: " << e.what() << '\n';
        return e.kind() == ErrorKind::Usage ? kExitUsage : kExitData;
    } catch (const CLI::Error& e) {
        err << "tomo: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "tomo: error: " << e.what() << '\n';
        return kExitData;
    }
    nlohmann::json manifest = {{"command", ctx.command}, {"files", ctx.produced}};
    if (!ctx.summary.empty()) manifest["summary"] = ctx.summary;
    out << manifest.dump(2) << '\n';
    return kExitOk;
}

int run(int argc, const char* const* argv) { return run(argc, argv, std::cout, std::cerr); }

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv{"tomo"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace tomo::cli
