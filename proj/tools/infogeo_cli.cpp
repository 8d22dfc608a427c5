// infogeo command-line front end.
//
//   infogeo metric --model normal-1 --theta 0,-0.5
//   infogeo classify --model normal-2 --format structured --out report.json
//   infogeo run --config samples/normal2_holonomy.json

#include "infogeo/report.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct Options
{
    std::optional<std::string> model;
    std::optional<std::string> config;
    std::optional<double> alpha;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> points;
    std::vector<std::string> thetas;
    std::optional<std::string> out;
    std::string format = "text";
    bool timestamp = false;
};

std::vector<double> parse_theta(const std::string& text)
{
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double x = 0.0;
        try {
            x = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || item.find_first_not_of(" \t", used) != std::string::npos)
            throw infogeo::ConfigError("--theta: cannot read '" + item + "' as a number in \"" + text + "\"");
        v.push_back(x);
    }
    if (v.empty())
        throw infogeo::ConfigError("--theta: empty point");
    return v;
}

/// Config file first, then command-line flags on top.
infogeo::RunConfig build_config(const Options& o, const std::optional<std::string>& task)
{
    infogeo::RunConfig c = o.config ? infogeo::load_config(*o.config) : infogeo::RunConfig{};
    if (task)
        c.tasks = {*task};
    if (o.model) {
        c.model.name = *o.model;
        c.model.inline_model.reset();
    }
    if (o.alpha)
        c.alpha = *o.alpha;
    if (o.seed)
        c.sampler.seed = *o.seed;
    if (o.points) {
        c.sampler.count = *o.points;
        c.points.clear();
    }
    if (!o.thetas.empty()) {
        c.points.clear();
        for (const auto& t : o.thetas)
            c.points.push_back(parse_theta(t));
    }
    if (o.timestamp)
        c.timestamp = true;
    return c;
}

int emit(const Options& o, const infogeo::VerdictReport& r)
{
    const std::string body = o.format == "structured" ? infogeo::serialize(r) : infogeo::text_summary(r);
    if (o.out) {
        std::ofstream f(*o.out, std::ios::binary);
        if (!f) {
            std::cerr << "infogeo: cannot write '" << *o.out << "'\n";
            return 2;
        }
        f << body;
    } else {
        std::cout << body;
    }
    return infogeo::exit_status(r);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Information geometry of exponential families: metrics, curvature, property checks and holonomy"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--model", o.model, "Zoo model name (" + [] {
            std::string s;
            for (const auto& n : infogeo::model_names())
                s += (s.empty() ? "" : ", ") + n;
            return s;
        }() + ")");
        sub->add_option("--config", o.config, "Run configuration file (JSON)")->check(CLI::ExistingFile);
        sub->add_option("--alpha", o.alpha, "alpha-connection parameter");
        sub->add_option("--seed", o.seed, "Sampler seed");
        sub->add_option("--points", o.points, "Number of sampled points")->check(CLI::PositiveNumber);
        sub->add_option("--theta", o.thetas, "Explicit point in natural coordinates, comma separated (repeatable)")
            ->take_all();
        sub->add_option("--out", o.out, "Write the report here instead of stdout");
        sub->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"text", "structured"}));
        sub->add_flag("--timestamp", o.timestamp, "Record the wall-clock time in the report");
    };

    struct Command
    {
        const char* name;
        const char* help;
        std::optional<std::string> task;
    };
    const std::vector<Command> commands = {
        {"metric", "Fisher metric at each point", "metric"},
        {"curvature", "Sectional, Ricci and scalar curvature at each point", "curvature"},
        {"checks", "Einstein, constant-curvature, flatness and reducibility checks", "checks"},
        {"classify", "Holonomy classification", "holonomy"},
        {"verify-paper", "Regression suite against the published values", "verify-paper"},
        {"run", "Run the tasks listed in the config file", std::nullopt},
    };
    std::vector<std::pair<CLI::App*, std::optional<std::string>>> subs;
    for (const auto& c : commands) {
        auto* sub = app.add_subcommand(c.name, c.help);
        add_common(sub);
        subs.emplace_back(sub, c.task);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // Help and version exit 0; every usage error exits 2.
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        for (const auto& [sub, task] : subs) {
            if (!sub->parsed())
                continue;
            if (!task && !o.config) {
                std::cerr << "infogeo: run needs --config\n";
                return 2;
            }
            return emit(o, infogeo::run(build_config(o, task)));
        }
    } catch (const infogeo::ConfigError& e) {
        std::cerr << "infogeo: configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "infogeo: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
