#include <cstdio>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "qlab/cli/commands.hpp"
#include "qlab/cli/config.hpp"
#include "qlab/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"qlab: quantum potential laboratory"};
  app.require_subcommand(1);
  qlab::cli::CommandOptions opt;
  std::string config, out = "qlab_out", filter;
  const std::map<std::string, std::string> about{
      {"evolve", "propagate a wavefunction and record psi and its norm"},
      {"traj", "integrate Bohmian trajectories and test equivariance"},
      {"weyl", "Weyl vector and curvature routes to Q, with convergence residuals"},
      {"invert", "reconstruct R, S and V from a given Q profile"},
      {"olavo", "phase-space characteristic function, log-curvature and fluctuations"},
      {"uncertainty", "exact uncertainty decomposition and curvature bound"},
      {"verify", "run the acceptance checks"},
  };
  for (const std::string& name : qlab::cli::command_names()) {
    CLI::App* sub = app.add_subcommand(name, about.at(name));
    sub->add_option("--config", config, "flat key = value configuration file");
    sub->add_option("--out", out, "output directory")->capture_default_str();
    sub->add_option("--filter", filter, "run only checks whose id or name contains this text");
    sub->callback([&opt, name] { opt.command = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  if (!config.empty()) opt.config = config;
  opt.out = out;
  opt.filter = filter;
  try {
    const int code = qlab::cli::run_command(opt);
    std::printf("%s: %s (%s)\n", opt.command.c_str(), code == 0 ? "pass" : "fail",
                (opt.out / "manifest.json").string().c_str());
    return code;
  } catch (const qlab::cli::ConfigError& e) {
    std::fprintf(stderr, "qlab: %s\n", e.what());
    return 2;
  } catch (const qlab::Error& e) {
    std::fprintf(stderr, "qlab: %s\n", e.what());
    const bool usage = e.code() == qlab::Errc::invalid_argument || e.code() == qlab::Errc::too_few_points;
    return usage ? 2 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "qlab: %s\n", e.what());
    return 1;
  }
}
