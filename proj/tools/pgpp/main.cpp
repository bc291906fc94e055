#include <iostream>

#include "commands.hpp"
#include "pgpp/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Paging and token tooling for shared-identity cellular networks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "pgpp 0.1.0");
  int exit_code = pgpp::cli::kExitOk;
  pgpp::cli::register_sim_commands(app, exit_code);
  pgpp::cli::register_token_commands(app, exit_code);
  pgpp::cli::register_gateway_commands(app, exit_code);
  pgpp::cli::register_aka_commands(app, exit_code);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : pgpp::cli::kExitConfig;
  } catch (const pgpp::Error& e) {
    std::cerr << "pgpp: " << e.what() << '\n';
    switch (e.code()) {
      case pgpp::ErrorCode::config:
      case pgpp::ErrorCode::parse:
      case pgpp::ErrorCode::invalid_argument:
      case pgpp::ErrorCode::domain:
        return pgpp::cli::kExitConfig;
      default:
        return pgpp::cli::kExitFailure;
    }
  } catch (const std::exception& e) {
    std::cerr << "pgpp: " << e.what() << '\n';
    return pgpp::cli::kExitFailure;
  }
  return exit_code;
}
