#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>

#include "tks/cli.hpp"

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_color_mt("tks");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* level = std::getenv("TKS_LOG")) spdlog::set_level(spdlog::level::from_str(level));
  return tks::run_cli(argc, argv, std::cout, std::cerr);
}
