#pragma once

// Runs the built CLI through the shell and captures stdout and exit status.

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <string>

#ifndef KEYRATE_CLI_PATH
#error "KEYRATE_CLI_PATH must point at the keyrate executable"
#endif

namespace keyrate::fixtures {

struct CliResult {
  int status = -1;
  std::string out;
};

inline CliResult run_cli(const std::string& args, const std::string& env = {}) {
  const std::string cmd = env + (env.empty() ? "" : " ") + "'" KEYRATE_CLI_PATH "' " + args + " 2>/dev/null";
  CliResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

}  // namespace keyrate::fixtures
