// Copyright 2026 The Ignis Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// ignis-submit: launches a driver program as a job.

#include <CLI11.hpp>

#include <fcntl.h>
#include <signal.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "ignis/error.hpp"
#include "ignis/properties.hpp"

namespace fs = std::filesystem;

namespace {

volatile sig_atomic_t gChild = 0;

void forward(int sig) {
  if (gChild > 0) ::kill(-gChild, sig);
}

std::string envOr(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? v : fallback;
}

bool executable(const fs::path& p) { return fs::is_regular_file(p) && ::access(p.c_str(), X_OK) == 0; }

/// A path, a name on PATH or IGNIS_DRIVER_PATH, or a bundled example driver.
std::string resolveDriver(const std::string& driver, const fs::path& self) {
  if (driver.find('/') != std::string::npos) return executable(driver) ? fs::absolute(driver).string() : "";
  std::vector<std::string> dirs;
  for (const char* var : {"PATH", "IGNIS_DRIVER_PATH"}) {
    std::stringstream ss(envOr(var, ""));
    std::string d;
    while (std::getline(ss, d, ':')) {
      if (!d.empty()) dirs.push_back(d);
    }
  }
  dirs.push_back((self.parent_path() / "drivers").string());
  for (const std::string& d : dirs) {
    if (executable(fs::path(d) / driver)) return (fs::path(d) / driver).string();
  }
  return "";
}

/// A properties file path or a name in IGNIS_PROFILE_DIR.
std::string resolveProfile(const std::string& profile) {
  if (fs::is_regular_file(profile)) return profile;
  fs::path dir = envOr("IGNIS_PROFILE_DIR", ".");
  for (const std::string& candidate : {profile + ".properties", profile}) {
    if (fs::is_regular_file(dir / candidate)) return (dir / candidate).string();
  }
  return "";
}

std::string newJobId(const std::string& name) {
  std::random_device rd;
  std::ostringstream out;
  out << name << '-' << std::hex << ((static_cast<uint64_t>(rd()) << 16) ^ static_cast<uint64_t>(::getpid()));
  return out.str();
}

[[noreturn]] void execDriver(const std::string& path, const std::vector<std::string>& args) {
  std::vector<char*> argv;
  argv.push_back(const_cast<char*>(path.c_str()));
  for (const std::string& a : args) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);
  ::execv(path.c_str(), argv.data());
  std::cerr << "ignis-submit: cannot execute " << path << ": " << std::strerror(errno) << '\n';
  ::_exit(127);
}

int exitCodeOf(int status) {
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  if (WIFSIGNALED(status)) return 128 + WTERMSIG(status);
  return 1;
}

/// Options before DRIVER must be submitter options; everything after DRIVER
/// belongs to the driver.
void rejectUnknownOptions(int argc, char** argv) {
  int positionals = 0;
  for (int i = 1; i < argc && positionals < 2; ++i) {
    std::string a = argv[i];
    if (a.size() < 2 || a[0] != '-') {
      ++positionals;
    } else if (a == "--name" || a == "--properties") {
      ++i;
    } else if (a != "--attach" && a != "-h" && a != "--help" && a.rfind("--name=", 0) != 0 &&
               a.rfind("--properties=", 0) != 0) {
      throw CLI::ExtrasError("ignis-submit", {a});
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Submits an Ignis driver program as a job"};
  std::string name;
  bool attach = false;
  std::vector<std::string> overrides;
  std::string profile;
  std::string driver;
  std::vector<std::string> driverArgs;
  app.add_option("--name", name, "Job name");
  app.add_flag("--attach", attach, "Stay attached: stream output and return the driver's exit code");
  app.add_option("--properties", overrides, "K=V property override, repeatable")->allow_extra_args(false);
  app.add_option("profile", profile, "Runtime profile: a properties file or a name in IGNIS_PROFILE_DIR")->required();
  app.add_option("driver", driver, "Driver program")->required();
  app.add_option("args", driverArgs, "Driver arguments");
  app.positionals_at_end();
  app.prefix_command();
  try {
    rejectUnknownOptions(argc, argv);
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    if (code != 0) std::cerr << app.help();
    return code == 0 ? 0 : 2;
  }
  for (const std::string& extra : app.remaining()) driverArgs.push_back(extra);

  std::string profilePath = resolveProfile(profile);
  if (profilePath.empty()) {
    std::cerr << "ignis-submit: profile '" << profile << "' not found\n";
    return 2;
  }
  std::string driverPath = resolveDriver(driver, fs::absolute(argv[0]));
  if (driverPath.empty()) {
    std::cerr << "ignis-submit: driver '" << driver << "' not found\n";
    return 2;
  }

  ignis::Properties props;
  try {
    std::ifstream in(profilePath);
    std::stringstream ss;
    ss << in.rdbuf();
    props = ignis::Properties::parse(ss.str());
  } catch (const ignis::Error& e) {
    std::cerr << "ignis-submit: bad profile " << profilePath << ": " << e.what() << '\n';
    return 2;
  }
  for (const std::string& kv : overrides) {
    size_t eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      std::cerr << "ignis-submit: --properties expects K=V, got '" << kv << "'\n";
      return 2;
    }
    props.set(kv.substr(0, eq), kv.substr(eq + 1));
  }

  std::string jobId = newJobId(name.empty() ? fs::path(driver).filename().string() : name);
  fs::path jobDir = fs::path(envOr("IGNIS_JOBS_DIR", (fs::temp_directory_path() / "ignis-jobs").string())) / jobId;
  fs::create_directories(jobDir);
  fs::path propsFile = jobDir / "job.properties";
  {
    std::ofstream out(propsFile);
    out << props.format();
    if (!out.flush()) {
      std::cerr << "ignis-submit: cannot write " << propsFile << '\n';
      return 1;
    }
  }
  ::setenv("IGNIS_JOB_ID", jobId.c_str(), 1);
  ::setenv("IGNIS_JOB_DIR", jobDir.c_str(), 1);
  ::setenv("IGNIS_SUBMIT_PROPERTIES", propsFile.c_str(), 1);

  if (attach) {
    struct sigaction sa {};
    sa.sa_handler = forward;
    sigemptyset(&sa.sa_mask);
    for (int sig : {SIGINT, SIGTERM, SIGHUP, SIGQUIT}) ::sigaction(sig, &sa, nullptr);
    pid_t pid = ::fork();
    if (pid < 0) {
      std::cerr << "ignis-submit: fork failed\n";
      return 1;
    }
    if (pid == 0) {
      ::setpgid(0, 0);
      for (int sig : {SIGINT, SIGTERM, SIGHUP, SIGQUIT}) ::signal(sig, SIG_DFL);
      execDriver(driverPath, driverArgs);
    }
    ::setpgid(pid, pid);
    gChild = pid;
    int status = 0;
    while (::waitpid(pid, &status, 0) < 0) {
      if (errno != EINTR) return 1;
    }
    return exitCodeOf(status);
  }

  std::string log = (jobDir / "driver.log").string();
  pid_t monitor = ::fork();
  if (monitor < 0) {
    std::cerr << "ignis-submit: fork failed\n";
    return 1;
  }
  if (monitor == 0) {
    ::setsid();
    int null = ::open("/dev/null", O_RDONLY);
    int out = ::open(log.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    ::dup2(null, 0);
    ::dup2(out, 1);
    ::dup2(out, 2);
    pid_t pid = ::fork();
    if (pid == 0) execDriver(driverPath, driverArgs);
    int status = 0;
    int code = 1;
    if (pid > 0) {
      while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
      }
      code = exitCodeOf(status);
    }
    std::ofstream((jobDir / "exit-code.tmp").string()) << code << '\n';
    std::error_code ec;
    fs::rename(jobDir / "exit-code.tmp", jobDir / "exit-code", ec);
    ::_exit(0);
  }
  std::cout << jobId << std::endl;
  return 0;
}
