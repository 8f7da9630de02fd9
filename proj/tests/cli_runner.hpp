#pragma once

// Drives the installed partfuse binary (path from PARTFUSE_BIN) for the
// integration and acceptance suites.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>

namespace cli {

inline std::string binary_path() {
    if (const char* env = std::getenv("PARTFUSE_BIN")) return env;
    return "./tools/partfuse"; // running from a build directory by hand
}

struct RunResult {
    int exit_code = -1;
    std::string output; // stdout + stderr
};

inline RunResult run(const std::string& args) {
    std::string cmd = binary_path() + " " + args + " 2>&1";
    FILE* pipe = ::popen(cmd.c_str(), "r");
    RunResult result;
    if (!pipe) return result;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) result.output.append(buf, n);
    int status = ::pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

/// Fresh scratch directory under the system temp root.
class ScratchDir {
public:
    explicit ScratchDir(const std::string& tag) {
        dir_ = std::filesystem::temp_directory_path() /
               ("partfuse_" + tag + "_" + std::to_string(::getpid()));
        std::filesystem::remove_all(dir_);
        std::filesystem::create_directories(dir_);
    }
    ~ScratchDir() {
        std::error_code ec;
        std::filesystem::remove_all(dir_, ec);
    }
    const std::filesystem::path& path() const { return dir_; }
    std::string file(const std::string& name) const { return (dir_ / name).string(); }

private:
    std::filesystem::path dir_;
};

} // namespace cli
