#ifndef LUMLOSS_CLI_UTIL_HPP
#define LUMLOSS_CLI_UTIL_HPP

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

namespace lumloss::test {

struct RunResult {
    int code = -1;
    std::string output;  // stdout and stderr interleaved
};

inline std::string cli_path() { return LUMLOSS_CLI_PATH; }
inline std::filesystem::path configs_dir() { return LUMLOSS_CONFIGS_DIR; }

inline RunResult run_cli(const std::string& args) {
    const std::string cmd = "'" + cli_path() + "' " + args + " 2>&1";
    RunResult r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.output.append(buf, n);
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

inline std::string read_all(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

inline void write_all(const std::filesystem::path& p, const std::string& s) {
    std::ofstream out(p, std::ios::binary);
    out << s;
}

}

#endif
