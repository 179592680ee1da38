#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace heightlab {

enum class Command { Lambda, Eigendivisors, PeriodicClasses, Iterate, Height, Classify, Alpha, Green, MassCheck };

// Throws std::invalid_argument on an unknown name.
Command parse_command(const std::string& name);
std::string command_name(Command c);
std::vector<std::string> command_names();

struct RunConfig {
    Command command = Command::Lambda;
    std::string family_path;
    int max_n = 5;
    int max_period = 12;
    int depth = 10;
    int grid = 512;
    double gap_eps = 1e-3;
    int primes = 2;
    std::string output;  // empty or "-" = stdout; a .csv suffix selects CSV where available
    uint64_t seed = 1;
    int threads = 1;
    bool strict = false;
    double r1 = 200, r2 = 2000;
};

enum ExitCode { kExitOk = 0, kExitValidation = 2, kExitDegenerate = 3, kExitInconclusive = 4 };

struct RunResult {
    int exit_code = kExitOk;
    std::string text;     // the report as written
    std::string message;  // diagnostic for stderr
};

// Runs one command and writes the report to config.output; never throws.
RunResult run(const RunConfig& config);
// Same without writing anything.
RunResult evaluate(const RunConfig& config);

}  // namespace heightlab
