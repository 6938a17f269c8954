#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace parrondo {

/// Exit codes of run_cli.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitSolver = 3;

/// Exact rational read from "0.16", "4/25", "1" or "3.5/7".
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

/// Throws UsageError on malformed input or a zero denominator.
Rational parse_rational(const std::string& text);

/// Runs one command. `args` excludes the program name. Payloads go to `out`
/// (or to --out FILE), diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace parrondo
