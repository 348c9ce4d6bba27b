#ifndef JTSIM_CLI_HPP
#define JTSIM_CLI_HPP

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace jtsim::cli {

/// Key-value run configuration: `key = value` lines, `#` starts a comment.
/// Later lines override earlier ones; command-line flags override both.
class RunConfig {
public:
    /// Throws ConfigError on malformed lines or unknown keys.
    static RunConfig parse(std::string_view text);
    static RunConfig load(const std::string& path);

    /// Raw text the configuration was parsed from; empty without a file.
    const std::string& source() const { return source_; }
    const std::map<std::string, std::string>& values() const { return values_; }

    bool has(const std::string& key) const { return values_.count(key) > 0; }
    /// Throws ConfigError for unknown keys.
    void set(const std::string& key, const std::string& value);

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

private:
    std::string source_;
    std::map<std::string, std::string> values_;
};

/// Every key RunConfig accepts.
const std::vector<std::string>& known_keys();

/// SHA-1 of "blob <size>\0<content>", as `git hash-object` computes it.
std::string git_blob_sha1(std::string_view content);

/// One entry of a time list: seconds, or a multiple of T when written `0.9T` or `T`.
struct TimeSpec {
    double value = 0.0;
    bool in_units_of_T = false;
    std::string label;

    double resolve(double T) const { return in_units_of_T ? value * T : value; }
};

/// Comma-separated list such as `0, 0.9T, T, 2T, 1.2e-3`. Throws ConfigError.
std::vector<TimeSpec> parse_times(std::string_view list);

/// Run a command with explicit streams. `args` excludes the program name.
/// Returns 0 on success, 2 on configuration or I/O errors, 3 on numerical failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Entry point of the `jtsim` executable.
int run(int argc, char** argv);

}  // namespace jtsim::cli

#endif  // JTSIM_CLI_HPP
