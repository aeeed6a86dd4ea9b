#pragma once

#include <stdexcept>
#include <string>

namespace fc {

// Exit code 1 at the command line.
struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RangeError : std::out_of_range {
    using std::out_of_range::out_of_range;
};

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// Exit code 2 at the command line.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Process-wide limits. Overridable from the environment by the CLI.
struct Capacity {
    unsigned long long spf_bound = 1ull << 27;
    unsigned long long sieve_limit = 1ull << 31;
    unsigned long long table_bound = 1ull << 26;      // per-value lookup tables
    unsigned long long value_bound = 1ull << 40;      // linear-form values
    unsigned long long enumeration_budget = 1ull << 40;
    unsigned long long stream_limit = 1ull << 34;     // segmented partial sums
};

Capacity& capacity();

// Parses "key=value,key=value" with the field names above.
void apply_capacity_overrides(const std::string& text);

}  // namespace fc
