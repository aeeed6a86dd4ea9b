#pragma once

#include "frobcount/families.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace fc::cli {

using Json = nlohmann::ordered_json;

struct RunConfig {
    std::string command;
    Json config = Json::object();
    std::string out_dir;     // empty: summary on stdout only
    int threads = 1;
    uint64_t seed = 0;
    std::string capacity;    // "key=value,..." applied before the config's own overrides
};

// Exit status: 0 success, 1 capacity failure, 2 config error. Errors are
// written to err as {"error": {"kind", "message"}}.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// Parses argv (without the program name) and reads FROBCOUNT_CAPACITY.
int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

const std::vector<std::string>& commands();

// Config parsing, exposed for the tests.
i128 parse_integer(const Json& j);
Rational parse_rational_json(const Json& j);
Scalar parse_scalar(const Json& j);
IntPoly parse_poly(const Json& j);
FrobMultSpec parse_spec(const Json& j);
LinearForm parse_linear_form(const Json& j);
std::vector<uint64_t> parse_grid(const Json& j);
ConstraintSet parse_constraints(const Json& j);

using Family = std::variant<ConicBundleFamily, MultinormFamily, QuaternionBrauerFamily>;
Family parse_family(const Json& j);

// Row-major table with a header, written as RFC 4180 CSV with LF endings.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

std::string to_csv(const Table& t);
// Writes through a temporary file and a rename.
void write_atomic(const std::string& path, const std::string& contents);

}  // namespace fc::cli
