#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hsca/suites.hpp"

namespace hsca::app {

using Json = nlohmann::ordered_json;

enum Exit : int { kOk = 0, kSuiteFailure = 1, kSchema = 2, kIo = 3 };

struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string command;
    std::vector<int> m{3};
    std::vector<int> k{1};
    std::vector<int> grid{8, 16, 32};
    std::vector<std::string> suites{"right_inverse"};
    std::string out;
    uint64_t seed = 1;
    int threads = 1;
    int sphere_degree = -1;
    std::vector<std::pair<double, double>> bounds;

    // beltrami
    std::string f_mode = "scalar";
    Json f_spec = Json{{"type", "contraction"}, {"factor", 0.5}};
    Json phi_spec = Json{{"degree", 2}, {"seed", 7}};
    double tol = 1e-10;
    int max_iter = 200;
    double rho_bound = 0;
    int power_steps = 20;

    Json to_json() const;
};

// merges a JSON config document into cfg; throws SchemaError
void apply_config(const Json& doc, RunConfig& cfg);
void validate(const RunConfig& cfg);

Json report_json(const suites::SuiteReport& r, const RunConfig& cfg);
std::string constants_csv(const std::vector<int>& ms, const std::vector<int>& ks);

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hsca::app
