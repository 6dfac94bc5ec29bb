#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pelllab/cutoff.hpp"

namespace pelllab::cli {

constexpr int kSchemaVersion = 1;

enum class ScenarioKind { class_check, convexity, cutoff_audit, contractivity, flow, bilinear, truncation };
enum class Status { pass, fail, not_refuted };

std::string to_string(ScenarioKind k);
ScenarioKind kind_from_string(const std::string& s);
std::string to_string(Status s);
Status status_from_string(const std::string& s);

struct Scenario {
    std::string name;
    ScenarioKind kind = ScenarioKind::class_check;
    nlohmann::json inputs = nlohmann::json::object();  // file references already resolved
    nlohmann::json params = nlohmann::json::object();
    std::uint64_t seed = 1;
};

struct Config {
    std::vector<Scenario> scenarios;
    bool emit_plots = true;
};

// Malformed or inconsistent configuration. line/column are 1-based; 0 when not applicable.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, std::string file = {}, std::size_t line = 0,
                std::size_t column = 0);
    const std::string& file() const { return file_; }
    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    std::string file_;
    std::size_t line_, column_;
};

// Parses JSON text, turning nlohmann byte offsets into line/column.
nlohmann::json parse_json_text(const std::string& text, const std::string& file);

// String inputs are paths relative to base_dir.
Config parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
Config load_config(const std::filesystem::path& path);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

struct ScenarioResult {
    std::string name;
    ScenarioKind kind = ScenarioKind::class_check;
    std::uint64_t seed = 1;
    Status status = Status::fail;
    nlohmann::json metrics = nlohmann::json::object();
    std::string error;
    std::vector<std::string> artifacts;  // relative to the output directory

    // Plot data, written by emit_plots_data.
    std::map<std::string, Table> tables;
    std::optional<CutoffParams> region_map;
};

struct RunReport {
    std::vector<ScenarioResult> scenarios;
    // 0 iff no scenario failed.
    int exit_code() const;
};

ScenarioResult run_scenario(const Scenario& s);

// Scenarios run on a pool of `threads` workers; results keep the config order.
RunReport run(const Config& cfg, int threads = 1, std::optional<std::uint64_t> seed_override = {});

nlohmann::json to_json(const RunReport& r);
// Throws std::invalid_argument when the document violates the report schema.
void validate_report(const nlohmann::json& j);
// Inverse of to_json on the serialized fields (plot tables are not serialized).
RunReport report_from_json(const nlohmann::json& j);
// Two-space indented JSON with a trailing newline.
std::string dump_report(const RunReport& r);

// Writes <name>_<table>.csv per table and region_map_<name>.csv per cutoff scenario,
// appends the paths to each scenario's artifacts and returns them all.
std::vector<std::filesystem::path> emit_plots_data(RunReport& r, const std::filesystem::path& out_dir);

}  // namespace pelllab::cli
