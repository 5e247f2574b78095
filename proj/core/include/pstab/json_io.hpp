#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "pstab/delay.hpp"
#include "pstab/stability.hpp"
#include "pstab/systems.hpp"

namespace pstab {

/// Malformed or schema-violating input. Distinct from numerical failures so
/// callers can map it to its own exit status.
class SpecError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct DelayConfig {
    unsigned bound = 0;
    DelayPolicy policy;
};

/// A parsed system specification: either a finite switched system or an
/// interval ensemble, optionally wrapped in a delay configuration.
struct SystemSpec {
    std::variant<SwitchedSystem, IntervalEnsemble> system;
    std::optional<DelayConfig> delay;

    [[nodiscard]] bool is_ensemble() const {
        return std::holds_alternative<IntervalEnsemble>(system);
    }
    [[nodiscard]] const SwitchedSystem& switched() const {
        return std::get<SwitchedSystem>(system);
    }
    [[nodiscard]] const IntervalEnsemble& ensemble() const {
        return std::get<IntervalEnsemble>(system);
    }
    [[nodiscard]] std::size_t dimension() const;
};

/// Parses the JSON system schema:
///   {"n": int,
///    "maps": [{"linear": [[..]], "gain": [[..]], "bias": [..], "weight": r}, ...]
///    | "ensemble": {"lower": [[..]], "upper": [[..]]},
///    "delay": {"L": int, "policy": {"kind": "...", ...}}?}
/// Throws SpecError with line/column on malformed JSON and with the offending
/// field path on schema violations.
[[nodiscard]] SystemSpec parse_system_spec(const std::string& text);
[[nodiscard]] SystemSpec load_system_spec(const std::filesystem::path& path);

/// Canonical serialization; parse(serialize(s)) reproduces the in-memory
/// values exactly (numbers are emitted with round-trip precision).
[[nodiscard]] std::string serialize_system_spec(const SystemSpec& spec);

/// Block files for the reduction check: {"n": int, "blocks": [[[..]], ...]}.
struct BlockFile {
    std::size_t n = 0;
    std::vector<DenseMatrix> blocks;
};
[[nodiscard]] BlockFile parse_blocks(const std::string& text);
[[nodiscard]] BlockFile load_blocks(const std::filesystem::path& path);

[[nodiscard]] std::string report_to_json(const StabilityReport& report);

/// Embedded-system output of the `embed` command: the delay-space maps plus
/// their companion comparison matrices; valid input for the parser again.
[[nodiscard]] std::string serialize_embedded_system(const SwitchedSystem& embedded,
                                                    const std::vector<DenseMatrix>& companions);

}  // namespace pstab
