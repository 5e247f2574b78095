#include "pstab/json_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace pstab {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw SpecError(where + ": " + what);
}

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

const json& require_field(const json& node, const char* key, const std::string& where) {
    auto it = node.find(key);
    if (it == node.end()) fail(where, std::string("missing field '") + key + "'");
    return *it;
}

double as_number(const json& node, const std::string& where) {
    if (!node.is_number()) fail(where, "expected a number");
    return node.get<double>();
}

std::size_t as_count(const json& node, const std::string& where) {
    if (!node.is_number_unsigned() && !(node.is_number_integer() && node.get<long long>() >= 0)) {
        fail(where, "expected a nonnegative integer");
    }
    return node.get<std::size_t>();
}

DenseMatrix as_matrix(const json& node, std::size_t rows, std::size_t cols,
                      const std::string& where) {
    if (!node.is_array() || node.size() != rows) {
        fail(where, "expected " + std::to_string(rows) + " rows");
    }
    std::vector<double> entries;
    entries.reserve(rows * cols);
    for (std::size_t i = 0; i < rows; ++i) {
        const json& row = node[i];
        if (!row.is_array() || row.size() != cols) {
            fail(where + "[" + std::to_string(i) + "]",
                 "expected " + std::to_string(cols) + " columns");
        }
        for (std::size_t j = 0; j < cols; ++j) {
            entries.push_back(as_number(row[j], where + "[" + std::to_string(i) + "][" +
                                                    std::to_string(j) + "]"));
        }
    }
    return DenseMatrix(rows, cols, std::move(entries));
}

std::vector<double> as_vector(const json& node, std::size_t len, const std::string& where) {
    if (!node.is_array() || node.size() != len) {
        fail(where, "expected " + std::to_string(len) + " entries");
    }
    std::vector<double> out;
    out.reserve(len);
    for (std::size_t i = 0; i < len; ++i) {
        out.push_back(as_number(node[i], where + "[" + std::to_string(i) + "]"));
    }
    return out;
}

DelayMatrix as_delay_matrix(const json& node, std::size_t n, unsigned bound,
                            const std::string& where) {
    if (!node.is_array() || node.size() != n) {
        fail(where, "expected " + std::to_string(n) + " rows");
    }
    std::vector<unsigned> lags;
    lags.reserve(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        const json& row = node[i];
        if (!row.is_array() || row.size() != n) {
            fail(where + "[" + std::to_string(i) + "]",
                 "expected " + std::to_string(n) + " columns");
        }
        for (std::size_t j = 0; j < n; ++j) {
            const std::string cell =
                where + "[" + std::to_string(i) + "][" + std::to_string(j) + "]";
            const std::size_t lag = as_count(row[j], cell);
            if (lag > bound) {
                fail(cell, "lag " + std::to_string(lag) + " exceeds the bound " +
                               std::to_string(bound));
            }
            lags.push_back(static_cast<unsigned>(lag));
        }
    }
    return DelayMatrix(n, bound, std::move(lags));
}

DelayConfig parse_delay(const json& node, std::size_t n, std::size_t num_maps) {
    if (!node.is_object()) fail("delay", "expected an object");
    DelayConfig cfg;
    cfg.bound = static_cast<unsigned>(as_count(require_field(node, "L", "delay"), "delay.L"));
    const json& pol = require_field(node, "policy", "delay");
    if (!pol.is_object()) fail("delay.policy", "expected an object");
    const json& kind_node = require_field(pol, "kind", "delay.policy");
    if (!kind_node.is_string()) fail("delay.policy.kind", "expected a string");
    const std::string kind = kind_node.get<std::string>();
    if (kind == "none") {
        cfg.policy = DelayPolicy::none();
    } else if (kind == "iid_uniform_entries") {
        cfg.policy = DelayPolicy::iid_uniform_entries();
    } else if (kind == "fixed") {
        cfg.policy = DelayPolicy::fixed(as_delay_matrix(
            require_field(pol, "D", "delay.policy"), n, cfg.bound, "delay.policy.D"));
    } else if (kind == "explicit") {
        const json& per_map = require_field(pol, "per_map", "delay.policy");
        if (!per_map.is_array() || per_map.size() != num_maps) {
            fail("delay.policy.per_map",
                 "expected one choice list per map (" + std::to_string(num_maps) + ")");
        }
        std::vector<std::vector<DelayPolicy::Choice>> lists;
        lists.reserve(per_map.size());
        for (std::size_t m = 0; m < per_map.size(); ++m) {
            const std::string where = "delay.policy.per_map[" + std::to_string(m) + "]";
            const json& list = per_map[m];
            if (!list.is_array()) fail(where, "expected an array of {D, prob}");
            std::vector<DelayPolicy::Choice> choices;
            for (std::size_t c = 0; c < list.size(); ++c) {
                const std::string cw = where + "[" + std::to_string(c) + "]";
                const json& entry = list[c];
                if (!entry.is_object()) fail(cw, "expected an object");
                DelayPolicy::Choice choice;
                choice.lags = as_delay_matrix(require_field(entry, "D", cw), n, cfg.bound,
                                              cw + ".D");
                choice.prob = as_number(require_field(entry, "prob", cw), cw + ".prob");
                choices.push_back(std::move(choice));
            }
            lists.push_back(std::move(choices));
        }
        try {
            cfg.policy = DelayPolicy::explicit_list(std::move(lists));
        } catch (const std::invalid_argument& e) {
            fail("delay.policy", e.what());
        }
    } else {
        fail("delay.policy.kind",
             "unknown kind '" + kind +
                 "' (expected none, fixed, iid_uniform_entries or explicit)");
    }
    return cfg;
}

json matrix_to_json(const DenseMatrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) {
            row.push_back(m(i, j));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

json delay_matrix_to_json(const DelayMatrix& d) {
    json rows = json::array();
    for (std::size_t i = 0; i < d.n; ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < d.n; ++j) row.push_back(d(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

json policy_to_json(const DelayPolicy& policy) {
    json out;
    switch (policy.kind) {
        case DelayPolicyKind::none:
            out["kind"] = "none";
            break;
        case DelayPolicyKind::fixed:
            out["kind"] = "fixed";
            out["D"] = delay_matrix_to_json(*policy.fixed_lags);
            break;
        case DelayPolicyKind::iid_uniform_entries:
            out["kind"] = "iid_uniform_entries";
            break;
        case DelayPolicyKind::explicit_list: {
            out["kind"] = "explicit";
            json lists = json::array();
            for (const auto& choices : policy.per_map) {
                json list = json::array();
                for (const auto& c : choices) {
                    list.push_back({{"D", delay_matrix_to_json(c.lags)}, {"prob", c.prob}});
                }
                lists.push_back(std::move(list));
            }
            out["per_map"] = std::move(lists);
            break;
        }
    }
    return out;
}

json system_to_json(const SystemSpec& spec) {
    json root;
    if (spec.is_ensemble()) {
        const IntervalEnsemble& e = spec.ensemble();
        root["n"] = e.n;
        root["ensemble"] = {{"lower", matrix_to_json(e.lower)},
                            {"upper", matrix_to_json(e.upper)}};
    } else {
        const SwitchedSystem& sys = spec.switched();
        root["n"] = sys.dimension();
        json maps = json::array();
        for (std::size_t k = 0; k < sys.maps.size(); ++k) {
            const MapSpec& f = sys.maps[k];
            maps.push_back({{"linear", matrix_to_json(f.linear)},
                            {"gain", matrix_to_json(f.gain)},
                            {"bias", f.bias},
                            {"weight", sys.weights[k]}});
        }
        root["maps"] = std::move(maps);
    }
    if (spec.delay) {
        root["delay"] = {{"L", spec.delay->bound}, {"policy", policy_to_json(spec.delay->policy)}};
    }
    return root;
}

}  // namespace

std::size_t SystemSpec::dimension() const {
    return is_ensemble() ? ensemble().n : switched().dimension();
}

SystemSpec parse_system_spec(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        const auto [line, col] = line_column(text, e.byte);
        throw SpecError("malformed JSON at line " + std::to_string(line) + ", column " +
                        std::to_string(col) + ": " + e.what());
    }
    if (!root.is_object()) fail("spec", "top level must be an object");

    const std::size_t n = as_count(require_field(root, "n", "spec"), "n");
    if (n == 0) fail("n", "dimension must be >= 1");

    SystemSpec spec;
    std::size_t num_maps = 0;
    if (root.contains("ensemble")) {
        if (root.contains("maps")) fail("spec", "give either 'maps' or 'ensemble', not both");
        const json& e = root["ensemble"];
        if (!e.is_object()) fail("ensemble", "expected an object");
        DenseMatrix lower = as_matrix(require_field(e, "lower", "ensemble"), n, n,
                                      "ensemble.lower");
        DenseMatrix upper = as_matrix(require_field(e, "upper", "ensemble"), n, n,
                                      "ensemble.upper");
        try {
            spec.system = IntervalEnsemble(std::move(lower), std::move(upper));
        } catch (const std::invalid_argument& err) {
            fail("ensemble", err.what());
        }
    } else if (root.contains("maps")) {
        const json& maps_node = root["maps"];
        if (!maps_node.is_array() || maps_node.empty()) {
            fail("maps", "expected a nonempty array of maps");
        }
        std::vector<MapSpec> maps;
        std::vector<double> weights;
        for (std::size_t k = 0; k < maps_node.size(); ++k) {
            const std::string where = "maps[" + std::to_string(k) + "]";
            const json& m = maps_node[k];
            if (!m.is_object()) fail(where, "expected an object");
            DenseMatrix linear = as_matrix(require_field(m, "linear", where), n, n,
                                           where + ".linear");
            DenseMatrix gain =
                as_matrix(require_field(m, "gain", where), n, n, where + ".gain");
            std::vector<double> bias =
                as_vector(require_field(m, "bias", where), n, where + ".bias");
            weights.push_back(
                as_number(require_field(m, "weight", where), where + ".weight"));
            maps.emplace_back(std::move(linear), std::move(gain), std::move(bias));
        }
        num_maps = maps.size();
        try {
            spec.system = SwitchedSystem(std::move(maps), std::move(weights));
        } catch (const std::invalid_argument& err) {
            fail("maps", err.what());
        }
    } else {
        fail("spec", "missing field 'maps' or 'ensemble'");
    }

    if (root.contains("delay")) {
        spec.delay = parse_delay(root["delay"], n, num_maps);
        if (spec.is_ensemble() &&
            spec.delay->policy.kind == DelayPolicyKind::explicit_list) {
            fail("delay.policy", "explicit per-map policies require a finite map set");
        }
    }
    return spec;
}

SystemSpec load_system_spec(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SpecError("cannot open '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    try {
        return parse_system_spec(buffer.str());
    } catch (const SpecError& e) {
        throw SpecError(path.string() + ": " + e.what());
    }
}

std::string serialize_system_spec(const SystemSpec& spec) {
    return system_to_json(spec).dump(2) + "\n";
}

BlockFile parse_blocks(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        const auto [line, col] = line_column(text, e.byte);
        throw SpecError("malformed JSON at line " + std::to_string(line) + ", column " +
                        std::to_string(col) + ": " + e.what());
    }
    if (!root.is_object()) fail("blocks", "top level must be an object");
    BlockFile out;
    out.n = as_count(require_field(root, "n", "blocks"), "n");
    if (out.n == 0) fail("n", "dimension must be >= 1");
    const json& blocks = require_field(root, "blocks", "blocks");
    if (!blocks.is_array() || blocks.empty()) {
        fail("blocks", "expected a nonempty array of matrices");
    }
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        out.blocks.push_back(
            as_matrix(blocks[b], out.n, out.n, "blocks[" + std::to_string(b) + "]"));
    }
    return out;
}

BlockFile load_blocks(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SpecError("cannot open '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    try {
        return parse_blocks(buffer.str());
    } catch (const SpecError& e) {
        throw SpecError(path.string() + ": " + e.what());
    }
}

std::string report_to_json(const StabilityReport& report) {
    json out;
    out["p"] = report.p;
    out["verdict"] = verdict_name(report.verdict);
    out["p_radius"] = report.p_radius;
    out["at_radius_boundary"] = report.at_radius_boundary;
    out["expectation_matrix"] = matrix_to_json(report.expectation_matrix);
    if (report.shared_fixed_point) {
        out["shared_fixed_point"] = *report.shared_fixed_point;
        out["fixed_point_residual"] = report.fixed_point_residual;
    }
    json chain = json::array();
    for (const CertificateStep& s : report.certificate_chain) {
        chain.push_back({{"claim", s.claim}, {"rule", s.rule}, {"evidence", s.evidence}});
    }
    out["certificate_chain"] = std::move(chain);
    return out.dump(2) + "\n";
}

std::string serialize_embedded_system(const SwitchedSystem& embedded,
                                      const std::vector<DenseMatrix>& companions) {
    SystemSpec spec;
    spec.system = embedded;
    json root = json::parse(serialize_system_spec(spec));
    json list = json::array();
    for (const DenseMatrix& c : companions) list.push_back(matrix_to_json(c));
    root["lipschitz_delayed"] = std::move(list);
    return root.dump(2) + "\n";
}

}  // namespace pstab
