#pragma once

#include "ivproc/csv.hpp"
#include "ivproc/errors.hpp"
#include "ivproc/graph.hpp"
#include "ivproc/hawkes.hpp"
#include "ivproc/var.hpp"

#include <Eigen/Dense>

#include <cctype>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace ivproc {

// ---------------------------------------------------------------------------
// Minimal config-document format: one `key = value` pair per entry, `#`
// comments, values are numbers, quoted strings, or (nested) bracketed
// lists. Matrices are written row-major, either flat with the dimension
// taken from `n`, or as a list of row lists. Example:
//
//   n = 2
//   p = 1
//   phis = [[0.0, 0.0, 0.5, 0.0]]
//   theta = [1.0, 0.0, 0.0, 1.0]
// ---------------------------------------------------------------------------

struct ConfigValue {
    std::variant<double, std::string, std::vector<ConfigValue>> data;

    [[nodiscard]] bool is_number() const { return std::holds_alternative<double>(data); }
    [[nodiscard]] bool is_string() const { return std::holds_alternative<std::string>(data); }
    [[nodiscard]] bool is_list() const {
        return std::holds_alternative<std::vector<ConfigValue>>(data);
    }
    [[nodiscard]] double number() const {
        if (!is_number()) throw argument_error("config value is not a number");
        return std::get<double>(data);
    }
    [[nodiscard]] const std::string& string() const {
        if (!is_string()) throw argument_error("config value is not a string");
        return std::get<std::string>(data);
    }
    [[nodiscard]] const std::vector<ConfigValue>& list() const {
        if (!is_list()) throw argument_error("config value is not a list");
        return std::get<std::vector<ConfigValue>>(data);
    }
};

struct ConfigDoc {
    std::vector<std::pair<std::string, ConfigValue>> entries;

    [[nodiscard]] const ConfigValue* find(const std::string& key) const {
        for (const auto& [k, v] : entries)
            if (k == key) return &v;
        return nullptr;
    }
    [[nodiscard]] const ConfigValue& require(const std::string& key) const {
        const ConfigValue* v = find(key);
        if (!v) throw argument_error("config is missing key '" + key + "'");
        return *v;
    }
    [[nodiscard]] bool has(const std::string& key) const { return find(key) != nullptr; }
};

namespace detail {

class ConfigParser {
public:
    explicit ConfigParser(std::string_view text) : text_(text) {}

    ConfigDoc parse() {
        ConfigDoc doc;
        skip_space();
        while (pos_ < text_.size()) {
            std::string key = parse_identifier();
            skip_space();
            expect('=');
            skip_space();
            doc.entries.emplace_back(std::move(key), parse_value());
            skip_space();
        }
        return doc;
    }

private:
    void skip_space() {
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (c == '#') {
                while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    void expect(char c) {
        if (pos_ >= text_.size() || text_[pos_] != c)
            throw argument_error(std::string("config parse error: expected '") + c + "' at offset " +
                                 std::to_string(pos_));
        ++pos_;
    }

    std::string parse_identifier() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        if (pos_ == start)
            throw argument_error("config parse error: expected key at offset " + std::to_string(pos_));
        return std::string(text_.substr(start, pos_ - start));
    }

    ConfigValue parse_value() {
        skip_space();
        if (pos_ >= text_.size()) throw argument_error("config parse error: missing value");
        const char c = text_[pos_];
        if (c == '[') return parse_list();
        if (c == '"') return parse_string();
        return parse_number();
    }

    ConfigValue parse_list() {
        expect('[');
        std::vector<ConfigValue> items;
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == ']') {
            ++pos_;
            return ConfigValue{std::move(items)};
        }
        while (true) {
            items.push_back(parse_value());
            skip_space();
            if (pos_ < text_.size() && text_[pos_] == ',') {
                ++pos_;
                skip_space();
                continue;
            }
            expect(']');
            break;
        }
        return ConfigValue{std::move(items)};
    }

    ConfigValue parse_string() {
        expect('"');
        std::string s;
        while (pos_ < text_.size() && text_[pos_] != '"') s.push_back(text_[pos_++]);
        expect('"');
        return ConfigValue{std::move(s)};
    }

    ConfigValue parse_number() {
        const char* begin = text_.data() + pos_;
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin)
            throw argument_error("config parse error: expected number at offset " +
                                 std::to_string(pos_));
        pos_ += static_cast<std::size_t>(end - begin);
        return ConfigValue{v};
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

} // namespace detail

inline ConfigDoc parse_config(std::string_view text) {
    return detail::ConfigParser(text).parse();
}

inline ConfigDoc load_config_file(const std::string& path) {
    return parse_config(detail::slurp(path));
}

// ---------------------------------------------------------------------------
// Conversions between config values and vectors/matrices.
// ---------------------------------------------------------------------------

inline Eigen::VectorXd vector_from_config(const ConfigValue& value) {
    const auto& items = value.list();
    Eigen::VectorXd v(static_cast<Eigen::Index>(items.size()));
    for (std::size_t i = 0; i < items.size(); ++i) v(static_cast<Eigen::Index>(i)) = items[i].number();
    return v;
}

/// Accepts either a flat row-major list of rows*cols numbers or a list of
/// `rows` row lists.
inline Eigen::MatrixXd matrix_from_config(const ConfigValue& value, int rows, int cols) {
    const auto& items = value.list();
    Eigen::MatrixXd m(rows, cols);
    if (!items.empty() && items.front().is_list()) {
        if (static_cast<int>(items.size()) != rows)
            throw argument_error("matrix literal has wrong row count");
        for (int i = 0; i < rows; ++i) {
            const auto& row = items[static_cast<std::size_t>(i)].list();
            if (static_cast<int>(row.size()) != cols)
                throw argument_error("matrix literal has wrong column count");
            for (int j = 0; j < cols; ++j) m(i, j) = row[static_cast<std::size_t>(j)].number();
        }
        return m;
    }
    if (static_cast<int>(items.size()) != rows * cols)
        throw argument_error("row-major matrix literal needs rows*cols entries");
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j)
            m(i, j) = items[static_cast<std::size_t>(i * cols + j)].number();
    return m;
}

inline std::string matrix_to_config(const Eigen::MatrixXd& m) {
    std::string out = "[";
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        out += (i == 0 ? "[" : ", [");
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j > 0) out += ", ";
            out += format_double(m(i, j));
        }
        out += "]";
    }
    out += "]";
    return out;
}

// ---------------------------------------------------------------------------
// Model documents.
// ---------------------------------------------------------------------------

inline int config_int(const ConfigValue& value, const std::string& what) {
    const double v = value.number();
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v) throw argument_error(what + " must be an integer");
    return i;
}

inline VarParams var_params_from_config(const ConfigDoc& doc) {
    const int n = config_int(doc.require("n"), "n");
    const auto& phi_value = doc.require("phis");
    const auto& phi_items = phi_value.list();
    const int p = doc.has("p") ? config_int(doc.require("p"), "p") : static_cast<int>(phi_items.size());
    if (static_cast<int>(phi_items.size()) != p)
        throw argument_error("phis must list exactly p matrices");
    std::vector<Eigen::MatrixXd> phis;
    phis.reserve(static_cast<std::size_t>(p));
    for (const auto& item : phi_items) phis.push_back(matrix_from_config(item, n, n));
    Eigen::MatrixXd theta = matrix_from_config(doc.require("theta"), n, n);
    return make_var_params(std::move(phis), std::move(theta));
}

inline HawkesParams hawkes_params_from_config(const ConfigDoc& doc) {
    const int n = config_int(doc.require("n"), "n");
    Eigen::VectorXd mu = vector_from_config(doc.require("mu"));
    if (mu.size() != n) throw argument_error("mu must have n entries");
    Eigen::MatrixXd alpha = matrix_from_config(doc.require("alpha"), n, n);
    Eigen::MatrixXd beta = matrix_from_config(doc.require("beta"), n, n);
    return make_hawkes_params(std::move(mu), std::move(alpha), std::move(beta));
}

inline CausalGraph graph_from_config(const ConfigDoc& doc) {
    const int n = config_int(doc.require("n"), "n");
    std::vector<std::pair<int, int>> edges;
    for (const auto& item : doc.require("edges").list()) {
        const auto& pair = item.list();
        if (pair.size() != 2) throw argument_error("each edge must be a pair [from, to]");
        edges.emplace_back(config_int(pair[0], "edge endpoint"), config_int(pair[1], "edge endpoint"));
    }
    return CausalGraph(n, std::move(edges));
}

enum class ModelKind { var, hawkes, graph };

inline ModelKind detect_model_kind(const ConfigDoc& doc) {
    if (const ConfigValue* kind = doc.find("kind")) {
        const std::string& s = kind->string();
        if (s == "var") return ModelKind::var;
        if (s == "hawkes") return ModelKind::hawkes;
        if (s == "graph") return ModelKind::graph;
        throw argument_error("unknown model kind '" + s + "'");
    }
    if (doc.has("phis")) return ModelKind::var;
    if (doc.has("alpha")) return ModelKind::hawkes;
    if (doc.has("edges")) return ModelKind::graph;
    throw argument_error("cannot infer model kind: need phis, alpha, or edges");
}

} // namespace ivproc
