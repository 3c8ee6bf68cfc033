#include "stl/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <set>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "stl/field.hpp"

namespace stl {

namespace {

class Parser {
public:
    Parser(const std::string& text, const std::string& src) : s_(text), src_(src) {}

    Json run() {
        Json root = Json::object();
        Json* table = &root;
        while (true) {
            skip_ws_nl();
            if (eof()) break;
            char c = peek();
            if (c == '[') {
                if (at("[[")) error("arrays of tables are not supported");
                ++pos_;
                std::vector<std::string> path = key_path(']');
                expect(']');
                end_of_line();
                table = &root;
                for (size_t i = 0; i < path.size(); ++i) {
                    Json& next = (*table)[path[i]];
                    if (next.is_null()) next = Json::object();
                    if (!next.is_object()) error("key '" + path[i] + "' is not a table");
                    table = &next;
                }
                if (defined_.count(join(path))) error("table [" + join(path) + "] defined twice");
                defined_.insert(join(path));
            } else {
                std::vector<std::string> path = key_path('=');
                skip_ws();
                expect('=');
                skip_ws();
                Json v = value();
                assign(*table, path, std::move(v));
                end_of_line();
            }
        }
        return root;
    }

private:
    const std::string& s_;
    std::string src_;
    size_t pos_ = 0;
    std::set<std::string> defined_;

    bool eof() const { return pos_ >= s_.size(); }
    char peek() const { return eof() ? '\0' : s_[pos_]; }
    bool at(const char* lit) const { return s_.compare(pos_, std::strlen(lit), lit) == 0; }

    [[noreturn]] void error(const std::string& msg) const {
        int line = 1;
        for (size_t i = 0; i < pos_ && i < s_.size(); ++i)
            if (s_[i] == '\n') ++line;
        fail(ErrorKind::Config, src_ + ":" + std::to_string(line) + ": " + msg);
    }

    static std::string join(const std::vector<std::string>& p) {
        std::string r;
        for (size_t i = 0; i < p.size(); ++i) r += (i ? "." : "") + p[i];
        return r;
    }

    void expect(char c) {
        if (peek() != c) error(std::string("expected '") + c + "'");
        ++pos_;
    }

    void skip_ws() {
        while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos_;
    }
    void skip_comment() {
        if (peek() == '#')
            while (!eof() && peek() != '\n') ++pos_;
    }
    void skip_ws_nl() {
        while (!eof()) {
            char c = peek();
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n')
                ++pos_;
            else if (c == '#')
                skip_comment();
            else
                break;
        }
    }
    void end_of_line() {
        skip_ws();
        skip_comment();
        if (peek() == '\r') ++pos_;
        if (!eof() && peek() != '\n') error("unexpected trailing characters");
    }

    std::string bare_or_quoted_key() {
        skip_ws();
        char c = peek();
        if (c == '"' || c == '\'') return string_value();
        size_t b = pos_;
        while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-')) ++pos_;
        if (b == pos_) error("expected a key");
        return s_.substr(b, pos_ - b);
    }

    std::vector<std::string> key_path(char stop) {
        std::vector<std::string> p;
        while (true) {
            p.push_back(bare_or_quoted_key());
            skip_ws();
            if (peek() == '.') {
                ++pos_;
                continue;
            }
            if (peek() != stop) error(std::string("expected '") + stop + "' after key");
            return p;
        }
    }

    void assign(Json& table, const std::vector<std::string>& path, Json v) {
        Json* t = &table;
        for (size_t i = 0; i + 1 < path.size(); ++i) {
            Json& next = (*t)[path[i]];
            if (next.is_null()) next = Json::object();
            if (!next.is_object()) error("key '" + path[i] + "' is not a table");
            t = &next;
        }
        if (t->contains(path.back())) error("duplicate key '" + path.back() + "'");
        (*t)[path.back()] = std::move(v);
    }

    std::string string_value() {
        char q = peek();
        ++pos_;
        std::string out;
        while (true) {
            if (eof() || peek() == '\n') error("unterminated string");
            char c = s_[pos_++];
            if (c == q) break;
            if (c == '\\' && q == '"') {
                if (eof()) error("unterminated escape");
                char e = s_[pos_++];
                switch (e) {
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                case '"': out += '"'; break;
                case '\\': out += '\\'; break;
                default: error(std::string("unsupported escape \\") + e);
                }
            } else {
                out += c;
            }
        }
        return out;
    }

    Json value() {
        char c = peek();
        if (c == '"' || c == '\'') return string_value();
        if (c == '[') {
            ++pos_;
            Json arr = Json::array();
            while (true) {
                skip_ws_nl();
                if (peek() == ']') {
                    ++pos_;
                    return arr;
                }
                arr.push_back(value());
                skip_ws_nl();
                if (peek() == ',') {
                    ++pos_;
                    continue;
                }
                if (peek() == ']') {
                    ++pos_;
                    return arr;
                }
                error("expected ',' or ']' in array");
            }
        }
        if (c == '{') {
            ++pos_;
            Json obj = Json::object();
            skip_ws();
            if (peek() == '}') {
                ++pos_;
                return obj;
            }
            while (true) {
                std::vector<std::string> path = key_path('=');
                skip_ws();
                expect('=');
                skip_ws();
                Json v = value();
                assign(obj, path, std::move(v));
                skip_ws();
                if (peek() == ',') {
                    ++pos_;
                    continue;
                }
                if (peek() == '}') {
                    ++pos_;
                    return obj;
                }
                error("expected ',' or '}' in inline table");
            }
        }
        if (at("true")) {
            pos_ += 4;
            return true;
        }
        if (at("false")) {
            pos_ += 5;
            return false;
        }
        // number
        size_t b = pos_;
        while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '+' || peek() == '-' ||
                          peek() == '.' || peek() == '_'))
            ++pos_;
        std::string tok = s_.substr(b, pos_ - b);
        tok.erase(std::remove(tok.begin(), tok.end(), '_'), tok.end());
        if (tok.empty()) error("expected a value");
        char* end = nullptr;
        bool is_int = tok.find_first_of(".eEin") == std::string::npos;
        if (is_int) {
            long long v = std::strtoll(tok.c_str(), &end, 10);
            if (*end == '\0') return v;
        }
        double v = std::strtod(tok.c_str(), &end);
        if (*end != '\0' || !std::isfinite(v)) error("invalid number '" + tok + "'");
        return v;
    }
};

}  // namespace

Config parse_config(const std::string& text, const std::string& source) {
    Config c;
    c.source = source;
    c.root = Parser(text, source).run();
    return c;
}

Config load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) fail(ErrorKind::Config, "cannot open config file: " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str(), path);
}

std::string fnv1a_hex(const std::string& data) {
    uint64_t h = 14695981039346656037ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string Config::digest() const { return fnv1a_hex(root.dump()); }

bool Config::has(const std::string& s) const { return root.contains(s) && root[s].is_object(); }

const Json* Config::find(const std::string& s) const { return has(s) ? &root[s] : nullptr; }

const Json& Config::section(const std::string& s) const {
    if (!has(s)) fail(ErrorKind::Config, source + ": missing [" + s + "] section");
    return root[s];
}

double get_number(const Json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key)) fail(ErrorKind::Config, "missing key '" + key + "' in " + where);
    const Json& v = obj[key];
    if (!v.is_number()) fail(ErrorKind::Config, "key '" + key + "' in " + where + " must be a number");
    return v.get<double>();
}

double get_number(const Json& obj, const std::string& key, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) fail(ErrorKind::Config, "key '" + key + "' must be a number");
    return obj[key].get<double>();
}

int get_int(const Json& obj, const std::string& key, int fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number_integer()) fail(ErrorKind::Config, "key '" + key + "' must be an integer");
    return obj[key].get<int>();
}

std::string get_string(const Json& obj, const std::string& key, const std::string& fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_string()) fail(ErrorKind::Config, "key '" + key + "' must be a string");
    return obj[key].get<std::string>();
}

bool get_bool(const Json& obj, const std::string& key, bool fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_boolean()) fail(ErrorKind::Config, "key '" + key + "' must be true or false");
    return obj[key].get<bool>();
}

Vec get_vec(const Json& obj, const std::string& key, const Vec& fallback) {
    if (!obj.contains(key)) return fallback;
    const Json& v = obj[key];
    if (v.is_number()) return {v.get<double>()};
    if (!v.is_array()) fail(ErrorKind::Config, "key '" + key + "' must be a number or an array of numbers");
    Vec out;
    for (const auto& e : v) {
        if (!e.is_number()) fail(ErrorKind::Config, "key '" + key + "' must contain numbers only");
        out.push_back(e.get<double>());
    }
    return out;
}

Potential potential_from_json(const Json& j, int dim, const std::string& where) {
    if (!j.is_object()) fail(ErrorKind::Config, where + " must be a table");
    const std::string kind = get_string(j, "kind", "zero");
    Potential p;
    if (kind == "zero") {
        p = Potential::zero(dim);
    } else if (kind == "constant") {
        p = Potential::constant(get_number(j, "value", where), dim);
    } else if (kind == "linear") {
        Vec a = get_vec(j, "a", Vec(dim, 0.0));
        if (static_cast<int>(a.size()) != dim) fail(ErrorKind::Config, where + ": 'a' must have dim entries");
        p = Potential::linear(a);
    } else if (kind == "quadratic") {
        Vec lam = get_vec(j, "lambda", {1.0});
        Vec ctr = get_vec(j, "center", Vec(dim, 0.0));
        if (lam.size() == 1 && dim > 1) {
            double l = lam[0];
            lam.assign(static_cast<size_t>(dim) * dim, 0.0);
            for (int i = 0; i < dim; ++i) lam[i * dim + i] = l;
        }
        if (static_cast<int>(ctr.size()) != dim) fail(ErrorKind::Config, where + ": 'center' must have dim entries");
        if (lam.size() != static_cast<size_t>(dim) * dim)
            fail(ErrorKind::Config, where + ": 'lambda' must be a scalar or dim*dim entries");
        p = Potential::quadratic(lam, ctr, get_number(j, "offset", 0.0));
    } else if (kind == "double_well") {
        p = Potential::double_well(get_number(j, "a", where), get_number(j, "b", where), dim);
    } else if (kind == "tabulated") {
        std::string file = get_string(j, "file", "");
        if (file.empty()) fail(ErrorKind::Config, where + ": tabulated potential needs 'file'");
        ScalarField f = read_field_file(file);
        if (f.has_time) fail(ErrorKind::Config, where + ": tabulated potential must be space-only");
        auto t = std::make_shared<Table>();
        t->axes = f.axes;
        t->values = f.values;
        p = Potential::tabulated(t);
    } else {
        fail(ErrorKind::Config, where + ": unknown potential kind '" + kind + "'");
    }
    if (j.contains("scale_times") || j.contains("scale_values"))
        p = p.with_time_scale(get_vec(j, "scale_times", {}), get_vec(j, "scale_values", {}));
    return p;
}

CostSpec cost_from_config(const Config& cfg) {
    const Json& c = cfg.section("cost");
    CostSpec s;
    s.epsilon = get_number(c, "epsilon", "[cost]");
    s.horizon = get_number(c, "horizon", 1.0);
    s.dim = get_int(c, "dim", 1);
    if (s.dim < 1) fail(ErrorKind::Config, "[cost] dim must be positive");
    if (!(s.epsilon >= 0.0)) fail(ErrorKind::Config, "[cost] epsilon must be nonnegative");
    if (!(s.horizon > 0.0)) fail(ErrorKind::Config, "[cost] horizon must be positive");
    s.running = Potential::zero(s.dim);
    s.terminal = Potential::zero(s.dim);

    // named problem families
    const std::string preset = get_string(c, "preset", "");
    const double lam = get_number(c, "lambda", 1.0);
    if (preset == "linear") {
        s.terminal = Potential::linear(get_vec(c, "a", Vec(s.dim, 1.0)));
    } else if (preset == "harmonic") {
        if (s.dim != 1) fail(ErrorKind::Config, "[cost] harmonic preset is d = 1");
        s.running = Potential::quadratic1(lam);
    } else if (preset == "stationary" || preset == "relaxing") {
        if (s.dim != 1) fail(ErrorKind::Config, "[cost] quadratic-pair presets are d = 1");
        s.terminal = Potential::quadratic1(lam);
        s.running = Potential::quadratic1(lam * lam, 0.0, -0.5 * s.epsilon * lam);
        s.initial = preset == "stationary" ? Potential::quadratic1(lam) : Potential::quadratic1(get_number(c, "kappa", 0.0));
    } else if (!preset.empty() && preset != "zero") {
        fail(ErrorKind::Config, "[cost] unknown preset '" + preset + "'");
    }
    if (c.contains("running")) s.running = potential_from_json(c["running"], s.dim, "[cost].running");
    if (c.contains("terminal")) s.terminal = potential_from_json(c["terminal"], s.dim, "[cost].terminal");
    if (c.contains("initial")) s.initial = potential_from_json(c["initial"], s.dim, "[cost].initial");
    return s;
}

SpaceTimeGrid grid_from_config(const Config& cfg, const CostSpec& spec) {
    const Json& g = cfg.section("grid");
    double lo = get_number(g, "x_min", "[grid]");
    double hi = get_number(g, "x_max", "[grid]");
    int nx = get_int(g, "n_x", 257);
    int nt = get_int(g, "n_t", 1001);
    if (!(hi > lo)) fail(ErrorKind::Config, "[grid] x_max must exceed x_min");
    if (nx < 8 || nt < 2) fail(ErrorKind::Config, "[grid] needs n_x >= 8 and n_t >= 2");
    return SpaceTimeGrid::line(lo, hi, nx, nt, spec.horizon);
}

}  // namespace stl
