#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <regex>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace lcpt::cli {

using nlohmann::json;

config_error::config_error(const std::string& source, const std::string& field,
                           std::optional<std::size_t> line,
                           const std::string& message)
    : std::runtime_error([&] {
          std::string where = source.empty() ? "<config>" : source;
          if (line) {
              where += fmt::format(":{}", *line);
          }
          if (!field.empty()) {
              where += fmt::format(": field '{}'", field);
          }
          return where + ": " + message;
      }()),
      field_(field), line_(line)
{
}

Units parse_units(const std::string& text)
{
    if (text == "scaled") {
        return Units::scaled;
    }
    if (text == "mhz") {
        return Units::mhz;
    }
    throw std::invalid_argument("units must be 'scaled' or 'mhz', got '" +
                                text + "'");
}

const char* to_string(Units u)
{
    return u == Units::mhz ? "mhz" : "scaled";
}

const char* to_string(Field f)
{
    switch (f) {
    case Field::omega_a: return "omega_a";
    case Field::omega_b: return "omega_b";
    case Field::delta_a: return "delta_a";
    case Field::delta_b: return "delta_b";
    case Field::gamma_a: return "gamma_a";
    case Field::gamma_b: return "gamma_b";
    }
    return "?";
}

double& field_of(LambdaParams& p, Field f)
{
    switch (f) {
    case Field::omega_a: return p.omega_a;
    case Field::omega_b: return p.omega_b;
    case Field::delta_a: return p.delta_a;
    case Field::delta_b: return p.delta_b;
    case Field::gamma_a: return p.gamma_a;
    case Field::gamma_b: return p.gamma_b;
    }
    return p.gamma_a;
}

double field_of(const LambdaParams& p, Field f)
{
    return field_of(const_cast<LambdaParams&>(p), f);
}

std::vector<const Axis*> RunConfig::swept_axes() const
{
    std::vector<const Axis*> out;
    for (const auto& a : axes) {
        if (a.swept()) {
            out.push_back(&a);
        }
    }
    return out;
}

LambdaParams RunConfig::base() const
{
    LambdaParams p;
    for (const auto& a : axes) {
        field_of(p, a.field) = a.values.front();
    }
    return p;
}

std::vector<LambdaParams> RunConfig::points() const
{
    std::vector<LambdaParams> out{base()};
    for (const Axis* axis : swept_axes()) {
        std::vector<LambdaParams> next;
        next.reserve(out.size() * axis->values.size());
        for (const auto& p : out) {
            for (double v : axis->values) {
                LambdaParams q = p;
                field_of(q, axis->field) = v;
                next.push_back(q);
            }
        }
        out = std::move(next);
    }
    return out;
}

// --- key positions --------------------------------------------------------

namespace {

std::string escape_pointer(const std::string& key)
{
    std::string out;
    for (char c : key) {
        if (c == '~') {
            out += "~0";
        } else if (c == '/') {
            out += "~1";
        } else {
            out += c;
        }
    }
    return out;
}

} // namespace

KeyLines::KeyLines(const std::string& text)
{
    struct Frame
    {
        bool object;
        std::string key;
        std::size_t index = 0;
        bool expect_key = true;
    };
    std::vector<Frame> stack;
    std::size_t line = 1;

    auto path_to_top = [&] {
        std::string p;
        for (std::size_t i = 0; i + 1 < stack.size(); ++i) {
            p += "/" + (stack[i].object ? escape_pointer(stack[i].key)
                                        : std::to_string(stack[i].index));
        }
        return p;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c == '\n') {
            ++line;
        } else if (c == '/' && i + 1 < text.size() && text[i + 1] == '/') {
            while (i < text.size() && text[i] != '\n') {
                ++i;
            }
            --i;
        } else if (c == '/' && i + 1 < text.size() && text[i + 1] == '*') {
            i += 2;
            while (i + 1 < text.size() && !(text[i] == '*' && text[i + 1] == '/')) {
                line += text[i] == '\n';
                ++i;
            }
            ++i;
        } else if (c == '"') {
            const std::size_t start_line = line;
            std::string s;
            for (++i; i < text.size() && text[i] != '"'; ++i) {
                if (text[i] == '\\' && i + 1 < text.size()) {
                    ++i;
                }
                s += text[i];
            }
            if (!stack.empty() && stack.back().object && stack.back().expect_key) {
                stack.back().key = s;
                stack.back().expect_key = false;
                lines_.emplace_back(path_to_top() + "/" + escape_pointer(s),
                                    start_line);
            }
        } else if (c == '{' || c == '[') {
            stack.push_back(Frame{c == '{', {}, 0, true});
        } else if ((c == '}' || c == ']') && !stack.empty()) {
            stack.pop_back();
        } else if (c == ',' && !stack.empty()) {
            if (stack.back().object) {
                stack.back().expect_key = true;
            } else {
                ++stack.back().index;
            }
        }
    }
}

std::optional<std::size_t> KeyLines::find(const std::string& pointer) const
{
    std::string p = pointer;
    while (!p.empty()) {
        for (const auto& [key, line] : lines_) {
            if (key == p) {
                return line;
            }
        }
        p.erase(p.rfind('/'));
    }
    return std::nullopt;
}

// --- parsing ---------------------------------------------------------------

json parse_json_text(const std::string& text, const std::string& source)
{
    try {
        return json::parse(text, nullptr, true, true);
    } catch (const json::parse_error& e) {
        const auto end = std::min<std::size_t>(e.byte, text.size());
        const auto line = static_cast<std::size_t>(
            std::count(text.begin(), text.begin() + static_cast<long>(end), '\n') + 1);
        std::string what = e.what();
        if (const auto pos = what.find("syntax error"); pos != std::string::npos) {
            what = what.substr(pos);
        }
        throw config_error(source, "", line, what);
    }
}

std::string read_file(const std::filesystem::path& path, const std::string& field)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw config_error(path.string(), field, std::nullopt, "cannot open file");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::optional<double> parse_phase(const std::string& raw)
{
    std::string text;
    std::remove_copy_if(raw.begin(), raw.end(), std::back_inserter(text),
                        [](unsigned char c) { return std::isspace(c); });
    static const std::regex with_pi(
        R"(^([+-]?)([0-9]*\.?[0-9]*)\*?pi(?:/([0-9]*\.?[0-9]+))?$)");
    std::smatch m;
    if (std::regex_match(text, m, with_pi)) {
        double v = std::numbers::pi;
        if (m[2].length() > 0) {
            v *= std::stod(m[2].str());
        }
        if (m[3].matched) {
            const double d = std::stod(m[3].str());
            if (d == 0.0) {
                return std::nullopt;
            }
            v /= d;
        }
        return m[1] == "-" ? -v : v;
    }
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used == text.size() && std::isfinite(v)) {
            return v;
        }
    } catch (const std::exception&) {
    }
    return std::nullopt;
}

namespace {

const std::set<std::string> run_keys{
    "command", "name",    "description", "units", "omega_a", "omega_b",
    "delta_a", "delta_b", "gamma_a",     "gamma_b", "phi",   "tau",
    "omega",   "eta",     "kinds",       "split"};

const std::set<std::string> commands{"steady-scan", "spectrum", "chd",
                                     "squeezing", "variance-map"};

struct Context
{
    const std::string& source;
    const KeyLines& lines;
    const std::string& pointer;

    [[noreturn]] void fail(const std::string& field, const std::string& msg) const
    {
        throw config_error(source, field, lines.find(pointer + "/" + field), msg);
    }

    double number(const json& v, const std::string& field) const
    {
        if (!v.is_number()) {
            fail(field, "expected a number");
        }
        const double x = v.get<double>();
        if (!std::isfinite(x)) {
            fail(field, "value is not finite");
        }
        return x;
    }

    std::size_t count(const json& v, const std::string& field) const
    {
        if (!v.is_number_integer() || v.get<long long>() < 1) {
            fail(field, "expected a positive integer");
        }
        return v.get<std::size_t>();
    }
};

std::vector<double> linspace(double from, double to, std::size_t points)
{
    const FrequencyGrid g{from, to, points};
    return g.values();
}

std::vector<double> axis_values(const json& v, const std::string& field,
                                const Context& cx)
{
    if (v.is_number()) {
        return {cx.number(v, field)};
    }
    if (v.is_array()) {
        if (v.empty()) {
            cx.fail(field, "sweep list is empty");
        }
        std::vector<double> out;
        for (const auto& x : v) {
            out.push_back(cx.number(x, field));
        }
        return out;
    }
    if (v.is_object()) {
        for (const auto& [k, _] : v.items()) {
            if (k != "from" && k != "to" && k != "points") {
                cx.fail(field + "/" + k, "unknown key in range");
            }
        }
        if (!v.contains("from") || !v.contains("to") || !v.contains("points")) {
            cx.fail(field, "range needs 'from', 'to' and 'points'");
        }
        const double from = cx.number(v["from"], field + "/from");
        const double to = cx.number(v["to"], field + "/to");
        const std::size_t n = cx.count(v["points"], field + "/points");
        if (n > 1 && !(from < to)) {
            cx.fail(field, "range needs from < to");
        }
        return linspace(from, to, n);
    }
    cx.fail(field, "expected a number, a list or a {from, to, points} range");
}

SpectrumKind parse_kind(const std::string& s, const Context& cx)
{
    for (auto k : {SpectrumKind::Incoherent, SpectrumKind::ChdPositive,
                   SpectrumKind::ChdNegative, SpectrumKind::ChdSecond,
                   SpectrumKind::ChdThird, SpectrumKind::Squeezing}) {
        if (s == to_string(k)) {
            return k;
        }
    }
    cx.fail("kinds", "unknown spectrum kind '" + s + "'");
}

void check_axis(Field f, const std::vector<double>& values, const Context& cx)
{
    for (double v : values) {
        const bool bad = ((f == Field::omega_a || f == Field::omega_b ||
                           f == Field::gamma_b) && v < 0.0) ||
                         (f == Field::gamma_a && v <= 0.0);
        if (bad) {
            cx.fail(to_string(f), f == Field::gamma_a ? "must be positive"
                                                      : "must be non-negative");
        }
    }
}

} // namespace

RunConfig parse_run_config(const json& j, const std::string& command,
                           const std::string& source, const KeyLines& lines,
                           const std::string& pointer,
                           std::optional<Units> units_override)
{
    const Context cx{source, lines, pointer};
    if (!j.is_object()) {
        throw config_error(source, pointer, lines.find(pointer),
                           "config must be a JSON object");
    }
    for (const auto& [key, _] : j.items()) {
        if (!run_keys.contains(key)) {
            cx.fail(key, "unknown key");
        }
    }

    RunConfig rc;
    rc.source = source;
    rc.command = command;
    if (j.contains("command")) {
        if (!j["command"].is_string()) {
            cx.fail("command", "expected a string");
        }
        const auto c = j["command"].get<std::string>();
        if (!commands.contains(c)) {
            cx.fail("command", "unknown command '" + c + "'");
        }
        if (!command.empty() && c != command) {
            cx.fail("command", "config is for '" + c + "', not '" + command + "'");
        }
        rc.command = c;
    }
    if (rc.command.empty()) {
        throw config_error(source, "command", lines.find(pointer),
                           "no command given");
    }
    if (j.contains("name")) {
        if (!j["name"].is_string() || j["name"].get<std::string>().empty()) {
            cx.fail("name", "expected a non-empty string");
        }
        rc.name = j["name"].get<std::string>();
    }

    if (j.contains("units")) {
        if (!j["units"].is_string()) {
            cx.fail("units", "expected \"scaled\" or \"mhz\"");
        }
        try {
            rc.units = parse_units(j["units"].get<std::string>());
        } catch (const std::invalid_argument& e) {
            cx.fail("units", e.what());
        }
    }
    if (units_override) {
        rc.units = *units_override;
    }

    // Physical rates. In mhz mode every rate (and gamma_a itself) is given in
    // MHz and divided by gamma_a here; internally gamma_a is then 1.
    const LambdaParams wp = working_point();
    const bool mhz = rc.units == Units::mhz;
    if (mhz) {
        if (j.contains("gamma_a")) {
            const auto& g = j["gamma_a"];
            if (!g.is_number()) {
                cx.fail("gamma_a", "in mhz units gamma_a sets the unit and "
                                   "cannot be swept");
            }
            rc.gamma_a_mhz = cx.number(g, "gamma_a");
            if (rc.gamma_a_mhz <= 0.0) {
                cx.fail("gamma_a", "must be positive");
            }
        }
    }
    const double scale = mhz ? rc.gamma_a_mhz : 1.0;
    for (Field f : all_fields) {
        const std::string key = to_string(f);
        std::vector<double> values;
        if (j.contains(key)) {
            values = axis_values(j[key], key, cx);
        } else {
            values = {field_of(wp, f) * scale};
        }
        check_axis(f, values, cx);
        for (double& v : values) {
            v /= scale;
        }
        rc.axes.push_back(Axis{f, std::move(values)});
    }
    std::size_t swept = 0;
    for (const auto& a : rc.axes) {
        if (a.swept() && ++swept > 2) {
            cx.fail(to_string(a.field), "at most 2 swept axes per run");
        }
    }

    if (j.contains("phi")) {
        const json& v = j["phi"];
        const json list = v.is_array() ? v : json::array({v});
        if (list.empty()) {
            cx.fail("phi", "phase list is empty");
        }
        for (const auto& x : list) {
            std::optional<double> phase;
            std::string label;
            if (x.is_number()) {
                phase = cx.number(x, "phi");
                label = fmt::format("{}", *phase);
            } else if (x.is_string()) {
                label = x.get<std::string>();
                phase = parse_phase(label);
            }
            if (!phase) {
                cx.fail("phi", "expected a number or a phase like \"pi/2\"");
            }
            rc.phi.emplace_back(*phase);
            rc.phi_labels.push_back(label);
        }
    } else {
        rc.phi = {QuadraturePhase(0.0)};
        rc.phi_labels = {"0"};
    }

    if (j.contains("tau")) {
        const json& t = j["tau"];
        const double to_scaled = mhz ? rc.gamma_a_mhz : 1.0;
        if (t.is_number()) {
            rc.tau.max = cx.number(t, "tau") * to_scaled;
        } else if (t.is_object()) {
            for (const auto& [k, v] : t.items()) {
                if (k == "step") {
                    rc.tau.step = cx.number(v, "tau/step") * to_scaled;
                } else if (k == "max") {
                    if (!(v.is_string() && v.get<std::string>() == "auto")) {
                        rc.tau.max = cx.number(v, "tau/max") * to_scaled;
                    }
                } else {
                    cx.fail("tau/" + k, "unknown key in tau grid");
                }
            }
        } else {
            cx.fail("tau", "expected a number or {step, max}");
        }
        if (!(rc.tau.step > 0.0)) {
            cx.fail("tau", "step must be positive");
        }
        if (rc.tau.max && !(*rc.tau.max > 0.0)) {
            cx.fail("tau", "max must be positive");
        }
    }

    if (j.contains("omega")) {
        const json& o = j["omega"];
        if (!o.is_object()) {
            cx.fail("omega", "expected {from, to, points}");
        }
        const auto values = axis_values(o, "omega", cx);
        rc.omega = FrequencyGrid{values.front() / scale, values.back() / scale,
                                 values.size()};
    }

    if (j.contains("eta")) {
        rc.eta = cx.number(j["eta"], "eta");
        if (rc.eta < 0.0 || rc.eta > 1.0) {
            cx.fail("eta", "efficiency must lie in [0, 1]");
        }
    }

    if (j.contains("kinds")) {
        const json& k = j["kinds"];
        const json list = k.is_array() ? k : json::array({k});
        if (list.empty()) {
            cx.fail("kinds", "kind list is empty");
        }
        rc.kinds.clear();
        for (const auto& x : list) {
            if (!x.is_string()) {
                cx.fail("kinds", "expected spectrum kind names");
            }
            rc.kinds.push_back(parse_kind(x.get<std::string>(), cx));
        }
    }

    if (j.contains("split")) {
        if (!j["split"].is_boolean()) {
            cx.fail("split", "expected true or false");
        }
        rc.split = j["split"].get<bool>();
    }
    return rc;
}

RunConfig load_run_config(const std::filesystem::path& path,
                          const std::string& command,
                          std::optional<Units> units_override)
{
    const std::string source = path.string();
    const std::string text = read_file(path);
    const json j = parse_json_text(text, source);
    const KeyLines lines(text);
    if (j.is_object() && j.contains("runs")) {
        throw config_error(source, "runs", lines.find("/runs"),
                           "multi-run presets are only read by 'reproduce'");
    }
    return parse_run_config(j, command, source, lines, "", units_override);
}

RunConfig default_run_config(const std::string& command,
                             std::optional<Units> units_override)
{
    const KeyLines none{""};
    return parse_run_config(json::object(), command, "<defaults>", none, "",
                            units_override);
}

} // namespace lcpt::cli
