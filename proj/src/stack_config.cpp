#include "qdrtd/stack_config.hpp"
#include "qdrtd/errors.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

namespace qdrtd {

namespace {

std::string fmt(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw io_error("number formatting failed");
    return std::string(buf, p);
}

double parse_number(const std::string& tok, int line_no, const char* what) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || p != tok.data() + tok.size())
        throw config_error("line " + std::to_string(line_no) + ": bad " + what + " '" + tok + "'");
    return v;
}

std::vector<std::string> tokens_of(const std::string& line) {
    std::vector<std::string> toks;
    std::istringstream ss(line.substr(0, line.find('#')));
    for (std::string t; ss >> t;) toks.push_back(t);
    return toks;
}

} // namespace

DeviceStack parse_stack_config(const std::string& text) {
    DeviceStack stack;
    stack.area_um2 = 1.0;
    bool saw_qd = false;
    int qd_after_index = -1;

    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto toks = tokens_of(line);
        if (toks.empty()) continue;

        if (toks[0][0] == '@') {
            if (toks[0] == "@area_um2" && toks.size() == 2) {
                stack.area_um2 = parse_number(toks[1], line_no, "area");
                if (stack.area_um2 <= 0.0)
                    throw config_error("line " + std::to_string(line_no) + ": area must be > 0");
            } else if (toks[0] == "@temperature_K" && toks.size() == 2) {
                stack.temperature_K = parse_number(toks[1], line_no, "temperature");
            } else if (toks[0] == "@qd" && toks.size() == 6) {
                saw_qd = true;
                stack.qd_sheet.areal_density_cm2 = parse_number(toks[1], line_no, "qd density");
                qd_after_index =
                    static_cast<int>(parse_number(toks[2], line_no, "qd layer index"));
                stack.qd_sheet.electrons_per_dot_max =
                    parse_number(toks[3], line_no, "qd electrons_max");
                stack.qd_sheet.well_thickness_nm = parse_number(toks[4], line_no, "qd well_nm");
                stack.qd_sheet.area_fraction = parse_number(toks[5], line_no, "qd area_fraction");
                if (stack.qd_sheet.areal_density_cm2 <= 0.0 ||
                    stack.qd_sheet.area_fraction < 0.0 || stack.qd_sheet.area_fraction > 1.0)
                    throw config_error("line " + std::to_string(line_no) +
                                       ": qd density must be > 0 and area_fraction in [0,1]");
            } else {
                throw config_error("line " + std::to_string(line_no) + ": unknown directive '" +
                                   toks[0] + "' or wrong argument count");
            }
            continue;
        }

        if (toks.size() < 3 || toks.size() > 4)
            throw config_error("line " + std::to_string(line_no) +
                               ": expected 'material thickness doping[:doping] [role]'");
        Layer layer;
        layer.material = toks[0];
        layer.thickness_nm = parse_number(toks[1], line_no, "thickness");
        if (layer.thickness_nm <= 0.0)
            throw config_error("line " + std::to_string(line_no) + ": negative thickness " +
                               toks[1]);
        const auto colon = toks[2].find(':');
        if (colon == std::string::npos) {
            layer.doping_start_cm3 = layer.doping_end_cm3 =
                parse_number(toks[2], line_no, "doping");
        } else {
            layer.doping_start_cm3 = parse_number(toks[2].substr(0, colon), line_no, "doping");
            layer.doping_end_cm3 = parse_number(toks[2].substr(colon + 1), line_no, "doping");
        }
        if (layer.doping_start_cm3 < 0.0 || layer.doping_end_cm3 < 0.0)
            throw config_error("line " + std::to_string(line_no) + ": negative doping");
        if (toks.size() == 4) layer.role_tag = toks[3];
        stack.layers.push_back(layer);
    }

    if (stack.layers.empty()) throw config_error("stack config defines no layers");
    if (saw_qd) {
        if (qd_after_index < 0 || qd_after_index + 1 >= static_cast<int>(stack.layers.size()))
            throw config_error("@qd layer index " + std::to_string(qd_after_index) +
                               " out of range for " + std::to_string(stack.layers.size()) +
                               " layers");
        stack.qd_sheet.position_layer_index = qd_after_index + 1;
    } else {
        stack.qd_sheet = QDSheet{};  // density 0 = no dots
        stack.qd_sheet.areal_density_cm2 = 0.0;
    }
    return stack;
}

std::string write_stack_config(const DeviceStack& stack) {
    std::ostringstream out;
    out << "@area_um2 " << fmt(stack.area_um2) << "\n";
    out << "@temperature_K " << fmt(stack.temperature_K) << "\n";
    if (stack.qd_sheet.areal_density_cm2 > 0.0) {
        out << "@qd " << fmt(stack.qd_sheet.areal_density_cm2) << " "
            << stack.qd_sheet.position_layer_index - 1 << " "
            << fmt(stack.qd_sheet.electrons_per_dot_max) << " "
            << fmt(stack.qd_sheet.well_thickness_nm) << " "
            << fmt(stack.qd_sheet.area_fraction) << "\n";
    }
    for (const auto& l : stack.layers) {
        out << l.material << " " << fmt(l.thickness_nm) << " " << fmt(l.doping_start_cm3);
        if (l.doping_end_cm3 != l.doping_start_cm3) out << ":" << fmt(l.doping_end_cm3);
        if (!l.role_tag.empty()) out << " " << l.role_tag;
        out << "\n";
    }
    return out.str();
}

DeviceStack load_stack(const std::string& path_or_builtin) {
    if (path_or_builtin == "reference") return build_reference_stack();
    std::ifstream f(path_or_builtin);
    if (!f) throw io_error("cannot open stack config '" + path_or_builtin + "'");
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse_stack_config(buf.str());
}

} // namespace qdrtd
