// qdrtd: 1-D quantum-heterostructure transport simulator CLI.
// Every artifact is CSV first; SVG plots are an optional view of the same data.
// Exit codes: 0 ok, 2 config error, 3 convergence error, 4 I/O error.
#include "CLI11.hpp"

#include "qdrtd/dynamics.hpp"
#include "qdrtd/electrostatics.hpp"
#include "qdrtd/errors.hpp"
#include "qdrtd/io.hpp"
#include "qdrtd/quantum.hpp"
#include "qdrtd/stack_config.hpp"
#include "qdrtd/structure.hpp"
#include "qdrtd/transport.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace qdrtd;

namespace {

struct Settings {
    std::string stack_source = "reference";
    std::string output_dir;
    std::uint64_t seed = 0;
    bool plot = false;
    std::vector<std::string> overrides;
    TransportOptions transport;
};

// dotted-key overrides for every numeric default; unknown keys are rejected
void apply_overrides(Settings& s) {
    std::map<std::string, std::function<void(double)>> keys;
    auto& t = s.transport;
    keys["scf.tolerance_eV"] = [&](double v) { t.scf.tolerance_eV = v; };
    keys["scf.mixing"] = [&](double v) { t.scf.mixing = v; };
    keys["scf.adaptive_mixing"] = [&](double v) { t.scf.adaptive_mixing = v != 0.0; };
    keys["scf.max_iterations"] = [&](double v) { t.scf.max_iterations = static_cast<int>(v); };
    keys["scf.grid_spacing_nm"] = [&](double v) { t.scf.grid_spacing_nm = v; };
    keys["scf.max_step_V"] = [&](double v) { t.scf.max_step_V = v; };
    keys["quantum.grid_nm"] = keys["scf.grid_spacing_nm"];
    keys["refine.enabled"] = [&](double v) { t.refine.enabled = v != 0.0; };
    keys["refine.delta_t_threshold"] = [&](double v) { t.refine.delta_t_threshold = v; };
    keys["refine.max_depth"] = [&](double v) { t.refine.max_depth = static_cast<int>(v); };
    keys["refine.min_points_per_fwhm"] = [&](double v) {
        t.refine.min_points_per_fwhm = static_cast<int>(v);
    };
    keys["refine.resonance_floor"] = [&](double v) { t.refine.resonance_floor = v; };
    keys["transport.energy_step_eV"] = [&](double v) { t.energy_step_eV = v; };
    keys["transport.supply_cutoff"] = [&](double v) { t.supply_cutoff = v; };
    keys["transport.current_floor_A"] = [&](double v) { t.current_floor_A = v; };
    keys["transport.inas_well_depth_eV"] = [&](double v) { t.inas_well_depth_eV = v; };
    keys["transport.qd_barrier_delta_eV"] = [&](double v) { t.qd_barrier_delta_eV = v; };
    keys["transport.per_path_scf"] = [&](double v) { t.per_path_scf = v != 0.0; };
    keys["transport.supply_blocking"] = [&](double v) { t.supply_blocking = v != 0.0; };
    keys["transport.fast_potential"] = [&](double v) { t.fast_potential = v != 0.0; };
    keys["transport.qd_well_at_sheet"] = [&](double v) {
        t.qd_well_placement = v != 0.0 ? QDWellPlacement::at_sheet
                                       : QDWellPlacement::in_barrier_well;
    };
    keys["dynamics.tau_tunnel_s"] = [&](double v) { t.rates.tau_tunnel_s = v; };
    keys["dynamics.tau_recomb_s"] = [&](double v) { t.rates.tau_recomb_s = v; };
    keys["dynamics.capture_efficiency"] = [&](double v) { t.rates.capture_efficiency = v; };
    keys["dynamics.absorption_efficiency"] = [&](double v) { t.rates.absorption_efficiency = v; };
    keys["dynamics.charge_rate_per_V_s"] = [&](double v) { t.rates.charge_rate_per_V_s = v; };
    keys["dynamics.background_discharge_s"] = [&](double v) {
        t.rates.background_discharge_s = v;
    };

    for (const std::string& kv : s.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw config_error("override '" + kv + "' is not of the form key=value");
        const std::string key = kv.substr(0, eq);
        const auto it = keys.find(key);
        if (it == keys.end()) throw config_error("unknown override key '" + key + "'");
        std::size_t used = 0;
        double value = 0.0;
        try {
            value = std::stod(kv.substr(eq + 1), &used);
        } catch (const std::exception&) {
            throw config_error("override '" + kv + "': value is not a number");
        }
        if (used != kv.size() - eq - 1)
            throw config_error("override '" + kv + "': value is not a number");
        it->second(value);
    }
}

// artifacts land as <name>.partial and are renamed on success, so anything
// still carrying the suffix after a failed run is visibly incomplete
class ArtifactSink {
public:
    ArtifactSink(std::string dir, bool plot) : dir_(std::move(dir)), plot_(plot) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) throw io_error("cannot create output directory '" + dir_ + "'");
    }

    void write(const std::string& name, const std::string& content) {
        const std::string p = (fs::path(dir_) / (name + ".partial")).string();
        io::write_file(p, content);
        pending_.push_back(name);
    }

    void plot_xy(const std::string& name, const std::vector<double>& x,
                 const std::vector<double>& y, const std::string& xl, const std::string& yl,
                 const std::string& title) {
        if (plot_) write(name, io::svg_plot(x, y, xl, yl, title));
    }

    void finalize() {
        for (const std::string& name : pending_) {
            const fs::path from = fs::path(dir_) / (name + ".partial");
            const fs::path to = fs::path(dir_) / name;
            std::error_code ec;
            fs::rename(from, to, ec);
            if (ec) throw io_error("cannot finalize '" + to.string() + "'");
            std::cout << "wrote " << to.string() << "\n";
        }
        pending_.clear();
    }

private:
    std::string dir_;
    bool plot_;
    std::vector<std::string> pending_;
};

std::pair<double, double> parse_range(const std::string& text) {
    const auto c = text.find(':');
    if (c == std::string::npos)
        throw config_error("range '" + text + "' must be start:end (e.g. 0:-4)");
    try {
        return {std::stod(text.substr(0, c)), std::stod(text.substr(c + 1))};
    } catch (const std::exception&) {
        throw config_error("range '" + text + "': endpoints are not numbers");
    }
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw config_error("list '" + text + "': '" + item + "' is not a number");
        }
    }
    if (out.empty()) throw config_error("list '" + text + "' is empty");
    return out;
}

SweepProtocol make_protocol(const Settings& s, double former, double hold,
                            const std::string& range, double step, double dwell, double rate) {
    SweepProtocol p;
    p.former_bias_V = former;
    p.hold_duration_s = hold;
    std::tie(p.sweep_start_V, p.sweep_end_V) = parse_range(range);
    p.step_V = p.sweep_end_V < p.sweep_start_V ? -std::abs(step) : std::abs(step);
    p.dwell_s_per_step = dwell;
    p.photon_rate_per_s_um2 = rate;
    p.seed = s.seed;
    p.validate();
    return p;
}

void write_iv(ArtifactSink& sink, const std::string& name, const IVCurve& curve) {
    sink.write(name, io::csv_iv(curve));
    std::vector<double> x, y;
    for (const auto& p : curve.points) {
        x.push_back(p.bias_V);
        y.push_back(p.current_A);
    }
    sink.plot_xy(name.substr(0, name.size() - 4) + ".svg", x, y, "bias_V", "current_A", name);
}

IVCurve read_iv_csv(const std::string& path) {
    std::stringstream ss(io::read_file(path));
    IVCurve curve;
    std::string line;
    bool header_seen = false;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            if (line != "bias_V,current_A,qd_occupancy,path_rtd_A,path_qd_A")
                throw config_error(path + ": line " + std::to_string(lineno) +
                                   ": unexpected IV header '" + line + "'");
            header_seen = true;
            continue;
        }
        IVPoint p;
        std::stringstream ls(line);
        std::string cell;
        double* fields[5] = {&p.bias_V, &p.current_A, &p.qd_occupancy, &p.path_rtd_A,
                             &p.path_qd_A};
        for (double* f : fields) {
            if (!std::getline(ls, cell, ','))
                throw config_error(path + ": line " + std::to_string(lineno) + ": short row");
            *f = std::stod(cell);
        }
        curve.points.push_back(p);
    }
    if (!header_seen) throw config_error(path + ": not an IV CSV");
    return curve;
}

std::string number_tag(double v) {
    std::string s = io::format_number(v);
    for (char& c : s)
        if (c == '.') c = 'p';
    return s;
}

int run(int argc, char** argv) {
    CLI::App app{"qdrtd: self-consistent 1-D transport through a dot-decorated"
                 " AlAs/GaAs double-barrier diode"};
    app.require_subcommand(1);
    app.fallthrough();  // global options may follow the subcommand name

    Settings s;
    const char* env_dir = std::getenv("QDRTD_OUTPUT_DIR");
    s.output_dir = env_dir ? env_dir : ".";
    app.add_option("--stack", s.stack_source,
                   "stack config file, or 'reference' for the built-in device")
        ->capture_default_str();
    app.add_option("-o,--out", s.output_dir,
                   "output directory (default: $QDRTD_OUTPUT_DIR or '.')");
    app.add_option("--seed", s.seed, "seed for every random stream")->capture_default_str();
    app.add_flag("--plot", s.plot, "also emit SVG plots next to the CSVs");
    app.add_option("--set", s.overrides,
                   "dotted-key default override, repeatable (e.g. --set quantum.grid_nm=0.25);"
                   " unknown keys are rejected");

    // ---- materials ----
    auto* cmd_mat = app.add_subcommand(
        "materials", "dump the material table to materials.csv\n"
                     "  schema: name,T,cb_offset_eV,m_eff,eps_rel,band_gap_eV");
    double mat_T = 77.0;
    bool mat_dump = false;
    cmd_mat->add_option("--temperature", mat_T, "evaluation temperature [K]")
        ->capture_default_str();
    cmd_mat->add_flag("--dump", mat_dump, "write the table (default action)");

    // ---- band-diagram ----
    auto* cmd_bd = app.add_subcommand(
        "band-diagram", "self-consistent band diagram(s) at one bias\n"
                        "  schema: position_nm,Ec_eV,electron_density_cm3");
    double bd_bias = 0.0, bd_occ = -1.0;
    bool bd_with = false, bd_without = false;
    cmd_bd->add_option("--bias", bd_bias, "applied bias [V]")->capture_default_str();
    cmd_bd->add_option("--occupancy", bd_occ, "electrons per dot for the with-dots case"
                                              " (default: the stack's per-dot maximum)");
    cmd_bd->add_flag("--with-dots", bd_with, "emit band_diagram_with_dots.csv");
    cmd_bd->add_flag("--without-dots", bd_without, "emit band_diagram_without_dots.csv");

    // ---- transmission ----
    auto* cmd_tr = app.add_subcommand(
        "transmission", "transmission spectrum through the self-consistent profile\n"
                        "  schema: energy_eV,T (resonances as # comment lines)");
    double tr_bias = 0.0, tr_occ = 0.0, tr_emin = 0.0, tr_emax = 0.0;
    bool tr_auto = true;
    cmd_tr->add_option("--bias", tr_bias, "applied bias [V]")->capture_default_str();
    cmd_tr->add_option("--occupancy", tr_occ, "stored electrons per dot")->capture_default_str();
    auto* opt_emin = cmd_tr->add_option("--emin", tr_emin, "energy window start [eV]");
    auto* opt_emax = cmd_tr->add_option("--emax", tr_emax, "energy window end [eV]");
    (void)opt_emin;
    cmd_tr->callback([&] { tr_auto = opt_emax->count() == 0; });

    // ---- iv / memory-sweep / photoresponse share the protocol options ----
    double sw_former = 0.0, sw_hold = 2.0, sw_step = 0.05, sw_dwell = 0.1, sw_rate = 0.0;
    std::string sw_range = "0:-4", sw_formers = "0", sw_rates = "0";
    auto add_sweep_opts = [&](CLI::App* c, bool single_former, bool single_rate) {
        if (single_former)
            c->add_option("--former-bias", sw_former, "bias held before the sweep [V]")
                ->capture_default_str();
        c->add_option("--hold", sw_hold, "pre-sweep hold duration [s]")->capture_default_str();
        c->add_option("--range", sw_range, "sweep as start:end [V]")->capture_default_str();
        c->add_option("--step", sw_step, "bias step magnitude [V]")->capture_default_str();
        c->add_option("--dwell", sw_dwell, "time per bias point [s]")->capture_default_str();
        if (single_rate)
            c->add_option("--rate", sw_rate, "photon rate [s^-1 um^-2]")->capture_default_str();
    };

    auto* cmd_iv = app.add_subcommand(
        "iv", "one I-V sweep with dot-charge dynamics -> iv.csv\n"
              "  schema: bias_V,current_A,qd_occupancy,path_rtd_A,path_qd_A");
    add_sweep_opts(cmd_iv, true, true);

    auto* cmd_mem = app.add_subcommand(
        "memory-sweep", "dark sweeps after several former biases -> memory_fb_<V>.csv each\n"
                        "  schema: bias_V,current_A,qd_occupancy,path_rtd_A,path_qd_A;\n"
                        "  manifest memory_manifest.csv: former_bias_V,filename");
    add_sweep_opts(cmd_mem, false, false);
    cmd_mem->add_option("--former-bias", sw_formers, "comma list of former biases [V]")
        ->capture_default_str();

    auto* cmd_ph = app.add_subcommand(
        "photoresponse", "one sweep per photon rate -> photoresponse_rate_<R>.csv each\n"
                         "  schema: bias_V,current_A,qd_occupancy,path_rtd_A,path_qd_A;\n"
                         "  manifest photoresponse_manifest.csv: rate_per_s_um2,filename");
    add_sweep_opts(cmd_ph, true, false);
    cmd_ph->add_option("--rates", sw_rates, "comma list of photon rates [s^-1 um^-2]")
        ->capture_default_str();

    // ---- peaks ----
    auto* cmd_pk = app.add_subcommand("peaks", "label peaks of an exported IV CSV -> peaks.csv\n"
                                               "  schema: label,bias_V,current_A");
    std::string pk_input;
    double pk_floor = 1e-3;
    cmd_pk->add_option("--input", pk_input, "IV CSV to analyze")->required();
    cmd_pk->add_option("--prominence", pk_floor, "relative prominence floor")
        ->capture_default_str();

    // ---- multiplication ----
    auto* cmd_mu = app.add_subcommand(
        "multiplication", "carrier-multiplication report -> multiplication.txt\n"
                          "  key-value lines: photocurrent_A, photon_rate_per_s, efficiency,"
                          " M_external, M_internal");
    double mu_i = 0.0, mu_r = 0.0, mu_eta = 0.02;
    cmd_mu->add_option("--photocurrent", mu_i, "photo-induced current step [A]")->required();
    cmd_mu->add_option("--rate", mu_r, "incident photon rate [s^-1]")->required();
    cmd_mu->add_option("--efficiency", mu_eta, "useful absorption efficiency")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);  // prints the message / help text
        return code == 0 ? 0 : 2;
    }
    apply_overrides(s);
    ArtifactSink sink(s.output_dir, s.plot);

    if (cmd_mat->parsed()) {
        sink.write("materials.csv", io::csv_materials(mat_T));
    } else if (cmd_mu->parsed()) {
        sink.write("multiplication.txt",
                   io::report_multiplication(multiplication_factor(mu_i, mu_r, mu_eta)));
    } else if (cmd_pk->parsed()) {
        sink.write("peaks.csv", io::csv_peaks(detect_peaks(read_iv_csv(pk_input), pk_floor)));
    } else {
        const DeviceStack stack = load_stack(s.stack_source);

        if (cmd_bd->parsed()) {
            if (!bd_with && !bd_without) bd_with = bd_without = true;
            const double occ = bd_occ < 0.0 ? stack.qd_sheet.electrons_per_dot_max : bd_occ;
            auto emit = [&](const std::string& name, double occupancy) {
                const BandDiagram d =
                    self_consistent_band_diagram(stack, bd_bias, occupancy, s.transport.scf);
                sink.write(name, io::csv_band_diagram(d));
                sink.plot_xy(name.substr(0, name.size() - 4) + ".svg",
                             d.profile.positions_nm, d.profile.potential_eV, "position_nm",
                             "Ec_eV", name);
            };
            if (bd_with) emit("band_diagram_with_dots.csv", occ);
            if (bd_without) emit("band_diagram_without_dots.csv", 0.0);
        } else if (cmd_tr->parsed()) {
            const BandDiagram d =
                self_consistent_band_diagram(stack, tr_bias, tr_occ, s.transport.scf);
            double e0 = tr_emin, e1 = tr_emax;
            if (tr_auto) {
                e0 = std::max(d.profile.potential_eV.front(), d.profile.potential_eV.back());
                e1 = e0 + 0.4;
            }
            if (!(e1 > e0)) throw config_error("transmission: emax must exceed emin");
            std::vector<double> grid;
            const int n = std::max(2, static_cast<int>((e1 - e0) / s.transport.energy_step_eV));
            for (int i = 0; i <= n; ++i) grid.push_back(e0 + (e1 - e0) * i / n);
            const TransmissionSpectrum spec =
                transmission(d.profile, grid, s.transport.refine);
            sink.write("transmission.csv", io::csv_spectrum(spec));
            sink.plot_xy("transmission.svg", spec.energies_eV, spec.transmission, "energy_eV",
                         "T", "transmission");
        } else if (cmd_iv->parsed()) {
            const SweepProtocol p =
                make_protocol(s, sw_former, sw_hold, sw_range, sw_step, sw_dwell, sw_rate);
            write_iv(sink, "iv.csv", iv_sweep(stack, p, s.transport));
        } else if (cmd_mem->parsed()) {
            std::string manifest = "former_bias_V,filename\n";
            for (double fb : parse_list(sw_formers)) {
                const SweepProtocol p =
                    make_protocol(s, fb, sw_hold, sw_range, sw_step, sw_dwell, 0.0);
                const std::string name = "memory_fb_" + number_tag(fb) + ".csv";
                write_iv(sink, name, iv_sweep(stack, p, s.transport));
                manifest += io::format_number(fb) + "," + name + "\n";
            }
            sink.write("memory_manifest.csv", manifest);
        } else if (cmd_ph->parsed()) {
            const SweepProtocol base =
                make_protocol(s, sw_former, sw_hold, sw_range, sw_step, sw_dwell, 0.0);
            const std::vector<double> rates = parse_list(sw_rates);
            const auto family = photoresponse_sweep(stack, base, rates, s.transport);
            std::string manifest = "rate_per_s_um2,filename\n";
            for (std::size_t i = 0; i < family.size(); ++i) {
                const std::string name = "photoresponse_rate_" + number_tag(rates[i]) + ".csv";
                write_iv(sink, name, family[i]);
                manifest += io::format_number(rates[i]) + "," + name + "\n";
            }
            sink.write("photoresponse_manifest.csv", manifest);
        }
    }

    sink.finalize();
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const convergence_error& e) {
        std::cerr << "error: convergence: " << e.what() << "\n";
        return 3;
    } catch (const io_error& e) {
        std::cerr << "error: io: " << e.what() << "\n";
        return 4;
    } catch (const config_error& e) {
        std::cerr << "error: config: " << e.what() << "\n";
        return 2;
    } catch (const coverage_error& e) {
        std::cerr << "error: config: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
