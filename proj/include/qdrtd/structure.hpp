#ifndef QDRTD_STRUCTURE_HPP
#define QDRTD_STRUCTURE_HPP

#include "qdrtd/materials.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qdrtd {

struct Layer {
    std::string material;
    double thickness_nm = 0.0;
    double doping_start_cm3 = 0.0;  // donors at layer top
    double doping_end_cm3 = 0.0;    // donors at layer bottom (linear grading)
    std::string role_tag;           // contact/absorber/barrier/well/spacer/buffer/...
};

/// Sheet of InAs dots at a layer interface. position_layer_index is the layer
/// the sheet caps: the sheet sits at the top boundary of layers[position_layer_index].
struct QDSheet {
    double areal_density_cm2 = 0.0;
    int position_layer_index = 0;
    double electrons_per_dot_max = 6.0;
    double well_thickness_nm = 2.0;   // equivalent InAs quantum well
    double area_fraction = 0.0;       // fraction of device area conducting through dots
};

struct DeviceStack {
    std::vector<Layer> layers;  // top (emitter under reverse bias) first
    QDSheet qd_sheet;
    double area_um2 = 0.0;
    double temperature_K = 300.0;

    double total_thickness_nm() const;
    /// distance from the top surface to the top of layers[i]
    double layer_start_nm(int i) const;
    /// position of the QD sheet below the top surface
    double qd_position_nm() const;
};

struct Grid {
    std::vector<double> node_positions_nm;     // strictly increasing
    std::vector<MaterialParams> node_material; // material of the interval right of the node
    std::vector<double> node_doping_cm3;
    long qd_node_index = -1;                   // -1 if the sheet is outside the window
    double temperature_K = 300.0;

    std::size_t size() const { return node_positions_nm.size(); }
};

/// The heterostructure grown for the measured device: 12 layers, 11 ML AlAs
/// barriers around an 8 nm GaAs well, QD sheet between absorber and cap,
/// 5 um^2 active area at 77 K.
DeviceStack build_reference_stack();

/// n_ml * a/2 for zinc-blende material; throws config_error for unknown material.
double monolayers_to_nm(double n_ml, const std::string& material);

/// Discretize [window] of the stack with spacing <= max_spacing_nm. Every layer
/// interface inside the window is a node, as are the QD sheet plane and the
/// bottom edge of the equivalent InAs well. Default window runs from the top
/// contact through the bottom contact (etch stop/buffer/substrate excluded).
Grid discretize(const DeviceStack& stack, double max_spacing_nm,
                std::optional<std::pair<double, double>> window = std::nullopt);

/// Default simulation window: [0, bottom of the deepest contact layer].
std::pair<double, double> default_window(const DeviceStack& stack);

} // namespace qdrtd

#endif
