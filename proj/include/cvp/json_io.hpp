#pragma once

#include "cvp/continuum.hpp"
#include "cvp/noether.hpp"
#include "cvp/optimize.hpp"

#include <json.hpp>

#include <string>

namespace cvp::io {

using nlohmann::json;

// Thrown on malformed input files; the CLI maps it to exit code 2.
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---- system files ----------------------------------------------------------
// {"mode":"cfs","n":..,"f":..,"points":[{"psi":[[re,im],..]},..],
//  "weights":[..],"total_volume":..}
// {"mode":"compact","kernel_matrix":[[..],..],"weights":[..],
//  "total_volume":..,"probe_points":[..]}
// psi is row-major over the 2n x f entries; decimal round-trip keeps >= 15
// significant digits (nlohmann emits shortest-exact doubles).

struct SystemFile {
    bool compact = false;
    CfsMeasure cfs;
    int spin_dim = 0;
    CompactSystem compact_system;
    double kappa = 0.0; // optional "kappa" field

    CfsSystem cfs_system() const {
        return CfsSystem{cfs, kappa};
    }
};

SystemFile parse_system(const json &j);
json system_to_json(const SystemFile &s);
SystemFile load_system(const std::string &path);
void save_system(const std::string &path, const SystemFile &s);

// ---- variations -------------------------------------------------------------
// {"kind":"unitary","tau_max":..,"generator":[[re,im],..]}               (f x f)
// {"kind":"point_flow","tau_max":..,"flow_on_measure":..,
//  "paths":[{"tau":[..],"psi":[[[re,im],..],..]} or {"tau":[..],"point":[..]}]}
// {"kind":"composite","tau_max":..,"parts":[..]}
// CFS point-flow tables interpolate with a Catmull-Rom cubic in tau; compact
// tables hold the nearest sampled permutation.

CfsVariation parse_cfs_variation(const json &j, int spin_dim);
CompactVariation parse_compact_variation(const json &j);

Region parse_region(const json &j);
Region load_region(const std::string &path);

struct KillingFile {
    KillingVariation variation;
};
KillingFile parse_killing(const json &j, int spin_dim);

// ---- continuum models ---------------------------------------------------------
// {"type":"piecewise_linear"|"smooth"|"sampled", "masses":[..],"weights":[..],
//  "shell_value":..,"slopes":[{"a_above":..,..}],"a0":..,"a_share":..,
//  "curvature":..,"q2_max":..,"cone_margin":..,
//  "curve":{"q2":[..],"a":[..],"b":[..]}}

QhatModel parse_model(const json &j);
json model_to_json(const QhatModel &m, int curve_samples = 101);
QhatModel load_model(const std::string &path);

// {"generation":..,"polarization":..,"radial_nodes":..,
//  "profile":{"type":"gaussian","width":..,"amplitude":..}}
WavePacket parse_packet(const json &j);
WavePacket load_packet(const std::string &path);

OptimizerConfig parse_optimizer_config(const json &j);
ActionParams parse_action_params(const json &j);

// ---- report fragments ---------------------------------------------------------

json to_json(const ElReport &r);
json to_json(const ConservationVerdict &v);
json to_json(const IdentityCheck &c);
json to_json(const VolumeReduction &v);
json to_json(const StabilityReport &r);
json to_json(const ConsistencyReport &r);
json to_json(const DualValue &v);
json to_json(const LayerLemmaResult &r);

json load_file(const std::string &path);
void write_file(const std::string &path, const json &j);

} // namespace cvp::io
