#pragma once

// JSON data model for run configurations and fit reports. All frequencies
// and rates are linear Hz on this side of the boundary; conversion to rad/s
// happens in the to_*/from_* helpers only. Documents hold plain values so
// that parse(serialize(doc)) == doc exactly.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "jpq/circle_fit.hpp"
#include "jpq/device_models.hpp"
#include "jpq/error.hpp"
#include "jpq/flux_fit.hpp"
#include "jpq/instrument_sim.hpp"
#include "jpq/squeezing.hpp"

namespace jpq {

using Json = nlohmann::json;

inline constexpr int schema_version = 1;
inline constexpr const char* tool_version = "1.0.0";

// ---------------------------------------------------------------------------
// Helpers

namespace json_detail {

/// Finite doubles as numbers, non-finite as the strings "inf", "-inf", "nan".
inline Json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

inline double get_num(const Json& j, const std::string& key) {
  if (!j.is_object() || !j.contains(key))
    throw Error(ErrorKind::parse, "json: missing required key '" + key + "'");
  const Json& v = j.at(key);
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw Error(ErrorKind::parse, "json: key '" + key + "' must be a number");
}

inline double get_num_or(const Json& j, const std::string& key, double fallback) {
  return j.contains(key) ? get_num(j, key) : fallback;
}

inline std::optional<double> get_opt_num(const Json& j, const std::string& key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return get_num(j, key);
}

inline const Json& get_obj(const Json& j, const std::string& key) {
  if (!j.is_object() || !j.contains(key) || !j.at(key).is_object())
    throw Error(ErrorKind::parse, "json: missing object '" + key + "'");
  return j.at(key);
}

inline std::string get_str(const Json& j, const std::string& key) {
  if (!j.is_object() || !j.contains(key) || !j.at(key).is_string())
    throw Error(ErrorKind::parse, "json: missing string '" + key + "'");
  return j.at(key).get<std::string>();
}

inline bool get_bool(const Json& j, const std::string& key) {
  if (!j.is_object() || !j.contains(key) || !j.at(key).is_boolean())
    throw Error(ErrorKind::parse, "json: missing boolean '" + key + "'");
  return j.at(key).get<bool>();
}

inline std::int64_t get_int(const Json& j, const std::string& key) {
  if (!j.is_object() || !j.contains(key) || !j.at(key).is_number_integer())
    throw Error(ErrorKind::parse, "json: key '" + key + "' must be an integer");
  return j.at(key).get<std::int64_t>();
}

inline Json num_array(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

inline std::vector<double> get_num_array(const Json& j, const std::string& key) {
  if (!j.is_object() || !j.contains(key) || !j.at(key).is_array())
    throw Error(ErrorKind::parse, "json: missing array '" + key + "'");
  std::vector<double> out;
  const Json& a = j.at(key);
  for (std::size_t i = 0; i < a.size(); ++i) {
    Json wrap = {{"v", a[i]}};
    out.push_back(get_num(wrap, "v"));
  }
  return out;
}

inline std::vector<std::string> get_str_array(const Json& j, const std::string& key) {
  if (!j.is_object() || !j.contains(key) || !j.at(key).is_array())
    throw Error(ErrorKind::parse, "json: missing array '" + key + "'");
  std::vector<std::string> out;
  for (const auto& v : j.at(key)) {
    if (!v.is_string()) throw Error(ErrorKind::parse, "json: array '" + key + "' must hold strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

/// Rejects keys outside `allowed`; typos in configs fail loudly.
inline void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorKind::parse, "json: '" + where + "' must be an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw Error(ErrorKind::parse, "json: unknown key '" + k + "' in " + where);
}

inline void check_schema(const Json& j) {
  if (!j.is_object() || !j.contains("schema_version"))
    throw Error(ErrorKind::parse, "json: missing schema_version");
  if (get_int(j, "schema_version") != schema_version)
    throw Error(ErrorKind::parse, "json: unsupported schema_version " + j.at("schema_version").dump() +
                                      " (supported: " + std::to_string(schema_version) + ")");
}

}  // namespace json_detail

// ---------------------------------------------------------------------------
// Parameter records (file side, Hz)

struct FluxCalDoc {
  double offset = 0.0;
  double period = 1.0;
  bool operator==(const FluxCalDoc&) const = default;
};

struct JpaParamsDoc {
  double omega_r_hz = 0.0;  // bare frequency, linear Hz despite the symbol
  double L_r_h = 0.0;
  double L_loop_h = 0.0;
  double I_c_a = 0.0;
  FluxCalDoc flux_cal;
  bool operator==(const JpaParamsDoc&) const = default;
};

struct JpcParamsDoc {
  double omega_r_A_hz = 0.0;
  double Z0_ohm = 50.0;
  double E_J_hz = 0.0;  // E_J / h
  double E_L_hz = 0.0;  // E_L / h
  FluxCalDoc flux_cal;
  bool operator==(const JpcParamsDoc&) const = default;
};

struct SqueezingParamsDoc {
  double f_jpa_hz = 0.0;
  double kappa_ext_hz = 0.0;
  double kappa_int_hz = 0.0;
  double chi2_hz = 0.0;
  double nJ_prefactor = 0.0;
  double delta_exp = 0.0;
  double T_att_k = 0.0;
  double T_mxc_k = 0.0;
  double pump_coupling = 0.0;
  bool operator==(const SqueezingParamsDoc&) const = default;
};

inline FluxCalibration to_model(const FluxCalDoc& d) { return {d.offset, d.period}; }
inline FluxCalDoc to_doc(const FluxCalibration& c) { return {c.control_offset, c.control_period}; }

inline JpaModelParams to_model(const JpaParamsDoc& d) {
  return {hz_to_angular(d.omega_r_hz), d.L_r_h, d.L_loop_h, d.I_c_a, to_model(d.flux_cal)};
}
inline JpaParamsDoc to_doc(const JpaModelParams& p) {
  return {angular_to_hz(p.omega_r), p.L_r, p.L_loop, p.I_c, to_doc(p.flux_cal)};
}
inline JpcModelParams to_model(const JpcParamsDoc& d) {
  return {hz_to_angular(d.omega_r_A_hz), d.Z0_ohm, d.E_J_hz * PhysConstants::h, d.E_L_hz * PhysConstants::h,
          to_model(d.flux_cal)};
}
inline JpcParamsDoc to_doc(const JpcModelParams& p) {
  return {angular_to_hz(p.omega_r_A), p.Z0, p.E_J / PhysConstants::h, p.E_L / PhysConstants::h, to_doc(p.flux_cal)};
}
inline SqueezingParams to_model(const SqueezingParamsDoc& d) {
  return {hz_to_angular(d.f_jpa_hz), hz_to_angular(d.kappa_ext_hz), hz_to_angular(d.kappa_int_hz),
          hz_to_angular(d.chi2_hz), d.nJ_prefactor, d.delta_exp, d.T_att_k, d.T_mxc_k, d.pump_coupling};
}
inline SqueezingParamsDoc to_doc(const SqueezingParams& p) {
  return {angular_to_hz(p.omega_jpa), angular_to_hz(p.kappa_ext), angular_to_hz(p.kappa_int),
          angular_to_hz(p.chi2), p.nJ_prefactor, p.delta_exp, p.T_att, p.T_mxc, p.pump_coupling};
}

inline Json to_json(const FluxCalDoc& d) { return {{"offset", json_detail::num(d.offset)}, {"period", json_detail::num(d.period)}}; }
inline FluxCalDoc flux_cal_from_json(const Json& j) {
  json_detail::check_keys(j, {"offset", "period"}, "flux_cal");
  return {json_detail::get_num(j, "offset"), json_detail::get_num(j, "period")};
}

inline Json to_json(const JpaParamsDoc& d) {
  using json_detail::num;
  return {{"omega_r_hz", num(d.omega_r_hz)}, {"L_r_h", num(d.L_r_h)}, {"L_loop_h", num(d.L_loop_h)},
          {"I_c_a", num(d.I_c_a)}, {"flux_cal", to_json(d.flux_cal)}};
}
inline JpaParamsDoc jpa_params_from_json(const Json& j) {
  using namespace json_detail;
  check_keys(j, {"omega_r_hz", "L_r_h", "L_loop_h", "I_c_a", "flux_cal"}, "jpa");
  return {get_num(j, "omega_r_hz"), get_num(j, "L_r_h"), get_num(j, "L_loop_h"), get_num(j, "I_c_a"),
          flux_cal_from_json(get_obj(j, "flux_cal"))};
}

inline Json to_json(const JpcParamsDoc& d) {
  using json_detail::num;
  return {{"omega_r_A_hz", num(d.omega_r_A_hz)}, {"Z0_ohm", num(d.Z0_ohm)}, {"E_J_hz", num(d.E_J_hz)},
          {"E_L_hz", num(d.E_L_hz)}, {"flux_cal", to_json(d.flux_cal)}};
}
inline JpcParamsDoc jpc_params_from_json(const Json& j) {
  using namespace json_detail;
  check_keys(j, {"omega_r_A_hz", "Z0_ohm", "E_J_hz", "E_L_hz", "flux_cal"}, "jpc");
  return {get_num(j, "omega_r_A_hz"), get_num_or(j, "Z0_ohm", 50.0), get_num(j, "E_J_hz"), get_num(j, "E_L_hz"),
          flux_cal_from_json(get_obj(j, "flux_cal"))};
}

inline Json to_json(const SqueezingParamsDoc& d) {
  using json_detail::num;
  return {{"f_jpa_hz", num(d.f_jpa_hz)},       {"kappa_ext_hz", num(d.kappa_ext_hz)},
          {"kappa_int_hz", num(d.kappa_int_hz)}, {"chi2_hz", num(d.chi2_hz)},
          {"nJ_prefactor", num(d.nJ_prefactor)}, {"delta_exp", num(d.delta_exp)},
          {"T_att_k", num(d.T_att_k)},           {"T_mxc_k", num(d.T_mxc_k)},
          {"pump_coupling", num(d.pump_coupling)}};
}
/// kappa_ext_hz may be omitted (it is then 0 and must be supplied elsewhere).
inline SqueezingParamsDoc squeezing_params_from_json(const Json& j) {
  using namespace json_detail;
  check_keys(j, {"f_jpa_hz", "kappa_ext_hz", "kappa_int_hz", "chi2_hz", "nJ_prefactor", "delta_exp", "T_att_k",
                 "T_mxc_k", "pump_coupling"},
             "params");
  return {get_num(j, "f_jpa_hz"),     get_num_or(j, "kappa_ext_hz", 0.0), get_num(j, "kappa_int_hz"),
          get_num(j, "chi2_hz"),      get_num(j, "nJ_prefactor"),         get_num(j, "delta_exp"),
          get_num(j, "T_att_k"),      get_num(j, "T_mxc_k"),              get_num(j, "pump_coupling")};
}

// ---------------------------------------------------------------------------
// Run configurations

struct SimulateS21Config {
  double f0_hz = 0.0;
  double q_ext = 0.0;
  double q_int = std::numeric_limits<double>::infinity();
  double span_hz = 0.0;  // 0 selects span_kappa * kappa
  double span_kappa = 20.0;
  std::size_t count = 1001;
  double concentration = 0.0;
  DistortionParams distortion;
  std::optional<double> probe_power_dbm;
  std::optional<double> flux_control;
  std::string label;
  std::optional<std::string> background_out;

  ResonatorParams resonator() const { return resonator_rates(q_ext, q_int, hz_to_angular(f0_hz)); }
  SweepGrid grid() const {
    const double span = span_hz > 0.0 ? span_hz : span_kappa * angular_to_hz(resonator().kappa());
    return {f0_hz, span, count, concentration};
  }
};

inline SimulateS21Config simulate_s21_config_from_json(const Json& j) {
  using namespace json_detail;
  check_schema(j);
  check_keys(j, {"schema_version", "resonator", "grid", "distortion", "meta", "background_out"}, "config");
  SimulateS21Config c;
  const Json& r = get_obj(j, "resonator");
  check_keys(r, {"f0_hz", "q_ext", "q_int"}, "resonator");
  c.f0_hz = get_num(r, "f0_hz");
  c.q_ext = get_num(r, "q_ext");
  c.q_int = get_num_or(r, "q_int", c.q_int);
  const Json& g = get_obj(j, "grid");
  check_keys(g, {"span_hz", "span_kappa", "count", "concentration"}, "grid");
  c.span_hz = get_num_or(g, "span_hz", 0.0);
  c.span_kappa = get_num_or(g, "span_kappa", c.span_kappa);
  if (g.contains("count")) {
    const auto n = get_int(g, "count");
    if (n < 3) throw Error(ErrorKind::invalid_argument, "config: grid.count must be at least 3");
    c.count = static_cast<std::size_t>(n);
  }
  c.concentration = get_num_or(g, "concentration", 0.0);
  if (j.contains("distortion")) {
    const Json& d = get_obj(j, "distortion");
    check_keys(d, {"amplitude", "phase_offset_rad", "delay_s", "tilt_rad", "fano_re", "fano_im", "noise_sigma"},
               "distortion");
    c.distortion.amplitude = get_num_or(d, "amplitude", 1.0);
    c.distortion.phase_offset = get_num_or(d, "phase_offset_rad", 0.0);
    c.distortion.delay = get_num_or(d, "delay_s", 0.0);
    c.distortion.tilt = get_num_or(d, "tilt_rad", 0.0);
    c.distortion.fano_offset = {get_num_or(d, "fano_re", 0.0), get_num_or(d, "fano_im", 0.0)};
    c.distortion.noise_sigma = get_num_or(d, "noise_sigma", 0.0);
  }
  if (j.contains("meta")) {
    const Json& m = get_obj(j, "meta");
    check_keys(m, {"probe_power_dbm", "flux_control", "label"}, "meta");
    c.probe_power_dbm = get_opt_num(m, "probe_power_dbm");
    c.flux_control = get_opt_num(m, "flux_control");
    if (m.contains("label")) c.label = get_str(m, "label");
  }
  if (j.contains("background_out")) {
    c.background_out = get_str(j, "background_out");
    if (c.background_out->empty()) throw Error(ErrorKind::invalid_argument, "config: background_out is empty");
  }
  return c;
}

enum class DeviceKind { jpa, jpc };

inline const char* to_string(DeviceKind d) { return d == DeviceKind::jpa ? "jpa" : "jpc"; }

inline DeviceKind device_from_string(const std::string& s) {
  if (s == "jpa") return DeviceKind::jpa;
  if (s == "jpc") return DeviceKind::jpc;
  throw Error(ErrorKind::invalid_argument, "unknown device '" + s + "' (expected jpa or jpc)");
}

/// Device parameters as used both by `simulate fluxmap` and as fit init.
struct DeviceParamsConfig {
  DeviceKind device = DeviceKind::jpa;
  JpaParamsDoc jpa;
  JpcParamsDoc jpc;
};

inline DeviceParamsConfig device_params_from_json(const Json& j) {
  using namespace json_detail;
  DeviceParamsConfig c;
  c.device = device_from_string(get_str(j, "device"));
  if (c.device == DeviceKind::jpa) c.jpa = jpa_params_from_json(get_obj(j, "jpa"));
  else c.jpc = jpc_params_from_json(get_obj(j, "jpc"));
  return c;
}

struct SimulateFluxConfig {
  DeviceParamsConfig device;
  double control_start = 0.0;
  double control_stop = 0.0;
  std::size_t count = 41;
  double noise_hz = 0.0;

  std::vector<double> controls() const {
    std::vector<double> c(count);
    for (std::size_t k = 0; k < count; ++k)
      c[k] = control_start + (control_stop - control_start) * static_cast<double>(k) / static_cast<double>(count - 1);
    return c;
  }
};

inline SimulateFluxConfig simulate_flux_config_from_json(const Json& j) {
  using namespace json_detail;
  check_schema(j);
  check_keys(j, {"schema_version", "device", "jpa", "jpc", "controls", "noise_hz"}, "config");
  SimulateFluxConfig c;
  c.device = device_params_from_json(j);
  const Json& s = get_obj(j, "controls");
  check_keys(s, {"start", "stop", "count"}, "controls");
  c.control_start = get_num(s, "start");
  c.control_stop = get_num(s, "stop");
  const auto n = get_int(s, "count");
  if (n < 2) throw Error(ErrorKind::invalid_argument, "config: controls.count must be at least 2");
  c.count = static_cast<std::size_t>(n);
  c.noise_hz = get_num_or(j, "noise_hz", 0.0);
  return c;
}

inline DeviceParamsConfig flux_init_from_json(const Json& j) {
  using namespace json_detail;
  check_schema(j);
  check_keys(j, {"schema_version", "device", "jpa", "jpc", "controls", "noise_hz"}, "init");
  return device_params_from_json(j);
}

struct SimulateSqueezingConfig {
  SqueezingParamsDoc params;
  double power_start_dbm = -75.0;
  double power_stop_dbm = -50.5;
  std::size_t count = 50;
  double sigma_S_db = 0.0;
  double sigma_mu = 0.0;

  std::vector<PowerDbm> powers() const {
    std::vector<PowerDbm> p(count);
    for (std::size_t k = 0; k < count; ++k)
      p[k].value = power_start_dbm + (power_stop_dbm - power_start_dbm) * static_cast<double>(k) /
                                         static_cast<double>(count - 1);
    return p;
  }
};

inline SimulateSqueezingConfig simulate_squeezing_config_from_json(const Json& j) {
  using namespace json_detail;
  check_schema(j);
  check_keys(j, {"schema_version", "params", "powers", "noise"}, "config");
  SimulateSqueezingConfig c;
  c.params = squeezing_params_from_json(get_obj(j, "params"));
  const Json& p = get_obj(j, "powers");
  check_keys(p, {"start_dbm", "stop_dbm", "count"}, "powers");
  c.power_start_dbm = get_num(p, "start_dbm");
  c.power_stop_dbm = get_num(p, "stop_dbm");
  const auto n = get_int(p, "count");
  if (n < 2) throw Error(ErrorKind::invalid_argument, "config: powers.count must be at least 2");
  c.count = static_cast<std::size_t>(n);
  if (j.contains("noise")) {
    const Json& z = get_obj(j, "noise");
    check_keys(z, {"squeezing_db", "purity"}, "noise");
    c.sigma_S_db = get_num_or(z, "squeezing_db", 0.0);
    c.sigma_mu = get_num_or(z, "purity", 0.0);
  }
  return c;
}

struct SqueezingInitConfig {
  SqueezingParamsDoc params;
  double purity_weight = 100.0;
};

inline SqueezingInitConfig squeezing_init_from_json(const Json& j) {
  using namespace json_detail;
  check_schema(j);
  check_keys(j, {"schema_version", "params", "powers", "noise", "purity_weight"}, "init");
  SqueezingInitConfig c;
  c.params = squeezing_params_from_json(get_obj(j, "params"));
  c.purity_weight = get_num_or(j, "purity_weight", 100.0);
  return c;
}

// ---------------------------------------------------------------------------
// Report payloads

struct FitSummaryDoc {
  std::vector<std::string> param_names;
  std::vector<double> params;
  std::optional<std::vector<double>> std_errors;
  double residual_rms = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string message;
  bool operator==(const FitSummaryDoc&) const = default;
};

inline FitSummaryDoc make_fit_summary(const FitResult& r, std::vector<std::string> names) {
  FitSummaryDoc d;
  d.param_names = std::move(names);
  d.params.assign(r.params.data(), r.params.data() + r.params.size());
  if (r.covariance) {
    std::vector<double> se;
    for (Eigen::Index i = 0; i < r.covariance->rows(); ++i) se.push_back(std::sqrt(std::max(0.0, (*r.covariance)(i, i))));
    d.std_errors = se;
  }
  d.residual_rms = r.residual_rms;
  d.iterations = r.iterations;
  d.converged = r.converged;
  d.message = r.message;
  return d;
}

inline Json to_json(const FitSummaryDoc& d) {
  using namespace json_detail;
  Json j = {{"param_names", d.param_names}, {"params", num_array(d.params)},
            {"residual_rms", num(d.residual_rms)}, {"iterations", d.iterations},
            {"converged", d.converged}, {"message", d.message}};
  j["std_errors"] = d.std_errors ? num_array(*d.std_errors) : Json(nullptr);
  return j;
}

inline FitSummaryDoc fit_summary_from_json(const Json& j) {
  using namespace json_detail;
  FitSummaryDoc d;
  d.param_names = get_str_array(j, "param_names");
  d.params = get_num_array(j, "params");
  if (j.contains("std_errors") && !j.at("std_errors").is_null()) d.std_errors = get_num_array(j, "std_errors");
  d.residual_rms = get_num(j, "residual_rms");
  d.iterations = static_cast<int>(get_int(j, "iterations"));
  d.converged = get_bool(j, "converged");
  d.message = get_str(j, "message");
  return d;
}

struct S21ReportDoc {
  double f0_hz = 0.0;
  double kappa_ext_hz = 0.0;
  double kappa_int_hz = 0.0;
  double delay_s = 0.0;
  double delay_seed_s = 0.0;
  bool delay_degenerate = false;
  double circle_center_re = 0.0;
  double circle_center_im = 0.0;
  double circle_radius = 0.0;
  double circle_rms = 0.0;
  double theta0_rad = 0.0;
  std::string method;
  double delay_residual = 0.0;
  double phase_rms = 0.0;
  double kappa_ext_rms = 0.0;
  double displacement = 0.0;
  double qint_condition = 0.0;
  bool ill_conditioned = false;
  bool constrained = false;
  std::optional<std::vector<double>> qint_inv_constraint;
  bool converged = false;
  std::vector<double> frequency_hz;
  std::vector<double> raw_re, raw_im;
  std::vector<double> corrected_re, corrected_im;

  ResonatorParams resonator() const {
    return {hz_to_angular(f0_hz), hz_to_angular(kappa_ext_hz), hz_to_angular(kappa_int_hz)};
  }
  bool operator==(const S21ReportDoc&) const = default;
};

inline S21ReportDoc make_s21_report(const ReflectionFitReport& rep, const ComplexTrace& raw,
                                    const std::optional<QintInvConstraint>& constraint = std::nullopt) {
  S21ReportDoc d;
  d.f0_hz = angular_to_hz(rep.resonator.omega0);
  d.kappa_ext_hz = angular_to_hz(rep.resonator.kappa_ext);
  d.kappa_int_hz = angular_to_hz(rep.resonator.kappa_int);
  d.delay_s = rep.delay;
  d.delay_seed_s = rep.delay_seed;
  d.delay_degenerate = rep.delay_degenerate;
  d.circle_center_re = rep.circle.center.real();
  d.circle_center_im = rep.circle.center.imag();
  d.circle_radius = rep.circle.radius;
  d.circle_rms = rep.circle.rms_residual;
  d.theta0_rad = rep.theta0;
  d.method = to_string(rep.method);
  d.delay_residual = rep.quality.delay_residual;
  d.phase_rms = rep.quality.phase_rms;
  d.kappa_ext_rms = rep.quality.kappa_ext_rms;
  d.displacement = rep.quality.displacement;
  d.qint_condition = rep.qint_condition;
  d.ill_conditioned = rep.ill_conditioned;
  d.constrained = rep.constrained;
  if (constraint) d.qint_inv_constraint = std::vector<double>{constraint->lower, constraint->upper};
  d.converged = rep.converged;
  d.frequency_hz = raw.frequencies;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    d.raw_re.push_back(raw.samples[i].real());
    d.raw_im.push_back(raw.samples[i].imag());
    d.corrected_re.push_back(rep.corrected.samples[i].real());
    d.corrected_im.push_back(rep.corrected.samples[i].imag());
  }
  return d;
}

inline Json to_json(const S21ReportDoc& d) {
  using namespace json_detail;
  const ResonatorParams r = d.resonator();
  Json res = {{"f0_hz", num(d.f0_hz)},
              {"kappa_ext_hz", num(d.kappa_ext_hz)},
              {"kappa_int_hz", num(d.kappa_int_hz)},
              {"kappa_hz", num(d.kappa_ext_hz + d.kappa_int_hz)},
              {"q_ext", num(r.q_ext())},
              {"q_int", num(r.q_int())},
              {"q_loaded", num(r.q_loaded())}};
  Json j = {{"resonator", res},
            {"delay_s", num(d.delay_s)},
            {"delay_seed_s", num(d.delay_seed_s)},
            {"delay_degenerate", d.delay_degenerate},
            {"circle", {{"center_re", num(d.circle_center_re)}, {"center_im", num(d.circle_center_im)},
                        {"radius", num(d.circle_radius)}, {"rms", num(d.circle_rms)}}},
            {"theta0_rad", num(d.theta0_rad)},
            {"method", d.method},
            {"quality", {{"delay_residual", num(d.delay_residual)}, {"phase_rms", num(d.phase_rms)},
                         {"kappa_ext_rms", num(d.kappa_ext_rms)}, {"displacement", num(d.displacement)}}},
            {"qint_condition", num(d.qint_condition)},
            {"ill_conditioned", d.ill_conditioned},
            {"constrained", d.constrained},
            {"converged", d.converged},
            {"series", {{"frequency_hz", num_array(d.frequency_hz)}, {"raw_re", num_array(d.raw_re)},
                        {"raw_im", num_array(d.raw_im)}, {"corrected_re", num_array(d.corrected_re)},
                        {"corrected_im", num_array(d.corrected_im)}}}};
  j["qint_inv_constraint"] = d.qint_inv_constraint ? num_array(*d.qint_inv_constraint) : Json(nullptr);
  return j;
}

inline S21ReportDoc s21_report_from_json(const Json& j) {
  using namespace json_detail;
  S21ReportDoc d;
  const Json& res = get_obj(j, "resonator");
  d.f0_hz = get_num(res, "f0_hz");
  d.kappa_ext_hz = get_num(res, "kappa_ext_hz");
  d.kappa_int_hz = get_num(res, "kappa_int_hz");
  d.delay_s = get_num(j, "delay_s");
  d.delay_seed_s = get_num(j, "delay_seed_s");
  d.delay_degenerate = get_bool(j, "delay_degenerate");
  const Json& c = get_obj(j, "circle");
  d.circle_center_re = get_num(c, "center_re");
  d.circle_center_im = get_num(c, "center_im");
  d.circle_radius = get_num(c, "radius");
  d.circle_rms = get_num(c, "rms");
  d.theta0_rad = get_num(j, "theta0_rad");
  d.method = get_str(j, "method");
  const Json& q = get_obj(j, "quality");
  d.delay_residual = get_num(q, "delay_residual");
  d.phase_rms = get_num(q, "phase_rms");
  d.kappa_ext_rms = get_num(q, "kappa_ext_rms");
  d.displacement = get_num(q, "displacement");
  d.qint_condition = get_num(j, "qint_condition");
  d.ill_conditioned = get_bool(j, "ill_conditioned");
  d.constrained = get_bool(j, "constrained");
  if (j.contains("qint_inv_constraint") && !j.at("qint_inv_constraint").is_null())
    d.qint_inv_constraint = get_num_array(j, "qint_inv_constraint");
  d.converged = get_bool(j, "converged");
  const Json& s = get_obj(j, "series");
  d.frequency_hz = get_num_array(s, "frequency_hz");
  d.raw_re = get_num_array(s, "raw_re");
  d.raw_im = get_num_array(s, "raw_im");
  d.corrected_re = get_num_array(s, "corrected_re");
  d.corrected_im = get_num_array(s, "corrected_im");
  const std::size_t n = d.frequency_hz.size();
  if (d.raw_re.size() != n || d.raw_im.size() != n || d.corrected_re.size() != n || d.corrected_im.size() != n)
    throw Error(ErrorKind::parse, "json: s21 series lengths differ");
  return d;
}

struct FluxReportDoc {
  DeviceKind device = DeviceKind::jpa;
  JpaParamsDoc jpa;
  JpcParamsDoc jpc;
  double I_c_a = 0.0;
  double E_J_hz = 0.0;
  double L_J0_h = 0.0;
  std::optional<double> shunt_inductance_h;
  double zero_flux_hz = 0.0;
  double tunability_hz = 0.0;
  std::size_t excluded = 0;
  FitSummaryDoc fit;
  std::vector<double> control;
  std::vector<double> f0_hz;
  std::vector<double> model_hz;
  bool operator==(const FluxReportDoc&) const = default;
};

namespace detail {

inline void fill_flux_series(FluxReportDoc& d, const std::vector<FluxMapPoint>& pts) {
  for (const auto& p : pts) {
    d.control.push_back(p.control);
    d.f0_hz.push_back(p.f0);
    double m = std::numeric_limits<double>::quiet_NaN();
    try {
      if (d.device == DeviceKind::jpa) {
        const JpaModelParams mp = to_model(d.jpa);
        m = angular_to_hz(jpa_frequency(flux_from_control(p.control, mp.flux_cal), mp));
      } else {
        const JpcModelParams mp = to_model(d.jpc);
        m = angular_to_hz(jpc_frequency(flux_from_control(p.control, mp.flux_cal), mp));
      }
    } catch (const DomainError&) {
    }
    d.model_hz.push_back(m);
  }
}

}  // namespace detail

inline FluxReportDoc make_flux_report(const JpaFluxFit& f, const std::vector<FluxMapPoint>& pts) {
  FluxReportDoc d;
  d.device = DeviceKind::jpa;
  d.jpa = to_doc(f.params);
  d.I_c_a = f.junction.I_c;
  d.E_J_hz = f.junction.E_J / PhysConstants::h;
  d.L_J0_h = f.junction.L_J0;
  d.zero_flux_hz = f.zero_flux_hz;
  d.tunability_hz = f.tunability_hz;
  d.excluded = f.excluded;
  d.fit = make_fit_summary(f.fit, {"omega_r_rad_s", "I_c_a", "control_offset", "control_period"});
  detail::fill_flux_series(d, pts);
  return d;
}

inline FluxReportDoc make_flux_report(const JpcFluxFit& f, const std::vector<FluxMapPoint>& pts) {
  FluxReportDoc d;
  d.device = DeviceKind::jpc;
  d.jpc = to_doc(f.params);
  d.I_c_a = f.junction.I_c;
  d.E_J_hz = f.junction.E_J / PhysConstants::h;
  d.L_J0_h = f.junction.L_J0;
  d.shunt_inductance_h = f.shunt_inductance;
  d.zero_flux_hz = f.zero_flux_hz;
  d.tunability_hz = f.tunability_hz;
  d.excluded = f.excluded;
  d.fit = make_fit_summary(f.fit, {"omega_r_A_rad_s", "E_J_j", "E_L_j", "control_offset", "control_period"});
  detail::fill_flux_series(d, pts);
  return d;
}

inline Json to_json(const FluxReportDoc& d) {
  using namespace json_detail;
  Json j = {{"device", to_string(d.device)},
            {"derived", {{"I_c_a", num(d.I_c_a)}, {"E_J_hz", num(d.E_J_hz)}, {"L_J0_h", num(d.L_J0_h)},
                         {"zero_flux_hz", num(d.zero_flux_hz)}, {"tunability_hz", num(d.tunability_hz)}}},
            {"excluded_points", d.excluded},
            {"fit", to_json(d.fit)},
            {"series", {{"control", num_array(d.control)}, {"f0_hz", num_array(d.f0_hz)},
                        {"model_hz", num_array(d.model_hz)}}}};
  j["derived"]["shunt_inductance_h"] = d.shunt_inductance_h ? num(*d.shunt_inductance_h) : Json(nullptr);
  if (d.device == DeviceKind::jpa) j["jpa"] = to_json(d.jpa);
  else j["jpc"] = to_json(d.jpc);
  return j;
}

inline FluxReportDoc flux_report_from_json(const Json& j) {
  using namespace json_detail;
  FluxReportDoc d;
  d.device = device_from_string(get_str(j, "device"));
  if (d.device == DeviceKind::jpa) d.jpa = jpa_params_from_json(get_obj(j, "jpa"));
  else d.jpc = jpc_params_from_json(get_obj(j, "jpc"));
  const Json& dv = get_obj(j, "derived");
  d.I_c_a = get_num(dv, "I_c_a");
  d.E_J_hz = get_num(dv, "E_J_hz");
  d.L_J0_h = get_num(dv, "L_J0_h");
  d.shunt_inductance_h = get_opt_num(dv, "shunt_inductance_h");
  d.zero_flux_hz = get_num(dv, "zero_flux_hz");
  d.tunability_hz = get_num(dv, "tunability_hz");
  d.excluded = static_cast<std::size_t>(get_int(j, "excluded_points"));
  d.fit = fit_summary_from_json(get_obj(j, "fit"));
  const Json& s = get_obj(j, "series");
  d.control = get_num_array(s, "control");
  d.f0_hz = get_num_array(s, "f0_hz");
  d.model_hz = get_num_array(s, "model_hz");
  if (d.f0_hz.size() != d.control.size() || d.model_hz.size() != d.control.size())
    throw Error(ErrorKind::parse, "json: flux series lengths differ");
  return d;
}

struct SqueezingReportDoc {
  SqueezingParamsDoc params;
  double q_int = 0.0;
  double purity_weight = 100.0;
  FitSummaryDoc fit;
  std::vector<double> power_dbm;
  std::vector<double> squeezing_db;
  std::vector<double> purity;
  std::vector<double> model_squeezing_db;
  std::vector<double> model_purity;
  bool operator==(const SqueezingReportDoc&) const = default;
};

inline SqueezingReportDoc make_squeezing_report(const SqueezingFit& f, const std::vector<SqueezingPoint>& data,
                                                double purity_weight) {
  SqueezingReportDoc d;
  d.params = to_doc(f.params);
  d.q_int = f.q_int;
  d.purity_weight = purity_weight;
  d.fit = make_fit_summary(f.fit, {"kappa_int_rad_s", "chi2_rad_s", "nJ_prefactor", "delta_exp", "T_att_k", "T_mxc_k"});
  for (const auto& p : data) {
    d.power_dbm.push_back(p.pump_power_dbm);
    d.squeezing_db.push_back(p.squeezing_db);
    d.purity.push_back(p.purity);
    double s = std::numeric_limits<double>::quiet_NaN(), mu = s;
    try {
      const SqueezedStateMetrics m = model_curve(f.params, {PowerDbm{p.pump_power_dbm}}).front();
      s = m.S;
      mu = m.mu;
    } catch (const Error&) {
    }
    d.model_squeezing_db.push_back(s);
    d.model_purity.push_back(mu);
  }
  return d;
}

inline Json to_json(const SqueezingReportDoc& d) {
  using namespace json_detail;
  return {{"params", to_json(d.params)},
          {"q_int", num(d.q_int)},
          {"purity_weight", num(d.purity_weight)},
          {"fit", to_json(d.fit)},
          {"series", {{"power_dbm", num_array(d.power_dbm)}, {"squeezing_db", num_array(d.squeezing_db)},
                      {"purity", num_array(d.purity)}, {"model_squeezing_db", num_array(d.model_squeezing_db)},
                      {"model_purity", num_array(d.model_purity)}}}};
}

inline SqueezingReportDoc squeezing_report_from_json(const Json& j) {
  using namespace json_detail;
  SqueezingReportDoc d;
  d.params = squeezing_params_from_json(get_obj(j, "params"));
  d.q_int = get_num(j, "q_int");
  d.purity_weight = get_num(j, "purity_weight");
  d.fit = fit_summary_from_json(get_obj(j, "fit"));
  const Json& s = get_obj(j, "series");
  d.power_dbm = get_num_array(s, "power_dbm");
  d.squeezing_db = get_num_array(s, "squeezing_db");
  d.purity = get_num_array(s, "purity");
  d.model_squeezing_db = get_num_array(s, "model_squeezing_db");
  d.model_purity = get_num_array(s, "model_purity");
  const std::size_t n = d.power_dbm.size();
  if (d.squeezing_db.size() != n || d.purity.size() != n || d.model_squeezing_db.size() != n ||
      d.model_purity.size() != n)
    throw Error(ErrorKind::parse, "json: squeezing series lengths differ");
  return d;
}

// ---------------------------------------------------------------------------
// Report document

using ReportPayload = std::variant<S21ReportDoc, FluxReportDoc, SqueezingReportDoc>;

inline const char* payload_kind(const ReportPayload& p) {
  switch (p.index()) {
    case 0: return "s21";
    case 1: return "fluxmap";
    default: return "squeezing";
  }
}

struct FitReportDocument {
  std::string tool_version = jpq::tool_version;
  std::string input_digest;  // sha256 hex of the primary input file
  std::vector<std::string> command;
  /// Wall-clock time of the run; the only non-deterministic field.
  std::string timestamp;
  ReportPayload payload;
  std::vector<std::string> warnings;
  bool operator==(const FitReportDocument&) const = default;
};

inline constexpr const char* timestamp_key = "timestamp";

inline Json to_json(const FitReportDocument& d) {
  Json j;
  j["schema_version"] = schema_version;
  j["tool_version"] = d.tool_version;
  j["input_digest"] = {{"algorithm", "sha256"}, {"hex", d.input_digest}};
  j["command"] = d.command;
  j[timestamp_key] = d.timestamp;
  j["kind"] = payload_kind(d.payload);
  j["payload"] = std::visit([](const auto& p) { return to_json(p); }, d.payload);
  j["warnings"] = d.warnings;
  return j;
}

inline FitReportDocument report_from_json(const Json& j) {
  using namespace json_detail;
  check_schema(j);
  FitReportDocument d;
  d.tool_version = get_str(j, "tool_version");
  const Json& dg = get_obj(j, "input_digest");
  if (get_str(dg, "algorithm") != "sha256") throw Error(ErrorKind::parse, "json: unsupported digest algorithm");
  d.input_digest = get_str(dg, "hex");
  d.command = get_str_array(j, "command");
  d.timestamp = get_str(j, timestamp_key);
  const std::string kind = get_str(j, "kind");
  const Json& p = get_obj(j, "payload");
  if (kind == "s21") d.payload = s21_report_from_json(p);
  else if (kind == "fluxmap") d.payload = flux_report_from_json(p);
  else if (kind == "squeezing") d.payload = squeezing_report_from_json(p);
  else throw Error(ErrorKind::parse, "json: unknown report kind '" + kind + "'");
  d.warnings = get_str_array(j, "warnings");
  return d;
}

/// Canonical serialization: sorted keys, two-space indent, trailing newline.
inline std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

inline Json parse_json(std::string_view bytes, const std::string& what) {
  try {
    return Json::parse(bytes);
  } catch (const Json::parse_error& e) {
    throw ParseError(what + ": invalid JSON (" + e.what() + ")", 0, e.byte);
  }
}

}  // namespace jpq
