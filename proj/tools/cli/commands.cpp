#include "commands.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <utility>

#include "CLI11.hpp"
#include "jpq/circle_fit.hpp"
#include "jpq/flux_fit.hpp"
#include "jpq/instrument_sim.hpp"
#include "jpq/io.hpp"
#include "jpq/plot.hpp"
#include "jpq/report.hpp"
#include "jpq/squeezing.hpp"

namespace jpq::cli {

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) != 1 || EVP_DigestFinal_ex(ctx, md, &len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw Error(ErrorKind::io, "sha256 digest failed");
  }
  EVP_MD_CTX_free(ctx);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

namespace {

// Background noise uses a seed derived from the trace seed so both files
// are reproducible from one --seed.
constexpr std::uint64_t background_seed_salt = 0x9E3779B97F4A7C15ull;

std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Files of one command, written only after every one of them has been
/// produced in memory.
struct PendingWrites {
  std::vector<std::pair<std::filesystem::path, std::string>> files;
  void add(std::filesystem::path p, std::string bytes) { files.emplace_back(std::move(p), std::move(bytes)); }
  void commit() const {
    for (const auto& [p, b] : files) write_file_atomic(p, b);
  }
};

Json load_json(const std::string& path) { return parse_json(read_file(path), path); }

FitReportDocument make_document(const std::vector<std::string>& args, const std::string& input_bytes,
                                ReportPayload payload, std::vector<std::string> warnings) {
  FitReportDocument d;
  d.input_digest = sha256_hex(input_bytes);
  d.command = args;
  d.timestamp = utc_timestamp();
  d.payload = std::move(payload);
  d.warnings = std::move(warnings);
  return d;
}

// ---------------------------------------------------------------------------
// simulate

int simulate_s21(const std::string& config, std::uint64_t seed, const std::string& out_path, std::ostream& out) {
  const SimulateS21Config cfg = simulate_s21_config_from_json(load_json(config));
  const ResonatorParams p = cfg.resonator();
  const std::vector<double> freqs = synth_grid(cfg.grid());
  ComplexTrace t = synth_measurement(freqs, p, cfg.distortion, seed);
  PendingWrites w;
  w.add(out_path, format_trace_csv(t));
  if (cfg.background_out) {
    const ComplexTrace bg =
        add_noise(synth_background(freqs, cfg.distortion), cfg.distortion.noise_sigma, seed ^ background_seed_salt);
    w.add(*cfg.background_out, format_trace_csv(bg));
  }
  w.commit();
  out << "wrote " << t.size() << " points to " << out_path << "\n";
  return exit_ok;
}

int simulate_fluxmap(const std::string& config, std::uint64_t seed, const std::string& out_path, std::ostream& out) {
  const SimulateFluxConfig cfg = simulate_flux_config_from_json(load_json(config));
  const std::vector<FluxMapPoint> pts =
      cfg.device.device == DeviceKind::jpa
          ? synth_jpa_flux_map(to_model(cfg.device.jpa), cfg.controls(), cfg.noise_hz, seed)
          : synth_jpc_flux_map(to_model(cfg.device.jpc), cfg.controls(), cfg.noise_hz, seed);
  if (pts.empty()) throw Error(ErrorKind::invalid_argument, "simulate fluxmap: no control value inside the model domain");
  write_file_atomic(out_path, format_flux_csv(pts));
  out << "wrote " << pts.size() << " of " << cfg.count << " points to " << out_path << "\n";
  return exit_ok;
}

int simulate_squeezing(const std::string& config, std::uint64_t seed, const std::string& out_path,
                       std::ostream& out) {
  const SimulateSqueezingConfig cfg = simulate_squeezing_config_from_json(load_json(config));
  const auto data = synth_squeezing_data(to_model(cfg.params), cfg.powers(), cfg.sigma_S_db, cfg.sigma_mu, seed);
  write_file_atomic(out_path, format_squeezing_csv(data));
  out << "wrote " << data.size() << " points to " << out_path << "\n";
  return exit_ok;
}

// ---------------------------------------------------------------------------
// fit

int fit_s21(const std::vector<std::string>& args, const std::string& in, const std::string& background,
            const std::vector<double>& constraint, const std::string& out_path, std::ostream& out) {
  const std::string bytes = read_file(in);
  TraceCsv parsed = parse_trace_csv(bytes);
  std::vector<std::string> warnings = parsed.warnings;
  ReflectionFitOptions opt;
  if (!background.empty()) {
    TraceCsv bg = parse_trace_csv(read_file(background));
    for (auto& w : bg.warnings) warnings.push_back("background: " + w);
    opt.background = std::move(bg.trace);
  }
  std::optional<QintInvConstraint> c;
  if (!constraint.empty()) {
    double lo = constraint[0], hi = constraint[1];
    if (lo > hi) {
      std::swap(lo, hi);
      warnings.push_back("--constrain-qint-inv endpoints given in descending order; interpreted as [" +
                         detail::format_number(lo) + ", " + detail::format_number(hi) + "]");
    }
    c = QintInvConstraint{lo, hi};
    opt.kappa_ext.constraint = c;
  }
  const ReflectionFitReport rep = fit_reflection(parsed.trace, opt);
  warnings.insert(warnings.end(), rep.warnings.begin(), rep.warnings.end());
  if (!rep.converged) warnings.push_back("fit did not converge");
  const FitReportDocument doc = make_document(args, bytes, make_s21_report(rep, parsed.trace, c), warnings);
  write_file_atomic(out_path, dump_json(to_json(doc)));
  out << "Q_ext = " << rep.resonator.q_ext() << ", Q_int = " << rep.resonator.q_int()
      << ", f0 = " << angular_to_hz(rep.resonator.omega0) << " Hz\n";
  return rep.converged ? exit_ok : exit_not_converged;
}

int fit_fluxmap(const std::vector<std::string>& args, const std::string& device, const std::string& in,
                const std::string& init_path, const std::string& out_path, std::ostream& out) {
  const DeviceKind kind = device_from_string(device);
  const DeviceParamsConfig init = flux_init_from_json(load_json(init_path));
  if (init.device != kind)
    throw Error(ErrorKind::invalid_argument,
                std::string("--device ") + to_string(kind) + " does not match init device " + to_string(init.device));
  const std::string bytes = read_file(in);
  const std::vector<FluxMapPoint> pts = parse_flux_csv(bytes);
  FluxReportDoc rep;
  std::vector<std::string> warnings;
  bool converged = false;
  if (kind == DeviceKind::jpa) {
    const JpaFluxFit f = fit_jpa_flux(pts, to_model(init.jpa));
    rep = make_flux_report(f, pts);
    warnings = f.warnings;
    converged = f.fit.converged;
    out << "I_c = " << f.params.I_c << " A, E_J/h = " << rep.E_J_hz << " Hz\n";
  } else {
    const JpcFluxFit f = fit_jpc_flux(pts, to_model(init.jpc));
    rep = make_flux_report(f, pts);
    warnings = f.warnings;
    converged = f.fit.converged;
    out << "E_J/h = " << rep.E_J_hz << " Hz, L = " << f.shunt_inductance << " H\n";
  }
  if (!converged) warnings.push_back("fit did not converge");
  write_file_atomic(out_path, dump_json(to_json(make_document(args, bytes, rep, warnings))));
  return converged ? exit_ok : exit_not_converged;
}

int fit_squeezing_cmd(const std::vector<std::string>& args, const std::string& in, double kappa_ext_hz,
                      const std::string& init_path, const std::string& out_path, std::ostream& out) {
  require(std::isfinite(kappa_ext_hz) && kappa_ext_hz > 0.0, "--kappa-ext must be a positive rate in Hz");
  SqueezingInitConfig init = squeezing_init_from_json(load_json(init_path));
  init.params.kappa_ext_hz = kappa_ext_hz;
  const std::string bytes = read_file(in);
  const auto data = parse_squeezing_csv(bytes);
  SqueezingFitOptions opt;
  opt.purity_weight = init.purity_weight;
  const SqueezingFit f = fit_squeezing(data, to_model(init.params), opt);
  std::vector<std::string> warnings = f.warnings;
  if (!f.fit.converged) warnings.push_back("fit did not converge");
  write_file_atomic(out_path, dump_json(to_json(make_document(
                                  args, bytes, make_squeezing_report(f, data, opt.purity_weight), warnings))));
  out << "Q_int = " << f.q_int << ", chi2/2pi = " << angular_to_hz(f.params.chi2) << " Hz\n";
  return f.fit.converged ? exit_ok : exit_not_converged;
}

// ---------------------------------------------------------------------------
// report

void plot_s21(const S21ReportDoc& d, const std::string& prefix, PendingWrites& w) {
  const std::size_t n = d.frequency_hz.size();
  const ResonatorParams p = d.resonator();
  const Complex center{d.circle_center_re, d.circle_center_im};
  std::vector<double> mag(n), detuning(n), model_re(n), model_im(n);
  std::vector<Complex> centered(n), model_centered(n);
  for (std::size_t i = 0; i < n; ++i) {
    mag[i] = std::abs(Complex{d.raw_re[i], d.raw_im[i]});
    detuning[i] = d.frequency_hz[i] - d.f0_hz;
    const Complex m = ideal_reflection(hz_to_angular(d.frequency_hz[i]) - p.omega0, p);
    model_re[i] = m.real();
    model_im[i] = m.imag();
    centered[i] = Complex{d.corrected_re[i], d.corrected_im[i]} - center;
    model_centered[i] = m - center;
  }
  const std::vector<double> phase = unwrap_phase(centered);
  std::vector<double> model_phase = unwrap_phase(model_centered);
  // Align the model branch with the data branch at the resonance.
  if (n) {
    const std::size_t mid = static_cast<std::size_t>(
        std::min_element(detuning.begin(), detuning.end(), [](double a, double b) { return std::abs(a) < std::abs(b); }) -
        detuning.begin());
    const double shift = two_pi * std::round((phase[mid] - model_phase[mid]) / two_pi);
    for (double& v : model_phase) v += shift;
  }
  w.add(prefix + "_magnitude.dat", format_series_dat("frequency_hz", "abs_s21", d.frequency_hz, mag));
  w.add(prefix + "_circle.dat", format_series_dat("re_s21_corrected", "im_s21_corrected", d.corrected_re, d.corrected_im));
  w.add(prefix + "_phase.dat", format_series_dat("detuning_hz", "phase_rad", detuning, phase));
  std::vector<PlotPanel> panels{
      {"|S21| (raw)", "frequency (Hz)", "|S21|", {{"data", d.frequency_hz, mag, true}}, false},
      {"complex plane (corrected)", "Re S21", "Im S21",
       {{"data", d.corrected_re, d.corrected_im, true}, {"model", model_re, model_im, false}}, true},
      {"phase vs detuning", "detuning (Hz)", "phase (rad)",
       {{"data", detuning, phase, true}, {"model", detuning, model_phase, false}}, false}};
  w.add(prefix + ".svg", render_svg(panels));
}

void plot_flux(const FluxReportDoc& d, const std::string& prefix, PendingWrites& w) {
  w.add(prefix + "_fluxmap.dat", format_series_dat("control", "f0_hz", d.control, d.f0_hz));
  w.add(prefix + "_fluxmodel.dat", format_series_dat("control", "model_hz", d.control, d.model_hz));
  // Dense model curve for the figure.
  std::vector<double> cx, cy;
  if (!d.control.empty()) {
    const auto [lo, hi] = std::minmax_element(d.control.begin(), d.control.end());
    for (int k = 0; k <= 400; ++k) {
      const double c = *lo + (*hi - *lo) * k / 400.0;
      double f = std::numeric_limits<double>::quiet_NaN();
      try {
        if (d.device == DeviceKind::jpa) {
          const JpaModelParams m = to_model(d.jpa);
          f = angular_to_hz(jpa_frequency(flux_from_control(c, m.flux_cal), m));
        } else {
          const JpcModelParams m = to_model(d.jpc);
          f = angular_to_hz(jpc_frequency(flux_from_control(c, m.flux_cal), m));
        }
      } catch (const DomainError&) {
      }
      cx.push_back(c);
      cy.push_back(f);
    }
  }
  w.add(prefix + ".svg",
        render_svg({{std::string("resonance vs flux control (") + to_string(d.device) + ")", "control", "f0 (Hz)",
                     {{"data", d.control, d.f0_hz, true}, {"model", cx, cy, false}}, false}}));
}

void plot_squeezing(const SqueezingReportDoc& d, const std::string& prefix, PendingWrites& w) {
  w.add(prefix + "_squeezing.dat", format_series_dat("pump_power_dbm", "squeezing_db", d.power_dbm, d.squeezing_db));
  w.add(prefix + "_purity.dat", format_series_dat("pump_power_dbm", "purity", d.power_dbm, d.purity));
  w.add(prefix + "_squeezing_model.dat",
        format_series_dat("pump_power_dbm", "squeezing_db", d.power_dbm, d.model_squeezing_db));
  w.add(prefix + "_purity_model.dat", format_series_dat("pump_power_dbm", "purity", d.power_dbm, d.model_purity));
  w.add(prefix + ".svg",
        render_svg({{"squeezing", "pump power (dBm)", "S (dB)",
                     {{"data", d.power_dbm, d.squeezing_db, true}, {"model", d.power_dbm, d.model_squeezing_db, false}},
                     false},
                    {"purity", "pump power (dBm)", "mu",
                     {{"data", d.power_dbm, d.purity, true}, {"model", d.power_dbm, d.model_purity, false}},
                     false}}));
}

int report(const std::string& in, const std::string& plot, std::ostream& out) {
  const FitReportDocument doc = report_from_json(load_json(in));
  std::string prefix = plot;
  if (std::filesystem::path(prefix).extension() == ".svg") prefix.resize(prefix.size() - 4);
  if (prefix.empty()) throw Error(ErrorKind::invalid_argument, "--plot path is empty");
  PendingWrites w;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, S21ReportDoc>) plot_s21(p, prefix, w);
        else if constexpr (std::is_same_v<T, FluxReportDoc>) plot_flux(p, prefix, w);
        else plot_squeezing(p, prefix, w);
      },
      doc.payload);
  w.commit();
  out << payload_kind(doc.payload) << " report: wrote " << w.files.size() << " files with prefix " << prefix << "\n";
  for (const auto& warning : doc.warnings) out << "warning: " << warning << "\n";
  return exit_ok;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulation and fitting of reflection traces, flux maps and squeezing data", "jpq"};
  app.require_subcommand(1);
  app.set_version_flag("--version", tool_version);

  std::string config, out_path, in, background, device, init, plot;
  std::uint64_t seed = 0;
  double kappa_ext_hz = 0.0;
  std::vector<double> constraint;

  auto* sim = app.add_subcommand("simulate", "Generate synthetic data")->require_subcommand(1);
  auto add_sim = [&](const char* name, const char* help) {
    auto* s = sim->add_subcommand(name, help);
    s->add_option("--config", config, "JSON run configuration")->required()->check(CLI::ExistingFile);
    s->add_option("--seed", seed, "Random seed (unsigned integer)")->required();
    s->add_option("--out", out_path, "Output CSV")->required();
    return s;
  };
  auto* sim_s21 = add_sim("s21", "Reflection trace with instrument distortions");
  auto* sim_flux = add_sim("fluxmap", "Resonance frequency vs flux control");
  auto* sim_sq = add_sim("squeezing", "Squeezing and purity vs pump power");

  auto* fit = app.add_subcommand("fit", "Fit measured or simulated data")->require_subcommand(1);
  auto* fit_s21_cmd = fit->add_subcommand("s21", "Quality factors from a reflection trace");
  fit_s21_cmd->add_option("--in", in, "Trace CSV")->required();
  fit_s21_cmd->add_option("--background", background, "Background trace CSV (detuned device)");
  fit_s21_cmd->add_option("--constrain-qint-inv", constraint, "Interval for 1/Q_int: LO HI")->expected(2);
  fit_s21_cmd->add_option("--out", out_path, "Report JSON")->required();
  auto* fit_flux_cmd = fit->add_subcommand("fluxmap", "Junction parameters from a flux map");
  fit_flux_cmd->add_option("--device", device, "jpa or jpc")->required()->check(CLI::IsMember({"jpa", "jpc"}));
  fit_flux_cmd->add_option("--in", in, "Flux-map CSV")->required();
  fit_flux_cmd->add_option("--init", init, "Initial parameters JSON")->required();
  fit_flux_cmd->add_option("--out", out_path, "Report JSON")->required();
  auto* fit_sq_cmd = fit->add_subcommand("squeezing", "Loss and pump-noise parameters from S and mu data");
  fit_sq_cmd->add_option("--in", in, "Squeezing CSV")->required();
  fit_sq_cmd->add_option("--kappa-ext", kappa_ext_hz, "External loss rate kappa_ext/2pi (Hz)")->required();
  fit_sq_cmd->add_option("--init", init, "Initial parameters JSON")->required();
  fit_sq_cmd->add_option("--out", out_path, "Report JSON")->required();

  auto* rep = app.add_subcommand("report", "Plot data from a fit report");
  rep->add_option("--in", in, "Report JSON")->required();
  rep->add_option("--plot", plot, "Output path prefix (or .svg path)")->required();

  std::vector<std::string> argv_store{"jpq"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return exit_validation;
  }

  try {
    if (sim_s21->parsed()) return simulate_s21(config, seed, out_path, out);
    if (sim_flux->parsed()) return simulate_fluxmap(config, seed, out_path, out);
    if (sim_sq->parsed()) return simulate_squeezing(config, seed, out_path, out);
    if (fit_s21_cmd->parsed()) return fit_s21(args, in, background, constraint, out_path, out);
    if (fit_flux_cmd->parsed()) return fit_fluxmap(args, device, in, init, out_path, out);
    if (fit_sq_cmd->parsed()) return fit_squeezing_cmd(args, in, kappa_ext_hz, init, out_path, out);
    if (rep->parsed()) return report(in, plot, out);
  } catch (const Error& e) {
    err << "error [" << to_string(e.kind()) << "]";
    if (!e.stage().empty()) err << " in stage " << e.stage();
    err << ": " << e.what() << "\n";
    return e.kind() == ErrorKind::not_converged ? exit_not_converged : exit_validation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_validation;
  }
  err << "error: no command given\n";
  return exit_validation;
}

}  // namespace jpq::cli
