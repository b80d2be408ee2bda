#include "fibermem/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "fibermem/error.hpp"

namespace fibermem {

using nlohmann::json;

namespace {

// Reads one JSON object, remembering which keys were consumed so that
// leftovers can be reported as unknown.
class Section {
 public:
  Section(const json& doc, std::string name) : name_(std::move(name)) {
    if (doc.contains(name_)) {
      obj_ = &doc.at(name_);
      if (!obj_->is_object()) throw ConfigError(name_ + ": expected an object");
    }
  }

  bool has(const std::string& key) const { return obj_ && obj_->contains(key); }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    used_.insert(key);
    const json& v = obj_->at(key);
    if (!v.is_number()) throw ConfigError(path(key) + ": expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(path(key) + ": must be finite");
    return d;
  }

  std::optional<double> optional_number(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return number(key, 0.0);
  }

  std::uint64_t integer(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    used_.insert(key);
    const json& v = obj_->at(key);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
      throw ConfigError(path(key) + ": expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  std::optional<std::string> optional_string(const std::string& key) {
    if (!has(key)) return std::nullopt;
    used_.insert(key);
    const json& v = obj_->at(key);
    if (!v.is_string()) throw ConfigError(path(key) + ": expected a string");
    return v.get<std::string>();
  }

  std::string path(const std::string& key) const { return name_ + "." + key; }

  void finish() const {
    if (!obj_) return;
    for (const auto& [key, _] : obj_->items())
      if (!used_.count(key)) throw ConfigError(path(key) + ": unknown key");
  }

 private:
  std::string name_;
  const json* obj_ = nullptr;
  std::set<std::string> used_;
};

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field + ": " + what);
}

void read_pair(Section& s, ControlPair& pair, BsfwmCoupling& coupling, std::optional<double>& target) {
  pair.q_energy_nj = s.number("q_energy_nj", pair.q_energy_nj);
  pair.p_energy_nj = s.number("p_energy_nj", pair.p_energy_nj);
  pair.q_wavelength_nm = s.number("q_wavelength_nm", pair.q_wavelength_nm);
  pair.p_wavelength_nm = s.number("p_wavelength_nm", pair.p_wavelength_nm);
  pair.delay_ps = s.number("delay_ps", pair.delay_ps);
  coupling.walkoff_ps = s.number("walkoff_ps", coupling.walkoff_ps);
  coupling.control_duration_ps = s.number("control_duration_ps", coupling.control_duration_ps);
  coupling.optimal_delay_ps = s.number("optimal_delay_ps", coupling.optimal_delay_ps);
  coupling.acceptance_nm = s.number("acceptance_nm", coupling.acceptance_nm);

  require(pair.q_energy_nj >= 0, s.path("q_energy_nj"), "must be >= 0");
  require(pair.p_energy_nj >= 0, s.path("p_energy_nj"), "must be >= 0");
  require(pair.q_wavelength_nm > 0, s.path("q_wavelength_nm"), "must be > 0");
  require(pair.p_wavelength_nm > 0, s.path("p_wavelength_nm"), "must be > 0");
  require(pair.q_wavelength_nm <= pair.p_wavelength_nm, s.path("q_wavelength_nm"),
          "must not exceed p_wavelength_nm (q is the higher-frequency control)");
  require(coupling.walkoff_ps > 0, s.path("walkoff_ps"), "must be > 0");
  require(coupling.control_duration_ps > 0, s.path("control_duration_ps"), "must be > 0");
  require(coupling.acceptance_nm >= 0, s.path("acceptance_nm"), "must be >= 0");

  const auto xi = s.optional_number("xi_rad_per_nj");
  target = s.optional_number("target_efficiency");
  require(!(xi && target), s.path("xi_rad_per_nj"), "give either xi_rad_per_nj or target_efficiency, not both");
  if (xi) {
    require(*xi >= 0, s.path("xi_rad_per_nj"), "must be >= 0");
    coupling.xi_rad_per_nj = *xi;
  }
  if (target) {
    require(*target >= 0 && *target <= 1, s.path("target_efficiency"), "must be in [0,1]");
    const double w = std::sqrt(pair.q_energy_nj * pair.p_energy_nj);
    require(w > 0, s.path("target_efficiency"), "needs non-zero control energies");
    coupling.xi_rad_per_nj = calibrated_xi(*target, w);
  }
}

json pair_json(const ControlPair& pair, const BsfwmCoupling& c) {
  return {{"q_energy_nj", pair.q_energy_nj},
          {"p_energy_nj", pair.p_energy_nj},
          {"q_wavelength_nm", pair.q_wavelength_nm},
          {"p_wavelength_nm", pair.p_wavelength_nm},
          {"delay_ps", pair.delay_ps},
          {"walkoff_ps", c.walkoff_ps},
          {"control_duration_ps", c.control_duration_ps},
          {"optimal_delay_ps", c.optimal_delay_ps},
          {"acceptance_nm", c.acceptance_nm},
          {"xi_rad_per_nj", c.xi_rad_per_nj}};
}

const std::set<std::string> kSections = {"signal", "cavity",  "write", "read",     "noise",
                                         "detection", "filters", "run", "multiplex"};

}  // namespace

RunConfig default_config() {
  RunConfig cfg;
  cfg.multiplex.herald_probability = 0.05;
  cfg.multiplex.n_bins = 10;
  cfg.multiplex.memory_total_efficiency = 0.73;
  cfg.multiplex.survival_per_round_trip = std::exp(-1.0 / 39.7);
  cfg.multiplex.source_heralding_efficiency = 1.0;
  return cfg;
}

RunConfig config_from_json(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");
  for (const auto& [key, _] : doc.items())
    if (!kSections.count(key)) throw ConfigError(key + ": unknown section");

  RunConfig cfg = default_config();
  ExperimentScenario& sc = cfg.scenario;

  Section signal(doc, "signal");
  const double signal_nm = signal.number("wavelength_nm", sc.coupling_write.signal_wavelength_nm);
  require(signal_nm > 0, "signal.wavelength_nm", "must be > 0");
  sc.coupling_write.signal_wavelength_nm = sc.coupling_read.signal_wavelength_nm = signal_nm;
  cfg.signal_bandwidth_nm = signal.number("bandwidth_nm", cfg.signal_bandwidth_nm);
  require(cfg.signal_bandwidth_nm > 0, "signal.bandwidth_nm", "must be > 0");
  const double duration = signal.number("duration_ps", sc.coupling_write.signal_duration_ps);
  require(duration > 0, "signal.duration_ps", "must be > 0");
  sc.coupling_write.signal_duration_ps = sc.coupling_read.signal_duration_ps = duration;
  sc.input_mean_photons = signal.number("input_mean_photons", sc.input_mean_photons);
  require(sc.input_mean_photons >= 0, "signal.input_mean_photons", "must be >= 0");
  signal.finish();

  Section cavity(doc, "cavity");
  sc.cavity.length_m = cavity.number("length_m", sc.cavity.length_m);
  require(sc.cavity.length_m > 0, "cavity.length_m", "must be > 0");
  sc.cavity.group_index = cavity.number("group_index", sc.cavity.group_index);
  require(sc.cavity.group_index >= 1, "cavity.group_index", "must be >= 1");
  sc.cavity.fiber_loss_db_per_km = cavity.number("loss_db_per_km", sc.cavity.fiber_loss_db_per_km);
  require(sc.cavity.fiber_loss_db_per_km >= 0, "cavity.loss_db_per_km", "must be >= 0");
  sc.cavity.extra_loss_db_per_round_trip =
      cavity.number("extra_loss_db_per_round_trip", sc.cavity.extra_loss_db_per_round_trip);
  require(sc.cavity.extra_loss_db_per_round_trip >= 0, "cavity.extra_loss_db_per_round_trip", "must be >= 0");
  {
    const auto refl = cavity.optional_number("reflectivity");
    const auto life = cavity.optional_number("lifetime_round_trips");
    const auto csv = cavity.optional_string("coating_csv");
    const auto named = cavity.optional_string("coating");
    const int given = (refl ? 1 : 0) + (life ? 1 : 0) + (csv ? 1 : 0) + (named ? 1 : 0);
    require(given <= 1, "cavity", "give at most one of reflectivity, lifetime_round_trips, coating_csv, coating");
    if (given == 0) {
      // Default damaged-coating reflectivity, recomputed for this geometry.
      sc.cavity.reflectivity_override = reflectivity_from_lifetime(16.0, sc.cavity);
    }
    if (refl) {
      require(*refl >= 0 && *refl <= 1, "cavity.reflectivity", "must be in [0,1]");
      sc.cavity.reflectivity_override = *refl;
    }
    if (life) {
      require(*life > 0, "cavity.lifetime_round_trips", "must be > 0");
      try {
        sc.cavity.reflectivity_override = reflectivity_from_lifetime(*life, sc.cavity);
      } catch (const InfeasibleError& e) {
        throw ConfigError(std::string("cavity.lifetime_round_trips: ") + e.what());
      }
    }
    if (csv) {
      std::filesystem::path p(*csv);
      if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
      sc.cavity.coating = read_coating_csv(p);
      sc.cavity.reflectivity_override.reset();
      cfg.coating_source = *csv;
    }
    if (named) {
      require(*named == "synthetic", "cavity.coating", "only \"synthetic\" is built in");
      sc.cavity.coating = synthetic_coating_curve();
      sc.cavity.reflectivity_override.reset();
      cfg.coating_source = *named;
    }
  }
  cavity.finish();

  Section write(doc, "write");
  std::optional<double> write_target;
  read_pair(write, sc.write_pair, sc.coupling_write, write_target);
  write.finish();

  Section read(doc, "read");
  std::optional<double> read_target;
  read_pair(read, sc.read_pair, sc.coupling_read, read_target);
  sc.read_delay_ns = read.number("read_delay_ns", sc.read_delay_ns);
  require(sc.read_delay_ns >= 0, "read.read_delay_ns", "must be >= 0");

  Section filters(doc, "filters");
  sc.fast_window.center_nm = filters.number("fast_center_nm", sc.fast_window.center_nm);
  sc.slow_window.center_nm = filters.number("slow_center_nm", sc.slow_window.center_nm);
  const double bw = filters.number("bandwidth_nm", sc.fast_window.bandwidth_nm);
  require(bw >= 0, "filters.bandwidth_nm", "must be >= 0");
  sc.fast_window.bandwidth_nm = sc.slow_window.bandwidth_nm = bw;
  filters.finish();

  double survival = 0.0;
  try {
    survival = sc.survival();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("cavity: cannot evaluate reflectivity at the storage wavelength: ") + e.what());
  }
  const double eta_w = translation_efficiency(conversion_angle(sc.coupling_write, sc.write_pair));
  const double eta_r = translation_efficiency(conversion_angle(sc.coupling_read, sc.read_pair));
  {
    const auto loss = read.optional_number("readout_loss_factor");
    const auto total = read.optional_number("target_total_efficiency");
    require(!(loss && total), "read.readout_loss_factor",
            "give either readout_loss_factor or target_total_efficiency, not both");
    if (loss) {
      require(*loss >= 0 && *loss <= 1, "read.readout_loss_factor", "must be in [0,1]");
      sc.readout_loss_factor = *loss;
    } else if (total) {
      require(*total >= 0 && *total <= 1, "read.target_total_efficiency", "must be in [0,1]");
      try {
        sc.readout_loss_factor = calibrated_readout_loss(*total, eta_w, eta_r, survival);
      } catch (const std::exception& e) {
        throw ConfigError(std::string("read.target_total_efficiency: ") + e.what());
      }
    }
  }
  read.finish();

  Section noise(doc, "noise");
  sc.noise.dark_rate_per_s = noise.number("dark_rate_per_s", sc.noise.dark_rate_per_s);
  require(sc.noise.dark_rate_per_s >= 0, "noise.dark_rate_per_s", "must be >= 0");
  sc.noise.gate_ns = noise.number("gate_ns", sc.round_trip_ns());
  require(sc.noise.gate_ns >= 0, "noise.gate_ns", "must be >= 0");
  {
    const auto a = noise.optional_number("raman_photons_per_nj");
    const auto b = noise.optional_number("stored_readout_fraction");
    const auto target = noise.optional_number("target_photons_per_pulse");
    require(!(target && (a || b)), "noise.target_photons_per_pulse",
            "give either a target or raman_photons_per_nj/stored_readout_fraction, not both");
    if (a) {
      require(*a >= 0, "noise.raman_photons_per_nj", "must be >= 0");
      sc.noise.raman_photons_per_nj = *a;
    }
    if (b) {
      require(*b >= 0, "noise.stored_readout_fraction", "must be >= 0");
      sc.noise.stored_readout_fraction = *b;
    }
    if (target) {
      const double t = *target;
      require(t >= 0, "noise.target_photons_per_pulse", "must be >= 0");
      const double ws = sc.write_pair.q_energy_nj + sc.write_pair.p_energy_nj;
      const double rs = sc.read_pair.q_energy_nj + sc.read_pair.p_energy_nj;
      const double gate = sc.noise.gate_ns;
      const double dark = sc.noise.dark_rate_per_s;
      if (ws + rs > 0) {
        sc.noise = NoiseModel::calibrated(t, ws, rs, eta_r * survival);
      } else {
        sc.noise = NoiseModel{};
      }
      sc.noise.gate_ns = gate;
      sc.noise.dark_rate_per_s = dark;
    }
  }
  noise.finish();

  Section detection(doc, "detection");
  sc.chain.facet_transmission = detection.number("facet_transmission", sc.chain.facet_transmission);
  sc.chain.collection_efficiency = detection.number("collection_efficiency", sc.chain.collection_efficiency);
  sc.chain.spcm_efficiency = detection.number("spcm_efficiency", sc.chain.spcm_efficiency);
  for (const char* k : {"facet_transmission", "collection_efficiency", "spcm_efficiency"}) {
    const double v = k[0] == 'f' ? sc.chain.facet_transmission
                                 : (k[0] == 'c' ? sc.chain.collection_efficiency : sc.chain.spcm_efficiency);
    require(v >= 0 && v <= 1, std::string("detection.") + k, "must be in [0,1]");
  }
  detection.finish();

  Section run(doc, "run");
  sc.n_trials = run.integer("trials", sc.n_trials);
  sc.rng_seed = run.integer("seed", sc.rng_seed);
  sc.n_bins = run.integer("bins", sc.n_bins);
  sc.workers = static_cast<unsigned>(run.integer("workers", sc.workers));
  require(sc.n_trials >= 1, "run.trials", "must be >= 1");
  require(sc.n_bins >= 1, "run.bins", "must be >= 1");
  run.finish();

  Section mux(doc, "multiplex");
  auto& m = cfg.multiplex;
  m.herald_probability = mux.number("herald_probability", m.herald_probability);
  m.n_bins = mux.integer("n_bins", m.n_bins);
  m.memory_total_efficiency = mux.number("memory_total_efficiency", m.memory_total_efficiency);
  m.survival_per_round_trip = mux.number("survival_per_round_trip", m.survival_per_round_trip);
  m.source_heralding_efficiency = mux.number("source_heralding_efficiency", m.source_heralding_efficiency);
  cfg.multiplex_n_max = mux.integer("n_max", cfg.multiplex_n_max);
  for (const auto& [k, v] : {std::pair{"herald_probability", m.herald_probability},
                             {"memory_total_efficiency", m.memory_total_efficiency},
                             {"survival_per_round_trip", m.survival_per_round_trip},
                             {"source_heralding_efficiency", m.source_heralding_efficiency}})
    require(v >= 0 && v <= 1, std::string("multiplex.") + k, "must be in [0,1]");
  require(m.n_bins >= 1, "multiplex.n_bins", "must be >= 1");
  require(cfg.multiplex_n_max >= 1, "multiplex.n_max", "must be >= 1");
  mux.finish();

  sc.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "': " + e.what());
  }
  return config_from_json(doc, path.parent_path());
}

json config_to_json(const RunConfig& cfg) {
  const ExperimentScenario& sc = cfg.scenario;
  json cavity = {{"length_m", sc.cavity.length_m},
                 {"group_index", sc.cavity.group_index},
                 {"loss_db_per_km", sc.cavity.fiber_loss_db_per_km},
                 {"extra_loss_db_per_round_trip", sc.cavity.extra_loss_db_per_round_trip}};
  if (cfg.coating_source) {
    cavity[*cfg.coating_source == "synthetic" ? "coating" : "coating_csv"] = *cfg.coating_source;
  } else if (sc.cavity.reflectivity_override) {
    cavity["reflectivity"] = *sc.cavity.reflectivity_override;
  }
  json read = pair_json(sc.read_pair, sc.coupling_read);
  read["read_delay_ns"] = sc.read_delay_ns;
  read["readout_loss_factor"] = sc.readout_loss_factor;
  return {
      {"signal",
       {{"wavelength_nm", sc.coupling_write.signal_wavelength_nm},
        {"bandwidth_nm", cfg.signal_bandwidth_nm},
        {"duration_ps", sc.coupling_write.signal_duration_ps},
        {"input_mean_photons", sc.input_mean_photons}}},
      {"cavity", cavity},
      {"write", pair_json(sc.write_pair, sc.coupling_write)},
      {"read", read},
      {"noise",
       {{"raman_photons_per_nj", sc.noise.raman_photons_per_nj},
        {"stored_readout_fraction", sc.noise.stored_readout_fraction},
        {"dark_rate_per_s", sc.noise.dark_rate_per_s},
        {"gate_ns", sc.noise.gate_ns}}},
      {"detection",
       {{"facet_transmission", sc.chain.facet_transmission},
        {"collection_efficiency", sc.chain.collection_efficiency},
        {"spcm_efficiency", sc.chain.spcm_efficiency}}},
      {"filters",
       {{"fast_center_nm", sc.fast_window.center_nm},
        {"slow_center_nm", sc.slow_window.center_nm},
        {"bandwidth_nm", sc.fast_window.bandwidth_nm}}},
      {"run", {{"trials", sc.n_trials}, {"seed", sc.rng_seed}, {"bins", sc.n_bins}, {"workers", sc.workers}}},
      {"multiplex",
       {{"herald_probability", cfg.multiplex.herald_probability},
        {"n_bins", cfg.multiplex.n_bins},
        {"memory_total_efficiency", cfg.multiplex.memory_total_efficiency},
        {"survival_per_round_trip", cfg.multiplex.survival_per_round_trip},
        {"source_heralding_efficiency", cfg.multiplex.source_heralding_efficiency},
        {"n_max", cfg.multiplex_n_max}}},
  };
}

bool RunConfig::operator==(const RunConfig& other) const {
  // Serialized form covers every field except coating samples.
  if (config_to_json(*this) != config_to_json(other)) return false;
  const auto& a = scenario.cavity.coating;
  const auto& b = other.scenario.cavity.coating;
  if (a.has_value() != b.has_value()) return false;
  if (!a) return true;
  if (a->lambda0_nm() != b->lambda0_nm() || a->samples().size() != b->samples().size()) return false;
  for (std::size_t i = 0; i < a->samples().size(); ++i) {
    const auto& x = a->samples()[i];
    const auto& y = b->samples()[i];
    if (x.wavelength_nm != y.wavelength_nm || x.transmission != y.transmission || x.absorption != y.absorption)
      return false;
  }
  return true;
}

}  // namespace fibermem
