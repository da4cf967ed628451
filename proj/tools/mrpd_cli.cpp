// mrpd: command-line driver for simulation, reconstruction, adapter
// fine-tuning, ablation sweeps, and artifact validation.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mrpd/autocodec.hpp"
#include "mrpd/io.hpp"
#include "mrpd/kspace.hpp"
#include "mrpd/masks.hpp"
#include "mrpd/multicoil.hpp"
#include "mrpd/phantom.hpp"
#include "mrpd/prior.hpp"
#include "mrpd/quality.hpp"
#include "mrpd/sampler.hpp"
#include "mrpd/types.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mrpd;

namespace {

constexpr const char* kVersion = "1.0.0";

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "image.height",
      "image.width",
      "phantom.seed",
      "phantom.phase_smoothness",
      "phantom.phase_seed",
      "mask.pattern",
      "mask.accel",
      "mask.acs_fraction",
      "mask.seed",
      "measure.noise_sigma",
      "measure.seed",
      "schedule.beta_start",
      "schedule.beta_end",
      "sampler.t0",
      "sampler.t_ws",
      "sampler.lambda",
      "sampler.gamma",
      "sampler.T",
      "sampler.dc_every",
      "sampler.noise_seed",
      "sampler.phase_seed",
      "sampler.record_trajectory",
      "sampler.squared_objective",
      "sampler.full_jacobian",
      "sampler.mode",
      "sampler.rpm",
      "prior.type",
      "prior.tau",
      "prior.components",
      "prior.seed_base",
      "codec.type",
      "codec.levels",
      "codec.patch",
      "codec.m",
      "codec.c_in",
      "codec.core_depth",
      "codec.seed",
      "codec.path",
      "coils.count",
      "coils.seed",
      "adapter.ridge",
      "adapter.train_count",
      "adapter.test_count",
      "adapter.seed_base",
      "ablate.lambda_grid",
      "ablate.seeds",
      "ablate.pareto_t0_grid",
      "ablate.pareto_tws_grid",
      "input.kdata",
      "input.mask",
      "input.reference",
  };
  return keys;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<double> parse_grid(const std::string& csv, const std::string& key) {
  std::vector<double> out;
  std::istringstream in(csv);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    try {
      size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "' has a non-numeric entry: " + tok);
    }
  }
  if (out.empty()) throw ConfigError("config key '" + key + "' is empty");
  return out;
}

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

struct Setup {
  Config cfg;
  fs::path out;
  json manifest;
  json wall;  // wall-time fields, kept apart from the reproducible payload
};

Setup make_setup(const std::string& config_path, const std::string& out_dir,
                 std::optional<uint64_t> seed_override, const std::string& command) {
  Setup s;
  s.cfg = Config::load(config_path, known_keys());
  if (seed_override) {
    s.cfg.set("phantom.seed", std::to_string(*seed_override));
    s.cfg.set("sampler.noise_seed", std::to_string(*seed_override));
    s.cfg.set("sampler.phase_seed", std::to_string(*seed_override + 1));
    s.cfg.set("mask.seed", std::to_string(*seed_override + 2));
    s.cfg.set("measure.seed", std::to_string(*seed_override + 3));
  }
  s.out = out_dir;
  fs::create_directories(s.out);
  char hash_hex[19];
  std::snprintf(hash_hex, sizeof(hash_hex), "0x%016llx",
                static_cast<unsigned long long>(s.cfg.hash()));
  s.manifest["command"] = command;
  s.manifest["config_hash"] = hash_hex;
  s.manifest["versions"] = {{"mrpd", kVersion}, {"fld_format", 1}};
  json seeds;
  for (const auto& [k, v] : s.cfg.values())
    if (k.find("seed") != std::string::npos) seeds[k] = v;
  s.manifest["seeds"] = seeds;
  return s;
}

void finish(Setup& s) {
  s.manifest["wall_time_s"] = s.wall;
  write_text_atomic((s.out / "manifest.json").string(), s.manifest.dump(2) + "\n");
}

NoiseSchedule schedule_from(const Config& c) {
  return linear_schedule(c.get_int("sampler.T", 1000), c.get_double("schedule.beta_start", 1e-4),
                         c.get_double("schedule.beta_end", 0.02));
}

SamplerConfig sampler_from(const Config& c) {
  SamplerConfig s;
  s.t0 = c.get_double("sampler.t0", 0.4);
  s.t_ws = c.get_double("sampler.t_ws", 0.3);
  s.lambda = c.get_double("sampler.lambda", 1.0);
  s.gamma = c.get_double("sampler.gamma", 0.01);
  s.T = c.get_int("sampler.T", 1000);
  s.dc_every = c.get_int("sampler.dc_every", 2);
  s.noise_seed = c.get_seed("sampler.noise_seed", 1);
  s.phase_seed = c.get_seed("sampler.phase_seed", 2);
  s.record_trajectory = c.get_bool("sampler.record_trajectory", false);
  s.squared_objective = c.get_bool("sampler.squared_objective", false);
  s.full_jacobian = c.get_bool("sampler.full_jacobian", false);
  ValidationResult v = validate(s);
  if (!v.ok) throw ConfigError(v.message);
  return s;
}

Codec codec_from(const Config& c) {
  std::string type = c.get_string("codec.type", "identity");
  if (type == "identity") return make_identity_codec();
  if (type == "haar") return make_haar_codec(c.get_int("codec.levels", 1));
  if (type == "patch_linear")
    return make_patch_linear_codec(c.get_int("codec.patch", 4), c.get_int("codec.m", 16),
                                   c.get_int("codec.c_in", 3), c.get_int("codec.core_depth", 120),
                                   c.get_seed("codec.seed", 7));
  if (type == "file") {
    std::string path = c.get_string("codec.path", "");
    if (path.empty()) throw ConfigError("codec.type = file requires codec.path");
    return read_codec(path);
  }
  throw ConfigError("unknown codec.type: " + type);
}

std::unique_ptr<DenoisingPrior> prior_from(const Config& c, int h, int w, const Codec& codec) {
  std::string type = c.get_string("prior.type", "shrinkage");
  if (type == "shrinkage")
    return std::make_unique<ShrinkagePrior>(c.get_double("prior.tau", 0.0));
  if (type == "gmm") {
    int n = c.get_int("prior.components", 4);
    if (n < 1) throw ConfigError("prior.components must be >= 1");
    uint64_t base = c.get_seed("prior.seed_base", 100);
    std::vector<uint64_t> seeds;
    for (int i = 0; i < n; ++i) seeds.push_back(base + 2ull * i);  // even: prior set
    return std::make_unique<GaussianMixturePrior>(build_prior_from_phantoms(h, w, codec, seeds));
  }
  throw ConfigError("unknown prior.type: " + type);
}

struct Scene {
  ComplexField truth;
  RealField truth_mag;
  SamplingMask mask;
};

Scene simulate_scene(const Config& c) {
  Scene sc;
  int h = c.get_int("image.height", 64);
  int w = c.get_int("image.width", 64);
  sc.truth = phantom_complex(h, w, c.get_seed("phantom.seed", 11),
                             c.get_double("phantom.phase_smoothness", 2.0),
                             c.get_seed("phantom.phase_seed", 12));
  sc.truth_mag = magnitude(sc.truth);
  sc.mask = generate_mask(mask_pattern_from_string(c.get_string("mask.pattern", "uniform1d")), h,
                          w, c.get_double("mask.accel", 4.0),
                          c.get_double("mask.acs_fraction", 0.08), c.get_seed("mask.seed", 13));
  return sc;
}

void write_trajectory(const fs::path& path, const Trajectory& traj) {
  std::ostringstream out;
  out << "t\tpsnr_db\tl2_residual\n";
  for (const TrajectoryStep& s : traj.steps) {
    out << s.t << "\t" << (s.psnr_db ? fmt(*s.psnr_db) : std::string("nan")) << "\t"
        << fmt(s.l2_residual) << "\n";
  }
  write_text_atomic(path.string(), out.str());
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 std::optional<uint64_t> seed) {
  Setup s = make_setup(config_path, out_dir, seed, "simulate");
  Timer timer;
  Scene sc = simulate_scene(s.cfg);
  Measurement meas = measure(sc.truth, sc.mask, s.cfg.get_double("measure.noise_sigma", 0.0),
                             s.cfg.get_seed("measure.seed", 14));
  write_fld((s.out / "phantom.fld").string(), sc.truth);
  write_fld((s.out / "phantom_mag.fld").string(), sc.truth_mag);
  write_fld((s.out / "mask.fld").string(), sc.mask);
  write_fld((s.out / "kdata.fld").string(), meas.kdata);
  write_pgm((s.out / "phantom.pgm").string(), sc.truth_mag);
  RealField mask_img(sc.mask.height, sc.mask.width);
  for (size_t i = 0; i < sc.mask.keep.size(); ++i) mask_img.data[i] = sc.mask.keep[i];
  write_pgm((s.out / "mask.pgm").string(), mask_img);
  write_pgm((s.out / "zero_filled.pgm").string(), magnitude(ifft2c(meas.kdata)));
  s.manifest["metrics"] = {{"mask_kept", sc.mask.kept_count()},
                           {"mask_achieved_accel", sc.mask.achieved_accel()},
                           {"mask_nominal_accel", sc.mask.accel_nominal}};
  s.wall["simulate"] = timer.elapsed();
  finish(s);
  return 0;
}

int cmd_reconstruct(const std::string& config_path, const std::string& out_dir,
                    std::optional<uint64_t> seed) {
  Setup s = make_setup(config_path, out_dir, seed, "reconstruct");
  Timer timer;
  const Config& c = s.cfg;
  int coils = c.get_int("coils.count", 1);

  Codec codec = codec_from(c);
  NoiseSchedule sched = schedule_from(c);
  SamplerConfig cfg = sampler_from(c);

  Measurement meas;
  std::optional<RealField> reference;
  int h = 0, w = 0;
  std::optional<Scene> scene;
  if (c.has("input.kdata")) {
    meas.kdata = read_fld_complex(c.get_string("input.kdata", ""), Domain::KSpace);
    meas.mask = read_fld_mask(c.get_string("input.mask", ""));
    meas.noise_sigma = c.get_double("measure.noise_sigma", 0.0);
    if (c.has("input.reference"))
      reference = read_fld_real(c.get_string("input.reference", ""), /*magnitude=*/true);
    h = meas.kdata.height;
    w = meas.kdata.width;
  } else {
    scene = simulate_scene(c);
    h = scene->truth.height;
    w = scene->truth.width;
    reference = scene->truth_mag;
    if (coils == 1)
      meas = measure(scene->truth, scene->mask, c.get_double("measure.noise_sigma", 0.0),
                     c.get_seed("measure.seed", 14));
  }

  std::unique_ptr<DenoisingPrior> prior = prior_from(c, h, w, codec);

  RealField out_img;
  Trajectory traj;
  s.wall["setup"] = timer.elapsed();
  Timer recon_timer;
  if (coils > 1) {
    if (!scene) throw ConfigError("multi-coil reconstruction requires simulated input");
    CoilSet sens = simulate_sensitivities(h, w, coils, c.get_seed("coils.seed", 21));
    std::vector<Measurement> mc =
        measure_multicoil(scene->truth, sens, scene->mask,
                          c.get_double("measure.noise_sigma", 0.0), c.get_seed("measure.seed", 14));
    out_img = reconstruct_ssos(mc, *prior, codec, sched, cfg);
  } else {
    std::string mode = c.get_string("sampler.mode", "hard_to_soft");
    bool rpm = c.get_bool("sampler.rpm", true);
    if (mode == "hard_to_soft" && rpm) {
      ReconstructResult r =
          reconstruct(meas, *prior, codec, sched, cfg, reference ? &*reference : nullptr);
      out_img = std::move(r.image);
      traj = std::move(r.trajectory);
    } else {
      GuidanceMode gm = mode == "hard_only"   ? GuidanceMode::HardOnly
                        : mode == "soft_only" ? GuidanceMode::SoftOnly
                        : mode == "hard_to_soft"
                            ? GuidanceMode::HardToSoft
                            : throw ConfigError("unknown sampler.mode: " + mode);
      SamplerConfig tcfg = cfg;
      tcfg.record_trajectory = true;
      traj = guidance_mode_ablation(meas, *prior, codec, sched, tcfg, gm, rpm,
                                    reference ? &*reference : nullptr);
      if (!traj.steps.empty() && traj.steps.back().clean_estimate)
        out_img = *traj.steps.back().clean_estimate;
    }
  }
  s.wall["reconstruct"] = recon_timer.elapsed();

  write_fld((s.out / "reconstruction.fld").string(), out_img);
  write_pgm((s.out / "reconstruction.pgm").string(), out_img);
  if (!traj.steps.empty()) write_trajectory(s.out / "trajectory.tsv", traj);

  json metrics;
  metrics["steps"] = static_cast<int>(std::floor(cfg.t0 * cfg.T));
  if (reference) {
    metrics["psnr_db"] = psnr(out_img, *reference);
    metrics["ssim"] = ssim(out_img, *reference);
  }
  s.manifest["metrics"] = metrics;
  finish(s);
  return 0;
}

int cmd_finetune_adapter(const std::string& config_path, const std::string& out_dir,
                         std::optional<uint64_t> seed) {
  Setup s = make_setup(config_path, out_dir, seed, "finetune-adapter");
  Timer timer;
  const Config& c = s.cfg;
  int h = c.get_int("image.height", 64);
  int w = c.get_int("image.width", 64);
  Codec codec = codec_from(c);
  if (codec.variant != CodecVariant::PatchLinear)
    throw ConfigError("finetune-adapter requires codec.type = patch_linear or file");

  uint64_t base = c.get_seed("adapter.seed_base", 100);
  int n_train = c.get_int("adapter.train_count", 8);
  int n_test = c.get_int("adapter.test_count", 4);
  std::vector<RealField> train, test;
  for (int i = 0; i < n_train; ++i) {
    RealField m = shepp_logan(h, w, base + 2ull * i);  // even seeds: training
    train.push_back(normalize(m, norm_range(m)));
  }
  for (int i = 0; i < n_test; ++i) {
    RealField m = shepp_logan(h, w, base + 2ull * i + 1);  // odd seeds: held out
    test.push_back(normalize(m, norm_range(m)));
  }

  double err_train_pre = codec_reconstruction_error(codec, train);
  double err_test_pre = codec_reconstruction_error(codec, test);
  Codec adapted = adapt_boundary(codec, train, c.get_double("adapter.ridge", 1e-6));
  double err_train_post = codec_reconstruction_error(adapted, train);
  double err_test_post = codec_reconstruction_error(adapted, test);

  write_codec((s.out / "codec.json").string(), adapted);

  std::string core_blob;
  for (const auto& layer : adapted.core_layers)
    core_blob.append(reinterpret_cast<const char*>(layer.data()),
                     layer.size() * sizeof(double));
  char core_hex[19];
  std::snprintf(core_hex, sizeof(core_hex), "0x%016llx",
                static_cast<unsigned long long>(fnv1a(core_blob)));

  s.manifest["metrics"] = {{"train_error_before", err_train_pre},
                           {"train_error_after", err_train_post},
                           {"test_error_before", err_test_pre},
                           {"test_error_after", err_test_post},
                           {"core_hash", core_hex},
                           {"boundary_parameters", adapted.boundary_parameters()},
                           {"total_parameters", adapted.total_parameters()}};
  s.wall["finetune"] = timer.elapsed();
  finish(s);
  return 0;
}

int cmd_ablate(const std::string& config_path, const std::string& out_dir,
               std::optional<uint64_t> seed) {
  Setup s = make_setup(config_path, out_dir, seed, "ablate");
  const Config& c = s.cfg;
  Codec codec = codec_from(c);
  NoiseSchedule sched = schedule_from(c);
  SamplerConfig base = sampler_from(c);
  Scene sc = simulate_scene(c);
  std::unique_ptr<DenoisingPrior> prior = prior_from(c, sc.truth.height, sc.truth.width, codec);
  Measurement meas = measure(sc.truth, sc.mask, c.get_double("measure.noise_sigma", 0.0),
                             c.get_seed("measure.seed", 14));
  int n_seeds = c.get_int("ablate.seeds", 5);
  json metrics;

  {  // lambda sweep: mean PSNR over phase seeds per lambda
    Timer timer;
    std::vector<double> grid = parse_grid(c.get_string("ablate.lambda_grid", "0,0.5,1"),
                                          "ablate.lambda_grid");
    std::ostringstream tab;
    tab << "lambda\tmean_psnr_db\n";
    for (double lam : grid) {
      double sum = 0.0;
      for (int i = 0; i < n_seeds; ++i) {
        SamplerConfig cfg = base;
        cfg.lambda = lam;
        cfg.phase_seed = base.phase_seed + 1000ull * (i + 1);
        sum += psnr(reconstruct(meas, *prior, codec, sched, cfg).image, sc.truth_mag);
      }
      tab << fmt(lam) << "\t" << fmt(sum / n_seeds) << "\n";
    }
    write_text_atomic((s.out / "lambda_sweep.tsv").string(), tab.str());
    s.wall["lambda_sweep"] = timer.elapsed();
  }

  {  // guidance-mode comparison
    Timer timer;
    std::ostringstream tab;
    tab << "mode\tfinal_psnr_db\n";
    for (GuidanceMode m :
         {GuidanceMode::HardOnly, GuidanceMode::SoftOnly, GuidanceMode::HardToSoft}) {
      Trajectory t =
          guidance_mode_ablation(meas, *prior, codec, sched, base, m, true, &sc.truth_mag);
      double final_psnr = t.steps.empty() || !t.steps.back().psnr_db
                              ? std::numeric_limits<double>::quiet_NaN()
                              : *t.steps.back().psnr_db;
      tab << to_string(m) << "\t" << fmt(final_psnr) << "\n";
    }
    write_text_atomic((s.out / "guidance_modes.tsv").string(), tab.str());
    s.wall["guidance_modes"] = timer.elapsed();
  }

  {  // (t0, t_ws) Pareto sweep
    Timer timer;
    std::vector<double> t0s =
        parse_grid(c.get_string("ablate.pareto_t0_grid", "0.2,0.4"), "ablate.pareto_t0_grid");
    std::vector<double> twss =
        parse_grid(c.get_string("ablate.pareto_tws_grid", "0.1"), "ablate.pareto_tws_grid");
    std::vector<std::pair<double, double>> grid;
    for (double t0 : t0s)
      for (double tws : twss)
        if (tws < t0) grid.emplace_back(t0, tws);
    std::vector<ParetoPoint> table =
        pareto_sweep({meas}, {sc.truth_mag}, *prior, codec, sched, base, grid);
    std::ostringstream tab;
    tab << "t0\tt_ws\tsteps\tmean_psnr_db\twall_time_s\tpareto\n";
    for (const ParetoPoint& p : table)
      tab << fmt(p.t0) << "\t" << fmt(p.t_ws) << "\t"
          << static_cast<int>(std::floor(p.t0 * base.T)) << "\t" << fmt(p.mean_psnr_db) << "\t"
          << fmt(p.wall_time_s) << "\t" << (p.pareto_efficient ? 1 : 0) << "\n";
    write_text_atomic((s.out / "pareto.tsv").string(), tab.str());
    s.wall["pareto"] = timer.elapsed();
  }

  s.manifest["metrics"] = metrics;
  finish(s);
  return 0;
}

int cmd_validate(const std::vector<std::string>& paths) {
  for (const std::string& p : paths) {
    std::string ext = fs::path(p).extension().string();
    ValidationResult v;
    if (ext == ".json") {
      Codec c = read_codec(p);
      v = validate(c);
    } else {
      // Try each FLD reader in turn.
      try {
        SamplingMask m = read_fld_mask(p);
        v = validate(m);
      } catch (const IoError&) {
        try {
          v = validate(read_fld_real(p));
        } catch (const IoError&) {
          try {
            v = validate(read_fld_complex(p, Domain::Image));
          } catch (const IoError&) {
            v = validate(read_fld_latent(p));
          }
        }
      }
    }
    if (!v.ok) {
      std::cerr << p << ": " << v.message << "\n";
      return 3;
    }
    std::cout << p << ": ok\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MRPD reconstruction toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".";
  std::optional<uint64_t> seed_override;
  int threads = 0;
  std::vector<std::string> validate_paths;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* copt = sub->add_option("--config", config_path, "Config file (key = value lines)");
    if (needs_config) copt->required();
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--threads", threads, "Worker thread count (0 = default)");
    sub->add_option("--seed", seed_override, "Override the run seeds from the config");
  };

  CLI::App* c_sim = app.add_subcommand("simulate", "Generate phantom, mask, and measurement");
  add_common(c_sim, true);
  CLI::App* c_rec = app.add_subcommand("reconstruct", "Run the posterior sampler");
  add_common(c_rec, true);
  CLI::App* c_fin = app.add_subcommand("finetune-adapter", "Adapt codec boundary layers");
  add_common(c_fin, true);
  CLI::App* c_abl = app.add_subcommand("ablate", "Lambda / guidance-mode / Pareto sweeps");
  add_common(c_abl, true);
  CLI::App* c_val = app.add_subcommand("validate", "Check artifact files");
  c_val->add_option("files", validate_paths, "FLD or codec files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#endif

  try {
    if (c_sim->parsed()) return cmd_simulate(config_path, out_dir, seed_override);
    if (c_rec->parsed()) return cmd_reconstruct(config_path, out_dir, seed_override);
    if (c_fin->parsed()) return cmd_finetune_adapter(config_path, out_dir, seed_override);
    if (c_abl->parsed()) return cmd_ablate(config_path, out_dir, seed_override);
    if (c_val->parsed()) return cmd_validate(validate_paths);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
