/* Copyright 2026 The audiostyle Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iomanip>
#include <optional>

#include "audiostyle/audio_io.hpp"
#include "audiostyle/error.hpp"
#include "audiostyle/phase_recon.hpp"
#include "audiostyle/spectrogram_export.hpp"
#include "audiostyle/style_transfer.hpp"
#include "audiostyle/trainer.hpp"

namespace audiostyle::cli {

namespace fs = std::filesystem;

namespace {

struct AnalysisFlags {
  std::size_t fft_size = 512;
  std::size_t hop = 256;

  void attach(CLI::App* app) {
    app->add_option("--fft-size", fft_size, "FFT size (power of two)")->capture_default_str();
    app->add_option("--hop", hop, "Hop size in samples (must divide the FFT size)")
        ->capture_default_str();
  }
  FftConfig config() const {
    FftConfig cfg{fft_size, hop};
    cfg.validate();
    return cfg;
  }
};

std::vector<std::size_t> parse_widths(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != item.size() || v == 0)
      throw CLI::ValidationError("--channels", "expected comma-separated positive integers");
    out.push_back(v);
  }
  if (out.empty()) throw CLI::ValidationError("--channels", "no widths given");
  return out;
}

/// Knobs shared by transfer and figure1.
struct TransferFlags {
  std::string content;
  std::string style;
  std::string phase = "spsi+gl";
  std::size_t gl_iters = kDefaultGriffinLimIterations;
  std::size_t iterations = 500;
  double alpha = 1.0;
  double beta = 1e3;
  double step_size = 0.05;
  double noise_level = 0.1;
  std::uint64_t seed = 0;
  std::size_t content_layer = 2;
  std::vector<std::size_t> style_layers = {1, 2};
  std::string arch = "twolayer";
  std::string channels;
  std::size_t kernel_width = kDefaultKernelWidth;
  AnalysisFlags analysis;

  void attach(CLI::App* app) {
    app->add_option("--content", content, "Content WAV file")->required()->check(CLI::ExistingFile);
    app->add_option("--style", style, "Style WAV file")->required()->check(CLI::ExistingFile);
    app->add_option("--phase", phase, "Phase reconstruction: griffinlim, spsi or spsi+gl")
        ->check(CLI::IsMember({"griffinlim", "spsi", "spsi+gl"}))
        ->capture_default_str();
    app->add_option("--gl-iters", gl_iters, "Griffin-Lim iterations")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_option("--iterations", iterations, "Optimization iterations")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_option("--alpha", alpha, "Content loss weight")->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    app->add_option("--beta", beta, "Style loss weight")->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    app->add_option("--step-size", step_size, "Adam step size")->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_option("--noise-level", noise_level, "Initial noise range as a fraction of the content maximum")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    app->add_option("--seed", seed, "Seed for the initial noise")->capture_default_str();
    app->add_option("--content-layer", content_layer, "Block (1-based) used for content")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_option("--style-layers", style_layers, "Blocks (1-based) used for style")
        ->delimiter(',')
        ->capture_default_str();
    app->add_option("--arch", arch, "Random-weight architecture: twolayer (conv/relu/pool blocks) or single (one conv + relu)")
        ->check(CLI::IsMember({"twolayer", "single"}))
        ->capture_default_str();
    app->add_option("--channels", channels, "Comma-separated block widths for random weights (default 2048,64; single: 4096)");
    app->add_option("--kernel-width", kernel_width, "Temporal kernel width for random weights (odd)")
        ->capture_default_str();
    analysis.attach(app);
  }

  std::vector<LayerSpec> architecture() const {
    const std::size_t bins = analysis.fft_size / 2 + 1;
    if (arch == "single") {
      const std::size_t width = channels.empty() ? 4096 : parse_widths(channels).front();
      return single_layer_architecture(bins, width, kernel_width);
    }
    const std::vector<std::size_t> widths =
        channels.empty() ? std::vector<std::size_t>{2048, 64} : parse_widths(channels);
    return pooled_architecture(bins, widths, kernel_width);
  }

  TransferConfig config(InitMode init) const {
    TransferConfig cfg;
    cfg.alpha = alpha;
    cfg.beta = beta;
    cfg.content_layer = content_layer;
    cfg.style_layers = style_layers;
    cfg.iterations = iterations;
    cfg.step_size = step_size;
    cfg.init_mode = init;
    cfg.noise_level = noise_level;
    cfg.seed = seed;
    cfg.fft = analysis.config();
    cfg.architecture = architecture();
    return cfg;
  }

  ReconMethod method() const { return {*parse_recon_method(phase), gl_iters}; }
};

fs::path with_suffix(const fs::path& out, const std::string& suffix) {
  fs::path p = out;
  p.replace_extension();
  return p.string() + suffix;
}

struct Inputs {
  LogMagSpectrogram content;
  LogMagSpectrogram style;
};

Inputs load_inputs(const TransferFlags& flags) {
  const AudioBuffer content = read_wav(flags.content);
  const AudioBuffer style = read_wav(flags.style);
  if (content.sample_rate != style.sample_rate)
    throw Error(Errc::sample_rate_mismatch,
                "content sample rate " + std::to_string(content.sample_rate) +
                    " Hz differs from style sample rate " + std::to_string(style.sample_rate) +
                    " Hz");
  const FftConfig fft = flags.analysis.config();
  return {to_log_mag(stft(content, fft)), to_log_mag(stft(style, fft))};
}

/// Runs one transfer and writes <stem>.wav, <stem>.png and <stem>_loss.csv.
void transfer_and_write(const Inputs& in, const NetworkWeights& weights,
                        const TransferConfig& cfg, const ReconMethod& method,
                        const fs::path& wav_path) {
  const TransferResult result = run_transfer(in.content, in.style, weights, cfg);
  const MagSpectrogram mag = from_log_mag(result.output);
  const ReconstructionReport report = reconstruct(mag, method);
  write_wav(wav_path, report.signal);
  write_spectrogram_png(with_suffix(wav_path, ".png"), mag);
  write_loss_csv(with_suffix(wav_path, "_loss.csv"), result.loss_trace);
}

NetworkWeights feature_weights(const fs::path& path) {
  return NetworkWeights{std::move(load_weights(path).layers), std::nullopt};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectrogram style transfer with frequency bins as channels", "audiostyle"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::simple);

  // transfer
  TransferFlags transfer_flags;
  std::string transfer_out;
  std::string transfer_weights;
  std::uint64_t transfer_random_seed = 42;
  auto* transfer = app.add_subcommand("transfer", "Run one style transfer");
  transfer_flags.attach(transfer);
  transfer->add_option("--out", transfer_out, "Output WAV; PNG and loss CSV are written beside it")
      ->required();
  auto* weights_opt = transfer->add_option("--weights", transfer_weights, "ASTW weight file")
                          ->check(CLI::ExistingFile);
  auto* seed_opt = transfer->add_option("--random-seed", transfer_random_seed,
                                        "Seed for random weights (default 42 when --weights is absent)");
  weights_opt->excludes(seed_opt);

  // figure1
  TransferFlags fig_flags;
  std::string fig_weights;
  std::string fig_outdir;
  std::uint64_t fig_random_seed = 42;
  auto* figure1 = app.add_subcommand(
      "figure1", "Trained/random weights x with/without initial noise; writes a..d");
  fig_flags.attach(figure1);
  figure1->add_option("--weights", fig_weights, "Trained ASTW weight file")
      ->required()
      ->check(CLI::ExistingFile);
  figure1->add_option("--outdir", fig_outdir, "Output directory")->required();
  figure1->add_option("--random-seed", fig_random_seed, "Seed for the random-weight cells")
      ->capture_default_str();

  // reconstruct
  std::string recon_in, recon_out, recon_method = "griffinlim", recon_trace;
  std::size_t recon_iters = kDefaultGriffinLimIterations;
  AnalysisFlags recon_analysis;
  auto* recon = app.add_subcommand("reconstruct", "Rebuild a WAV from its magnitude spectrogram");
  recon->add_option("--in", recon_in, "Input WAV")->required()->check(CLI::ExistingFile);
  recon->add_option("--out", recon_out, "Output WAV")->required();
  recon->add_option("--method", recon_method, "griffinlim, spsi or spsi+gl")
      ->check(CLI::IsMember({"griffinlim", "spsi", "spsi+gl"}))
      ->capture_default_str();
  recon->add_option("--iters", recon_iters, "Griffin-Lim iterations")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  recon->add_option("--trace", recon_trace, "Write the convergence trace CSV here");
  recon_analysis.attach(recon);

  // train
  std::string train_data, train_manifest, train_out, train_log, train_channels = "64,16";
  TrainConfig train_cfg;
  std::size_t train_classes = 0;
  AnalysisFlags train_analysis;
  auto* trainer = app.add_subcommand("train", "Train the classifier used for trained-weight transfer");
  trainer->add_option("--data", train_data, "Directory holding the WAV files")
      ->required()
      ->check(CLI::ExistingDirectory);
  trainer->add_option("--manifest", train_manifest, "CSV of filename,class_id")
      ->required()
      ->check(CLI::ExistingFile);
  trainer->add_option("--out", train_out, "Output ASTW weight file")->required();
  trainer->add_option("--epochs", train_cfg.epochs, "Training epochs")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  trainer->add_option("--batch-size", train_cfg.batch_size, "Minibatch size")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  trainer->add_option("--step-size", train_cfg.step_size, "Adam step size")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  trainer->add_option("--seed", train_cfg.seed, "Seed for init and shuffling")->capture_default_str();
  trainer->add_option("--aux-weight", train_cfg.aux_weight, "Weight of the spectral-centroid task")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  trainer->add_option("--channels", train_channels, "Comma-separated conv block widths")
      ->capture_default_str();
  trainer->add_option("--kernel-width", train_cfg.kernel_width, "Temporal kernel width (odd)")
      ->capture_default_str();
  trainer->add_option("--num-classes", train_classes, "Main-task classes (0 = max class id + 1)")
      ->capture_default_str();
  trainer->add_option("--log", train_log, "Write the per-epoch training log CSV here");
  train_analysis.attach(trainer);

  // spectrogram
  std::string spec_in, spec_out, spec_csv;
  AnalysisFlags spec_analysis;
  auto* spectrogram = app.add_subcommand("spectrogram", "Render a WAV as a spectrogram PNG");
  spectrogram->add_option("--in", spec_in, "Input WAV")->required()->check(CLI::ExistingFile);
  spectrogram->add_option("--out", spec_out, "Output PNG")->required();
  spectrogram->add_option("--csv", spec_csv, "Also write magnitudes as CSV here");
  spec_analysis.attach(spectrogram);

  for (auto* sub : app.get_subcommands({})) {
    sub->get_formatter()->column_width(32);
  }

  std::vector<std::string> argv_store;
  argv_store.reserve(args.size() + 1);
  argv_store.push_back("audiostyle");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
    if (transfer->parsed() && !transfer_flags.channels.empty()) parse_widths(transfer_flags.channels);
    if (figure1->parsed() && !fig_flags.channels.empty()) parse_widths(fig_flags.channels);
    if (trainer->parsed()) train_cfg.widths = parse_widths(train_channels);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (transfer->parsed()) {
      const Inputs in = load_inputs(transfer_flags);
      TransferConfig cfg = transfer_flags.config(InitMode::content);
      NetworkWeights weights = transfer_weights.empty()
                                   ? init_random(cfg.architecture, transfer_random_seed)
                                   : feature_weights(transfer_weights);
      const fs::path wav = transfer_out;
      transfer_and_write(in, weights, cfg, transfer_flags.method(), wav);
      out << "wrote " << wav.string() << ' ' << with_suffix(wav, ".png").string() << ' '
          << with_suffix(wav, "_loss.csv").string() << '\n';
    } else if (figure1->parsed()) {
      const Inputs in = load_inputs(fig_flags);
      const NetworkWeights trained = feature_weights(fig_weights);
      const NetworkWeights random = init_random(trained.architecture(), fig_random_seed);
      fs::create_directories(fig_outdir);
      struct Cell {
        const char* name;
        const NetworkWeights* weights;
        InitMode init;
      };
      const Cell cells[] = {{"a", &trained, InitMode::content},
                            {"b", &random, InitMode::content},
                            {"c", &trained, InitMode::content_plus_noise},
                            {"d", &random, InitMode::content_plus_noise}};
      for (const Cell& cell : cells) {
        const TransferConfig cfg = fig_flags.config(cell.init);
        const fs::path wav = fs::path(fig_outdir) / (std::string(cell.name) + ".wav");
        transfer_and_write(in, *cell.weights, cfg, fig_flags.method(), wav);
        out << "wrote " << wav.string() << '\n';
      }
    } else if (recon->parsed()) {
      const AudioBuffer input = read_wav(recon_in);
      const MagSpectrogram target = magnitude(stft(input, recon_analysis.config()));
      const ReconstructionReport report =
          reconstruct(target, {*parse_recon_method(recon_method), recon_iters});
      write_wav(recon_out, report.signal);
      if (!recon_trace.empty()) {
        std::ofstream trace(recon_trace, std::ios::trunc);
        if (!trace) throw Error(Errc::write_failed, "cannot open " + recon_trace);
        trace << std::setprecision(17) << "iteration,value\n";
        for (std::size_t i = 0; i < report.convergence_trace.size(); ++i)
          trace << i + 1 << ',' << report.convergence_trace[i] << '\n';
      }
      out << std::setprecision(10) << report.convergence_trace.back() << '\n';
    } else if (trainer->parsed()) {
      std::vector<LabeledClip> clips = load_dataset(train_data, train_manifest);
      train_cfg.fft = train_analysis.config();
      if (train_classes == 0) {
        std::size_t top = 0;
        for (const auto& c : clips) top = std::max(top, c.class_id);
        train_classes = top + 1;
      }
      train_cfg.num_classes = train_classes;
      assign_centroid_classes(clips, train_cfg.fft);
      const TrainResult result = train(clips, train_cfg);
      save_weights(result.weights, train_out);
      if (!train_log.empty()) write_training_log(train_log, result.log);
      const Accuracy acc = evaluate(result.weights, clips, train_cfg.fft);
      out << "training accuracy main " << acc.main << " centroid " << acc.centroid << '\n';
    } else if (spectrogram->parsed()) {
      const AudioBuffer input = read_wav(spec_in);
      const MagSpectrogram mag = magnitude(stft(input, spec_analysis.config()));
      write_spectrogram_png(spec_out, mag);
      if (!spec_csv.empty()) write_spectrogram_csv(spec_csv, mag);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace audiostyle::cli
