// Copyright 2026 The mlstm Authors
// SPDX-License-Identifier: Apache-2.0

#include "mlstm/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <system_error>
#include <vector>

#include "mlstm/checkpoint.hpp"
#include "mlstm/error.hpp"
#include "mlstm/evaluation.hpp"
#include "mlstm/gradcheck.hpp"
#include "mlstm/run_config.hpp"

namespace mlstm {

namespace {

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config:
    case ErrorKind::invalid_argument:
    case ErrorKind::shape:
      return kExitConfig;
    case ErrorKind::io:
    case ErrorKind::version_mismatch:
    case ErrorKind::corrupt:
      return kExitIo;
    case ErrorKind::numeric:
      return kExitNumeric;
  }
  return kExitConfig;
}

// Keeps the error line single-line whatever the message contains.
std::string one_line(std::string text) {
  for (char& c : text) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return text;
}

int report_error(std::ostream& err, const char* kind, int code, const std::string& message) {
  err << "error: kind=" << kind << " exit=" << code << " message=" << one_line(message) << '\n';
  return code;
}

void require_path(const std::filesystem::path& path, const char* flag) {
  require(!path.empty(), ErrorKind::config, std::string("missing required setting ") + flag);
}

int command_train(const RunOverrides& overrides, std::ostream& out) {
  RunConfig rc = resolve_run_config(overrides);
  require_path(rc.train_path, "--train");
  require_path(rc.valid_path, "--valid");
  require_path(rc.checkpoint_path, "--checkpoint");

  const Vocabulary vocab = Vocabulary::build_from_file(rc.train_path);
  const std::vector<TokenId> train = encode_file(rc.train_path, vocab);
  const std::vector<TokenId> valid = encode_file(rc.valid_path, vocab);
  std::vector<TokenId> test;
  if (!rc.test_path.empty()) test = encode_file(rc.test_path, vocab);
  rc.model.vocab_size = vocab.size();

  const std::filesystem::path run_dir = rc.checkpoint_path.parent_path();
  std::error_code ec;
  if (!run_dir.empty()) std::filesystem::create_directories(run_dir, ec);
  require(!ec, ErrorKind::io, "cannot create directory '" + run_dir.string() + "': " + ec.message());

  std::filesystem::path log_path = rc.checkpoint_path;
  log_path += ".log";
  std::ofstream log(log_path, std::ios::trunc);
  require(static_cast<bool>(log), ErrorKind::io, "cannot write epoch log '" + log_path.string() + "'");

  std::string echo = format_run_config(rc);
  echo += "vocab_size = " + std::to_string(vocab.size()) + '\n';
  for (std::ostream* stream : {&out, static_cast<std::ostream*>(&log)}) {
    std::size_t begin = 0;
    while (begin < echo.size()) {
      const std::size_t end = echo.find('\n', begin);
      *stream << "# " << echo.substr(begin, end - begin) << '\n';
      begin = end + 1;
    }
  }

  FitOptions options;
  options.checkpoint_path = rc.checkpoint_path;
  options.logs = {&out, &log};
  const FitResult result = fit(rc.model, rc.train, vocab, train, valid, test, options);

  char line[160];
  std::snprintf(line, sizeof line, "best_epoch=%zu best_valid_ppl=%.10f\n", result.report.best_epoch,
                result.report.best_valid_perplexity);
  out << line;
  log << line;
  if (result.report.test) {
    out << "test " << format_report(*result.report.test) << '\n';
    log << "test " << format_report(*result.report.test) << '\n';
  }
  require(static_cast<bool>(log), ErrorKind::io, "failed writing epoch log '" + log_path.string() + "'");
  return kExitOk;
}

struct EvaluateArgs {
  std::string checkpoint, valid, test;
};

int command_evaluate(const EvaluateArgs& args, std::ostream& out) {
  require(!args.valid.empty() || !args.test.empty(), ErrorKind::config,
          "evaluate needs --valid and/or --test");
  const Checkpoint ckpt = load_checkpoint(args.checkpoint);
  for (const auto& [name, path] : {std::pair{"valid", args.valid}, std::pair{"test", args.test}}) {
    if (path.empty()) continue;
    const BatchedCorpus corpus = batchify(encode_file(path, ckpt.vocab), ckpt.train.batch_size, ckpt.vocab.size());
    out << name << ' ' << format_report(evaluate(ckpt.params, ckpt.model, corpus, ckpt.train.unroll)) << '\n';
  }
  return kExitOk;
}

struct GradcheckArgs {
  std::uint64_t seed = GradcheckOptions{}.seed;
  std::optional<std::string> strategy;
};

int command_gradcheck(const GradcheckArgs& args, std::ostream& out) {
  GradcheckOptions options;
  options.seed = args.seed;
  std::vector<GradcheckResult> results;
  if (args.strategy) {
    results.push_back(run_gradcheck(parse_selection_kind(*args.strategy), options));
  } else {
    results = run_gradcheck_suite(options);
  }
  bool passed = true;
  for (const GradcheckResult& r : results) {
    print_gradcheck(out, r, options.tolerance);
    passed = passed && r.passed;
  }
  out << (passed ? "gradcheck PASS\n" : "gradcheck FAIL\n");
  return passed ? kExitOk : kExitGradcheck;
}

struct GenerateArgs {
  std::string checkpoint, prompt;
  std::size_t length = 20;
  double temperature = 1.0;
  std::uint64_t seed = 0;
};

int command_generate(const GenerateArgs& args, std::ostream& out) {
  require(args.temperature >= 0.0, ErrorKind::config, "temperature must be >= 0");
  const Checkpoint ckpt = load_checkpoint(args.checkpoint);
  const std::vector<TokenId> prompt = encode_words(args.prompt, ckpt.vocab);
  const std::vector<TokenId> continuation =
      generate(ckpt.params, ckpt.model, ckpt.vocab, prompt, args.length, args.temperature, args.seed);
  out << decode(continuation, ckpt.vocab) << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-cell LSTM language model toolkit", "mlstm"};
  app.require_subcommand(1);

  RunOverrides train_overrides;
  CLI::App* train = app.add_subcommand("train", "Train a model and keep the best-validation checkpoint");
  add_run_options(*train, train_overrides);

  EvaluateArgs eval_args;
  CLI::App* evaluate_cmd = app.add_subcommand("evaluate", "Report perplexity of a checkpoint on a corpus");
  evaluate_cmd->add_option("--checkpoint", eval_args.checkpoint, "Checkpoint path")->required();
  evaluate_cmd->add_option("--valid", eval_args.valid, "Validation corpus");
  evaluate_cmd->add_option("--test", eval_args.test, "Test corpus");

  GradcheckArgs grad_args;
  CLI::App* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of BPTT gradients");
  gradcheck->add_option("--seed", grad_args.seed, "Seed for parameters and data");
  gradcheck->add_option("--strategy", grad_args.strategy, "Check a single strategy");

  GenerateArgs gen_args;
  CLI::App* generate_cmd = app.add_subcommand("generate", "Continue a prompt from a checkpoint");
  generate_cmd->add_option("--checkpoint", gen_args.checkpoint, "Checkpoint path")->required();
  generate_cmd->add_option("--prompt", gen_args.prompt, "Whitespace-separated prompt words");
  generate_cmd->add_option("--length", gen_args.length, "Tokens to generate");
  generate_cmd->add_option("--temperature", gen_args.temperature, "0 = greedy; otherwise sampling temperature");
  generate_cmd->add_option("--seed", gen_args.seed, "Sampling seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    return report_error(err, "usage", kExitUsage, std::string(e.what()) + " (run with --help)");
  }

  try {
    if (train->parsed()) return command_train(train_overrides, out);
    if (evaluate_cmd->parsed()) return command_evaluate(eval_args, out);
    if (gradcheck->parsed()) return command_gradcheck(grad_args, out);
    if (generate_cmd->parsed()) return command_generate(gen_args, out);
  } catch (const Error& e) {
    return report_error(err, to_string(e.kind()), exit_code_for(e.kind()), e.what());
  } catch (const std::exception& e) {
    return report_error(err, "internal", kExitConfig, e.what());
  }
  return report_error(err, "usage", kExitUsage, "no command given");
}

}  // namespace mlstm
