// tmm: multi-aspect sentiment toolkit front-end.
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "tmm/commands.hpp"

namespace {

struct Flags {
  std::string config, data, out, checkpoint, layer, scheme, task;
  std::uint64_t seed = 0;
  std::size_t index = 0;
  bool quiet = false;
};

tmm::CommandOptions to_options(const Flags& f, const CLI::App& sub) {
  tmm::CommandOptions o;
  auto given = [&sub](const char* name) {
    const CLI::Option* opt = sub.get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  if (given("--config")) o.config = f.config;
  if (given("--data")) o.data = f.data;
  if (given("--out")) o.out = f.out;
  if (given("--checkpoint")) o.checkpoint = f.checkpoint;
  if (given("--seed")) o.seed = f.seed;
  if (given("--layer")) o.layer = f.layer;
  if (given("--scheme")) o.scheme = f.scheme;
  if (given("--task")) o.task = f.task;
  if (given("--index")) o.index = f.index;
  o.quiet = f.quiet;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transformer-based multi-aspect sentiment modeling"};
  app.require_subcommand(1);
  Flags f;

  struct Spec {
    const char* name;
    const char* help;
    bool config, seed, data, out, checkpoint, layer, scheme, task, index;
  };
  const Spec specs[] = {
      {"gen-data", "generate a seeded synthetic train/dev/test corpus", true, true, false, true, false, false, false,
       true, false},
      {"train", "train one model per seed and report averaged test metrics", true, true, true, true, false, false,
       true, true, false},
      {"evaluate", "score a checkpoint on a labeled corpus", false, false, true, true, true, false, false, false,
       false},
      {"predict", "label the aspects of an unlabeled corpus", false, false, true, true, true, false, false, false,
       false},
      {"attn", "export head-averaged attention as a matrix and an HTML heatmap", false, false, true, true, true,
       true, false, false, true},
      {"grad-check", "compare analytic and finite-difference gradients", true, true, false, true, false, false,
       false, false, false},
      {"compare", "train TMM and the single-aspect baseline under one budget", true, true, true, true, false, false,
       false, true, false},
  };

  for (const Spec& s : specs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    if (s.config) sub->add_option("--config", f.config, "run config file (key = value)")->check(CLI::ExistingFile);
    if (s.seed) sub->add_option("--seed", f.seed, "base random seed");
    if (s.data) sub->add_option("--data", f.data, "corpus file, or directory with {train,dev,test}.jsonl");
    if (s.out) sub->add_option("--out", f.out, "output file, directory or prefix");
    if (s.checkpoint) sub->add_option("--checkpoint", f.checkpoint, "model checkpoint")->check(CLI::ExistingFile);
    if (s.layer) sub->add_option("--layer", f.layer, "layer index or 'all'");
    if (s.scheme) sub->add_option("--scheme", f.scheme, "tmm or baseline")->check(CLI::IsMember({"tmm", "baseline"}));
    if (s.task) sub->add_option("--task", f.task, "atsa or acsa")->check(CLI::IsMember({"atsa", "acsa"}));
    if (s.index) sub->add_option("--index", f.index, "record index within --data");
    sub->add_flag("--quiet", f.quiet, "suppress per-epoch progress");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  for (CLI::App* sub : app.get_subcommands()) {
    return tmm::run_command(sub->get_name(), to_options(f, *sub), std::cout, std::cerr);
  }
  return 1;
}
