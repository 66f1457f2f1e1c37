#include "wise/report.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv) {
  wise::RunConfig cfg;
  CLI::App app{"Audits for the group <a,b,c,s,t | c=ab=ba, c^2=sas^-1=tbt^-1> and its complex"};
  app.require_subcommand(1);

  auto common = [&](CLI::App* sub) {
    sub->add_option("--out", cfg.out, "output file (default stdout)");
    sub->add_option("--format", cfg.format, "json or csv");
    sub->add_option("--seed", cfg.seed, "random seed");
  };

  auto* ball = app.add_subcommand("build-ball", "ball of the Cayley graph as a patch of X");
  ball->add_option("--radius", cfg.radius, "word-length radius");
  ball->add_option("--emit", cfg.emit, "patch JSON file");
  common(ball);

  auto* link = app.add_subcommand("link-audit", "vertex link census, girth and the 2pi+2u / 2pi+2v lemma");
  link->add_option("--subdivision", cfg.subdivision, "edge points at k/n");
  common(link);

  auto* env = app.add_subcommand("envelope", "geodesic and its envelopes between two vertices");
  env->add_option("--from", cfg.from, "word of the first vertex ('e' for the base)")->required();
  env->add_option("--to", cfg.to, "word of the second vertex")->required();
  env->add_option("--subdivision", cfg.subdivision, "refinement of the comparison graph");
  common(env);

  auto* tri = app.add_subcommand("triangle-reduce", "reduction of a geodesic triangle");
  tri->add_option("--a", cfg.a, "first corner (word)")->required();
  tri->add_option("--b", cfg.b, "second corner (word)")->required();
  tri->add_option("--c", cfg.c, "third corner (word)")->required();
  tri->add_option("--radius", cfg.radius, "patch radius");
  common(tri);

  auto* branch = app.add_subcommand("branching-audit", "3-path counts, envelope growth, flat triangles, retracts");
  branch->add_option("--radius", cfg.radius, "ball radius");
  branch->add_option("--z-radius", cfg.zRadius, "z ranges over this ball");
  branch->add_option("--rmax", cfg.rmax, "largest r");
  branch->add_option("--sample", cfg.sample, "random targets and triangles");
  common(branch);

  auto* rd = app.add_subcommand("rd-scan", "norms of convolution by ball functions");
  rd->add_option("--rmax", cfg.rmax, "largest support radius r");
  rd->add_option("--domain", cfg.domain, "radius R of the domain ball");
  rd->add_option("--method", cfg.method, "power or characteristic");
  common(rd);

  auto* rep = app.add_subcommand("report", "deterministic summary of every audit");
  rep->add_option("--radius", cfg.radius, "ball radius");
  rep->add_option("--sample", cfg.sample, "sample size");
  rep->add_option("--area-constant", cfg.areaConstant, "constant of the area bound");
  common(rep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  cfg.subcommand = app.get_subcommands().front()->get_name();
  return wise::run(cfg, std::cout, std::cerr);
}
