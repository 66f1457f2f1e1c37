#pragma once

#include "wise/rd.hpp"

#include "json.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace wise {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "0.3.0";

struct RunConfig {
  std::string subcommand;
  int radius = -1;        // -1: the subcommand's default
  int zRadius = 2;        // branching-audit: z ranges over this ball
  int sample = 100;
  std::uint64_t seed = 1;
  double areaConstant = 16.0;
  int subdivision = 8;    // k of the refined graph and of the link edge samples
  int rmax = 5;
  int domain = 3;         // rd-scan: R of the emitted rows
  std::string method = "power";
  std::string from, to;   // envelope endpoints (words)
  std::string a, b, c;    // triangle-reduce corners (words)
  std::string out, emit;
  std::string format;     // json or csv; empty: the subcommand's default

  Json toJson() const;
};

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

const std::vector<std::string>& subcommands();
// Fills defaults and checks every parameter; throws ConfigError.
void validate(RunConfig& cfg);
// FNV-1a of the canonical config JSON, as 16 hex digits.
std::string configHash(const RunConfig& cfg);

// WISE_MAX_ELEMENTS caps developed vertices and ball sizes; WISE_MAX_MEMORY_MB
// is a hint checked against the projected size of the balls a run needs.
struct ResourceCaps {
  std::size_t maxElements = 0;
  std::size_t memoryHintMB = 0;  // 0: no hint
};
ResourceCaps resourceCaps();
// Throws ResourceLimit when ball(radius) would exceed the caps.
void requireBall(int radius);
// |ball(r)|: frozen values up to 8, a growth-rate projection beyond.
double projectedBallSize(int radius);

enum class Status { Pass, Fail, Skipped };
const char* str(Status s);

struct Verdict {
  std::string name;
  Status status = Status::Pass;
  std::string reason;
};

struct AuditReport {
  std::string kind;
  Json body = Json::object();
  std::vector<Verdict> verdicts;
  std::string csv;  // filled when the output format is CSV

  void check(const std::string& name, bool pass, const std::string& reason = {});
  void skip(const std::string& name, const std::string& reason);
  bool allPass() const;
  int exitCode() const { return allPass() ? 0 : 1; }
};

// Headered CSV table of strings.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  bool operator==(const Table&) const = default;
};

// Throws std::invalid_argument on an empty table or ragged rows.
std::string emit_plot_data(const Table& t);
Table parse_plot_data(const std::string& csv);
// Deterministic decimal form; NaN becomes the empty string.
std::string formatNumber(double x);

Table growthTable(const GrowthAudit& g);
Table rdTable(const RdScan& s, int onlyR = -1);

// ---- Audits shared by the CLI and the acceptance run ----

struct EqualityAudit {
  int pairs = 0, equal = 0, distinct = 0, unknown = 0;
  int contradictions = 0;   // verdict against the development, or asymmetric
  int replayFailures = 0;
};
// Random word pairs, half of them related by relator insertions; the
// development's vertex identity is the independent referee.
EqualityAudit equality_audit(int pairs, std::uint64_t seed, double areaConstant);

struct TriangleSuite {
  std::size_t triangles = 0, skipped = 0;
  std::size_t frizes = 0, midpoint = 0, reduce = 0, saturated = 0;
  std::map<std::string, std::size_t> outcomes;
  std::vector<std::string> failures;  // first few, for the report
  bool allPass() const {
    return frizes == triangles && midpoint == triangles && reduce == triangles && saturated == triangles;
  }
  Json toJson() const;
};
// False when the triangle fails the margin check (counted as skipped).
bool triangle_suite_add(TriangleSuite& s, Development& dev, PatchMargin* margin, const Triangle& t,
                        const TriangleOptions& opts = {});

Word randomWord(std::mt19937_64& rng, int maxLength);

AuditReport link_audit(const RunConfig& cfg);
AuditReport build_ball(const RunConfig& cfg);
AuditReport envelope_report(const RunConfig& cfg);
AuditReport triangle_report(const RunConfig& cfg);
AuditReport branching_audit(const RunConfig& cfg);
AuditReport rd_scan_report(const RunConfig& cfg);
AuditReport full_report(const RunConfig& cfg);

// Dispatches a validated config.
AuditReport run_subcommand(const RunConfig& cfg);
// Report text: JSON (with provenance and verdicts) or the CSV table.
std::string render(const AuditReport& r, const RunConfig& cfg);
// Validates, runs and writes the output; returns the exit code
// (0 ok, 1 lemma violation, 2 config error, 3 resource limit).
int run(RunConfig cfg, std::ostream& out, std::ostream& err);

}  // namespace wise
