#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "conical/barrier.hpp"
#include "conical/pulsating_front.hpp"
#include "conical/reaction_model.hpp"
#include "conical/simulator.hpp"
#include "conical/verifier.hpp"

namespace conical {

struct Tolerances {
    double planar_speed = 0.01;    // relative, measured vs 1D oracle when q = 0 and alpha = pi/2
    double speed_formula = 0.02;   // relative
    double symmetry = 0.005;       // |cA - cB| / cA
    double monotone = 1e-10;
    double shift = 1e-2;
    double comparison = 1e-10;
    double eps_factor = 5.0;       // eps_disc = eps_factor * calibrated oracle residual
    double max_locus_margin = 0.05;
};

struct ExperimentConfig {
    std::string name = "experiment";
    nlohmann::json raw;
    ProblemData problem;
    std::vector<std::string> alpha_labels;
    PeriodicStripGrid strip;
    PulsatingOptions pulsating;
    PlaneGrid plane;
    std::vector<std::pair<double, nlohmann::json>> plane_by_alpha;
    EvolveOptions evolve;
    bool from_super = true;
    bool substitute_super = false;
    std::vector<double> beta_factors{1e-3, 1e-2, 1e-1, 1.0};
    ConeLimitOptions cone;
    Tolerances tol;
    std::string out_dir = "out";
    bool csv = true;
    int snapshot_stride = 4;
    double snapshot_interval = 0.0;
    unsigned seed = 1;
    int grid_scale = 1;
    int jobs = 1;

    PeriodicStripGrid strip_grid() const;
    PlaneGrid plane_grid(double alpha) const;
    void validate() const;
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
// "a.b.c=value"; value parsed as JSON, falling back to a string.
void apply_override(nlohmann::json& j, const std::string& assignment);

enum class Stage { validate, planar, pulsating, barriers, evolve, verify };
Stage stage_for_verb(const std::string& verb);
std::string to_string(Stage s);

struct CsvTable {
    std::string name;  // relative path without extension
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    int block = 0;  // rows per gnuplot block, 0 for none
};

struct RunManifest {
    nlohmann::json doc;
    std::vector<CsvTable> tables;

    bool complete() const { return doc.value("complete", false); }
    bool pass() const;
};

RunManifest run_experiment(const ExperimentConfig& config, Stage last = Stage::verify);

enum class ReportFormat { json, csv };
// Writes manifest.json and, for csv, every table; returns the written paths.
std::vector<std::string> emit_report(const RunManifest& manifest, const std::string& dir, ReportFormat format);

}  // namespace conical
