use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use solvfill_core::certifier::{certify_with, CertifyOptions, Verdict};
use solvfill_core::filling::estimate::{lipschitz_refined, DEFAULT_GRID, DEFAULT_MAX_GRID, DEFAULT_TOLERANCE};
use solvfill_core::filling::export::{csv_cells, sample_grid, svg_heatmap, svg_template};
use solvfill_core::filling::probe::{
    auto_pipeline, fill_loop, loop_word, span_probe, Family, Loop, Pipeline, Tolerances, DEFAULT_DRIFT_FACTOR,
};
use solvfill_core::filling::templates::{check_distortion, sun_template, web_template};
use solvfill_core::io::report::{analyze, certify_value, Report};
use solvfill_core::io::spec_file::parse_spec_str;
use solvfill_core::io::word_spec::parse_loop;
use solvfill_core::presets::{load_preset, preset_text};
use solvfill_core::words::guard_from_env;
use solvfill_core::{Error, GroupElement, LieAlgebraSpec, SolvableGroup};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Certify Lipschitz 1-connectedness of solvable groups U ⋊ A and build
/// explicit fillings of loops.
#[derive(Parser, Debug)]
#[command(name = "solvfill", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug, Clone)]
struct Common {
    /// Spec file (JSON) or `preset:<name>`.
    spec: String,
    /// Grid cells per side for the first Lipschitz estimate.
    #[arg(long, default_value_t = DEFAULT_GRID)]
    grid: usize,
    /// Stop refining once the estimate moves by less than this.
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tolerance: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_GRID)]
    max_grid: usize,
    /// Write the report and artifacts here instead of printing the report.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Json,
    Svg,
    Csv,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum PipelineArg {
    Backtrack,
    Cone,
    Tame,
    Free,
    Gromov,
}

impl From<PipelineArg> for Pipeline {
    fn from(p: PipelineArg) -> Self {
        match p {
            PipelineArg::Backtrack => Pipeline::Backtrack,
            PipelineArg::Cone => Pipeline::Cone,
            PipelineArg::Tame => Pipeline::Tame,
            PipelineArg::Free => Pipeline::Free,
            PipelineArg::Gromov => Pipeline::Gromov,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum TemplateArg {
    Web,
    Sun,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Weights, conic subsets, H₂ and Kill with zero parts, grading check.
    Analyze {
        #[command(flatten)]
        common: Common,
    },
    /// Verdict with witnesses, replayed before printing.
    Certify {
        #[command(flatten)]
        common: Common,
        /// Skip the Sol-pair branch (also `SOLVFILL_GUARDS=sol_branch=0`).
        #[arg(long)]
        no_sol_branch: bool,
    },
    /// Fill one loop and estimate the Lipschitz constant of the filling.
    Fill {
        #[command(flatten)]
        common: Common,
        /// Loop specification, e.g. `backtrack:u:1,0,0 a:1` or `relation:32`.
        #[arg(long)]
        word: String,
        #[arg(long, value_enum)]
        pipeline: Option<PipelineArg>,
    },
    /// Fill a family of loops and tabulate the Lipschitz ratios.
    Probe {
        #[command(flatten)]
        common: Common,
        /// `relations:16,32`, `circles:0,1`, `commutators:1,2`, `triangles:2,4`.
        #[arg(long)]
        family: Option<String>,
        #[arg(long, value_enum)]
        pipeline: Option<PipelineArg>,
        #[arg(long, default_value_t = DEFAULT_DRIFT_FACTOR)]
        drift_factor: f64,
    },
    /// Draw a disk template or a filling heatmap.
    Render {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, conflicts_with = "word")]
        template: Option<TemplateArg>,
        #[arg(long, default_value_t = 0.125)]
        eps: f64,
        #[arg(long)]
        word: Option<String>,
        #[arg(long, value_enum)]
        pipeline: Option<PipelineArg>,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } | Error::Invalid(_) | Error::Structural(_) => 2,
        _ => 3,
    }
}

fn load_spec(src: &str) -> Result<LieAlgebraSpec, Error> {
    if let Some(name) = src.strip_prefix("preset:") {
        return load_preset(name);
    }
    match std::fs::read_to_string(src) {
        Ok(text) => parse_spec_str(&text),
        Err(_) if preset_text(src).is_some() => load_preset(src),
        Err(e) => Err(Error::Parse {
            field: "<file>".into(),
            msg: format!("cannot read {src}: {e}"),
        }),
    }
}

fn flags(c: &Common, extra: &[(&str, String)]) -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    m.insert("grid".into(), c.grid.to_string());
    m.insert("tolerance".into(), c.tolerance.to_string());
    m.insert("max_grid".into(), c.max_grid.to_string());
    m.insert("format".into(), format!("{:?}", c.format).to_lowercase());
    if let Ok(g) = std::env::var("SOLVFILL_GUARDS") {
        m.insert("SOLVFILL_GUARDS".into(), g);
    }
    for (k, v) in extra {
        m.insert((*k).into(), v.clone());
    }
    m
}

fn tolerances(c: &Common) -> Tolerances {
    Tolerances {
        grid: c.grid.max(2),
        tolerance: c.tolerance,
        max_grid: c.max_grid.max(c.grid),
    }
}

fn write_file(dir: &Path, name: &str, text: &str) -> Result<(), Error> {
    std::fs::create_dir_all(dir)
        .and_then(|_| std::fs::write(dir.join(name), text))
        .map_err(|e| Error::Parse {
            field: "--out".into(),
            msg: format!("cannot write {}: {e}", dir.join(name).display()),
        })
}

fn emit(c: &Common, report: &Report) -> Result<(), Error> {
    match &c.out {
        Some(dir) => write_file(dir, "report.json", &report.to_json()),
        None => {
            print!("{}", report.to_json());
            Ok(())
        }
    }
}

fn group_of(spec: &LieAlgebraSpec) -> Result<SolvableGroup, Error> {
    spec.require_valid()?;
    SolvableGroup::new(spec.clone())
}

fn pipeline_for(group: &SolvableGroup, lp: &Loop, p: Option<PipelineArg>) -> Pipeline {
    p.map(Pipeline::from).unwrap_or_else(|| auto_pipeline(group, lp))
}

/// Rows `g₁, g₂` with 𝔲-parts scaled by `2^j`, `g₃` recomputed.
fn scaled_triples(group: &SolvableGroup, g: &[GroupElement; 3]) -> Result<Vec<(u32, [GroupElement; 3])>, Error> {
    (0..4u32)
        .map(|j| {
            let f = solvfill_core::rational::q(1 << j);
            let sc = |x: &GroupElement| GroupElement::new(x.a.clone(), x.u.iter().map(|v| v * &f).collect());
            let (g1, g2) = (sc(&g[0]), sc(&g[1]));
            let g3 = group.inverse(&group.mul(&g1, &g2)?)?;
            Ok((j, [g1, g2, g3]))
        })
        .collect()
}

fn fill_value(group: &SolvableGroup, lp: &Loop, pipeline: Pipeline, tol: Tolerances) -> Result<(Value, solvfill_core::filling::SquareMap), Error> {
    let out = fill_loop(group, lp, pipeline)?;
    let est = lipschitz_refined(group, &out.map, tol.grid, tol.tolerance, tol.max_grid);
    let word = loop_word(group, lp)?;
    let v = json!({
        "pipeline": pipeline.to_string(),
        "letters": out.letters,
        "word": word,
        "loop_lip": out.loop_lip,
        "fill_lip": { "lower": est.raw, "upper": est.upper, "grid": est.grid, "slack": est.slack, "history": est.history },
        "ratio": est.raw / out.loop_lip,
        "ratio_per_letter": (out.letters > 0).then(|| est.raw / out.letters as f64),
        "detail": out.detail,
    });
    Ok((v, out.map))
}

fn artifact(c: &Common, group: &SolvableGroup, map: &solvfill_core::filling::SquareMap, title: &str) -> (String, String) {
    let d = sample_grid(group, map, c.grid.clamp(2, 256));
    match c.format {
        Format::Json => ("mesh.json".into(), serde_json::to_string(&d).expect("dump serializes") + "\n"),
        Format::Svg => ("heatmap.svg".into(), svg_heatmap(&d, title)),
        Format::Csv => ("cells.csv".into(), csv_cells(&d)),
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Analyze { common } => {
            let spec = load_spec(&common.spec)?;
            let mut r = Report::new("analyze", &common.spec, &spec, flags(&common, &[]), common.seed);
            r.result = analyze(&spec)?;
            emit(&common, &r)
        }
        Command::Certify { common, no_sol_branch } => {
            let spec = load_spec(&common.spec)?;
            let opts = CertifyOptions {
                disable_sol_branch: no_sol_branch || guard_from_env("sol_branch", 1) == 0,
            };
            let extra = [("sol_branch", (!opts.disable_sol_branch).to_string())];
            let mut r = Report::new("certify", &common.spec, &spec, flags(&common, &extra), common.seed);
            r.result = certify_value(&spec, opts);
            if certify_with(&spec, opts).verdict == Verdict::Inconclusive {
                r.notes.push("inconclusive: see the checks for the reason".into());
            }
            emit(&common, &r)
        }
        Command::Fill { common, word, pipeline } => {
            let spec = load_spec(&common.spec)?;
            let group = group_of(&spec)?;
            let lp = parse_loop(&group, &word)?;
            let p = pipeline_for(&group, &lp, pipeline);
            let tol = tolerances(&common);
            let extra = [("word", word.clone()), ("pipeline", p.to_string())];
            let mut r = Report::new("fill", &common.spec, &spec, flags(&common, &extra), common.seed);
            r.tolerances = serde_json::to_value(tol).unwrap();
            let (mut v, map) = fill_value(&group, &lp, p, tol)?;
            if let (Loop::Triple(g), Pipeline::Tame) = (&lp, p) {
                let mut table = Vec::new();
                for (j, t) in scaled_triples(&group, g)? {
                    let row = match fill_value(&group, &Loop::Triple(t), p, tol) {
                        Ok((x, _)) => json!({ "u_scale": 1u64 << j, "letters": x["letters"], "fill_lip": x["fill_lip"]["lower"], "ratio_per_letter": x["ratio_per_letter"] }),
                        Err(e) => json!({ "u_scale": 1u64 << j, "error": e.to_string() }),
                    };
                    table.push(row);
                }
                v["ratio_table"] = Value::Array(table);
            }
            r.result = v;
            if let Some(dir) = &common.out {
                let (name, text) = artifact(&common, &group, &map, &format!("{p} fill of {word}"));
                write_file(dir, &name, &text)?;
            }
            emit(&common, &r)
        }
        Command::Probe {
            common,
            family,
            pipeline,
            drift_factor,
        } => {
            let spec = load_spec(&common.spec)?;
            let group = group_of(&spec)?;
            let fam = match &family {
                Some(f) => Family::parse(f, common.seed)?,
                None => default_family(&spec),
            };
            let tol = tolerances(&common);
            let p = pipeline.map(Pipeline::from);
            let extra = [("family", serde_json::to_string(&fam).unwrap())];
            let mut r = Report::new("probe", &common.spec, &spec, flags(&common, &extra), common.seed);
            r.tolerances = serde_json::to_value(tol).unwrap();
            let probe = span_probe(&group, &fam, p, tol, drift_factor);
            if probe.drift {
                r.notes.push(format!("ratio band exceeds the drift factor {drift_factor}"));
            }
            r.result = serde_json::to_value(&probe).unwrap();
            emit(&common, &r)
        }
        Command::Render {
            common,
            template,
            eps,
            word,
            pipeline,
        } => {
            let spec = load_spec(&common.spec)?;
            let (name, text, summary) = match (template, word) {
                (t, None) | (t @ Some(_), Some(_)) => {
                    let t = t.unwrap_or(TemplateArg::Web);
                    let mesh = match t {
                        TemplateArg::Web => web_template(eps)?,
                        TemplateArg::Sun => sun_template(eps)?,
                    };
                    let chk = check_distortion(&mesh, 10_000, common.seed);
                    let title = format!("{t:?} template, eps = {eps}").to_lowercase();
                    let summary = json!({ "template": format!("{t:?}").to_lowercase(), "eps": eps, "cells": mesh.cells.len(), "constant": mesh.constant, "distortion": chk });
                    match common.format {
                        Format::Svg => ("template.svg".to_string(), svg_template(&mesh, &title), summary),
                        Format::Json => ("template.json".to_string(), serde_json::to_string(&mesh).unwrap() + "\n", summary),
                        Format::Csv => {
                            let mut s = String::from("cell,kind,constant\n");
                            for (i, c) in mesh.cells.iter().enumerate() {
                                s += &format!("{i},{:?},{}\n", c.kind, c.constant.map_or(String::new(), |x| x.to_string()));
                            }
                            ("template.csv".to_string(), s, summary)
                        }
                    }
                }
                (None, Some(w)) => {
                    let group = group_of(&spec)?;
                    let lp = parse_loop(&group, &w)?;
                    let p = pipeline_for(&group, &lp, pipeline);
                    let out = fill_loop(&group, &lp, p)?;
                    let (name, text) = artifact(&common, &group, &out.map, &format!("{p} fill of {w}"));
                    (name, text, json!({ "word": w, "pipeline": p.to_string() }))
                }
            };
            match &common.out {
                Some(dir) => {
                    write_file(dir, &name, &text)?;
                    let mut r = Report::new("render", &common.spec, &spec, flags(&common, &[("eps", eps.to_string())]), common.seed);
                    r.result = json!({ "artifact": name, "summary": summary });
                    emit(&common, &r)
                }
                None => {
                    print!("{text}");
                    Ok(())
                }
            }
        }
    }
}

/// Relation family in tame groups, commutators when a Sol pair exists,
/// circles otherwise.
fn default_family(spec: &LieAlgebraSpec) -> Family {
    match certify_with(spec, CertifyOptions::default()).verdict {
        Verdict::L1CTame => Family::Relations {
            lengths: vec![16, 32, 64, 128],
        },
        Verdict::NotL1CSol => Family::Commutators { depths: vec![1, 2, 3, 4] },
        _ => Family::Circles {
            exponents: vec![0, 1, 2, 3],
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("solvfill: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
