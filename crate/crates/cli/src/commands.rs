use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anelkin::decomposition::{decompose, push_forward};
use anelkin::equivalence::{embodiment_deviation, find_affine_displacement, AffineFit};
use anelkin::groupoid::{body_points, configuration_groupoid_bounded, PointWitness};
use anelkin::io::{
    format_f64, render_svg, to_json_string, write_points_csv, FamilyManifest, MeshFieldDocument, RunConfig, SvgReport,
};
use anelkin::lattice::{
    burgers_of_configuration, cut_and_project, make_dislocated, random_body, random_configuration, CutProjectSpec,
    DislocationKind, DislocationSpec,
};
use anelkin::{Configuration, GradientVerdict, LinearMap, SpaceDiffeo, Vector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::{Cli, Command, DefectKind, DislocationArgs, QuasicrystalArgs, RandomArgs, SynthKind};

pub const BURGERS_CONVENTION: &str = "sum over loop segments of (F_ae - I) dX in the order given; \
     a counter-clockwise loop around a dislocation with Burgers vector b returns +b";

/// Outcome of a command that ran to completion.
pub enum Verdict {
    Success,
    /// Well-formed input with a negative verdict.
    Incompatible,
}

impl From<Verdict> for ExitCode {
    fn from(v: Verdict) -> ExitCode {
        match v {
            Verdict::Success => ExitCode::SUCCESS,
            Verdict::Incompatible => ExitCode::from(2),
        }
    }
}

#[derive(Debug)]
pub struct Failure(String);

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<anelkin::Error> for Failure {
    fn from(e: anelkin::Error) -> Self {
        Failure(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure(e.to_string())
    }
}

type Result<T> = std::result::Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure(msg.into())
}

pub fn run(cli: &Cli) -> Result<Verdict> {
    let mut config = RunConfig::resolve(cli.config.as_deref())?;
    if let Some(tol) = cli.tol {
        config.tol_rel = tol;
    }
    if let Some(seed) = cli.seed {
        config.rng_seed = seed;
    }
    config.validate()?;
    let ctx = Context { cli, config };
    match &cli.command {
        Command::Check { input } => ctx.check(input),
        Command::Decompose { input } => ctx.decompose(input),
        Command::Equiv { first, second, affine } => ctx.equiv(first, second.as_deref(), affine.as_deref()),
        Command::Groupoid { manifest } => ctx.groupoid(manifest),
        Command::Synth { kind } => match kind {
            SynthKind::Dislocation(args) => ctx.synth_dislocation(args),
            SynthKind::Quasicrystal(args) => ctx.synth_quasicrystal(args),
            SynthKind::Random(args) => ctx.synth_random(args),
        },
        Command::Burgers { input, loop_vertices } => ctx.burgers(input, loop_vertices),
        Command::Report { input, loop_vertices } => ctx.report(input, loop_vertices.as_deref()),
    }
}

struct Context<'a> {
    cli: &'a Cli,
    config: RunConfig,
}

impl Context<'_> {
    fn tol(&self) -> f64 {
        self.config.tol_rel
    }

    fn envelope(&self, command: &str, result: Value) -> Value {
        json!({
            "tool": { "name": "anelkin", "version": env!("CARGO_PKG_VERSION") },
            "command": command,
            "config": {
                "tol_rel": self.config.tol_rel,
                "tol_decomp": self.config.tol_decomp,
                "closure_bound": self.config.closure_bound,
                "rng_seed": self.config.rng_seed,
            },
            "seed": self.config.rng_seed,
            "result": result,
        })
    }

    fn write(&self, text: &str) -> Result<()> {
        match &self.cli.out {
            Some(path) => std::fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display()))),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    fn write_report(&self, command: &str, result: Value) -> Result<()> {
        self.write(&to_json_string(&self.envelope(command, result))?)
    }

    fn check(&self, input: &Path) -> Result<Verdict> {
        let c = read_configuration(input)?;
        let holonomy = c.is_holonomic(self.tol());
        let field = c.as_standalone();
        let verdict = field.is_gradient(self.tol())?;
        let (facets, vertices) = match &verdict {
            GradientVerdict::Gradient { .. } => (Vec::new(), Vec::new()),
            GradientVerdict::NotGradient {
                violating_facets,
                inconsistent_vertices,
            } => (violating_facets.clone(), inconsistent_vertices.clone()),
        };
        let result = json!({
            "input": input.display().to_string(),
            "cells": c.body().num_cells(),
            "vertices": c.body().num_vertices(),
            "holonomic": holonomy.holonomic,
            "max_holonomy_residual": holonomy.max_residual,
            "gradient": verdict.is_gradient(),
            "incompatibility_norm": field.incompatibility_norm()?,
            "violating_facets": facets,
            "inconsistent_vertices": vertices,
        });
        self.write_report("check", result)?;
        Ok(if verdict.is_gradient() {
            Verdict::Success
        } else {
            Verdict::Incompatible
        })
    }

    fn decompose(&self, input: &Path) -> Result<Verdict> {
        let c = read_configuration(input)?;
        let split = decompose(&c)?;
        let residual = split.reconstruction_residual(&c);
        let prefix = self.cli.out.clone().unwrap_or_else(|| input.with_extension(""));
        let compatible_path = suffixed(&prefix, "-compatible.json");
        let embodiment_path = suffixed(&prefix, "-embodiment.json");
        let compatible =
            MeshFieldDocument::from_configuration(&split.compatible).with_metadata("role", "compatible factor");
        let embodiment =
            MeshFieldDocument::from_field(c.body(), split.anelastic.field()).with_metadata("role", "embodiment");
        std::fs::write(&compatible_path, compatible.emit()?)?;
        std::fs::write(&embodiment_path, embodiment.emit()?)?;
        let accepted = residual <= self.config.tol_decomp;
        let report = self.envelope(
            "decompose",
            json!({
                "input": input.display().to_string(),
                "compatible": compatible_path.display().to_string(),
                "embodiment": embodiment_path.display().to_string(),
                "reconstruction_residual": residual,
                "accepted": accepted,
                "embodiment_is_identity": split.anelastic.is_identity(self.tol()),
            }),
        );
        print!("{}", to_json_string(&report)?);
        if accepted {
            Ok(Verdict::Success)
        } else {
            Err(usage(format!(
                "reconstruction residual {} exceeds tol_decomp {}",
                format_f64(residual),
                format_f64(self.config.tol_decomp)
            )))
        }
    }

    fn equiv(&self, first: &Path, second: Option<&Path>, affine: Option<&str>) -> Result<Verdict> {
        let a = read_configuration(first)?;
        let (lhs, rhs) = match (second, affine) {
            (None, None) => return Err(usage("equiv needs a second document or --affine")),
            (Some(path), g) => {
                let b = MeshFieldDocument::read(path)?.to_configuration_on(a.body().clone())?;
                let lhs = match g {
                    Some(text) => push_forward(&a, &parse_affine(text, a.body().dim())?)?,
                    None => a,
                };
                (lhs, b)
            }
            (None, Some(text)) => {
                let g = parse_affine(text, a.body().dim())?;
                let pushed = push_forward(&a, &g)?;
                (a, pushed)
            }
        };
        let deviation = embodiment_deviation(&lhs, &rhs)?;
        let equivalent = deviation <= self.tol();
        let witness = find_affine_displacement(lhs.base(), rhs.base())?
            .filter(|fit| fields_follow(&lhs, &rhs, fit, self.tol()))
            .map(|fit| {
                json!({
                    "linear": fit.map.linear().row_major(),
                    "translation": fit.map.offset().as_slice(),
                    "degenerate": fit.degenerate,
                    "residual": fit.residual,
                })
            });
        let result = json!({
            "equivalent": equivalent,
            "max_embodiment_deviation": deviation,
            "affine_displacement": witness,
        });
        self.write_report("equiv", result)?;
        Ok(if equivalent {
            Verdict::Success
        } else {
            Verdict::Incompatible
        })
    }

    fn groupoid(&self, manifest: &Path) -> Result<Verdict> {
        let text = std::fs::read_to_string(manifest).map_err(|e| usage(format!("{}: {e}", manifest.display())))?;
        let family = FamilyManifest::parse(&text)?;
        let pcs = family.to_point_set()?;
        let cg = configuration_groupoid_bounded(&pcs, self.config.closure_bound)?;
        let report = cg.groupoid.verify_axioms();
        let axioms: Vec<Value> = report
            .checks()
            .iter()
            .map(|(name, check)| {
                json!({
                    "axiom": name,
                    "passed": check.passed,
                    "counterexample": check.counterexample,
                    "detail": check.detail,
                })
            })
            .collect();
        let passed = report.all_passed();
        let mut orbit_reports = Vec::new();
        if passed {
            let witnesses = cg.found_witnesses();
            for orbit in cg.groupoid.orbits()? {
                let configs: Vec<Vec<Vector>> = orbit.iter().map(|&k| pcs.configs()[k].clone()).collect();
                let local: Vec<PointWitness> = witnesses
                    .iter()
                    .filter_map(|w| {
                        let from = orbit.iter().position(|&k| k == w.from)?;
                        let to = orbit.iter().position(|&k| k == w.to)?;
                        Some(PointWitness {
                            from,
                            to,
                            displacement: w.displacement.clone(),
                        })
                    })
                    .collect();
                let bp = body_points(&configs, &local)?;
                orbit_reports.push(json!({
                    "configs": orbit,
                    "body_points": bp.len(),
                    "image_sizes": (0..configs.len()).map(|k| bp.placed.image_of(k).len()).collect::<Vec<_>>(),
                    "bijective": bp.bijective,
                }));
            }
        }
        let result = json!({
            "objects": cg.groupoid.num_objects,
            "morphisms": cg.groupoid.num_morphisms(),
            "protobody_points": pcs.labels().len(),
            "axioms": axioms,
            "axioms_passed": passed,
            "orbits": orbit_reports,
        });
        self.write_report("groupoid", result)?;
        Ok(if passed {
            Verdict::Success
        } else {
            Verdict::Incompatible
        })
    }

    fn synth_dislocation(&self, args: &DislocationArgs) -> Result<Verdict> {
        let b = parse_floats(&args.b, "--b")?;
        let [b0, b1] = b[..] else {
            return Err(usage("--b needs two components"));
        };
        let mut spec = DislocationSpec::edge(args.grid, [b0, b1]);
        if let Some(text) = &args.core {
            let core = parse_floats(text, "--core")?;
            let [x, y] = core[..] else {
                return Err(usage("--core needs two components"));
            };
            spec.core = [x, y];
        }
        spec.kind = match args.kind {
            DefectKind::Edge => DislocationKind::Edge,
            DefectKind::Screw => DislocationKind::ScrewAnalogue,
        };
        let d = make_dislocated(&spec)?;
        let doc = MeshFieldDocument::from_configuration(&d.configuration)
            .with_metadata("generator", "dislocation")
            .with_metadata("kind", format!("{:?}", spec.kind).to_lowercase())
            .with_metadata("burgers", format!("{},{}", format_f64(b0), format_f64(b1)))
            .with_metadata(
                "core",
                format!("{},{}", format_f64(spec.core[0]), format_f64(spec.core[1])),
            )
            .with_metadata("core_cell", d.core_cell.to_string())
            .with_metadata("grid", args.grid.to_string())
            .with_metadata("poisson", format_f64(spec.poisson));
        self.write(&doc.emit()?)?;
        Ok(Verdict::Success)
    }

    fn synth_quasicrystal(&self, args: &QuasicrystalArgs) -> Result<Verdict> {
        let slope = args.slope.unwrap_or(2.0 / (1.0 + 5f64.sqrt()));
        if !(slope.is_finite() && slope > 0.0) {
            return Err(usage("--slope must be positive"));
        }
        // accepted points per unit parallel length for the unit-square window
        let density = (1.0 + slope) / (1.0 + slope * slope).sqrt();
        let length = args.length.unwrap_or(1.05 * args.points as f64 / density + 2.0);
        let qc = cut_and_project(&CutProjectSpec::chain(slope, length, args.points)?)?;
        self.write(&write_points_csv(&qc.points)?)?;
        Ok(Verdict::Success)
    }

    fn synth_random(&self, args: &RandomArgs) -> Result<Verdict> {
        if !(args.dim == 2 || args.dim == 3) {
            return Err(usage("--dim must be 2 or 3"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.rng_seed);
        let body = Arc::new(random_body(&mut rng, args.dim, args.cells)?);
        let c = random_configuration(&mut rng, body)?;
        let doc = MeshFieldDocument::from_configuration(&c)
            .with_metadata("generator", "random")
            .with_metadata("seed", self.config.rng_seed.to_string());
        self.write(&doc.emit()?)?;
        Ok(Verdict::Success)
    }

    fn burgers(&self, input: &Path, loop_text: &str) -> Result<Verdict> {
        let c = read_configuration(input)?;
        let loop_vertices = parse_loop(loop_text)?;
        let circulation = burgers_of_configuration(&c, &loop_vertices, self.tol())?.value();
        let result = json!({
            "input": input.display().to_string(),
            "loop": loop_vertices,
            "burgers": circulation.as_slice(),
            "norm": circulation.norm(),
            "convention": BURGERS_CONVENTION,
        });
        self.write_report("burgers", result)?;
        Ok(Verdict::Success)
    }

    fn report(&self, input: &Path, loop_text: Option<&str>) -> Result<Verdict> {
        let c = read_configuration(input)?;
        let loop_vertices = loop_text.map(parse_loop).transpose()?;
        if let Some(l) = &loop_vertices {
            if let Some(v) = l.iter().find(|&&v| v >= c.body().num_vertices()) {
                return Err(usage(format!("loop vertex {v} out of range")));
            }
        }
        // residuals within the verdict tolerance are drawn as zero
        let field = c.as_standalone();
        let reference = field.field().iter().map(LinearMap::frobenius_norm).fold(1.0, f64::max) * c.body().scale();
        let floor = (self.tol() * reference).powi(2);
        let values: Vec<f64> = field
            .cell_incompatibility()?
            .into_iter()
            .map(|v| if v <= floor { 0.0 } else { v })
            .collect();
        let title = input
            .file_name()
            .map_or_else(|| input.display().to_string(), |n| n.to_string_lossy().into_owned());
        let svg = render_svg(&SvgReport {
            body: c.body(),
            coords: c.base(),
            cell_values: &values,
            loop_vertices: loop_vertices.as_deref(),
            title: &title,
        })?;
        self.write(&svg)?;
        Ok(Verdict::Success)
    }
}

fn read_configuration(path: &Path) -> Result<Configuration> {
    let doc = MeshFieldDocument::read(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    Ok(doc.to_configuration()?)
}

fn suffixed(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn fields_follow(from: &Configuration, to: &Configuration, fit: &AffineFit, tol: f64) -> bool {
    let a = fit.map.linear();
    from.field()
        .iter()
        .zip(to.field())
        .all(|(f, t)| (*a * *f).relative_deviation(t) <= tol)
}

fn parse_floats(text: &str, flag: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| usage(format!("{flag}: cannot parse {s:?} as a number")))
        })
        .collect()
}

fn parse_loop(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| usage(format!("--loop: cannot parse {s:?} as a vertex index")))
        })
        .collect()
}

/// Parses `"a11,a12,...;c1,..."` into an affine displacement of dimension `dim`.
pub fn parse_affine(text: &str, dim: usize) -> Result<SpaceDiffeo> {
    let (linear, translation) = text
        .split_once(';')
        .ok_or_else(|| usage("--affine: expected \"a11,a12,...;c1,c2,...\""))?;
    let linear = parse_floats(linear, "--affine")?;
    let translation = parse_floats(translation, "--affine")?;
    if linear.len() != dim * dim || translation.len() != dim {
        return Err(usage(format!(
            "--affine: expected {} matrix entries and {dim} offsets for a {dim}-d body",
            dim * dim
        )));
    }
    Ok(SpaceDiffeo::affine(
        LinearMap::from_row_major(&linear)?,
        Vector::from_slice(&translation),
    )?)
}
