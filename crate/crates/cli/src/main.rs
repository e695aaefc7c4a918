//! `gausurf` — command-line experiments on Gaussian-weighted surface
//! geometry. Every run writes a manifest JSON (command, merged config,
//! version, wall time) beside its outputs so published numbers can be
//! reproduced byte for byte.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use gausurf::entropy::{entropy, EntropyOpts};
use gausurf::measure::gaussian_area;
use gausurf::mesh::obj::{read_obj, write_obj};
use gausurf::mesh::primitives::{cylinder, ellipsoid, icosphere, perturbed_sphere, plane_disk, torus};
use gausurf::mesh::implicit::genus2_mesh;
use gausurf::mesh::TriMesh;
use gausurf::quad::QuadratureSpec;
use gausurf::report::{entropy_grid_csv, sig9, tighten_trace_csv, width_grid_csv};
use gausurf::sweepout::{example_family, gauss_degree, width_upper_bound, ParamGrid, SweepoutFamily};
use gausurf::tighten::{shrinker_flow, tighten, StepControl};
use gausurf::variation::{morse_index, shrinker_residual, stability_spectrum};
use gausurf::verify::run_all;
use gausurf::Error;

#[derive(Parser)]
#[command(name = "gausurf", version, about = "Gaussian area, entropy, shrinker spectra, tightening flows, and sweepout widths")]
struct Cli {
    /// Flat key=value config file; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default ".", or the GAUSURF_OUT environment variable).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Cap the rayon worker count (default: hardware parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed recorded in the manifest and used by Monte Carlo steps.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone, Default)]
struct MeshSource {
    /// Load a mesh from an OBJ file.
    #[arg(long)]
    mesh: Option<PathBuf>,
    /// Generate a mesh: sphere | ellipsoid | cylinder | plane | torus |
    /// genus2 | perturbed-sphere.
    #[arg(long = "gen")]
    generator: Option<String>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    refine: Option<u32>,
    #[arg(long)]
    height: Option<f64>,
    /// Ellipsoid semi-axes as "a,b,c".
    #[arg(long)]
    semi: Option<String>,
    /// Perturbation amplitude for perturbed-sphere.
    #[arg(long)]
    eps: Option<f64>,
    /// Torus center-circle radius.
    #[arg(long)]
    big_radius: Option<f64>,
    /// Torus tube radius.
    #[arg(long)]
    tube: Option<f64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a mesh and write it as OBJ.
    Gen(MeshSource),
    /// Gaussian area F with the adaptive quadrature error estimate.
    Area(MeshSource),
    /// Entropy λ = sup F_{x0,t0}; writes the optimizer grid as CSV.
    Entropy {
        #[command(flatten)]
        src: MeshSource,
        #[arg(long)]
        grid_n: Option<usize>,
        #[arg(long)]
        starts: Option<usize>,
    },
    /// Shrinker residual H − ⟨x,n⟩/2: sup and weighted L² norms.
    Residual(MeshSource),
    /// Top eigenvalues of the stability operator.
    Spectrum {
        #[command(flatten)]
        src: MeshSource,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Morse index (count of eigenvalues above the tolerance band).
    Index {
        #[command(flatten)]
        src: MeshSource,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Rescaled-MCF gradient flow; writes the final mesh as OBJ.
    Flow {
        #[command(flatten)]
        src: MeshSource,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        remesh_every: Option<usize>,
    },
    /// Two-case tightening descent; writes the trace CSV and final mesh.
    Tighten {
        #[command(flatten)]
        src: MeshSource,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Sweepout width upper bound; writes the scanned grid as CSV.
    Width {
        /// plane | sphere | translated-sphere | canonical.
        #[arg(long)]
        family: Option<String>,
        /// Mesh source for the canonical family.
        #[command(flatten)]
        src: MeshSource,
        #[arg(long)]
        shift: Option<f64>,
        #[arg(long)]
        collar_eps: Option<f64>,
        #[arg(long)]
        nt: Option<usize>,
        #[arg(long)]
        n_tau: Option<usize>,
    },
    /// Degree of the Gauss map (1 − genus for closed surfaces).
    Degree(MeshSource),
    /// Run the full acceptance suite and print a pass/fail table.
    Verify,
}

/// Values from the config file keyed by flag name; flags override these,
/// and these override built-in defaults.
struct Cfg {
    map: BTreeMap<String, String>,
}

impl Cfg {
    fn load(path: Option<&Path>) -> Result<Cfg, Error> {
        let mut map = BTreeMap::new();
        if let Some(p) = path {
            let text = std::fs::read_to_string(p)?;
            for (i, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let Some((k, v)) = line.split_once('=') else {
                    return Err(Error::Parse {
                        line: i + 1,
                        msg: format!("expected key=value, got {line:?}"),
                    });
                };
                map.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        Ok(Cfg { map })
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, Error> {
        match self.map.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse().map(Some).map_err(|_| {
                Error::Parameter(format!("config key {key}: cannot parse {raw:?}"))
            }),
        }
    }
}

/// Merged run record: every resolved setting lands here and in the
/// manifest, so two manifests with equal config blocks reproduce equal
/// outputs.
struct Run {
    command: String,
    cfg: Cfg,
    settings: BTreeMap<String, String>,
    out_dir: PathBuf,
    started: Instant,
}

impl Run {
    fn new(command: &str, cli: &Cli) -> Result<Run, Error> {
        let cfg = Cfg::load(cli.config.as_deref())?;
        let out_dir = cli
            .out
            .clone()
            .or_else(|| std::env::var_os("GAUSURF_OUT").map(PathBuf::from))
            .or(cfg.get("out")?)
            .unwrap_or_else(|| PathBuf::from("."));
        std::fs::create_dir_all(&out_dir)?;
        let mut run = Run {
            command: command.to_string(),
            cfg,
            settings: BTreeMap::new(),
            out_dir,
            started: Instant::now(),
        };
        let threads = run.resolve("threads", cli.threads, 0)?;
        if threads > 0 {
            // a second build_global in-process is harmless; ignore it
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global();
        }
        run.resolve("seed", cli.seed, 0u64)?;
        Ok(run)
    }

    /// flag > config file > default, recording the winner.
    fn resolve<T: FromStr + ToString + Clone>(
        &mut self,
        key: &str,
        flag: Option<T>,
        default: T,
    ) -> Result<T, Error> {
        let v = match flag {
            Some(v) => v,
            None => self.cfg.get(key)?.unwrap_or(default),
        };
        self.settings.insert(key.to_string(), v.to_string());
        Ok(v)
    }

    fn resolve_opt<T: FromStr + ToString + Clone>(
        &mut self,
        key: &str,
        flag: Option<T>,
    ) -> Result<Option<T>, Error> {
        let v = match flag {
            Some(v) => Some(v),
            None => self.cfg.get(key)?,
        };
        if let Some(v) = &v {
            self.settings.insert(key.to_string(), v.to_string());
        }
        Ok(v)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    fn write_manifest(&self) -> Result<(), Error> {
        let manifest = serde_json::json!({
            "command": self.command,
            "config": self.settings,
            "versions": { "gausurf": env!("CARGO_PKG_VERSION") },
            "wall_time_seconds": self.started.elapsed().as_secs_f64(),
        });
        let path = self.path("manifest.json");
        std::fs::write(&path, serde_json::to_string_pretty(&manifest)?.as_bytes() )?;
        Ok(())
    }

    fn load_mesh(&mut self, src: &MeshSource) -> Result<TriMesh, Error> {
        match (&src.mesh, &src.generator) {
            (Some(_), Some(_)) => Err(Error::Parameter(
                "give exactly one mesh source: --mesh or --gen".into(),
            )),
            (Some(path), None) => {
                self.settings.insert("mesh".into(), path.display().to_string());
                read_obj(path)
            }
            (None, generator) => {
                let gen = match generator {
                    Some(g) => Some(g.clone()),
                    None => self.cfg.get::<String>("gen")?,
                };
                let Some(gen) = gen else {
                    return Err(Error::Parameter(
                        "give exactly one mesh source: --mesh or --gen".into(),
                    ));
                };
                self.settings.insert("gen".into(), gen.clone());
                self.generate(&gen, src)
            }
        }
    }

    fn generate(&mut self, gen: &str, src: &MeshSource) -> Result<TriMesh, Error> {
        match gen {
            "sphere" => {
                let r = self.resolve("radius", src.radius, 2.0)?;
                let refine = self.resolve("refine", src.refine, 4)?;
                icosphere(r, refine)
            }
            "ellipsoid" => {
                let semi = self.resolve("semi", src.semi.clone(), "2.2,2.0,1.8".to_string())?;
                let refine = self.resolve("refine", src.refine, 3)?;
                let parts: Vec<f64> = semi
                    .split(',')
                    .map(|s| s.trim().parse())
                    .collect::<Result<_, _>>()
                    .map_err(|_| Error::Parameter(format!("bad --semi {semi:?}")))?;
                let [a, b, c] = parts[..] else {
                    return Err(Error::Parameter("--semi needs three axes a,b,c".into()));
                };
                ellipsoid([a, b, c], refine)
            }
            "cylinder" => {
                let r = self.resolve("radius", src.radius, 2.0f64.sqrt())?;
                let h = self.resolve("height", src.height, 8.0)?;
                let refine = self.resolve("refine", src.refine, 3)?;
                cylinder(r, h, refine)
            }
            "plane" => {
                let r = self.resolve("radius", src.radius, 8.0)?;
                let refine = self.resolve("refine", src.refine, 3)?;
                plane_disk(r, refine)
            }
            "torus" => {
                let big = self.resolve("big-radius", src.big_radius, 2.0)?;
                let tube = self.resolve("tube", src.tube, 0.8)?;
                let refine = self.resolve("refine", src.refine, 3)?;
                torus(big, tube, refine)
            }
            "genus2" => {
                let refine = self.resolve("refine", src.refine, 1)?;
                genus2_mesh(refine)
            }
            "perturbed-sphere" => {
                let r = self.resolve("radius", src.radius, 2.0)?;
                let eps = self.resolve("eps", src.eps, 0.1)?;
                let refine = self.resolve("refine", src.refine, 3)?;
                perturbed_sphere(r, eps, refine)
            }
            other => Err(Error::Parameter(format!(
                "unknown generator {other:?} (sphere, ellipsoid, cylinder, plane, torus, genus2, perturbed-sphere)"
            ))),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.kind());
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(), Error> {
    let quad = QuadratureSpec::default();
    match &cli.cmd {
        Cmd::Gen(src) => {
            let mut run = Run::new("gen", cli)?;
            let mesh = run.load_mesh(src)?;
            let path = run.path("mesh.obj");
            write_obj(&mesh, &path)?;
            println!(
                "wrote {} ({} vertices, {} faces)",
                path.display(),
                mesh.vertices().len(),
                mesh.faces().len()
            );
            run.write_manifest()
        }
        Cmd::Area(src) => {
            let mut run = Run::new("area", cli)?;
            let mesh = run.load_mesh(src)?;
            let a = gaussian_area(&mesh, &quad, None)?;
            println!("F = {} ± {}", sig9(a.value), sig9(a.error_estimate));
            run.write_manifest()
        }
        Cmd::Entropy { src, grid_n, starts } => {
            let mut run = Run::new("entropy", cli)?;
            let mesh = run.load_mesh(src)?;
            let mut opts = EntropyOpts::default();
            opts.grid_n = run.resolve("grid_n", *grid_n, opts.grid_n)?;
            opts.starts = run.resolve("starts", *starts, opts.starts)?;
            let e = entropy(&mesh, &opts, &quad, None)?;
            println!(
                "lambda = {}  at x0 = ({}, {}, {}), t0 = {}",
                sig9(e.lambda),
                sig9(e.argmax.x0.x),
                sig9(e.argmax.x0.y),
                sig9(e.argmax.x0.z),
                sig9(e.argmax.t0)
            );
            entropy_grid_csv(&e.trace, &run.path("entropy_grid.csv"))?;
            run.write_manifest()
        }
        Cmd::Residual(src) => {
            let mut run = Run::new("residual", cli)?;
            let mesh = run.load_mesh(src)?;
            let rep = shrinker_residual(&mesh);
            println!("sup = {}  weighted L2 = {}", sig9(rep.sup), sig9(rep.l2));
            run.write_manifest()
        }
        Cmd::Spectrum { src, k } => {
            let mut run = Run::new("spectrum", cli)?;
            let mesh = run.load_mesh(src)?;
            let k = run.resolve("k", *k, 9)?;
            let spec = stability_spectrum(&mesh, k)?;
            for ev in &spec.eigenvalues {
                println!("{}", sig9(*ev));
            }
            std::fs::write(
                run.path("spectrum.json"),
                serde_json::to_string_pretty(&spec)?.as_bytes(),
            )?;
            run.write_manifest()
        }
        Cmd::Index { src, k, tol } => {
            let mut run = Run::new("index", cli)?;
            let mesh = run.load_mesh(src)?;
            let k = run.resolve("k", *k, 9)?;
            let tol = run.resolve("tol", *tol, 1e-3)?;
            let spec = stability_spectrum(&mesh, k)?;
            println!("index = {}", morse_index(&spec, tol)?);
            run.write_manifest()
        }
        Cmd::Flow { src, steps, dt, remesh_every } => {
            let mut run = Run::new("flow", cli)?;
            let mesh = run.load_mesh(src)?;
            let steps = run.resolve("steps", *steps, 100)?;
            let dt = run.resolve("dt", *dt, 0.01)?;
            let remesh = run.resolve_opt("remesh_every", *remesh_every)?;
            let traj = shrinker_flow(&mesh, steps, dt, remesh, &quad)?;
            let first = gaussian_area(&traj[0], &quad, None)?.value;
            let last_mesh = traj.last().expect("trajectory includes the start");
            let last = gaussian_area(last_mesh, &quad, None)?.value;
            let path = run.path("flowed.obj");
            write_obj(last_mesh, &path)?;
            println!(
                "F: {} -> {} over {} steps; wrote {}",
                sig9(first),
                sig9(last),
                traj.len() - 1,
                path.display()
            );
            run.write_manifest()
        }
        Cmd::Tighten { src, steps } => {
            let mut run = Run::new("tighten", cli)?;
            let mesh = run.load_mesh(src)?;
            let steps = run.resolve("steps", *steps, 200)?;
            let (trace, tightened) = tighten(&mesh, steps, &StepControl::default(), &quad)?;
            tighten_trace_csv(&trace, &run.path("tighten_trace.csv"))?;
            let path = run.path("tightened.obj");
            write_obj(&tightened, &path)?;
            let f = gaussian_area(&tightened, &quad, None)?.value;
            println!(
                "{} steps, final gamma = {}, F = {}; wrote {}",
                trace.steps.len(),
                sig9(trace.final_gamma),
                sig9(f),
                path.display()
            );
            run.write_manifest()
        }
        Cmd::Width { family, src, shift, collar_eps, nt, n_tau } => {
            let mut run = Run::new("width", cli)?;
            let kind = run.resolve("family", family.clone(), "plane".to_string())?;
            let fam = if kind == "canonical" {
                let mesh = run.load_mesh(src)?;
                let eps = run.resolve("collar_eps", *collar_eps, 0.05)?;
                SweepoutFamily::Canonical { mesh, epsilon: eps }
            } else {
                let shift = run.resolve("shift", *shift, 50.0)?;
                let refine = run.resolve("refine", src.refine, 4)?;
                example_family(&kind, shift, refine)?
            };
            let grid = ParamGrid {
                nt: run.resolve("nt", *nt, ParamGrid::default().nt)?,
                n_tau: run.resolve("n_tau", *n_tau, ParamGrid::default().n_tau)?,
            };
            let rep = width_upper_bound(&fam, &grid, &quad)?;
            println!(
                "max F = {}  at t = ({}, {}, {}), tau = {}",
                sig9(rep.max_f),
                sig9(rep.argmax_t.x),
                sig9(rep.argmax_t.y),
                sig9(rep.argmax_t.z),
                sig9(rep.argmax_tau)
            );
            width_grid_csv(&rep, &run.path("width_grid.csv"))?;
            run.write_manifest()
        }
        Cmd::Degree(src) => {
            let mut run = Run::new("degree", cli)?;
            let mesh = run.load_mesh(src)?;
            let (deg, residual) = gauss_degree(&mesh)?;
            println!("degree = {deg} (rounding residual {})", sig9(residual));
            run.write_manifest()
        }
        Cmd::Verify => {
            let run = Run::new("verify", cli)?;
            let reports = run_all();
            let mut all_pass = true;
            for r in &reports {
                println!(
                    "{:>2}. {:<55} {}",
                    r.id,
                    r.name,
                    if r.pass { "pass" } else { "FAIL" }
                );
                if !r.pass {
                    all_pass = false;
                    for line in r.details.lines() {
                        println!("      {line}");
                    }
                }
            }
            std::fs::write(
                run.path("verify.json"),
                serde_json::to_string_pretty(&reports)?.as_bytes(),
            )?;
            run.write_manifest()?;
            if all_pass {
                Ok(())
            } else {
                Err(Error::Inconclusive("acceptance criteria failed".into()))
            }
        }
    }
}
