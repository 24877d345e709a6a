//! Thin command-line surface over the library: conform a mesh to a curve,
//! run a configured propagation, execute a verification suite, or report
//! mesh quality.
//!
//! Exit codes: 0 success, 1 verification failure, 2 invalid input,
//! 3 numerical failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use unimesh::config::{RunConfig, RunManifest};
use unimesh::conform::{conform, ConformParams};
use unimesh::error::PipelineError;
use unimesh::io;
use unimesh::verify;

const USAGE: &str = "usage: unimesh <command> [options]

commands:
  conform --mesh <file> --curve <file> [--out <dir>]
      deform the mesh to the curve; writes conformed mesh and VTK, prints
      the minimum element quality and the maximum boundary deviation
  propagate --config <file>
      run a quasi-static propagation; writes the record CSV, per-step VTK
      and a run manifest into the output directory
  verify --suite <name> [--seed <n>]
      run a verification suite and print PASS/FAIL with measured numbers;
      suites: conform-fuzz, quality-refinement, patch, manufactured,
      griffith, kink, mode1, arc, determinism
  quality --mesh <file>
      print the element-quality histogram of a mesh

options:
  --out <dir>   output directory (default `out`; env UNIMESH_OUT overrides)
  --help        this message followed by every configuration key

exit codes: 0 success, 1 verification failure, 2 invalid input,
3 numerical failure
";

fn out_dir(flag: Option<PathBuf>) -> PathBuf {
    match std::env::var_os("UNIMESH_OUT") {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => flag.unwrap_or_else(|| PathBuf::from("out")),
    }
}

/// 2 for malformed input or config, 3 for numerical trouble downstream.
fn error_exit(e: &PipelineError) -> ExitCode {
    let invalid = matches!(
        e,
        PipelineError::Config(_)
            | PipelineError::IoFormat(_)
            | PipelineError::Geometry(_)
            | PipelineError::Curve(_)
    );
    eprintln!("error: {e}");
    if invalid {
        ExitCode::from(2)
    } else {
        ExitCode::from(3)
    }
}

struct Args {
    flags: Vec<(String, String)>,
}

impl Args {
    fn parse(argv: &[String]) -> Result<Args, String> {
        let mut flags = Vec::new();
        let mut it = argv.iter();
        while let Some(a) = it.next() {
            let key = a
                .strip_prefix("--")
                .ok_or_else(|| format!("unexpected argument `{a}`"))?;
            let value = it
                .next()
                .ok_or_else(|| format!("flag --{key} needs a value"))?;
            flags.push((key.to_string(), value.clone()));
        }
        Ok(Args { flags })
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.flags
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    fn require(&self, key: &str) -> Result<&str, String> {
        self.get(key).ok_or_else(|| format!("missing --{key}"))
    }
}

fn cmd_conform(args: &Args) -> Result<ExitCode, PipelineError> {
    let mesh_path = match args.require("mesh") {
        Ok(p) => p.to_string(),
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(ExitCode::from(2));
        }
    };
    let curve_path = match args.require("curve") {
        Ok(p) => p.to_string(),
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(ExitCode::from(2));
        }
    };
    let dir = out_dir(args.get("out").map(PathBuf::from));
    let mesh = io::read_mesh(&mesh_path)?;
    let curve = io::read_curve(&curve_path)?;
    let conformed = conform(&mesh, &curve, &ConformParams::default())?;
    let tri = conformed.triangulation()?;
    let max_dev = conformed
        .gamma
        .chain
        .iter()
        .map(|&v| curve.closest_point(conformed.positions[v]).distance)
        .fold(0.0f64, f64::max);
    std::fs::create_dir_all(&dir).map_err(|source| unimesh::error::IoError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    io::write_mesh(dir.join("conformed.mesh"), &tri)?;
    let quality = tri.quality_report().per_triangle;
    io::write_vtk(
        dir.join("conformed.vtk"),
        &tri,
        None,
        None,
        Some(("quality", &quality)),
    )?;
    println!("min quality: {:.6}", conformed.min_quality);
    println!("max boundary deviation: {:.3e}", max_dev);
    println!("wrote {} and {}", dir.join("conformed.mesh").display(), dir.join("conformed.vtk").display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_propagate(args: &Args) -> Result<ExitCode, PipelineError> {
    let config_path = match args.require("config") {
        Ok(p) => p.to_string(),
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(ExitCode::from(2));
        }
    };
    let cfg = RunConfig::read(&config_path)?;
    let dir = cfg.out_dir();
    std::fs::create_dir_all(&dir).map_err(|source| unimesh::error::IoError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let start = std::time::Instant::now();
    let mut artifacts: Vec<PathBuf> = Vec::new();
    let mut step_error: Option<PipelineError> = None;
    let problem = cfg.problem.clone();
    let result = verify::run_from_config(&cfg, |step, out| {
        let path = dir.join(format!("{problem}-step{step:03}.vtk"));
        let quality = out.p2.tri.quality_report().per_triangle;
        let disp: Vec<[f64; 2]> = (0..out.p2.tri.vertices.len())
            .map(|i| [out.solution.u[2 * i], out.solution.u[2 * i + 1]])
            .collect();
        if let Err(e) = io::write_vtk(
            &path,
            &out.p2.tri,
            Some(&disp),
            None,
            Some(("quality", &quality)),
        ) {
            step_error.get_or_insert(e.into());
        } else {
            artifacts.push(path);
        }
    });
    if let Some(e) = step_error {
        return Err(e);
    }
    let outputs = result?;
    let records_path = dir.join(format!("{}-records.csv", cfg.problem));
    let crack_path = dir.join(format!("{}-crack.path", cfg.problem));
    io::write_records(&records_path, &outputs.records)?;
    io::write_crack_path(&crack_path, &outputs.crack)?;
    artifacts.push(records_path.clone());
    artifacts.push(crack_path);
    let manifest = RunManifest {
        config: cfg.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        artifacts,
        wall_seconds: start.elapsed().as_secs_f64(),
        status: "ok".to_string(),
    };
    manifest.write(dir.join(format!("{}-manifest.txt", cfg.problem)))?;
    println!(
        "{} steps, final ell = {:.6}, records in {}",
        outputs.records.len(),
        outputs.crack.ell,
        records_path.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: &Args) -> ExitCode {
    let suite = match args.require("suite") {
        Ok(s) => s.to_string(),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let seed: u64 = match args.get("seed").map(|s| s.parse()).transpose() {
        Ok(s) => s.unwrap_or(0),
        Err(_) => {
            eprintln!("error: --seed must be an integer");
            return ExitCode::from(2);
        }
    };
    match verify::suite_by_name(&suite, seed) {
        Some(report) => {
            for line in &report.lines {
                println!("  {line}");
            }
            println!("{}: {}", report.name, if report.pass { "PASS" } else { "FAIL" });
            if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        None => {
            eprintln!(
                "error: unknown suite `{suite}` (available: {})",
                verify::SUITE_NAMES.join(", ")
            );
            ExitCode::from(2)
        }
    }
}

fn cmd_quality(args: &Args) -> Result<ExitCode, PipelineError> {
    let mesh_path = match args.require("mesh") {
        Ok(p) => p.to_string(),
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(ExitCode::from(2));
        }
    };
    let mesh = io::read_mesh(Path::new(&mesh_path))?;
    let report = mesh.quality_report();
    println!(
        "{} triangles, min quality {:.6}",
        mesh.triangles.len(),
        report.min_q
    );
    for (i, count) in report.histogram.iter().enumerate() {
        println!(
            "  [{:.1}, {:.1}): {count}",
            i as f64 / 10.0,
            (i + 1) as f64 / 10.0
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    if argv.iter().any(|a| a == "--help" || a == "-h") || argv.is_empty() {
        println!("{USAGE}");
        println!("{}", RunConfig::help_text());
        return ExitCode::SUCCESS;
    }
    let command = argv[0].clone();
    let args = match Args::parse(&argv[1..]) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match command.as_str() {
        "conform" => cmd_conform(&args).unwrap_or_else(|e| error_exit(&e)),
        "propagate" => cmd_propagate(&args).unwrap_or_else(|e| error_exit(&e)),
        "verify" => cmd_verify(&args),
        "quality" => cmd_quality(&args).unwrap_or_else(|e| error_exit(&e)),
        other => {
            eprintln!("error: unknown command `{other}`\n{USAGE}");
            ExitCode::from(2)
        }
    }
}
