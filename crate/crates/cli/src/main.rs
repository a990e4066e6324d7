//! `rigplan`: validate a sensor rig and run its coverage, network and power checks.
//!
//! Exit status: 0 when every check passes, 1 when a domain check fails, 2 for
//! usage, input or parse errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rigplan::coverage::{azimuthal_coverage, blind_spot_area, coverage_grid, GridSpec};
use rigplan::power::{bundled_profile, runtime_for_states, simulate_soc, LoadProfile, Runtime, BUNDLED_PROFILES};
use rigplan::report::{build_report, network_check, runtime_text, CoverageOptions};
use rigplan::rig::{bundled_rig_source, export_twin, TwinError};
use rigplan::{parse_rig, validate_rig, Modality, RigSpec};

#[derive(Parser)]
#[command(name = "rigplan", version, about = "Sensor rig coverage, network and power planning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a rig document.
    Validate {
        /// Rig document; the bundled reference rig when omitted.
        rig: Option<PathBuf>,
    },
    /// Ground-level coverage maps and azimuthal sweep per sensor group.
    Coverage {
        rig: Option<PathBuf>,
        /// Modality group; every surround group when omitted.
        #[arg(long)]
        group: Option<Modality>,
        #[arg(long = "height-m", alias = "height", default_value_t = 1.0)]
        height_m: f64,
        /// Half-width of the square grid.
        #[arg(long = "extent-m", alias = "extent", default_value_t = 30.0)]
        extent_m: f64,
        #[arg(long = "cell-m", alias = "cell", default_value_t = 0.1)]
        cell_m: f64,
        /// Radius of the azimuthal sweep and the blind-area disc.
        #[arg(long = "radius-m", alias = "radius", default_value_t = 10.0)]
        radius_m: f64,
        #[arg(long = "step-deg", default_value_t = 0.5)]
        step_deg: f64,
        /// Directory for `<group>.pgm`, `<group>.csv` and `<group>.summary.txt`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Link utilization, VLAN matrix, PTP tree and recording headroom.
    Netcheck {
        rig: Option<PathBuf>,
        /// Aggregate demand for the recording headroom instead of the per-device sum.
        #[arg(long = "total-demand-bps")]
        total_demand_bps: Option<f64>,
    },
    /// Battery state-of-charge simulation over a load profile.
    Powersim {
        rig: Option<PathBuf>,
        /// Profile file, or the name of a bundled profile (regular, full-shore, drive-then-charge).
        #[arg(long, default_value = "regular")]
        profile: String,
        #[arg(long = "dt-s", alias = "dt", default_value_t = 1.0)]
        dt_s: f64,
        /// Write the CSV trace here; `-` for standard output.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Every check in one document.
    Report {
        rig: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Leave the generation time out of the text header.
        #[arg(long)]
        no_timestamp: bool,
    },
    /// Simulator parameter bundle: per-sensor extrinsics and intrinsics.
    ExportTwin {
        rig: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Csv,
}

enum Failure {
    /// A domain check did not pass.
    Check,
    /// Bad input; the message goes to standard error.
    Input(String),
}

impl Failure {
    fn input(e: impl std::fmt::Display) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => ExitCode::from(1),
        Err(Failure::Input(msg)) => {
            eprintln!("rigplan: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Validate { rig } => validate(rig.as_deref()),
        Command::Coverage {
            rig,
            group,
            height_m,
            extent_m,
            cell_m,
            radius_m,
            step_deg,
            out,
        } => coverage(
            &load_rig(rig.as_deref())?,
            group,
            GridSpec {
                query_height_m: height_m,
                extent_m,
                cell_m,
            },
            radius_m,
            step_deg,
            out.as_deref(),
        ),
        Command::Netcheck { rig, total_demand_bps } => netcheck(&load_rig(rig.as_deref())?, total_demand_bps),
        Command::Powersim {
            rig,
            profile,
            dt_s,
            trace,
        } => powersim(&load_rig(rig.as_deref())?, &profile, dt_s, trace.as_deref()),
        Command::Report {
            rig,
            format,
            no_timestamp,
        } => report(&load_rig(rig.as_deref())?, format, no_timestamp),
        Command::ExportTwin { rig, out } => twin(&load_rig(rig.as_deref())?, out.as_deref()),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, bytes: &[u8]) -> Outcome {
    fs::write(path, bytes).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_rig(path: Option<&Path>) -> Result<RigSpec, Failure> {
    let text = match path {
        Some(p) => read(p)?,
        None => bundled_rig_source().to_owned(),
    };
    parse_rig(&text).map_err(|e| match path {
        Some(p) => Failure::Input(format!("{}: {e}", p.display())),
        None => Failure::input(e),
    })
}

fn check(ok: bool) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn validate(path: Option<&Path>) -> Outcome {
    let rig = load_rig(path)?;
    let report = validate_rig(&rig);
    print!("{}", report.render());
    check(report.is_accepted())
}

fn coverage(
    rig: &RigSpec,
    group: Option<Modality>,
    spec: GridSpec,
    radius_m: f64,
    step_deg: f64,
    out: Option<&Path>,
) -> Outcome {
    let groups = match group {
        Some(g) => vec![g],
        None => Modality::SURROUND_GROUPS.to_vec(),
    };
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?;
    }
    let mut complete = true;
    for g in groups {
        let grid = coverage_grid(rig, g, &spec).map_err(Failure::input)?;
        let summary = blind_spot_area(&grid, radius_m).map_err(Failure::input)?;
        let sweep = azimuthal_coverage(rig, g, radius_m, spec.query_height_m, step_deg.to_radians())
            .map_err(Failure::input)?;
        complete &= sweep.is_complete();
        println!("[{g}] {}", if sweep.is_complete() { "complete" } else { "GAPS" });
        println!("sensors = {}", grid.sensor_ids.len());
        print!("{}", sweep.to_text());
        print!("{}", summary.to_text());
        println!();
        if let Some(dir) = out {
            write(&dir.join(format!("{g}.pgm")), &grid.to_pgm())?;
            write(&dir.join(format!("{g}.csv")), grid.to_csv().as_bytes())?;
            let text = format!("{}{}", sweep.to_text(), summary.to_text());
            write(&dir.join(format!("{g}.summary.txt")), text.as_bytes())?;
        }
    }
    check(complete)
}

fn netcheck(rig: &RigSpec, total_demand_bps: Option<f64>) -> Outcome {
    match network_check(rig, total_demand_bps) {
        Ok(n) => {
            print!("{}", n.to_text());
            check(n.passes())
        }
        Err(e) => match e {
            rigplan::netplan::NetError::NonPositive(_) => Err(Failure::input(e)),
            _ => {
                println!("error {}: {e}", e.code());
                Err(Failure::Check)
            }
        },
    }
}

fn powersim(rig: &RigSpec, profile: &str, dt_s: f64, trace_out: Option<&Path>) -> Outcome {
    let text = match bundled_profile(profile) {
        Some(t) if !Path::new(profile).exists() => t.to_owned(),
        _ => {
            let p = Path::new(profile);
            if !p.exists() {
                let names: Vec<&str> = BUNDLED_PROFILES.iter().map(|(n, _)| *n).collect();
                return Err(Failure::Input(format!(
                    "{profile}: no such file or bundled profile ({})",
                    names.join(", ")
                )));
            }
            read(p)?
        }
    };
    let profile = LoadProfile::parse(&text).map_err(Failure::input)?;
    let segments = profile.segments();
    let sys = &rig.power;
    let initial = profile.initial_soc_wh.unwrap_or(sys.battery.capacity_wh);
    let trace = simulate_soc(sys, &segments, dt_s, initial).map_err(Failure::input)?;
    let runtime = match segments.first() {
        Some(s) => runtime_for_states(sys, &s.switches, &s.sources).map_err(Failure::input)?,
        None => Runtime::Indefinite,
    };
    let last = trace.final_sample();
    println!("capacity_wh = {}", sys.battery.capacity_wh);
    println!("initial_soc_wh = {initial}");
    println!("net_w_at_start = {}", trace.samples[0].net_w);
    println!("runtime = {}", runtime_text(runtime));
    println!("final_t_s = {}", last.t_s);
    println!("final_soc_wh = {:.3}", last.soc_wh);
    match trace.depleted_at() {
        Some(t) => println!("depleted_at_s = {t:.1}"),
        None => println!("depleted_at_s = never"),
    }
    for e in &trace.events {
        println!("event {:?} at {} s", e.kind, e.t_s);
    }
    match trace_out {
        Some(p) if p == Path::new("-") => print!("{}", trace.to_csv()),
        Some(p) => write(p, trace.to_csv().as_bytes())?,
        None => {}
    }
    check(trace.depleted_at().is_none())
}

fn report(rig: &RigSpec, format: Format, no_timestamp: bool) -> Outcome {
    let r = build_report(rig, &CoverageOptions::default());
    match format {
        Format::Csv => print!("{}", r.to_csv()),
        Format::Text => {
            let stamp = (!no_timestamp).then(|| {
                time::OffsetDateTime::now_utc()
                    .format(&time::format_description::well_known::Rfc3339)
                    .unwrap_or_default()
            });
            print!("{}", r.to_text(stamp.as_deref()));
        }
    }
    check(r.passes())
}

fn twin(rig: &RigSpec, out: Option<&Path>) -> Outcome {
    match export_twin(rig) {
        Ok(doc) => match out {
            Some(p) => write(p, doc.to_text().as_bytes()),
            None => {
                print!("{}", doc.to_text());
                Ok(())
            }
        },
        Err(TwinError::Invalid(report)) => {
            print!("{}", report.render());
            Err(Failure::Check)
        }
        Err(e) => Err(Failure::input(e)),
    }
}
