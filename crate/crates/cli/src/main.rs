#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use syzygy::critical::{self, CriticalEnergies};
use syzygy::io::{self, CsvTable};
use syzygy::levelset::{TraceSettings, Window};
use syzygy::orbits::{self, Direction};
use syzygy::region::{self, ComponentLabel};
use syzygy::tangent::{self, ParameterPath, BASE_CASE_EPSILON};
use syzygy::{Error, SystemDescriptor, SystemKind};

#[derive(Parser)]
#[command(
    name = "syzygy",
    version,
    about = "Hill's regions, vertical tangents and syzygies of the restricted three-body problem"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// The five Lagrange points with values and Morse indices.
    Lagrange {
        #[command(flatten)]
        mass: Mass,
        #[command(flatten)]
        output: Output,
    },
    /// Critical energies, optionally with the potential along the q1-axis.
    Energies {
        #[command(flatten)]
        mass: Mass,
        /// Also sample u(x) = V(x, 0) on [-2, 2].
        #[arg(long)]
        profile: bool,
        /// Sample spacing of the profile.
        #[arg(long, default_value_t = 1e-3)]
        grid_step: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Topology class of the Hill's region.
    Classify {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        energy: EnergyArgs,
        #[command(flatten)]
        output: Output,
    },
    /// One component of the zero-velocity curve.
    Oval {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        energy: EnergyArgs,
        #[command(flatten)]
        trace: TraceArgs,
        #[command(flatten)]
        output: Output,
    },
    /// The zero set of W, where V_q2 / q2 vanishes.
    Wzero {
        #[command(flatten)]
        mass: Mass,
        #[command(flatten)]
        output: Output,
    },
    /// Vertical tangents of the bounded oval.
    Tangents {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        energy: EnergyArgs,
        #[command(flatten)]
        output: Output,
    },
    /// Grid certificate for the equal-mass base case.
    CertifyBase {
        #[arg(long, default_value_t = 1e-3)]
        grid_step: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Tangent count along a path of mass ratios and energies.
    VerifyLemma {
        #[arg(long, value_enum, default_value_t = PathKind::Default)]
        path: PathKind,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        /// End point of a `from-base` path.
        #[arg(long)]
        mu: Option<f64>,
        /// End point of a `from-base` path.
        #[arg(long)]
        normalized_energy: Option<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// Symmetric periodic orbit through (q1, 0).
    Orbit {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        energy: EnergyArgs,
        #[command(flatten)]
        shoot: ShootArgs,
        #[command(flatten)]
        output: Output,
    },
    /// Syzygies of a symmetric periodic orbit.
    Syzygies {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        energy: EnergyArgs,
        #[command(flatten)]
        shoot: ShootArgs,
        #[command(flatten)]
        output: Output,
    },
    /// Hill's lunar problem.
    Hill {
        #[command(subcommand)]
        command: HillCommand,
    },
    /// Zero set of V_q1 in a window.
    Vq1Zeros {
        #[command(flatten)]
        mass: Mass,
        /// Half width of the square window around the origin.
        #[arg(long, default_value_t = 1.5)]
        window: f64,
        #[arg(long, default_value_t = 5e-3)]
        grid_step: f64,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Subcommand)]
enum HillCommand {
    /// The two equilibria and the critical value.
    Critical {
        #[command(flatten)]
        output: Output,
    },
    /// Bounded oval or open arcs at an energy.
    Oval {
        #[arg(long, allow_hyphen_values = true)]
        energy: f64,
        #[command(flatten)]
        trace: TraceArgs,
        #[command(flatten)]
        output: Output,
    },
    /// Whether the bounded region lies inside the ball of radius 3^(-1/3).
    Check {
        #[arg(long, allow_hyphen_values = true)]
        energy: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Symmetric orbit with its syzygies and quadratures.
    Orbit {
        #[arg(long, allow_hyphen_values = true)]
        energy: f64,
        #[command(flatten)]
        shoot: ShootArgs,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Args, Clone, Copy)]
struct Mass {
    #[arg(long)]
    mu: f64,
}

#[derive(Args, Clone, Copy)]
struct SystemArgs {
    #[arg(long, value_enum, default_value_t = SystemChoice::Pcr3bp)]
    system: SystemChoice,
    /// Mass ratio; required for the restricted problem.
    #[arg(long)]
    mu: Option<f64>,
}

#[derive(Args, Clone, Copy)]
#[group(required = true, multiple = false)]
struct EnergyArgs {
    #[arg(long, allow_hyphen_values = true)]
    energy: Option<f64>,
    /// 0 at the first and 1 at the second critical value.
    #[arg(long)]
    normalized_energy: Option<f64>,
}

#[derive(Args, Clone, Copy)]
struct TraceArgs {
    #[arg(long, value_enum, default_value_t = Component::Bounded)]
    component: Component,
    /// Tracer step along the curve.
    #[arg(long, default_value_t = 1e-3)]
    grid_step: f64,
    /// Corrector tolerance on |V - c|.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Args, Clone, Copy)]
struct ShootArgs {
    /// Initial guess for the axis crossing.
    #[arg(long, allow_hyphen_values = true)]
    q1: f64,
    #[arg(long, value_enum, default_value_t = DirectionChoice::Retrograde)]
    direction: DirectionChoice,
    /// Integration tolerance of the emitted trajectory.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
}

#[derive(Args, Clone)]
struct Output {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
enum SystemChoice {
    Pcr3bp,
    Kepler,
    Hill,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Component {
    Bounded,
    Unbounded,
    Earth,
    Sun,
}

impl From<Component> for ComponentLabel {
    fn from(c: Component) -> Self {
        match c {
            Component::Bounded => ComponentLabel::Bounded,
            Component::Unbounded => ComponentLabel::Unbounded,
            Component::Earth => ComponentLabel::Earth,
            Component::Sun => ComponentLabel::Sun,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
enum DirectionChoice {
    Retrograde,
    Direct,
}

impl From<DirectionChoice> for Direction {
    fn from(d: DirectionChoice) -> Self {
        match d {
            DirectionChoice::Retrograde => Direction::Retrograde,
            DirectionChoice::Direct => Direction::Direct,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
enum PathKind {
    /// Constant normalized energy of the base case, mu from 0.1 to 0.9.
    Default,
    /// Straight line from the base case to `--mu`, `--normalized-energy`.
    FromBase,
}

/// Why a run did not succeed, with its exit status.
enum Failure {
    /// A numerically violated claim (exit 1).
    Verification(String),
    /// Bad arguments or inputs the computation cannot handle (exit 2).
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_verification_failure() {
            Failure::Verification(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

/// A finished computation: JSON config and result, an optional CSV
/// rendering, and an optional verification failure to report after writing.
struct Report {
    config: Value,
    result: Value,
    csv: Option<String>,
    violation: Option<String>,
}

impl Report {
    fn new(config: Value, result: impl Serialize) -> Outcome<Self> {
        let result = serde_json::to_value(result).map_err(|e| Failure::Usage(e.to_string()))?;
        Ok(Self { config, result, csv: None, violation: None })
    }

    fn csv(mut self, csv: String) -> Self {
        self.csv = Some(csv);
        self
    }

    fn violation(mut self, message: Option<String>) -> Self {
        self.violation = message;
        self
    }
}

fn system_of(args: &SystemArgs) -> Outcome<SystemDescriptor> {
    match (args.system, args.mu) {
        (SystemChoice::Pcr3bp, Some(mu)) => Ok(SystemDescriptor::pcr3bp(mu)?),
        (SystemChoice::Pcr3bp, None) => Err(Failure::Usage("--mu is required for the restricted problem".into())),
        (SystemChoice::Kepler, _) => Ok(SystemDescriptor::rotating_kepler()),
        (SystemChoice::Hill, _) => Ok(SystemDescriptor::hill_lunar()),
    }
}

fn energies_of(sys: &SystemDescriptor) -> Outcome<CriticalEnergies> {
    if sys.kind != SystemKind::Pcr3bp {
        return Err(Failure::Usage("normalized energies need the restricted problem with 0 < mu < 1".into()));
    }
    Ok(critical::critical_energies(sys.mu)?)
}

fn energy_of(sys: &SystemDescriptor, args: &EnergyArgs) -> Outcome<f64> {
    match (args.energy, args.normalized_energy) {
        (Some(c), None) => Ok(c),
        (None, Some(s)) => {
            if !(s > 0.0 && s < 1.0) {
                return Err(Failure::Usage(format!("normalized energy {s} must lie in (0, 1)")));
            }
            Ok(energies_of(sys)?.denormalize(s))
        }
        _ => Err(Failure::Usage("give exactly one of --energy, --normalized-energy".into())),
    }
}

fn system_config(command: &str, sys: &SystemDescriptor, c: f64, args: &EnergyArgs) -> Value {
    json!({
        "command": command,
        "system": sys.kind,
        "mu": sys.mu,
        "energy": c,
        "normalized_energy": args.normalized_energy,
    })
}

fn points_table(points: &[critical::CriticalPoint]) -> String {
    let mut t = CsvTable::new(&["label", "q1", "q2", "value", "morse_index"]);
    for p in points {
        t.push(vec![
            format!("{:?}", p.label),
            io::format_f64(p.location.q1),
            io::format_f64(p.location.q2),
            io::format_f64(p.value),
            p.morse_index.to_string(),
        ]);
    }
    t.render()
}

fn trace_settings(args: &TraceArgs) -> Outcome<TraceSettings> {
    if !(args.grid_step > 0.0 && args.tol > 0.0) {
        return Err(Failure::Usage("--grid-step and --tol must be positive".into()));
    }
    Ok(TraceSettings { step: args.grid_step, tolerance: args.tol, ..TraceSettings::default() })
}

fn oval_report(config: Value, sys: &SystemDescriptor, c: f64, args: &TraceArgs) -> Outcome<Report> {
    let oval = region::trace_oval_with(sys, c, args.component.into(), &trace_settings(args)?)?;
    let csv = io::points_csv(oval.vertices());
    Ok(Report::new(config, &oval)?.csv(csv))
}

fn orbit_report(
    config: Value,
    sys: &SystemDescriptor,
    c: f64,
    shoot: &ShootArgs,
    with_syzygies: bool,
) -> Outcome<Report> {
    if !(shoot.tol > 0.0) {
        return Err(Failure::Usage("--tol must be positive".into()));
    }
    let orbit = orbits::find_symmetric_orbit(sys, c, shoot.q1, shoot.direction.into())?;
    if !with_syzygies {
        let traj = orbits::integrate(sys, orbit.initial, orbit.period, shoot.tol)?;
        return Ok(Report::new(config, orbit)?.csv(io::trajectory_csv(&traj)));
    }
    let report = orbits::verify_syzygy_theorem(&orbit)?;
    let mut violation = None;
    if report.precondition && !report.theorem_holds() {
        violation = Some(format!(
            "syzygy claim violated at mu = {}, c = {c}, q = ({}, 0): {} syzygies, transverse = {}, period integral {:e}",
            sys.mu, orbit.initial.q.q1, report.count, report.transverse, report.period_integral
        ));
    }
    if sys.kind == SystemKind::HillLunar && c < critical::hill_critical_value() {
        let quadratures = report.quadrature_count().unwrap_or(0);
        if quadratures < 2 || report.count < 2 {
            violation = Some(format!(
                "quadrature claim violated at c = {c}, q = ({}, 0): {quadratures} quadratures, {} syzygies",
                orbit.initial.q.q1, report.count
            ));
        }
    }
    let mut t = CsvTable::new(&["kind", "t", "q1", "q2", "crossing_velocity"]);
    let quadratures = report.quadratures.clone().unwrap_or_default();
    for (kind, events) in [("syzygy", &report.events), ("quadrature", &quadratures)] {
        for e in events {
            let mut row = vec![kind.to_string()];
            row.extend([e.t, e.location.q1, e.location.q2, e.crossing_velocity].map(io::format_f64));
            t.push(row);
        }
    }
    Ok(Report::new(config, json!({ "orbit": orbit, "report": report }))?.csv(t.render()).violation(violation))
}

fn run(command: &Command) -> Outcome<Report> {
    match command {
        Command::Lagrange { mass, .. } => {
            let points = critical::lagrange_points(mass.mu)?;
            let csv = points_table(&points);
            Ok(Report::new(json!({ "command": "lagrange", "mu": mass.mu }), points)?.csv(csv))
        }
        Command::Energies { mass, profile, grid_step, .. } => {
            let h = critical::critical_energies(mass.mu)?;
            let config = json!({ "command": "energies", "mu": mass.mu, "profile": profile, "grid_step": grid_step });
            if !*profile {
                let mut t = CsvTable::new(&["h1", "h2", "h3", "h45"]);
                t.push_numbers(&h.all());
                return Ok(Report::new(config, h)?.csv(t.render()));
            }
            if !(*grid_step > 0.0) {
                return Err(Failure::Usage("--grid-step must be positive".into()));
            }
            let n = (4.0 / grid_step).round() as usize;
            let mut t = CsvTable::new(&["x", "u", "du", "ddu"]);
            let mut samples = Vec::new();
            for k in 0..=n {
                let x = -2.0 + 4.0 * k as f64 / n as f64;
                // The primaries themselves are skipped.
                if let Ok((u, du, ddu)) = critical::restricted_potential(mass.mu, x) {
                    t.push_numbers(&[x, u, du, ddu]);
                    samples.push([x, u, du, ddu]);
                }
            }
            Ok(Report::new(config, json!({ "energies": h, "profile": samples }))?.csv(t.render()))
        }
        Command::Classify { system, energy, .. } => {
            let sys = system_of(system)?;
            let c = energy_of(&sys, energy)?;
            let topology = region::system_topology(&sys, c)?;
            let mut t = CsvTable::new(&["class", "component_count"]);
            let class = serde_json::to_value(topology.class).ok().and_then(|v| v.as_str().map(String::from));
            t.push(vec![class.unwrap_or_default(), topology.component_count.to_string()]);
            Ok(Report::new(system_config("classify", &sys, c, energy), topology)?.csv(t.render()))
        }
        Command::Oval { system, energy, trace, .. } => {
            let sys = system_of(system)?;
            let c = energy_of(&sys, energy)?;
            let mut config = system_config("oval", &sys, c, energy);
            config["component"] = json!(trace.component);
            config["grid_step"] = json!(trace.grid_step);
            config["tol"] = json!(trace.tol);
            oval_report(config, &sys, c, trace)
        }
        Command::Wzero { mass, .. } => {
            let curve = tangent::trace_w_zero(mass.mu)?;
            let csv = io::points_csv(&curve.curve.vertices);
            Ok(Report::new(json!({ "command": "wzero", "mu": mass.mu }), &curve)?.csv(csv))
        }
        Command::Tangents { system, energy, .. } => {
            let sys = system_of(system)?;
            let c = energy_of(&sys, energy)?;
            let oval = region::trace_oval(&sys, c, ComponentLabel::Bounded)?;
            let report = tangent::vertical_tangents(&oval)?;
            let mut violation = None;
            if sys.kind == SystemKind::Pcr3bp {
                let h = critical::critical_energies(sys.mu)?;
                if h.h1 < c && c < h.second() && !(report.count == 2 && report.all_on_axis()) {
                    violation = Some(format!(
                        "expected two vertical tangents on the axis at mu = {}, c = {c}; found {} at {:?}",
                        sys.mu,
                        report.count,
                        report.locations().iter().map(|q| (q.q1, q.q2)).collect::<Vec<_>>()
                    ));
                }
            }
            let mut t = CsvTable::new(&["q1", "q2", "vq2q2", "on_axis"]);
            for p in &report.points {
                let mut row = [p.location.q1, p.location.q2, p.vq2q2].map(io::format_f64).to_vec();
                row.push(p.on_axis.to_string());
                t.push(row);
            }
            Ok(Report::new(system_config("tangents", &sys, c, energy), &report)?.csv(t.render()).violation(violation))
        }
        Command::CertifyBase { grid_step, .. } => {
            let cert = tangent::compute_base_case(*grid_step)?;
            let mut t = CsvTable::new(&["bound", "closed_form", "estimate", "certified_min", "threshold", "passed"]);
            for b in [&cert.arc, &cert.lid, &cert.zero_set] {
                let mut row = vec![b.name.clone()];
                row.extend([b.closed_form, b.estimate, b.certified_min, b.threshold].map(io::format_f64));
                row.push(b.passed.to_string());
                t.push(row);
            }
            let violation = (!cert.passed).then(|| {
                format!(
                    "base case not certified at mu = 0.5, c = {}: arc {}, lid {}, zero set {}, eps sup {}",
                    -2.0 + cert.epsilon,
                    cert.arc.passed,
                    cert.lid.passed,
                    cert.zero_set.passed,
                    cert.epsilon_sup
                )
            });
            let config = json!({ "command": "certify-base", "mu": 0.5, "grid_step": grid_step });
            Ok(Report::new(config, &cert)?.csv(t.render()).violation(violation))
        }
        Command::VerifyLemma { path, samples, mu, normalized_energy, .. } => {
            let s0 = critical::critical_energies(0.5)?.normalize(-2.0 + BASE_CASE_EPSILON);
            let waypoints = match (path, mu, normalized_energy) {
                (PathKind::Default, None, None) => vec![(0.1, s0), (0.9, s0)],
                (PathKind::FromBase, Some(mu), Some(s)) => vec![(0.5, s0), (*mu, *s)],
                (PathKind::Default, ..) => {
                    return Err(Failure::Usage("the default path takes no --mu or --normalized-energy".into()))
                }
                (PathKind::FromBase, ..) => {
                    return Err(Failure::Usage("a from-base path needs --mu and --normalized-energy".into()))
                }
            };
            let gamma = ParameterPath::through(&waypoints, *samples)?;
            let report = tangent::continuation_report(&gamma)?;
            let summary = match report.first_failure() {
                None => "count=2 at all samples".to_string(),
                Some(bad) => format!("count={} at mu = {}, c = {}", bad.count, bad.mu, bad.c),
            };
            let violation = report.first_failure().map(|bad| {
                format!(
                    "tangent claim violated at mu = {}, c = {}: count {}, tangents at {:?}, min V_q2q2 {:e}",
                    bad.mu,
                    bad.c,
                    bad.count,
                    bad.locations.iter().map(|q| (q.q1, q.q2)).collect::<Vec<_>>(),
                    bad.min_vq2q2
                )
            });
            eprintln!("{summary}");
            let mut t = CsvTable::new(&["mu", "c", "count", "all_on_axis", "min_vq2q2"]);
            for r in &report.samples {
                t.push(vec![
                    io::format_f64(r.mu),
                    io::format_f64(r.c),
                    r.count.to_string(),
                    r.all_on_axis.to_string(),
                    io::format_f64(r.min_vq2q2),
                ]);
            }
            let config = json!({
                "command": "verify-lemma",
                "path": path,
                "waypoints": waypoints,
                "samples": samples,
                "gamma": gamma.samples,
            });
            let result = json!({ "summary": summary, "passed": report.passed, "samples": report.samples });
            Ok(Report::new(config, result)?.csv(t.render()).violation(violation))
        }
        Command::Orbit { system, energy, shoot, .. } | Command::Syzygies { system, energy, shoot, .. } => {
            let sys = system_of(system)?;
            let c = energy_of(&sys, energy)?;
            let with_syzygies = matches!(command, Command::Syzygies { .. });
            let mut config = system_config(if with_syzygies { "syzygies" } else { "orbit" }, &sys, c, energy);
            config["q1"] = json!(shoot.q1);
            config["direction"] = json!(shoot.direction);
            config["tol"] = json!(shoot.tol);
            orbit_report(config, &sys, c, shoot, with_syzygies)
        }
        Command::Hill { command } => run_hill(command),
        Command::Vq1Zeros { mass, window, grid_step, .. } => {
            if !(*window > 0.0 && *grid_step > 0.0) {
                return Err(Failure::Usage("--window and --grid-step must be positive".into()));
            }
            let sys = SystemDescriptor::pcr3bp(mass.mu)?;
            let curves = tangent::trace_vq1_zero(&sys, Window::square(*window), *grid_step)?;
            let config = json!({ "command": "vq1-zeros", "mu": mass.mu, "window": window, "grid_step": grid_step });
            let csv = io::curves_csv(&curves);
            Ok(Report::new(config, &curves)?.csv(csv))
        }
    }
}

fn run_hill(command: &HillCommand) -> Outcome<Report> {
    let sys = SystemDescriptor::hill_lunar();
    match command {
        HillCommand::Critical { .. } => {
            let (plus, minus) = critical::hill_critical_points();
            let csv = points_table(&[plus, minus]);
            let result = json!({ "points": [plus, minus], "value": critical::hill_critical_value() });
            Ok(Report::new(json!({ "command": "hill critical" }), result)?.csv(csv))
        }
        HillCommand::Oval { energy, trace, .. } => {
            let config = json!({
                "command": "hill oval",
                "energy": energy,
                "component": trace.component,
                "grid_step": trace.grid_step,
                "tol": trace.tol,
            });
            oval_report(config, &sys, *energy, trace)
        }
        HillCommand::Check { energy, .. } => {
            let check = orbits::hill_bounded_region_check(*energy)?;
            let violation = (!check.contained).then(|| {
                format!("bounded region at c = {energy} reaches radius {} >= {}", check.max_radius, check.bound)
            });
            let mut t = CsvTable::new(&["energy", "max_radius", "bound", "contained"]);
            let mut row = [check.energy, check.max_radius, check.bound].map(io::format_f64).to_vec();
            row.push(check.contained.to_string());
            t.push(row);
            let config = json!({ "command": "hill check", "energy": energy });
            Ok(Report::new(config, check)?.csv(t.render()).violation(violation))
        }
        HillCommand::Orbit { energy, shoot, .. } => {
            let config = json!({
                "command": "hill orbit",
                "energy": energy,
                "q1": shoot.q1,
                "direction": shoot.direction,
                "tol": shoot.tol,
            });
            orbit_report(config, &sys, *energy, shoot, true)
        }
    }
}

fn output_of(command: &Command) -> &Output {
    match command {
        Command::Lagrange { output, .. }
        | Command::Energies { output, .. }
        | Command::Classify { output, .. }
        | Command::Oval { output, .. }
        | Command::Wzero { output, .. }
        | Command::Tangents { output, .. }
        | Command::CertifyBase { output, .. }
        | Command::VerifyLemma { output, .. }
        | Command::Orbit { output, .. }
        | Command::Syzygies { output, .. }
        | Command::Vq1Zeros { output, .. } => output,
        Command::Hill { command } => match command {
            HillCommand::Critical { output }
            | HillCommand::Oval { output, .. }
            | HillCommand::Check { output, .. }
            | HillCommand::Orbit { output, .. } => output,
        },
    }
}

fn write(output: &Output, report: &Report) -> Outcome<()> {
    let text = match output.format {
        Format::Json => io::json_envelope(&report.config, &report.result)?,
        Format::Csv => report.csv.clone().ok_or_else(|| Failure::Usage("this command has no CSV form".into()))?,
    };
    let written = match &output.out {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    match written {
        // A closed pipe (`syzygy ... | head`) is not an error.
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => other.map_err(|e| Failure::Usage(format!("cannot write output: {e}"))),
    }
}

fn exit_code(failure: &Failure) -> u8 {
    match failure {
        Failure::Verification(_) => 1,
        Failure::Usage(_) => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(&cli.command).and_then(|report| {
        write(output_of(&cli.command), &report)?;
        match report.violation {
            Some(message) => Err(Failure::Verification(message)),
            None => Ok(()),
        }
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            match &failure {
                Failure::Verification(message) => eprintln!("verification failed: {message}"),
                Failure::Usage(message) => eprintln!("error: {message}"),
            }
            ExitCode::from(exit_code(&failure))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn violated_claims_exit_with_one() {
        let count = Error::CountChanged { mu: 0.3, c: -1.8, count: 4 };
        assert_eq!(exit_code(&count.into()), 1);
        assert_eq!(exit_code(&Error::CertificationFailed("degenerate".into()).into()), 1);
        assert_eq!(exit_code(&Error::InvalidMassRatio(1.5).into()), 2);
    }
}
