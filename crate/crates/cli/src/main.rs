//! Command-line front end: complex ingestion, scenario execution, and
//! machine-readable reports.
//!
//! Exit codes: 0 when all checks pass, 1 when a residual check fails, 2 for
//! input errors (unreadable files, parse errors, invalid parameters).

mod document;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use torsionlab_core::bicomplex::{self, BiGradedComplex, Side};
use torsionlab_core::detline::{BasedSpace, SignConvention, SignMode};
use torsionlab_core::models::{self, BoundaryCondition, Holonomy, InterfaceWeight, SpliceScenario};
use torsionlab_core::{linalg, zeta, CMatrix, ToleranceConfig};

use document::ComplexDocument;
use report::RunReport;

#[derive(Parser)]
#[command(
    name = "torsionlab",
    version,
    about = "Torsion coordinates of bi-graded complexes, 1D model geometries, and zeta-regularized determinants"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Emit the report as JSON instead of a table.
    #[arg(long, global = true)]
    json: bool,
    /// Relative singular-value threshold for numerical rank.
    #[arg(long, global = true, default_value_t = 1e-10)]
    rank_tol: f64,
    /// Eigenvalue clustering radius, relative to the matrix norm.
    #[arg(long, global = true, default_value_t = 1e-8)]
    cluster_tol: f64,
    /// Residual threshold for identity checks.
    #[arg(long, global = true, default_value_t = 1e-8)]
    check_tol: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum SignModeArg {
    Plain,
    Cm,
    Bk,
}

impl SignModeArg {
    /// The refined sign hooks are not asserted by this artifact; both
    /// refined modes currently apply no extra sign.
    fn to_convention(self) -> SignConvention {
        SignConvention::with_mode(match self {
            SignModeArg::Plain => SignMode::Plain,
            SignModeArg::Cm => SignMode::CmSign,
            SignModeArg::Bk => SignMode::BkSign,
        })
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BcArg {
    Rel,
    Abs,
}

#[derive(Subcommand)]
enum Command {
    /// Check the invariants of a complex document.
    Validate { path: PathBuf },
    /// Torsion coordinate of a complex document at a spectral cut.
    Torsion {
        path: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
        #[arg(long, value_enum, default_value = "plain")]
        sign_mode: SignModeArg,
    },
    /// Low/high dimensions of the spectral cut of a complex document.
    Cut {
        path: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
    },
    /// Twisted circle: combinatorial torsion against the closed form.
    Circle {
        #[arg(long)]
        theta: f64,
        #[arg(long, default_value_t = 8)]
        subdiv: usize,
        #[arg(long, default_value_t = 1)]
        rank: usize,
        /// Write the model as a complex document to this path.
        #[arg(long)]
        export: Option<PathBuf>,
    },
    /// Interval with relative or absolute boundary condition.
    Interval {
        #[arg(long, default_value_t = 4)]
        subdiv: usize,
        #[arg(long, value_enum, default_value = "rel")]
        bc: BcArg,
        /// Write the model as a complex document to this path.
        #[arg(long)]
        export: Option<PathBuf>,
    },
    /// Split a twisted circle into two intervals and check multiplicativity.
    Splice {
        #[arg(long)]
        theta: f64,
        #[arg(long, default_value_t = 2)]
        subdiv: usize,
        #[arg(long, default_value_t = 2)]
        subdiv2: usize,
        /// Add the piece inner products on the interface instead of keeping
        /// the shared weight once; the ratio then carries the anomaly 4.
        #[arg(long)]
        summed: bool,
    },
    /// Analytic gluing identity on the split circle, in closed form.
    Glue {
        #[arg(long, default_value_t = 1.0)]
        length: f64,
    },
    /// Zeta values and zeta-regularized determinants.
    Zeta(ZetaCmd),
}

#[derive(Args)]
struct ZetaCmd {
    #[command(subcommand)]
    kind: ZetaKind,
}

#[derive(Subcommand)]
enum ZetaKind {
    /// Hurwitz zeta value.
    Hurwitz {
        #[arg(long, allow_hyphen_values = true)]
        s: f64,
        #[arg(long)]
        a: f64,
    },
    /// Derivative of Hurwitz zeta at s = 0.
    Deriv0 {
        #[arg(long)]
        a: f64,
    },
    /// Determinant of the Dirichlet interval Laplacian.
    Dirichlet {
        #[arg(long, default_value_t = 1.0)]
        length: f64,
    },
    /// Determinant of the (possibly twisted) circle Laplacian.
    Circle {
        #[arg(long, default_value_t = std::f64::consts::TAU)]
        circumference: f64,
        #[arg(long)]
        theta: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let tol = ToleranceConfig {
        rank_tol: cli.rank_tol,
        cluster_tol: cli.cluster_tol,
        check_tol: cli.check_tol,
    };
    if let Err(e) = tol.validate() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match run(&cli, &tol) {
        Ok(report) => {
            print!("{}", report.render(cli.json));
            ExitCode::from(report.exit_code() as u8)
        }
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn load_document(path: &PathBuf) -> Result<(ComplexDocument, BiGradedComplex), String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let doc: ComplexDocument = serde_json::from_str(&text).map_err(|e| {
        format!(
            "parse error in {} at line {}, column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        )
    })?;
    let x = doc.to_complex()?;
    Ok((doc, x))
}

fn computed_bases(
    x: &BiGradedComplex,
    side: Side,
    tol: &ToleranceConfig,
) -> Result<Vec<BasedSpace>, String> {
    (0..=x.top_degree())
        .map(|j| x.cohomology_basis(j, side, tol).map_err(|e| e.to_string()))
        .collect()
}

fn run(cli: &Cli, tol: &ToleranceConfig) -> Result<RunReport, String> {
    match &cli.command {
        Command::Validate { path } => {
            let (_doc, x) = load_document(path)?;
            let mut report = RunReport::new(format!("validate {}", path.display()), tol, "plain");
            let validation = x.validate(tol);
            report.counts("dims", x.dims().to_vec());
            report.real("max_d_square_residual", validation.max_d_square_residual);
            report.real(
                "max_dstar_square_residual",
                validation.max_dstar_square_residual,
            );
            for issue in &validation.issues {
                report.fail(format!(
                    "degree {}: {} (residual {:.3e})",
                    issue.degree, issue.detail, issue.residual
                ));
            }
            Ok(report)
        }
        Command::Torsion {
            path,
            lambda,
            sign_mode,
        } => {
            let (_doc, x) = load_document(path)?;
            let sign = sign_mode.to_convention();
            let mut report = RunReport::new(
                format!(
                    "torsion {} --lambda {lambda} --sign-mode {}",
                    path.display(),
                    sign.mode.as_str()
                ),
                tol,
                sign.mode.as_str(),
            );
            let cohomology = computed_bases(&x, Side::D, tol)?;
            let homology = computed_bases(&x, Side::Dstar, tol)?;
            if x.d_maps()
                .iter()
                .chain(x.dstar_maps())
                .all(|m| m.iter().all(|z| z.norm() == 0.0))
            {
                report.warn("no content: all differentials vanish");
            }
            match bicomplex::cm_torsion(&x, *lambda, &sign, &cohomology, &homology, tol) {
                Ok(t) => {
                    report.complex_pair("coordinate", t.coordinate);
                    report.complex_pair("low_band_coordinate", t.low_band_coordinate);
                    report.complex_pair("graded_det_high", t.graded_det_high);
                    report.counts("low_dims", t.low_dims);
                    report.counts("high_dims", t.high_dims);
                    report.counts(
                        "cohomology_dims",
                        cohomology.iter().map(|b| b.dimension()).collect(),
                    );
                }
                Err(e) => {
                    report.fail(describe_cut_error(&x, e));
                }
            }
            Ok(report)
        }
        Command::Cut { path, lambda } => {
            let (_doc, x) = load_document(path)?;
            let mut report = RunReport::new(
                format!("cut {} --lambda {lambda}", path.display()),
                tol,
                "plain",
            );
            match bicomplex::spectral_cut(&x, *lambda, tol) {
                Ok(cut) => {
                    report.counts("low_dims", cut.low_dims(tol));
                    report.counts("high_dims", cut.high_dims(tol));
                }
                Err(e) => {
                    report.fail(describe_cut_error(&x, e));
                }
            }
            Ok(report)
        }
        Command::Circle {
            theta,
            subdiv,
            rank,
            export,
        } => {
            if !(*theta > 0.0 && *theta < 1.0) {
                return Err(format!(
                    "theta = {theta} is not in (0, 1): the circle is not acyclic and \
                     cohomology bases would be required"
                ));
            }
            if *subdiv == 0 || *rank == 0 {
                return Err("subdiv and rank must be positive".into());
            }
            let mut report = RunReport::new(
                format!("circle --theta {theta} --subdiv {subdiv} --rank {rank}"),
                tol,
                "plain",
            );
            let q = Complex64::from_polar(1.0, std::f64::consts::TAU * theta);
            let total = CMatrix::from_diagonal_element(*rank, *rank, q);
            let holonomy = Holonomy::concentrated(total, *subdiv);
            let x =
                models::circle_complex(*subdiv, &holonomy, None, tol).map_err(|e| e.to_string())?;
            if let Some(path) = export {
                export_document(&x, path, &[("model", format!("circle theta={theta} subdiv={subdiv} rank={rank}"))])?;
                report.text("exported", path.display().to_string());
            }
            let empty: Vec<BasedSpace> = vec![BasedSpace::standard(0), BasedSpace::standard(0)];
            let t = bicomplex::cm_torsion(&x, 0.0, &SignConvention::plain(), &empty, &empty, tol)
                .map_err(|e| e.to_string())?;
            let closed_form =
                (4.0 * (std::f64::consts::PI * theta).sin().powi(2)).powi(*rank as i32);
            let spectrum = zeta::twisted_circle_spectrum(*theta, 1.0).map_err(|e| e.to_string())?;
            let analytic = zeta::zeta_determinant(&zeta::LatticeSpectrum {
                multiplicity: *rank,
                ..spectrum
            })
            .map_err(|e| e.to_string())?
            .determinant;
            let modulus = t.coordinate.norm();
            report.real("combinatorial_torsion", modulus);
            report.real("closed_form", closed_form);
            report.real("zeta_determinant", analytic);
            report.check(
                "relative_difference",
                (modulus - closed_form).abs() / closed_form,
                1e-6,
            );
            report.check(
                "zeta_relative_difference",
                (modulus - analytic).abs() / analytic,
                1e-6,
            );
            Ok(report)
        }
        Command::Interval { subdiv, bc, export } => {
            if *subdiv == 0 {
                return Err("subdiv must be positive".into());
            }
            let bc = match bc {
                BcArg::Rel => BoundaryCondition::Rel,
                BcArg::Abs => BoundaryCondition::Abs,
            };
            let mut report = RunReport::new(
                format!("interval --subdiv {subdiv} --bc {bc:?}"),
                tol,
                "plain",
            );
            let x =
                models::interval_complex(*subdiv, bc, &Holonomy::trivial(1, *subdiv), None, tol)
                    .map_err(|e| e.to_string())?;
            if let Some(path) = export {
                export_document(&x, path, &[("model", format!("interval subdiv={subdiv} bc={bc:?}"))])?;
                report.text("exported", path.display().to_string());
            }
            report.counts("dims", x.dims().to_vec());
            report.counts(
                "cohomology_dims",
                x.cohomology_dims(Side::D, tol).map_err(|e| e.to_string())?,
            );
            let h = models::geometric_cohomology_bases(&x, 1, tol).map_err(|e| e.to_string())?;
            let k = models::paired_homology_bases(&x, &h, tol).map_err(|e| e.to_string())?;
            let t = bicomplex::cm_torsion(&x, 0.0, &SignConvention::plain(), &h, &k, tol)
                .map_err(|e| e.to_string())?;
            report.complex_pair("coordinate", t.coordinate);
            report.text(
                "bases",
                "geometric (unit flat sections / single-edge indicators)",
            );
            Ok(report)
        }
        Command::Splice {
            theta,
            subdiv,
            subdiv2,
            summed,
        } => {
            if *subdiv == 0 || *subdiv2 == 0 {
                return Err("subdivisions must be positive".into());
            }
            let mut scenario = SpliceScenario::circle_split(*theta, *subdiv, *subdiv2);
            let anomaly = if *summed {
                scenario.interface_weight = InterfaceWeight::Summed;
                4.0
            } else {
                1.0
            };
            let mut report = RunReport::new(
                format!(
                    "splice --theta {theta} --subdiv {subdiv} --subdiv2 {subdiv2} --summed {summed}"
                ),
                tol,
                "plain",
            );
            let ratio =
                models::combinatorial_splitting_check(&scenario, tol).map_err(|e| e.to_string())?;
            report.real("ratio", ratio);
            report.real("anomaly", anomaly);
            report.check("ratio_deviation", (ratio - anomaly).abs() / anomaly, 1e-8);
            Ok(report)
        }
        Command::Glue { length } => {
            if !(*length > 0.0) {
                return Err(format!("length {length} must be positive"));
            }
            let mut report = RunReport::new(format!("glue --length {length}"), tol, "plain");
            let g = zeta::analytic_gluing_check(*length).map_err(|e| e.to_string())?;
            report.real("piece_torsion", g.piece_torsion);
            report.real("glued_torsion", g.glued_torsion);
            report.real("psi", g.psi);
            report.real("psi_prime", g.psi_prime);
            report.real("anomaly", g.anomaly);
            report.real("interval_determinant", g.interval_determinant);
            report.real("circle_determinant", g.circle_determinant);
            report.real("ratio", g.ratio);
            report.check("ratio_deviation", (g.ratio - 1.0).abs(), 1e-6);
            Ok(report)
        }
        Command::Zeta(zeta_cmd) => run_zeta(zeta_cmd, tol),
    }
}

fn run_zeta(cmd: &ZetaCmd, tol: &ToleranceConfig) -> Result<RunReport, String> {
    match &cmd.kind {
        ZetaKind::Hurwitz { s, a } => {
            let mut report = RunReport::new(format!("zeta hurwitz --s {s} --a {a}"), tol, "plain");
            let value = zeta::hurwitz_zeta(*s, *a).map_err(|e| e.to_string())?;
            report.real("value", value);
            Ok(report)
        }
        ZetaKind::Deriv0 { a } => {
            let mut report = RunReport::new(format!("zeta deriv0 --a {a}"), tol, "plain");
            let value = zeta::hurwitz_zeta_deriv0(*a).map_err(|e| e.to_string())?;
            report.real("value", value);
            Ok(report)
        }
        ZetaKind::Dirichlet { length } => {
            if !(*length > 0.0) {
                return Err(format!("length {length} must be positive"));
            }
            let mut report =
                RunReport::new(format!("zeta dirichlet --length {length}"), tol, "plain");
            let r = zeta::zeta_determinant(&zeta::dirichlet_interval_spectrum(*length))
                .map_err(|e| e.to_string())?;
            report.real("zeta_at_0", r.zeta_at_0);
            report.real("zeta_prime_at_0", r.zeta_prime_at_0);
            report.real("determinant", r.determinant);
            Ok(report)
        }
        ZetaKind::Circle {
            circumference,
            theta,
        } => {
            if !(*circumference > 0.0) {
                return Err(format!("circumference {circumference} must be positive"));
            }
            let mut report = RunReport::new(
                match theta {
                    Some(theta) => {
                        format!("zeta circle --circumference {circumference} --theta {theta}")
                    }
                    None => format!("zeta circle --circumference {circumference}"),
                },
                tol,
                "plain",
            );
            let spectrum = match theta {
                Some(theta) => zeta::twisted_circle_spectrum(*theta, *circumference)
                    .map_err(|e| e.to_string())?,
                None => zeta::circle_spectrum(*circumference),
            };
            let r = zeta::zeta_determinant(&spectrum).map_err(|e| e.to_string())?;
            report.real("zeta_at_0", r.zeta_at_0);
            report.real("zeta_prime_at_0", r.zeta_prime_at_0);
            report.real("determinant", r.determinant);
            Ok(report)
        }
    }
}

fn export_document(
    x: &BiGradedComplex,
    path: &PathBuf,
    metadata: &[(&str, String)],
) -> Result<(), String> {
    let meta = metadata
        .iter()
        .map(|(k, v)| (k.to_string(), v.clone()))
        .collect();
    let doc = ComplexDocument::from_complex(x, meta);
    std::fs::write(path, doc.canonical_json())
        .map_err(|e| format!("cannot write {}: {e}", path.display()))
}

/// A cut-circle collision is reported with the nearest eigenvalue moduli.
fn describe_cut_error(x: &BiGradedComplex, e: torsionlab_core::Error) -> String {
    if let torsionlab_core::Error::EigenvalueOnCut { modulus, cut } = &e {
        let mut moduli: Vec<f64> = Vec::new();
        for j in 0..=x.top_degree() {
            if let Ok(lap) = x.sharp_laplacian(j) {
                if lap.nrows() > 0 {
                    if let Ok(eigs) = linalg::eigenvalues(&lap) {
                        moduli.extend(eigs.iter().map(|z| z.norm()));
                    }
                }
            }
        }
        moduli.sort_by(|a, b| (a - cut).abs().partial_cmp(&(b - cut).abs()).unwrap());
        let nearest: Vec<String> = moduli.iter().take(3).map(|m| format!("{m:.6e}")).collect();
        return format!(
            "eigenvalue modulus {modulus:.6e} collides with the cut circle |mu| = {cut:.6e}; \
             nearest moduli: {}",
            nearest.join(", ")
        );
    }
    e.to_string()
}
