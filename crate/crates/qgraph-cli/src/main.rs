//! Command-line front end: validate graph files, compute spectra and
//! reconstructions, run lattice band tests and comb models, and
//! cross-check everything against the duality-free oracles.
//!
//! Delimited output uses `,` separators with `#`-prefixed header lines;
//! structured output is JSON. Runs are deterministic for a fixed
//! configuration and seed.

// Negated float comparisons like `!(x > 0.0)` deliberately treat NaN
// (which clap accepts for f64 flags) as invalid.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qgraph::dual::{reconstruct, residual_and_norms};
use qgraph::graph::{CouplingKind, Graph};
use qgraph::models::{comb_row, preset, CombWindow, Preset, SiteCoupling, WindowModel};
use qgraph::oracle::{compare, fd_spectrum, matching_spectrum, CompareReport, FdConfig};
use qgraph::spectral::{
    band_test_rect, magnetic_band_spectrum, spectrum, window_secular_roots, BandQuery,
    SpectrumOptions, SpectrumResult,
};

#[derive(Parser)]
#[command(name = "qgraph", version, about = "Spectra of Schrödinger operators on metric graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Delta,
    DeltaPrimeS,
}

impl From<KindArg> for CouplingKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Delta => CouplingKind::Delta,
            KindArg::DeltaPrimeS => CouplingKind::DeltaPrimeS,
        }
    }
}

#[derive(Args)]
struct OutputArgs {
    /// Write here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Seed recorded with the run (reserved for randomized workflows;
    /// all shipped subcommands are deterministic).
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct RangeArgs {
    /// Lower end of the energy range.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    e_min: f64,
    /// Upper end of the energy range.
    #[arg(long, default_value_t = 30.0, allow_negative_numbers = true)]
    e_max: f64,
    /// Scan step in √E units (default: π/(8·L0·(1+√C·L0))).
    #[arg(long)]
    grid_step: Option<f64>,
    /// Exclusion half-width around exceptional energies, √E units.
    #[arg(long, default_value_t = 1e-4)]
    excl_window: f64,
}

impl RangeArgs {
    fn options(&self) -> SpectrumOptions {
        let mut o = SpectrumOptions::new(self.e_min, self.e_max);
        o.grid_step = self.grid_step;
        o.excl_window = self.excl_window;
        o
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse a graph file, check every invariant and print the summary.
    Validate {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Locate secular roots of the vertex reduction with kernel
    /// residual diagnostics.
    Spectrum {
        #[arg(long)]
        input: PathBuf,
        /// Coupling kind (default: the one declared in the graph file).
        #[arg(long, value_enum)]
        kind: Option<KindArg>,
        #[command(flatten)]
        range: RangeArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Reconstruct the wavefunction of one root and tabulate it.
    Reconstruct {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        kind: Option<KindArg>,
        /// Which root of the scan to reconstruct (ascending order).
        #[arg(long, default_value_t = 0)]
        root_index: usize,
        /// Sample points per edge.
        #[arg(long, default_value_t = 64)]
        samples: usize,
        #[command(flatten)]
        range: RangeArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Band test of the rectangular lattice, optionally with rational
    /// flux per cell.
    Bands {
        /// Model preset: square | rect | magnetic-rect. Explicit flags
        /// override preset values.
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        l1: Option<f64>,
        #[arg(long)]
        l2: Option<f64>,
        /// Uniform coupling constant (α or β).
        #[arg(long, allow_negative_numbers = true)]
        coupling: Option<f64>,
        #[arg(long, value_enum)]
        kind: Option<KindArg>,
        /// Flux per cell as a rational multiple p/q of 2π.
        #[arg(long, default_value = "0/1")]
        flux: String,
        /// Bloch grid per torus direction for the magnetic reduction.
        #[arg(long, default_value_t = 64)]
        bloch_grid: usize,
        /// Largest allowed flux denominator.
        #[arg(long, default_value_t = 32)]
        max_q: usize,
        /// Number of energy samples.
        #[arg(long, default_value_t = 400)]
        steps: usize,
        #[arg(long, default_value_t = 0.25, allow_negative_numbers = true)]
        e_min: f64,
        #[arg(long, default_value_t = 40.0, allow_negative_numbers = true)]
        e_max: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Comb model rows and finite-window spectra (Maryland preset
    /// available).
    Comb {
        /// Model preset: comb | maryland.
        #[arg(long, default_value = "maryland")]
        preset: String,
        /// Override the line spacing.
        #[arg(long)]
        spacing: Option<f64>,
        /// Override the uniform coupling of the line vertices.
        #[arg(long, allow_negative_numbers = true)]
        coupling: Option<f64>,
        /// Override the Robin angle at the tooth tips (radians).
        #[arg(long, allow_negative_numbers = true)]
        omega: Option<f64>,
        #[arg(long, value_enum)]
        kind: Option<KindArg>,
        #[arg(long, default_value_t = -5, allow_negative_numbers = true)]
        j_min: i64,
        #[arg(long, default_value_t = 5, allow_negative_numbers = true)]
        j_max: i64,
        /// Dump closed-form rows at this wavenumber instead of scanning
        /// the window spectrum.
        #[arg(long)]
        k: Option<f64>,
        #[command(flatten)]
        range: RangeArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Run the duality solver against the reference oracles and report
    /// the comparison; exits nonzero on a failed classification.
    Oracle {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        kind: Option<KindArg>,
        /// Which oracle(s) to run.
        #[arg(long, default_value = "both")]
        oracle: String,
        /// Finite-difference mesh step (default ℓ0/224).
        #[arg(long)]
        mesh: Option<f64>,
        /// Matching-oracle comparison tolerance.
        #[arg(long, default_value_t = 1e-9)]
        matching_tol: f64,
        /// Finite-difference comparison tolerance.
        #[arg(long, default_value_t = 1e-6)]
        fd_tol: f64,
        #[command(flatten)]
        range: RangeArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn load_graph(path: &PathBuf) -> Result<Graph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Graph::from_toml_str(&text).with_context(|| format!("graph: {}", path.display()))
}

fn emit(out: &OutputArgs, content: String) -> Result<()> {
    match &out.output {
        Some(path) => fs::write(path, content).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{content}"),
    }
    Ok(())
}

fn parse_flux(text: &str) -> Result<(i64, usize)> {
    let (p, q) = text
        .split_once('/')
        .ok_or_else(|| anyhow!("flux must be a rational p/q, got `{text}`"))?;
    let p: i64 = p.trim().parse().context("flux numerator")?;
    let q: usize = q.trim().parse().context("flux denominator")?;
    if q == 0 {
        bail!("flux denominator must be positive");
    }
    Ok((p, q))
}

#[derive(Serialize)]
struct ValidateReport<'a> {
    coupling: String,
    vertices: usize,
    interior: usize,
    boundary: usize,
    edges: usize,
    parallel_free: bool,
    magnetic: bool,
    summary: &'a qgraph::graph::AssumptionSummary,
}

#[derive(Serialize)]
struct RootOut {
    energy: f64,
    multiplicity: usize,
    vertex_residual: f64,
    ode_residual: f64,
    l2_vertex_ratio: f64,
}

#[derive(Serialize)]
struct SpectrumOut<'a> {
    seed: u64,
    kind: String,
    searched: (f64, f64),
    grid_step: f64,
    roots: Vec<RootOut>,
    windows: &'a [qgraph::spectral::ExclusionWindow],
    warnings: &'a [String],
}

fn spectrum_rows(g: &Graph, kind: CouplingKind, res: &SpectrumResult) -> Result<Vec<RootOut>> {
    let mut rows = Vec::new();
    for root in &res.roots {
        let mut vertex_residual = 0.0f64;
        let mut ode_residual = 0.0f64;
        let mut ratio = 0.0f64;
        for phi in &root.kernel {
            let wave = reconstruct(g, root.energy, phi, kind)?;
            let rep = residual_and_norms(g, &wave, phi);
            vertex_residual = vertex_residual.max(rep.vertex_residual);
            ode_residual = ode_residual.max(rep.ode_residual);
            ratio = ratio.max(rep.ratio);
        }
        rows.push(RootOut {
            energy: root.energy,
            multiplicity: root.multiplicity,
            vertex_residual,
            ode_residual,
            l2_vertex_ratio: ratio,
        });
    }
    Ok(rows)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Validate { input, out } => {
            let g = load_graph(&input)?;
            let report = ValidateReport {
                coupling: g.coupling().to_string(),
                vertices: g.n_vertices(),
                interior: g.interior_vertices().len(),
                boundary: g.n_vertices() - g.interior_vertices().len(),
                edges: g.n_edges(),
                parallel_free: g.is_parallel_free(),
                magnetic: g.has_phases(),
                summary: g.summary(),
            };
            emit(&out, format!("{}\n", serde_json::to_string_pretty(&report)?))?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Spectrum {
            input,
            kind,
            range,
            out,
        } => {
            let g = load_graph(&input)?;
            let kind = kind.map(CouplingKind::from).unwrap_or_else(|| g.coupling());
            let res = spectrum(&g, kind, &range.options()).context("spectral")?;
            let rows = spectrum_rows(&g, kind, &res)?;
            let content = match out.format {
                Format::Json => {
                    let doc = SpectrumOut {
                        seed: out.seed,
                        kind: kind.to_string(),
                        searched: res.searched,
                        grid_step: res.diagnostics.grid_step,
                        roots: rows,
                        windows: &res.windows,
                        warnings: &res.diagnostics.warnings,
                    };
                    format!("{}\n", serde_json::to_string_pretty(&doc)?)
                }
                Format::Csv => {
                    let mut s = String::new();
                    writeln!(s, "# spectrum kind={kind} searched=({:.6e},{:.6e}) seed={}", res.searched.0, res.searched.1, out.seed)?;
                    for w in &res.windows {
                        writeln!(s, "# unsearched window [{:.9e}, {:.9e}] edge={}", w.e_lo, w.e_hi, w.edge)?;
                    }
                    if !res.windows.is_empty() {
                        writeln!(s, "# windows are not searched here; the `oracle` subcommand covers exceptional energies")?;
                    }
                    writeln!(s, "# energy,multiplicity,vertex_residual,ode_residual,l2_vertex_ratio")?;
                    for r in &rows {
                        writeln!(
                            s,
                            "{:.12e},{},{:.3e},{:.3e},{:.6e}",
                            r.energy, r.multiplicity, r.vertex_residual, r.ode_residual, r.l2_vertex_ratio
                        )?;
                    }
                    s
                }
            };
            emit(&out, content)?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Reconstruct {
            input,
            kind,
            root_index,
            samples,
            range,
            out,
        } => {
            let g = load_graph(&input)?;
            let kind = kind.map(CouplingKind::from).unwrap_or_else(|| g.coupling());
            let res = spectrum(&g, kind, &range.options()).context("spectral")?;
            let root = res.roots.get(root_index).ok_or_else(|| {
                anyhow!(
                    "root index {root_index} out of range: {} roots found in ({}, {}]",
                    res.roots.len(),
                    range.e_min,
                    range.e_max
                )
            })?;
            let phi = root
                .kernel
                .first()
                .ok_or_else(|| anyhow!("root at {} carries no kernel vector", root.energy))?;
            let wave = reconstruct(&g, root.energy, phi, kind).context("dual")?;
            let rep = residual_and_norms(&g, &wave, phi);
            let mut s = String::new();
            writeln!(s, "# reconstruct energy={:.12e} multiplicity={} seed={}", root.energy, root.multiplicity, out.seed)?;
            writeln!(
                s,
                "# vertex_residual={:.3e} ode_residual={:.3e} l2_norm={:.9e} ratio={:.6e}",
                rep.vertex_residual, rep.ode_residual, rep.l2_norm, rep.ratio
            )?;
            writeln!(s, "# edge,x,re_psi,im_psi")?;
            for (eid, x, psi) in wave.sample(&g, samples.max(1)) {
                writeln!(
                    s,
                    "{},{:.9e},{:.12e},{:.12e}",
                    g.edge(eid).name,
                    x,
                    psi.re,
                    psi.im
                )?;
            }
            emit(&out, s)?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Bands {
            preset: preset_name,
            l1,
            l2,
            coupling,
            kind,
            flux,
            bloch_grid,
            max_q,
            steps,
            e_min,
            e_max,
            out,
        } => {
            // Preset values first, explicit flags on top.
            let (mut p_l1, mut p_l2, mut p_coupling, mut p_kind) =
                (1.0, 1.0, 0.0, CouplingKind::Delta);
            if let Some(name) = &preset_name {
                match preset(name) {
                    Some(Preset::Rect(p)) => {
                        p_l1 = p.l1;
                        p_l2 = p.l2;
                        if let SiteCoupling::Uniform(a) = p.coupling {
                            p_coupling = a;
                        }
                        p_kind = p.kind;
                    }
                    Some(Preset::Comb(_)) => {
                        bail!("preset `{name}` is a comb model; use the `comb` subcommand")
                    }
                    None => bail!("unknown preset `{name}`"),
                }
            }
            let l1 = l1.unwrap_or(p_l1);
            let l2 = l2.unwrap_or(p_l2);
            let coupling = coupling.unwrap_or(p_coupling);
            let kind = kind.map(CouplingKind::from).unwrap_or(p_kind);
            let (p_num, q_den) = parse_flux(&flux)?;
            let q = BandQuery {
                l1,
                l2,
                coupling,
                kind,
                flux: 2.0 * std::f64::consts::PI * p_num as f64 / q_den as f64,
            };
            if !(e_max > e_min && e_min > 0.0) {
                bail!("band scans need 0 < e-min < e-max");
            }
            let energies: Vec<f64> = (1..=steps)
                .map(|i| e_min + (e_max - e_min) * i as f64 / steps as f64)
                .collect();
            let verdicts = if p_num == 0 {
                energies
                    .iter()
                    .map(|&e| band_test_rect(&q, e))
                    .collect::<Result<Vec<_>, _>>()
                    .context("spectral")?
            } else {
                magnetic_band_spectrum(&q, p_num, q_den, &energies, bloch_grid, max_q)
                    .context("spectral")?
            };
            let content = match out.format {
                Format::Json => format!("{}\n", serde_json::to_string_pretty(&verdicts)?),
                Format::Csv => {
                    let mut s = String::new();
                    writeln!(
                        s,
                        "# bands l1={l1} l2={l2} coupling={coupling} kind={kind} flux={p_num}/{q_den} seed={}",
                        out.seed
                    )?;
                    writeln!(s, "# energy,in_band,margin")?;
                    for v in &verdicts {
                        writeln!(s, "{:.12e},{},{:.12e}", v.energy, v.in_band, v.margin)?;
                    }
                    s
                }
            };
            emit(&out, content)?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Comb {
            preset: preset_name,
            spacing,
            coupling,
            omega,
            kind,
            j_min,
            j_max,
            k,
            range,
            out,
        } => {
            let mut params = match preset(&preset_name) {
                Some(Preset::Comb(p)) => p,
                Some(Preset::Rect(_)) => {
                    bail!("preset `{preset_name}` is a lattice; use the `bands` subcommand")
                }
                None => bail!("unknown preset `{preset_name}`"),
            };
            if let Some(s) = spacing {
                params.spacing = s;
            }
            if let Some(c) = coupling {
                params.line_coupling = c;
            }
            if let Some(w) = omega {
                params.omega = w;
            }
            if let Some(kd) = kind {
                params.kind = kd.into();
            }
            if j_max < j_min {
                bail!("empty window: j-max < j-min");
            }
            let window = CombWindow { j_min, j_max };

            let content = if let Some(k) = k {
                // Row dump at fixed wavenumber.
                let mut s = String::new();
                writeln!(
                    s,
                    "# comb rows preset={preset_name} spacing={} coupling={} omega={} kind={} k={k} seed={}",
                    params.spacing, params.line_coupling, params.omega, params.kind, out.seed
                )?;
                writeln!(s, "# j,tooth_length,diagonal,left,right")?;
                for j in j_min..=j_max {
                    let row = comb_row(&params, j, k).context("models")?;
                    writeln!(
                        s,
                        "{},{:.6e},{:.12e},{},{}",
                        j,
                        params.teeth.at(j),
                        row.diagonal,
                        row.left,
                        row.right
                    )?;
                }
                s
            } else {
                // Finite-window secular spectrum.
                let mut opts = range.options();
                if !(opts.e_min > 0.0) {
                    opts.e_min = 1e-3;
                }
                let model = WindowModel::Comb(params.clone(), window);
                let spec = window_secular_roots(&model, &opts).context("spectral")?;
                let (roots, windows) = (spec.roots, spec.windows);
                match out.format {
                    Format::Json => {
                        #[derive(Serialize)]
                        struct CombOut {
                            seed: u64,
                            searched: (f64, f64),
                            roots: Vec<(f64, usize)>,
                            windows: Vec<qgraph::spectral::ExclusionWindow>,
                        }
                        format!(
                            "{}\n",
                            serde_json::to_string_pretty(&CombOut {
                                seed: out.seed,
                                searched: (opts.e_min, opts.e_max),
                                roots,
                                windows,
                            })?
                        )
                    }
                    Format::Csv => {
                        let mut s = String::new();
                        writeln!(
                            s,
                            "# comb window [{j_min},{j_max}] spectrum in ({:.4e},{:.4e}] seed={}",
                            opts.e_min, opts.e_max, out.seed
                        )?;
                        for w in &windows {
                            writeln!(s, "# unsearched window [{:.9e}, {:.9e}]", w.e_lo, w.e_hi)?;
                        }
                        writeln!(s, "# energy,multiplicity")?;
                        for (e, m) in &roots {
                            writeln!(s, "{:.12e},{}", e, m)?;
                        }
                        s
                    }
                }
            };
            emit(&out, content)?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Oracle {
            input,
            kind,
            oracle,
            mesh,
            matching_tol,
            fd_tol,
            range,
            out,
        } => {
            let g = load_graph(&input)?;
            let kind = kind.map(CouplingKind::from).unwrap_or_else(|| g.coupling());
            let res = spectrum(&g, kind, &range.options()).context("spectral")?;
            let (run_matching, run_fd) = match oracle.as_str() {
                "matching" => (true, false),
                "fd" => (false, true),
                "both" => (true, true),
                other => bail!("unknown oracle `{other}` (matching | fd | both)"),
            };

            #[derive(Serialize)]
            struct OracleOut {
                seed: u64,
                kind: String,
                duality_roots: Vec<(f64, usize)>,
                matching: Option<CompareReport>,
                fd: Option<CompareReport>,
                ok: bool,
            }

            let mut ok = true;
            let matching = if run_matching {
                let reference =
                    matching_spectrum(&g, kind, (range.e_min, range.e_max), range.grid_step)
                        .context("oracle")?;
                let rep = compare(&res, &reference, matching_tol);
                ok &= rep.ok;
                Some(rep)
            } else {
                None
            };
            let fd = if run_fd {
                let mesh = mesh.unwrap_or(g.summary().min_length / 224.0);
                let count = res.roots.iter().map(|r| r.multiplicity).sum::<usize>() + 6;
                let values = fd_spectrum(
                    &g,
                    &FdConfig {
                        mesh,
                        count,
                        richardson: true,
                    },
                )
                .context("oracle")?;
                let in_range: Vec<f64> = values
                    .into_iter()
                    .filter(|e| *e > range.e_min && *e <= range.e_max - fd_tol)
                    .collect();
                let rep = compare(&res, &in_range, fd_tol);
                ok &= rep.ok;
                Some(rep)
            } else {
                None
            };

            let doc = OracleOut {
                seed: out.seed,
                kind: kind.to_string(),
                duality_roots: res.roots.iter().map(|r| (r.energy, r.multiplicity)).collect(),
                matching,
                fd,
                ok,
            };
            emit(&out, format!("{}\n", serde_json::to_string_pretty(&doc)?))?;
            Ok(if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
    }
}

