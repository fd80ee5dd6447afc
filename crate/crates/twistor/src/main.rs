//! Command-line front end: example catalogue, residual verification with
//! JSON reports, series propagation and contour-integral criteria.

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use std::process::ExitCode;
use std::sync::Arc;
use twistor::beltrami::{self, BeltramiData};
use twistor::catalogue::{self, CatalogueEntry, Construction, EntryData};
use twistor::chart::Chart;
use twistor::error::{Error, Result};
use twistor::exterior3::Metric3;
use twistor::gibbons_hawking::{self, GHData};
use twistor::report::{fmt_f64, json_escape, scan_values, CheckReport};
use twistor::series::{self, FlowSeries, SeriesKind};
use twistor::soliton;
use twistor::ScalarExpr;

#[derive(Parser)]
#[command(name = "twistor", version, about = "Twistorial 4-metrics from 3-dimensional data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindFilter {
    Gh,
    Beltrami,
}

#[derive(Subcommand)]
enum Command {
    /// List the built-in examples.
    Catalogue {
        /// Emit the listing as a JSON array.
        #[arg(long)]
        json: bool,
        /// Restrict to one construction kind.
        #[arg(long, value_enum)]
        kind: Option<KindFilter>,
    },
    /// Run a named residual check on an example and write a JSON report.
    Verify {
        #[arg(long)]
        example: String,
        /// One of: ricci-flat, self-dual, monopole-eq, beltrami-eq,
        /// twistoriality, ricci-blocks.
        #[arg(long)]
        check: String,
        /// Spatial sample box as "lo:hi,lo:hi,lo:hi".
        #[arg(long, value_name = "RANGES", allow_hyphen_values = true)]
        r#box: Option<String>,
        /// Fiber range as "lo:hi".
        #[arg(long, value_name = "RANGE", allow_hyphen_values = true)]
        fiber: Option<String>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// JSON config file; flags take precedence over its fields.
        #[arg(long)]
        config: Option<String>,
        /// Report destination (stdout when omitted).
        #[arg(long)]
        out: Option<String>,
    },
    /// Propagate a soliton-flow series from its fiber-zero section.
    Propagate {
        #[arg(long)]
        example: String,
        /// Section file in the series text format (kind taylor, constant
        /// `a`, index-0 component lines).
        #[arg(long)]
        section: String,
        #[arg(long)]
        order: i32,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Write the constraint report here as JSON.
        #[arg(long)]
        json: Option<String>,
    },
    /// Contour moments of a Laurent flow and the Einstein/self-duality verdicts.
    Contour {
        #[arg(long)]
        example: String,
        /// Flow file in the series text format.
        #[arg(long)]
        flow: String,
        /// Moment exponent.
        #[arg(long)]
        m: i64,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 64)]
        nodes: usize,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

/// Optional fields of the JSON config file; command-line flags win.
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    r#box: Option<String>,
    fiber: Option<String>,
    tol: Option<f64>,
    seed: Option<u64>,
    out: Option<String>,
}

const DEFAULT_TOL: f64 = 1e-8;
const DEFAULT_SEED: u64 = 7;

fn main() -> ExitCode {
    match run() {
        Ok(all_pass) => {
            if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run() -> Result<bool> {
    let cli = Cli::parse();
    match cli.command {
        Command::Catalogue { json, kind } => {
            cmd_catalogue(json, kind);
            Ok(true)
        }
        Command::Verify {
            example,
            check,
            r#box,
            fiber,
            tol,
            seed,
            config,
            out,
        } => {
            let file = match config {
                Some(path) => {
                    let text = std::fs::read_to_string(path)?;
                    serde_json::from_str::<FileConfig>(&text)
                        .map_err(|e| Error::Usage(format!("config file: {e}")))?
                }
                None => FileConfig::default(),
            };
            let boxed = r#box.or(file.r#box);
            let fiber = fiber.or(file.fiber);
            let tol = tol.or(file.tol).unwrap_or(DEFAULT_TOL);
            let seed = seed.or(file.seed).unwrap_or(DEFAULT_SEED);
            let out = out.or(file.out);
            cmd_verify(&example, &check, boxed.as_deref(), fiber.as_deref(), tol, seed, out)
        }
        Command::Propagate {
            example,
            section,
            order,
            tol,
            seed,
            json,
        } => cmd_propagate(
            &example,
            &section,
            order,
            tol.unwrap_or(DEFAULT_TOL),
            seed.unwrap_or(DEFAULT_SEED),
            json,
        ),
        Command::Contour {
            example,
            flow,
            m,
            radius,
            nodes,
            tol,
            seed,
        } => cmd_contour(
            &example,
            &flow,
            m,
            radius,
            nodes,
            tol.unwrap_or(DEFAULT_TOL),
            seed.unwrap_or(DEFAULT_SEED),
        ),
    }
}

fn cmd_catalogue(json: bool, kind: Option<KindFilter>) {
    let entries: Vec<CatalogueEntry> = catalogue::entries()
        .into_iter()
        .filter(|e| match kind {
            None => true,
            Some(KindFilter::Gh) => matches!(e.construction, Construction::GibbonsHawking),
            Some(KindFilter::Beltrami) => matches!(e.construction, Construction::Beltrami),
        })
        .collect();
    if json {
        let records: Vec<String> = entries
            .iter()
            .map(|e| {
                format!(
                    "{{\"id\":\"{}\",\"construction\":\"{}\",\"notes\":\"{}\"}}",
                    json_escape(e.id),
                    json_escape(e.construction.label()),
                    json_escape(e.notes)
                )
            })
            .collect();
        println!("[{}]", records.join(","));
    } else {
        for e in &entries {
            println!("{:<12} {:<16} {}", e.id, e.construction.label(), e.notes);
        }
    }
}

/// Parses "lo:hi" into a range.
fn parse_range(text: &str) -> Result<(f64, f64)> {
    let mut it = text.splitn(2, ':');
    let lo = it
        .next()
        .and_then(|s| s.trim().parse::<f64>().ok())
        .ok_or_else(|| Error::Usage(format!("bad range `{text}`, expected lo:hi")))?;
    let hi = it
        .next()
        .and_then(|s| s.trim().parse::<f64>().ok())
        .ok_or_else(|| Error::Usage(format!("bad range `{text}`, expected lo:hi")))?;
    if !(lo < hi) {
        return Err(Error::Usage(format!("empty range `{text}`")));
    }
    Ok((lo, hi))
}

/// Replaces the sample box of an example's chart, revalidating the box
/// against the chart's excluded loci before rebuilding the data on it.
fn rebox(entry: &CatalogueEntry, boxed: Option<&str>, fiber: Option<&str>) -> Result<EntryData> {
    let chart = entry.chart();
    let mut bounds: Vec<(f64, f64)> = chart.bounds().to_vec();
    if let Some(text) = boxed {
        let axes: Vec<&str> = text.split(',').collect();
        if axes.len() != 3 {
            return Err(Error::Usage(format!(
                "box `{text}` has {} axes, expected 3",
                axes.len()
            )));
        }
        for (k, ax) in axes.iter().enumerate() {
            bounds[k] = parse_range(ax)?;
        }
    }
    if let Some(text) = fiber {
        bounds[3] = parse_range(text)?;
    }
    chart.validate_box(&bounds)?;
    let new_chart = chart.with_bounds(bounds);
    let h = rebuilt_metric(entry.base_metric(), new_chart)?;
    Ok(match &entry.data {
        EntryData::Gh(d) => EntryData::Gh(GHData {
            h,
            u: d.u.clone(),
            a: d.a.clone(),
        }),
        EntryData::Bel(d) => EntryData::Bel(BeltramiData {
            h,
            a: d.a.clone(),
        }),
    })
}

fn rebuilt_metric(h: &Metric3, chart: Arc<Chart>) -> Result<Metric3> {
    let g = std::array::from_fn(|i| std::array::from_fn(|j| h.component(i, j).clone()));
    Metric3::new(chart, g)
}

struct RunMeta<'a> {
    example: &'a str,
    check: &'a str,
    bounds: Vec<(f64, f64)>,
    seed: u64,
    tol: f64,
}

fn report_json(meta: &RunMeta, reports: &[CheckReport]) -> String {
    let box_str = meta
        .bounds
        .iter()
        .take(3)
        .map(|(a, b)| format!("{a}:{b}"))
        .collect::<Vec<_>>()
        .join(",");
    let fiber_str = format!("{}:{}", meta.bounds[3].0, meta.bounds[3].1);
    let records: Vec<String> = reports
        .iter()
        .map(|r| {
            // sub-checks are qualified by the requested check id
            let check_id = if r.name == meta.check {
                r.name.clone()
            } else {
                format!("{}:{}", meta.check, r.name)
            };
            format!(
                concat!(
                    "{{\"tool_version\":\"{}\",\"example\":\"{}\",\"check\":\"{}\",",
                    "\"box\":\"{}\",\"fiber\":\"{}\",\"samples\":{},\"seed\":{},",
                    "\"max_abs_residual\":\"{}\",\"mean_abs_residual\":\"{}\",",
                    "\"tolerance\":\"{}\",\"pass\":{}}}"
                ),
                env!("CARGO_PKG_VERSION"),
                json_escape(meta.example),
                json_escape(&check_id),
                json_escape(&box_str),
                json_escape(&fiber_str),
                r.samples,
                meta.seed,
                fmt_f64(r.max_abs),
                fmt_f64(r.mean_abs),
                fmt_f64(meta.tol),
                r.passes(meta.tol)
            )
        })
        .collect();
    format!("[{}]", records.join(",\n "))
}

fn emit(out: Option<String>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text)?;
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn cmd_verify(
    example: &str,
    check: &str,
    boxed: Option<&str>,
    fiber: Option<&str>,
    tol: f64,
    seed: u64,
    out: Option<String>,
) -> Result<bool> {
    let entry = catalogue::entry(example)?;
    let data = rebox(&entry, boxed, fiber)?;
    let (chart, frame, build): (_, _, Box<dyn Fn() -> Result<twistor::curvature4::Metric4>>) =
        match &data {
            EntryData::Gh(d) => (
                d.chart().clone(),
                gibbons_hawking::gh_frame(d)?,
                Box::new({
                    let d = d.clone();
                    move || gibbons_hawking::gh_build(&d)
                }),
            ),
            EntryData::Bel(d) => (
                d.chart().clone(),
                beltrami::beltrami_frame(d)?,
                Box::new({
                    let d = d.clone();
                    move || beltrami::beltrami_build(&d)
                }),
            ),
        };
    let points = chart.default_samples(seed);
    let reports: Vec<CheckReport> = match check {
        "ricci-flat" => {
            let m = build()?;
            let ric: Vec<ScalarExpr> = m
                .ricci()
                .iter()
                .flat_map(|row| row.iter().cloned())
                .collect();
            vec![scan_values("ricci-flat", m.coords(), &points, &ric, |v| {
                v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
            })?]
        }
        "self-dual" => {
            let m = build()?;
            let mut max_abs = 0.0f64;
            let mut sum = 0.0f64;
            for p in &points {
                let w = m.weyl_asd_norm(p)?;
                max_abs = max_abs.max(w);
                sum += w;
            }
            vec![CheckReport {
                name: "self-dual".into(),
                samples: points.len(),
                max_abs,
                mean_abs: sum / points.len().max(1) as f64,
            }]
        }
        "monopole-eq" => match &data {
            EntryData::Gh(d) => gibbons_hawking::verify_monopole(d, &points)?,
            EntryData::Bel(_) => {
                return Err(Error::Usage(format!(
                    "check `monopole-eq` applies to curl-fibration examples, not `{example}`"
                )))
            }
        },
        "beltrami-eq" => match &data {
            EntryData::Bel(d) => beltrami::verify_beltrami(d, &points)?,
            EntryData::Gh(_) => {
                return Err(Error::Usage(format!(
                    "check `beltrami-eq` applies to curl-eigenfield examples, not `{example}`"
                )))
            }
        },
        "twistoriality" => soliton::twistoriality_check(&build()?, &frame, &points)?,
        "ricci-blocks" => {
            soliton::ricci_structure_check(&build()?, &frame, &points, tol)?.reports
        }
        other => {
            return Err(Error::Usage(format!(
                "unknown check `{other}`; see `verify --help` for the list"
            )))
        }
    };
    let meta = RunMeta {
        example,
        check,
        bounds: chart.bounds().to_vec(),
        seed,
        tol,
    };
    emit(out, &report_json(&meta, &reports))?;
    Ok(reports.iter().all(|r| r.passes(tol)))
}

fn cmd_propagate(
    example: &str,
    section_path: &str,
    order: i32,
    tol: f64,
    seed: u64,
    json: Option<String>,
) -> Result<bool> {
    let entry = catalogue::entry(example)?;
    let EntryData::Gh(data) = &entry.data else {
        return Err(Error::Usage(format!(
            "propagation needs a curl-fibration example, `{example}` is not one"
        )));
    };
    let text = std::fs::read_to_string(section_path)?;
    let parsed = FlowSeries::parse(&text, data.chart().coords())?;
    if parsed.kind != SeriesKind::Taylor {
        return Err(Error::Usage("the section file must declare `kind taylor`".into()));
    }
    if let Some((lo, hi)) = parsed.index_range() {
        if lo != 0 || hi != 0 {
            return Err(Error::Usage(format!(
                "the section file must carry index 0 only, found indices {lo}..={hi}"
            )));
        }
    }
    let frame = gibbons_hawking::gh_frame(data)?;
    let series = series::gh_propagate(data, &frame, &parsed.coefficient(0), parsed.a, order)?;
    print!("{}", series.to_text());
    let points = data.chart().sample_points(3, 40, seed);
    let reports = series::gh_constraint_residuals(data, &frame, &series, &points)?;
    let meta = RunMeta {
        example,
        check: "propagate",
        bounds: data.chart().bounds().to_vec(),
        seed,
        tol,
    };
    let body = report_json(&meta, &reports);
    match json {
        Some(path) => std::fs::write(path, &body)?,
        None => eprintln!("{body}"),
    }
    Ok(reports.iter().all(|r| r.passes(tol)))
}

fn cmd_contour(
    example: &str,
    flow_path: &str,
    m: i64,
    radius: f64,
    nodes: usize,
    tol: f64,
    seed: u64,
) -> Result<bool> {
    let entry = catalogue::entry(example)?;
    let EntryData::Bel(data) = &entry.data else {
        return Err(Error::Usage(format!(
            "contour criteria need a curl-eigenfield example, `{example}` is not one"
        )));
    };
    let text = std::fs::read_to_string(flow_path)?;
    let fiber = data.chart().coords()[3].clone();
    let flow = FlowSeries::parse(&text, data.chart().coords())?;
    if let Some((lo, hi)) = flow.index_range() {
        if let Some(w) = series::aliasing_warning(lo, hi, nodes) {
            eprintln!("warning: {w}");
        }
    }
    let cand = flow.candidate(&fiber);
    let frame = beltrami::beltrami_frame(data)?;
    let points = data.chart().sample_points(2, 10, seed);

    let comps = [&cand.f, &cand.x, &cand.y, &cand.z];
    let exprs: Vec<ScalarExpr> = comps.iter().map(|e| (*e).clone()).collect();
    let fiber_index = 3;
    let moments = series::contour_moment(
        &exprs,
        data.chart().coords(),
        fiber_index,
        m,
        radius,
        nodes,
        &points,
    )?;
    println!("moment m={m} of the flow components (f, x, y, z) per sample point:");
    for (p, vals) in points.iter().zip(&moments) {
        let cells: Vec<String> = vals
            .iter()
            .map(|c| format!("{}+{}i", fmt_f64(c.re), fmt_f64(c.im)))
            .collect();
        println!(
            "  [{}] -> {}",
            p.iter()
                .map(|x| fmt_f64(*x))
                .collect::<Vec<_>>()
                .join(", "),
            cells.join("  ")
        );
    }

    let outcome =
        series::einstein_and_selfdual_criteria(data, &frame, &cand, radius, nodes, tol, &points)?;
    println!("einstein: {} (obstruction {})", outcome.einstein, fmt_f64(outcome.einstein_obstruction));
    println!("self-dual: {} (trace-free defect {})", outcome.selfdual, fmt_f64(outcome.selfdual_defect));
    println!(
        "cross-check against the assembled metric: agreement {} ({})",
        fmt_f64(outcome.ricci_block_agreement),
        if outcome.verdicts_agree {
            "verdicts agree"
        } else {
            "verdicts disagree"
        }
    );
    Ok(outcome.verdicts_agree)
}
