//! One function per subcommand. Each returns the primary table and a verdict;
//! [`run`] writes the artifact and its summary.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use fhc_core::dyadic::{
    separation_check, separation_check_exhaustive, verify_closed_form, ClosedFormRoute,
    ConstructedSequence, SeparationReport,
};
use fhc_core::shiftlab::{
    audit_parameters, format_rational, fp_decay_report, verify_characterization, Condition,
    Rational, AUDIT_U_MAX,
};
use fhc_core::weights::{
    density_via_subsequence, regularity_report, summatory_report, REGULARITY_WARNING_ENTRY,
};
use fhc_core::{IntegerSet, ShiftParameters, ShiftProfile, StepFunction, WeightFamily};
use log::info;
use serde_json::{json, Value};

use crate::config::{
    Cli, ClosedForm, Command, DensityArgs, ExportArgs, FpDecayArgs, RegularityArgs, SeparationArgs,
    SequenceArgs, ShiftBuildArgs, ShiftCheckArgs, VerifyArgs,
};
use crate::output::{Cell, Format, Table};

const DEFAULT_BUILD_HORIZON: u64 = 10_000;
const DEFAULT_CHECK_HORIZON: u64 = 10_000_000;
const DEFAULT_DECAY_HORIZON: u64 = 1_000_000;

/// The result of one computation, before anything is written.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub table: Table,
    pub pass: bool,
    /// First failing instance, when `pass` is false.
    pub witness: Option<String>,
    pub config: Value,
    pub results: Value,
}

impl Outcome {
    fn new(table: Table, config: Value, results: Value) -> Self {
        Outcome {
            table,
            pass: true,
            witness: None,
            config,
            results,
        }
    }

    fn verdict(mut self, pass: bool, witness: Option<String>) -> Self {
        self.pass = pass;
        self.witness = if pass {
            None
        } else {
            witness.or_else(|| Some("no witness recorded".into()))
        };
        self
    }
}

/// What a finished run wrote.
#[derive(Debug, Clone)]
pub struct Report {
    pub command: &'static str,
    pub pass: bool,
    pub witness: Option<String>,
    pub artifacts: Vec<PathBuf>,
    pub summary: PathBuf,
}

fn summary_path(artifact: &Path) -> PathBuf {
    let mut name = artifact
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_default();
    name.push(".summary.json");
    artifact.with_file_name(name)
}

fn write_summary(path: &Path, body: Value) -> Result<()> {
    let text = serde_json::to_string_pretty(&body)? + "\n";
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn run(cli: &Cli) -> Result<Report> {
    let started = Instant::now();
    let command = cli.command.name();
    if let Command::Export(args) = &cli.command {
        let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("export"));
        return export(args, &dir, cli.format, started);
    }
    let outcome = match &cli.command {
        Command::Density(a) => density(a)?,
        Command::Sequence(a) => sequence(a)?,
        Command::Verify(a) => verify(a)?,
        Command::Separation(a) => separation(a)?,
        Command::Regularity(a) => regularity(a)?,
        Command::ShiftBuild(a) => shift_build(a)?,
        Command::ShiftCheck(a) => shift_check(a)?,
        Command::FpDecay(a) => fp_decay(a)?,
        Command::Export(_) => unreachable!("handled above"),
    };
    let path = cli
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{command}.{}", cli.format.extension())));
    outcome.table.write(&path, cli.format)?;
    let summary = summary_path(&path);
    write_summary(
        &summary,
        json!({
            "tool": "fhc",
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "config": outcome.config,
            "format": cli.format,
            "artifact": path.display().to_string(),
            "rows": outcome.table.len(),
            "elapsed_seconds": started.elapsed().as_secs_f64(),
            "pass": outcome.pass,
            "witness": outcome.witness,
            "results": outcome.results,
        }),
    )?;
    Ok(Report {
        command,
        pass: outcome.pass,
        witness: outcome.witness,
        artifacts: vec![path],
        summary,
    })
}

pub fn density(args: &DensityArgs) -> Result<Outcome> {
    let elements = args.set.elements(args.horizon)?;
    if elements.is_empty() {
        bail!("set {} has no elements up to {}", args.set, args.horizon);
    }
    let count = elements.len();
    info!(
        "density: {count} elements of {} under {}",
        args.set, args.family
    );
    let sub = density_via_subsequence(&IntegerSet::Sorted(elements), &args.family, count)?;
    let mut table = Table::new(&["k", "n_k", "ratio"]);
    for (i, (&n, &r)) in sub.elements.iter().zip(&sub.ratios).enumerate() {
        table.push(vec![(i as u64 + 1).into(), n.into(), r.into()]);
    }
    let from = count.div_ceil(10);
    let config =
        json!({"set": args.set.to_string(), "family": args.family.name(), "horizon": args.horizon});
    let results = json!({
        "elements": count,
        "tail_window": [from, count],
        "tail_min": sub.min_over(from, count),
        "last_ratio": sub.ratios.last(),
        "last_entry": sub.last_entry,
        "regularity_warning": sub.regularity_warning,
    });
    Ok(Outcome::new(table, config, results))
}

pub fn sequence(args: &SequenceArgs) -> Result<Outcome> {
    let mut table = Table::new(&["k", "delta_k", "n_k"]);
    for t in ConstructedSequence::new(args.f.clone()).take(args.kmax as usize) {
        table.push(vec![t.k.into(), t.delta.into(), t.n.into()]);
    }
    let last = table.rows.last().map(|r| r[2].render());
    let config = json!({"f": args.f.to_string(), "kmax": args.kmax});
    Ok(Outcome::new(
        table,
        config,
        json!({"terms": args.kmax, "last_n_k": last}),
    ))
}

pub fn verify(args: &VerifyArgs) -> Result<Outcome> {
    let route = match (args.closed_form, &args.f) {
        (ClosedForm::Identity, None | Some(StepFunction::Identity)) => ClosedFormRoute::Identity,
        (ClosedForm::Identity, Some(f)) => {
            bail!("--closed-form identity only applies to f = identity, got {f}")
        }
        (ClosedForm::General, f) => {
            ClosedFormRoute::General(f.clone().unwrap_or(StepFunction::Identity))
        }
    };
    let f = route.step_function();
    info!(
        "verify: closed form against recursion for k <= {}",
        args.kmax
    );
    let scan = verify_closed_form(&route, args.kmax)?;
    let mut table = Table::new(&["k", "recursive", "closed"]);
    for m in &scan.mismatches {
        table.push(vec![m.k.into(), m.recursive.into(), m.closed.into()]);
    }
    let witness = scan.mismatches.first().map(|m| {
        format!(
            "k={}: recursive {} != closed {}",
            m.k, m.recursive, m.closed
        )
    });
    let route_name = match route {
        ClosedFormRoute::Identity => "identity",
        ClosedFormRoute::General(_) => "general",
    };
    let config = json!({"closed_form": route_name, "f": f.to_string(), "kmax": args.kmax});
    let results = json!({"checked": scan.checked, "mismatches": scan.mismatches.len()});
    Ok(Outcome::new(table, config, results).verdict(scan.mismatches.is_empty(), witness))
}

fn separation_table(report: &SeparationReport) -> Table {
    let mut table = Table::new(&["kind", "i", "j", "gap", "required"]);
    if let Some(w) = report.witness {
        table.push(vec![
            "pair".into(),
            w.i.into(),
            w.j.into(),
            w.gap.into(),
            w.required.into(),
        ]);
    }
    if let Some(k) = report.floor_witness {
        table.push(vec![
            "floor".into(),
            k.into(),
            k.into(),
            "".into(),
            "".into(),
        ]);
    }
    table
}

pub fn separation(args: &SeparationArgs) -> Result<Outcome> {
    info!(
        "separation: f = {}, K = {}, exhaustive = {}",
        args.f, args.kmax, args.exhaustive
    );
    let report = if args.exhaustive {
        separation_check_exhaustive(&args.f, args.kmax)?
    } else {
        separation_check(&args.f, args.kmax)?
    };
    let witness = report
        .witness
        .map(|w| {
            format!(
                "(i, j) = ({}, {}): gap {} < {}",
                w.i, w.j, w.gap, w.required
            )
        })
        .or_else(|| {
            report
                .floor_witness
                .map(|k| format!("n_{k} < f(delta_{k})"))
        });
    let config = json!({"f": args.f.to_string(), "kmax": args.kmax, "exhaustive": args.exhaustive});
    let results = json!({"pairs_checked": report.pairs_checked, "holds": report.holds});
    Ok(Outcome::new(separation_table(&report), config, results).verdict(report.holds, witness))
}

fn opt(v: Option<f64>) -> Cell {
    v.map_or_else(|| Cell::Text(String::new()), Cell::Float)
}

pub fn regularity(args: &RegularityArgs) -> Result<Outcome> {
    regularity_for(&args.family, args.horizon)
}

fn regularity_for(family: &WeightFamily, horizon: u64) -> Result<Outcome> {
    let r = regularity_report(family, horizon)?;
    let s = summatory_report(family, horizon)?;
    let mut table = Table::new(&["quantity", "value"]);
    let rows: [(&str, Cell); 10] = [
        ("family", r.family.clone().into()),
        ("horizon", horizon.into()),
        ("max_entry_last_row", r.max_entry_last_row.into()),
        ("max_entry_bound", opt(r.max_entry_bound)),
        ("first_column_entry", r.first_column_entry.into()),
        ("row_sum_defect", r.row_sum_defect.into()),
        ("sup_abs_row_sum", r.sup_abs_row_sum.into()),
        ("ln_phi", s.ln_phi.into()),
        ("ln_phi_asymptotic", opt(s.ln_phi_asymptotic)),
        ("asymptotic_ratio", opt(s.asymptotic_ratio)),
    ];
    for (q, v) in rows {
        table.push(vec![q.into(), v]);
    }
    let pass = r.within_bounds();
    let witness = format!(
        "row_sum_defect {:e}, max_entry {:e}, bound {:?}",
        r.row_sum_defect, r.max_entry_last_row, r.max_entry_bound
    );
    let config = json!({"family": family.name(), "horizon": horizon});
    let results = json!({
        "row_sum_defect": r.row_sum_defect,
        "max_entry_last_row": r.max_entry_last_row,
        "max_entry_bound": r.max_entry_bound,
        "asymptotic_ratio": s.asymptotic_ratio,
        "entries_small": r.max_entry_last_row <= REGULARITY_WARNING_ENTRY,
    });
    Ok(Outcome::new(table, config, results).verdict(pass, Some(witness)))
}

fn params_json(params: &ShiftParameters) -> Value {
    json!({
        "a": params.a,
        "eps": format_rational(&params.eps),
        "b_formula": params.b_formula(),
        "partition": params.partition.name(),
    })
}

pub fn shift_build(args: &ShiftBuildArgs) -> Result<Outcome> {
    let (params, file_horizon) = args.params.load()?;
    let horizon = args
        .horizon
        .or(file_horizon)
        .unwrap_or(DEFAULT_BUILD_HORIZON);
    shift_build_for(params, horizon, &args.params.to_string())
}

fn shift_build_for(params: ShiftParameters, horizon: u64, source: &str) -> Result<Outcome> {
    let config = json!({"params": source, "parameters": params_json(&params), "horizon": horizon});
    let profile = ShiftProfile::new(params)?;
    let (lo, hi) = (Rational::from_integer(-1), Rational::from_integer(1));
    let mut table = Table::new(&["n", "log2_product", "weight"]);
    let mut first_bad = None;
    let mut prev = profile.log2_product(0);
    for n in 0..=horizon {
        let next = profile.log2_product(n + 1);
        let lw = next - prev;
        if first_bad.is_none() && !(lo <= lw && lw <= hi) {
            first_bad = Some(format!("n={n}: log2 w_n = {}", format_rational(&lw)));
        }
        if n >= 1 {
            table.push(vec![
                n.into(),
                Cell::Exact(format_rational(&prev)),
                profile.weight_at(n).into(),
            ]);
        }
        prev = next;
    }
    let results = json!({"weights_checked": horizon + 1, "weights_in_range": first_bad.is_none()});
    Ok(Outcome::new(table, config, results).verdict(first_bad.is_none(), first_bad))
}

fn shift_horizon(file: Option<u64>, flag: Option<u64>, default: u64) -> u64 {
    flag.or(file).unwrap_or(default)
}

pub fn shift_check(args: &ShiftCheckArgs) -> Result<Outcome> {
    let (params, file_horizon) = args.params.load()?;
    let horizon = shift_horizon(file_horizon, args.horizon, DEFAULT_CHECK_HORIZON);
    shift_check_for(params, horizon, args.pmax, &args.params.to_string())
}

fn shift_check_for(
    params: ShiftParameters,
    horizon: u64,
    pmax: u32,
    source: &str,
) -> Result<Outcome> {
    let config = json!({"params": source, "parameters": params_json(&params), "horizon": horizon, "pmax": pmax});
    let audit = audit_parameters(&params, AUDIT_U_MAX);
    let profile = ShiftProfile::new(params)?;
    info!("shift-check: horizon {horizon}, pmax {pmax}");
    let report = verify_characterization(&profile, horizon, pmax)?;

    let status = |ok: bool| if ok { "pass" } else { "fail" };
    let mut table = Table::new(&["condition", "status", "witness"]);
    let audit_witness = audit
        .first_failure()
        .map(|c| format!("{}: {}", c.name, c.detail))
        .unwrap_or_default();
    table.push(vec![
        "parameters".into(),
        status(audit.passed()).into(),
        audit_witness.clone().into(),
    ]);
    let flags = report.flags;
    let conditions = [
        (Condition::A, flags.a),
        (Condition::B, flags.b),
        (Condition::C, flags.c),
        (Condition::D, flags.d),
        (Condition::GapLemma, flags.gap_lemma),
    ];
    for (c, ok) in conditions {
        let w = report
            .violations
            .iter()
            .find(|v| v.condition == c)
            .map(|v| v.witness())
            .unwrap_or_default();
        table.push(vec![c.label().into(), status(ok).into(), w.into()]);
    }
    let pass = audit.passed() && flags.all();
    let witness = table
        .rows
        .iter()
        .find(|r| r[1] == Cell::from("fail"))
        .map(|r| format!("condition {}: {}", r[0].render(), r[2].render()));
    let results = json!({
        "parameters_pass": audit.passed(),
        "flags": flags,
        "pairs_checked": report.pairs_checked,
        "violation_count": report.violation_count,
        "windows": report.windows,
    });
    Ok(Outcome::new(table, config, results).verdict(pass, witness))
}

pub fn fp_decay(args: &FpDecayArgs) -> Result<Outcome> {
    let (params, file_horizon) = args.params.load()?;
    let horizon = shift_horizon(file_horizon, args.horizon, DEFAULT_DECAY_HORIZON);
    fp_decay_for(
        params,
        horizon,
        args.r,
        &args.p_list,
        &args.params.to_string(),
    )
}

fn fp_decay_for(
    params: ShiftParameters,
    horizon: u64,
    r: f64,
    ps: &[u32],
    source: &str,
) -> Result<Outcome> {
    let config = json!({"params": source, "parameters": params_json(&params), "horizon": horizon, "r": r, "p_list": ps});
    let profile = ShiftProfile::new(params)?;
    let report = fp_decay_report(&profile, r, ps, horizon)?;
    let mut table = Table::new(&["p", "tail_bound", "members", "empirical_proxy"]);
    for row in &report.rows {
        table.push(vec![
            row.p.into(),
            row.tail_bound.into(),
            row.members.into(),
            row.empirical_proxy.into(),
        ]);
    }
    let witness = report
        .rows
        .windows(2)
        .find(|w| w[1].tail_bound >= w[0].tail_bound)
        .map(|w| {
            format!(
                "T({}) = {:e} >= T({}) = {:e}",
                w[1].p, w[1].tail_bound, w[0].p, w[0].tail_bound
            )
        });
    let results = json!({
        "evaluation_points": report.evaluation_points,
        "tail_decreasing": report.tail_decreasing,
        "proxy_decreasing": report.proxy_decreasing,
    });
    Ok(Outcome::new(table, config, results).verdict(report.tail_decreasing, witness))
}

fn slug(name: &str) -> String {
    name.to_ascii_lowercase()
        .chars()
        .filter(|c| !matches!(c, '(' | ')'))
        .collect()
}

/// Families in the regularity part of the export bundle.
const EXPORT_FAMILIES: [&str; 8] = [
    "cesaro", "C:-1", "C:2", "A:1/2", "A:1", "B:1/2", "B:2", "Btilde:2",
];

fn export(args: &ExportArgs, dir: &Path, format: Format, started: Instant) -> Result<Report> {
    let (params, _) = args.params.load()?;
    let source = args.params.to_string();
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;

    let mut parts: Vec<(String, Outcome)> = vec![
        (
            "sequence".into(),
            sequence(&SequenceArgs {
                f: StepFunction::Identity,
                kmax: 4096,
            })?,
        ),
        (
            "verify-identity".into(),
            verify(&VerifyArgs {
                closed_form: ClosedForm::Identity,
                f: None,
                kmax: 1 << 16,
            })?,
        ),
        (
            "verify-tower2".into(),
            verify(&VerifyArgs {
                closed_form: ClosedForm::General,
                f: Some(StepFunction::tower(2)?),
                kmax: 1 << 12,
            })?,
        ),
        (
            "separation".into(),
            separation(&SeparationArgs {
                f: StepFunction::Identity,
                kmax: 1 << 11,
                exhaustive: true,
            })?,
        ),
        (
            "density".into(),
            density(&DensityArgs {
                set: "nk:identity".parse()?,
                family: WeightFamily::subexponential(2.0)?,
                horizon: 100_000,
            })?,
        ),
    ];
    for name in EXPORT_FAMILIES {
        let family: WeightFamily = name.parse()?;
        parts.push((
            format!("regularity-{}", slug(&family.name())),
            regularity_for(&family, 100_000)?,
        ));
    }
    parts.push((
        "shift-build".into(),
        shift_build_for(params.clone(), 20_000, &source)?,
    ));
    parts.push((
        "shift-check".into(),
        shift_check_for(params.clone(), 4_000_000, 2, &source)?,
    ));
    parts.push((
        "fp-decay".into(),
        fp_decay_for(params, 100_000, 0.5, &(1..=10).collect::<Vec<_>>(), &source)?,
    ));

    let mut artifacts = Vec::new();
    let mut entries = serde_json::Map::new();
    for (name, outcome) in &parts {
        let path = dir.join(format!("{name}.{}", format.extension()));
        outcome.table.write(&path, format)?;
        entries.insert(
            name.clone(),
            json!({
                "artifact": path.file_name().map(|f| f.to_string_lossy().into_owned()),
                "config": outcome.config,
                "pass": outcome.pass,
                "witness": outcome.witness,
                "results": outcome.results,
            }),
        );
        artifacts.push(path);
    }
    let failed = parts.iter().find(|(_, o)| !o.pass);
    let witness = failed.map(|(name, o)| format!("{name}: {}", o.witness.as_deref().unwrap_or("")));
    let summary = dir.join("summary.json");
    write_summary(
        &summary,
        json!({
            "tool": "fhc",
            "version": env!("CARGO_PKG_VERSION"),
            "command": "export",
            "format": format,
            "elapsed_seconds": started.elapsed().as_secs_f64(),
            "pass": failed.is_none(),
            "witness": witness,
            "parts": entries,
        }),
    )?;
    Ok(Report {
        command: "export",
        pass: failed.is_none(),
        witness,
        artifacts,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_sits_next_to_artifact() {
        assert_eq!(
            summary_path(Path::new("out/ratios.csv")),
            PathBuf::from("out/ratios.csv.summary.json")
        );
    }

    #[test]
    fn slugs() {
        assert_eq!(slug("Btilde(2)"), "btilde2");
        assert_eq!(slug("C(-1)"), "c-1");
    }

    #[test]
    fn identity_route_rejects_other_f() {
        let args = VerifyArgs {
            closed_form: ClosedForm::Identity,
            f: Some(StepFunction::tower(1).unwrap()),
            kmax: 8,
        };
        assert!(verify(&args).is_err());
    }

    #[test]
    fn small_verify_passes() {
        let o = verify(&VerifyArgs {
            closed_form: ClosedForm::General,
            f: None,
            kmax: 512,
        })
        .unwrap();
        assert!(o.pass && o.table.is_empty());
        assert_eq!(o.results["checked"], 512);
    }
}
