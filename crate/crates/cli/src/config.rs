use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use fhc_core::dyadic::{partition_set, ConstructedSequence};
use fhc_core::shiftlab::ParamFile;
use fhc_core::{IntegerSet, ShiftParameters, StepFunction, WeightFamily};

use crate::output::Format;

#[derive(Debug, Parser)]
#[command(
    name = "fhc",
    version,
    about = "Weighted densities, dyadic sequences and weighted-shift checks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Primary artifact path; defaults to `<command>.<ext>` (a directory for `export`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Subsequence density ratios `(k, n_k, ratio)` of a set under a weight family.
    Density(DensityArgs),
    /// Terms `(k, δ_k, n_k)` of the dyadic sequence.
    Sequence(SequenceArgs),
    /// Closed form against the recursion for every `k ≤ kmax`.
    Verify(VerifyArgs),
    /// Pairwise separation `n_j - n_i ≥ f(δ_i) + f(δ_j)`.
    Separation(SeparationArgs),
    /// Toeplitz conditions and summatory asymptotics of a weight family.
    Regularity(RegularityArgs),
    /// Per-index weights of the shift.
    ShiftBuild(ShiftBuildArgs),
    /// Characterization conditions of the shift at a finite horizon.
    ShiftCheck(ShiftCheckArgs),
    /// Tail bounds and empirical `A(r)` proxies of the sets `{P > p}`.
    FpDecay(FpDecayArgs),
    /// Reduced-scale bundle of every artifact into one directory.
    Export(ExportArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Density(_) => "density",
            Command::Sequence(_) => "sequence",
            Command::Verify(_) => "verify",
            Command::Separation(_) => "separation",
            Command::Regularity(_) => "regularity",
            Command::ShiftBuild(_) => "shift-build",
            Command::ShiftCheck(_) => "shift-check",
            Command::FpDecay(_) => "fp-decay",
            Command::Export(_) => "export",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct DensityArgs {
    /// all, mod:m:r[,r...], multiples:m, squares, pow2, nk:<f>, partition:<f>:l:nu
    #[arg(long, default_value = "nk:identity")]
    pub set: SetSpec,
    /// cesaro, C:r, A:r, B:r, Btilde:s
    #[arg(long, default_value = "cesaro")]
    pub family: WeightFamily,
    /// Largest element considered.
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub horizon: u64,
}

#[derive(Debug, Clone, Args)]
pub struct SequenceArgs {
    /// identity, tower:s, custom:a1,a2,...
    #[arg(long = "f", default_value = "identity")]
    pub f: StepFunction,
    #[arg(long, default_value_t = 1024, value_parser = clap::value_parser!(u64).range(1..))]
    pub kmax: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClosedForm {
    Identity,
    General,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = ClosedForm::Identity)]
    pub closed_form: ClosedForm,
    /// Step function for `--closed-form general`.
    #[arg(long = "f")]
    pub f: Option<StepFunction>,
    #[arg(long, default_value_t = 1 << 20, value_parser = clap::value_parser!(u64).range(1..))]
    pub kmax: u64,
}

#[derive(Debug, Clone, Args)]
pub struct SeparationArgs {
    #[arg(long = "f", default_value = "identity")]
    pub f: StepFunction,
    #[arg(long, default_value_t = 1 << 14, value_parser = clap::value_parser!(u64).range(2..))]
    pub kmax: u64,
    /// Check every pair `i < j` rather than adjacent pairs.
    #[arg(long)]
    pub exhaustive: bool,
}

#[derive(Debug, Clone, Args)]
pub struct RegularityArgs {
    #[arg(long, default_value = "cesaro")]
    pub family: WeightFamily,
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub horizon: u64,
}

#[derive(Debug, Clone, Args)]
pub struct ShiftBuildArgs {
    /// `default` or a JSON parameter file.
    #[arg(long, default_value = "default")]
    pub params: ParamsSource,
    /// Defaults to the parameter file's horizon, else 10000.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub horizon: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct ShiftCheckArgs {
    #[arg(long, default_value = "default")]
    pub params: ParamsSource,
    /// Defaults to the parameter file's horizon, else 10000000.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub horizon: Option<u64>,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..))]
    pub pmax: u32,
}

#[derive(Debug, Clone, Args)]
pub struct FpDecayArgs {
    #[arg(long, default_value = "default")]
    pub params: ParamsSource,
    /// Defaults to the parameter file's horizon, else 1000000.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub horizon: Option<u64>,
    /// Exponent of the `A(r)` family used for the empirical proxy.
    #[arg(long, default_value_t = 0.5)]
    pub r: f64,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6,7,8,9,10")]
    pub p_list: Vec<u32>,
}

#[derive(Debug, Clone, Args)]
pub struct ExportArgs {
    #[arg(long, default_value = "default")]
    pub params: ParamsSource,
}

/// Where shift parameters come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParamsSource {
    Default,
    File(PathBuf),
}

impl FromStr for ParamsSource {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(if s == "default" {
            ParamsSource::Default
        } else {
            ParamsSource::File(PathBuf::from(s))
        })
    }
}

impl fmt::Display for ParamsSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamsSource::Default => write!(f, "default"),
            ParamsSource::File(p) => write!(f, "{}", p.display()),
        }
    }
}

impl ParamsSource {
    /// Parameters plus the file's horizon, if any.
    pub fn load(&self) -> Result<(ShiftParameters, Option<u64>)> {
        match self {
            ParamsSource::Default => Ok((ShiftParameters::default(), None)),
            ParamsSource::File(path) => load_param_file(path),
        }
    }
}

fn load_param_file(path: &Path) -> Result<(ShiftParameters, Option<u64>)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file =
        ParamFile::from_json(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok((file.to_params()?, file.horizon))
}

#[derive(Debug, Clone)]
enum SetKind {
    All,
    Residues { modulus: u64, residues: Vec<u64> },
    Squares,
    Pow2,
    Nk(StepFunction),
    Partition { f: StepFunction, l: u32, nu: u32 },
}

/// A named integer set, as given on the command line.
#[derive(Debug, Clone)]
pub struct SetSpec {
    raw: String,
    kind: SetKind,
}

fn parse_num<T: FromStr>(s: &str, what: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| anyhow::anyhow!("invalid {what} {s:?}"))
}

impl FromStr for SetSpec {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let (head, rest) = s.split_once(':').unwrap_or((s, ""));
        let kind = match (head.trim().to_ascii_lowercase().as_str(), rest) {
            ("all", "") => SetKind::All,
            ("squares", "") => SetKind::Squares,
            ("pow2", "") => SetKind::Pow2,
            ("multiples", m) => {
                let modulus = parse_num(m, "modulus")?;
                IntegerSet::multiples(modulus)?;
                SetKind::Residues {
                    modulus,
                    residues: vec![0],
                }
            }
            ("mod", rest) => {
                let (m, rs) = rest.split_once(':').context("expected mod:m:r[,r...]")?;
                let modulus = parse_num(m, "modulus")?;
                let residues = rs
                    .split(',')
                    .map(|r| parse_num(r, "residue"))
                    .collect::<Result<Vec<u64>>>()?;
                IntegerSet::residues(modulus, residues.clone())?;
                SetKind::Residues { modulus, residues }
            }
            ("nk", f) => SetKind::Nk(f.parse()?),
            ("partition", rest) => {
                let mut parts = rest.rsplitn(3, ':');
                let (nu, l, f) = match (parts.next(), parts.next(), parts.next()) {
                    (Some(nu), Some(l), Some(f)) => (nu, l, f),
                    _ => bail!("expected partition:<f>:l:nu"),
                };
                SetKind::Partition {
                    f: f.parse()?,
                    l: parse_num(l, "l")?,
                    nu: parse_num(nu, "nu")?,
                }
            }
            _ => bail!("unknown set {s:?}"),
        };
        Ok(SetSpec {
            raw: s.to_string(),
            kind,
        })
    }
}

impl fmt::Display for SetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.raw)
    }
}

/// `n_1 < n_2 < …` up to `horizon`.
fn nk_up_to(f: &StepFunction, horizon: u64) -> Vec<u64> {
    ConstructedSequence::new(f.clone())
        .map(|t| t.n)
        .take_while(|&n| n <= horizon as u128)
        .map(|n| n as u64)
        .collect()
}

impl SetSpec {
    /// Elements in `[1, horizon]`, increasing.
    pub fn elements(&self, horizon: u64) -> Result<Vec<u64>> {
        let set = match &self.kind {
            SetKind::All => IntegerSet::naturals(),
            SetKind::Residues { modulus, residues } => {
                IntegerSet::residues(*modulus, residues.clone())?
            }
            SetKind::Squares => IntegerSet::sequence(|k| k * k),
            SetKind::Pow2 => IntegerSet::sequence(|k| 1 << (k - 1)),
            SetKind::Nk(f) => return Ok(nk_up_to(f, horizon)),
            SetKind::Partition { f, l, nu } => {
                let count = nk_up_to(f, horizon).len() as u64;
                if count == 0 {
                    return Ok(Vec::new());
                }
                partition_set(f, *l, *nu, count)?
            }
        };
        Ok(set.elements_up_to(horizon)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_specs() {
        let e = |s: &str, h| s.parse::<SetSpec>().unwrap().elements(h).unwrap();
        assert_eq!(e("all", 3), vec![1, 2, 3]);
        assert_eq!(e("mod:4:1,3", 8), vec![1, 3, 5, 7]);
        assert_eq!(e("multiples:5", 12), vec![5, 10]);
        assert_eq!(e("squares", 20), vec![1, 4, 9, 16]);
        assert_eq!(e("pow2", 20), vec![1, 2, 4, 8, 16]);
        assert_eq!(e("nk:identity", 12), vec![1, 3, 6, 9, 11]);
        assert!(e("partition:identity:1:1", 200)
            .iter()
            .all(|n| e("nk:identity", 200).contains(n)));
        for bad in [
            "mod:0:0",
            "mod:3",
            "multiples:x",
            "partition:identity:1",
            "nk:tower:0",
            "evens",
        ] {
            assert!(bad.parse::<SetSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn params_source() {
        assert_eq!(
            "default".parse::<ParamsSource>().unwrap(),
            ParamsSource::Default
        );
        assert!(matches!(
            "p.json".parse::<ParamsSource>().unwrap(),
            ParamsSource::File(_)
        ));
    }
}
