//! CSV and JSON formats: kernel columns, coefficient tables, families,
//! Mittag-Leffler comparisons, solutions, and problem files.
//!
//! Numbers are written in scientific notation with 17 significant digits.

use std::path::{Path, PathBuf};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::calculus::VecSeq;
use crate::error::{Error, Result};
use crate::kernels::KernelSeq;
use crate::operator::{load_matrix_file, LinOp, OperatorDescriptor};
use crate::resolvent::{CoeffTable, MlComparison, ResolventFamily};
use crate::solver::{FdeProblem, FdeSolution, Forcing};

pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn to_csv(header: &[String], rows: &[Vec<String>]) -> String {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ASCII output")
}

/// Columns `n, t, k`.
pub fn kernel_csv(k: &KernelSeq) -> String {
    let header = ["n", "t", "k"].map(String::from);
    let rows: Vec<Vec<String>> = k
        .values()
        .iter()
        .enumerate()
        .map(|(n, v)| vec![n.to_string(), fmt_num(n as f64 * k.tau()), fmt_num(*v)])
        .collect();
    to_csv(&header, &rows)
}

/// Columns `n, a_1, ..., a_{N+1}, row_sum`; entries past `n+1` are empty.
pub fn coeff_table_csv(t: &CoeffTable) -> String {
    let width = t.horizon() + 1;
    let mut header = vec!["n".to_string()];
    header.extend((1..=width).map(|l| format!("a_{l}")));
    header.push("row_sum".into());
    let rows: Vec<Vec<String>> = (0..=t.horizon())
        .map(|n| {
            let mut row = vec![n.to_string()];
            row.extend((0..width).map(|i| t.row(n).get(i).map(|&a| fmt_num(a)).unwrap_or_default()));
            row.push(fmt_num(t.row_sum(n)));
            row
        })
        .collect();
    to_csv(&header, &rows)
}

/// Column names for the entries of one operator: `s` for a scalar multiple
/// of the identity, `s_i` for diagonal entries, `s_i_j` row-major otherwise.
fn operator_columns(op: &LinOp, prefix: &str) -> Vec<String> {
    match op {
        LinOp::Scalar { .. } => vec![prefix.to_string()],
        LinOp::Diagonal(d) => (0..d.len()).map(|i| format!("{prefix}_{i}")).collect(),
        LinOp::Dense(m) => (0..m.nrows())
            .flat_map(|i| (0..m.ncols()).map(move |j| format!("{prefix}_{i}_{j}")))
            .collect(),
    }
}

fn operator_values(op: &LinOp) -> Vec<f64> {
    match op {
        LinOp::Scalar { value, .. } => vec![*value],
        LinOp::Diagonal(d) => d.iter().copied().collect(),
        LinOp::Dense(_) => op.row_major(),
    }
}

/// One row per `n`: `n, t, <entries of S^n>, <extra columns>`.
pub fn family_csv(f: &ResolventFamily, extra: &[(&str, Vec<f64>)]) -> String {
    let mut header = vec!["n".to_string(), "t".to_string()];
    header.extend(operator_columns(f.get(0), "s"));
    header.extend(extra.iter().map(|(name, _)| name.to_string()));
    let rows: Vec<Vec<String>> = (0..=f.horizon())
        .map(|n| {
            let mut row = vec![n.to_string(), fmt_num(n as f64 * f.tau())];
            row.extend(operator_values(f.get(n)).into_iter().map(fmt_num));
            row.extend(extra.iter().map(|(_, col)| col.get(n).map(|&x| fmt_num(x)).unwrap_or_default()));
            row
        })
        .collect();
    to_csv(&header, &rows)
}

/// Columns `t, discrete, exact, abs_diff`.
pub fn ml_csv(c: &MlComparison) -> String {
    let header = ["t", "discrete", "exact", "abs_diff"].map(String::from);
    let rows: Vec<Vec<String>> = c
        .rows
        .iter()
        .map(|r| vec![fmt_num(r.t), fmt_num(r.discrete), fmt_num(r.exact), fmt_num(r.abs_diff)])
        .collect();
    to_csv(&header, &rows)
}

/// Script for gnuplot drawing the discrete values as circles over the
/// continuous profile.
pub fn ml_plot_script(c: &MlComparison, csv_path: &Path) -> String {
    format!(
        "# gnuplot script\n\
         set datafile separator ','\n\
         set key autotitle columnhead\n\
         set xlabel 't'\n\
         set title 'rho = {rho}, alpha = {alpha}, beta = {beta}, N = {n}'\n\
         set xrange [0:1]\n\
         plot '{path}' using 1:3 with lines title 'e_{{alpha,beta}}(t)', \\\n\
         \x20    '{path}' using 1:2 with points pointtype 6 title 'S^n'\n",
        rho = c.rho,
        alpha = c.alpha,
        beta = c.beta,
        n = c.n_max,
        path = csv_path.display()
    )
}

/// Columns `n, t, u_*, utilde_*, residual`; the residual is empty for `n < 2`.
pub fn solution_csv(s: &FdeSolution) -> String {
    let d = s.trajectory.dim();
    let mut header = vec!["n".to_string(), "t".to_string()];
    header.extend((0..d).map(|i| format!("u_{i}")));
    header.extend((0..d).map(|i| format!("utilde_{i}")));
    header.push("residual".into());
    let tau = s.trajectory.tau();
    let rows: Vec<Vec<String>> = (0..=s.trajectory.horizon())
        .map(|n| {
            let mut row = vec![n.to_string(), fmt_num(n as f64 * tau)];
            row.extend(s.trajectory.entries()[n].iter().map(|&x| fmt_num(x)));
            row.extend(s.family_trajectory.entries()[n].iter().map(|&x| fmt_num(x)));
            let r = s.residuals.iter().find(|(m, _)| *m == n).map(|(_, r)| fmt_num(r.abs));
            row.push(r.unwrap_or_default());
            row
        })
        .collect();
    to_csv(&header, &rows)
}

/// Metadata written next to family and table outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub command: String,
    pub alpha: f64,
    pub beta: Option<f64>,
    pub tau: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub operator: Option<String>,
    pub method: Option<String>,
    /// Named summary values (maximum residuals, differences, errors).
    #[serde(default)]
    pub summary: Vec<(String, f64)>,
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Problem file: `{"alpha", "tau", "N", "operator" | "matrix", "x0", "forcing"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub alpha: f64,
    pub tau: f64,
    #[serde(rename = "N")]
    pub n: usize,
    /// Operator descriptor such as `laplacian:16:0.0625`.
    #[serde(default)]
    pub operator: Option<String>,
    /// Path to a whitespace-separated matrix, relative to the problem file.
    #[serde(default)]
    pub matrix: Option<PathBuf>,
    pub x0: Vec<f64>,
    /// `zero`, `constant:<c>`, or the path of a CSV file.
    #[serde(default = "default_forcing")]
    pub forcing: String,
}

fn default_forcing() -> String {
    "zero".into()
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Builds the problem; relative paths are resolved against `base`.
    pub fn build(&self, base: &Path) -> Result<FdeProblem> {
        let op = match (&self.operator, &self.matrix) {
            (Some(desc), None) => desc.parse::<OperatorDescriptor>()?.build()?,
            (None, Some(path)) => load_matrix_file(base.join(path))?,
            _ => return Err(Error::Parse("problem needs exactly one of \"operator\" or \"matrix\"".into())),
        };
        let forcing = match self.forcing.parse::<Forcing>() {
            Ok(f) => f,
            Err(_) => Forcing::Sequence(load_sequence_csv(&base.join(&self.forcing), self.tau)?),
        };
        FdeProblem::new(self.alpha, op, DVector::from_vec(self.x0.clone()), forcing, self.tau, self.n)
    }
}

pub fn load_problem(path: &Path) -> Result<FdeProblem> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    ProblemFile::parse(&text)?.build(base)
}

/// Reads a sequence from CSV with a header line. A first column named `n`
/// is taken as an index and must count `0, 1, 2, ...`; all other columns
/// are the vector components.
pub fn load_sequence_csv(path: &Path, tau: f64) -> Result<VecSeq> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_sequence_csv(&text, tau)
}

pub fn parse_sequence_csv(text: &str, tau: f64) -> Result<VecSeq> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let indexed = reader
        .headers()
        .map_err(|e| Error::Parse(format!("sequence CSV header: {e}")))?
        .get(0)
        .is_some_and(|h| h == "n");
    let mut entries = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse(format!("sequence CSV row {}: {e}", row + 1)))?;
        let mut values = record.iter().map(|field| {
            field.parse::<f64>().map_err(|_| Error::Parse(format!("sequence CSV row {}: bad number {field:?}", row + 1)))
        });
        if indexed {
            let n = values.next().transpose()?.unwrap_or(f64::NAN);
            if n != row as f64 {
                return Err(Error::Parse(format!("sequence CSV row {} has index {n}", row + 1)));
            }
        }
        entries.push(DVector::from_vec(values.collect::<Result<Vec<_>>>()?));
    }
    VecSeq::new(tau, entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::kernel_seq;
    use crate::resolvent::{coeff_table, family_recursive};

    #[test]
    fn numbers_have_seventeen_digits() {
        assert_eq!(fmt_num(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_num(-2.0), "-2.0000000000000000e0");
        let x = 0.123_456_789_012_345_68_f64;
        assert_eq!(fmt_num(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn kernel_columns() {
        let csv = kernel_csv(&kernel_seq(2.0, 1.0, 3).unwrap());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "n,t,k");
        assert_eq!(lines[4], "3,3.0000000000000000e0,4.0000000000000000e0");
    }

    #[test]
    fn table_rows_are_padded() {
        let csv = coeff_table_csv(&coeff_table(1.0, 1.0, 0.5, 2).unwrap());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "n,a_1,a_2,a_3,row_sum");
        assert!(lines[1].starts_with("0,1.0000000000000000e0,,,"));
    }

    #[test]
    fn family_columns_follow_variant() {
        let lap = crate::operator::laplacian_1d(2, 1.0).unwrap();
        let f = family_recursive(&lap, 1.5, 1.0, 0.1, 1).unwrap();
        let csv = family_csv(&f, &[("residual", vec![0.0, 1.0])]);
        assert_eq!(csv.lines().next().unwrap(), "n,t,s_0_0,s_0_1,s_1_0,s_1_1,residual");
    }

    #[test]
    fn sequence_csv_round_trip() {
        let s = parse_sequence_csv("n,f0,f1\n0,1,2\n1,3,4\n", 0.5).unwrap();
        assert_eq!(s.horizon(), 1);
        assert_eq!(s.entries()[1][1], 4.0);
        let plain = parse_sequence_csv("f\n1.5\n2.5\n", 0.5).unwrap();
        assert_eq!(plain.first_components(), vec![1.5, 2.5]);
        assert!(parse_sequence_csv("n,f\n1,1\n", 0.5).is_err());
        assert!(parse_sequence_csv("f\nabc\n", 0.5).is_err());
    }

    #[test]
    fn problem_file_builds() {
        let p = ProblemFile::parse(
            r#"{"alpha": 1.5, "tau": 0.1, "N": 10, "operator": "scalar:-1", "x0": [1.0], "forcing": "constant:1"}"#,
        )
        .unwrap()
        .build(Path::new("."))
        .unwrap();
        assert_eq!(p.horizon(), 10);
        assert!(ProblemFile::parse(r#"{"alpha": 1.5, "tau": 0.1, "N": 10, "x0": [1.0]}"#)
            .unwrap()
            .build(Path::new("."))
            .is_err());
        assert!(ProblemFile::parse(r#"{"alpha": 1.5}"#).is_err());
    }
}
