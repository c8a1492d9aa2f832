//! Text formats: point sets, ground-truth CSV and match CSV.
//!
//! Point sets hold one point per line as `x y theta` (radians), separated by
//! whitespace. `#` starts a comment line; blank lines are skipped. Numbers
//! are written with the shortest representation that parses back to the
//! same value.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::{DirectedPoint, PointSet, RigidTransform};
use crate::matcher::MatchResult;
use crate::synth::GroundTruth;

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_f64(field: &str, line: usize, what: &str) -> Result<f64> {
    let v: f64 = field
        .parse()
        .map_err(|_| parse_err(line, format!("{what}: cannot parse {field:?} as a number")))?;
    if !v.is_finite() {
        return Err(parse_err(
            line,
            format!("{what}: value {field:?} is not finite"),
        ));
    }
    Ok(v)
}

fn parse_index(field: &str, line: usize, what: &str) -> Result<usize> {
    field
        .trim()
        .parse()
        .map_err(|_| parse_err(line, format!("{what}: cannot parse {field:?} as an index")))
}

/// Content lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub fn parse_point_set(text: &str) -> Result<PointSet> {
    content_lines(text)
        .map(|(n, line)| {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(parse_err(
                    n,
                    format!("expected 3 fields `x y theta`, found {}", fields.len()),
                ));
            }
            Ok(DirectedPoint::new(
                parse_f64(fields[0], n, "x")?,
                parse_f64(fields[1], n, "y")?,
                parse_f64(fields[2], n, "theta")?,
            ))
        })
        .collect::<Result<Vec<_>>>()
        .map(PointSet::new)
}

pub fn format_point_set(set: &PointSet) -> String {
    let mut out = String::from("# x y theta\n");
    for p in set {
        let _ = writeln!(out, "{} {} {}", p.x(), p.y(), p.theta());
    }
    out
}

/// `i,j,is_outlier`, one row per original pair, `j` after shuffling.
pub fn format_truth_csv(gt: &GroundTruth) -> String {
    let mut out = String::from("i,j,is_outlier\n");
    for (i, j, outlier) in gt.rows() {
        let _ = writeln!(out, "{i},{j},{}", u8::from(outlier));
    }
    out
}

/// Reads the rows of a ground-truth CSV as written by
/// [`format_truth_csv`]. The header line is optional.
pub fn parse_truth_csv(text: &str) -> Result<Vec<(usize, usize, bool)>> {
    content_lines(text)
        .filter(|(_, l)| !l.starts_with("i,"))
        .map(|(n, line)| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 3 {
                return Err(parse_err(
                    n,
                    format!("expected `i,j,is_outlier`, found {line:?}"),
                ));
            }
            let outlier = match f[2].trim() {
                "0" | "false" => false,
                "1" | "true" => true,
                other => return Err(parse_err(n, format!("is_outlier: unexpected {other:?}"))),
            };
            Ok((
                parse_index(f[0], n, "i")?,
                parse_index(f[1], n, "j")?,
                outlier,
            ))
        })
        .collect()
}

/// `i,j,score` rows followed by `# transform theta tx ty`.
pub fn format_match_csv(result: &MatchResult) -> String {
    let mut out = String::from("i,j,score\n");
    for (&(i, j), s) in result.pairs.pairs().iter().zip(&result.scores) {
        let _ = writeln!(out, "{i},{j},{s}");
    }
    let t = result.global_transform;
    let _ = writeln!(out, "# transform {} {} {}", t.theta(), t.tx(), t.ty());
    out
}

/// Pairs, scores and the footer transform (if present) of a match CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedMatches {
    pub pairs: Vec<(usize, usize)>,
    pub scores: Vec<f64>,
    pub transform: Option<RigidTransform>,
}

pub fn parse_match_csv(text: &str) -> Result<ParsedMatches> {
    let mut parsed = ParsedMatches {
        pairs: Vec::new(),
        scores: Vec::new(),
        transform: None,
    };
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let line = raw.trim();
        if let Some(rest) = line.strip_prefix("# transform") {
            let f: Vec<&str> = rest.split_whitespace().collect();
            if f.len() != 3 {
                return Err(parse_err(n, "expected `# transform theta tx ty`"));
            }
            parsed.transform = Some(RigidTransform::new(
                parse_f64(f[0], n, "theta")?,
                parse_f64(f[1], n, "tx")?,
                parse_f64(f[2], n, "ty")?,
            ));
            continue;
        }
        if line.is_empty() || line.starts_with('#') || line.starts_with("i,") {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 3 {
            return Err(parse_err(
                n,
                format!("expected `i,j,score`, found {line:?}"),
            ));
        }
        parsed
            .pairs
            .push((parse_index(f[0], n, "i")?, parse_index(f[1], n, "j")?));
        parsed.scores.push(parse_f64(f[2].trim(), n, "score")?);
    }
    Ok(parsed)
}
