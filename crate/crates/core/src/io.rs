//! Delimited-text input formats and the report document.
//!
//! Full:      `ordering_id,pos1,...,posK`, cells are item labels.
//! Partial:   `draw_id,universe_size,pos1,...,posd`, cells are ball numbers.
//! Shrinking: `round,pos1,...,posK`, rows padded with empty trailing cells.
//!
//! Error coordinates are file coordinates: row 1 is the header line and
//! column 1 is the id column.

use std::fmt::Write as _;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::ordering::{Draw, OrderingSet, PartialDrawSet, ShrinkingSeries};
use crate::result::TestResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Full,
    Partial,
    Shrinking,
}

impl FromStr for InputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(InputFormat::Full),
            "partial" => Ok(InputFormat::Partial),
            "shrinking" => Ok(InputFormat::Shrinking),
            other => Err(Error::InvalidParameter(format!("unknown format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Input {
    Full(OrderingSet),
    Partial(PartialDrawSet),
    Shrinking(ShrinkingSeries),
}

impl Input {
    pub fn format(&self) -> InputFormat {
        match self {
            Input::Full(_) => InputFormat::Full,
            Input::Partial(_) => InputFormat::Partial,
            Input::Shrinking(_) => InputFormat::Shrinking,
        }
    }
}

pub fn parse_orderings(path: &Path, format: InputFormat) -> Result<Input> {
    parse_reader(fs::File::open(path)?, format)
}

pub fn parse_str(text: &str, format: InputFormat) -> Result<Input> {
    parse_reader(text.as_bytes(), format)
}

fn read_records<R: Read>(reader: R) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::BadCell {
            row: i + 1,
            column: 0,
            message: e.to_string(),
        })?;
        records.push(rec.iter().map(str::to_string).collect::<Vec<_>>());
    }
    let mut iter = records.into_iter();
    let header = iter
        .next()
        .ok_or_else(|| Error::InvalidInput("empty file".into()))?;
    let rows: Vec<Vec<String>> = iter
        .filter(|r| !(r.len() == 1 && r[0].is_empty()))
        .collect();
    if rows.is_empty() {
        return Err(Error::InvalidInput("no data rows".into()));
    }
    Ok((header, rows))
}

fn check_header(header: &[String], leading: &[&str]) -> Result<usize> {
    for (i, want) in leading.iter().enumerate() {
        if header.get(i).map(String::as_str) != Some(*want) {
            return Err(Error::BadCell {
                row: 1,
                column: i + 1,
                message: format!("header must start with `{}`", leading.join(",")),
            });
        }
    }
    let positions = &header[leading.len()..];
    for (p, name) in positions.iter().enumerate() {
        if *name != format!("pos{}", p + 1) {
            return Err(Error::BadCell {
                row: 1,
                column: leading.len() + p + 1,
                message: format!("expected `pos{}`", p + 1),
            });
        }
    }
    if positions.is_empty() {
        return Err(Error::InvalidInput("header has no position columns".into()));
    }
    Ok(positions.len())
}

fn parse_reader<R: Read>(reader: R, format: InputFormat) -> Result<Input> {
    let (header, rows) = read_records(reader)?;
    match format {
        InputFormat::Full => {
            let k = check_header(&header, &["ordering_id"])?;
            let mut ids = Vec::with_capacity(rows.len());
            let mut cells = Vec::with_capacity(rows.len());
            for (r, row) in rows.iter().enumerate() {
                if row.len() != k + 1 {
                    return Err(Error::RaggedRow {
                        row: r + 2,
                        expected: k + 1,
                        found: row.len(),
                    });
                }
                ids.push(row[0].clone());
                cells.push(row[1..].to_vec());
            }
            let set = OrderingSet::from_labels(&cells).map_err(|e| e.shifted(1, 1))?;
            Ok(Input::Full(set.with_agent_ids(ids)?))
        }
        InputFormat::Partial => {
            let d = check_header(&header, &["draw_id", "universe_size"])?;
            let mut draws = Vec::with_capacity(rows.len());
            for (r, row) in rows.iter().enumerate() {
                if row.len() != d + 2 {
                    return Err(Error::RaggedRow {
                        row: r + 2,
                        expected: d + 2,
                        found: row.len(),
                    });
                }
                let number = |col: usize| -> Result<usize> {
                    row[col].parse::<usize>().map_err(|_| Error::BadCell {
                        row: r + 2,
                        column: col + 1,
                        message: format!("`{}` is not a positive integer", row[col]),
                    })
                };
                let universe = number(1)?;
                let balls = (2..d + 2).map(number).collect::<Result<Vec<_>>>()?;
                draws.push(Draw { universe, balls });
            }
            Ok(Input::Partial(
                PartialDrawSet::new(draws).map_err(|e| e.shifted(1, 2))?,
            ))
        }
        InputFormat::Shrinking => {
            let k = check_header(&header, &["round"])?;
            let mut cells = Vec::with_capacity(rows.len());
            for (r, row) in rows.iter().enumerate() {
                if row.len() > k + 1 {
                    return Err(Error::RaggedRow {
                        row: r + 2,
                        expected: k + 1,
                        found: row.len(),
                    });
                }
                let mut items: Vec<String> = row[1..].to_vec();
                while items.last().is_some_and(|c| c.is_empty()) {
                    items.pop();
                }
                cells.push(items);
            }
            Ok(Input::Shrinking(
                ShrinkingSeries::from_labels(&cells).map_err(|e| e.shifted(1, 1))?,
            ))
        }
    }
}

fn header(leading: &str, positions: usize) -> String {
    let mut h = leading.to_string();
    for p in 1..=positions {
        let _ = write!(h, ",pos{p}");
    }
    h
}

/// Writes a full-format file. Ordering ids default to `r1, r2, ...`.
pub fn write_full<W: Write>(set: &OrderingSet, mut out: W) -> Result<()> {
    writeln!(out, "{}", header("ordering_id", set.k()))?;
    for (i, row) in set.orderings().enumerate() {
        let id = set
            .agent_ids()
            .map_or_else(|| format!("r{}", i + 1), |ids| ids[i].clone());
        let labels: Vec<&str> = row.iter().map(|&x| set.items()[x].as_str()).collect();
        writeln!(out, "{id},{}", labels.join(","))?;
    }
    Ok(())
}

pub fn write_partial<W: Write>(draws: &PartialDrawSet, mut out: W) -> Result<()> {
    writeln!(out, "{}", header("draw_id,universe_size", draws.draw_len()))?;
    for (i, d) in draws.draws().iter().enumerate() {
        let balls: Vec<String> = d.balls.iter().map(usize::to_string).collect();
        writeln!(out, "d{},{},{}", i + 1, d.universe, balls.join(","))?;
    }
    Ok(())
}

pub fn write_shrinking<W: Write>(series: &ShrinkingSeries, mut out: W) -> Result<()> {
    let k = series.k();
    writeln!(out, "{}", header("round", k))?;
    for (r, round) in series.rounds().iter().enumerate() {
        let mut cells: Vec<&str> = round.iter().map(|&x| series.items()[x].as_str()).collect();
        cells.resize(k, "");
        writeln!(out, "{},{}", r + 1, cells.join(","))?;
    }
    Ok(())
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c if c.is_control() => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// 17 significant digits in exponent form.
fn real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// The report as a TOML document with a fixed key order. `df` is omitted
/// when the test has none, `mc_reps` and `seed` when it is analytic. The
/// seed is quoted so the whole u64 range survives TOML's signed integers.
pub fn render_report(result: &TestResult) -> String {
    let mut doc = String::new();
    let _ = writeln!(doc, "test_name = {}", quote(&result.test_name));
    let _ = writeln!(doc, "statistic = {}", real(result.statistic));
    if let Some(df) = result.df {
        let _ = writeln!(doc, "df = {df}");
    }
    let _ = writeln!(doc, "p_value = {}", real(result.p_value));
    let _ = writeln!(doc, "method = {}", quote(&result.method.to_string()));
    if let Some(reps) = result.mc_reps {
        let _ = writeln!(doc, "mc_reps = {reps}");
    }
    if let Some(seed) = result.seed {
        let _ = writeln!(doc, "seed = {}", quote(&seed.to_string()));
    }
    let warnings: Vec<String> = result.warnings.iter().map(|w| quote(w)).collect();
    let _ = writeln!(doc, "warnings = [{}]", warnings.join(", "));
    let _ = writeln!(
        doc,
        "tool_version = {}",
        quote(concat!("orderaudit ", env!("CARGO_PKG_VERSION")))
    );
    doc
}

pub fn emit_report(result: &TestResult, path: &Path) -> Result<()> {
    fs::write(path, render_report(result))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_row_becomes_ordering() {
        let input = parse_str("ordering_id,pos1,pos2,pos3\nr1,A,B,C\n", InputFormat::Full).unwrap();
        let Input::Full(set) = input else { panic!() };
        assert_eq!(set.ordering(0), &[0, 1, 2]);
        assert_eq!(set.agent_ids().unwrap(), ["r1"]);
    }

    #[test]
    fn duplicate_reported_at_file_column() {
        let err = parse_str(
            "ordering_id,pos1,pos2,pos3\nr0,A,B,C\nr1,A,A,C\n",
            InputFormat::Full,
        )
        .unwrap_err();
        assert!(
            matches!(err, Error::DuplicateItem { row: 3, column: 3, .. }),
            "{err:?}"
        );
        let err = parse_str("ordering_id,pos1,pos2,pos3\nr1,A,A,C\n", InputFormat::Full)
            .unwrap_err();
        assert!(matches!(err, Error::DuplicateItem { row: 2, column: 3, .. }), "{err:?}");
    }

    #[test]
    fn ragged_full_row() {
        let err = parse_str("ordering_id,pos1,pos2\nr1,A,B\nr2,A\n", InputFormat::Full)
            .unwrap_err();
        assert!(matches!(err, Error::RaggedRow { row: 3, .. }));
    }

    #[test]
    fn powerball_style_row() {
        let input = parse_str(
            "draw_id,universe_size,pos1,pos2,pos3,pos4,pos5\nd1,69,12,5,44,60,3\n",
            InputFormat::Partial,
        )
        .unwrap();
        let Input::Partial(draws) = input else { panic!() };
        assert_eq!(draws.draw_len(), 5);
        assert_eq!(draws.draws()[0].universe, 69);
        assert_eq!(draws.draws()[0].balls, vec![12, 5, 44, 60, 3]);
    }

    #[test]
    fn partial_ball_out_of_universe() {
        let err = parse_str(
            "draw_id,universe_size,pos1,pos2\nd1,10,3,11\n",
            InputFormat::Partial,
        )
        .unwrap_err();
        assert!(matches!(err, Error::UnknownItem { row: 2, column: 4, .. }), "{err:?}");
        let err = parse_str("draw_id,universe_size,pos1\nd1,ten,3\n", InputFormat::Partial)
            .unwrap_err();
        assert!(matches!(err, Error::BadCell { row: 2, column: 2, .. }), "{err:?}");
    }

    #[test]
    fn shrinking_rows_with_trailing_blanks() {
        let text = "round,pos1,pos2,pos3\n1,A,B,C\n2,C,A,\n";
        let Input::Shrinking(series) = parse_str(text, InputFormat::Shrinking).unwrap() else {
            panic!()
        };
        assert_eq!(series.rounds().len(), 2);
        let text = "round,pos1,pos2,pos3\n1,A,B,C\n2,C,D,\n";
        assert!(matches!(
            parse_str(text, InputFormat::Shrinking),
            Err(Error::UnknownItem { row: 3, column: 3, .. })
        ));
        let text = "round,pos1,pos2,pos3,pos4\n1,A,B,C,D\n2,C,A,,\n";
        assert!(matches!(
            parse_str(text, InputFormat::Shrinking),
            Err(Error::NonNestedRound { row: 3 })
        ));
    }

    #[test]
    fn bad_header() {
        assert!(parse_str("id,pos1,pos2\nr1,A,B\n", InputFormat::Full).is_err());
        assert!(parse_str("ordering_id,pos1,pos3\nr1,A,B\n", InputFormat::Full).is_err());
    }

    #[test]
    fn report_quoting() {
        assert_eq!(quote("a\"b\\c"), "\"a\\\"b\\\\c\"");
        assert_eq!(real(0.5), "5.0000000000000000e-1");
    }
}
