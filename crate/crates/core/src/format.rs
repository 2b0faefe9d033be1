//! Textual instance files.
//!
//! A file declares a value range, variables with interval or explicit-set
//! domains, and constraints. `#` starts a line comment. The grammar is
//! documented in `docs/format.md`; parse errors carry line and column.
//!
//! Values in a file may use any integer range; they are normalized to
//! `1..=d` on parse and the offset is kept so serialization round-trips.

use crate::domain::{Domain, IntervalDomain, SetDomain, Value, VarId};
use crate::solver::{ConstraintSpec, Problem};
use std::collections::HashMap;
use std::fmt::Write as _;
use thiserror::Error;

/// A parsed instance file: a [`Problem`] plus the value offset that maps
/// internal values back to the file's range (`file value = internal + offset`).
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceFile {
    pub problem: Problem,
    pub offset: i64,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("{line}:{col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

/// One whitespace-separated token with its column.
#[derive(Debug, Clone, Copy)]
struct Tok<'a> {
    s: &'a str,
    col: usize,
}

fn tokenize(line: &str) -> Vec<Tok<'_>> {
    let body = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    let mut toks = Vec::new();
    let mut col = 1;
    for piece in body.split_inclusive(char::is_whitespace) {
        let trimmed = piece.trim_end_matches(char::is_whitespace);
        if !trimmed.is_empty() {
            toks.push(Tok { s: trimmed, col });
        }
        col += piece.chars().count();
    }
    toks
}

fn err<T>(line: usize, col: usize, msg: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line,
        col,
        msg: msg.into(),
    })
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Parses `lo..hi` into `(lo, hi)`.
fn parse_range(tok: Tok<'_>, line: usize) -> Result<(i64, i64), ParseError> {
    let Some((a, b)) = tok.s.split_once("..") else {
        return err(line, tok.col, format!("expected `lo..hi`, found `{}`", tok.s));
    };
    let lo = a.parse::<i64>();
    let hi = b.parse::<i64>();
    match (lo, hi) {
        (Ok(lo), Ok(hi)) if lo <= hi => Ok((lo, hi)),
        (Ok(lo), Ok(hi)) => err(line, tok.col, format!("empty range {lo}..{hi}")),
        _ => err(line, tok.col, format!("expected `lo..hi`, found `{}`", tok.s)),
    }
}

pub fn parse(text: &str) -> Result<InstanceFile, ParseError> {
    let mut range: Option<(i64, i64)> = None;
    let mut names: Vec<String> = Vec::new();
    let mut by_name: HashMap<String, usize> = HashMap::new();
    let mut domains: Vec<Domain> = Vec::new();
    let mut constraints: Vec<ConstraintSpec> = Vec::new();

    for (li, raw) in text.lines().enumerate() {
        let line = li + 1;
        let toks = tokenize(raw);
        let Some(&head) = toks.first() else { continue };
        let rest = &toks[1..];

        let need_range = |col: usize| -> Result<(i64, i64), ParseError> {
            range.ok_or(ParseError {
                line,
                col,
                msg: "`range lo..hi` must come first".into(),
            })
        };
        let lookup = |tok: Tok<'_>| -> Result<VarId, ParseError> {
            if let Some(&id) = by_name.get(tok.s) {
                Ok(VarId(id))
            } else {
                err(line, tok.col, format!("unknown variable `{}`", tok.s))
            }
        };

        match head.s {
            "range" => {
                if range.is_some() {
                    return err(line, head.col, "duplicate `range` declaration");
                }
                let [tok] = rest else {
                    return err(line, head.col, "usage: range lo..hi");
                };
                range = Some(parse_range(*tok, line)?);
            }
            "var" => {
                let (lo, hi) = need_range(head.col)?;
                let [name, kw, dom] = rest else {
                    return err(line, head.col, "usage: var NAME in lo..hi | {v,v,...}");
                };
                if !is_ident(name.s) {
                    return err(line, name.col, format!("bad variable name `{}`", name.s));
                }
                if kw.s != "in" {
                    return err(line, kw.col, "expected `in`");
                }
                if by_name.contains_key(name.s) {
                    return err(line, name.col, format!("duplicate variable `{}`", name.s));
                }
                let offset = lo - 1;
                let check = |v: i64, col: usize| -> Result<Value, ParseError> {
                    if v < lo || v > hi {
                        err(line, col, format!("value {v} outside range {lo}..{hi}"))
                    } else {
                        Ok((v - offset) as Value)
                    }
                };
                let domain = if dom.s.starts_with('{') {
                    let inner = dom.s.trim_start_matches('{');
                    let Some(inner) = inner.strip_suffix('}') else {
                        return err(line, dom.col, "expected `{v,v,...}`");
                    };
                    let mut set = SetDomain::new();
                    for piece in inner.split(',') {
                        if piece.is_empty() {
                            return err(line, dom.col, "empty value in set");
                        }
                        let v = piece.parse::<i64>().map_err(|_| ParseError {
                            line,
                            col: dom.col,
                            msg: format!("expected an integer, found `{piece}`"),
                        })?;
                        set.insert(check(v, dom.col)?);
                    }
                    if set.is_empty() {
                        return err(line, dom.col, "empty domain");
                    }
                    Domain::Set(set)
                } else {
                    let (a, b) = parse_range(*dom, line)?;
                    Domain::Interval(IntervalDomain::new(check(a, dom.col)?, check(b, dom.col)?))
                };
                by_name.insert(name.s.to_string(), names.len());
                names.push(name.s.to_string());
                domains.push(domain);
            }
            "alldifferent" => {
                if rest.is_empty() {
                    return err(line, head.col, "usage: alldifferent NAME...");
                }
                let scope = rest
                    .iter()
                    .map(|&t| lookup(t))
                    .collect::<Result<Vec<_>, _>>()?;
                constraints.push(ConstraintSpec::AllDifferent(scope));
            }
            "overlapping_alldifferent" => {
                // Syntax: overlapping_alldifferent s: A B C t: C D E
                let Some(split) = rest.iter().position(|t| t.s == "t:") else {
                    return err(line, head.col, "usage: overlapping_alldifferent s: NAME... t: NAME...");
                };
                if rest.first().map(|t| t.s) != Some("s:") || split < 2 || split + 1 >= rest.len()
                {
                    return err(line, head.col, "usage: overlapping_alldifferent s: NAME... t: NAME...");
                }
                let s = rest[1..split]
                    .iter()
                    .map(|&t| lookup(t))
                    .collect::<Result<Vec<_>, _>>()?;
                let t = rest[split + 1..]
                    .iter()
                    .map(|&t| lookup(t))
                    .collect::<Result<Vec<_>, _>>()?;
                constraints.push(ConstraintSpec::Overlapping { s, t });
            }
            "less_than" => {
                let [a, b] = rest else {
                    return err(line, head.col, "usage: less_than NAME NAME");
                };
                constraints.push(ConstraintSpec::LessThan(lookup(*a)?, lookup(*b)?));
            }
            other => {
                return err(
                    line,
                    head.col,
                    format!("unknown constraint kind `{other}`"),
                );
            }
        }
    }

    let Some((lo, hi)) = range else {
        return err(1, 1, "missing `range lo..hi` declaration");
    };
    let problem = Problem {
        d: (hi - lo + 1) as Value,
        names,
        domains,
        constraints,
    };
    problem.validate().map_err(|e| ParseError {
        line: 1,
        col: 1,
        msg: e.to_string(),
    })?;
    Ok(InstanceFile {
        problem,
        offset: lo - 1,
    })
}

/// Canonical serialization; `parse(serialize(f)) == f`.
pub fn serialize(file: &InstanceFile) -> String {
    let p = &file.problem;
    let off = file.offset;
    let mut out = String::new();
    let _ = writeln!(out, "range {}..{}", 1 + off, p.d as i64 + off);
    for (v, dom) in p.domains.iter().enumerate() {
        let name = &p.names[v];
        match dom {
            Domain::Interval(iv) => {
                let _ = writeln!(out, "var {name} in {}..{}", iv.lb as i64 + off, iv.ub as i64 + off);
            }
            Domain::Set(s) => {
                let vals: Vec<String> =
                    s.iter().map(|v| (v as i64 + off).to_string()).collect();
                let _ = writeln!(out, "var {name} in {{{}}}", vals.join(","));
            }
        }
    }
    let name_of = |v: &VarId| p.names[v.0].as_str();
    for c in &p.constraints {
        match c {
            ConstraintSpec::AllDifferent(scope) => {
                let names: Vec<&str> = scope.iter().map(name_of).collect();
                let _ = writeln!(out, "alldifferent {}", names.join(" "));
            }
            ConstraintSpec::Overlapping { s, t } => {
                let sn: Vec<&str> = s.iter().map(name_of).collect();
                let tn: Vec<&str> = t.iter().map(name_of).collect();
                let _ = writeln!(
                    out,
                    "overlapping_alldifferent s: {} t: {}",
                    sn.join(" "),
                    tn.join(" ")
                );
            }
            ConstraintSpec::LessThan(x, y) => {
                let _ = writeln!(out, "less_than {} {}", name_of(x), name_of(y));
            }
        }
    }
    out
}

/// Serializes a generated problem with the identity offset.
pub fn serialize_problem(problem: &Problem) -> String {
    serialize(&InstanceFile {
        problem: problem.clone(),
        offset: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{exam_problem, gen_pathological, gen_random, RandomSpec};

    #[test]
    fn round_trip_generated_problems() {
        for problem in [
            exam_problem(),
            gen_pathological(3),
            gen_random(&RandomSpec {
                n: 3,
                d: 8,
                o: 2,
                seed: 5,
            }),
        ] {
            let text = serialize_problem(&problem);
            let parsed = parse(&text).expect("serialized form parses");
            assert_eq!(parsed.problem, problem);
            assert_eq!(parsed.offset, 0);
            assert_eq!(serialize(&parsed), text);
        }
    }

    #[test]
    fn offset_ranges_normalize_and_round_trip() {
        let text = "range 0..4\nvar A in 0..2\nvar B in {0,3}\nalldifferent A B\n";
        let f = parse(text).unwrap();
        assert_eq!(f.offset, -1);
        assert_eq!(f.problem.d, 5);
        assert_eq!(
            f.problem.domains[0],
            Domain::Interval(IntervalDomain::new(1, 3))
        );
        assert_eq!(
            f.problem.domains[1],
            Domain::Set(SetDomain::from_values([1, 4]))
        );
        assert_eq!(serialize(&f), text);
    }

    #[test]
    fn unknown_constraint_kind_is_positioned() {
        let e = parse("range 1..3\nvar A in 1..3\nnonsense A\n").unwrap_err();
        assert_eq!((e.line, e.col), (3, 1));
        assert!(e.msg.contains("unknown constraint kind"));
    }

    #[test]
    fn unknown_variable_is_positioned() {
        let e = parse("range 1..3\nvar A in 1..3\nalldifferent A B\n").unwrap_err();
        assert_eq!(e.line, 3);
        assert!(e.col > 1);
        assert!(e.msg.contains("unknown variable `B`"));
    }

    #[test]
    fn value_outside_range_rejected() {
        let e = parse("range 1..3\nvar A in 1..4\n").unwrap_err();
        assert!(e.msg.contains("outside range"));
    }

    #[test]
    fn comments_and_blank_lines_ignored() {
        let f = parse("# header\nrange 1..2\n\nvar A in 1..2 # trailing\n").unwrap();
        assert_eq!(f.problem.n_vars(), 1);
    }
}
