//! The line-oriented MMLP text format and the matching solution format.
//!
//! ```text
//! mmlp 1
//! agents 2
//! constraints 1
//! objectives 1
//! c <agent> <constraint> <coef> <port@agent> <port@constraint>
//! o <agent> <objective> <coef> <port@agent> <port@objective>
//! ```
//!
//! `#` starts a comment. Coefficients are written in shortest round-trip
//! decimal form, so parsing a serialized instance reproduces every bit.

use std::fmt::Write as _;

use super::{Edge, Instance, Solution};
use crate::error::{Error, Result};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Non-empty lines with comments stripped, paired with 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(n, raw)| {
        let body = raw.split('#').next().unwrap_or("");
        let fields: Vec<&str> = body.split_whitespace().collect();
        (!fields.is_empty()).then_some((n + 1, fields))
    })
}

fn parse_count(line: usize, fields: &[&str], key: &str) -> Result<usize> {
    match fields {
        [k, n] if *k == key => n.parse::<usize>().map_err(|_| {
            parse_err(
                line,
                format!("`{key}` needs a nonnegative integer, got `{n}`"),
            )
        }),
        _ => Err(parse_err(line, format!("expected `{key} <count>`"))),
    }
}

fn parse_field<T: std::str::FromStr>(line: usize, what: &str, s: &str) -> Result<T> {
    s.parse::<T>()
        .map_err(|_| parse_err(line, format!("bad {what} `{s}`")))
}

/// Parses an MMLP document and validates the result.
pub fn parse_instance(text: &str) -> Result<Instance> {
    let mut lines = content_lines(text);
    let (l1, header) = lines.next().ok_or_else(|| parse_err(1, "empty document"))?;
    if header != ["mmlp", "1"] {
        return Err(parse_err(l1, "expected header `mmlp 1`"));
    }
    let mut counts = [0usize; 3];
    for (slot, key) in counts
        .iter_mut()
        .zip(["agents", "constraints", "objectives"])
    {
        let (n, fields) = lines
            .next()
            .ok_or_else(|| parse_err(l1, format!("missing `{key}` line")))?;
        *slot = parse_count(n, &fields, key)?;
    }
    let [agents, constraints, objectives] = counts;
    let mut ce = Vec::new();
    let mut oe = Vec::new();
    for (n, fields) in lines {
        let (list, limit, kind) = match fields[0] {
            "c" => (&mut ce, constraints, "constraint"),
            "o" => (&mut oe, objectives, "objective"),
            other => return Err(parse_err(n, format!("unknown record `{other}`"))),
        };
        if fields.len() != 6 {
            return Err(parse_err(n, "edge records have exactly five fields"));
        }
        let agent: usize = parse_field(n, "agent", fields[1])?;
        let node: usize = parse_field(n, kind, fields[2])?;
        let coef: f64 = parse_field(n, "coefficient", fields[3])?;
        let agent_port: u32 = parse_field(n, "port", fields[4])?;
        let node_port: u32 = parse_field(n, "port", fields[5])?;
        if agent >= agents {
            return Err(parse_err(n, format!("agent {agent} out of range")));
        }
        if node >= limit {
            return Err(parse_err(n, format!("{kind} {node} out of range")));
        }
        list.push(Edge {
            agent,
            node,
            coef,
            agent_port,
            node_port,
        });
    }
    Instance::checked(agents, constraints, objectives, ce, oe)
}

/// Writes `inst` in MMLP form: header, counts, then constraint edges and
/// objective edges in stored order.
pub fn serialize_instance(inst: &Instance) -> Result<String> {
    inst.ensure_valid()?;
    let mut out = String::new();
    writeln!(out, "mmlp 1").unwrap();
    writeln!(out, "agents {}", inst.n_agents()).unwrap();
    writeln!(out, "constraints {}", inst.n_constraints()).unwrap();
    writeln!(out, "objectives {}", inst.n_objectives()).unwrap();
    for (tag, edges) in [
        ("c", inst.constraint_edges()),
        ("o", inst.objective_edges()),
    ] {
        for e in edges {
            writeln!(
                out,
                "{tag} {} {} {:?} {} {}",
                e.agent, e.node, e.coef, e.agent_port, e.node_port
            )
            .unwrap();
        }
    }
    Ok(out)
}

pub fn serialize_solution(x: &Solution, omega: f64) -> String {
    let mut out = String::new();
    for (v, value) in x.values.iter().enumerate() {
        writeln!(out, "x {v} {value:?}").unwrap();
    }
    writeln!(out, "omega {omega:?}").unwrap();
    out
}

/// `(agent, value)` pairs and the optional utility.
pub type ParsedSolution = (Vec<(usize, f64)>, Option<f64>);

/// Reads `x <agent> <value>` lines and an optional `omega <value>` line.
pub fn parse_solution(text: &str) -> Result<ParsedSolution> {
    let mut pairs = Vec::new();
    let mut omega = None;
    for (n, fields) in content_lines(text) {
        match fields.as_slice() {
            ["x", v, value] => {
                pairs.push((parse_field(n, "agent", v)?, parse_field(n, "value", value)?))
            }
            ["omega", value] => omega = Some(parse_field(n, "value", value)?),
            _ => {
                return Err(parse_err(
                    n,
                    "expected `x <agent> <value>` or `omega <value>`",
                ))
            }
        }
    }
    Ok((pairs, omega))
}
